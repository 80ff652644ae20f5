"""Command-line entry point: ``progfree <subcommand> [options]``.

Exit status: 0 on success, 1 on domain errors, 2 on usage errors.  Every
report carries the tool version and the resolved configuration.  All
randomness derives from ``--seed`` via numpy's PCG64 generator.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import mpmath

from . import __version__
from . import bounds as bnd
from . import constructions, fourier, polymethod, search, slicerank
from .core import (BinaryPointSet, DomainError, FpPointSet, Z4PointSet, count_ap3, is_ap3_free,
                   parse_point_set, write_point_set)
from .kernels import BACKEND

SCHEMA = 1


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    seed: int
    threads: int
    budget: int
    format: str
    options: dict


# ---------------------------------------------------------------- helpers


def _load_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from None


def _load_set(path: str):
    text = _load_text(path)
    head = next((ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")), [])
    if head and head[0] == "N":
        return constructions.parse_integer_set(text)
    return parse_point_set(text)


def _need_fp(s) -> FpPointSet:
    if not isinstance(s, FpPointSet):
        raise DomainError("this subcommand needs a set in F_p^n (odd prime p)")
    return s


def _points(s) -> list[list[int]]:
    return [list(pt) for pt in s.points]


def _check_writable(path: str | None) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir():
        raise UsageError(f"output directory {parent} does not exist")


# ---------------------------------------------------------------- subcommands


def cmd_verify(a, cfg):
    s = _load_set(a.input)
    if isinstance(s, constructions.IntegerSet):
        return {"kind": "interval", "N": s.N, "size": len(s), "ap3_free": search.is_ap3_free_integers(s.members)}
    if isinstance(s, BinaryPointSet):
        raise DomainError("3APs are trivial in F_2^n; use modulus 4 or an odd prime")
    return {"kind": f"Z_{s.modulus}^n", "modulus": s.modulus, "n": s.n, "size": len(s), "ap3_free": is_ap3_free(s)}


def cmd_count(a, cfg):
    s = _need_fp(_load_set(a.input))
    return {"p": s.p, "n": s.n, "size": len(s), "count": count_ap3(s)}


def cmd_fourier(a, cfg):
    s = _need_fp(_load_set(a.input))
    table = fourier.dft(s, cap=a.cap)
    return {
        "p": s.p, "n": s.n, "size": len(s),
        "count_fourier": fourier.count_ap3_fourier(s, cap=a.cap),
        "count_direct": count_ap3(s),
        "parseval_sum": round(table.parseval_sum(), 6),
        "parseval_expected": s.ambient_size * len(s),
    }


def cmd_increment(a, cfg):
    s = _need_fp(_load_set(a.input))
    cert = fourier.best_affine_hyperplane(s, cap=a.cap)
    return cert.to_json()


def cmd_capsearch(a, cfg):
    _check_writable(a.emit_witness)
    res = search.max_ap3_free(a.p, a.n, cfg.budget, threads=cfg.threads, seed=cfg.seed, cap=a.cap)
    if a.emit_witness:
        write_point_set(res.witness, a.emit_witness)
    return {"p": a.p, "n": a.n, "size": res.size, "proven_optimal": res.proven_optimal,
            "nodes_explored": res.nodes_explored, "witness": _points(res.witness)}


def cmd_intsearch(a, cfg):
    _check_writable(a.emit_witness)
    res = search.max_ap3_free_interval(a.N, cfg.budget, threads=cfg.threads, seed=cfg.seed)
    if a.emit_witness:
        constructions.write_integer_set(res.witness, a.emit_witness)
    return {"N": a.N, "size": res.size, "proven_optimal": res.proven_optimal,
            "nodes_explored": res.nodes_explored, "witness": list(res.witness.members)}


def cmd_sunflower(a, cfg):
    _check_writable(a.emit_witness)
    res = search.max_sunflower_free(a.n, cfg.budget, threads=cfg.threads, seed=cfg.seed, cap=a.cap)
    if a.emit_witness:
        search.write_family(res.witness, a.emit_witness)
    return {"n": a.n, "size": res.size, "proven_optimal": res.proven_optimal,
            "nodes_explored": res.nodes_explored, "witness": [f"{m:x}" for m in res.witness.members]}


def cmd_lemma1(a, cfg):
    if a.input:
        if a.d is None:
            raise UsageError("--d is required with --in")
        s = _load_set(a.input)
        if not isinstance(s, BinaryPointSet):
            raise DomainError("lemma1 --in needs a point set over F_2 (header '2 n')")
        return polymethod.lemma1_verify(s, a.d).to_json()
    instances = polymethod.lemma1_instances(a.count, cfg.seed, max_n=a.max_n)
    violations, met = [], 0
    for idx, (pts, d, n) in enumerate(instances):
        rep = polymethod.lemma1_verify(pts, d, n)
        met += rep.threshold_met
        if rep.threshold_met and rep.violations:
            violations.append({"instance": idx, **rep.to_json()})
    return {"instances": len(instances), "threshold_met": met, "violations": violations}


def cmd_clp_check(a, cfg):
    s = _load_set(a.input)
    if not isinstance(s, Z4PointSet):
        raise DomainError("clp-check needs a point set over Z_4 (header '4 n')")
    out = {"n": s.n, "size": len(s), "disjoint": polymethod.clp_disjointness_check(s), "ap3_free": is_ap3_free(s)}
    if len(s):
        reg = polymethod.regularize(s)
        out["regularization"] = {"N": reg.N, "retained": reg.retained, "slices_kept": len(reg.kept)}
    return out


def cmd_clp_bound(a, cfg):
    cert = polymethod.clp_bound(a.n)
    return {**cert.to_json(), "verified": cert.verify()}


def cmd_slicerank(a, cfg):
    _check_writable(a.emit_witness)
    dec = slicerank.slice_decompose(a.n, cap=a.cap)
    bound = slicerank.multinomial_bound(a.n, 3).value
    pts = dec.domain.array
    target = slicerank.cap_polynomial(pts[:, None, None, :], pts[None, :, None, :], pts[None, None, :, :])
    ok = bool((dec.reconstruct() == target).all())
    if a.emit_witness:
        Path(a.emit_witness).write_text(json.dumps(dec.to_json(), sort_keys=True) + "\n")
    return {"n": a.n, "slice_count": len(dec), "axis_counts": dec.axis_counts(),
            "multinomial_bound": str(bound), "reconstruction_exact": ok}


def cmd_multinomial(a, cfg):
    return slicerank.multinomial_bound(a.n, a.p).to_json()


def cmd_exponent(a, cfg):
    rep = slicerank.slice_exponent(a.p)
    out = rep.to_json()
    if a.check_n:
        mb = slicerank.multinomial_bound(a.check_n, a.p)
        out["check_n"] = a.check_n
        out["check_base"] = mpmath.nstr(mb.exponent_base, 20)
    return out


def cmd_bounds(a, cfg):
    if a.name:
        return bnd.report(a.name).to_json()
    return {"bounds": [r.to_json() for r in bnd.all_reports()]}


def cmd_behrend(a, cfg):
    _check_writable(a.emit)
    s, choice = constructions.behrend_set(a.N, with_choice=True)
    if a.emit:
        constructions.write_integer_set(s, a.emit)
    return {"N": a.N, "size": len(s), "choice": asdict(choice) if choice else None,
            "ap3_free": search.is_ap3_free_integers(s.members)}


def cmd_greedy(a, cfg):
    _check_writable(a.emit)
    if a.p == 4:
        s = constructions.greedy_ap3_free_z4(a.n, cfg.seed)
    else:
        s = constructions.greedy_ap3_free(a.p, a.n, cfg.seed)
    if a.emit:
        write_point_set(s, a.emit)
    return {"modulus": a.p, "n": a.n, "size": len(s), "points": _points(s)}


# ---------------------------------------------------------------- parser


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg, default=0, help="seed for the PCG64 generator (default 0)")
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--budget", type=_nonneg, default=search.DEFAULT_BUDGET,
                        help="search node limit per dimension; 0 = unlimited")
    common.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(prog="progfree", description="Toolkit for 3AP-free sets.")
    parser.add_argument("--version", action="version", version=f"progfree {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=func)
        return p

    for name, func, help_ in (
        ("verify", cmd_verify, "check a point-set or integer-set file for 3APs"),
        ("count", cmd_count, "count 3APs (with degenerate ones) in a set in F_p^n"),
        ("fourier", cmd_fourier, "3AP count through the character table"),
        ("increment", cmd_increment, "densest affine hyperplane"),
        ("clp-check", cmd_clp_check, "coset disjointness test on a Z_4^n set"),
    ):
        p = add(name, func, help_)
        p.add_argument("--in", dest="input", required=True, metavar="PATH")
        if name in ("fourier", "increment"):
            p.add_argument("--cap", type=_positive, default=fourier.DEFAULT_CAP)

    p = add("capsearch", cmd_capsearch, "largest 3AP-free subset of F_p^n")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--cap", type=_positive, default=search.DEFAULT_CAP)
    p.add_argument("--emit-witness", metavar="PATH")

    p = add("intsearch", cmd_intsearch, "largest 3AP-free subset of {1..N}")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--emit-witness", metavar="PATH")

    p = add("sunflower", cmd_sunflower, "largest sunflower-free family on {1..n}")
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--cap", type=_positive, default=1 << 6)
    p.add_argument("--emit-witness", metavar="PATH")

    p = add("lemma1", cmd_lemma1, "vanishing-at-zero property on random or given sets")
    p.add_argument("--in", dest="input", metavar="PATH")
    p.add_argument("--d", type=_nonneg)
    p.add_argument("--count", type=_positive, default=500)
    p.add_argument("--max-n", type=_positive, default=14)

    p = add("clp-bound", cmd_clp_bound, "size bound certificate for 3AP-free sets in Z_4^n")
    p.add_argument("--n", type=_positive, required=True)

    p = add("slicerank", cmd_slicerank, "explicit slice decomposition of the cap-set tensor")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--cap", type=_positive, default=slicerank.DEFAULT_SLICE_CAP)
    p.add_argument("--emit-witness", metavar="PATH", help="write the decomposition as JSON")

    p = add("multinomial", cmd_multinomial, "exact slice-count bound")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--p", type=int, default=3)

    p = add("exponent", cmd_exponent, "growth base of the slice-count bound")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--check-n", type=_positive, help="also report the exact bound's n-th root")

    p = add("bounds", cmd_bounds, "constants and formula-only bounds")
    p.add_argument("--name")

    p = add("behrend", cmd_behrend, "digit-sphere 3AP-free subset of {1..N}")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--emit", metavar="PATH")

    p = add("greedy", cmd_greedy, "seeded greedy 3AP-free set (p = 4 for Z_4^n)")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n", type=_nonneg, required=True)
    p.add_argument("--emit", metavar="PATH")
    return parser


# ---------------------------------------------------------------- output


def _render_text(report: dict) -> str:
    if report["subcommand"] == "bounds" and "bounds" in report["result"]:
        rows = [(r["name"], r["value"] if r["value"] is not None else r["formula"], r["source"])
                for r in report["result"]["bounds"]]
        w0 = max(len(r[0]) for r in rows)
        w1 = max(len(r[1]) for r in rows)
        body = "\n".join(f"{a:<{w0}}  {b:<{w1}}  {c}" for a, b, c in rows)
    else:
        body = "\n".join(f"{k}: {json.dumps(v, sort_keys=True) if isinstance(v, (dict, list)) else v}"
                         for k, v in sorted(report["result"].items()))
    return f"# progfree {report['version']} {report['subcommand']}\n{body}\n"


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    return _render_text(report)


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    opts = {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "subcommand", "seed", "threads", "budget", "format")}
    cfg = RunConfig(args.subcommand, args.seed, args.threads, args.budget, args.format, opts)
    try:
        result = args.func(args, cfg)
    except UsageError as exc:
        print(f"progfree {args.subcommand}: usage error: {exc}", file=err)
        return 2
    except DomainError as exc:
        print(f"progfree {args.subcommand}: error: {exc}", file=err)
        return 1
    report = {"schema": SCHEMA, "version": __version__, "subcommand": cfg.subcommand,
              "config": {"seed": cfg.seed, "threads": cfg.threads, "budget": cfg.budget, "format": cfg.format,
                         "backend": BACKEND, **cfg.options},
              "result": result}
    out.write(render(report, cfg.format))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
