"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from progfree import _pykernels
from progfree.polymethod import evaluation_rows, monomials_up_to
from progfree.search import ap3_hypergraph, interval_hypergraph, sunflower_hypergraph

try:
    from progfree import _kernels
except ImportError:
    _kernels = None


def _search_case(h):
    pm, pc, po = h.packed_partitions()

    def go(mod):
        return mod.mis3_search(h.completers, pm, pc, po, [], None, 0, 0)[0]
    return go


def _gf2_case(n, d, k, seed=0):
    rng = np.random.default_rng(seed)
    mons = np.array(monomials_up_to(n, d), dtype=np.int64)
    C = len(mons)
    W = (C + 63) // 64
    pts = sorted(int(x) for x in rng.choice(2**n, size=k, replace=False))
    rows = evaluation_rows(pts, mons, W)

    def go(mod):
        basis = np.zeros((C, W), dtype=np.uint64)
        piv = np.full(C, -1, dtype=np.int64)
        where = np.full(C, -1, dtype=np.int64)
        return mod.gf2_reduce_rows(basis, piv, where, 0, rows.copy(), C)
    return go


CASES = {
    "mis3 F_3^3": _search_case(ap3_hypergraph(3, 3)),
    "mis3 F_5^2": _search_case(ap3_hypergraph(5, 2)),
    "mis3 [1,40]": _search_case(interval_hypergraph(40)),
    "mis3 sunflower n=4": _search_case(sunflower_hypergraph(4)),
    "gf2 n=12 d=6 k=2000": _gf2_case(12, 6, 2000),
    "gf2 n=14 d=5 k=3000": _gf2_case(14, 5, 3000),
}


def best_of(fn, mod, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        value = fn(mod)
        times.append(time.perf_counter() - t0)
    return min(times), value


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"{'case':<22}{'python s':>10}{'cython s':>10}{'speedup':>9}")
    for name, fn in CASES.items():
        tp, vp = best_of(fn, _pykernels, args.repeat)
        if _kernels is None:
            print(f"{name:<22}{tp:>10.4f}{'n/a':>10}{'':>9}")
            continue
        tc, vc = best_of(fn, _kernels, args.repeat)
        assert vp == vc, (name, vp, vc)
        print(f"{name:<22}{tp:>10.4f}{tc:>10.4f}{tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
