"""Closed-form bounds and constants.

Every logarithm below is natural.  Results whose constants are not explicit
are kept as formula strings only, never with a number attached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath

from .core import DomainError

DPS = 50
DIGITS = 30


@dataclass(frozen=True)
class AbelianGroupShape:
    """Z_{d_1} + ... + Z_{d_r} with d_1 | d_2 | ... | d_r, each d_i >= 2."""

    invariant_factors: tuple[int, ...]

    def __post_init__(self):
        ds = tuple(int(d) for d in self.invariant_factors)
        if any(d < 2 for d in ds):
            raise DomainError("invariant factors must be at least 2")
        for a, b in zip(ds, ds[1:]):
            if b % a:
                raise DomainError(f"invariant factors must form a divisibility chain ({a} does not divide {b})")
        object.__setattr__(self, "invariant_factors", ds)

    @classmethod
    def power(cls, m: int, n: int) -> "AbelianGroupShape":
        return cls((m,) * n)

    @property
    def order(self) -> int:
        return math.prod(self.invariant_factors)

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def __str__(self) -> str:
        return " + ".join(f"Z_{d}" for d in self.invariant_factors) or "0"


def rank_2g(g: AbelianGroupShape) -> int:
    """Rank of 2G: doubling maps Z_d onto Z_{d / gcd(2, d)}, which dies only for d = 2.

    The halved factors still form a divisibility chain once the trivial ones
    are dropped, so counting them gives the rank.
    """
    return sum(1 for d in g.invariant_factors if d // math.gcd(2, d) > 1)


def lev_bound(g: AbelianGroupShape) -> int:
    """floor(2|G| / rank(2G)); a 3AP-free subset of G is strictly smaller than 2|G|/rank(2G)."""
    r = rank_2g(g)
    if r == 0:
        raise DomainError(f"rank(2G) = 0 for {g}: the bound is vacuous")
    return 2 * g.order // r


@dataclass(frozen=True)
class ConstantReport:
    name: str
    value: str | None
    formula: str
    source: str

    def as_mpf(self) -> mpmath.mpf:
        if self.value is None:
            raise DomainError(f"{self.name} has no numeric value")
        with mpmath.workdps(DPS):
            return mpmath.mpf(self.value)

    def to_json(self) -> dict:
        return {"name": self.name, "value": self.value, "formula": self.formula, "source": self.source}


def _fmt(x) -> str:
    return mpmath.nstr(x, DIGITS, strip_zeros=False)


def behrend_constant() -> ConstantReport:
    with mpmath.workdps(DPS):
        v = 2 * mpmath.sqrt(mpmath.log(4))
    return ConstantReport("behrend", _fmt(v), "2*sqrt(ln 4)", "Behrend digit-sphere construction")


def elsholtz_constant() -> ConstantReport:
    with mpmath.workdps(DPS):
        v = 2 * mpmath.sqrt(mpmath.log(mpmath.mpf(24) / 7) * mpmath.log(2))
    return ConstantReport("elsholtz", _fmt(v), "2*sqrt(ln(24/7)*ln 2)",
                          "Elsholtz-Hunter-Proske-Sauermann construction")


def naslund_sawin_base() -> ConstantReport:
    with mpmath.workdps(DPS):
        v = 3 / mpmath.power(2, mpmath.mpf(2) / 3)
    return ConstantReport("naslund-sawin", _fmt(v), "3/2^(2/3) = (27/4)^(1/3)", "Naslund-Sawin sunflower-free bound")


def asu_base(slice_base=None) -> ConstantReport:
    """sqrt(1 + b) with b the cap-set base; the rounded 2.7552 unless one is supplied."""
    with mpmath.workdps(DPS):
        b = mpmath.mpf("2.7552") if slice_base is None else mpmath.mpf(slice_base)
        v = mpmath.sqrt(1 + b)
    formula = "sqrt(1 + 2.7552)" if slice_base is None else f"sqrt(1 + {mpmath.nstr(b, 12)})"
    return ConstantReport("asu", _fmt(v), formula, "Alon-Shpilka-Umans sunflower-free bound")


# name -> (formula, source); constants in these results are not explicit
FORMULA_REGISTRY: dict[str, tuple[str, str]] = {
    "roth": ("O(N/log log N)", "Roth density increment on progressions"),
    "heath-brown-szemeredi": ("N*(log N)^(-delta), 0 < delta < 1/2", "Heath-Brown; Szemeredi"),
    "bourgain": ("N*sqrt(log log N / log N)", "Bourgain, Bohr-set increments"),
    "sanders": ("N*(log N)^(-1+o(1))", "Bourgain; Sanders"),
    "bloom-sisask": ("N*(log N)^(-1-eps) for N > N_0(eps)", "Bloom-Sisask, after Bateman-Katz"),
    "kelley-meka-interval": ("N*exp(-c*(log N)^(1/11))", "Kelley-Meka; Bloom-Sisask"),
    "bloom-sisask-refined": ("N*exp(-c'*(log N)^(1/9))", "Bloom-Sisask refinement"),
    "leng-sah-sawhney": ("N*exp(-(log log N)^(c_k)), k >= 5", "Leng-Sah-Sawhney, k-term progressions"),
    "meshulam": ("c_p*p^n/n", "Meshulam, affine-hyperplane increments"),
    "bateman-katz": ("3^n/n^(1+eps)", "Bateman-Katz, cap sets"),
    "ellenberg-gijswijt": ("(p - delta_p)^n", "Ellenberg-Gijswijt polynomial method"),
    "kelley-meka-finite-field": ("2^(-kappa_p*n^(1/9))*p^n", "Kelley-Meka, F_p^n"),
    "behrend-lower": ("N*exp(-(2*sqrt(ln 4)+o(1))*sqrt(log N))", "Behrend digit-sphere construction"),
    "elsholtz-lower": ("N*exp(-(C+o(1))*sqrt(log N)), C = 2*sqrt(ln(24/7)*ln 2)",
                       "Elsholtz-Hunter-Proske-Sauermann construction"),
}

NUMERIC = {
    "behrend": behrend_constant,
    "elsholtz": elsholtz_constant,
    "naslund-sawin": naslund_sawin_base,
    "asu": asu_base,
}


def formula_report(name: str) -> ConstantReport:
    if name not in FORMULA_REGISTRY:
        raise DomainError(f"unknown bound {name!r}; known: {', '.join(sorted(FORMULA_REGISTRY))}")
    formula, source = FORMULA_REGISTRY[name]
    return ConstantReport(name, None, formula, source)


def report(name: str) -> ConstantReport:
    """Numeric constant if one exists, otherwise the formula-only entry."""
    if name in NUMERIC:
        return NUMERIC[name]()
    if name not in FORMULA_REGISTRY:
        raise DomainError(f"unknown bound {name!r}; known: {', '.join(sorted([*NUMERIC, *FORMULA_REGISTRY]))}")
    return formula_report(name)


def all_reports() -> list[ConstantReport]:
    return [report(k) for k in sorted(NUMERIC)] + [formula_report(k) for k in sorted(FORMULA_REGISTRY)]
