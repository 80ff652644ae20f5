"""Slice decompositions of the F_3 cap-set tensor and the resulting bounds.

On F_3^n the polynomial prod_i (1 - (x_i + y_i + z_i)^2) equals 1 exactly when
x + y + z = 0, so on S^3 it is the diagonal tensor iff S has no 3AP.  Each
monomial of its expansion has some block (x, y or z) of degree <= 2n/3; taking
the first such block as the "univariate" factor yields a decomposition into
at most 3 * sum_{a+b+c=n, b+2c<=2n/3} n!/(a!b!c!) slices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from .core import DomainError, FpPointSet, all_points, is_prime

DENSE_LIMIT = 200
DEFAULT_SLICE_CAP = 3**4
AXES = ("x", "y", "z")

# 1 - (x + y + z)^2 over F_3 as (x-exp, y-exp, z-exp, coefficient)
LOCAL_TERMS = (
    (0, 0, 0, 1),
    (2, 0, 0, 2),
    (0, 2, 0, 2),
    (0, 0, 2, 2),
    (1, 1, 0, 1),
    (1, 0, 1, 1),
    (0, 1, 1, 1),
)


class ConvergenceError(ArithmeticError):
    pass


def _need_p3(s: FpPointSet) -> None:
    if not isinstance(s, FpPointSet) or s.p != 3:
        raise DomainError("the cap-set tensor is defined over F_3")


@dataclass(frozen=True)
class Tensor3:
    """F_p-valued function on A x A x A for a point set A."""

    p: int
    domain: FpPointSet
    evaluate: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    dense: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, i, j, k):
        """Values at domain-index triples (broadcasting)."""
        if self.dense is not None:
            return self.dense[i, j, k]
        return self.evaluate(np.asarray(i), np.asarray(j), np.asarray(k))


def cap_polynomial(x: np.ndarray, y: np.ndarray, z: np.ndarray) -> np.ndarray:
    """prod_i (1 - (x_i + y_i + z_i)^2) mod 3 on coordinate arrays (..., n)."""
    s = (x + y + z) % 3
    return np.prod((1 - s * s) % 3, axis=-1) % 3


def diagonal_tensor(s: FpPointSet) -> Tensor3:
    _need_p3(s)
    arr = s.array

    def evaluate(i, j, k):
        return cap_polynomial(arr[i], arr[j], arr[k])

    dense = None
    m = len(s)
    if m <= DENSE_LIMIT:
        dense = np.empty((m, m, m), dtype=np.int8)
        for i in range(m):
            dense[i] = cap_polynomial(arr[i][None, None, :], arr[:, None, :], arr[None, :, :])
    return Tensor3(3, s, evaluate, dense)


def diagonal_check(s: FpPointSet) -> bool:
    """Is the cap polynomial restricted to S^3 the diagonal indicator?"""
    _need_p3(s)
    arr = s.array
    m = len(s)
    idx = np.arange(m)
    for i in range(m):
        vals = cap_polynomial(arr[i][None, None, :], arr[:, None, :], arr[None, :, :])
        expected = ((idx[:, None] == i) & (idx[None, :] == i)).astype(vals.dtype)
        if not np.array_equal(vals, expected):
            return False
    return True


# ---------------------------------------------------------------- decompositions


@dataclass(frozen=True)
class Slice:
    """g(axis variable) * h(other two), as value tables over the domain.

    ``bivariate[u, v]`` has u, v in the order of the remaining axes
    (y, z for an x-slice; x, z for y; x, y for z).
    """

    axis: str
    univariate: np.ndarray
    bivariate: np.ndarray
    exponents: tuple[int, ...] | None = None


@dataclass(frozen=True)
class SliceDecomposition:
    p: int
    domain: FpPointSet
    slices: tuple[Slice, ...]

    def __len__(self) -> int:
        return len(self.slices)

    def axis_counts(self) -> dict[str, int]:
        return {a: sum(1 for sl in self.slices if sl.axis == a) for a in AXES}

    def reconstruct(self) -> np.ndarray:
        """Dense sum of all slices, reduced mod p."""
        m = len(self.domain)
        total = np.zeros((m, m, m), dtype=np.int64)
        for sl in self.slices:
            g, h = sl.univariate.astype(np.int64), sl.bivariate.astype(np.int64)
            if sl.axis == "x":
                total += g[:, None, None] * h[None, :, :]
            elif sl.axis == "y":
                total += g[None, :, None] * h[:, None, :]
            else:
                total += g[None, None, :] * h[:, :, None]
            total %= self.p
        return total

    def value_at(self, i: np.ndarray, j: np.ndarray, k: np.ndarray) -> np.ndarray:
        """Sum of slices at index triples, without materialising the tensor."""
        total = np.zeros(np.broadcast(i, j, k).shape, dtype=np.int64)
        for sl in self.slices:
            if sl.axis == "x":
                total += sl.univariate[i] * sl.bivariate[j, k]
            elif sl.axis == "y":
                total += sl.univariate[j] * sl.bivariate[i, k]
            else:
                total += sl.univariate[k] * sl.bivariate[i, j]
            total %= self.p
        return total

    def to_json(self) -> dict:
        pts = self.domain.points
        out = []
        for sl in self.slices:
            nz = np.nonzero(sl.univariate % self.p)[0]
            out.append({
                "axis": sl.axis,
                "univariate": [[list(pts[i]), int(sl.univariate[i] % self.p)] for i in nz.tolist()],
                "bivariate_support_size": int(np.count_nonzero(sl.bivariate % self.p)),
            })
        return {"p": self.p, "n": self.domain.n, "slice_count": len(self.slices), "slices": out}


def _monomial_values(points: np.ndarray, exps: np.ndarray) -> np.ndarray:
    """(len(exps), len(points)) table of prod_i x_i^{e_i} mod 3 (0^0 = 1)."""
    return np.prod(points[None, :, :] ** exps[:, None, :], axis=2) % 3


def expand_cap_polynomial(n: int):
    """All monomials of prod_i (1 - (x_i+y_i+z_i)^2): exponent blocks + coefficient."""
    terms = np.array(LOCAL_TERMS, dtype=np.int64)
    choice = all_points(len(LOCAL_TERMS), n)  # which local term each coordinate uses
    ex, ey, ez = terms[choice, 0], terms[choice, 1], terms[choice, 2]
    coeff = np.prod(terms[choice, 3], axis=1) % 3 if n else np.ones(1, dtype=np.int64)
    return ex, ey, ez, coeff


def assign_axis(dx: int, dy: int, dz: int, n: int) -> str:
    """First block whose degree is at most 2n/3, in the order x, y, z."""
    if 3 * dx <= 2 * n:
        return "x"
    if 3 * dy <= 2 * n:
        return "y"
    if 3 * dz > 2 * n:
        raise AssertionError("total degree <= 2n forces some block degree <= 2n/3")
    return "z"


def slice_decompose(n: int, *, cap: int = DEFAULT_SLICE_CAP) -> SliceDecomposition:
    if n < 1:
        raise DomainError("n must be at least 1")
    if 3**n > cap:
        raise DomainError(f"3^n = {3**n} exceeds the slice cap {cap}")
    pts = all_points(3, n)
    ex, ey, ez, coeff = expand_cap_polynomial(n)
    blocks = {"x": ex, "y": ey, "z": ez}
    others = {"x": ("y", "z"), "y": ("x", "z"), "z": ("x", "y")}
    groups: dict[tuple[str, tuple[int, ...]], list[int]] = {}
    for t in range(len(coeff)):
        if coeff[t] == 0:
            continue
        axis = assign_axis(int(ex[t].sum()), int(ey[t].sum()), int(ez[t].sum()), n)
        groups.setdefault((axis, tuple(blocks[axis][t].tolist())), []).append(t)
    slices = []
    for axis in AXES:
        for (ax, key), members in sorted(groups.items()):
            if ax != axis:
                continue
            idx = np.array(members)
            g = _monomial_values(pts, np.array([key]))[0]
            u, v = others[axis]
            mu = _monomial_values(pts, blocks[u][idx])
            mv = _monomial_values(pts, blocks[v][idx])
            h = ((mu.T * coeff[idx]) @ mv) % 3
            slices.append(Slice(axis, g.astype(np.int8), h.astype(np.int8), key))
    return SliceDecomposition(3, FpPointSet.of(3, n, map(tuple, pts.tolist())), tuple(slices))


def diagonal_decomposition(a: FpPointSet) -> SliceDecomposition:
    """|A| x-slices delta_a(x) * delta_a(y) delta_a(z) of the diagonal tensor on A^3."""
    m = len(a)
    eye = np.eye(m, dtype=np.int8)
    slices = tuple(Slice("x", eye[i], np.outer(eye[i], eye[i]).astype(np.int8)) for i in range(m))
    return SliceDecomposition(a.p, a, slices)


# ---------------------------------------------------------------- counting bounds


@dataclass(frozen=True)
class MultinomialBound:
    n: int
    p: int
    value: int
    exponent_base: mpmath.mpf

    def to_json(self) -> dict:
        return {"n": self.n, "p": self.p, "value": str(self.value),
                "exponent_base": mpmath.nstr(self.exponent_base, 20)}


def degree_budget(n: int, p: int) -> int:
    """Largest block degree allowed: floor((p-1) n / 3)."""
    return (p - 1) * n // 3


def _compositions_p3(n: int) -> int:
    """sum over a+b+c=n, b+2c <= 2n/3 of n!/(a!b!c!), by running binomials."""
    D = degree_budget(n, 3)
    total = 0
    for c in range(min(n, D // 2) + 1):
        bmax = min(D - 2 * c, n - c)
        inner, term = 0, 1  # term = C(n-c, b)
        for b in range(bmax + 1):
            inner += term
            term = term * (n - c - b) // (b + 1)
        total += math.comb(n, c) * inner
    return total


def _words_below(n: int, p: int, D: int) -> int:
    """#{w in {0..p-1}^n : sum w <= D} by inclusion-exclusion on digits >= p."""
    total = 0
    for i in range(min(n, D // p) + 1):
        total += (-1) ** i * math.comb(n, i) * math.comb(D - i * p + n, n)
    return total


def multinomial_bound(n: int, p: int = 3) -> MultinomialBound:
    """3 * #(exponent vectors in {0..p-1}^n of degree <= (p-1)n/3)."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not (is_prime(p) and p >= 3):
        raise DomainError(f"p must be an odd prime, got {p}")
    D = degree_budget(n, p)
    count = _compositions_p3(n) if p == 3 else _words_below(n, p, D)
    value = 3 * count
    with mpmath.workdps(40):
        base = mpmath.root(mpmath.mpf(value), n)
    return MultinomialBound(n, p, value, base)


@dataclass(frozen=True)
class ExponentReport:
    p: int
    base: mpmath.mpf
    kappa: mpmath.mpf
    ratio: mpmath.mpf  # t = exp(-multiplier); optimal weights are t^k / sum t^j
    iterations: int

    def to_json(self) -> dict:
        return {"p": self.p, "base": mpmath.nstr(self.base, 20), "kappa": mpmath.nstr(self.kappa, 20),
                "ratio": mpmath.nstr(self.ratio, 20), "iterations": self.iterations}


def slice_exponent(p: int = 3, *, dps: int = 50, max_iter: int = 400) -> ExponentReport:
    """Growth base of the counting bound: max exp(H(w)) over distributions w on
    {0..p-1} with mean <= (p-1)/3.

    The maximiser is w_k ~ t^k; the mean is increasing in t, so the multiplier
    -log t is found by bisection on the stationarity condition mean(t) =
    (p-1)/3.  Then base = sum_k t^k / t^((p-1)/3).
    """
    if not (is_prime(p) and p >= 3):
        raise DomainError(f"p must be an odd prime, got {p}")
    with mpmath.workdps(dps):
        target = mpmath.mpf(p - 1) / 3
        ks = list(range(p))

        def mean(t):
            w = [t**k for k in ks]
            return mpmath.fsum(k * wk for k, wk in zip(ks, w)) / mpmath.fsum(w)

        lo, hi = mpmath.mpf(0), mpmath.mpf(1)
        tol = mpmath.mpf(10) ** (-(dps - 10))
        it = 0
        while hi - lo > tol:
            if it >= max_iter:
                raise ConvergenceError(f"bisection for p={p} stalled: bracket [{lo}, {hi}] after {it} steps")
            mid = (lo + hi) / 2
            if mean(mid) < target:
                lo = mid
            else:
                hi = mid
            it += 1
        t = (lo + hi) / 2
        residual = abs(mean(t) - target)
        if residual > mpmath.mpf(10) ** (-(dps // 2)):
            raise ConvergenceError(f"stationarity residual {residual} too large for p={p}")
        base = mpmath.fsum(t**k for k in ks) / t**target
        kappa = mpmath.log(base) / mpmath.log(p)
        return ExponentReport(p, +base, +kappa, +t, it)
