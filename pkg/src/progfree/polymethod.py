"""Multilinear polynomials over F_2 and the Z_4^n polynomial-method pipeline.

Points of F_2^n and monomials are both n-bit masks (coordinate/variable i is
bit i).  A monomial m evaluates to 1 at x iff m is a submask of x.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import kernels
from .core import BinaryPointSet, DomainError, Z4PointSet, coset_decompose, double_set, to_mask, xor_sumset

ROW_CHUNK = 4096


def monomial_count(n: int, d: int) -> int:
    """Number of square-free monomials of degree <= d in n variables."""
    if n < 0 or d < 0:
        raise DomainError("n and d must be non-negative")
    if d > n:
        raise DomainError(f"degree {d} exceeds the number of variables {n}")
    return sum(math.comb(n, i) for i in range(d + 1))


def _prefix_counts(n: int) -> list[int]:
    out, acc = [], 0
    for i in range(n + 1):
        acc += math.comb(n, i)
        out.append(acc)
    return out


@dataclass(frozen=True)
class MultilinearPoly:
    n: int
    monomials: frozenset[int] = frozenset()

    def __post_init__(self):
        ms = frozenset(int(m) for m in self.monomials)
        if any(not 0 <= m < 1 << self.n for m in ms):
            raise DomainError("monomial mask out of range")
        object.__setattr__(self, "monomials", ms)

    @property
    def coeffs(self) -> dict[int, int]:
        return {m: 1 for m in sorted(self.monomials, key=monomial_key)}

    @property
    def degree(self) -> int:
        return max((m.bit_count() for m in self.monomials), default=0)

    def is_zero(self) -> bool:
        return not self.monomials

    def __call__(self, x: int) -> int:
        return eval_multilinear(self, x)

    def __add__(self, other: "MultilinearPoly") -> "MultilinearPoly":
        return MultilinearPoly(self.n, self.monomials ^ other.monomials)

    def shift(self, t: int) -> "MultilinearPoly":
        """g(x) = f(x + t)."""
        out: set[int] = set()
        for m in self.monomials:
            fixed = m & t
            free = m & ~t
            # prod_{i in m}(x_i + t_i) = sum over submasks of the t-part
            sub = fixed
            while True:
                out ^= {free | sub}
                if sub == 0:
                    break
                sub = (sub - 1) & fixed
        return MultilinearPoly(self.n, frozenset(out))

    def __str__(self) -> str:
        if not self.monomials:
            return "0"
        terms = []
        for m in sorted(self.monomials, key=monomial_key):
            terms.append("*".join(f"x{i + 1}" for i in range(self.n) if m >> i & 1) or "1")
        return " + ".join(terms)


def monomial_key(m: int) -> tuple[int, int]:
    return (m.bit_count(), m)


def monomials_up_to(n: int, d: int) -> list[int]:
    """Square-free monomials of degree <= d ordered by (degree, mask)."""
    if d > n:
        raise DomainError(f"degree {d} exceeds n = {n}")
    out: list[int] = []
    for k in range(d + 1):
        level = []
        for combo in _combinations_masks(n, k):
            level.append(combo)
        out.extend(sorted(level))
    return out


def _combinations_masks(n: int, k: int):
    from itertools import combinations

    for c in combinations(range(n), k):
        m = 0
        for i in c:
            m |= 1 << i
        yield m


def eval_multilinear(f: MultilinearPoly, x: int) -> int:
    if not 0 <= x < 1 << f.n:
        raise DomainError(f"point {x:#x} is not in F_2^{f.n}")
    return sum(1 for m in f.monomials if m & x == m) & 1


def format_poly(f: MultilinearPoly) -> str:
    return "".join(f"{m:x} 1\n" for m in sorted(f.monomials, key=monomial_key))


def parse_poly(text: str, n: int) -> MultilinearPoly:
    mons: set[int] = set()
    for ln in text.splitlines():
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        mask, coeff = ln.split()
        if int(coeff) % 2:
            mons ^= {int(mask, 16)}
    return MultilinearPoly(n, frozenset(mons))


# ---------------------------------------------------------------- vanishing spaces


@dataclass(frozen=True)
class VanishingSpace:
    n: int
    d: int
    basis: tuple[MultilinearPoly, ...]
    rank: int
    n_points: int

    @property
    def dim(self) -> int:
        return len(self.basis)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "dim": self.dim,
            "basis": [[f"{m:x}" for m in sorted(f.monomials, key=monomial_key)] for f in self.basis],
        }


def _point_masks(points, n: int) -> list[int]:
    if isinstance(points, BinaryPointSet):
        if points.n != n:
            raise DomainError("dimension mismatch")
        return points.masks()
    out = sorted({int(x) for x in points})
    if any(not 0 <= x < 1 << n for x in out):
        raise DomainError(f"point outside F_2^{n}")
    return out


def evaluation_rows(points: Sequence[int], mons: np.ndarray, words: int) -> np.ndarray:
    """Bit-packed rows: bit j of row i is monomial j evaluated at point i."""
    pts = np.asarray(points, dtype=np.int64)
    bits = (pts[:, None] & mons[None, :]) == mons[None, :]
    packed = np.packbits(bits, axis=1, bitorder="little")
    buf = np.zeros((len(pts), words * 8), dtype=np.uint8)
    buf[:, : packed.shape[1]] = packed
    return buf.view("<u8").astype(np.uint64)


def vanishing_space(points, d: int, n: int | None = None) -> VanishingSpace:
    """Basis of the degree-<=d multilinear polynomials vanishing on ``points``.

    ``points`` is a BinaryPointSet or an iterable of masks (then ``n`` is
    required).  Computed as the kernel of the evaluation matrix by
    Gauss-Jordan elimination over F_2.
    """
    if n is None:
        if not isinstance(points, BinaryPointSet):
            raise DomainError("n is required when points are masks")
        n = points.n
    if not 0 <= d <= n:
        raise DomainError(f"need 0 <= d <= n, got d={d}, n={n}")
    pts = _point_masks(points, n)
    mons = np.array(monomials_up_to(n, d), dtype=np.int64)
    C = len(mons)
    W = max(1, (C + 63) // 64)
    basis = np.zeros((C, W), dtype=np.uint64)
    pivots = np.full(C, -1, dtype=np.int64)
    where = np.full(C, -1, dtype=np.int64)
    rank = 0
    for start in range(0, len(pts), ROW_CHUNK):
        if rank >= C:
            break
        rows = evaluation_rows(pts[start:start + ROW_CHUNK], mons, W)
        rank = kernels.gf2_reduce_rows(basis, pivots, where, rank, rows, C)
    return VanishingSpace(n, d, tuple(_kernel_basis(basis[:rank], pivots[:rank], mons, n)), rank, len(pts))


def _kernel_basis(rref: np.ndarray, pivots: np.ndarray, mons: np.ndarray, n: int) -> list[MultilinearPoly]:
    C = len(mons)
    rank = len(pivots)
    is_pivot = np.zeros(C, dtype=bool)
    is_pivot[pivots] = True
    free = np.nonzero(~is_pivot)[0]
    if rank:
        dense = np.unpackbits(rref.astype("<u8").view(np.uint8), axis=1, bitorder="little")[:, :C].astype(bool)
    out = []
    for j in free.tolist():
        ms = {int(mons[j])}
        if rank:
            ms.update(int(mons[pivots[i]]) for i in np.nonzero(dense[:, j])[0].tolist())
        out.append(MultilinearPoly(n, frozenset(ms)))
    return out


def min_vanishing_degree(points, n: int | None = None) -> int:
    """Smallest d admitting a nonzero degree-<=d polynomial vanishing on points."""
    if n is None:
        n = points.n
    pts = _point_masks(points, n)
    if len(pts) == 1 << n:
        raise DomainError("no nonzero multilinear polynomial vanishes on all of F_2^n")
    for d in range(n + 1):
        if vanishing_space(pts, d, n).dim >= 1:
            return d
    raise AssertionError("unreachable: degree n always suffices off the full cube")


# ---------------------------------------------------------------- vanishing-at-zero property harness


@dataclass(frozen=True)
class Lemma1Report:
    n: int
    d: int
    size: int
    threshold: int
    threshold_met: bool
    differences: int
    dim: int
    violations: tuple[MultilinearPoly, ...] = ()

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "size": self.size,
            "threshold": self.threshold,
            "threshold_met": self.threshold_met,
            "differences": self.differences,
            "dim": self.dim,
            "violations": [format_poly(f).split() for f in self.violations],
        }


def lemma1_threshold(n: int, d: int) -> int:
    return 2 * monomial_count(n, d // 2)


def lemma1_verify(a, d: int, n: int | None = None) -> Lemma1Report:
    """Every degree-<=d f vanishing on {a1 + a2 : a1 != a2} should have f(0) = 0
    once |A| > 2 * #monomials of degree <= d/2.  Reports the basis elements
    with f(0) = 1."""
    if n is None:
        n = a.n
    pts = _point_masks(a, n)
    diffs = xor_sumset(pts)
    space = vanishing_space(sorted(diffs), d, n)
    threshold = lemma1_threshold(n, d)
    bad = tuple(f for f in space.basis if 0 in f.monomials)
    return Lemma1Report(n, d, len(pts), threshold, len(pts) > threshold, len(diffs), space.dim, bad)


def lemma1_instances(count: int, seed: int, max_n: int = 14, max_rows: int = 6000):
    """Seeded random (A, d, n) with |A| just above the threshold.

    Instances keep |A|(|A|-1)/2 below ``max_rows`` difference candidates so
    the whole batch stays interactive.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = int(rng.integers(1, max_n + 1))
        d = int(rng.integers(0, n + 1))
        thr = lemma1_threshold(n, d)
        if thr >= 1 << n:
            continue
        size = int(rng.integers(thr + 1, min(1 << n, thr + 1 + max(2, thr // 4)) + 1))
        if size * (size - 1) // 2 > max_rows and size > thr + 1:
            size = thr + 1
        if size * (size - 1) // 2 > 4 * max_rows:
            continue
        a = rng.choice(1 << n, size=size, replace=False)
        out.append((sorted(int(x) for x in a), d, n))
    return out


def smallest_clean_size(n: int, d: int, seed: int, trials: int = 20) -> int:
    """Empirical companion to the threshold: the least |A| from which every
    sampled A (``trials`` per size, up to the threshold + 1) has no violation.

    Records how far below the proven threshold the property already holds in
    practice; it certifies nothing about tightness.
    """
    rng = np.random.default_rng(seed)
    top = min(1 << n, lemma1_threshold(n, d) + 1)
    clean_from = top + 1  # sentinel: no clean size at or below top
    for size in range(top, 0, -1):
        for _ in range(trials):
            a = rng.choice(1 << n, size=size, replace=False).tolist()
            if lemma1_verify(a, d, n).violations:
                return clean_from
        clean_from = size
    return clean_from


# ---------------------------------------------------------------- Z_4^n pipeline


def clp_disjointness_check(s: Z4PointSet) -> bool:
    """True iff every coset's restricted sumset, shifted by rho(2t), misses rho(2*S)."""
    if not isinstance(s, Z4PointSet):
        raise DomainError("expects a Z4PointSet")
    doubled = set(double_set(s).masks())
    for t, sl in coset_decompose(s).items():
        shift = to_mask(t)
        for u in xor_sumset(sl.points.masks()):
            if u ^ shift in doubled:
                return False
    return True


@dataclass(frozen=True)
class RegularizationReport:
    N: int
    retained: int
    kept: tuple[tuple[int, ...], ...]
    slice_sizes: dict = field(compare=False)


def regularize(s: Z4PointSet) -> RegularizationReport:
    """Pick a power of two N maximising N * #{t : |S_t| >= N}.

    Trimming every kept slice to exactly N elements (and dropping the rest)
    gives the "empty or N elements" shape at the cost of at most a factor
    2 * log2(2^n) in size.  Ties go to the smaller N.
    """
    slices = coset_decompose(s)
    sizes = {t: len(sl) for t, sl in slices.items()}
    if not sizes:
        raise DomainError("empty set has no slices")
    best = (0, 1)
    N = 1
    while N <= max(sizes.values()):
        retained = N * sum(1 for v in sizes.values() if v >= N)
        if retained > best[0]:
            best = (retained, N)
        N *= 2
    retained, N = best
    kept = tuple(t for t, v in sizes.items() if v >= N)
    return RegularizationReport(N, retained, kept, sizes)


@dataclass(frozen=True)
class ClpBoundCertificate:
    n: int
    d_star: int
    N_star: int
    s_max: int
    exponent: mpmath.mpf

    def verify(self) -> bool:
        """Re-check the certificate with math.comb only."""
        n, d, N, s = self.n, self.d_star, self.N_star, self.s_max
        half = sum(math.comb(n, i) for i in range(d // 2 + 1))
        full = sum(math.comb(n, i) for i in range(d + 1))
        below = sum(math.comb(n, i) for i in range(d))
        # integer forms of N <= 2*half, full > 2^n - s/N, and minimality of d
        return (N <= 2 * half and full * N > (2**n) * N - s and below * N <= (2**n) * N - s
                and s <= N * 2**n)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d_star": self.d_star,
            "N_star": str(self.N_star),
            "s_max": str(self.s_max),
            "exponent": mpmath.nstr(self.exponent, 30),
        }


def clp_refuted(n: int, s: int, N: int) -> bool:
    """Does the argument rule out |S| = s with slices of size N?

    d is the least degree whose monomial count exceeds 2^n - s/N; the
    argument applies when N > 2 * #monomials of degree <= d/2.
    """
    pref = _prefix_counts(n)
    gap_num = (2**n) * N - s  # (2^n - s/N) * N
    d = next(j for j in range(n + 1) if pref[j] * N > gap_num)
    return N > 2 * pref[d // 2]


def clp_bound(n: int) -> ClpBoundCertificate:
    """Largest |S| the two counting inequalities fail to refute.

    For fixed N the refutation is monotone in |S|, and the least degree d
    that survives is even, so the optimum over all (|S|, N) is attained at
    N = min(2 * B(k), 2^n), |S| = N * (2^n - B(2k - 1)) for some k, where
    B(j) counts monomials of degree <= j.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    pref = _prefix_counts(n)
    cube = 2**n
    best = None
    for k in range(n // 2 + 1):
        d = 2 * k
        N = min(2 * pref[k], cube)
        s = N * (cube - (pref[d - 1] if d >= 1 else 0))
        if best is None or s > best[0]:
            best = (s, d, N)
    s, d, N = best
    with mpmath.workdps(50):
        exponent = mpmath.log(s, 4) / n
    cert = ClpBoundCertificate(n, d, N, s, exponent)
    if not cert.verify():
        raise AssertionError(f"CLP certificate failed re-verification at n={n}")
    return cert


def certificate_json(cert: ClpBoundCertificate) -> str:
    return json.dumps(cert.to_json(), sort_keys=True)
