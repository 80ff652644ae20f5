"""Character sums of subsets of F_p^n.

Convention: S^(g) = sum_{x in S} w^{g.x} with w = exp(2 pi i / p).  Then the
number of ordered triples with x + z = 2y is p^{-n} sum_g S^(g)^2 S^(-2g).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import DomainError, FpPointSet, all_points, encode

DEFAULT_CAP = 3**10
ROUNDING_TOLERANCE = 1e-3


class NumericalInstabilityError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CharacterTable:
    p: int
    n: int
    values: np.ndarray  # complex, indexed by the lexicographic code of g

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, gamma) -> complex:
        return complex(self.values[int(encode(np.array([gamma]), self.p)[0]) if self.n else 0])

    def parseval_sum(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))


@dataclass(frozen=True)
class IncrementCertificate:
    direction: tuple[int, ...]
    level: int
    density: Fraction
    baseline: Fraction

    @property
    def increment(self) -> Fraction:
        return self.density - self.baseline

    def to_json(self) -> dict:
        return {
            "direction": list(self.direction),
            "level": self.level,
            "density_num": self.density.numerator,
            "density_den": self.density.denominator,
            "baseline_num": self.baseline.numerator,
            "baseline_den": self.baseline.denominator,
        }


def _check_cap(s: FpPointSet, cap: int) -> None:
    if not isinstance(s, FpPointSet):
        raise DomainError("Fourier analysis needs a set in F_p^n")
    if s.ambient_size > cap:
        raise DomainError(f"p^n = {s.ambient_size} exceeds the Fourier cap {cap}")


def indicator(s: FpPointSet) -> np.ndarray:
    ind = np.zeros(s.ambient_size, dtype=float)
    ind[s.codes] = 1.0
    return ind.reshape((s.p,) * s.n)


def dft(s: FpPointSet, *, cap: int = DEFAULT_CAP) -> CharacterTable:
    """Full character table, one axis at a time (numpy's n-d FFT)."""
    _check_cap(s, cap)
    if s.n == 0:
        return CharacterTable(s.p, 0, np.array([complex(len(s))]))
    # ifftn carries the positive exponent and a 1/p^n factor
    vals = np.fft.ifftn(indicator(s)) * s.ambient_size
    return CharacterTable(s.p, s.n, vals.reshape(-1))


def _negated_double_index(p: int, n: int) -> np.ndarray:
    """Code of -2g for every code g."""
    if n == 0:
        return np.zeros(1, dtype=np.int64)
    return encode((-2 * all_points(p, n)) % p, p)


def count_ap3_fourier(s: FpPointSet, *, cap: int = DEFAULT_CAP) -> int:
    table = dft(s, cap=cap)
    v = table.values
    raw = np.sum(v * v * v[_negated_double_index(s.p, s.n)]) / s.ambient_size
    value = round(raw.real)
    residue = max(abs(raw.real - value), abs(raw.imag))
    if residue > ROUNDING_TOLERANCE:
        raise NumericalInstabilityError(f"3AP count {raw} is not close to an integer (residue {residue:.3g})")
    return int(value)


def directions(p: int, n: int) -> np.ndarray:
    """Nonzero g with first nonzero coordinate 1, in lexicographic order."""
    pts = all_points(p, n)
    nz = pts != 0
    has = nz.any(axis=1)
    first = np.where(has, pts[np.arange(len(pts)), nz.argmax(axis=1)], 0)
    return pts[has & (first == 1)]


def best_affine_hyperplane(s: FpPointSet, *, cap: int = DEFAULT_CAP, chunk: int = 1 << 22) -> IncrementCertificate:
    """Densest affine hyperplane {x : g.x = c}.

    Scans one g per parallel class and all p levels; ties go to the
    lexicographically smallest g, then the smallest c.  By pigeonhole the
    returned density is at least |S|/p^n.
    """
    _check_cap(s, cap)
    if s.n < 1:
        raise DomainError("need n >= 1")
    if len(s) == 0 or len(s) == s.ambient_size:
        raise DomainError("degenerate input: S is empty or the whole space")
    p, arr = s.p, s.array
    dirs = directions(p, s.n)
    best_count, best_dir, best_level = -1, None, None
    step = max(1, chunk // max(1, len(s)))
    for start in range(0, len(dirs), step):
        block = dirs[start:start + step]
        levels = (arr @ block.T) % p  # |S| x m
        counts = np.stack([(levels == c).sum(axis=0) for c in range(p)], axis=1)  # m x p
        flat = int(np.argmax(counts))  # first max: smallest direction, then level
        i, c = divmod(flat, p)
        if counts[i, c] > best_count:
            best_count, best_dir, best_level = int(counts[i, c]), tuple(int(x) for x in block[i]), c
    plane = p ** (s.n - 1)
    return IncrementCertificate(best_dir, best_level, Fraction(best_count, plane), Fraction(len(s), s.ambient_size))
