"""Exact arithmetic on point sets in F_p^n and Z_4^n.

Points are tuples of residues. A point set is stored sorted in lexicographic
order, which coincides with numeric order of the base-``modulus`` code
(most significant coordinate first).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Iterable, Iterator, Mapping

import numpy as np

Point = tuple[int, ...]


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    f = 3
    while f * f <= m:
        if m % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FpVector:
    """A point of F_p^n with p an odd prime."""

    p: int
    coords: Point

    def __post_init__(self):
        if not (is_prime(self.p) and self.p >= 3):
            raise DomainError(f"p must be an odd prime, got {self.p}")
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if any(not 0 <= c < self.p for c in self.coords):
            raise DomainError(f"coordinates must lie in [0, {self.p})")

    @property
    def n(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class PointSet:
    """Duplicate-free, sorted set of points of (Z/modulus)^n."""

    modulus: int
    n: int
    points: tuple[Point, ...] = ()
    _codes: np.ndarray = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.n < 0:
            raise DomainError("dimension must be non-negative")
        if self.modulus < 2:
            raise DomainError("modulus must be at least 2")
        pts = [tuple(int(c) for c in pt) for pt in self.points]
        for pt in pts:
            if len(pt) != self.n:
                raise DomainError(f"point {pt} does not have dimension {self.n}")
            if any(not 0 <= c < self.modulus for c in pt):
                raise DomainError(f"point {pt} has a coordinate outside [0, {self.modulus})")
        uniq = sorted(set(pts))
        if len(uniq) != len(pts):
            raise DomainError("duplicate points")
        object.__setattr__(self, "points", tuple(uniq))
        object.__setattr__(self, "_codes", encode(np.array(uniq, dtype=np.int64).reshape(len(uniq), self.n), self.modulus))

    @classmethod
    def from_codes(cls, modulus: int, n: int, codes: Iterable[int]) -> "PointSet":
        arr = decode(np.unique(np.asarray(list(codes), dtype=np.int64)), n, modulus)
        return cls(modulus, n, tuple(map(tuple, arr.tolist())))

    def with_points(self, points) -> "PointSet":
        return type(self)(self.modulus, self.n, tuple(points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Point]:
        return iter(self.points)

    def __contains__(self, pt) -> bool:
        return tuple(pt) in self._lookup

    @property
    def _lookup(self) -> frozenset:
        cached = self.__dict__.get("_lookup_cache")
        if cached is None:
            cached = frozenset(self.points)
            object.__setattr__(self, "_lookup_cache", cached)
        return cached

    @property
    def codes(self) -> np.ndarray:
        return self._codes

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=np.int64).reshape(len(self.points), self.n)

    @property
    def ambient_size(self) -> int:
        return self.modulus**self.n


@dataclass(frozen=True)
class FpPointSet(PointSet):
    def __post_init__(self):
        if not (is_prime(self.modulus) and self.modulus >= 3):
            raise DomainError(f"p must be an odd prime, got {self.modulus}")
        super().__post_init__()

    @property
    def p(self) -> int:
        return self.modulus

    @classmethod
    def of(cls, p: int, n: int, points=()) -> "FpPointSet":
        return cls(p, n, tuple(points))


@dataclass(frozen=True)
class Z4PointSet(PointSet):
    def __post_init__(self):
        if self.modulus != 4:
            raise DomainError("Z4PointSet requires modulus 4")
        super().__post_init__()

    @classmethod
    def of(cls, n: int, points=()) -> "Z4PointSet":
        return cls(4, n, tuple(points))


@dataclass(frozen=True)
class BinaryPointSet(PointSet):
    """A subset of F_2^n (used for the images of rho)."""

    def __post_init__(self):
        if self.modulus != 2:
            raise DomainError("BinaryPointSet requires modulus 2")
        super().__post_init__()

    @classmethod
    def of(cls, n: int, points=()) -> "BinaryPointSet":
        return cls(2, n, tuple(points))

    def masks(self) -> list[int]:
        """Points as bit masks, coordinate i in bit i."""
        return [to_mask(pt) for pt in self.points]


@dataclass(frozen=True)
class CosetSlice:
    """rho(F_n ∩ (S - t)) for a canonical coset representative t in {0,1}^n."""

    t: Point
    points: BinaryPointSet

    def __len__(self) -> int:
        return len(self.points)


def encode(arr: np.ndarray, modulus: int) -> np.ndarray:
    arr = np.asarray(arr, dtype=np.int64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    n = arr.shape[1] if arr.ndim == 2 else 0
    weights = modulus ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return arr @ weights if n else np.zeros(arr.shape[0], dtype=np.int64)


def decode(codes: np.ndarray, n: int, modulus: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty((codes.size, n), dtype=np.int64)
    rest = codes.copy()
    for i in range(n - 1, -1, -1):
        out[:, i] = rest % modulus
        rest //= modulus
    return out


def to_mask(bits: Iterable[int]) -> int:
    m = 0
    for i, b in enumerate(bits):
        if b:
            m |= 1 << i
    return m


def from_mask(mask: int, n: int) -> Point:
    return tuple((mask >> i) & 1 for i in range(n))


def all_points(modulus: int, n: int) -> np.ndarray:
    return decode(np.arange(modulus**n, dtype=np.int64), n, modulus)


def _membership(s: PointSet):
    """Return a vectorised membership test on codes."""
    size = s.ambient_size
    if size <= 1 << 24:
        table = np.zeros(size, dtype=bool)
        table[s.codes] = True
        return lambda c: table[c]
    ref = s.codes
    return lambda c: np.isin(c, ref)


def _pair_indices(m: int):
    return np.triu_indices(m, k=1)


def _ap3_hits(s: PointSet, chunk: int = 1 << 20) -> Iterator[np.ndarray]:
    """Yield chunks of booleans, one per unordered pair {x, z}, marking pairs
    whose midpoint class contains an element of s."""
    arr = s.array
    m = len(s)
    if m < 3:
        return
    q = s.modulus
    if q == 4:
        parity = BinaryPointSet.of(s.n, {tuple(r) for r in (arr % 2).tolist()})
        member = _membership(parity)
    else:
        member = _membership(s)
        inv2 = (q + 1) // 2
    iu, ju = _pair_indices(m)
    for start in range(0, iu.size, chunk):
        a = arr[iu[start:start + chunk]]
        b = arr[ju[start:start + chunk]]
        tot = a + b
        if q == 4:
            # x + z must lie in {0,2}^n; then 2y = x + z iff y = (x+z)/2 mod 2
            ok = np.all(tot % 2 == 0, axis=1)
            mid = (tot // 2) % 2
            hit = np.zeros(ok.shape, dtype=bool)
            if ok.any():
                hit[ok] = member(encode(mid[ok], 2))
        else:
            hit = member(encode((tot * inv2) % q, q))
        yield hit


def is_ap3_free(s: PointSet) -> bool:
    """True iff no pairwise-distinct x, y, z in s satisfy x + z = 2y."""
    if isinstance(s, BinaryPointSet):
        raise DomainError("3APs degenerate in characteristic 2")
    for hit in _ap3_hits(s):
        if hit.any():
            return False
    return True


def count_ap3(s: PointSet, chunk: int = 1 << 20) -> int:
    """Number of ordered triples (x, y, z) in s^3 with x + z = 2y, degenerate ones included."""
    if not isinstance(s, FpPointSet):
        raise DomainError("count_ap3 is defined over F_p^n")
    arr, m, p = s.array, len(s), s.p
    if m == 0 or s.n == 0:
        return m**3
    member = _membership(s)
    total = 0
    step = max(1, chunk // m)
    for start in range(0, m, step):
        x = arr[start:start + step]
        z = (2 * arr[None, :, :] - x[:, None, :]) % p
        total += int(member(encode(z.reshape(-1, s.n), p)).sum())
    return total


def restricted_sumset(a: PointSet) -> PointSet:
    """{a1 + a2 : a1, a2 in a, a1 != a2} in the ambient group of a."""
    m = len(a)
    if m < 2:
        return a.with_points(())
    arr = a.array
    iu, ju = _pair_indices(m)
    sums = (arr[iu] + arr[ju]) % a.modulus
    codes = np.unique(encode(sums, a.modulus))
    return a.with_points(map(tuple, decode(codes, a.n, a.modulus).tolist()))


def translate(a: PointSet, t: Iterable[int]) -> PointSet:
    t = np.asarray(tuple(t), dtype=np.int64)
    arr = (a.array + t) % a.modulus if len(a) else a.array
    return a.with_points(map(tuple, arr.tolist()))


def rho(u: Iterable[int]) -> Point:
    """The isomorphism {0,2}^n -> F_2^n, u -> u/2."""
    out = []
    for c in u:
        if c not in (0, 2):
            raise DomainError(f"{tuple(u)} is not in F_n = {{0,2}}^n")
        out.append(c // 2)
    return tuple(out)


def rho_inverse(v: Iterable[int]) -> Point:
    return tuple(2 * int(c) for c in v)


def double_set(s: Z4PointSet) -> BinaryPointSet:
    """rho(2*S): doubling lands in {0,2}^n; rho(2s) is s mod 2."""
    if not isinstance(s, Z4PointSet):
        raise DomainError("double_set expects a Z4PointSet")
    return BinaryPointSet.of(s.n, {tuple(c % 2 for c in pt) for pt in s.points})


def coset_representative(x: Iterable[int]) -> Point:
    return tuple(int(c) % 2 for c in x)


def coset_decompose(s: Z4PointSet) -> dict[Point, CosetSlice]:
    """Partition s by cosets of F_n, keyed by the {0,1}-valued representative."""
    if not isinstance(s, Z4PointSet):
        raise DomainError("coset_decompose expects a Z4PointSet")
    groups: dict[Point, list[Point]] = {}
    for pt in s.points:
        t = coset_representative(pt)
        groups.setdefault(t, []).append(tuple(((c - tc) % 4) // 2 for c, tc in zip(pt, t)))
    return {t: CosetSlice(t, BinaryPointSet.of(s.n, pts)) for t, pts in sorted(groups.items())}


def reconstruct(slices: Mapping[Point, CosetSlice], n: int) -> Z4PointSet:
    pts = []
    for t, sl in slices.items():
        for v in sl.points:
            pts.append(tuple((tc + 2 * vc) % 4 for tc, vc in zip(t, v)))
    return Z4PointSet.of(n, pts)


def xor_sumset(points: Iterable[int]) -> set[int]:
    """Restricted sumset of bit-mask points in F_2^n."""
    pts = list(points)
    return {a ^ b for a, b in combinations(pts, 2)}


# ---------------------------------------------------------------- file format


def format_point_set(s: PointSet) -> str:
    lines = [f"{s.modulus} {s.n}"]
    lines += [" ".join(str(c) for c in pt) or "-" for pt in s.points]
    return "\n".join(lines) + "\n"


def parse_point_set(text: str) -> PointSet:
    """Parse the ``p n`` header + one-point-per-line text format.

    In dimension 0 the single possible point is written as ``-``.
    """
    rows = [ln.strip() for ln in text.splitlines()]
    rows = [ln for ln in rows if ln and not ln.startswith("#")]
    if not rows:
        raise DomainError("empty point-set file")
    head = rows[0].split()
    if len(head) != 2:
        raise DomainError("header must be 'p n'")
    q, n = int(head[0]), int(head[1])
    pts, seen = [], set()
    for lineno, ln in enumerate(rows[1:], start=2):
        pt = () if ln == "-" else tuple(int(tok) for tok in ln.split())
        if pt in seen:
            raise DomainError(f"duplicate point {pt} (record {lineno})")
        seen.add(pt)
        pts.append(pt)
    if q == 4:
        return Z4PointSet.of(n, pts)
    if q == 2:
        return BinaryPointSet.of(n, pts)
    return FpPointSet.of(q, n, pts)


def read_point_set(path) -> PointSet:
    return parse_point_set(Path(path).read_text())


def write_point_set(s: PointSet, path) -> None:
    Path(path).write_text(format_point_set(s))
