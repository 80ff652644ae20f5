"""Explicit progression-free sets: Behrend's digit-sphere construction in
{1..N} and seeded greedy sets in F_p^n and Z_4^n."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DomainError, FpPointSet, Z4PointSet, all_points, decode, encode, is_prime


@dataclass(frozen=True)
class IntegerSet:
    N: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        ms = sorted(int(m) for m in self.members)
        if len(set(ms)) != len(ms):
            raise DomainError("duplicate members")
        if ms and (ms[0] < 1 or ms[-1] > self.N):
            raise DomainError(f"members must lie in [1, {self.N}]")
        object.__setattr__(self, "members", tuple(ms))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class BehrendChoice:
    base: int
    digits: int
    radius: int


def behrend_bases(N: int) -> range:
    return range(2, math.ceil(math.exp(math.sqrt(math.log(N)))) + 3)


def behrend_set(N: int, *, with_choice: bool = False):
    """Largest digit-sphere set fitting in {1..N} over the scanned bases.

    For base D, members are 1 + sum(d_i * D**(k-1-i)) with every digit
    d_i < ceil(D/2), so adding two members never carries and x + z = 2y
    forces the digit vectors to satisfy u + w = 2v.  All vectors share the
    squared norm r, and a sphere contains no three collinear points, so
    the set is 3AP-free.  Ties go to the smallest base, then radius.
    """
    from .search import is_ap3_free_integers

    if N < 1:
        raise DomainError("N must be positive")
    if N < 3:
        out = IntegerSet(N, tuple(range(1, N + 1)))
        return (out, None) if with_choice else out
    best_vals: np.ndarray = np.array([0], dtype=np.int64)
    best_choice = BehrendChoice(2, 1, 0)
    for D in behrend_bases(N):
        m = -(-D // 2)
        k = max(1, len(np.base_repr(N - 1, D)))
        if m**k > 1 << 24:
            continue
        vecs = all_points(m, k)
        vals = vecs @ (D ** np.arange(k - 1, -1, -1, dtype=np.int64))
        keep = vals <= N - 1
        vals, norms = vals[keep], (vecs[keep] ** 2).sum(axis=1)
        counts = np.bincount(norms)
        r = int(np.argmax(counts))
        if counts[r] > best_vals.size:
            best_vals = np.sort(vals[norms == r])
            best_choice = BehrendChoice(D, k, r)
    out = IntegerSet(N, tuple((best_vals + 1).tolist()))
    if not is_ap3_free_integers(out.members):
        raise AssertionError(f"Behrend set for N={N} contains a 3AP")
    return (out, best_choice) if with_choice else out


def _check_cap(q: int, n: int, cap: int) -> None:
    if q**n > cap:
        raise DomainError(f"ambient size {q**n} exceeds cap {cap}")


def greedy_ap3_free(p: int, n: int, seed: int, *, cap: int = 3**10) -> FpPointSet:
    """Insert the points of F_p^n in seeded random order, keeping each point
    that completes no 3AP with points already kept.  The result is maximal."""
    if not (is_prime(p) and p >= 3):
        raise DomainError(f"p must be an odd prime, got {p}")
    _check_cap(p, n, cap)
    pts = all_points(p, n)
    blocked = np.zeros(len(pts), dtype=bool)
    inv2 = (p + 1) // 2
    kept: list[int] = []
    for c in np.random.default_rng(seed).permutation(len(pts)).tolist():
        if blocked[c]:
            continue
        if kept:
            x, a = pts[c], pts[kept]
            blocked[encode((2 * x - a) % p, p)] = True
            blocked[encode((2 * a - x) % p, p)] = True
            blocked[encode(((x + a) * inv2) % p, p)] = True
        kept.append(c)
        blocked[c] = True
    return FpPointSet.of(p, n, map(tuple, decode(np.array(kept, dtype=np.int64), n, p).tolist()))


def greedy_ap3_free_z4(n: int, seed: int, *, cap: int = 4**8) -> Z4PointSet:
    """Z_4^n analogue of :func:`greedy_ap3_free`."""
    _check_cap(4, n, cap)
    pts = all_points(4, n)
    blocked = np.zeros(len(pts), dtype=bool)
    by_parity = defaultdict(list)
    for c, par in enumerate(encode(pts % 2, 2).tolist()):
        by_parity[par].append(c)
    kept: list[int] = []
    for c in np.random.default_rng(seed).permutation(len(pts)).tolist():
        if blocked[c]:
            continue
        if kept:
            x, a = pts[c], pts[kept]
            blocked[encode((2 * x - a) % 4, 4)] = True
            blocked[encode((2 * a - x) % 4, 4)] = True
            same = np.all((x - a) % 2 == 0, axis=1)
            # 2y = x + a has solutions exactly when x = a mod 2: all y with y = (x+a)/2 mod 2
            for par in set(encode(((x + a[same]) // 2) % 2, 2).tolist()):
                blocked[by_parity[par]] = True
        kept.append(c)
        blocked[c] = True
    return Z4PointSet.of(n, map(tuple, decode(np.array(kept, dtype=np.int64), n, 4).tolist()))


def format_integer_set(s: IntegerSet) -> str:
    return f"N {s.N}\n" + "".join(f"{m}\n" for m in s.members)


def parse_integer_set(text: str) -> IntegerSet:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not rows or rows[0].split()[0] != "N":
        raise DomainError("integer-set file must start with 'N <value>'")
    members = [int(r) for r in rows[1:]]
    if len(set(members)) != len(members):
        raise DomainError("duplicate member")
    return IntegerSet(int(rows[0].split()[1]), tuple(members))


def write_integer_set(s: IntegerSet, path) -> None:
    Path(path).write_text(format_integer_set(s))


def read_integer_set(path) -> IntegerSet:
    return parse_integer_set(Path(path).read_text())
