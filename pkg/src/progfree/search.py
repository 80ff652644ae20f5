"""Exact branch-and-bound search for extremal progression-free and
sunflower-free objects.

All three searches reduce to one problem: the largest vertex set of a
3-uniform hypergraph containing no edge.  The hypergraph is given by a
completer table ``comp[u, v]`` (bitset of w such that {u, v, w} is an edge).
Choosing a vertex removes every completer of it with an already chosen
vertex, which is the constraint propagation step; the remaining candidates
give the counting bound.  Partitions of the vertex set into pieces whose
maximum is already known (hyperplanes, sub-intervals, halves of the cube)
give a second, much stronger bound.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import kernels
from .constructions import IntegerSet
from .core import DomainError, FpPointSet, all_points, decode, encode, is_ap3_free, is_prime

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**9
DEFAULT_CAP = 3**5
GREEDY_SEED = 20240601
GREEDY_RESTARTS = 64


@dataclass(frozen=True)
class SetFamily:
    """Family of subsets of {1..n}; member i-th element is bit i-1 of its mask."""

    n: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        ms = [int(m) for m in self.members]
        if any(not 0 <= m < 1 << self.n for m in ms):
            raise DomainError(f"member mask outside [0, 2^{self.n})")
        if len(set(ms)) != len(ms):
            raise DomainError("duplicate members")
        object.__setattr__(self, "members", tuple(sorted(ms)))

    def __len__(self) -> int:
        return len(self.members)

    def as_sets(self) -> list[frozenset[int]]:
        return [frozenset(i + 1 for i in range(self.n) if m >> i & 1) for m in self.members]

    @classmethod
    def from_sets(cls, n: int, sets) -> "SetFamily":
        return cls(n, tuple(sum(1 << (e - 1) for e in s) for s in sets))


@dataclass(frozen=True)
class SearchResult:
    size: int
    witness: Any
    nodes_explored: int
    proven_optimal: bool
    extra: dict = field(default_factory=dict, compare=False)


@dataclass
class Hypergraph:
    """Forbidden-triple structure on vertices 0..V-1, plus known-cap partitions."""

    V: int
    completers: np.ndarray  # (V, V, W) uint64
    partitions: list[list[tuple[np.ndarray, int]]] = field(default_factory=list)

    @property
    def W(self) -> int:
        return self.completers.shape[2]

    def packed_partitions(self):
        masks, caps, offsets = [], [], [0]
        for groups in self.partitions:
            for mask, cap in groups:
                masks.append(mask)
                caps.append(cap)
            offsets.append(len(masks))
        pm = np.array(masks, dtype=np.uint64).reshape(len(masks), self.W)
        return pm, np.array(caps, dtype=np.int64), np.array(offsets, dtype=np.int64)

    def is_independent(self, vertices: Sequence[int]) -> bool:
        vs = list(vertices)
        chosen = set(vs)
        for u, v in combinations(vs, 2):
            for w in bits_of(self.completers[u, v]):
                if w in chosen:
                    return False
        return True


def words_for(V: int) -> int:
    return max(1, (V + 63) // 64)


def bitset(vertices, W: int) -> np.ndarray:
    out = np.zeros(W, dtype=np.uint64)
    for v in vertices:
        out[v >> 6] |= np.uint64(1) << np.uint64(v & 63)
    return out


def bits_of(words: np.ndarray) -> list[int]:
    out = []
    for i, w in enumerate(words.tolist()):
        while w:
            low = w & -w
            out.append(64 * i + low.bit_length() - 1)
            w ^= low
    return out


def _completer_table(V: int, triples_of_pair) -> np.ndarray:
    W = words_for(V)
    comp = np.zeros((V, V, W), dtype=np.uint64)
    for u in range(V):
        for v in range(u + 1, V):
            ws = [w for w in triples_of_pair(u, v) if w != u and w != v]
            if ws:
                row = bitset(ws, W)
                comp[u, v] = row
                comp[v, u] = row
    return comp


# ---------------------------------------------------------------- hypergraphs


def ap3_hypergraph(p: int, n: int) -> Hypergraph:
    """3APs of F_p^n on vertices indexed by lexicographic code."""
    pts = all_points(p, n)
    V = len(pts)
    inv2 = (p + 1) // 2
    W = words_for(V)
    comp = np.zeros((V, V, W), dtype=np.uint64)
    if V > 1:
        iu, ju = np.triu_indices(V, k=1)
        a, b = pts[iu], pts[ju]
        cands = [encode((2 * b - a) % p, p), encode((2 * a - b) % p, p), encode(((a + b) * inv2) % p, p)]
        for c in cands:
            word = (c >> 6).astype(np.int64)
            bit = np.left_shift(np.uint64(1), (c & 63).astype(np.uint64))
            np.bitwise_or.at(comp, (iu, ju, word), bit)
        comp[ju, iu] = comp[iu, ju]
    return Hypergraph(V, comp)


def interval_hypergraph(N: int) -> Hypergraph:
    """3APs x, x+d, x+2d in {1..N}; vertex i stands for the integer i+1."""

    def third(u: int, v: int):
        out = []
        if 2 * v - u < N:
            out.append(2 * v - u)
        if 2 * u - v >= 0:
            out.append(2 * u - v)
        if (u + v) % 2 == 0:
            out.append((u + v) // 2)
        return out

    return Hypergraph(N, _completer_table(N, third))


def sunflower_hypergraph(n: int) -> Hypergraph:
    """Triples of distinct subsets of {1..n} with equal pairwise intersections."""
    V = 1 << n
    masks = np.arange(V)

    def third(a: int, b: int):
        core = a & b
        ok = ((masks & a) == core) & ((masks & b) == core)
        return np.nonzero(ok)[0].tolist()

    return Hypergraph(V, _completer_table(V, third))


# ---------------------------------------------------------------- engine


def greedy_incumbent(h: Hypergraph, seed: int = GREEDY_SEED, restarts: int = GREEDY_RESTARTS) -> list[int]:
    """Best of several random-order greedy passes (deterministic for a seed)."""
    rng = np.random.default_rng(seed)
    comp = h.completers
    best: list[int] = []
    for _ in range(restarts):
        blocked = np.zeros(h.W, dtype=np.uint64)
        chosen: list[int] = []
        for v in rng.permutation(h.V).tolist():
            if (int(blocked[v >> 6]) >> (v & 63)) & 1:
                continue
            for s in chosen:
                blocked |= comp[v, s]
            chosen.append(v)
        if len(chosen) > len(best):
            best = sorted(chosen)
    return best


def solve(h: Hypergraph, *, budget: int = DEFAULT_BUDGET, threads: int = 1, seed: int = GREEDY_SEED,
          seeds: Sequence[Sequence[int]] = (), forced: Sequence[int] = ()) -> tuple[list[int], int, bool]:
    """Maximum edge-free vertex set.  Returns (witness, nodes, proven_optimal).

    ``seeds`` are extra known-valid sets used as initial incumbents.
    ``forced`` restricts the search to supersets of the given vertices (the
    caller is responsible for this being without loss of generality).
    """
    incumbent = greedy_incumbent(h, seed)
    for cand in seeds:
        cand = sorted(cand)
        if len(cand) > len(incumbent) and h.is_independent(cand):
            incumbent = cand
    pm, pc, po = h.packed_partitions()
    forced = [int(v) for v in forced]
    if threads <= 1:
        _, wit, nodes, done = kernels.mis3_search(h.completers, pm, pc, po, forced, None, len(incumbent), budget)
        return (wit if wit is not None else incumbent), nodes, done
    return _solve_split(h, (pm, pc, po), forced, incumbent, budget, threads)


def _solve_split(h, packed, forced, incumbent, budget, threads):
    """Split the root frontier across workers.

    Subtree i contains the sets whose smallest non-forced vertex is the i-th
    frontier vertex v_i, i.e. forced + [v_i] plus vertices after v_i.  Each
    worker owns a fixed round-robin share of subtrees and its own incumbent,
    so sizes and flags do not depend on scheduling.
    """
    taken = set(forced)
    blocked = set()
    for i, u in enumerate(forced):
        for w in forced[:i]:
            blocked.update(bits_of(h.completers[u, w]))
    frontier = [v for v in range(h.V) if v not in taken and v not in blocked]
    buckets = [list(enumerate(frontier))[i::threads] for i in range(threads)]

    def run(bucket):
        best, found, nodes, done = len(incumbent), None, 0, True
        for idx, v in bucket:
            remaining = budget - nodes if budget > 0 else 0
            if budget > 0 and remaining <= 0:
                done = False
                break
            allowed = bitset(frontier[idx + 1:], h.W)
            _, wit, n_sub, ok = kernels.mis3_search(h.completers, *packed, list(forced) + [v], allowed, best, remaining)
            nodes += n_sub
            done = done and ok
            if wit is not None and len(wit) > best:
                best, found = len(wit), (idx, wit)
        return best, found, nodes, done

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, buckets))
    best_len = max([len(incumbent)] + [r[0] for r in results])
    winners = sorted(r[1] for r in results if r[1] is not None and len(r[1][1]) == best_len)
    witness = winners[0][1] if winners else incumbent
    return witness, sum(r[2] for r in results), all(r[3] for r in results)


# ---------------------------------------------------------------- public ops


def _check_budget(budget: int) -> int:
    if budget is None:
        return 0
    if budget < 0:
        raise DomainError("budget must be non-negative (0 = unlimited)")
    return int(budget)


@lru_cache(maxsize=None)
def _cap_search(p: int, n: int, budget: int, threads: int, seed: int) -> SearchResult:
    h = ap3_hypergraph(p, n)
    seeds = []
    if n >= 1:
        sub = _cap_search(p, n - 1, budget, threads, seed)
        # monotonicity: append a zero coordinate to the (n-1)-dimensional witness
        seeds.append([p * c for c in encode(np.array(sub.witness.points, dtype=np.int64).reshape(-1, n - 1), p).tolist()] if n > 1 else [0])
        if sub.proven_optimal and n >= 2:
            h.partitions = _hyperplane_partitions(p, n, sub.size)
    forced = affine_frame(p, n, [_cap_search(p, j, budget, threads, seed) for j in range(n)], seeds, h)
    witness, nodes, done = solve(h, budget=budget, threads=threads, seed=seed, seeds=seeds, forced=forced)
    pts = decode(np.array(witness, dtype=np.int64), n, p)
    s = FpPointSet.of(p, n, map(tuple, pts.tolist()))
    assert is_ap3_free(s), "search returned a set containing a 3AP"
    return SearchResult(len(s), s, nodes, done)


def affine_frame(p: int, n: int, lower: Sequence[SearchResult], seeds, h: Hypergraph) -> list[int]:
    """Codes of 0, e_1, ..., e_k that any strictly better set may be assumed to contain.

    If |S| exceeds the maximum in dimension j-1, S is not inside the affine
    span of j of its points, so an affinely independent S-point sequence of
    length j+1 exists; an affine bijection carries it to 0, e_1, ..., e_j and
    preserves 3APs.  The frame grows while the target beats every proven
    lower-dimensional maximum.
    """
    target = max([len(greedy_incumbent(h))] + [len(sd) for sd in seeds]) + 1
    frame = [0]
    for j in range(1, n + 1):
        prev = lower[j - 1]
        if not prev.proven_optimal or target <= prev.size:
            break
        frame.append(p ** (n - j))
    return frame


def _hyperplane_partitions(p: int, n: int, cap: int):
    pts = all_points(p, n)
    W = words_for(len(pts))
    parts = []
    for gamma in directions(p, n):
        levels = (pts @ np.array(gamma)) % p
        parts.append([(bitset(np.nonzero(levels == c)[0].tolist(), W), cap) for c in range(p)])
    return parts


def directions(p: int, n: int) -> list[tuple[int, ...]]:
    """Nonzero vectors of F_p^n whose first nonzero coordinate is 1, lexicographic."""
    out = []
    for row in all_points(p, n).tolist():
        nz = [c for c in row if c]
        if nz and nz[0] == 1:
            out.append(tuple(row))
    return out


def max_ap3_free(p: int, n: int, budget: int = DEFAULT_BUDGET, *, threads: int = 1,
                 seed: int = GREEDY_SEED, cap: int = DEFAULT_CAP) -> SearchResult:
    """Largest 3AP-free subset of F_p^n.

    The search for dimension n first solves dimension n-1 (same budget) and
    uses its maximum as a per-hyperplane cap.  ``budget`` counts search nodes
    per dimension; 0 means unlimited.
    """
    if not (is_prime(p) and p >= 3):
        raise DomainError(f"p must be an odd prime, got {p}")
    if n < 0:
        raise DomainError("n must be non-negative")
    if p**n > cap:
        raise DomainError(f"p^n = {p**n} exceeds the search cap {cap}")
    return _cap_search(p, n, _check_budget(budget), max(1, threads), seed)


@lru_cache(maxsize=None)
def _interval_search(N: int, budget: int, threads: int, seed: int) -> SearchResult:
    h = interval_hypergraph(N)
    seeds = []
    if N > 1:
        smaller = [_interval_search(k, budget, threads, seed) for k in range(1, N)]
        seeds.append([m - 1 for m in smaller[-1].witness.members])
        if all(r.proven_optimal for r in smaller) and N >= 2:
            W = words_for(N)
            for k in range(1, N):
                left = bitset(range(k), W)
                right = bitset(range(k, N), W)
                h.partitions.append([(left, smaller[k - 1].size), (right, smaller[N - k - 1].size)])
    witness, nodes, done = solve(h, budget=budget, threads=threads, seed=seed, seeds=seeds)
    members = IntegerSet(N, tuple(v + 1 for v in witness))
    assert is_ap3_free_integers(members.members)
    return SearchResult(len(members), members, nodes, done)


def max_ap3_free_interval(N: int, budget: int = DEFAULT_BUDGET, *, threads: int = 1,
                          seed: int = GREEDY_SEED) -> SearchResult:
    """Largest subset of {1..N} without x, x+d, x+2d (d >= 1)."""
    if N < 1:
        raise DomainError("N must be positive")
    if N > 200:
        raise DomainError("interval search is limited to N <= 200")
    return _interval_search(N, _check_budget(budget), max(1, threads), seed)


def is_ap3_free_integers(members: Sequence[int]) -> bool:
    """Exact check that no x, x+d, x+2d (d >= 1) lies in ``members``."""
    a = np.unique(np.asarray(list(members), dtype=np.int64))
    if a.size < 3:
        return True
    lo, hi = int(a[0]), int(a[-1])
    table = np.zeros(hi - lo + 1, dtype=bool)
    table[a - lo] = True
    step = max(1, (1 << 22) // a.size)
    for start in range(0, a.size, step):
        x = a[start:start + step, None]
        z = a[None, :]
        s = x + z
        mask = (z > x) & (s % 2 == 0)
        mids = (s[mask] // 2) - lo
        if table[mids].any():
            return False
    return True


def is_sunflower_free(f: SetFamily) -> bool:
    """True iff no three distinct members have all pairwise intersections equal."""
    ms = list(f.members)
    if len(ms) < 3:
        return True
    for a, b in combinations(ms, 2):
        core = a & b
        # C must satisfy C & a == core and C & b == core
        for c in ms:
            if c != a and c != b and (c & a) == core and (c & b) == core:
                return False
    return True


@lru_cache(maxsize=None)
def _sunflower_search(n: int, budget: int, threads: int, seed: int) -> SearchResult:
    h = sunflower_hypergraph(n)
    seeds = []
    if n >= 1:
        sub = _sunflower_search(n - 1, budget, threads, seed)
        seeds.append(list(sub.witness.members))
        if sub.proven_optimal and n >= 2:
            W = words_for(1 << n)
            for i in range(n):
                inside = [m for m in range(1 << n) if m >> i & 1]
                outside = [m for m in range(1 << n) if not m >> i & 1]
                h.partitions.append([(bitset(inside, W), sub.size), (bitset(outside, W), sub.size)])
    witness, nodes, done = solve(h, budget=budget, threads=threads, seed=seed, seeds=seeds)
    fam = SetFamily(n, tuple(witness))
    assert is_sunflower_free(fam)
    return SearchResult(len(fam), fam, nodes, done)


def max_sunflower_free(n: int, budget: int = DEFAULT_BUDGET, *, threads: int = 1,
                       seed: int = GREEDY_SEED, cap: int = 1 << 6) -> SearchResult:
    """Largest sunflower-free family of subsets of {1..n}."""
    if n < 0:
        raise DomainError("n must be non-negative")
    if 1 << n > cap:
        raise DomainError(f"2^n = {1 << n} exceeds the search cap {cap}")
    return _sunflower_search(n, _check_budget(budget), max(1, threads), seed)


# ---------------------------------------------------------------- family file


def format_family(f: SetFamily) -> str:
    return f"n {f.n}\n" + "".join(f"{m:x}\n" for m in f.members)


def parse_family(text: str) -> SetFamily:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not rows or rows[0].split()[0] != "n":
        raise DomainError("family file must start with 'n <value>'")
    n = int(rows[0].split()[1])
    members = [int(r, 16) for r in rows[1:]]
    if len(set(members)) != len(members):
        raise DomainError("duplicate family member")
    return SetFamily(n, tuple(members))


def read_family(path) -> SetFamily:
    return parse_family(Path(path).read_text())


def write_family(f: SetFamily, path) -> None:
    Path(path).write_text(format_family(f))
