"""Pure-Python implementations of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module; selected by
:mod:`progfree.kernels` when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _row_int(row: np.ndarray) -> int:
    return int.from_bytes(np.ascontiguousarray(row, dtype="<u8").tobytes(), "little")


def _int_row(value: int, words: int) -> np.ndarray:
    return np.frombuffer(value.to_bytes(8 * words, "little"), dtype="<u8").astype(np.uint64)


class _Abort(Exception):
    pass


def mis3_search(completers, part_masks, part_caps, part_offsets, forced, allowed, best, budget):
    """Largest vertex set avoiding every forbidden triple, by branch and bound.

    ``completers[u, v]`` is the bitset of vertices w making {u, v, w}
    forbidden.  Only vertices in ``forced`` or in the ``allowed`` bitset (None
    means all) are used; ``budget`` <= 0 means unlimited.  Returns ``(size, witness, nodes, completed)``; witness is
    None when nothing larger than ``best`` was found.
    """
    V = completers.shape[0]
    comp = [[_row_int(completers[u, v]) for v in range(V)] for u in range(V)]
    parts = []
    for q in range(len(part_offsets) - 1):
        lo, hi = int(part_offsets[q]), int(part_offsets[q + 1])
        parts.append([(_row_int(part_masks[g]), int(part_caps[g])) for g in range(lo, hi)])

    forced = [int(v) for v in forced]
    chosen_mask = 0
    avail = (1 << V) - 1
    for i, v in enumerate(forced):
        chosen_mask |= 1 << v
        for u in forced[:i]:
            avail &= ~comp[v][u]
    avail &= ~chosen_mask
    if allowed is not None:
        avail &= _row_int(allowed)

    state = {"best": int(best), "witness": None, "nodes": 0}
    budget = int(budget)

    def partition_bound(live: int) -> int:
        bound = V
        for groups in parts:
            b = 0
            for mask, cap in groups:
                c = (live & mask).bit_count()
                b += cap if c > cap else c
            if b < bound:
                bound = b
        return bound

    def rec(chosen: list[int], cmask: int, avail: int) -> None:
        state["nodes"] += 1
        if budget > 0 and state["nodes"] > budget:
            raise _Abort
        k = len(chosen)
        if k > state["best"]:
            state["best"] = k
            state["witness"] = list(chosen)
        if k + avail.bit_count() <= state["best"]:
            return
        if parts and partition_bound(cmask | avail) <= state["best"]:
            return
        while avail:
            low = avail & -avail
            v = low.bit_length() - 1
            avail ^= low
            forb = 0
            row = comp[v]
            for s in chosen:
                forb |= row[s]
            chosen.append(v)
            rec(chosen, cmask | low, avail & ~forb)
            chosen.pop()
            if k + avail.bit_count() <= state["best"]:
                return

    completed = True
    try:
        rec(list(forced), chosen_mask, avail)
    except _Abort:
        completed = False
    witness = state["witness"]
    nodes = state["nodes"] if completed else budget
    return state["best"], (sorted(witness) if witness is not None else None), nodes, completed


def gf2_reduce_rows(basis, pivots, where, rank, rows, ncols):
    """Fold ``rows`` into a reduced row-echelon basis over F_2, in place.

    ``basis[:rank]`` holds rows whose pivot columns ``pivots[:rank]`` are
    cleared in every other basis row; ``where[c]`` maps a pivot column to
    its basis row (or -1).  Stops early once the rank reaches ``ncols``.
    Returns the new rank.
    """
    W = basis.shape[1]
    B = [_row_int(basis[i]) for i in range(rank)]
    piv = [int(pivots[i]) for i in range(rank)]
    for r in range(rows.shape[0]):
        if rank >= ncols:
            break
        x = _row_int(rows[r])
        for i in range(rank):
            if (x >> piv[i]) & 1:
                x ^= B[i]
        if not x:
            continue
        c = (x & -x).bit_length() - 1
        for i in range(rank):
            if (B[i] >> c) & 1:
                B[i] ^= x
        B.append(x)
        piv.append(c)
        where[c] = rank
        rank += 1
    for i in range(rank):
        basis[i] = _int_row(B[i], W)
        pivots[i] = piv[i]
    return rank
