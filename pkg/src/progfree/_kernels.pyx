# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: hypergraph branch and bound, F_2 row reduction.

Mirrors ``_pykernels`` exactly; bitsets are arrays of uint64 words.
"""

from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memset
import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"

cdef extern from *:
    """
    static inline int pk_popcount(unsigned long long x) { return __builtin_popcountll(x); }
    static inline int pk_ctz(unsigned long long x) { return __builtin_ctzll(x); }
    """
    int pk_popcount(unsigned long long x) nogil
    int pk_ctz(unsigned long long x) nogil


ctypedef struct SearchState:
    int V
    int W
    const uint64_t* comp
    const uint64_t* pmask
    const int64_t* pcap
    const int64_t* poff
    int Q
    int64_t budget
    int64_t nodes
    int best
    int aborted
    int* chosen
    int* witness
    uint64_t* live      # chosen | avail, scratch
    uint64_t* stack     # (V + 2) * W avail buffers
    uint64_t* forb      # W scratch


cdef inline int count_bits(const uint64_t* a, int W) noexcept nogil:
    cdef int i, c = 0
    for i in range(W):
        c += pk_popcount(a[i])
    return c


cdef int partition_bound(SearchState* st, const uint64_t* live) noexcept nogil:
    cdef int q, g, i, c, b
    cdef int bound = st.V
    for q in range(st.Q):
        b = 0
        for g in range(<int>st.poff[q], <int>st.poff[q + 1]):
            c = 0
            for i in range(st.W):
                c += pk_popcount(live[i] & st.pmask[g * st.W + i])
            b += <int>st.pcap[g] if c > st.pcap[g] else c
            if b >= bound:
                break
        if b < bound:
            bound = b
    return bound


cdef void rec(SearchState* st, int k, uint64_t* cmask) noexcept nogil:
    cdef int W = st.W
    cdef uint64_t* avail = st.stack + k * W
    cdef uint64_t* child = st.stack + (k + 1) * W
    cdef int i, j, v, s
    cdef uint64_t low
    cdef const uint64_t* row

    st.nodes += 1
    if st.budget > 0 and st.nodes > st.budget:
        st.aborted = 1
        return
    if k > st.best:
        st.best = k
        for i in range(k):
            st.witness[i] = st.chosen[i]
    if k + count_bits(avail, W) <= st.best:
        return
    if st.Q > 0:
        for i in range(W):
            st.live[i] = cmask[i] | avail[i]
        if partition_bound(st, st.live) <= st.best:
            return
    for i in range(W):
        while avail[i]:
            low = avail[i] & (~avail[i] + 1)
            v = i * 64 + pk_ctz(avail[i])
            avail[i] ^= low
            for j in range(W):
                st.forb[j] = 0
            for s in range(k):
                row = st.comp + (<int64_t>v * st.V + st.chosen[s]) * W
                for j in range(W):
                    st.forb[j] |= row[j]
            for j in range(W):
                child[j] = avail[j] & ~st.forb[j]
            st.chosen[k] = v
            cmask[i] |= low
            rec(st, k + 1, cmask)
            cmask[i] ^= low
            if st.aborted:
                return
            if k + count_bits(avail, W) <= st.best:
                return


def mis3_search(cnp.ndarray completers, cnp.ndarray part_masks, cnp.ndarray part_caps,
                cnp.ndarray part_offsets, forced, allowed, int best, long long budget):
    """Largest vertex set avoiding every forbidden triple, by branch and bound.

    See ``_pykernels.mis3_search`` for the contract.
    """
    cdef cnp.ndarray[cnp.uint64_t, ndim=3, mode="c"] comp = np.ascontiguousarray(completers, dtype=np.uint64)
    cdef int V = comp.shape[0]
    cdef int W = comp.shape[2]
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] pm = np.ascontiguousarray(part_masks, dtype=np.uint64).reshape(-1, W)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] pc = np.ascontiguousarray(part_caps, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] po = np.ascontiguousarray(part_offsets, dtype=np.int64)
    cdef list fv = [int(x) for x in forced]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1, mode="c"] allow = (
        np.ascontiguousarray(allowed, dtype=np.uint64) if allowed is not None else None)
    cdef SearchState st
    cdef int i, j, w, fi, fj, f = len(fv)
    cdef uint64_t* cmask
    cdef const uint64_t* row

    st.V = V
    st.W = W
    st.comp = <const uint64_t*> comp.data
    st.pmask = <const uint64_t*> pm.data if pm.shape[0] else NULL
    st.pcap = <const int64_t*> pc.data if pc.shape[0] else NULL
    st.poff = <const int64_t*> po.data
    st.Q = po.shape[0] - 1 if po.shape[0] else 0
    st.budget = budget
    st.nodes = 0
    st.best = best
    st.aborted = 0
    st.chosen = <int*> malloc((V + 1) * sizeof(int))
    st.witness = <int*> malloc((V + 1) * sizeof(int))
    st.live = <uint64_t*> malloc(W * sizeof(uint64_t))
    st.forb = <uint64_t*> malloc(W * sizeof(uint64_t))
    st.stack = <uint64_t*> malloc((V + 2) * W * sizeof(uint64_t))
    cmask = <uint64_t*> malloc(W * sizeof(uint64_t))
    if not (st.chosen and st.witness and st.live and st.forb and st.stack and cmask):
        raise MemoryError()
    try:
        memset(cmask, 0, W * sizeof(uint64_t))
        memset(st.stack, 0, (V + 2) * W * sizeof(uint64_t))
        for i in range(V):
            st.stack[f * W + i // 64] |= (<uint64_t>1) << (i % 64)
        for i in range(f):
            fi = fv[i]
            st.chosen[i] = fi
            cmask[fi // 64] |= (<uint64_t>1) << (fi % 64)
            for j in range(i):
                fj = fv[j]
                row = st.comp + (<int64_t>fi * V + fj) * W
                for w in range(W):
                    st.stack[f * W + w] &= ~row[w]
        for w in range(W):
            st.stack[f * W + w] &= ~cmask[w]
            if allow is not None:
                st.stack[f * W + w] &= allow[w]
        start_best = best
        with nogil:
            rec(&st, f, cmask)
        witness = None
        if st.best > start_best:
            witness = sorted(st.witness[i] for i in range(st.best))
        completed = not st.aborted
        nodes = st.nodes if completed else budget
        return st.best, witness, nodes, completed
    finally:
        free(st.chosen)
        free(st.witness)
        free(st.live)
        free(st.forb)
        free(st.stack)
        free(cmask)


def gf2_reduce_rows(cnp.ndarray basis, cnp.ndarray pivots, cnp.ndarray where, int rank,
                    cnp.ndarray rows, long long ncols):
    """Fold ``rows`` into a reduced row-echelon basis over F_2, in place.

    See ``_pykernels.gf2_reduce_rows`` for the contract.
    """
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] B = basis
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] piv = pivots
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] wh = where
    cdef cnp.ndarray[cnp.uint64_t, ndim=2, mode="c"] R = np.ascontiguousarray(rows, dtype=np.uint64)
    cdef int W = B.shape[1]
    cdef Py_ssize_t nrows = R.shape[0]
    cdef uint64_t* x = <uint64_t*> malloc(W * sizeof(uint64_t))
    cdef uint64_t* bd = <uint64_t*> B.data
    cdef int64_t* pd = <int64_t*> piv.data
    cdef int64_t* wd = <int64_t*> wh.data
    cdef Py_ssize_t r
    cdef int i, j, c, nz
    cdef int64_t col
    if x == NULL:
        raise MemoryError()
    try:
        with nogil:
            for r in range(nrows):
                if rank >= ncols:
                    break
                memcpy(x, &R[r, 0], W * sizeof(uint64_t))
                for i in range(rank):
                    col = pd[i]
                    if (x[col >> 6] >> (col & 63)) & 1:
                        for j in range(W):
                            x[j] ^= bd[i * W + j]
                c = -1
                for j in range(W):
                    if x[j]:
                        c = j * 64 + pk_ctz(x[j])
                        break
                if c < 0:
                    continue
                for i in range(rank):
                    if (bd[i * W + (c >> 6)] >> (c & 63)) & 1:
                        for j in range(W):
                            bd[i * W + j] ^= x[j]
                memcpy(bd + rank * W, x, W * sizeof(uint64_t))
                pd[rank] = c
                wd[c] = rank
                rank += 1
        return rank
    finally:
        free(x)
