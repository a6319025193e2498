# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evolution kernel.

Mirrors _evolve_py.ga_run draw for draw: identical xoshiro256** stream
handling, identical draw order (see the draw-order contract in
_evolve_py's docstring), identical tie-breaking.  The caller's Python
DeterministicRng state is pulled on entry and pushed back on exit, so
simulations are bit-identical whichever kernel runs.
"""

from libc.stdint cimport uint64_t, int64_t, int32_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcpy, memmove

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t ecosim_popcnt(uint64_t x) {
        return (uint64_t)__builtin_popcountll(x);
    }
    static inline uint64_t ecosim_mulshift(uint64_t x, uint64_t n) {
        return (uint64_t)(((unsigned __int128)x * (unsigned __int128)n) >> 64);
    }
    static inline uint64_t ecosim_rotl(uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    """
    uint64_t ecosim_popcnt(uint64_t x) nogil
    uint64_t ecosim_mulshift(uint64_t x, uint64_t n) nogil
    uint64_t ecosim_rotl(uint64_t x, int k) nogil


cdef struct Xo:
    uint64_t s0, s1, s2, s3


cdef inline uint64_t xo_next(Xo* st) nogil:
    cdef uint64_t result = ecosim_rotl(st.s1 * <uint64_t>5, 7) * <uint64_t>9
    cdef uint64_t t = st.s1 << 17
    st.s2 ^= st.s0
    st.s3 ^= st.s1
    st.s1 ^= st.s2
    st.s0 ^= st.s3
    st.s2 ^= t
    st.s3 = ecosim_rotl(st.s3, 45)
    return result


cdef inline uint64_t xo_below(Xo* st, uint64_t n) nogil:
    return ecosim_mulshift(xo_next(st), n)


cdef inline double xo01(Xo* st) nogil:
    return <double>(xo_next(st) >> 11) * 1.1102230246251565e-16


cdef inline int64_t c_eval(int32_t* g, int n,
                           const uint64_t* masks, const int64_t* sizes,
                           const uint64_t* tmasks, const int64_t* tsizes,
                           int m) nogil:
    cdef int i
    cdef int64_t s = 0
    cdef uint64_t tm, dm
    cdef int mn = n if n < m else m
    for i in range(mn):
        tm = tmasks[i]
        dm = masks[g[i]]
        s += 2 * <int64_t>ecosim_popcnt(tm & ~dm) + <int64_t>ecosim_popcnt(dm & ~tm)
    for i in range(n, m):
        s += 2 * tsizes[i]
    for i in range(m, n):
        s += sizes[g[i]]
    return s


cdef inline bint c_better(int64_t da, int la, int ia,
                          int64_t db, int lb, int ib) nogil:
    if da != db:
        return da < db
    if la != lb:
        return la < lb
    return ia < ib


cdef inline int c_tournament(int64_t* dists, int32_t* lens, int pop,
                             int k, Xo* st) nogil:
    cdef int best = -1, c, j
    for j in range(k):
        c = <int>xo_below(st, <uint64_t>pop)
        if best < 0 or c_better(dists[c], lens[c], c, dists[best], lens[best], best):
            best = c
    return best


def ga_run(const uint64_t[::1] masks, const int64_t[::1] sizes,
           const uint64_t[::1] task_masks, const int64_t[::1] task_sizes,
           seeds, int pop, int max_gens, int stag_limit, int tourn,
           double cx_rate, double mut_rate, int elites, int cap, rng):
    """Compiled counterpart of _evolve_py.ga_run (same arguments/returns)."""
    cdef int n_pool = masks.shape[0]
    cdef int m = task_masks.shape[0]
    cdef Xo st
    s0, s1, s2, s3 = rng.getstate()
    st.s0 = s0
    st.s1 = s1
    st.s2 = s2
    st.s3 = s3

    cdef int32_t* gen_a = <int32_t*>malloc(<size_t>pop * cap * sizeof(int32_t))
    cdef int32_t* gen_b = <int32_t*>malloc(<size_t>pop * cap * sizeof(int32_t))
    cdef int32_t* len_a = <int32_t*>malloc(<size_t>pop * sizeof(int32_t))
    cdef int32_t* len_b = <int32_t*>malloc(<size_t>pop * sizeof(int32_t))
    cdef int64_t* dist_a = <int64_t*>malloc(<size_t>pop * sizeof(int64_t))
    cdef int64_t* dist_b = <int64_t*>malloc(<size_t>pop * sizeof(int64_t))
    cdef int32_t* best_g = <int32_t*>malloc(<size_t>cap * sizeof(int32_t))
    cdef char* taken = <char*>malloc(<size_t>pop)
    if (gen_a == NULL or gen_b == NULL or len_a == NULL or len_b == NULL or
            dist_a == NULL or dist_b == NULL or best_g == NULL or taken == NULL):
        free(gen_a); free(gen_b); free(len_a); free(len_b)
        free(dist_a); free(dist_b); free(best_g); free(taken)
        raise MemoryError()

    cdef const uint64_t* pm = &masks[0]
    cdef const int64_t* ps = &sizes[0]
    cdef const uint64_t* tm = &task_masks[0]
    cdef const int64_t* ts = &task_sizes[0]

    cdef int i, j, L, slot, e, sel, p1, p2, c1, c2, tail, pos, op
    cdef int best_len, gens, stagnant, bi
    cdef int64_t best_dist, d
    cdef int n_seeds = len(seeds)
    cdef int32_t* g
    cdef int32_t* child

    try:
        # ------- instantiate -------
        for i in range(pop):
            g = gen_a + i * cap
            if i < n_seeds:
                seed = seeds[i]
                L = len(seed)
                if L > cap:
                    L = cap
                for j in range(L):
                    g[j] = <int32_t>seed[j]
            else:
                L = 1 + <int>xo_below(&st, <uint64_t>(2 * m))
                if L > cap:
                    L = cap
                for j in range(L):
                    g[j] = <int32_t>xo_below(&st, <uint64_t>n_pool)
            len_a[i] = L
            dist_a[i] = c_eval(g, L, pm, ps, tm, ts, m)

        bi = 0
        for i in range(1, pop):
            if c_better(dist_a[i], len_a[i], i, dist_a[bi], len_a[bi], bi):
                bi = i
        best_dist = dist_a[bi]
        best_len = len_a[bi]
        memcpy(best_g, gen_a + bi * cap, <size_t>best_len * sizeof(int32_t))

        gens = 0
        stagnant = 0
        while best_dist > 0 and gens < max_gens and stagnant < stag_limit:
            # ------- one generation into the b buffers -------
            for i in range(pop):
                taken[i] = 0
            for e in range(elites):
                sel = -1
                for i in range(pop):
                    if taken[i]:
                        continue
                    if sel < 0 or c_better(dist_a[i], len_a[i], i,
                                           dist_a[sel], len_a[sel], sel):
                        sel = i
                taken[sel] = 1
                len_b[e] = len_a[sel]
                dist_b[e] = dist_a[sel]
                memcpy(gen_b + e * cap, gen_a + sel * cap,
                       <size_t>len_a[sel] * sizeof(int32_t))

            for slot in range(elites, pop):
                child = gen_b + slot * cap
                p1 = c_tournament(dist_a, len_a, pop, tourn, &st)
                if xo01(&st) < cx_rate:
                    p2 = c_tournament(dist_a, len_a, pop, tourn, &st)
                    c1 = 1 + <int>xo_below(&st, <uint64_t>len_a[p1])
                    c2 = 1 + <int>xo_below(&st, <uint64_t>len_a[p2])
                    L = c1 + (len_a[p2] - c2)
                    if L > cap:
                        L = cap
                    memcpy(child, gen_a + p1 * cap, <size_t>c1 * sizeof(int32_t))
                    tail = L - c1
                    if tail > 0:
                        memcpy(child + c1, gen_a + p2 * cap + c2,
                               <size_t>tail * sizeof(int32_t))
                else:
                    L = len_a[p1]
                    memcpy(child, gen_a + p1 * cap, <size_t>L * sizeof(int32_t))
                if xo01(&st) < mut_rate:
                    op = <int>xo_below(&st, 3)
                    if op == 0:
                        if L < cap:
                            pos = <int>xo_below(&st, <uint64_t>(L + 1))
                            memmove(child + pos + 1, child + pos,
                                    <size_t>(L - pos) * sizeof(int32_t))
                            child[pos] = <int32_t>xo_below(&st, <uint64_t>n_pool)
                            L += 1
                    elif op == 1:
                        if L > 1:
                            pos = <int>xo_below(&st, <uint64_t>L)
                            memmove(child + pos, child + pos + 1,
                                    <size_t>(L - pos - 1) * sizeof(int32_t))
                            L -= 1
                    else:
                        pos = <int>xo_below(&st, <uint64_t>L)
                        child[pos] = <int32_t>xo_below(&st, <uint64_t>n_pool)
                len_b[slot] = L
                dist_b[slot] = c_eval(child, L, pm, ps, tm, ts, m)

            gen_a, gen_b = gen_b, gen_a
            len_a, len_b = len_b, len_a
            dist_a, dist_b = dist_b, dist_a
            gens += 1

            bi = 0
            for i in range(1, pop):
                if c_better(dist_a[i], len_a[i], i, dist_a[bi], len_a[bi], bi):
                    bi = i
            if dist_a[bi] < best_dist:
                best_dist = dist_a[bi]
                best_len = len_a[bi]
                memcpy(best_g, gen_a + bi * cap,
                       <size_t>best_len * sizeof(int32_t))
                stagnant = 0
            else:
                stagnant += 1

        out = [best_g[i] for i in range(best_len)]
        rng.setstate((st.s0, st.s1, st.s2, st.s3))
        return out, best_dist, gens
    finally:
        free(gen_a); free(gen_b); free(len_a); free(len_b)
        free(dist_a); free(dist_b); free(best_g); free(taken)
