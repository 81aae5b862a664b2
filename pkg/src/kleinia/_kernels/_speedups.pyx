# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the exact-arithmetic and lattice-closure inner loops.

Mirrors the contracts of ``kleinia._kernels.pure``.
"""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def span(cnp.int16_t[:, :] table, gens):
    cdef int order = table.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] gen_arr = np.asarray(gens, dtype=np.int32)
    cdef int ngens = gen_arr.shape[0]
    if ngens == 0:
        return np.array([0], dtype=np.int32)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(order, dtype=np.uint8)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] queue = np.empty(order, dtype=np.int32)
    cdef cnp.int32_t[:] q = queue
    cdef cnp.uint8_t[:] s = seen
    cdef cnp.int32_t[:] gv = gen_arr
    cdef int head = 0, tail = 1, v, w, i
    q[0] = 0
    s[0] = 1
    while head < tail:
        v = q[head]
        head += 1
        for i in range(ngens):
            w = table[v, gv[i]]
            if not s[w]:
                s[w] = 1
                q[tail] = w
                tail += 1
    out = queue[:tail].copy()
    out.sort()
    return out


def normal_extension(cnp.int16_t[:, :] table, h_elems, int x):
    cdef int order = table.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] h_arr = np.asarray(h_elems, dtype=np.int32)
    cdef int hn = h_arr.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen = np.zeros(order, dtype=np.uint8)
    cdef cnp.uint8_t[:] s = seen
    cdef cnp.int32_t[:] hv = h_arr
    # reps and pending stacks sized generously: at most order entries each
    cdef cnp.ndarray[cnp.int32_t, ndim=1] reps = np.empty(order, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] pending = np.empty(4 * order, dtype=np.int32)
    cdef cnp.int32_t[:] rv = reps
    cdef cnp.int32_t[:] pv = pending
    cdef int nreps = 1, npend = 1, c, i, r, cap = 4 * order
    rv[0] = 0
    pv[0] = x
    for i in range(hn):
        s[hv[i]] = 1
    while npend > 0:
        npend -= 1
        c = pv[npend]
        if s[c]:
            continue
        for i in range(hn):
            s[table[hv[i], c]] = 1
        rv[nreps] = c
        nreps += 1
        for i in range(nreps):
            r = rv[i]
            if npend + 2 >= cap:
                # flush: drop already-seen entries to reclaim space
                npend = _compact(pv, npend, s)
            pv[npend] = table[c, r]
            npend += 1
            pv[npend] = table[r, c]
            npend += 1
    return np.nonzero(seen)[0].astype(np.int32)


cdef int _compact(cnp.int32_t[:] pv, int npend, cnp.uint8_t[:] s):
    cdef int i, j = 0
    for i in range(npend):
        if not s[pv[i]]:
            pv[j] = pv[i]
            j += 1
    return j


def conj_elems(cnp.int16_t[:, :] table, cnp.int16_t[:] inv, elems, int g):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] e_arr = np.asarray(elems, dtype=np.int32)
    cdef int n = e_arr.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(n, dtype=np.int32)
    cdef cnp.int32_t[:] ev = e_arr
    cdef cnp.int32_t[:] ov = out
    cdef int i, gi = inv[g]
    for i in range(n):
        ov[i] = table[table[g, ev[i]], gi]
    out.sort()
    return out


def lattice_candidates(cnp.int16_t[:, :] table, cnp.int16_t[:] inv,
                       elems, gens, cnp.int32_t[:, :] pmaps):
    """Extension candidates for one subgroup in the lattice walk.

    Returns x in N_G(S) - S with x^p in S for some prime p (rows of
    ``pmaps`` are the precomputed p-th power maps), one representative per
    S-coset (the one whose coset minimum is first seen).
    """
    cdef int order = table.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] e_arr = np.asarray(elems, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] g_arr = np.asarray(gens, dtype=np.int32)
    cdef cnp.int32_t[:] ev = e_arr, gv = g_arr
    cdef int ne = e_arr.shape[0], ng = g_arr.shape[0], nprimes = pmaps.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] member = np.zeros(order, dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] seen_min = np.zeros(order, dtype=np.uint8)
    cdef cnp.uint8_t[:] mv = member, sv = seen_min
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(order, dtype=np.int32)
    cdef cnp.int32_t[:] ov = out
    cdef int nout = 0, g, i, ok, cm, w
    for i in range(ne):
        mv[ev[i]] = 1
    for g in range(order):
        if mv[g]:
            continue
        ok = 1
        for i in range(ng):
            if not mv[table[table[g, gv[i]], inv[g]]]:
                ok = 0
                break
        if not ok:
            continue
        ok = 0
        for i in range(nprimes):
            if mv[pmaps[i, g]]:
                ok = 1
                break
        if not ok:
            continue
        cm = order
        for i in range(ne):
            w = table[ev[i], g]
            if w < cm:
                cm = w
        if not sv[cm]:
            sv[cm] = 1
            ov[nout] = g
            nout += 1
    return out[:nout].copy()


def convolve(cnp.int16_t[:, :] table, aidx, anum, bidx, bnum, int order):
    cdef cnp.ndarray[cnp.int32_t, ndim=1] ai = np.asarray(aidx, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] av = np.asarray(anum, dtype=np.int64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bi = np.asarray(bidx, dtype=np.int32)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] bv = np.asarray(bnum, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] dense = np.zeros(order, dtype=np.int64)
    cdef cnp.int32_t[:] aiv = ai, biv = bi
    cdef cnp.int64_t[:] avv = av, bvv = bv, dv = dense
    cdef int i, j, na = ai.shape[0], nb = bi.shape[0], g
    cdef cnp.int64_t ca
    for i in range(na):
        g = aiv[i]
        ca = avv[i]
        for j in range(nb):
            dv[table[g, biv[j]]] += ca * bvv[j]
    return dense
