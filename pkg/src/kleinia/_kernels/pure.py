"""Pure-Python (numpy) fallbacks for the hot kernels.

Same contracts as the compiled versions in ``_speedups``:

* ``span(table, gens)`` -- subgroup generated by ``gens`` as a sorted index array.
* ``normal_extension(table, h_elems, x)`` -- elements of ``<H, x>`` for ``x``
  normalizing the subgroup ``H`` (the result is a union of ``H``-cosets).
* ``conj_elems(table, inv, elems, g)`` -- the set ``{g s g^-1 : s in elems}``.
* ``convolve(table, aidx, anum, bidx, bnum, order)`` -- dense int64 group-algebra
  convolution of integer numerator vectors.  The caller guarantees no int64
  overflow.

All index arrays are int32; tables are int16.
"""

import numpy as np


def span(table, gens):
    order = table.shape[0]
    gens = np.asarray(gens, dtype=np.int32)
    seen = np.zeros(order, dtype=bool)
    seen[0] = True
    elems = [0]
    frontier = np.array([0], dtype=np.int32)
    if gens.size == 0:
        return np.array([0], dtype=np.int32)
    while frontier.size:
        prod = table[np.ix_(frontier, gens)].ravel().astype(np.int32)
        new = np.unique(prod[~seen[prod]])
        seen[new] = True
        elems.append(new)
        frontier = new
    out = np.concatenate([np.atleast_1d(e) for e in elems]).astype(np.int32)
    out.sort()
    return out


def normal_extension(table, h_elems, x):
    order = table.shape[0]
    h_elems = np.asarray(h_elems, dtype=np.int32)
    seen = np.zeros(order, dtype=bool)
    seen[h_elems] = True
    reps = [0]
    pending = [int(x)]
    while pending:
        c = pending.pop()
        if seen[c]:
            continue
        coset = table[h_elems, c].astype(np.int32)
        seen[coset] = True
        reps.append(c)
        for r in reps:
            pending.append(int(table[c, r]))
            pending.append(int(table[r, c]))
    return np.nonzero(seen)[0].astype(np.int32)


def conj_elems(table, inv, elems, g):
    elems = np.asarray(elems, dtype=np.int32)
    out = table[table[g, elems], inv[g]].astype(np.int32)
    out.sort()
    return out


def lattice_candidates(table, inv, elems, gens, pmaps):
    order = table.shape[0]
    elems = np.asarray(elems, dtype=np.int32)
    member = np.zeros(order, dtype=bool)
    member[elems] = True
    ok = ~member
    allg = np.arange(order)
    for h in np.asarray(gens, dtype=np.int32):
        ok &= member[table[table[allg, h], inv[allg]]]
    xs = np.nonzero(ok)[0].astype(np.int32)
    if xs.size == 0:
        return xs
    keep = np.zeros(xs.size, dtype=bool)
    for row in pmaps:
        keep |= member[row[xs]]
    cands = xs[keep]
    if cands.size == 0:
        return cands
    coset_min = table[np.ix_(elems, cands)].min(axis=0)
    _, first = np.unique(coset_min, return_index=True)
    return cands[np.sort(first)]


def convolve(table, aidx, anum, bidx, bnum, order):
    dense = np.zeros(order, dtype=np.int64)
    brow = np.asarray(bidx, dtype=np.intp)
    for g, cg in zip(aidx, anum):
        targets = table[g, brow]
        np.add.at(dense, targets, int(cg) * bnum)
    return dense
