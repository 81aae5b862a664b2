"""Strong Shoda pairs and the primitive central idempotents they generate.

A strong Shoda pair (K, H) has H normal in K, K normal in G, K/H cyclic and
maximal abelian in N_G(H)/H.  For metabelian G every primitive central
idempotent of QG arises as e(G, K, H); the enumeration below relies on that
only through its completeness check (the idempotents must sum to 1), so a
group outside the guarantee fails loudly instead of silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as kernels
from .algebra import (
    AlgebraElement,
    _epsilon_from_generator,
    _idempotent_from_epsilon,
    cyclic_quotient_generator,
)
from .errors import IncompleteDecomposition
from .groups import (
    FiniteGroup,
    Subgroup,
    center,
    core,
    mask_from_indices,
    normalizer,
    subgroup_classes,
)


@dataclass(frozen=True)
class StrongShodaPair:
    K: Subgroup
    H: Subgroup
    N: Subgroup          # N_G(H)
    k: int               # [K : H], the cyclotomic conductor
    n: int               # [G : N], the matrix size

    def __repr__(self):
        return (f"StrongShodaPair(|K|={self.K.order}, |H|={self.H.order}, "
                f"k={self.k}, n={self.n})")


@dataclass(frozen=True)
class CrossedProductDescriptor:
    """Data of Q(xi_k) * N/K with the action and twisting in exponent form.

    ``quotient_reps`` are the chosen coset representatives of N/K (the
    identity coset first); ``action[a]`` is i with x^gamma(a) = x^i and
    ``twisting[(a, b)]`` is j with gamma(ab)^-1 gamma(a) gamma(b) = x^j,
    both mod k.  The choices of generator and transversal are not
    canonical; only derived isomorphism data is comparable.
    """

    n: int
    k: int
    quotient_reps: tuple
    action: dict
    twisting: dict
    faithful_kernel: Subgroup

    @property
    def quotient_order(self):
        return len(self.quotient_reps)


def _comm_in_h_set(G, n_elems, x, h_member):
    """{y in N : (y, x) in H} as an element array."""
    t, inv = G.table, G.inverse
    c = t[t[n_elems, x], t[inv[n_elems], inv[x]]]
    return n_elems[h_member[c]]


def is_strong_shoda_pair(G: FiniteGroup, K: Subgroup, H: Subgroup) -> bool:
    """The three defining conditions, checked directly."""
    if H.mask & ~K.mask or K.mask & ~((1 << G.order) - 1):
        return False
    # H normal in K
    for g in K.generators():
        for h in H.generators():
            if G.conj(int(g), int(h)) not in H:
                return False
    # K normal in G
    for g in G.generators:
        for h in K.generators():
            if G.conj(int(g), int(h)) not in K:
                return False
    x = cyclic_quotient_generator(G, K, H)
    if x is None:
        return False
    N = normalizer(G, H)
    h_member = np.zeros(G.order, dtype=bool)
    h_member[H.elements()] = True
    if K.order == H.order:
        # K/H trivial is maximal abelian in N/H only when N = H
        return N.order == H.order
    cent = _comm_in_h_set(G, N.elements(), x, h_member)
    return mask_from_indices(cent, G.order) == K.mask


def _coset_orders_mod_h(G, xs, h_member, cap):
    """Order of each x's coset in <H, x>/H (vectorized power walk)."""
    xs = np.asarray(xs, dtype=np.int32)
    out = np.zeros(len(xs), dtype=np.int32)
    acc = xs.copy()
    live = np.ones(len(xs), dtype=bool)
    for j in range(1, cap + 1):
        inh = h_member[acc] & live
        out[inh] = j
        live &= ~inh
        if not live.any():
            break
        acc = G.table[acc, xs].astype(np.int32)
    return out


def _central_quotient_cyclic(G, n_sub, h_member, h_order):
    """Is Z(N/H) cyclic?  Necessary for any SSP with this H."""
    n_elems = n_sub.elements()
    t, inv = G.table, G.inverse
    zn = n_elems
    for z in n_sub.generators():
        c = t[t[zn, z], t[inv[zn], inv[z]]]
        zn = zn[h_member[c]]
    zsize = len(zn) // h_order
    if zsize == 1:
        return True
    orders = _coset_orders_mod_h(G, zn, h_member, zsize * 2)
    return int(orders.max(initial=1)) == zsize


def strong_shoda_pairs_for(G: FiniteGroup, H: Subgroup):
    """All SSPs (K, H) for this H, one class of K per idempotent candidate.

    Candidates x run in decreasing coset order; any x lying inside an
    already-built K generates a subgroup of it over H, hence is either a
    duplicate or non-maximal, so whole built groups are skipped at once.
    """
    out = []
    full = (1 << G.order) - 1
    if H.mask == full:
        out.append(StrongShodaPair(H, H, H, 1, 1))
        return out
    N = normalizer(G, H)
    h_member = np.zeros(G.order, dtype=bool)
    h_member[H.elements()] = True
    if not _central_quotient_cyclic(G, N, h_member, H.order):
        return out
    n_elems = N.elements()
    outside = n_elems[~h_member[n_elems]]
    if outside.size == 0:
        return out
    bound = N.order // H.order
    orders = _coset_orders_mod_h(G, outside, h_member, bound)
    sel = np.lexsort((outside, -orders))
    built = np.zeros(G.order, dtype=bool)
    h_elems = H.elements()
    gmask = (1 << G.order) - 1
    n_member = np.zeros(G.order, dtype=bool)
    n_member[n_elems] = True
    for pos in sel:
        x = int(outside[pos])
        if built[x]:
            continue
        k_elems = kernels.normal_extension(G.table, h_elems, x)
        built[k_elems] = True
        kmask = mask_from_indices(k_elems, G.order)
        K = Subgroup(G, kmask)
        K._elems = k_elems
        # K normal in G?
        normal = True
        for g in G.generators:
            ce = kernels.conj_elems(G.table, G.inverse, k_elems, int(g))
            if mask_from_indices(ce, G.order) != kmask:
                normal = False
                break
        if not normal:
            continue
        # K/H maximal abelian in N/H: centralizer of x mod H equals K
        cent = _comm_in_h_set(G, n_elems, x, h_member)
        if mask_from_indices(cent, G.order) != kmask:
            continue
        k = len(k_elems) // H.order
        n = G.order // N.order
        out.append(StrongShodaPair(K, H, N, k, n))
    return out


def enumerate_pcis(G: FiniteGroup, cap=None, verify_orthogonal=None):
    """Scan subgroup pairs and collect the distinct idempotents e(G, K, H).

    Returns one (pair, idempotent) per idempotent, in discovery order:
    H over conjugacy-class representatives ascending by (order, mask), K in
    the deterministic order of ``strong_shoda_pairs_for``.  Verifies the sum
    is exactly 1 (raising ``IncompleteDecomposition`` otherwise) and, when
    ``verify_orthogonal`` (default: automatically on for order <= 256),
    exact pairwise orthogonality.
    """
    cache_key = "pcis"
    if cache_key in G._cache:
        return G._cache[cache_key]
    from .groups import SUBGROUP_CAP

    cap = cap if cap is not None else max(SUBGROUP_CAP, G.order)
    if verify_orthogonal is None:
        verify_orthogonal = G.order <= 256
    classes = subgroup_classes(G, cap=cap)
    zg = center(G)
    z_elems = zg.elements()
    z_member = np.zeros(G.order, dtype=bool)
    z_member[z_elems] = True
    one = AlgebraElement.one(G)
    total = AlgebraElement.zero(G)
    found = []
    seen = set()
    done = False
    for H, _size in classes:
        if done:
            break
        if not _center_image_cyclic(G, H, z_elems, zg.order):
            continue
        for pair in strong_shoda_pairs_for(G, H):
            x = (cyclic_quotient_generator(G, pair.K, pair.H)
                 if pair.k > 1 else 0)
            eps = (_epsilon_from_generator(G, pair.H, x, pair.k)
                   if pair.k > 1 else _hat_elem(G, pair.H))
            e = _idempotent_from_epsilon(G, eps)
            if e.key() in seen:
                continue
            seen.add(e.key())
            found.append((pair, e))
            total = total + e
            if total == one:
                done = True
                break
    if total != one:
        raise IncompleteDecomposition(
            f"{G.label or 'group'}: idempotent sum over strong Shoda pairs "
            f"is not 1 (found {len(found)}); group outside the metabelian "
            "guarantee",
            partial=found,
        )
    if verify_orthogonal:
        for i in range(len(found)):
            for j in range(i + 1, len(found)):
                if not (found[i][1] * found[j][1]).is_zero():
                    raise IncompleteDecomposition(
                        "distinct idempotents are not orthogonal "
                        "(internal error)", partial=found)
    G._cache[cache_key] = found
    return found


def _hat_elem(G, H):
    e = H.elements()
    return AlgebraElement(G, len(e), e, np.ones(len(e), dtype=np.int64),
                          normalize=False)


def _center_image_cyclic(G, H, z_elems, z_order):
    """Cheap necessary test: Z(G)H/H must be cyclic (it sits in Z(N/H))."""
    h_member = np.zeros(G.order, dtype=bool)
    h_member[H.elements()] = True
    zxh = z_order // int(h_member[z_elems].sum() or 1)
    # order of Z(G)/(Z cap H); cyclic iff some coset has full order
    inter = int(h_member[z_elems].sum())
    target = z_order // inter
    if target == 1:
        return True
    orders = _coset_orders_mod_h(G, z_elems[~h_member[z_elems]], h_member,
                                 target)
    return int(orders.max(initial=1)) == target


# -- crossed product extraction -------------------------------------------------


def _coset_rep_map(G, sub_elems):
    """g -> min(S g), the canonical right-coset representative map."""
    return G.table[sub_elems, :].min(axis=0)


def crossed_product_data(G: FiniteGroup, pair: StrongShodaPair,
                         rng=None) -> CrossedProductDescriptor:
    """Action and twisting of the crossed product Q(xi_k) * N/K.

    With x a generator of K/H and gamma a transversal of N/K lifted into
    N/H:  x^gamma(a) = x^i defines the action exponent, and
    gamma(ab)^-1 gamma(a) gamma(b) = x^j the twisting exponent.  Defaults
    are the minimal-index choices; ``rng`` draws random ones instead (used
    to test invariance of the derived data under the non-canonical choices).
    """
    K, H, N = pair.K, pair.H, pair.N
    k = pair.k
    h_member = np.zeros(G.order, dtype=bool)
    h_member[H.elements()] = True
    if k == 1:
        x = 0
    elif rng is None:
        x = cyclic_quotient_generator(G, K, H)
    else:
        cands = [int(c) for c in K.elements()
                 if not h_member[c]
                 and _coset_order_of(G, int(c), h_member, k) == k]
        x = int(cands[rng.integers(0, len(cands))])
    # canonical H-coset labels and the discrete log of x-powers
    hrep = _coset_rep_map(G, H.elements())
    dlog = {}
    cur = 0
    for j in range(k):
        dlog[int(hrep[cur])] = j
        cur = G.mul(cur, x)
    # coset representatives of K in N
    krep = _coset_rep_map(G, K.elements())
    n_elems = N.elements()
    reps_sorted = np.unique(krep[n_elems])
    if rng is None:
        reps = [int(r) for r in reps_sorted]
    else:
        reps = []
        for r in reps_sorted:
            cos = n_elems[krep[n_elems] == r]
            reps.append(int(cos[rng.integers(0, len(cos))]))
        # keep the identity coset's rep in the identity coset but random
    reps = sorted(reps, key=lambda g: int(krep[g]) != int(krep[0]))
    rep_of_coset = {int(krep[g]): g for g in reps}
    action = {}
    twisting = {}
    for a in reps:
        c = G.mul(G.inv(a), G.mul(x, a))  # x^gamma(a) in paper notation
        i = dlog.get(int(hrep[c]))
        if i is None:
            raise AssertionError("action does not stabilize <x> mod H")
        action[a] = i % k
    for a in reps:
        for b in reps:
            ab_rep = rep_of_coset[int(krep[G.mul(a, b)])]
            w = G.mul(G.inv(ab_rep), G.mul(a, b))
            j = dlog.get(int(hrep[w]))
            if j is None:
                raise AssertionError("transversal defect left <x> mod H")
            twisting[(a, b)] = j % k
    desc = CrossedProductDescriptor(
        n=pair.n, k=k, quotient_reps=tuple(reps), action=action,
        twisting=twisting, faithful_kernel=core(G, H),
    )
    _verify_descriptor(G, desc, rep_of_coset, krep)
    return desc


def _coset_order_of(G, x, h_member, cap):
    cur = x
    for j in range(1, cap + 1):
        if h_member[cur]:
            return j
        cur = G.mul(cur, x)
    return 0


def _verify_descriptor(G, desc, rep_of_coset, krep):
    k = desc.k
    reps = desc.quotient_reps
    act = desc.action
    tw = desc.twisting
    # the action is a homomorphism N/K -> (Z/k)* and is injective
    if k > 1:
        seen = set()
        for a in reps:
            if np.gcd(act[a], k) != 1 and k > 1:
                raise AssertionError("action exponent not a unit mod k")
            if act[a] in seen:
                raise AssertionError("action not injective (not max abelian?)")
            seen.add(act[a])
        for a in reps:
            for b in reps:
                ab = rep_of_coset[int(krep[G.mul(a, b)])]
                if (act[a] * act[b]) % k != act[ab] % k:
                    raise AssertionError("action not a homomorphism")
    # twisting satisfies the crossed-product associativity identity
    for a in reps:
        for b in reps:
            for c in reps:
                ab = rep_of_coset[int(krep[G.mul(a, b)])]
                bc = rep_of_coset[int(krep[G.mul(b, c)])]
                lhs = (tw[(ab, c)] + tw[(a, b)] * act[c]) % k
                rhs = (tw[(a, bc)] + tw[(b, c)]) % k
                if lhs != rhs:
                    raise AssertionError("twisting fails the cocycle identity")
