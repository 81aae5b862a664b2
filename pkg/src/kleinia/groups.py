"""Exact finite-group arithmetic on dense Cayley tables.

A group is a table of 16-bit element indices with element 0 the identity.
Subgroups are bitmasks (python ints) over element indices, which makes
deduplication and lattice bookkeeping cheap and deterministic.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as kernels
from .errors import ClosureCapExceeded, NotNormal, SubgroupCapExceeded

ORDER_CAP = 4096
SUBGROUP_CAP = 256

_RNG_TRIPLES = 10  # multiplier: random associativity triples per order^2


def mask_from_indices(indices, order):
    words = np.zeros((order + 63) // 64, dtype=np.uint64)
    idx = np.asarray(indices, dtype=np.int64)
    np.bitwise_or.at(words, idx >> 6, np.uint64(1) << (idx & 63).astype(np.uint64))
    return int.from_bytes(words.tobytes(), "little")


def indices_from_mask(mask, order):
    nbytes = (order + 7) // 8
    raw = np.frombuffer(mask.to_bytes(nbytes, "little"), dtype=np.uint8)
    bits = np.unpackbits(raw, bitorder="little")[:order]
    return np.nonzero(bits)[0].astype(np.int32)


class FiniteGroup:
    """A finite group as an explicit Cayley table.

    ``table[i, j]`` is the index of ``g_i * g_j``; element 0 is the identity.
    Instances are immutable after construction and safe to share.
    """

    def __init__(self, table, label=None, generators=None, check=True):
        table = np.ascontiguousarray(np.asarray(table, dtype=np.int16))
        self.order = int(table.shape[0])
        self.table = table
        self.label = label
        self.inverse = self._compute_inverses()
        self.element_order = self._compute_element_orders()
        if generators is None:
            generators = self._greedy_generators()
        self.generators = np.asarray(generators, dtype=np.int32)
        self._cache = {}
        if check:
            self._verify()

    # -- construction-time checks ------------------------------------------

    def _compute_inverses(self):
        pos = np.argwhere(self.table == 0)
        inv = np.full(self.order, -1, dtype=np.int16)
        inv[pos[:, 0]] = pos[:, 1]
        if (inv < 0).any():
            raise ValueError("table has a row without an inverse")
        return inv

    def _compute_element_orders(self):
        orders = np.empty(self.order, dtype=np.int16)
        for g in range(self.order):
            cur, k = g, 1
            while cur != 0:
                cur = int(self.table[cur, g])
                k += 1
            orders[g] = k
        return orders

    def _verify(self):
        n = self.order
        t = self.table
        if not (t[0] == np.arange(n)).all() or not (t[:, 0] == np.arange(n)).all():
            raise ValueError("element 0 is not the identity")
        if (t[np.arange(n), self.inverse] != 0).any():
            raise ValueError("inverse array inconsistent with table")
        if n <= 64:
            a = t[t, :]                      # (i,j,k) -> (ij)k
            b = t[:, t].transpose(0, 1, 2)   # (i,j,k) -> i(jk)
            if not (a == b).all():
                raise ValueError("table is not associative")
        else:
            rng = np.random.default_rng(n)
            m = _RNG_TRIPLES * n * n
            i = rng.integers(0, n, m)
            j = rng.integers(0, n, m)
            k = rng.integers(0, n, m)
            if not (t[t[i, j], k] == t[i, t[j, k]]).all():
                raise ValueError("table failed randomized associativity")

    def _greedy_generators(self):
        gens = []
        reach = np.array([0], dtype=np.int32)
        seen = np.zeros(self.order, dtype=bool)
        seen[0] = True
        for g in range(1, self.order):
            if not seen[g]:
                gens.append(g)
                reach = kernels.span(self.table, np.array(gens, dtype=np.int32))
                seen[:] = False
                seen[reach] = True
                if len(reach) == self.order:
                    break
        return np.asarray(gens, dtype=np.int32)

    # -- elementwise helpers -----------------------------------------------

    def mul(self, i, j):
        return int(self.table[i, j])

    def inv(self, i):
        return int(self.inverse[i])

    def power(self, g, e):
        e %= int(self.element_order[g])
        acc, base = 0, int(g)
        while e:
            if e & 1:
                acc = int(self.table[acc, base])
            base = int(self.table[base, base])
            e >>= 1
        return acc

    def comm(self, x, y):
        """(x, y) = x y x^-1 y^-1."""
        t = self.table
        return int(t[t[t[x, y], self.inverse[x]], self.inverse[y]])

    def conj(self, g, h):
        """g h g^-1."""
        return int(self.table[self.table[g, h], self.inverse[g]])

    def subgroup(self, indices):
        """Subgroup from an explicit member list (closure is verified)."""
        elems = np.unique(np.asarray(indices, dtype=np.int32))
        sub = Subgroup(self, mask_from_indices(elems, self.order))
        if not sub.is_closed():
            raise ValueError("indices are not closed under the group operation")
        return sub

    def generated_subgroup(self, gens):
        elems = kernels.span(self.table, np.asarray(gens, dtype=np.int32))
        return Subgroup(self, mask_from_indices(elems, self.order))

    def trivial_subgroup(self):
        return Subgroup(self, 1)

    def full_subgroup(self):
        return Subgroup(self, (1 << self.order) - 1)

    def __repr__(self):
        name = self.label or "group"
        return f"FiniteGroup({name}, order={self.order})"


class Subgroup:
    """A subgroup of ``parent``, stored as a bitmask over element indices."""

    __slots__ = ("parent", "mask", "_elems", "_gens")

    def __init__(self, parent, mask):
        self.parent = parent
        self.mask = mask
        self._elems = None
        self._gens = None

    def elements(self):
        if self._elems is None:
            self._elems = indices_from_mask(self.mask, self.parent.order)
        return self._elems

    @property
    def order(self):
        return int(self.mask.bit_count())

    def __len__(self):
        return self.order

    def __contains__(self, idx):
        return bool((self.mask >> int(idx)) & 1)

    def __eq__(self, other):
        return (
            isinstance(other, Subgroup)
            and other.parent is self.parent
            and other.mask == self.mask
        )

    def __hash__(self):
        return hash((id(self.parent), self.mask))

    def __repr__(self):
        return f"Subgroup(order={self.order} of {self.parent!r})"

    def is_closed(self):
        if 0 not in self:
            return False
        e = self.elements()
        prods = self.parent.table[np.ix_(e, e)]
        ok = indices_from_mask(self.mask, self.parent.order)
        member = np.zeros(self.parent.order, dtype=bool)
        member[ok] = True
        if not member[prods].all():
            return False
        return self.parent.order % self.order == 0

    def generators(self):
        """A small (greedy, deterministic) generating set."""
        if self._gens is None:
            table = self.parent.table
            gens = []
            seen = np.zeros(self.parent.order, dtype=bool)
            seen[0] = True
            for g in self.elements():
                if not seen[g]:
                    gens.append(int(g))
                    reach = kernels.span(table, np.array(gens, dtype=np.int32))
                    seen[:] = False
                    seen[reach] = True
            self._gens = np.asarray(gens if gens else [0], dtype=np.int32)
        return self._gens

    def is_normal(self):
        G = self.parent
        for g in G.generators:
            for h in self.generators():
                if G.conj(int(g), int(h)) not in self:
                    return False
        return True

    def is_abelian(self):
        e = self.elements()
        t = self.parent.table
        sub = t[np.ix_(e, e)]
        return bool((sub == sub.T).all())


# -- constructors -----------------------------------------------------------


def from_permutations(gens, degree=None, label=None, cap=ORDER_CAP):
    """Closure of a permutation list (0-based index arrays) as a Cayley table.

    Element 0 is the identity; ordering is breadth-first from the identity
    with generators applied in input order, so outputs are deterministic.
    """
    gens = [tuple(int(x) for x in p) for p in gens]
    if degree is None:
        degree = max((len(p) for p in gens), default=1)
    for p in gens:
        if len(p) != degree or sorted(p) != list(range(degree)):
            raise ValueError(f"not a permutation of 0..{degree - 1}: {p}")
    ident = tuple(range(degree))
    elems = [ident]
    index = {ident: 0}
    head = 0
    while head < len(elems):
        v = elems[head]
        head += 1
        for g in gens:
            w = tuple(v[g[x]] for x in range(degree))
            if w not in index:
                if len(elems) >= cap:
                    raise ClosureCapExceeded(
                        f"closure exceeded cap {cap} (degree {degree})"
                    )
                index[w] = len(elems)
                elems.append(w)
    n = len(elems)
    arr = np.array(elems, dtype=np.int32)
    table = np.empty((n, n), dtype=np.int16)
    for i in range(n):
        rows = arr[i][arr]  # (p_i . p_j)(x) = p_i[p_j[x]]
        for j in range(n):
            table[i, j] = index[tuple(rows[j])]
    gen_idx = [index[g] for g in gens]
    return FiniteGroup(table, label=label, generators=gen_idx or [0])


def from_canonical_table(table, gen_indices, label=None):
    """Reorder an arbitrary-order Cayley table into BFS-from-identity order.

    ``table`` may list elements in any order with any identity position
    implied by index 0; the result relabels elements breadth-first from the
    identity using ``gen_indices`` in the given order (the package-wide
    determinism convention).
    """
    table = np.asarray(table)
    n = table.shape[0]
    order = [0]
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    head = 0
    while head < len(order):
        v = order[head]
        head += 1
        for g in gen_indices:
            w = int(table[v, g])
            if not seen[w]:
                seen[w] = True
                order.append(w)
    if len(order) != n:
        raise ValueError("generators do not generate the whole table")
    perm = np.array(order, dtype=np.int64)
    inv_perm = np.empty(n, dtype=np.int64)
    inv_perm[perm] = np.arange(n)
    new_table = inv_perm[np.asarray(table, dtype=np.int64)[np.ix_(perm, perm)]]
    new_gens = [int(inv_perm[g]) for g in gen_indices]
    return FiniteGroup(new_table.astype(np.int16), label=label, generators=new_gens)


def trivial_group(label="C1"):
    return FiniteGroup(np.zeros((1, 1), dtype=np.int16), label=label, generators=[0])


def direct_product(a: FiniteGroup, b: FiniteGroup, label=None):
    """Direct product with BFS-canonical element order."""
    na, nb = a.order, b.order
    ta = a.table.astype(np.int64)
    tb = b.table.astype(np.int64)
    # index (i, j) -> i * nb + j in the raw table
    ia, ja = np.divmod(np.arange(na * nb), nb)
    raw = ta[np.ix_(ia, ia)] * nb + tb[np.ix_(ja, ja)]
    gens = [int(g) * nb for g in a.generators] + [int(g) for g in b.generators]
    if label is None:
        label = f"{a.label or 'A'}x{b.label or 'B'}"
    return from_canonical_table(raw, gens or [0], label=label)


# -- basic operations --------------------------------------------------------


def center(G: FiniteGroup) -> Subgroup:
    if "center" not in G._cache:
        centrals = np.nonzero((G.table == G.table.T).all(axis=1))[0]
        G._cache["center"] = Subgroup(G, mask_from_indices(centrals, G.order))
    return G._cache["center"]


def derived_subgroup(G: FiniteGroup) -> Subgroup:
    if "derived" not in G._cache:
        t = G.table
        n = G.order
        i = np.repeat(np.arange(n), n)
        j = np.tile(np.arange(n), n)
        comms = np.unique(t[t[t[i, j], G.inverse[i]], G.inverse[j]])
        elems = kernels.span(t, comms.astype(np.int32))
        G._cache["derived"] = Subgroup(G, mask_from_indices(elems, n))
    return G._cache["derived"]


def is_abelian(G: FiniteGroup) -> bool:
    return derived_subgroup(G).order == 1


def normalizer(G: FiniteGroup, H: Subgroup) -> Subgroup:
    t, inv = G.table, G.inverse
    member = np.zeros(G.order, dtype=bool)
    member[H.elements()] = True
    ok = np.ones(G.order, dtype=bool)
    allg = np.arange(G.order)
    for h in H.generators():
        conj = t[t[allg, h], inv[allg]]  # g h g^-1 for all g at once
        ok &= member[conj]
    return Subgroup(G, mask_from_indices(np.nonzero(ok)[0], G.order))


def centralizer(G: FiniteGroup, elems) -> Subgroup:
    t = G.table
    ok = np.ones(G.order, dtype=bool)
    for h in np.atleast_1d(np.asarray(elems, dtype=np.int32)):
        ok &= t[:, h] == t[h, :]
    return Subgroup(G, mask_from_indices(np.nonzero(ok)[0], G.order))


def core(G: FiniteGroup, H: Subgroup) -> Subgroup:
    """Intersection of all conjugates of H."""
    masks = {H.mask}
    frontier = [H.elements()]
    while frontier:
        e = frontier.pop()
        for g in G.generators:
            ce = kernels.conj_elems(G.table, G.inverse, e, int(g))
            m = mask_from_indices(ce, G.order)
            if m not in masks:
                masks.add(m)
                frontier.append(ce)
    inter = H.mask
    for m in masks:
        inter &= m
    return Subgroup(G, inter)


def subgroup_conjugates(G: FiniteGroup, H: Subgroup):
    """All distinct conjugates of H, as Subgroups (deterministic order)."""
    masks = {H.mask: H.elements()}
    frontier = [H.elements()]
    while frontier:
        e = frontier.pop()
        for g in G.generators:
            ce = kernels.conj_elems(G.table, G.inverse, e, int(g))
            m = mask_from_indices(ce, G.order)
            if m not in masks:
                masks[m] = ce
                frontier.append(ce)
    return [Subgroup(G, m) for m in sorted(masks)]


def _power_maps(G, primes):
    """g -> g^p lookup rows for each prime p dividing |G| (cached, stacked)."""
    if "power_maps" not in G._cache:
        rows = []
        allg = np.arange(G.order, dtype=np.int32)
        for p in primes:
            acc = allg.copy()
            for _ in range(p - 1):
                acc = G.table[acc, allg].astype(np.int32)
            rows.append(acc)
        G._cache["power_maps"] = np.ascontiguousarray(
            np.stack(rows) if rows else np.empty((0, G.order), dtype=np.int32)
        )
    return G._cache["power_maps"]


def _normalizer_bool(G, gens, member):
    t, inv = G.table, G.inverse
    ok = np.ones(G.order, dtype=bool)
    allg = np.arange(G.order)
    for h in gens:
        ok &= member[t[t[allg, h], inv[allg]]]
    return ok


def all_subgroups(G: FiniteGroup, cap=SUBGROUP_CAP):
    """Every subgroup exactly once, sorted by (order, bitmask).

    Uses normal cyclic extension (complete for solvable groups); a general
    closure pass is appended when the derived series does not reach 1.
    Generating sets are carried along the extension chain so normalizers
    stay cheap; dedup keys are the sorted element arrays.
    """
    key = "all_subgroups"
    if key in G._cache:
        return G._cache[key]
    if G.order > cap:
        raise SubgroupCapExceeded(f"order {G.order} exceeds subgroup cap {cap}")
    primes = _prime_divisors(G.order)
    pmaps = _power_maps(G, primes)
    trivial = np.array([0], dtype=np.int32)
    empty_gens = np.empty(0, dtype=np.int32)
    found = {trivial.tobytes(): trivial}
    gens_of = {trivial.tobytes(): empty_gens}
    queue = [(trivial, empty_gens)]
    while queue:
        elems, gens = queue.pop()
        for x in kernels.lattice_candidates(G.table, G.inverse, elems, gens, pmaps):
            t_elems = kernels.normal_extension(G.table, elems, int(x))
            tkey = t_elems.tobytes()
            if tkey not in found:
                found[tkey] = t_elems
                tg = np.append(gens, np.int32(x))
                gens_of[tkey] = tg
                queue.append((t_elems, tg))
    if not _is_solvable(G):
        _general_extension_pass(G, found)
        gens_of = {}
    subs = []
    for bkey, elems in found.items():
        s = Subgroup(G, mask_from_indices(elems, G.order))
        s._elems = elems
        g = gens_of.get(bkey)
        if g is not None and len(g):
            s._gens = g
        subs.append(s)
    subs.sort(key=lambda s: (s.order, s.mask))
    G._cache[key] = subs
    return subs


def _greedy_gens_of(G, elems):
    gens = []
    seen = np.zeros(G.order, dtype=bool)
    seen[0] = True
    for g in elems:
        if not seen[g]:
            gens.append(int(g))
            reach = kernels.span(G.table, np.array(gens, dtype=np.int32))
            seen[:] = False
            seen[reach] = True
    return np.asarray(gens if gens else [0], dtype=np.int32)


def _general_extension_pass(G, found):
    # Fallback completeness for non-solvable inputs: extend every known
    # subgroup by every cyclic subgroup representative via full closure.
    cyclics = {}
    for g in range(1, G.order):
        e = kernels.span(G.table, np.array([g], dtype=np.int32))
        cyclics.setdefault(e.tobytes(), (e, int(g)))
    member = np.zeros(G.order, dtype=bool)
    changed = True
    while changed:
        changed = False
        for bkey in list(found):
            elems = found[bkey]
            member[:] = False
            member[elems] = True
            gens = _greedy_gens_of(G, elems)
            for ce, g in cyclics.values():
                if not member[ce].all():
                    t_elems = kernels.span(G.table, np.append(gens, np.int32(g)))
                    tb = t_elems.tobytes()
                    if tb not in found:
                        found[tb] = t_elems
                        changed = True


def subgroup_classes(G: FiniteGroup, cap=SUBGROUP_CAP):
    """Conjugacy classes of subgroups: list of (representative, class size).

    The representative is the class member with least (order, mask); classes
    are sorted the same way.  Cached on the group.
    """
    key = "subgroup_classes"
    if key in G._cache:
        return G._cache[key]
    subs = all_subgroups(G, cap=cap)
    seen = set()
    classes = []
    for s in subs:
        if s.mask in seen:
            continue
        conj = subgroup_conjugates(G, s)
        for c in conj:
            seen.add(c.mask)
        rep = min(conj, key=lambda t: (t.order, t.mask))
        classes.append((rep, len(conj)))
    classes.sort(key=lambda rc: (rc[0].order, rc[0].mask))
    G._cache[key] = classes
    return classes


def quotient(G: FiniteGroup, N: Subgroup):
    """Quotient group and the projection map (element index -> coset index).

    Cosets are ordered by their minimal element index, so the identity coset
    is element 0 and the construction is deterministic.
    """
    if not N.is_normal():
        raise NotNormal("quotient by a non-normal subgroup")
    n_elems = N.elements()
    # coset representative of g = min(N g)
    rep = G.table[n_elems, :].min(axis=0)
    reps = np.unique(rep)
    rep_index = {int(r): i for i, r in enumerate(reps)}
    proj = np.array([rep_index[int(rep[g])] for g in range(G.order)], dtype=np.int32)
    q = len(reps)
    qtable = np.empty((q, q), dtype=np.int16)
    for i, r in enumerate(reps):
        qtable[i, :] = proj[G.table[r, reps]]
    label = f"{G.label}/N{N.order}" if G.label else None
    Q = FiniteGroup(qtable, label=label)
    # surjective homomorphism check (exhaustive for small, sampled above)
    t = G.table
    if G.order <= 64:
        i = np.repeat(np.arange(G.order), G.order)
        j = np.tile(np.arange(G.order), G.order)
    else:
        rng = np.random.default_rng(G.order)
        i = rng.integers(0, G.order, 10 * G.order)
        j = rng.integers(0, G.order, 10 * G.order)
    assert (proj[t[i, j]] == Q.table[proj[i], proj[j]]).all(), "projection not a hom"
    return Q, proj


# -- homomorphism search ------------------------------------------------------


def _hom_extends(P: FiniteGroup, gens, images, G: FiniteGroup, within=None):
    """Extend generator images to a map on ``<gens>``; None if inconsistent.

    BFS from the identity assigns an image to every reachable element; the
    candidate map is then verified on all products of reachable elements.
    ``within`` (optional sorted element array) restricts the verification to
    a precomputed span, saving the BFS bookkeeping of which elements exist.
    """
    n = P.order
    phi = np.full(n, -1, dtype=np.int32)
    phi[0] = 0
    reach = [0]
    head = 0
    while head < len(reach):
        v = reach[head]
        head += 1
        for g, img in zip(gens, images):
            w = int(P.table[v, g])
            fw = int(G.table[phi[v], img])
            if phi[w] < 0:
                phi[w] = fw
                reach.append(w)
            elif phi[w] != fw:
                return None
    e = np.array(sorted(reach), dtype=np.intp) if within is None else within
    sub = P.table[np.ix_(e, e)].astype(np.intp)
    pe = phi[e]
    if not (phi[sub] == G.table[np.ix_(pe, pe)].astype(np.int32)).all():
        return None
    return phi


def epimorphism_exists(P: FiniteGroup, G: FiniteGroup) -> bool:
    """True iff a surjective homomorphism P -> G exists.

    Generator-image backtracking over P's fixed generating set, pruned by
    element-order divisibility and by homomorphism consistency on the chain
    of subgroups <gens[:i+1]>; deterministic candidate order.
    """
    if G.order == 1:
        return True
    if P.order % G.order != 0:
        return False
    gens = [int(g) for g in P.generators]
    chain = [
        kernels.span(P.table, np.array(gens[: i + 1], dtype=np.int32)).astype(np.intp)
        for i in range(len(gens))
    ]
    exact = P.order == G.order  # an epi between equal orders is an isomorphism
    cands = []
    for g in gens:
        o = int(P.element_order[g])
        if exact:
            c = [h for h in range(G.order) if int(G.element_order[h]) == o]
        else:
            c = [h for h in range(G.order) if o % int(G.element_order[h]) == 0]
        cands.append(c)
    images = []

    def rec(i):
        if i == len(gens):
            span = kernels.span(G.table, np.unique(np.array(images, dtype=np.int32)))
            return len(span) == G.order
        for h in cands[i]:
            images.append(h)
            if _hom_extends(P, gens[: i + 1], images, G, within=chain[i]) is not None:
                if rec(i + 1):
                    return True
            images.pop()
        return False

    return rec(0)


def is_isomorphic(A: FiniteGroup, B: FiniteGroup) -> bool:
    if A.order != B.order:
        return False
    if sorted(A.element_order.tolist()) != sorted(B.element_order.tolist()):
        return False
    return epimorphism_exists(A, B)


# -- conjugacy and rational classes ------------------------------------------


def conjugacy_classes(G: FiniteGroup):
    """Element conjugacy classes, each a sorted array; identity class first."""
    key = "conj_classes"
    if key in G._cache:
        return G._cache[key]
    t, inv = G.table, G.inverse
    n = G.order
    assigned = np.full(n, -1, dtype=np.int32)
    classes = []
    allg = np.arange(n)
    for g in range(n):
        if assigned[g] >= 0:
            continue
        orbit = np.unique(t[t[allg, g], inv[allg]])
        assigned[orbit] = len(classes)
        classes.append(orbit.astype(np.int32))
    G._cache[key] = (classes, assigned)
    return G._cache[key]


def rational_class_count(G: FiniteGroup) -> int:
    """Classes under g ~ h iff h is conjugate to g^m with gcd(m, ord g) = 1.

    Equals the number of simple components of QG; used as an independent
    cross-check on the idempotent enumeration.
    """
    classes, assigned = conjugacy_classes(G)
    parent = list(range(len(classes)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    import math

    for ci, cls in enumerate(classes):
        g = int(cls[0])
        o = int(G.element_order[g])
        for m in range(1, o):
            if math.gcd(m, o) == 1:
                union(ci, int(assigned[G.power(g, m)]))
    return len({find(i) for i in range(len(classes))})


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_solvable(G: FiniteGroup) -> bool:
    cur = G.full_subgroup()
    while cur.order > 1:
        e = cur.elements()
        t = G.table
        sub = t[np.ix_(e, e)]
        i = np.repeat(np.arange(len(e)), len(e))
        j = np.tile(np.arange(len(e)), len(e))
        comms = np.unique(
            t[t[sub[i, j], G.inverse[e[i]]], G.inverse[e[j]]]
        )
        nxt = kernels.span(t, comms.astype(np.int32))
        nxt_mask = mask_from_indices(nxt, G.order)
        if nxt_mask == cur.mask:
            return False
        cur = Subgroup(G, nxt_mask)
    return True
