"""Exact arithmetic in the rational group algebra QG.

Elements are stored as a common denominator plus integer numerators over a
sparse, sorted support.  Products run through an integer convolution kernel
(int64 fast path, arbitrary-precision fallback when the bound check says
int64 could overflow), so every operation is exact; floating point never
appears here.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

from . import _kernels as kernels
from .errors import (
    GroupMismatch,
    NotCyclicQuotient,
    NotIdempotent,
    NotShodaPair,
)
from .groups import FiniteGroup, Subgroup

_I64_GUARD = 1 << 62


class AlgebraElement:
    """A sparse exact-rational vector over the elements of a finite group."""

    __slots__ = ("group", "den", "idx", "num", "_key")

    def __init__(self, group, den, idx, num, normalize=True):
        self.group = group
        self.den = int(den)
        self.idx = np.asarray(idx, dtype=np.int32)
        self.num = np.asarray(num, dtype=object if _needs_object(num) else np.int64)
        self._key = None
        if normalize:
            self._normalize()

    # -- construction --------------------------------------------------------

    @classmethod
    def zero(cls, group):
        return cls(group, 1, [], [], normalize=False)

    @classmethod
    def one(cls, group):
        return cls(group, 1, [0], [1], normalize=False)

    @classmethod
    def basis(cls, group, g):
        return cls(group, 1, [int(g)], [1], normalize=False)

    @classmethod
    def from_coeffs(cls, group, coeffs: dict):
        """From a map element-index -> Fraction (or int)."""
        items = sorted((int(i), Fraction(c)) for i, c in coeffs.items())
        items = [(i, c) for i, c in items if c != 0]
        den = 1
        for _, c in items:
            den = den * c.denominator // gcd(den, c.denominator)
        idx = [i for i, _ in items]
        num = [int(c * den) for _, c in items]
        return cls(group, den, idx, num)

    def _normalize(self):
        if len(self.idx):
            nz = np.array([bool(v) for v in self.num]) if self.num.dtype == object \
                else self.num != 0
            if not nz.all():
                self.idx = self.idx[nz]
                self.num = self.num[nz]
        if not len(self.idx):
            self.den = 1
            self.num = np.asarray([], dtype=np.int64)
            return
        g = self.den
        for v in self.num:
            g = gcd(g, int(v))
            if g == 1:
                break
        if g > 1:
            self.den //= g
            if self.num.dtype == object:
                self.num = np.array([int(v) // g for v in self.num], dtype=object)
            else:
                self.num //= g
        if self.num.dtype == object and all(
            abs(int(v)) < _I64_GUARD for v in self.num
        ):
            self.num = self.num.astype(np.int64)

    # -- views ----------------------------------------------------------------

    def coeff(self, i) -> Fraction:
        pos = np.searchsorted(self.idx, int(i))
        if pos < len(self.idx) and self.idx[pos] == i:
            return Fraction(int(self.num[pos]), self.den)
        return Fraction(0)

    def coeffs(self) -> dict:
        return {int(i): Fraction(int(v), self.den)
                for i, v in zip(self.idx, self.num)}

    def support(self):
        return self.idx

    def is_zero(self):
        return len(self.idx) == 0

    def key(self):
        if self._key is None:
            if self.num.dtype == object:
                body = tuple(int(v) for v in self.num)
            else:
                body = self.num.tobytes()
            self._key = (self.den, self.idx.tobytes(), body)
        return self._key

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and other.group is self.group
            and self.key() == other.key()
        )

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        parts = [f"{Fraction(int(v), self.den)}*g{int(i)}"
                 for i, v in zip(self.idx[:6], self.num[:6])]
        more = "..." if len(self.idx) > 6 else ""
        return f"AlgebraElement({' + '.join(parts)}{more})"

    # -- linear structure ------------------------------------------------------

    def _check(self, other):
        if other.group is not self.group:
            raise GroupMismatch("elements over different groups")

    def __add__(self, other):
        self._check(other)
        den = self.den * other.den // gcd(self.den, other.den)
        sa, sb = den // self.den, den // other.den
        idx = np.concatenate([self.idx, other.idx])
        obj = self.num.dtype == object or other.num.dtype == object
        if obj:
            num = np.array(
                [int(v) * sa for v in self.num] + [int(v) * sb for v in other.num],
                dtype=object,
            )
        else:
            num = np.concatenate([self.num * sa, other.num * sb])
        uidx, inv = np.unique(idx, return_inverse=True)
        if obj:
            acc = [0] * len(uidx)
            for p, v in zip(inv, num):
                acc[p] += int(v)
            merged = np.array(acc, dtype=object)
        else:
            merged = np.zeros(len(uidx), dtype=np.int64)
            np.add.at(merged, inv, num)
        return AlgebraElement(self.group, den, uidx, merged)

    def __neg__(self):
        num = (np.array([-int(v) for v in self.num], dtype=object)
               if self.num.dtype == object else -self.num)
        return AlgebraElement(self.group, self.den, self.idx.copy(), num,
                              normalize=False)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return AlgebraElement.zero(self.group)
        den = self.den * c.denominator
        if self.num.dtype == object:
            num = np.array([int(v) * c.numerator for v in self.num], dtype=object)
        else:
            num = self.num.astype(object) * c.numerator
        return AlgebraElement(self.group, den, self.idx.copy(), num)

    # -- ring structure ----------------------------------------------------------

    def __mul__(self, other):
        self._check(other)
        if self.is_zero() or other.is_zero():
            return AlgebraElement.zero(self.group)
        G = self.group
        obj = self.num.dtype == object or other.num.dtype == object
        if not obj:
            abs_a = np.abs(self.num)
            abs_b = np.abs(other.num)
            bound = min(
                int(abs_a.sum()) * int(abs_b.max()),
                int(abs_b.sum()) * int(abs_a.max()),
            )
            if bound < _I64_GUARD:
                dense = kernels.convolve(
                    G.table, self.idx, self.num, other.idx, other.num, G.order
                )
                nz = np.nonzero(dense)[0].astype(np.int32)
                return AlgebraElement(
                    G, self.den * other.den, nz, dense[nz]
                )
        out = {}
        for i, a in zip(self.idx, self.num):
            row = G.table[int(i)]
            for j, b in zip(other.idx, other.num):
                t = int(row[int(j)])
                out[t] = out.get(t, 0) + int(a) * int(b)
        items = sorted((t, v) for t, v in out.items() if v)
        return AlgebraElement(
            G,
            self.den * other.den,
            np.array([t for t, _ in items], dtype=np.int32),
            np.array([v for _, v in items], dtype=object),
        )

    def conjugate(self, g):
        """g^-1 * self * g, an algebra automorphism."""
        G = self.group
        gi = G.inv(g)
        new_idx = G.table[G.table[gi, self.idx], g].astype(np.int32)
        order = np.argsort(new_idx)
        num = self.num[order]
        return AlgebraElement(G, self.den, new_idx[order], num, normalize=False)

    def is_idempotent(self):
        return self * self == self

    def is_central(self):
        return all(
            self.conjugate(int(g)) == self for g in self.group.generators
        )


def _needs_object(num):
    arr = np.asarray(num)
    if arr.dtype == object:
        return True
    return False


# -- the idempotents of Section 4 ---------------------------------------------


def hat(H: Subgroup) -> AlgebraElement:
    """Uniform average over a subgroup: (1/|H|) sum of its elements."""
    return AlgebraElement(
        H.parent, H.order, H.elements(), np.ones(H.order, dtype=np.int64),
        normalize=False,
    )


def _coset_order(G, x, h_member, cap):
    cur = int(x)
    for j in range(1, cap + 1):
        if h_member[cur]:
            return j
        cur = G.mul(cur, x)
    return 0


def cyclic_quotient_generator(G: FiniteGroup, K: Subgroup, H: Subgroup):
    """Minimal-index element of K whose coset generates K/H, or None.

    Requires H normal in K (not re-checked here).
    """
    k = K.order // H.order
    if k == 1:
        return 0
    h_member = np.zeros(G.order, dtype=bool)
    h_member[H.elements()] = True
    for x in K.elements():
        if h_member[x]:
            continue
        if _coset_order(G, int(x), h_member, k) == k:
            return int(x)
    return None


def epsilon(K: Subgroup, H: Subgroup) -> AlgebraElement:
    """epsilon(K, H): hat(K) when K = H, else prod over minimal overgroups
    L of H in K of (hat(H) - hat(L)); requires K/H cyclic."""
    G = K.parent
    if K.mask == H.mask:
        return hat(K)
    if K.mask & H.mask != H.mask:
        raise NotCyclicQuotient("H is not contained in K")
    x = cyclic_quotient_generator(G, K, H)
    if x is None:
        raise NotCyclicQuotient("K/H is not cyclic")
    k = K.order // H.order
    return _epsilon_from_generator(G, H, x, k)


def _epsilon_from_generator(G, H, x, k):
    """epsilon(<H, x>, H) given a generator x of the cyclic quotient.

    Minimal overgroups of H correspond to the prime layers of the cyclic
    quotient: L_p = <H, x^(k/p)>.
    """
    from .groups import _prime_divisors

    out = None
    hH = hat(H)
    for p in _prime_divisors(k):
        xp = G.power(x, k // p)
        l_elems = kernels.normal_extension(G.table, H.elements(), xp)
        lhat = AlgebraElement(
            G, len(l_elems), l_elems, np.ones(len(l_elems), dtype=np.int64),
            normalize=False,
        )
        factor = hH - lhat
        out = factor if out is None else out * factor
    return out


def conjugate_orbit(e: AlgebraElement):
    """All distinct conjugates of e under the parent group."""
    seen = {e.key(): e}
    frontier = [e]
    gens = [int(g) for g in e.group.generators]
    while frontier:
        cur = frontier.pop()
        for g in gens:
            nxt = cur.conjugate(g)
            if nxt.key() not in seen:
                seen[nxt.key()] = nxt
                frontier.append(nxt)
    return [seen[k] for k in sorted(seen)]


def idempotent_e(G: FiniteGroup, K: Subgroup, H: Subgroup) -> AlgebraElement:
    """e(G, K, H): the sum of the distinct G-conjugates of epsilon(K, H).

    Verified central and idempotent; for a strong Shoda pair this is a
    primitive central idempotent of QG.
    """
    from .shoda import is_strong_shoda_pair

    if not is_strong_shoda_pair(G, K, H):
        raise NotShodaPair("(K, H) is not a strong Shoda pair")
    return _idempotent_from_epsilon(G, epsilon(K, H))


def _idempotent_from_epsilon(G, eps):
    e = AlgebraElement.zero(G)
    for c in conjugate_orbit(eps):
        e = e + c
    if not e.is_central():
        raise NotIdempotent("conjugate sum is not central")
    if not e.is_idempotent():
        raise NotIdempotent("conjugate sum is not idempotent")
    return e
