"""Randomized invariant checks behind the ``selftest`` CLI command."""

from __future__ import annotations

from fractions import Fraction
from math import inf

import numpy as np

from .algebra import AlgebraElement, hat
from .catalog import catalog_group
from .groups import all_subgroups
from .numfield import _odd_primes_of, hilbert_symbol_rational


def run(seed=0, out=None):
    rng = np.random.default_rng(seed)
    failures = []

    def report(name, ok):
        if out is not None:
            out.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
        if not ok:
            failures.append(name)

    # hat idempotency over a few catalog groups
    ok = True
    for fam, kw in (("D2n", {"n": 4}), ("Q4n", {"n": 2}), ("W2n", {"n": 1})):
        G = catalog_group(fam, **kw)
        for H in all_subgroups(G):
            h = hat(H)
            if h * h != h:
                ok = False
    report("hat(H)^2 = hat(H) on all subgroups of D8, Q8, W21", ok)

    # associativity / distributivity of the algebra product
    G = catalog_group("W2n", n=1)
    ok = True
    for _ in range(200):
        a, b, c = (_random_element(G, rng) for _ in range(3))
        if (a * b) * c != a * (b * c):
            ok = False
        if a * (b + c) != a * b + a * c:
            ok = False
    report("algebra product associative and distributive (200 triples)", ok)

    # Hilbert reciprocity over Q
    ok = True
    for _ in range(200):
        a = int(rng.integers(-50, 51))
        b = int(rng.integers(-50, 51))
        if a == 0 or b == 0:
            continue
        places = {inf, 2, *_odd_primes_of(a), *_odd_primes_of(b)}
        prod = 1
        for p in places:
            prod *= hilbert_symbol_rational(a, b, p)
        if prod != 1:
            ok = False
    report("Hilbert reciprocity over Q (200 random pairs)", ok)

    # symmetry and bimultiplicativity of the local symbol
    ok = True
    for _ in range(200):
        a1, a2, b = (int(x) for x in rng.integers(-30, 31, 3))
        if 0 in (a1, a2, b):
            continue
        for p in (inf, 2, 3, 5, 7):
            if hilbert_symbol_rational(a1, b, p) != \
                    hilbert_symbol_rational(b, a1, p):
                ok = False
            lhs = hilbert_symbol_rational(a1 * a2, b, p)
            rhs = (hilbert_symbol_rational(a1, b, p)
                   * hilbert_symbol_rational(a2, b, p))
            if lhs != rhs:
                ok = False
    report("local symbol symmetric and bimultiplicative", ok)
    return failures


def _random_element(G, rng, support=4, denom=6):
    idx = rng.choice(G.order, size=min(support, G.order), replace=False)
    coeffs = {}
    for i in idx:
        coeffs[int(i)] = Fraction(int(rng.integers(-5, 6)),
                                  int(rng.integers(1, denom)))
    return AlgebraElement.from_coeffs(G, coeffs)
