"""Built-in group corpora for the batch command and the equivalence sweep."""

from __future__ import annotations


def _fam(family, **params):
    return {"family": family, "params": params}


def _base_families():
    """Catalog instances at small parameters (n <= 2, m <= 1, k <= 1)."""
    rows = []
    for n in (1, 2, 3, 4, 6, 8, 12):
        rows.append((f"C{n}", _fam("Cn", n=n)))
    rows.append(("C2^2", _fam("Cn^k", n=2, k=2)))
    rows.append(("C4^2", _fam("Cn^k", n=4, k=2)))
    for n in (2, 3, 4, 6, 8, 12):
        rows.append((f"D{2 * n}", _fam("D2n", n=n)))
    for n in (2, 3, 4, 6):
        rows.append((f"Q{4 * n}", _fam("Q4n", n=n)))
    rows += [
        ("D16+", _fam("D16plus")),
        ("D16-", _fam("D16minus")),
        ("Dcal", _fam("Dcal")),
        ("Dcal+", _fam("DcalPlus")),
        ("W", _fam("W")),
        ("V", _fam("V")),
        ("U1", _fam("U1")),
        ("U2", _fam("U2")),
        ("T", _fam("T")),
    ]
    for n in (1, 2):
        rows += [
            (f"W1{n}", _fam("W1n", n=n)),
            (f"W2{n}", _fam("W2n", n=n)),
            (f"V1{n}", _fam("V1n", n=n)),
            (f"V2{n}", _fam("V2n", n=n)),
            (f"T1{n}", _fam("T1n", n=n)),
            (f"T2{n}", _fam("T2n", n=n)),
            (f"T3{n}", _fam("T3n", n=n)),
        ]
    for k in (0, 1):
        rows.append((f"G({k},1)C8", _fam("Gkm", k=k, m=1, branch="C8")))
    rows.append(("G(0,1)W11", _fam("Gkm", k=0, m=1, branch="W1n", n=1)))
    rows.append(("G(0,1)W12", _fam("Gkm", k=0, m=1, branch="W1n", n=2)))
    rows.append(("G(0,1)W21", _fam("Gkm", k=0, m=1, branch="W21")))
    return rows


_FAMILY_ORDERS = None


def _order_of(spec):
    from .catalog import catalog_group

    return catalog_group(spec["family"], **spec.get("params", {})).order


def _with_products(rows, max_order, factors=(2, 3, 4)):
    out = []
    seen = set()
    for label, spec in rows:
        base_order = _order_of(spec)
        if base_order <= max_order and label not in seen:
            seen.add(label)
            out.append((label, spec))
        for c in factors:
            lab = f"{label} x C{c}"
            if base_order * c <= max_order and lab not in seen:
                seen.add(lab)
                out.append((lab, {"product": [spec, _fam("Cn", n=c)],
                                  "label": lab}))
    out.sort(key=lambda r: (_spec_order(r[1]), r[0]))
    return out


def _spec_order(spec):
    if "product" in spec:
        a, b = spec["product"]
        return _order_of(a) * _order_of(b)
    return _order_of(spec)


def corpus_full(max_order=96):
    """Every catalog family at small parameters and their products with
    C2/C3/C4, capped by order: the equivalence-sweep corpus."""
    return _with_products(_base_families(), max_order)


def corpus_theorem_f(max_order=64):
    """Groups certified by the covering catalog: families times abelian
    factors whose exponent divides the branch exponent (2-groups of the
    exponent-6 branches also admit C3 factors, and so on)."""
    e6 = ["W", "W11", "W12", "W21", "W22"]
    e4 = ["V", "V11", "V12", "V21", "V22", "U1", "U2"]
    e2 = ["T", "T11", "T12", "T21", "T22", "T31", "T32"]
    rows = _base_families()
    by_label = dict(rows)
    out = []
    for label, spec in rows:
        fam = spec["family"]
        if fam in ("Cn", "Cn^k"):
            out.append((label, spec, (2, 3, 4)))
        elif label in e6 or fam == "Gkm" and "W1" in label:
            out.append((label, spec, (2, 3)))
        elif label in e4 or label.endswith("C8") and fam == "Gkm":
            out.append((label, spec, (2, 4)))
        elif label in e2 or fam == "Gkm":
            out.append((label, spec, (2,)))
        elif fam in ("D2n", "Q4n") and _order_of(spec) in (4, 8, 12, 24):
            # D4, D8, D12, D24? D24 is not Kleinian; keep the certified ones
            if label in ("D4", "D8", "D12", "Q8", "Q12"):
                out.append((label, spec, (2,)))
        elif label in ("D16+", "D16-", "Dcal", "Dcal+"):
            out.append((label, spec, (2,)))
    expanded = []
    for label, spec, factors in out:
        expanded.append((label, spec))
        for c in factors:
            expanded.append((f"{label} x C{c}",
                             {"product": [spec, _fam("Cn", n=c)],
                              "label": f"{label} x C{c}"}))
    expanded = [(l, s) for l, s in expanded if _spec_order(s) <= max_order]
    dedup = []
    seen = set()
    for l, s in expanded:
        if l not in seen:
            seen.add(l)
            dedup.append((l, s))
    dedup.sort(key=lambda r: (_spec_order(r[1]), r[0]))
    return dedup


def corpus_forbidden():
    """The named non-Kleinian witnesses from the source analysis."""
    return [
        ("D16", _fam("D2n", n=8)),
        ("Q16", _fam("Q4n", n=4)),
        ("D24", _fam("D2n", n=12)),
        ("C3 x Q16", {"product": [_fam("Q4n", n=4), _fam("Cn", n=3)],
                      "label": "C3 x Q16"}),
        ("C3 x D16-", {"product": [_fam("D16minus"), _fam("Cn", n=3)],
                       "label": "C3 x D16-"}),
    ]


def corpus_abelian(max_order=32):
    rows = []
    for n in range(1, max_order + 1):
        rows.append((f"C{n}", _fam("Cn", n=n)))
    for n, k in ((2, 2), (2, 3), (3, 2), (4, 2), (2, 4)):
        if n ** k <= max_order:
            rows.append((f"C{n}^{k}", _fam("Cn^k", n=n, k=k)))
    return rows


CORPORA = {
    "theorem-f": corpus_theorem_f,
    "forbidden": lambda max_order=None: corpus_forbidden(),
    "abelian": corpus_abelian,
    "full": corpus_full,
}


def build_from_row_spec(spec):
    """Materialize a corpus row spec (catalog entry or binary product)."""
    from .catalog import group_from_spec
    from .groups import direct_product

    if "product" in spec:
        a = build_from_row_spec(spec["product"][0])
        b = build_from_row_spec(spec["product"][1])
        return direct_product(a, b, label=spec.get("label"))
    return group_from_spec(spec)
