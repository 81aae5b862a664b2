"""Command-line front end.

Commands: decompose | kleinian | batch | catalog | selftest.  Exit codes:
0 = ran (any verdict), 2 = mathematical incompleteness, 3 = resource caps
or search budget, 1 = batch partial failure, 4 = bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .catalog import FAMILIES, catalog_group, group_from_spec
from .corpus import CORPORA, build_from_row_spec
from .errors import (
    ClosureCapExceeded,
    IncompleteDecomposition,
    InvalidParams,
    SearchBudgetExceeded,
    SubgroupCapExceeded,
)
from .groups import rational_class_count
from .kleinian import (
    FResult,
    components_of,
    decide_E,
    decide_F,
    render_component,
    unit_group_report,
)
from .numfield import render_field


def _default_max_order():
    return int(os.environ.get("KLEINIA_MAX_ORDER", "1024"))


def _group_from_args(args):
    if args.input:
        with open(args.input, "r", encoding="utf-8") as fh:
            return group_from_spec(json.load(fh))
    if not args.family:
        raise InvalidParams("need --family or --input")
    params = {}
    for key in ("n", "k", "m"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.branch:
        params["branch"] = args.branch
    return catalog_group(args.family, **params)


def _component_json(c):
    return {
        "dim": c.dim,
        "degree": c.degree,
        "center": {
            "tag": c.center.tag,
            "conductor": c.center.canonical_key()[0],
            "degree": c.center.degree,
        },
        "class": c.kleinian_class,
        "split": c.split,
        "totally_definite": c.totally_definite,
        "vcd": c.vcd,
        "unit_class": list(c.unit_class),
        "kernel_order": c.kernel_order,
        "render": render_component(c),
    }


def _decompose_report(G, cap):
    comps = components_of(G, cap=cap)
    return {
        "group": G.label or "group",
        "order": G.order,
        "rational_classes": rational_class_count(G),
        "components": [_component_json(c) for c in comps],
    }


def _kleinian_report(G, cap, budget, run_f=True):
    rep = unit_group_report(G, cap=cap, budget=budget, run_f=run_f)
    if isinstance(rep.condition_F, FResult):
        f_json = {"verdict": rep.condition_F.verdict,
                  "witness": rep.condition_F.witness}
    elif rep.condition_F is None:
        f_json = {"verdict": None, "witness": None}
    else:
        f_json = {"verdict": None, "witness": None,
                  "note": rep.condition_F.get("detail", "budget exceeded")}
    return {
        "group": rep.group_label,
        "order": rep.order,
        "components": [_component_json(c) for c in rep.components],
        "condition_E": {"verdict": rep.condition_E.verdict,
                        "reasons": rep.condition_E.reasons},
        "condition_F": f_json,
        "unit_group": rep.unit_group,
    }


def _emit(report, fmt, out=sys.stdout):
    if fmt == "json":
        json.dump(report, out, sort_keys=True, separators=(",", ":"),
                  default=_json_default)
        out.write("\n")
    else:
        _emit_text(report, out)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is math.inf:
        return "inf"
    return str(obj)


def _emit_text(report, out):
    out.write(f"{report['group']}  (order {report['order']})\n")
    if "components" in report:
        counts = {}
        for c in report["components"]:
            counts[c["render"]] = counts.get(c["render"], 0) + 1
        rendering = " + ".join(
            (f"{n}*{r}" if n > 1 else r)
            for r, n in sorted(counts.items(),
                               key=lambda kv: (_render_sort(kv[0])))
        )
        out.write(f"  QG = {rendering}\n")
    if "condition_E" in report:
        out.write(f"  condition (E): {report['condition_E']['verdict']}\n")
        for reason in report["condition_E"]["reasons"]:
            if not reason["allowed"]:
                out.write(f"    offending: {reason['render']}"
                          f" ({reason['reason']})\n")
        f = report["condition_F"]
        if f["verdict"] is None:
            out.write(f"  condition (F): undecided"
                      f" ({f.get('note', 'skipped')})\n")
        else:
            wit = f["witness"] or {}
            via = wit.get("branch", "")
            out.write(f"  condition (F): {f['verdict']}"
                      + (f"  (via {via})" if via else "") + "\n")
        u = report["unit_group"]
        out.write(f"  ZG* virtually a product of free-by-free groups: "
                  f"{u['verdict']}\n")
        fac = u["factors"]
        out.write(
            f"    factors: finite x{fac['finite']}, "
            f"virtually-free x{fac['virtually_free']}, "
            f"SL2(O_d) {fac['free_by_free']}, other x{fac['other']}; "
            f"free abelian rank {u['free_abelian_rank']}\n"
        )


def _render_sort(render):
    return (len(render.split("(")[0]), render)


def cmd_decompose(args):
    G = _group_from_args(args)
    report = _decompose_report(G, cap=args.max_order)
    _emit(report, args.format)
    return 0


def cmd_kleinian(args):
    G = _group_from_args(args)
    report = _kleinian_report(G, cap=args.max_order, budget=args.budget)
    _emit(report, args.format)
    return 0


def _batch_row(payload):
    label, spec, cap, budget = payload
    try:
        G = build_from_row_spec(spec)
        rep = _kleinian_report(G, cap=cap, budget=budget)
        e = rep["condition_E"]["verdict"]
        f = rep["condition_F"]["verdict"]
        return {
            "label": label,
            "order": rep["order"],
            "E": e,
            "F": f,
            "agree": (e == f) if f is not None else None,
            "components": sorted(
                c["render"] for c in rep["components"]
                if c["degree"] > 1
            ),
            "error": None,
        }
    except SearchBudgetExceeded as exc:
        return {"label": label, "order": None, "E": None, "F": None,
                "agree": None, "components": [],
                "error": f"budget: {exc}"}
    except Exception as exc:  # noqa: BLE001 - per-row isolation
        return {"label": label, "order": None, "E": None, "F": None,
                "agree": None, "components": [], "error": str(exc)}


def cmd_batch(args):
    rows = CORPORA[args.corpus](max_order=args.max_order) \
        if args.corpus != "forbidden" else CORPORA[args.corpus]()
    payloads = [(label, spec, args.max_order, args.budget)
                for label, spec in rows]
    t0 = time.time()
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_batch_row, payloads))
    else:
        results = [_batch_row(p) for p in payloads]
    elapsed = time.time() - t0
    report = {"corpus": args.corpus, "rows": results}
    if args.format == "json":
        json.dump(report, sys.stdout, sort_keys=True,
                  separators=(",", ":"), default=_json_default)
        sys.stdout.write("\n")
    else:
        agree = sum(1 for r in results if r["agree"])
        disagree = [r for r in results if r["agree"] is False]
        errors = [r for r in results if r["error"]]
        sys.stdout.write(
            f"corpus {args.corpus}: {len(results)} rows, "
            f"{agree} E=F agreements, {len(disagree)} disagreements, "
            f"{len(errors)} errors\n"
        )
        for r in results:
            mark = "!!" if r["agree"] is False else "  "
            err = f"  [{r['error']}]" if r["error"] else ""
            sys.stdout.write(
                f"{mark} {r['label']:<14} order {r['order']!s:>5} "
                f"E={r['E']!s:<5} F={r['F']!s:<5}{err}\n"
            )
        sys.stderr.write(f"batch wall time: {elapsed:.1f}s\n")
    if any(r["error"] for r in results):
        return 1
    return 0


def cmd_catalog(args):
    for fam in FAMILIES:
        sys.stdout.write(f"{fam}\n")
    return 0


def cmd_selftest(args):
    import numpy as np

    from . import selftest

    failures = selftest.run(seed=args.seed, out=sys.stdout)
    return 1 if failures else 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kleinia",
        description=("Wedderburn decomposition of rational group algebras "
                     "and the Kleinian-type decision for finite metabelian "
                     "groups"),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_group_flags(p):
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--n", type=int)
        p.add_argument("--k", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--branch", choices=("C8", "W1n", "W21"))
        p.add_argument("--input", help="path to a GroupSpec JSON file")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--max-order", type=int, default=_default_max_order())
        p.add_argument("--budget", type=int, default=2_000_000)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("decompose", help="Wedderburn decomposition of QG")
    add_group_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("kleinian", help="Kleinian-type verdicts and ZG* summary")
    add_group_flags(p)
    p.set_defaults(func=cmd_kleinian)

    p = sub.add_parser("batch", help="run a built-in corpus")
    p.add_argument("--corpus", choices=sorted(CORPORA), default="full")
    p.add_argument("--max-order", type=int, default=96)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("catalog", help="list the built-in family names")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("selftest", help="randomized invariant checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IncompleteDecomposition as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (SubgroupCapExceeded, ClosureCapExceeded,
            SearchBudgetExceeded) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except InvalidParams as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 4


if __name__ == "__main__":
    sys.exit(main())
