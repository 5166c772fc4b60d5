"""Command line entry point: ``kktz <group> <command> [options]``.

Exit status: 0 success, 2 a check failed, 1 usage or input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np
import scipy

from . import __version__
from .errors import CancellationGap, KKTError
from .geometry import MAPS

SCHEMA_VERSION = "1"
SERIES_BOUND = int(os.environ.get("KKTZ_SERIES_BOUND", "2"))


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    def __init__(self, report):
        super().__init__("check failed")
        self.report = report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


# -- handlers -------------------------------------------------------------------

def _diagrams(a):
    from . import diagrams as D
    if a.cmd == "gen":
        gs = D.generate_diagrams(a.degree, connected=not a.all)
        return {"count": len(gs), "diagrams": [g.to_json() for g in gs]}
    if a.cmd == "aut":
        if a.file:
            g = D.parse_diagram(_load_json(a.file))
        else:
            g = {"theta": D.theta, "k4": D.k4, "doubled_square": D.doubled_square}[a.name]()
        return {"aut": D.count_automorphisms(g), "degree": g.degree}
    enumerated = len(D.enumerate_labelled(a.degree))
    formula = D.labelled_count_formula(a.degree)
    rep = {"enumerated": enumerated, "formula": formula, "agree": enumerated == formula}
    if not rep["agree"]:
        raise CheckFailed(rep)
    return rep


def _algebra(a):
    from . import algebra as A
    if a.cmd == "dim":
        b = A.reduction_basis(a.degree)
        return {"dim": b.dimension, "generators": len(b.columns), "rank": b.rank}
    x = A.element_from_json(_load_json(a.file))
    if a.bound is not None:
        x = A.AlgebraElement(x.terms, a.bound)
    if a.cmd == "reduce":
        return {"element": x.to_json()}
    return {"element": A.exp_truncated(x).to_json()}


def _faces(a):
    from . import faces as F
    if a.cmd == "enumerate":
        fs = F.enumerate_faces(range(1, a.size + 1), a.ambient)
        return {"count": len(fs), "expected": F.face_count_formula(a.size, a.ambient),
                "faces": [f.name for f in fs]}
    try:
        return F.boundary_cancellation_check(a.degree)
    except CancellationGap as exc:
        raise CheckFailed({"degree": a.degree, "error": str(exc)}) from exc


def _charts(a):
    from .charts import roundtrip_residuals
    rng = np.random.default_rng(a.seed)
    worst, cond = roundtrip_residuals(rng, a.instances, a.variant)
    rep = {"max_residual": worst, "max_condition_residual": cond,
           "tolerance": 1e-9, "pass": worst < 1e-9 and cond < 1e-10}
    if not rep["pass"]:
        raise CheckFailed(rep)
    return rep


def _geom(a):
    from . import geometry as G
    if a.cmd == "degree":
        f, target = G.MAPS[a.map]
        return G.map_degree(f, a.samples, a.seed, target)
    if a.cmd == "linking":
        if a.link == "hopf":
            K1, K2 = G.hopf_pair()
        elif a.link == "split":
            K1, K2 = G.split_pair()
        else:
            d = _load_json(a.link)
            K1, K2 = G.curve_from_json(d["K1"]), G.curve_from_json(d["K2"])
        return G.gauss_linking(K1, K2, nodes=a.nodes)
    rng = np.random.default_rng(a.seed)
    if a.cmd == "g3check":
        qs = G.random_unit_quaternions(rng, a.samples)
        best, res = G.resolve_g3_conjugator(qs)
        rep = {"conjugator": best, "residuals": res, "pass": res[best] < 1e-12}
    elif a.cmd == "cmrcheck":
        qs = G.random_unit_quaternions(rng, a.samples)
        r = max(G.cmr_block_check(q) for q in qs)
        rep = {"max_residual": r, "pass": r < 1e-12}
    else:
        final, _ = G.propagator_limit_residuals(rng)
        rep = {"final_residuals": final, "pass": max(final.values()) < 1e-5}
    if not rep["pass"]:
        raise CheckFailed(rep)
    return rep


def _invariant(a):
    from .algebra import AlgebraElement, element_from_json
    from .framing import FramedSeries, framing_correct
    z = element_from_json(_load_json(a.z)) if a.z else AlgebraElement.one(a.bound)
    z = AlgebraElement(z.terms, a.bound)
    return {"element": framing_correct(FramedSeries(z, a.p1)).to_json()}


HANDLERS = {"diagrams": _diagrams, "algebra": _algebra, "faces": _faces,
            "charts": _charts, "geom": _geom, "invariant": _invariant}


def build_parser():
    p = _Parser(prog="kktz", description=__doc__.splitlines()[0])
    p.add_argument("--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    g = groups.add_parser("diagrams").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = g.add_parser("gen")
    x.add_argument("--degree", type=int, required=True)
    x.add_argument("--all", action="store_true", help="include disconnected diagrams")
    x = g.add_parser("aut")
    x.add_argument("--file")
    x.add_argument("--name", choices=["theta", "k4", "doubled_square"], default="theta")
    g.add_parser("labelled").add_argument("--degree", type=int, required=True)

    g = groups.add_parser("algebra").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    g.add_parser("dim").add_argument("--degree", type=int, required=True)
    for name in ("reduce", "exp"):
        x = g.add_parser(name)
        x.add_argument("--file", required=True)
        x.add_argument("--bound", type=int)

    g = groups.add_parser("faces").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = g.add_parser("enumerate")
    x.add_argument("--size", type=int, required=True)
    x.add_argument("--ambient", choices=["C_V", "S_V"], default="C_V")
    g.add_parser("check").add_argument("--degree", type=int, choices=[1, 2], required=True)

    g = groups.add_parser("charts").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = g.add_parser("roundtrip")
    x.add_argument("--seed", type=int, required=True)
    x.add_argument("--instances", type=int, default=100)
    x.add_argument("--variant", choices=["finite", "infinity"], default="finite")

    g = groups.add_parser("geom").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = g.add_parser("degree")
    x.add_argument("--map", choices=sorted(MAPS), default="rho")
    x.add_argument("--samples", type=int, default=1_000_000)
    x.add_argument("--seed", type=int, required=True)
    x = g.add_parser("linking")
    x.add_argument("--link", default="hopf", help="hopf, split, or a JSON file with K1 and K2")
    x.add_argument("--nodes", type=int, default=256)
    for name in ("g3check", "cmrcheck"):
        x = g.add_parser(name)
        x.add_argument("--samples", type=int, default=1000)
        x.add_argument("--seed", type=int, required=True)
    g.add_parser("propagator").add_argument("--seed", type=int, required=True)

    g = groups.add_parser("invariant").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    x = g.add_parser("frame")
    x.add_argument("--p1", type=int, required=True)
    x.add_argument("--z", help="JSON algebra element for Z(M; tau); defaults to 1")
    x.add_argument("--bound", type=int, default=SERIES_BOUND)
    return p


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("output", "format")}


def _render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else str(k), v[k])
        else:
            w.writerow([prefix, json.dumps(v, sort_keys=True) if isinstance(v, list) else v])

    walk("", report)
    return buf.getvalue()


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    status = 0
    try:
        result = HANDLERS[args.group](args)
    except CheckFailed as exc:
        result, status = exc.report, 2
    except (UsageError, KKTError, KeyError, ValueError) as exc:
        print(f"kktz: error: {exc}", file=sys.stderr)
        return 1
    report = {"schema_version": SCHEMA_VERSION, "command": f"{args.group} {args.cmd}",
              "config": _config(args),
              "versions": {"kktz": __version__, "numpy": np.__version__, "scipy": scipy.__version__}}
    report.update(result)
    text = _render(report, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
