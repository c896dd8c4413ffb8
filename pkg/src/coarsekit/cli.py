"""
Command line front end.

Every verb takes a list of JSON input files; documents are recognised by
their keys and cross-referenced by space label. A JSON report is written
to --out (or stdout) with input hashes, parameters, results and wall time.
Tabular sweeps (theorem-a) can also be written as CSV with --csv.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io
from .coarse_map import CoarseMap, closeness, expansion_modulus, graph_of, max_fiber
from .entourage import decompose, max_degree
from .operator_model import (BandBoundViolation, alpha0, alpha0_injectivity_check, conjugate,
                             cover_adjoint_subspace, cover_image_subspace, covering_radius,
                             extract_coarse_relation, plan_uniform_cover, propagation, support,
                             uniform_cover)
from .pipeline import pipeline_theorem_a
from .space import MetricSpace, components_at_scale, growth_profile
from .uf_homology import (HallCertificate, boundary, class_witness, h0_class, bijectivize,
                          verify_hall_certificate)

log = logging.getLogger("coarsekit")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_NEGATIVE = 3  # a well-formed "no" answer: no bijection, no witness, classes differ
EXIT_UNRESOLVED = 4
EXIT_MALFORMED = 5
EXIT_RANGE = 6
EXIT_VERIFY = 7

VERBS = ("space", "map", "chain", "decompose", "boundary", "h0", "witness", "bijectivize",
         "cover", "conjugate", "extract", "alpha0", "alpha0-check", "theorem-a")


class CliError(Exception):
    def __init__(self, code: str, exit_status: int, message: str):
        super().__init__(message)
        self.code = code
        self.exit_status = exit_status


class Negative(Exception):
    """Carries the result of a computation whose answer is 'no'."""

    def __init__(self, code: str, result: dict):
        super().__init__(code)
        self.code = code
        self.result = result


class Inputs:
    """Documents grouped by kind; spaces indexed by label."""

    def __init__(self, paths):
        self.files = []
        self.spaces: dict[str, MetricSpace] = {}
        self.docs: dict[str, list[dict]] = {k: [] for k in ("map", "entourage", "chain", "height", "operator")}
        for p in paths:
            path = Path(p)
            if not path.exists():
                raise CliError("malformed-file", EXIT_MALFORMED, f"{p}: no such file")
            raw = path.read_bytes()
            self.files.append({"path": str(p), "sha256": hashlib.sha256(raw).hexdigest()})
            try:
                doc = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise CliError("malformed-file", EXIT_MALFORMED, f"{p}: {exc}") from exc
            kind = _kind(doc)
            if kind is None:
                raise CliError("malformed-file", EXIT_MALFORMED, f"{p}: unrecognised document")
            if kind == "space":
                try:
                    space = io.space_from_json(doc)
                except ValueError as exc:
                    raise CliError("malformed-file", EXIT_MALFORMED, f"{p}: {exc}") from exc
                self.spaces[space.label] = space
            else:
                self.docs[kind].append(doc)

    def space(self, label) -> MetricSpace:
        try:
            return self.spaces[label]
        except KeyError:
            raise CliError("unresolved-label", EXIT_UNRESOLVED, f"no space labelled {label!r}") from None

    def only_space(self) -> MetricSpace:
        if len(self.spaces) != 1:
            raise CliError("malformed-file", EXIT_MALFORMED, "expected exactly one space file")
        return next(iter(self.spaces.values()))

    def take(self, kind: str, count: int | None = 1) -> list[dict]:
        docs = self.docs[kind]
        if not docs or (count is not None and len(docs) < count):
            raise CliError("malformed-file", EXIT_MALFORMED, f"missing {kind} file")
        return docs if count is None else docs[:count]

    def map(self, doc) -> CoarseMap:
        return _parse(io.map_from_json, doc, self.space(doc["source"]), self.space(doc["target"]))

    def chain(self, doc):
        return _parse(io.chain_from_json, doc, self.space(doc["space"]))

    def operator(self, doc):
        return _parse(io.operator_from_json, doc, self.space(doc["rows"]), self.space(doc["cols"]))


def _parse(fn, *args):
    try:
        return fn(*args)
    except ValueError as exc:
        raise CliError("malformed-file", EXIT_MALFORMED, str(exc)) from exc


def _kind(doc) -> str | None:
    if not isinstance(doc, dict):
        return None
    if "backend" in doc:
        return "space"
    if "table" in doc:
        return "map"
    if "entries" in doc:
        return "operator"
    if "coeffs" in doc:
        return "chain"
    if "values" in doc:
        return "height"
    if "pairs" in doc:
        return "entourage"
    return None


def _chain_json(c) -> dict:
    return io.chain_to_json(c)


# -- verbs ----------------------------------------------------------------------


def cmd_space(inp: Inputs, args) -> dict:
    out = []
    for space in inp.spaces.values():
        comps = components_at_scale(space, args.scale)
        out.append({"label": space.label, "points": len(space), "diameter": space.diameter,
                    "growth_profile": growth_profile(space, args.scale),
                    "components": [[space.points[i] for i in c] for c in comps]})
    if not out:
        raise CliError("malformed-file", EXIT_MALFORMED, "no space file given")
    return {"spaces": out}


def cmd_map(inp: Inputs, args) -> dict:
    maps = [inp.map(d) for d in inp.take("map", None)]
    out = [{"source": f.source.label, "target": f.target.label,
            "expansion_modulus": expansion_modulus(f, args.scale), "max_fiber": max_fiber(f),
            "graph_size": len(graph_of(f))} for f in maps]
    result = {"maps": out}
    if len(maps) == 2:
        result["closeness"] = closeness(maps[0], maps[1])
    return result


def cmd_chain(inp: Inputs, args) -> dict:
    c = inp.chain(inp.take("chain")[0])
    return {"degree": c.degree, "terms": len(c.coeffs), "propagation": c.propagation}


def cmd_decompose(inp: Inputs, args) -> dict:
    doc = inp.take("entourage")[0]
    E = _parse(io.entourage_from_json, doc, inp.space(doc["space"]))
    ts = decompose(E)
    pts = E.left.points
    return {"count": len(ts), "max_degree": max_degree(E), "width": E.width,
            "translations": [{"table": {pts[x]: pts[y] for x, y in sorted(t.table.items())},
                              "displacement": t.displacement} for t in ts]}


def cmd_boundary(inp: Inputs, args) -> dict:
    c = inp.chain(inp.take("chain")[0])
    if c.degree == 0:
        raise CliError("param-out-of-range", EXIT_RANGE, "degree-0 chains have no boundary")
    b = boundary(c)
    return {"boundary": _chain_json(b), "propagation_in": c.propagation, "propagation_out": b.propagation}


def _degree0(inp: Inputs):
    c = inp.chain(inp.take("chain")[0])
    if c.degree != 0:
        raise CliError("param-out-of-range", EXIT_RANGE, "expected a degree-0 chain")
    return c


def cmd_h0(inp: Inputs, args) -> dict:
    cls = h0_class(_degree0(inp), args.scale)
    pts = cls.space.points
    return {"components": [[pts[i] for i in c] for c in cls.components],
            "component_sums": list(cls.component_sums), "zero": cls.is_zero}


def cmd_witness(inp: Inputs, args) -> dict:
    g = _degree0(inp)
    w = class_witness(g, args.scale)
    if w is None:
        raise Negative("no-witness", {"component_sums": list(h0_class(g, args.scale).component_sums)})
    if boundary(w) != g:
        raise CliError("verification-failed", EXIT_VERIFY, "witness boundary does not match")
    return {"witness": _chain_json(w), "propagation": w.propagation, "verified": True}


def cmd_bijectivize(inp: Inputs, args) -> dict:
    f = inp.map(inp.take("map")[0])
    res = bijectivize(f, args.scale, args.seed)
    if isinstance(res, HallCertificate):
        if not verify_hall_certificate(f, args.scale, res):
            raise CliError("verification-failed", EXIT_VERIFY, "certificate does not violate Hall's condition")
        raise Negative("no-bijection", {"certificate": res.to_json(f)})
    if closeness(f, res) > args.scale or not res.is_bijective:
        raise CliError("verification-failed", EXIT_VERIFY, "returned map is not a bounded bijection")
    return {"bijection": res.as_dict(), "closeness": closeness(f, res)}


def _cover_checks(S, plan) -> dict:
    gram = (S.adjoint() @ S).matrix
    eye = np.eye(gram.shape[0])
    V = list(range(plan.D))
    return {
        "isometry": bool(np.array_equal(gram.toarray(), eye)),
        "support_in_graph": support(S).pairs <= graph_of(plan.f).pairs,
        "N": plan.N, "D": plan.D, "output_fiber": plan.output_fiber,
        "image_subspace_dim_for_line": max(len(cover_image_subspace(plan, [n])) for n in V),
        "adjoint_subspace_dim_for_line": max(len(cover_adjoint_subspace(plan, [m]))
                                             for m in range(plan.output_fiber)),
    }


def cmd_cover(inp: Inputs, args) -> dict:
    f = inp.map(inp.take("map")[0])
    try:
        plan = plan_uniform_cover(f, args.fiber)
    except ValueError as exc:
        raise CliError("param-out-of-range", EXIT_RANGE, str(exc)) from exc
    S = uniform_cover(plan)
    checks = _cover_checks(S, plan)
    if not (checks["isometry"] and checks["support_in_graph"]):
        raise CliError("verification-failed", EXIT_VERIFY, "cover checks failed")
    return {"checks": checks, "operator": io.operator_to_json(S)}


def cmd_conjugate(inp: Inputs, args) -> dict:
    f = inp.map(inp.take("map")[0])
    T = inp.operator(inp.take("operator")[0])
    if T.row_space != f.source or T.col_space != f.source:
        raise CliError("unresolved-label", EXIT_UNRESOLVED, "operator must act on the source of the map")
    try:
        plan = plan_uniform_cover(f, T.fiber_dim)
    except ValueError as exc:
        raise CliError("param-out-of-range", EXIT_RANGE, str(exc)) from exc
    S = uniform_cover(plan)
    try:
        out = conjugate(S, T, f)
    except BandBoundViolation as exc:
        raise CliError("verification-failed", EXIT_VERIFY, str(exc)) from exc
    prop_t = propagation(T)
    return {"propagation_T": prop_t, "propagation_STS*": propagation(out),
            "bound": expansion_modulus(f, prop_t) + 2 * covering_radius(S, f),
            "operator": io.operator_to_json(out)}


def cmd_extract(inp: Inputs, args) -> dict:
    if not 0 < args.delta < 1:
        raise CliError("param-out-of-range", EXIT_RANGE, "delta must lie in (0, 1)")
    U = inp.operator(inp.take("operator")[0])
    r = args.scale if args.col_scale is None else args.col_scale
    try:
        E = extract_coarse_relation(U, args.delta, args.scale, r)
    except ValueError as exc:
        raise CliError("param-out-of-range", EXIT_RANGE, str(exc)) from exc
    return {"pairs": [list(p) for p in E.id_pairs()], "size": len(E)}


def cmd_alpha0(inp: Inputs, args) -> dict:
    h = _degree0(inp)
    vec = alpha0(h, args.scale)
    if vec != h0_class(h, args.scale).component_sums:
        raise CliError("verification-failed", EXIT_VERIFY, "alpha0 disagrees with the class computation")
    return {"alpha0": list(vec)}


def cmd_alpha0_check(inp: Inputs, args) -> dict:
    rep = alpha0_injectivity_check(inp.only_space(), args.scale)
    if not rep.passed:
        raise CliError("verification-failed", EXIT_VERIFY, json.dumps(rep.as_dict()))
    return {"report": rep.as_dict(), "rank": rep.homology_rank,
            "divisors": rep.elementary_divisors, "pass": rep.passed}


def cmd_theorem_a(inp: Inputs, args) -> dict:
    docs = inp.take("height", 2)
    hs = [_parse(io.height_from_json, d, inp.space(d["space"])) for d in docs]
    rep = pipeline_theorem_a(hs[0], hs[1], args.scale, seed=args.seed)
    result = rep.as_dict()
    if rep.status == "classes differ":
        raise Negative("classes-differ", result)
    if rep.status == "no bijection":
        raise Negative("no-bijection", result)
    if not rep.verified:
        raise CliError("verification-failed", EXIT_VERIFY, "boundary of the projected cycle is not h1 - h2")
    return result


COMMANDS = {
    "space": cmd_space, "map": cmd_map, "chain": cmd_chain, "decompose": cmd_decompose,
    "boundary": cmd_boundary, "h0": cmd_h0, "witness": cmd_witness, "bijectivize": cmd_bijectivize,
    "cover": cmd_cover, "conjugate": cmd_conjugate, "extract": cmd_extract, "alpha0": cmd_alpha0,
    "alpha0-check": cmd_alpha0_check, "theorem-a": cmd_theorem_a,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coarsekit", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb)
        p.add_argument("inputs", nargs="+", help="JSON input files")
        p.add_argument("--scale", type=int, default=1, help="scale R (default 1)")
        p.add_argument("--col-scale", type=int, default=None, help="column scale r for extract")
        p.add_argument("--delta", type=float, default=0.5, help="threshold for extract")
        p.add_argument("--fiber", type=int, default=1, help="fiber truncation D for cover")
        p.add_argument("--seed", type=int, default=0, help="tie-break seed")
        p.add_argument("--out", default=None, help="report path (default stdout)")
        p.add_argument("--csv", default=None, help="also write the scale sweep as CSV (theorem-a)")
    return parser


SWEEP_COLUMNS = ("S", "matched", "certificate_size", "neighborhood_size")


def _write_sweep_csv(path: str, result) -> None:
    rows = result.get("sweep", []) if isinstance(result, dict) else []
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS, restval="")
        writer.writeheader()
        writer.writerows(rows)


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("COARSEKIT_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    params = {"scale": args.scale, "col_scale": args.col_scale, "delta": args.delta,
              "fiber": args.fiber, "seed": args.seed}
    report: dict = {"command": args.command, "params": params}
    start = time.perf_counter()
    status = EXIT_OK
    try:
        if args.scale < 0 or (args.col_scale is not None and args.col_scale < 0):
            raise CliError("param-out-of-range", EXIT_RANGE, "scales must be nonnegative")
        if args.fiber < 1:
            raise CliError("param-out-of-range", EXIT_RANGE, "fiber must be >= 1")
        inp = Inputs(args.inputs)
        report["inputs"] = inp.files
        log.info("running %s on %d files", args.command, len(inp.files))
        report["result"] = COMMANDS[args.command](inp, args)
        report["status"] = "ok"
    except Negative as neg:
        report["status"] = neg.code
        report["result"] = neg.result
        status = EXIT_NEGATIVE
    except CliError as err:
        report["status"] = "error"
        report["error"] = {"code": err.code, "exit_status": err.exit_status, "message": str(err)}
        status = err.exit_status
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable internal error
        log.exception("internal error")
        report["status"] = "error"
        report["error"] = {"code": "internal", "exit_status": EXIT_INTERNAL, "message": repr(exc)}
        status = EXIT_INTERNAL
    report["wall_time_s"] = round(time.perf_counter() - start, 6)
    if args.csv:
        _write_sweep_csv(args.csv, report.get("result"))
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    if "error" in report:
        sys.stderr.write(json.dumps(report["error"]) + "\n")
    return status


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
