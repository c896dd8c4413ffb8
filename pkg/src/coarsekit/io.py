"""JSON file formats for spaces, maps, entourages, chains, heights and operators."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .coarse_map import CoarseMap
from .entourage import Entourage
from .operator_model import BandOperator
from .space import HeightFunction, MetricSpace
from .uf_homology import UFChain

__all__ = [
    "FormatError",
    "read_json",
    "space_from_json",
    "space_to_json",
    "map_from_json",
    "map_to_json",
    "entourage_from_json",
    "entourage_to_json",
    "chain_from_json",
    "chain_to_json",
    "height_from_json",
    "height_to_json",
    "operator_from_json",
    "operator_to_json",
]


class FormatError(ValueError):
    """A file does not follow its documented layout."""


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from exc


def _require(doc: dict, *keys: str) -> None:
    if not isinstance(doc, dict):
        raise FormatError("expected a JSON object")
    missing = [k for k in keys if k not in doc]
    if missing:
        raise FormatError(f"missing keys: {missing}")


def space_from_json(doc: dict) -> MetricSpace:
    _require(doc, "label", "backend", "data")
    backend = doc["backend"]
    label = doc["label"]
    points = doc.get("points")
    try:
        if backend == "matrix":
            return MetricSpace.from_matrix(points, doc["data"], label)
        if backend == "graph":
            return MetricSpace.from_graph(points, [tuple(e) for e in doc["data"]], label)
        if backend == "lattice":
            return MetricSpace.from_lattice(doc["data"], label, points)
    except (TypeError, KeyError, ValueError) as exc:
        raise FormatError(f"space {label!r}: {exc}") from exc
    raise FormatError(f"unknown backend {backend!r}")


def space_to_json(space: MetricSpace) -> dict:
    return {"label": space.label, "backend": "matrix", "points": list(space.points),
            "data": space.dist.tolist()}


def map_from_json(doc: dict, source: MetricSpace, target: MetricSpace) -> CoarseMap:
    _require(doc, "source", "target", "table")
    try:
        return CoarseMap.from_dict(source, target, doc["table"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"map: {exc}") from exc


def map_to_json(f: CoarseMap) -> dict:
    return {"source": f.source.label, "target": f.target.label, "table": f.as_dict()}


def entourage_from_json(doc: dict, space: MetricSpace) -> Entourage:
    _require(doc, "space", "pairs")
    try:
        return Entourage.from_ids(space, space, [tuple(p) for p in doc["pairs"]])
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"entourage: {exc}") from exc


def entourage_to_json(E: Entourage) -> dict:
    return {"space": E.left.label, "pairs": [list(p) for p in E.id_pairs()]}


def chain_from_json(doc: dict, space: MetricSpace) -> UFChain:
    _require(doc, "space", "degree", "coeffs")
    degree = doc["degree"]
    try:
        coeffs: dict[tuple[int, ...], int] = {}
        for ids, c in doc["coeffs"]:
            key = tuple(space.index(p) for p in ids)
            coeffs[key] = coeffs.get(key, 0) + int(c)
        return UFChain(space, degree, coeffs)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"chain: {exc}") from exc


def chain_to_json(c: UFChain) -> dict:
    pts = c.space.points
    return {"space": c.space.label, "degree": c.degree,
            "coeffs": [[[pts[k] for k in key], v] for key, v in sorted(c.coeffs.items())]}


def height_from_json(doc: dict, space: MetricSpace) -> HeightFunction:
    _require(doc, "space", "values")
    try:
        return HeightFunction.from_dict(space, doc["values"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"height: {exc}") from exc


def height_to_json(h: HeightFunction) -> dict:
    return {"space": h.parent.label, "values": dict(zip(h.parent.points, h.values))}


def operator_from_json(doc: dict, rows: MetricSpace, cols: MetricSpace) -> BandOperator:
    _require(doc, "rows", "cols", "entries")
    fiber = doc.get("fiber_dim", 1)
    row_fiber = doc.get("row_fiber", fiber)
    col_fiber = doc.get("col_fiber", fiber)
    try:
        entries: dict[tuple[int, int, int, int], complex] = {}
        for row_id, rf, col_id, cf, re, im in doc["entries"]:
            key = (rows.index(row_id), int(rf), cols.index(col_id), int(cf))
            entries[key] = entries.get(key, 0) + complex(re, im)
        return BandOperator.from_entries(rows, cols, entries, row_fiber, col_fiber)
    except (KeyError, ValueError, TypeError) as exc:
        raise FormatError(f"operator: {exc}") from exc


def operator_to_json(T: BandOperator) -> dict:
    rows, cols = T.row_space.points, T.col_space.points
    entries = [[rows[y], a, cols[x], b, float(np.real(v)), float(np.imag(v))]
               for (y, a, x, b), v in sorted(T.entries().items())]
    doc = {"rows": T.row_space.label, "cols": T.col_space.label, "entries": entries}
    if T.row_fiber == T.col_fiber:
        doc["fiber_dim"] = T.row_fiber
    else:
        doc["row_fiber"], doc["col_fiber"] = T.row_fiber, T.col_fiber
    return doc
