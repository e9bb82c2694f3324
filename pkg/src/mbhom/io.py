"""JSON documents for flow categories, continuations and homotopies."""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path
from typing import Any, Hashable

import jsonschema

from .chains import FormalChain, ValidationReport, _sort_key
from .cubical import Cell, Cubulation, NotChainLevel, cellular_chain_map
from .fibered import BundlePiece, LocalPiece, Piece
from .flow import Component, CriticalLevel, FlowCategory, FlowOperator, ModuliBundle, Stratum, validate_flow_category
from .continuation import ContinuationData, HomotopyData, continuation_boundary_validate, homotopy_validate


class SchemaError(ValueError):
    def __init__(self, path: str, detail: str):
        super().__init__(f"SchemaError: {path}: {detail}")
        self.path = path


class ValidationError(ValueError):
    def __init__(self, report: ValidationReport, what: str = ""):
        head = f"{what}: " if what else ""
        super().__init__(f"ValidationError: {head}{len(report.violations)} violation(s)\n{report}")
        self.report = report


class DocumentIOError(OSError):
    def __init__(self, path: str, detail: str):
        super().__init__(f"IOError: {path}: {detail}")


# -- schema --------------------------------------------------------------------------

_ID = {"anyOf": [{"type": "string"}, {"type": "integer"}, {"type": "array"}]}
_TERMS = {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer"}, _ID], "minItems": 2, "maxItems": 2}}
_CELL = {
    "type": "object",
    "required": ["id", "dim"],
    "properties": {
        "id": _ID,
        "dim": {"type": "integer", "minimum": 0},
        "boundary": {
            "type": "array",
            "items": {
                "type": "array",
                "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "integer"}, _ID],
                "minItems": 4,
                "maxItems": 4,
            },
        },
    },
}
_COMPLEX = {
    "type": "object",
    "required": ["cells"],
    "properties": {"cells": {"type": "array", "items": _CELL}, "fundamental": _TERMS},
}
_PIECE = {
    "type": "object",
    "required": ["base_component", "fiber", "endpoint_map"],
    "properties": {
        "id": _ID,
        "kind": {"enum": ["bundle", "local"]},
        "base_component": {"type": "string"},
        "fiber": _COMPLEX,
        "orientation_coeff": {"type": "integer"},
        "points": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "cell", "sign"],
                "properties": {"id": _ID, "cell": _ID, "sign": {"type": "integer"}},
            },
        },
        "endpoint_map": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cell_id", "image"],
                "properties": {"cell_id": {"type": "array", "minItems": 2, "maxItems": 2}, "image": _TERMS},
            },
        },
        "strata": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["fiber_boundary_cell", "via_index", "left_cell", "right_cell"],
                "properties": {
                    "fiber_boundary_cell": _ID,
                    "via_index": {"type": "integer"},
                    "left_cell": _ID,
                    "right_cell": _ID,
                    "family": {"type": "string"},
                },
            },
        },
    },
}
_BUNDLES = {
    "type": "array",
    "items": {
        "type": "object",
        "required": ["from", "to", "pieces"],
        "properties": {"from": {"type": "integer"}, "to": {"type": "integer"}, "pieces": {"type": "array", "items": _PIECE}},
    },
}
CATEGORY_SCHEMA = {
    "type": "object",
    "required": ["name", "top_index", "levels"],
    "properties": {
        "name": {"type": "string"},
        "top_index": {"type": "integer", "minimum": 0},
        "levels": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["index", "components"],
                "properties": {
                    "index": {"type": "integer"},
                    "components": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["id", "dim", "cells", "fundamental"],
                            "properties": {
                                "id": {"type": "string"},
                                "dim": {"type": "integer", "minimum": 0},
                                "cells": {"type": "array", "items": _CELL},
                                "fundamental": _TERMS,
                            },
                        },
                    },
                },
            },
        },
        "moduli": _BUNDLES,
    },
}
CONTINUATION_SCHEMA = {
    "type": "object",
    "required": ["name", "source", "target", "bundles"],
    "properties": {"name": {"type": "string"}, "source": {"type": "string"}, "target": {"type": "string"}, "bundles": _BUNDLES},
}
HOMOTOPY_SCHEMA = {
    "type": "object",
    "required": ["name", "continuations", "bundles"],
    "properties": {
        "name": {"type": "string"},
        "continuations": {
            "type": "object",
            "required": ["F21", "F31", "F42", "F43"],
            "properties": {k: {"type": "string"} for k in ("F21", "F31", "F42", "F43")},
        },
        "bundles": _BUNDLES,
    },
}


def _check_schema(doc: Any, schema: dict, source: str) -> None:
    try:
        jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SchemaError(f"{source}#{where}", e.message) from None


# -- ids ------------------------------------------------------------------------------

def _key(x: Any) -> Hashable:
    return tuple(_key(y) for y in x) if isinstance(x, list) else x


def _jsonable(x: Hashable) -> Any:
    return [_jsonable(y) for y in x] if isinstance(x, tuple) else x


# -- parsing -------------------------------------------------------------------------

def parse_complex(doc: dict, source: str = "") -> Cubulation:
    cells = []
    seen = set()
    for c in doc["cells"]:
        cid = _key(c["id"])
        if cid in seen:
            raise SchemaError(source, f"duplicate cell id {cid!r}")
        seen.add(cid)
        bd = tuple((s, a, sd, _key(t)) for s, a, sd, t in c.get("boundary", []))
        cells.append(Cell(cid, c["dim"], bd))
    fund = doc.get("fundamental")
    fc = None
    if fund is not None:
        fc = {}
        for coeff, cid in fund:
            cid = _key(cid)
            if cid not in seen:
                raise SchemaError(source, f"fundamental chain names unknown cell {cid!r}")
            fc[cid] = fc.get(cid, 0) + coeff
    cx = Cubulation.from_cells(cells, fc)
    for cell in cx.cells.values():
        for _, _, _, t in cell.boundary:
            if t not in cx.cells:
                raise SchemaError(source, f"cell {cell.id!r} has face {t!r} that does not exist")
    return cx


def _parse_piece(doc: dict, src: CriticalLevel, dst: CriticalLevel, source: str, n: int) -> Piece:
    comp_id = doc["base_component"]
    try:
        comp = src.component(comp_id)
    except KeyError:
        raise SchemaError(source, f"unknown base component {comp_id!r}") from None
    fiber = parse_complex(doc["fiber"], f"{source}/fiber")
    pid = _key(doc.get("id", f"{comp_id}#{n}"))
    strata = tuple(
        Stratum(_key(s["fiber_boundary_cell"]), s["via_index"], _key(s["left_cell"]), _key(s["right_cell"]), s.get("family", ""))
        for s in doc.get("strata", [])
    )
    orient = doc.get("orientation_coeff", 1)
    kind = doc.get("kind", "local" if "points" in doc else "bundle")
    if kind == "local":
        pts = tuple((_key(p["id"]), _key(p["cell"]), p["sign"]) for p in doc.get("points", []))
        for _, cell, _ in pts:
            if cell not in comp.complex.cells:
                raise SchemaError(source, f"point in unknown base cell {cell!r}")
        piece: Piece = LocalPiece(comp_id, comp.complex, fiber, pts, orient, None, pid, strata)
    else:
        piece = BundlePiece(comp_id, comp.complex, fiber, orient, None, pid, strata)
    assign: dict = {}
    for e in doc["endpoint_map"]:
        cid = _key(e["cell_id"])
        if cid not in piece.total.cells:
            raise SchemaError(source, f"endpoint map names unknown cell {cid!r}")
        assign[cid] = {_key(t): c for c, t in e["image"]}
        for t in assign[cid]:
            if t not in dst.complex.cells:
                raise SchemaError(source, f"endpoint image {t!r} is not a cell of the target level")
    try:
        piece.endpoint = cellular_chain_map(piece.total, dst.complex, assign)
    except NotChainLevel as e:
        report = ValidationReport([f"piece {pid!r}: endpoint map is not a chain map: {e}"])
        raise ValidationError(report, source) from None
    return piece


def _parse_bundles(
    docs: list, src: dict[int, CriticalLevel], dst: dict[int, CriticalLevel], source: str
) -> dict[tuple[int, int], ModuliBundle]:
    out: dict = {}
    for n, b in enumerate(docs):
        i, t = b["from"], b["to"]
        where = f"{source}#bundles/{n}"
        if i not in src:
            raise SchemaError(where, f"source level {i} does not exist")
        if t not in dst:
            raise SchemaError(where, f"target level {t} does not exist")
        bundle = out.setdefault((i, t), ModuliBundle(i, t))
        for m, p in enumerate(b["pieces"]):
            bundle.pieces.append(_parse_piece(p, src[i], dst[t], f"{where}/pieces/{m}", len(bundle.pieces)))
        ids = [p.id for p in bundle.pieces]
        if len(set(ids)) != len(ids):
            raise SchemaError(where, "duplicate piece ids")
    return out


def build_flow_category(doc: dict, source: str = "<document>") -> FlowCategory:
    """Parse without running the mathematical validators."""
    _check_schema(doc, CATEGORY_SCHEMA, source)
    levels: dict[int, CriticalLevel] = {}
    for lv in doc["levels"]:
        i = lv["index"]
        if i in levels:
            raise SchemaError(source, f"level {i} listed twice")
        comps = []
        for c in lv["components"]:
            cx = parse_complex(c, f"{source}#levels/{i}/{c['id']}")
            cx.name = c["id"]
            if cx.cells and cx.dim != c["dim"]:
                raise SchemaError(source, f"component {c['id']!r} declares dim {c['dim']} but has cells up to {cx.dim}")
            comps.append(Component(c["id"], cx))
        if len({c.id for c in comps}) != len(comps):
            raise SchemaError(source, f"level {i}: duplicate component ids")
        levels[i] = CriticalLevel(i, comps)
    moduli = _parse_bundles(doc.get("moduli", []), levels, levels, source)
    return FlowCategory(doc["name"], doc["top_index"], levels, moduli)


def parse_flow_category(doc: dict, source: str = "<document>") -> FlowCategory:
    """Parse and run every flow-category validator; raise on any violation."""
    fc = build_flow_category(doc, source)
    report = validate_flow_category(fc)
    if not report.ok:
        raise ValidationError(report, source)
    return fc


# -- files and references ----------------------------------------------------------------

def fixtures_dir() -> Path:
    env = os.environ.get("MBHOM_FIXTURES")
    if env:
        return Path(env)
    return Path(str(resources.files("mbhom") / "fixtures"))


def resolve(ref: str, base: Path | None = None) -> Path:
    """Find a document: as given, next to the referring document, then among the fixtures."""
    p = Path(ref)
    candidates = [p]
    if base is not None and not p.is_absolute():
        candidates.append(base / p)
    candidates.append(fixtures_dir() / p.name)
    for c in candidates:
        if c.is_file():
            return c
    raise DocumentIOError(ref, "no such file")


def read_json(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise DocumentIOError(str(path), e.strerror or str(e)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(str(path), f"malformed JSON: {e.msg} at line {e.lineno}") from None


def load_flow_category(ref: str | Path, base: Path | None = None, validate: bool = True) -> FlowCategory:
    path = resolve(str(ref), base)
    doc = read_json(path)
    return parse_flow_category(doc, str(path)) if validate else build_flow_category(doc, str(path))


def build_continuation(doc: dict, source: FlowCategory, target: FlowCategory, where: str = "<document>") -> ContinuationData:
    _check_schema(doc, CONTINUATION_SCHEMA, where)
    bundles = _parse_bundles(doc["bundles"], source.levels, target.levels, where)
    op = FlowOperator(source.levels, target.levels, bundles, 0, doc["name"])
    return ContinuationData(doc["name"], source, target, op)


def load_continuation(
    ref: str | Path,
    source: FlowCategory | None = None,
    target: FlowCategory | None = None,
    base: Path | None = None,
    validate: bool = True,
) -> ContinuationData:
    """Load a continuation; categories named in the document are loaded unless given."""
    path = resolve(str(ref), base)
    doc = read_json(path)
    _check_schema(doc, CONTINUATION_SCHEMA, str(path))
    here = path.parent
    if source is None:
        source = load_flow_category(doc["source"], here)
    elif Path(doc["source"]).stem != source.name:
        raise SchemaError(str(path), f"source {doc['source']!r} does not match category {source.name!r}")
    if target is None:
        target = load_flow_category(doc["target"], here)
    elif Path(doc["target"]).stem != target.name:
        raise SchemaError(str(path), f"target {doc['target']!r} does not match category {target.name!r}")
    cd = build_continuation(doc, source, target, str(path))
    if validate:
        report = continuation_boundary_validate(cd)
        if not report.ok:
            raise ValidationError(report, str(path))
    return cd


def load_homotopy(ref: str | Path, base: Path | None = None, validate: bool = True) -> HomotopyData:
    path = resolve(str(ref), base)
    doc = read_json(path)
    _check_schema(doc, HOMOTOPY_SCHEMA, str(path))
    here = path.parent
    refs = doc["continuations"]
    f21 = load_continuation(refs["F21"], base=here)
    f31 = load_continuation(refs["F31"], source=f21.source, base=here)
    f42 = load_continuation(refs["F42"], source=f21.target, base=here)
    f43 = load_continuation(refs["F43"], source=f31.target, target=f42.target, base=here)
    f1, f4 = f21.source, f42.target
    bundles = _parse_bundles(doc["bundles"], f1.levels, f4.levels, str(path))
    op = FlowOperator(f1.levels, f4.levels, bundles, 1, doc["name"])
    hd = HomotopyData(doc["name"], f1, f4, f21, f31, f42, f43, op)
    if validate:
        report = homotopy_validate(hd)
        if not report.ok:
            raise ValidationError(report, str(path))
    return hd


# -- serialisation --------------------------------------------------------------------

def _terms(chain: FormalChain | None) -> list:
    return [[c, _jsonable(g)] for g, c in (chain.sorted_items() if chain else [])]


def dump_complex(cx: Cubulation) -> dict:
    cells = sorted(cx.cells.values(), key=lambda c: (c.dim, _sort_key(c.id)))
    out = {
        "cells": [
            {"id": _jsonable(c.id), "dim": c.dim, "boundary": [[s, a, sd, _jsonable(t)] for s, a, sd, t in c.boundary]}
            for c in cells
        ]
    }
    if cx.fundamental is not None:
        out["fundamental"] = _terms(cx.fundamental)
    return out


def _dump_piece(p: Piece) -> dict:
    out: dict = {"id": _jsonable(p.id), "kind": p.kind, "base_component": p.base_component}
    if isinstance(p, LocalPiece):
        out["points"] = [{"id": _jsonable(i), "cell": _jsonable(c), "sign": s} for i, c, s in p.points]
    out["fiber"] = dump_complex(p.fiber)
    out["orientation_coeff"] = p.orientation
    out["endpoint_map"] = [
        {"cell_id": _jsonable(cid), "image": _terms(p.endpoint.image(cid))}
        for cid in sorted(p.total.cells, key=_sort_key)
        if p.endpoint.image(cid)
    ]
    out["strata"] = [
        {
            "fiber_boundary_cell": _jsonable(s.fiber_boundary_cell),
            "via_index": s.via_index,
            "left_cell": _jsonable(s.left_cell),
            "right_cell": _jsonable(s.right_cell),
            **({"family": s.family} if s.family else {}),
        }
        for s in sorted(p.strata, key=lambda s: _sort_key(s.fiber_boundary_cell))
    ]
    return out


def dump_bundles(bundles: dict[tuple[int, int], ModuliBundle]) -> list:
    return [
        {"from": i, "to": t, "pieces": [_dump_piece(p) for p in sorted(b.pieces, key=lambda p: _sort_key(p.id))]}
        for (i, t), b in sorted(bundles.items())
    ]


def dump_flow_category(fc: FlowCategory) -> dict:
    """Canonical document: levels, components, cells and pieces in sorted order."""
    levels = []
    for i, lv in sorted(fc.levels.items()):
        comps = []
        for c in sorted(lv.components, key=lambda c: c.id):
            comps.append({"id": c.id, "dim": c.dim, **dump_complex(c.complex)})
        levels.append({"index": i, "components": comps})
    return {"name": fc.name, "top_index": fc.top_index, "levels": levels, "moduli": dump_bundles(fc.moduli)}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=True) + "\n"
