"""Command line: validate, homology, continuation, export.

Exit codes: 0 success, 1 usage/IO/schema problems, 2 mathematical validation failure.
Every error message starts with a single token naming its kind.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import NotAChainMap
from .complex import DSquaredViolation, assemble, morse_bott_homology
from .continuation import (
    continuation_boundary_validate,
    homotopy_validate,
    induced_map,
    operator_matrices,
    paired_complexes,
    verify_chain_homotopy,
    verify_chain_map,
)
from .flow import StrataMismatch, validate_flow_category
from .io import (
    DocumentIOError,
    SchemaError,
    ValidationError,
    build_flow_category,
    load_continuation,
    load_flow_category,
    load_homotopy,
    read_json,
    resolve,
)

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _kind(doc: dict) -> str:
    if "levels" in doc:
        return "category"
    if "continuations" in doc:
        return "homotopy"
    if "source" in doc and "target" in doc:
        return "continuation"
    return "unknown"


def cmd_validate(args) -> int:
    path = resolve(args.file)
    doc = read_json(path)
    kind = _kind(doc)
    if kind == "category":
        report = validate_flow_category(build_flow_category(doc, str(path)))
    elif kind == "continuation":
        report = continuation_boundary_validate(load_continuation(path, validate=False))
    elif kind == "homotopy":
        hd = load_homotopy(path, validate=False)
        report = homotopy_validate(hd)
        if report.ok and not verify_chain_homotopy(hd):
            report.add("F43 F31 - F42 F21 differs from dH + Hd")
    else:
        raise SchemaError(str(path), "not a category, continuation or homotopy document")
    if args.format == "json":
        print(json.dumps({"file": str(path), "kind": kind, "ok": report.ok, "violations": report.violations}, indent=2))
    elif report.ok:
        print(f"OK: {kind} {path.name}")
    else:
        print(f"ValidationError: {kind} {path.name}: {len(report.violations)} violation(s)")
        for v in report.violations:
            print(f"  {v}")
    return EXIT_OK if report.ok else EXIT_INVALID


def cmd_homology(args) -> int:
    fc = load_flow_category(args.file)
    h = morse_bott_homology(fc, args.k_max)
    if args.format == "json":
        out = {
            "name": fc.name,
            "homology": [
                {"degree": k, "betti": g.betti, "torsion": list(g.torsion), "provisional": k in h.provisional}
                for k, g in sorted(h.groups.items())
            ],
        }
        print(json.dumps(out, indent=2))
    else:
        text = h.text() or "(empty)"
        if h.provisional:
            text += " (provisional: " + " ".join(f"H_{k}" for k in sorted(h.provisional)) + ")"
        print(text)
    return EXIT_OK


def _matrix_text(m) -> str:
    return "[" + ", ".join("[" + ", ".join(str(x) for x in row) + "]" for row in m.tolist()) + "]"


def cmd_continuation(args) -> int:
    src = load_flow_category(args.src)
    dst = load_flow_category(args.dst)
    cd = load_continuation(args.cont, src, dst)
    a, b = paired_complexes(src, dst)
    f = operator_matrices(cd.operator, a, b)
    ok = verify_chain_map(f, a.boundary, b.boundary)
    if not ok:
        print("chain map: FAILED")
        return EXIT_INVALID
    im = induced_map(cd)
    if src.name == dst.name and im.is_identity():
        print("chain map: OK; induced: identity")
    else:
        print("chain map: OK; induced:")
        for deg, m in sorted(im.matrices.items()):
            iso = "iso" if im.isomorphism[deg] else "not iso"
            print(f"  H_{deg}: {im.source[deg]} -> {im.target[deg]} {_matrix_text(m)} {iso}")
    status = EXIT_OK
    for h in args.homotopy or []:
        hd = load_homotopy(h, validate=False)
        good = verify_chain_homotopy(hd)
        print(f"homotopy {hd.name}: {'OK' if good else 'FAILED'}")
        status = status or (0 if good else EXIT_INVALID)
    return status


def cmd_export(args) -> int:
    fc = load_flow_category(args.file)
    cx = assemble(fc, args.k_max)
    out = {
        "name": fc.name,
        "dims": {str(k): n for k, n in sorted(cx.boundary.dims.items())},
        "generators": {str(k): [list(g) for g in gs] for k, gs in sorted(cx.generators.items())},
        "matrices": {str(k): cx.boundary.matrix_at(k).tolist() for k in sorted(cx.boundary.dims) if k > min(cx.boundary.dims)},
    }
    try:
        Path(args.matrices).write_text(json.dumps(out, indent=1, default=list) + "\n")
    except OSError as e:
        raise DocumentIOError(args.matrices, e.strerror or str(e)) from None
    print(f"wrote {args.matrices}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mbhom", description="Morse-Bott chain complexes from flow-category documents.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("validate", help="run every validator on a document")
    v.add_argument("file")
    v.add_argument("--format", choices=["text", "json"], default="text")
    v.set_defaults(func=cmd_validate)
    h = sub.add_parser("homology", help="integral homology of the total complex")
    h.add_argument("file")
    h.add_argument("--k-max", type=int, default=None)
    h.add_argument("--format", choices=["text", "json"], default="text")
    h.set_defaults(func=cmd_homology)
    c = sub.add_parser("continuation", help="check a continuation map and report its effect on homology")
    c.add_argument("src")
    c.add_argument("dst")
    c.add_argument("cont")
    c.add_argument("--homotopy", action="append")
    c.set_defaults(func=cmd_continuation)
    e = sub.add_parser("export", help="write the boundary matrices as JSON")
    e.add_argument("file")
    e.add_argument("--matrices", required=True)
    e.add_argument("--k-max", type=int, default=None)
    e.set_defaults(func=cmd_export)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"UsageError: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DocumentIOError, SchemaError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    except (DSquaredViolation, NotAChainMap, StrataMismatch) as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
