"""Regenerate the bundled JSON fixtures in src/mbhom/fixtures."""

from __future__ import annotations

import sys
from pathlib import Path

from mbhom.chains import FormalChain
from mbhom.continuation import identity_continuation
from mbhom.cubical import Cell, Cubulation, cellular_chain_map, circle, interval, point, torus
from mbhom.fibered import BundlePiece, LocalPiece
from mbhom.flow import Component, CriticalLevel, FlowCategory, ModuliBundle, Stratum
from mbhom.io import dump_bundles, dump_flow_category, dumps

OUT = Path(__file__).resolve().parent.parent / "src" / "mbhom" / "fixtures"


def points(*pairs: tuple[str, int]) -> Cubulation:
    return Cubulation.from_cells([Cell(p, 0) for p, _ in pairs], dict(pairs))


def loop(vs=("w0", "w1"), es=("g0", "g1")) -> Cubulation:
    names = {"v0": vs[0], "v1": vs[1], "e0": es[0], "e1": es[1]}
    return circle(2).relabel(lambda c: names[c])


def intervals(*prefixes: str) -> Cubulation:
    cells, fund = {}, {}
    for p in prefixes:
        iv = interval(p)
        cells.update(iv.cells)
        fund.update(iv.fundamental)
    return Cubulation(cells, FormalChain(fund, 1))


def piece(level, comp, fiber, target_level, assign, orient=1, pid=None, strata=()):
    base = level.component(comp).complex
    p = BundlePiece(comp, base, fiber, orient, None, pid or comp, tuple(strata))
    p.endpoint = cellular_chain_map(p.total, target_level.complex, assign)
    return p


def local(level, comp, fiber, pts, target_level, assign, pid):
    base = level.component(comp).complex
    p = LocalPiece(comp, base, fiber, tuple(pts), 1, None, pid)
    p.endpoint = cellular_chain_map(p.total, target_level.complex, assign)
    return p


def constant(total, target_cell):
    """Send every vertex to ``target_cell`` and everything else to zero."""
    return {c: {target_cell: 1} for c, cell in total.cells.items() if cell.dim == 0}


def level(i, **comps):
    return CriticalLevel(i, [Component(k, v) for k, v in comps.items()])


def sphere_z2() -> FlowCategory:
    l0 = level(0, B0=circle(2))
    l2 = level(2, n=point("n"), s=point("s"))
    pieces = []
    for name, o in (("n", 1), ("s", -1)):
        fib = loop()
        assign = {(name, "w0"): {"v0": 1}, (name, "w1"): {"v1": 1}, (name, "g0"): {"e0": 1}, (name, "g1"): {"e1": 1}}
        pieces.append(piece(l2, name, fib, l0, assign, o, f"{name}>B0"))
    return FlowCategory("sphere-z2", 2, {0: l0, 2: l2}, {(2, 0): ModuliBundle(2, 0, pieces)})


def sphere_neg_z2() -> FlowCategory:
    l0 = level(0, n=point("n"), s=point("s"))
    l1 = level(1, B1=circle(2))
    fib = points(("p", 1), ("q", -1))
    assign = {}
    for v in ("v0", "v1"):
        assign[(v, "p")] = {"n": 1}
        assign[(v, "q")] = {"s": 1}
    p = piece(l1, "B1", fib, l0, assign, 1, "B1>0")
    return FlowCategory("sphere-neg-z2", 2, {0: l0, 1: l1}, {(1, 0): ModuliBundle(1, 0, [p])})


def sphere_morse() -> FlowCategory:
    l0 = level(0, s=point("s"))
    l2 = level(2, n=point("n"))
    fib = loop()
    p = piece(l2, "n", fib, l0, {("n", "w0"): {"s": 1}, ("n", "w1"): {"s": 1}}, 1, "n>s")
    return FlowCategory("sphere-morse", 2, {0: l0, 2: l2}, {(2, 0): ModuliBundle(2, 0, [p])})


def torus_constant() -> FlowCategory:
    return FlowCategory("torus-constant", 0, {0: level(0, T=torus(2, 2))}, {})


def circle_constant() -> FlowCategory:
    return FlowCategory("circle-constant", 0, {0: level(0, S=circle(2))}, {})


def _broken_pairs(pairs):
    """Interval fiber over ``top``: one interval per (start, end) pair of broken flows.

    Each pair is ((left, right) at the a0 end, (left, right) at the a1 end).
    """
    prefixes = [f"I{k}" for k in range(len(pairs))]
    fib = intervals(*prefixes)
    strata = []
    for pre, (start, end) in zip(prefixes, pairs):
        strata.append(Stratum(f"{pre}a0", 1, start[0], start[1]))
        strata.append(Stratum(f"{pre}a1", 1, end[0], end[1]))
    return fib, strata


def morse_smale(name, crit1, top_pairs) -> FlowCategory:
    l0 = level(0, m=point("m"))
    l1 = level(1, **{c[0]: point(c[0]) for c in crit1})
    l2 = level(2, M=point("M"))
    down = {}
    up_cells = []
    pieces10 = []
    for c, (plus, minus), (p2, m2) in crit1:
        up_cells += [(plus, 1), (minus, -1)]
        down[plus] = c
        down[minus] = c
        fib = points((p2, 1), (m2, -1))
        pieces10.append(piece(l1, c, fib, l0, {(c, p2): {"m": 1}, (c, m2): {"m": 1}}, 1, f"{c}>m"))
    fib21 = points(*up_cells)
    p21 = piece(l2, "M", fib21, l1, {("M", f): {down[f]: 1} for f, _ in up_cells}, 1, "M>1")
    fib20, strata = _broken_pairs(top_pairs)
    p20 = piece(l2, "M", fib20, l0, constant(BundlePiece("M", l2.component("M").complex, fib20).total, "m"), 1, "M>m", strata)
    moduli = {(2, 1): ModuliBundle(2, 1, [p21]), (1, 0): ModuliBundle(1, 0, pieces10), (2, 0): ModuliBundle(2, 0, [p20])}
    return FlowCategory(name, 2, {0: l0, 1: l1, 2: l2}, moduli)


def torus_morse_smale() -> FlowCategory:
    crit1 = [("a", ("al1", "al2"), ("be1", "be2")), ("b", ("ga1", "ga2"), ("de1", "de2"))]
    pairs = [
        (("al1", "be1"), ("al1", "be2")),
        (("al2", "be2"), ("al2", "be1")),
        (("ga1", "de1"), ("ga1", "de2")),
        (("ga2", "de2"), ("ga2", "de1")),
    ]
    return morse_smale("torus-morse-smale", crit1, pairs)


def three_level() -> FlowCategory:
    crit1 = [("a", ("al1", "al2"), ("be1", "be2"))]
    pairs = [(("al1", "be1"), ("al1", "be2")), (("al2", "be2"), ("al2", "be1"))]
    return morse_smale("three-level", crit1, pairs)


# -- continuations -----------------------------------------------------------------------

def continuation_doc(name, source, target, bundles) -> dict:
    return {"name": name, "source": f"{source}.json", "target": f"{target}.json", "bundles": dump_bundles(bundles)}


def identity_doc(fc: FlowCategory) -> dict:
    cd = identity_continuation(fc)
    return continuation_doc(f"identity-{fc.name}", fc.name, fc.name, cd.operator.bundles)


def z2_to_neg(a: FlowCategory, b: FlowCategory) -> dict:
    fib = point("u")
    p00 = piece(a.levels[0], "B0", fib, b.levels[0], {(v, "u"): {"n": 1} for v in ("v0", "v1")}, 1, "B0>n")
    assign = {("n", "w0"): {"v0": 1}, ("n", "w1"): {"v1": 1}, ("n", "g0"): {"e0": 1}, ("n", "g1"): {"e1": 1}}
    p21 = piece(a.levels[2], "n", loop(), b.levels[1], assign, 1, "n>B1")
    bundles = {(0, 0): ModuliBundle(0, 0, [p00]), (2, 1): ModuliBundle(2, 1, [p21])}
    return continuation_doc("sphere-z2-to-sphere-neg-z2", a.name, b.name, bundles)


def neg_to_z2(b: FlowCategory, a: FlowCategory) -> dict:
    fib = point("u")
    pn = piece(b.levels[0], "n", fib, a.levels[0], {("n", "u"): {"v0": 1}}, 1, "n>B0")
    ps = piece(b.levels[0], "s", fib, a.levels[0], {("s", "u"): {"v0": 1}}, 1, "s>B0")
    pts = [("x", "e0", 1), ("y", "e0", 1)]
    p12 = local(b.levels[1], "B1", fib, pts, a.levels[2], {("x", "u"): {"n": 1}, ("y", "u"): {"s": 1}}, "B1>2")
    bundles = {(0, 0): ModuliBundle(0, 0, [pn, ps]), (1, 2): ModuliBundle(1, 2, [p12])}
    return continuation_doc("sphere-neg-z2-to-sphere-z2", b.name, a.name, bundles)


def rotation_doc(fc: FlowCategory) -> dict:
    rot = {"v0": "v1", "v1": "v0", "e0": "e1", "e1": "e0"}
    lv = fc.levels[0]
    p = piece(lv, "S", point("u"), lv, {(c, "u"): {rot[c]: 1} for c in rot}, 1, "rot")
    return continuation_doc(f"rotation-{fc.name}", fc.name, fc.name, {(0, 0): ModuliBundle(0, 0, [p])})


def homotopy_doc(fc: FlowCategory) -> dict:
    rot = {"v0": "v1", "v1": "v0", "e0": "e1", "e1": "e0"}
    lv = fc.levels[0]
    fib = interval()
    assign = {("v0", "a"): {"e0": 1}, ("v1", "a"): {"e1": 1}}
    for c in rot:
        assign[(c, "a0")] = {c: 1}
        assign[(c, "a1")] = {rot[c]: 1}
    strata = [Stratum("a0", 0, "u", "u", "F21-F42"), Stratum("a1", 0, "u", "u", "F31-F43")]
    p = piece(lv, "S", fib, lv, assign, 1, "H", strata)
    ident = f"identity-{fc.name}.json"
    return {
        "name": f"homotopy-{fc.name}",
        "continuations": {"F21": ident, "F31": ident, "F42": ident, "F43": f"rotation-{fc.name}.json"},
        "bundles": dump_bundles({(0, 0): ModuliBundle(0, 0, [p])}),
    }


def twisted_doc(fc: FlowCategory) -> dict:
    """Identity on three-level plus a 2 -> 1 interval family whose ends are broken continuation flows."""
    cd = identity_continuation(fc)
    l1, l2 = fc.levels[1], fc.levels[2]
    fib = intervals("I", "J")
    strata = [
        Stratum("Ia0", 1, "al1", "u", "left"),
        Stratum("Ia1", 2, "u", "al1", "right"),
        Stratum("Ja0", 2, "u", "al2", "right"),
        Stratum("Ja1", 1, "al2", "u", "left"),
    ]
    total = BundlePiece("M", l2.component("M").complex, fib).total
    p = piece(l2, "M", fib, l1, constant(total, "a"), 1, "M>a", strata)
    bundles = dict(cd.operator.bundles)
    bundles[(2, 1)] = ModuliBundle(2, 1, [p])
    return continuation_doc(f"twisted-{fc.name}", fc.name, fc.name, bundles)


def main(out: Path = OUT) -> None:
    out.mkdir(parents=True, exist_ok=True)
    cats = [sphere_z2(), sphere_neg_z2(), sphere_morse(), torus_constant(), torus_morse_smale(), three_level(), circle_constant()]
    docs = {}
    for fc in cats:
        docs[fc.name] = dump_flow_category(fc)
        docs[f"identity-{fc.name}"] = identity_doc(fc)
    by = {fc.name: fc for fc in cats}
    docs["sphere-z2-to-sphere-neg-z2"] = z2_to_neg(by["sphere-z2"], by["sphere-neg-z2"])
    docs["sphere-neg-z2-to-sphere-z2"] = neg_to_z2(by["sphere-neg-z2"], by["sphere-z2"])
    docs["rotation-circle-constant"] = rotation_doc(by["circle-constant"])
    docs["homotopy-circle-constant"] = homotopy_doc(by["circle-constant"])
    docs["twisted-three-level"] = twisted_doc(by["three-level"])
    for name, doc in docs.items():
        (out / f"{name}.json").write_text(dumps(doc))
    print(f"wrote {len(docs)} fixtures to {out}", file=sys.stderr)


if __name__ == "__main__":
    main()
