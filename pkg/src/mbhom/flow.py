"""Critical levels, moduli bundles and the validators that make a flow category usable.

A ``FlowOperator`` is the common shape of internal moduli (shift -1),
continuation data (shift 0) and homotopy data (shift +1): bundles from levels
of a source category to levels of a target category.  Applying one to a cell
pulls the cell back along each piece and pushes the result through the
piece's endpoint map.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Hashable, Iterable

from .algebra import IntMatrix
from .chains import FormalChain, ValidationReport, _sort_key
from .cubical import Cubulation
from .fibered import BundlePiece, LocalPiece, Piece, pullback


class StrataMismatch(ValueError):
    def __init__(self, detail: str):
        super().__init__(f"StrataMismatch: {detail}")


@dataclass(frozen=True)
class Stratum:
    """Label of a fiber-boundary cell as a cell of a fibered product.

    ``left_cell`` lives in a fiber of the bundle entering level ``via_index``
    and ``right_cell`` in a fiber of the bundle leaving it.  ``family`` picks
    which pair of operators the product comes from when there is a choice.
    """

    fiber_boundary_cell: Hashable
    via_index: int
    left_cell: Hashable
    right_cell: Hashable
    family: str = ""


@dataclass
class Component:
    id: str
    complex: Cubulation

    @property
    def dim(self) -> int:
        return self.complex.dim


@dataclass
class CriticalLevel:
    index: int
    components: list[Component] = field(default_factory=list)

    @cached_property
    def complex(self) -> Cubulation:
        cells: dict = {}
        for comp in self.components:
            cells.update(comp.complex.cells)
        return Cubulation(cells, None, f"B_{self.index}")

    @cached_property
    def _owner(self) -> dict[Hashable, Component]:
        return {cid: comp for comp in self.components for cid in comp.complex.cells}

    def component(self, cid: str) -> Component:
        for comp in self.components:
            if comp.id == cid:
                return comp
        raise KeyError(cid)

    def owner(self, cell: Hashable) -> Component:
        return self._owner[cell]

    def generators(self, p: int) -> list[tuple[str, Hashable]]:
        """(component id, cell id) of p-cells, ordered by component then cell."""
        out = []
        for comp in sorted(self.components, key=lambda c: c.id):
            out += [(comp.id, cid) for cid in comp.complex.cells_of_dim(p)]
        return out

    @property
    def dim(self) -> int:
        return max((c.dim for c in self.components), default=-1)


@dataclass
class ModuliBundle:
    source: int
    target: int
    pieces: list[Piece] = field(default_factory=list)

    def piece_with_fiber_cell(self, cid: Hashable, base_component: str | None = None) -> Piece | None:
        for p in self.pieces:
            if cid in p.fiber.cells and (base_component is None or p.base_component == base_component):
                return p
        return None

    def over(self, component: str) -> list[Piece]:
        return [p for p in self.pieces if p.base_component == component]


def restrict(chain: FormalChain, cells: Iterable[Hashable] | dict) -> FormalChain:
    return FormalChain({c: v for c, v in chain.items() if c in cells}, chain.degree)


def fiber_boundary(piece: Piece) -> FormalChain:
    return piece.fiber.chain_boundary(piece.fiber.fundamental)


def sign(n: int) -> int:
    return -1 if n % 2 else 1


@dataclass
class FlowOperator:
    source: dict[int, CriticalLevel]
    target: dict[int, CriticalLevel]
    bundles: dict[tuple[int, int], ModuliBundle]
    shift: int
    name: str = ""

    def apply_piece(self, piece: Piece, chain: FormalChain, fiber_chain: FormalChain | None = None) -> FormalChain:
        sub = restrict(chain, piece.base.cells)
        if not sub:
            return FormalChain((), None)
        dom = pullback(sub, piece, fiber_chain)
        return piece.endpoint.apply(dom.chain)

    def apply_bundle(self, bundle: ModuliBundle, chain: FormalChain) -> FormalChain:
        out = FormalChain()
        for piece in bundle.pieces:
            out = out + self.apply_piece(piece, chain)
        return out

    def apply(self, i: int, chain: FormalChain) -> dict[int, FormalChain]:
        """Images of a chain on source level ``i``, per target level."""
        out = {}
        for (s, t), bundle in sorted(self.bundles.items()):
            if s == i:
                out[t] = self.apply_bundle(bundle, chain)
        return out

    def block(self, i: int, t: int, p: int) -> IntMatrix:
        """Matrix from p-cells of source level i to cells on target level t."""
        src = self.source[i].generators(p) if i in self.source else []
        q = p + self.shift + i - t
        dst = self.target[t].generators(q) if t in self.target and q >= 0 else []
        row = {cid: r for r, (_, cid) in enumerate(dst)}
        m = IntMatrix.zeros(len(dst), len(src))
        bundle = self.bundles.get((i, t))
        if bundle is None or not dst:
            return m
        for j, (_, cid) in enumerate(src):
            img = self.apply_bundle(bundle, FormalChain({cid: 1}, p))
            for tc, c in img.items():
                m[row[tc], j] += c
        return m

    # -- strata ------------------------------------------------------------

    def beta(self, i: int, piece: Piece) -> int:
        """Sign of the fiber-boundary term in d0 X -+ X d0 for a piece over level i."""
        s = sign(i + self.shift)
        return s * sign(piece.base.dim) if isinstance(piece, LocalPiece) else s

    def landing(self, piece: Piece, fiber_cell: Hashable) -> str | None:
        """Component of the target level hit by ``base x fiber_cell``."""
        v = fiber_cell
        while piece.fiber.cells[v].dim > 0:
            v = piece.fiber.cells[v].boundary[0][3]
        if isinstance(piece, LocalPiece):
            if not piece.points:
                return None
            base_v = piece.points[0][0]
        else:
            base_v = piece.base.cells_of_dim(0)[0]
        img = piece.endpoint.image((base_v, v))
        if not img:
            return None
        level = self.target[piece_target(self, piece)]
        return level.owner(next(iter(img))).id


def piece_target(op: FlowOperator, piece: Piece) -> int:
    for (s, t), b in op.bundles.items():
        if any(p is piece for p in b.pieces):
            return t
    raise KeyError(piece.id)


@dataclass
class FlowCategory:
    name: str
    top_index: int
    levels: dict[int, CriticalLevel]
    moduli: dict[tuple[int, int], ModuliBundle] = field(default_factory=dict)

    @cached_property
    def operator(self) -> FlowOperator:
        return FlowOperator(self.levels, self.levels, self.moduli, -1, self.name)

    @property
    def is_empty(self) -> bool:
        return not any(lv.components for lv in self.levels.values())

    def b(self, i: int, component: str) -> int:
        return self.levels[i].component(component).dim


# -- strata resolution and checks -----------------------------------------------

@dataclass(frozen=True)
class Family:
    sign: int
    left: FlowOperator
    right: FlowOperator


@dataclass(frozen=True)
class ResolvedStratum:
    piece: Piece
    stratum: Stratum
    coeff: int        # coefficient of the cell in d[F]
    left: Piece
    left_coeff: int   # coefficient of left_cell in [F_left]
    right: Piece
    right_coeff: int
    family: Family

    @property
    def key(self) -> tuple:
        st = self.stratum
        return (st.via_index, st.family, self.left.id, st.left_cell, self.right.id, st.right_cell)


def resolve_strata(op: FlowOperator, i: int, t: int, families: dict[str, Family]) -> list[ResolvedStratum]:
    """Match every fiber-boundary cell of bundle (i, t) with its label."""
    bundle = op.bundles.get((i, t))
    if bundle is None:
        return []
    out = []
    for piece in bundle.pieces:
        bd = fiber_boundary(piece)
        labels: dict = {}
        for st in piece.strata:
            if st.fiber_boundary_cell in labels:
                raise StrataMismatch(f"piece {piece.id!r}: cell {st.fiber_boundary_cell!r} labelled twice")
            labels[st.fiber_boundary_cell] = st
        for cid in bd:
            if cid not in labels:
                raise StrataMismatch(f"piece {piece.id!r}: boundary cell {cid!r} has no stratum label")
        for cid, st in labels.items():
            if cid not in bd:
                raise StrataMismatch(f"piece {piece.id!r}: labelled cell {cid!r} is not on the fiber boundary")
            fam = families.get(st.family)
            if fam is None:
                raise StrataMismatch(f"piece {piece.id!r}: unknown stratum family {st.family!r}")
            n = st.via_index
            lb = fam.left.bundles.get((i, n))
            rb = fam.right.bundles.get((n, t))
            lp = lb and lb.piece_with_fiber_cell(st.left_cell, piece.base_component)
            rp = None
            if rb and lp:
                land = fam.left.landing(lp, st.left_cell) if st.left_cell in lp.fiber.cells else None
                rp = rb.piece_with_fiber_cell(st.right_cell, land) or rb.piece_with_fiber_cell(st.right_cell)
            if not lp:
                raise StrataMismatch(f"piece {piece.id!r}: left cell {st.left_cell!r} not found over ({i}, {n})")
            if not rp:
                raise StrataMismatch(f"piece {piece.id!r}: right cell {st.right_cell!r} not found over ({n}, {t})")
            c1 = lp.fiber.fundamental[st.left_cell]
            c2 = rp.fiber.fundamental[st.right_cell]
            if not c1 or not c2:
                raise StrataMismatch(f"piece {piece.id!r}: label of {cid!r} names a cell outside a fundamental chain")
            out.append(ResolvedStratum(piece, st, bd[cid], lp, c1, rp, c2, fam))
    return out


def strata_boundary(op: FlowOperator, i: int, t: int, families: dict[str, Family]) -> FormalChain:
    """Boundary of the (i, t) moduli data written on labelled fibered components.

    A bundle piece contributes (-1)^b * a * c_g on the label of each boundary
    cell g, a local piece a * c_g, where a is the piece's orientation sign.
    """
    out: dict = {}
    for r in resolve_strata(op, i, t, families):
        gamma = 1 if isinstance(r.piece, LocalPiece) else sign(r.piece.base.dim)
        out[(r.piece.base_component,) + r.key] = out.get((r.piece.base_component,) + r.key, 0) + gamma * r.piece.fiber_sign() * r.coeff
    return FormalChain(out, None)


def expected_strata_boundary(op: FlowOperator, i: int, t: int, families: dict[str, Family]) -> FormalChain:
    """The signed sum of fibered products that the boundary must equal.

    Only products of bundle pieces are enumerated; strata touching local
    pieces are checked on chains instead.
    """
    out: dict = {}
    bundle = op.bundles.get((i, t))
    if bundle is None:
        return FormalChain()
    comps = {p.base_component for p in bundle.pieces if isinstance(p, BundlePiece)}
    for name, fam in sorted(families.items()):
        for (s, n), lb in sorted(fam.left.bundles.items()):
            rb = fam.right.bundles.get((n, t))
            if s != i or rb is None:
                continue
            for lp in lb.pieces:
                if lp.base_component not in comps or not isinstance(lp, BundlePiece):
                    continue
                b = lp.base.dim
                for f1, c1 in lp.fiber.fundamental.items():
                    land = fam.left.landing(lp, f1)
                    for rp in rb.pieces:
                        if rp.base_component != land or not isinstance(rp, BundlePiece):
                            continue
                        for f2, c2 in rp.fiber.fundamental.items():
                            key = (lp.base_component, n, name, lp.id, f1, rp.id, f2)
                            val = -fam.sign * sign(i + b + op.shift) * lp.fiber_sign() * rp.fiber_sign() * c1 * c2
                            out[key] = out.get(key, 0) + val
    return FormalChain(out, None)


def check_strata_on_chains(op: FlowOperator, i: int, t: int, families: dict[str, Family]) -> ValidationReport:
    """Each labelled stratum, pushed to the target, cancels the composite it names.

    For a piece P over level i and a base cell s this is
    beta * c_g * E_P(s x g) + sign * c1 * c2 * E_R((E_L(s x f1)) x f2) = 0.
    """
    report = ValidationReport()
    for r in resolve_strata(op, i, t, families):
        piece, st = r.piece, r.stratum
        beta = op.beta(i, piece)
        for p in range(piece.base.dim + 1):
            for s in piece.base.cells_of_dim(p):
                sigma = FormalChain({s: 1}, p)
                lhs = op.apply_piece(piece, sigma, FormalChain({st.fiber_boundary_cell: 1}))
                mid = r.family.left.apply_piece(r.left, sigma, FormalChain({st.left_cell: 1}))
                comp = r.family.right.apply_piece(r.right, mid, FormalChain({st.right_cell: 1})) if mid else FormalChain()
                total = beta * r.coeff * lhs + r.family.sign * r.left_coeff * r.right_coeff * comp
                if total:
                    report.add(
                        f"bundle ({i},{t}) piece {piece.id!r}: stratum {st.fiber_boundary_cell!r} over {s!r} "
                        f"does not match its label (residual {total!r})"
                    )
    return report


def validate_strata(op: FlowOperator, families: dict[str, Family]) -> ValidationReport:
    report = ValidationReport()
    for (i, t) in sorted(op.bundles):
        try:
            got = strata_boundary(op, i, t, families)
            want = expected_strata_boundary(op, i, t, families)
        except StrataMismatch as e:
            report.add(str(e))
            continue
        bundle_keys = {k for k in got if _all_bundles(op, families, i, t, k)}
        got_b = FormalChain({k: v for k, v in got.items() if k in bundle_keys})
        if got_b != want:
            for k in sorted(set(got_b) | set(want), key=_sort_key):
                if got_b[k] != want[k]:
                    report.add(f"bundle ({i},{t}): stratum {k!r} has coefficient {got_b[k]}, expected {want[k]}")
        report.extend(check_strata_on_chains(op, i, t, families))
    return report


def _all_bundles(op: FlowOperator, families: dict[str, Family], i: int, t: int, key: tuple) -> bool:
    comp, n, fam, lid, _, rid, _ = key
    f = families[fam]
    lp = next(p for p in f.left.bundles[(i, n)].pieces if p.id == lid)
    rp = next(p for p in f.right.bundles[(n, t)].pieces if p.id == rid)
    owners = [p for p in op.bundles[(i, t)].pieces if p.base_component == comp]
    return isinstance(lp, BundlePiece) and isinstance(rp, BundlePiece) and all(isinstance(p, BundlePiece) for p in owners)


# -- validators on a flow category ------------------------------------------------

def moduli_families(fc: FlowCategory) -> dict[str, Family]:
    return {"": Family(1, fc.operator, fc.operator)}


def validate_weak_self_indexing(fc: FlowCategory) -> ValidationReport:
    report = ValidationReport()
    for (i, t) in sorted(fc.moduli):
        if i <= t:
            report.add(f"weak self-indexing: bundle {i}->{t} does not lower the index")
    return report


def validate_operator_shape(op: FlowOperator) -> ValidationReport:
    """Bases, targets, degrees and endpoint maps of every piece."""
    report = ValidationReport()
    for (i, t), bundle in sorted(op.bundles.items()):
        if i not in op.source:
            report.add(f"bundle ({i},{t}): source level {i} does not exist")
            continue
        if t not in op.target:
            report.add(f"bundle ({i},{t}): target level {t} does not exist")
            continue
        for piece in bundle.pieces:
            try:
                comp = op.source[i].component(piece.base_component)
            except KeyError:
                report.add(f"bundle ({i},{t}) piece {piece.id!r}: unknown base component {piece.base_component!r}")
                continue
            b = comp.dim
            want = b + i - t + op.shift
            if piece.total_degree != want:
                report.add(
                    f"bundle ({i},{t}) piece {piece.id!r}: degree {piece.total_degree}, expected {want} "
                    f"(fiber dimension {piece.fiber.dim}, expected {want - (0 if isinstance(piece, LocalPiece) else b)})"
                )
            if piece.fiber.fundamental is None:
                report.add(f"bundle ({i},{t}) piece {piece.id!r}: fiber has no fundamental chain")
            fv = piece.fiber.validate(closed=False)
            for v in fv.violations:
                report.add(f"bundle ({i},{t}) piece {piece.id!r} fiber: {v}")
            if piece.endpoint is None:
                report.add(f"bundle ({i},{t}) piece {piece.id!r}: missing endpoint map")
                continue
            for cid in piece.total.cells_of_dim(0):
                img = piece.endpoint.image(cid)
                if len(img) != 1 or next(iter(img.values())) != 1:
                    report.add(f"bundle ({i},{t}) piece {piece.id!r}: vertex {cid!r} must map to a single vertex")
    return report


def validate_degrees(fc: FlowCategory) -> ValidationReport:
    report = validate_operator_shape(fc.operator)
    for (i, t), bundle in sorted(fc.moduli.items()):
        for piece in bundle.pieces:
            if not isinstance(piece, BundlePiece):
                report.add(f"bundle ({i},{t}) piece {piece.id!r}: moduli pieces must be bundles over a whole component")
    return report


def moduli_boundary(fc: FlowCategory, i: int, j: int) -> FormalChain:
    """Boundary of M(B_i, B_{i-j}) as a signed chain of labelled fibered components.

    Keys are (base component, n, family, left piece, left cell, right piece,
    right cell).  Zero when j = 1 or when the fibers are closed.
    """
    return strata_boundary(fc.operator, i, i - j, moduli_families(fc))


def validate_moduli_boundary(fc: FlowCategory) -> ValidationReport:
    return validate_strata(fc.operator, moduli_families(fc))


def validate_moduli_d_squared(fc: FlowCategory) -> ValidationReport:
    """Cancellation of the broken-flow terms in d o d on every moduli space.

    Checked on the concrete data: each stratum label is compared with the
    composite it names, and the labels must account for every composite.
    Both together give sum_q d_q d_{j-q} = 0 on every base cell.
    """
    report = validate_moduli_boundary(fc)
    if not report.ok:
        return report
    op = fc.operator
    for i, level in sorted(fc.levels.items()):
        for p in range(level.dim + 1):
            for comp, s in level.generators(p):
                sigma = FormalChain({s: 1}, p)
                for t in sorted(fc.levels):
                    if t >= i - 1:
                        continue
                    total = FormalChain()
                    for (a, n), bundle in fc.moduli.items():
                        if a != i or not t < n < i:
                            continue
                        mid = op.apply_bundle(bundle, sigma)
                        second = fc.moduli.get((n, t))
                        if second is not None and mid:
                            total = total + op.apply_bundle(second, mid)
                    bundle = fc.moduli.get((i, t))
                    if bundle is not None:
                        for piece in bundle.pieces:
                            if piece.base_component == comp:
                                total = total + op.beta(i, piece) * op.apply_piece(piece, sigma, fiber_boundary(piece))
                    if total:
                        report.add(f"d^2 of moduli: broken flows from {s!r} on level {i} to level {t} leave {total!r}")
    return report


def validate_flow_category(fc: FlowCategory) -> ValidationReport:
    report = ValidationReport()
    for i, level in sorted(fc.levels.items()):
        if not 0 <= i <= fc.top_index:
            report.add(f"level {i} outside 0..{fc.top_index}")
        seen: set = set()
        for comp in level.components:
            for v in comp.complex.validate(closed=True).violations:
                report.add(f"level {i} component {comp.id!r}: {v}")
            if comp.complex.fundamental is None:
                report.add(f"level {i} component {comp.id!r}: missing fundamental chain")
            if len(comp.complex.components) > 1:
                report.add(f"level {i} component {comp.id!r}: cells are not connected")
            dup = seen & set(comp.complex.cells)
            if dup:
                report.add(f"level {i}: cell ids {sorted(map(str, dup))} used by two components")
            seen |= set(comp.complex.cells)
    report.extend(validate_weak_self_indexing(fc))
    if not report.ok:
        return report
    report.extend(validate_degrees(fc))
    if not report.ok:
        return report
    report.extend(validate_moduli_d_squared(fc))
    return report
