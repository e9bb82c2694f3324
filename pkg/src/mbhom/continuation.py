"""Continuation maps between total complexes, chain homotopies between them, and
the representing chains that turn fibered domains into cubical chains.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .algebra import GradedBoundaryMatrices, InducedMap, IntMatrix, NotAChainMap, induced_map_on_homology
from .chains import FormalChain, ValidationReport
from .complex import MorseBottComplex, assemble, max_degree
from .cubical import cellular_chain_map, point
from .fibered import BundlePiece, LocalPiece, Piece, pullback
from .flow import (
    Family,
    FlowCategory,
    FlowOperator,
    ModuliBundle,
    StrataMismatch,
    fiber_boundary,
    validate_operator_shape,
    validate_strata,
)


class NoFundamentalChain(ValueError):
    def __init__(self, domain: object):
        super().__init__(f"NoFundamentalChain: {domain!r}")


@dataclass
class ContinuationData:
    name: str
    source: FlowCategory
    target: FlowCategory
    operator: FlowOperator

    def families(self) -> dict[str, Family]:
        return {
            "left": Family(-1, self.source.operator, self.operator),
            "right": Family(1, self.operator, self.target.operator),
        }


@dataclass
class HomotopyData:
    """H from f1 to f4 together with the square F43 F31 and F42 F21 it connects."""

    name: str
    f1: FlowCategory
    f4: FlowCategory
    F21: ContinuationData
    F31: ContinuationData
    F42: ContinuationData
    F43: ContinuationData
    operator: FlowOperator

    def families(self) -> dict[str, Family]:
        return {
            "F21-F42": Family(1, self.F21.operator, self.F42.operator),
            "F31-F43": Family(-1, self.F31.operator, self.F43.operator),
            "f1-H": Family(1, self.f1.operator, self.operator),
            "H-f4": Family(1, self.operator, self.f4.operator),
        }


def identity_continuation(fc: FlowCategory, extra: dict[tuple[int, int], ModuliBundle] | None = None) -> ContinuationData:
    """Point fibers over every component, each mapping a cell to itself.

    ``extra`` adds lower-order bundles (i -> j with j != i) supplied by the caller.
    """
    bundles: dict = {}
    fib = point("u")
    for i, level in sorted(fc.levels.items()):
        pieces = []
        for comp in sorted(level.components, key=lambda c: c.id):
            base = comp.complex
            piece = BundlePiece(comp.id, base, fib, 1, None, f"id:{comp.id}")
            assign = {(c, "u"): {c: 1} for c in base.cells}
            piece.endpoint = cellular_chain_map(piece.total, level.complex, assign)
            pieces.append(piece)
        if pieces:
            bundles[(i, i)] = ModuliBundle(i, i, pieces)
    for key, b in (extra or {}).items():
        bundles[key] = b
    op = FlowOperator(fc.levels, fc.levels, bundles, 0, f"id:{fc.name}")
    return ContinuationData(f"identity-{fc.name}", fc, fc, op)


# -- representing chains -----------------------------------------------------------

Domain = tuple[tuple[int, int], Hashable, Hashable]  # ((i, t), piece id, base cell)


@dataclass
class RepresentingChainSystem:
    """Chosen cubical chain s_P on each piece's total complex for every domain P = sigma x piece."""

    operator: FlowOperator
    chains: dict[Domain, FormalChain] = field(default_factory=dict)

    def piece(self, d: Domain) -> Piece:
        for p in self.operator.bundles[d[0]].pieces:
            if p.id == d[1]:
                return p
        raise KeyError(d)

    def chain(self, d: Domain) -> FormalChain:
        return self.chains.get(d, FormalChain())

    def boundary_terms(self, d: Domain) -> dict[Domain, int]:
        """Domains P_k with their coefficients n_k in the boundary of P coming from the base."""
        piece = self.piece(d)
        return {(d[0], d[1], c): v for c, v in piece.base.boundary(d[2]).items()}

    def cofaces(self, d: Domain) -> dict[Domain, int]:
        piece = self.piece(d)
        out = {}
        for cid, cell in piece.base.cells.items():
            for s, _, _, t in cell.boundary:
                if t == d[2]:
                    key = (d[0], d[1], cid)
                    out[key] = out.get(key, 0) + s
        return {k: v for k, v in out.items() if v}


def _domains(op: FlowOperator) -> list[tuple[Domain, Piece]]:
    out = []
    for key, bundle in sorted(op.bundles.items()):
        for piece in bundle.pieces:
            for p in range(piece.base.dim + 1):
                for cid in piece.base.cells_of_dim(p):
                    out.append(((key, piece.id, cid), piece))
    return out


def build_representing_chains(op: FlowOperator) -> RepresentingChainSystem:
    """Signed sums of top product cells, built degree by degree over the base cells."""
    system = RepresentingChainSystem(op)
    for d, piece in _domains(op):
        if piece.fiber.fundamental is None:
            raise NoFundamentalChain(d)
        p = piece.base.cells[d[2]].dim
        system.chains[d] = pullback(FormalChain({d[2]: 1}, p), piece).chain
    return system


def perturb(system: RepresentingChainSystem, d: Domain, w: FormalChain) -> RepresentingChainSystem:
    """Add dw to s_P and n * w to every s_Q with P in dQ at coefficient n; compatibility is kept."""
    piece = system.piece(d)
    chains = dict(system.chains)
    chains[d] = system.chain(d) + piece.total.chain_boundary(w)
    for q, n in system.cofaces(d).items():
        chains[q] = system.chain(q) + n * w
    return RepresentingChainSystem(system.operator, chains)


def check_compatibility(system: RepresentingChainSystem) -> ValidationReport:
    """ds_P = sum n_k s_{P_k} + (the part of P lying over the fiber boundary)."""
    report = ValidationReport()
    for d, piece in _domains(system.operator):
        p = piece.base.cells[d[2]].dim
        lhs = piece.total.chain_boundary(system.chain(d))
        rhs = FormalChain()
        for q, n in system.boundary_terms(d).items():
            rhs = rhs + n * system.chain(q)
        over = pullback(FormalChain({d[2]: 1}, p), piece, fiber_boundary(piece)).chain
        sgn = 1 if isinstance(piece, LocalPiece) or p % 2 == 0 else -1
        rhs = rhs + sgn * over
        if lhs != rhs:
            report.add(f"domain {d!r}: boundary of representing chain does not match")
    return report


# -- maps between total complexes ------------------------------------------------------

def operator_matrices(
    op: FlowOperator,
    source: MorseBottComplex,
    target: MorseBottComplex,
    system: RepresentingChainSystem | None = None,
) -> dict[int, IntMatrix]:
    """Matrices of the operator from degree k to degree k + shift."""
    if system is None:
        system = build_representing_chains(op)
    out = {}
    for k, cols in source.generators.items():
        rows = target.generators.get(k + op.shift, [])
        row = {g: r for r, g in enumerate(rows)}
        m = IntMatrix.zeros(len(rows), len(cols))
        for c, (i, comp, cell) in enumerate(cols):
            for (s, t), bundle in op.bundles.items():
                if s != i:
                    continue
                for piece in bundle.over(comp):
                    img = piece.endpoint.apply(system.chain(((s, t), piece.id, cell)))
                    level = op.target[t]
                    for tc, v in img.items():
                        g = (t, level.owner(tc).id, tc)
                        if g not in row:
                            raise ValueError(f"image {g!r} lies outside degree {k + op.shift}")
                        m[row[g], c] += v
        out[k] = m
    return out


def _degree_range(*fcs: FlowCategory) -> int:
    return max((max_degree(fc) for fc in fcs), default=-1)


def paired_complexes(src: FlowCategory, dst: FlowCategory, extra: int = 0) -> tuple[MorseBottComplex, MorseBottComplex]:
    k = _degree_range(src, dst) + extra
    return assemble(src, k), assemble(dst, k)


def chain_map_from_continuation(
    cd: ContinuationData, system: RepresentingChainSystem | None = None
) -> dict[int, IntMatrix]:
    src, dst = paired_complexes(cd.source, cd.target)
    return operator_matrices(cd.operator, src, dst, system)


def continuation_boundary_validate(cd: ContinuationData) -> ValidationReport:
    """Shapes and degrees of every piece, then the left and right strata of each fiber boundary."""
    report = validate_operator_shape(cd.operator)
    for (i, j), bundle in sorted(cd.operator.bundles.items()):
        for piece in bundle.pieces:
            b = cd.source.levels[i].component(piece.base_component).dim if i in cd.source.levels else 0
            if b + i < j:
                report.add(f"bundle ({i},{j}) piece {piece.id!r}: nonempty although b + i < j")
    if not report.ok:
        return report
    return report.extend(validate_strata(cd.operator, cd.families()))


def verify_chain_map(
    f: dict[int, IntMatrix], source: GradedBoundaryMatrices, target: GradedBoundaryMatrices
) -> bool:
    ks = set(source.degrees) | set(target.degrees) | set(f)
    for k in sorted(ks):
        fk = f.get(k, IntMatrix.zeros(target.dim(k), source.dim(k)))
        fk1 = f.get(k - 1, IntMatrix.zeros(target.dim(k - 1), source.dim(k - 1)))
        if fk.shape != (target.dim(k), source.dim(k)) or fk1.shape != (target.dim(k - 1), source.dim(k - 1)):
            return False
        if target.matrix_at(k) @ fk != fk1 @ source.matrix_at(k):
            return False
    return True


def homotopy_validate(hd: HomotopyData) -> ValidationReport:
    report = validate_operator_shape(hd.operator)
    if not report.ok:
        return report
    return report.extend(validate_strata(hd.operator, hd.families()))


def verify_chain_homotopy(hd: HomotopyData) -> bool:
    """F43 F31 - F42 F21 = dH + Hd on every degree, with H's strata consistent."""
    try:
        if not homotopy_validate(hd).ok:
            return False
    except StrataMismatch:
        return False
    c1, c4 = paired_complexes(hd.f1, hd.f4)
    c2 = assemble(hd.F21.target, max(c1.generators, default=-1))
    c3 = assemble(hd.F31.target, max(c1.generators, default=-1))
    f21 = operator_matrices(hd.F21.operator, c1, c2)
    f31 = operator_matrices(hd.F31.operator, c1, c3)
    f42 = operator_matrices(hd.F42.operator, c2, c4)
    f43 = operator_matrices(hd.F43.operator, c3, c4)
    h = operator_matrices(hd.operator, c1, c4)
    d1, d4 = c1.boundary, c4.boundary
    for k in c1.generators:
        lhs = f43[k] @ f31[k] - f42[k] @ f21[k]
        rows, cols = lhs.shape
        rhs = IntMatrix.zeros(rows, cols)
        if k + 1 in d4.dims or k in h:
            rhs = rhs + d4.matrix_at(k + 1) @ h.get(k, IntMatrix.zeros(d4.dim(k + 1), cols))
        if k - 1 in h:
            rhs = rhs + h[k - 1] @ d1.matrix_at(k)
        if lhs != rhs:
            return False
    return True


# -- independence on homology ---------------------------------------------------------

@dataclass
class IndependenceReport:
    forward: InducedMap
    backward: InducedMap
    composite_source_identity: bool
    composite_target_identity: bool
    chain_maps: tuple[bool, bool]
    homotopies: list[bool] = field(default_factory=list)

    @property
    def isomorphism(self) -> dict[int, bool]:
        return self.forward.isomorphism

    @property
    def ok(self) -> bool:
        return (
            all(self.chain_maps)
            and self.composite_source_identity
            and self.composite_target_identity
            and all(self.homotopies)
            and all(self.forward.isomorphism.values())
        )


def induced_map(cd: ContinuationData, system: RepresentingChainSystem | None = None) -> InducedMap:
    src, dst = paired_complexes(cd.source, cd.target)
    f = operator_matrices(cd.operator, src, dst, system)
    return induced_map_on_homology(f, src.boundary, dst.boundary)


def independence_check(
    cd_ab: ContinuationData, cd_ba: ContinuationData, homotopies: list[HomotopyData] | tuple = ()
) -> IndependenceReport:
    """Both composites induce the identity on homology; raises NotAChainMap on bad input."""
    a, b = paired_complexes(cd_ab.source, cd_ab.target)
    f = operator_matrices(cd_ab.operator, a, b)
    g = operator_matrices(cd_ba.operator, b, a)
    ok = (verify_chain_map(f, a.boundary, b.boundary), verify_chain_map(g, b.boundary, a.boundary))
    fwd = induced_map_on_homology(f, a.boundary, b.boundary)
    bwd = induced_map_on_homology(g, b.boundary, a.boundary)
    gf = {k: g[k] @ f[k] for k in f}
    fg = {k: f[k] @ g[k] for k in g}
    on_a = induced_map_on_homology(gf, a.boundary, a.boundary).is_identity()
    on_b = induced_map_on_homology(fg, b.boundary, b.boundary).is_identity()
    return IndependenceReport(fwd, bwd, on_a, on_b, ok, [verify_chain_homotopy(h) for h in homotopies])


__all__ = [
    "ContinuationData",
    "HomotopyData",
    "IndependenceReport",
    "NoFundamentalChain",
    "NotAChainMap",
    "RepresentingChainSystem",
    "build_representing_chains",
    "chain_map_from_continuation",
    "check_compatibility",
    "continuation_boundary_validate",
    "homotopy_validate",
    "identity_continuation",
    "independence_check",
    "induced_map",
    "operator_matrices",
    "paired_complexes",
    "perturb",
    "verify_chain_homotopy",
    "verify_chain_map",
]
