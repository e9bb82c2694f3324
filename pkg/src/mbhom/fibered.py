"""Fibered products: degrees, the signed boundary rule, pullbacks and associativity.

Bundles are disjoint unions of pieces.  A ``BundlePiece`` is a trivial bundle
B_c x F over a whole base component.  A ``LocalPiece`` is a finite set of
signed points sitting in the interiors of top cells of B_c, each carrying a
copy of F; it models moduli spaces whose beginning-point map is not onto.

Orientation convention.  For P1 -> B and P2 = B x F the convention sign
(-1)^{dim B * dim P2} combines with two reorderings when P1 x_B P2 is
identified with P1 x F: moving the normal factor (a copy of B, oriented as
the first factor of B x B) past F costs (-1)^{dim B * dim F}, and comparing
that normal orientation with the second-factor one costs (-1)^{dim B}.  The
product of the three is +1, see ``pullback_sign``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Hashable, Sequence

from .chains import BoundarySpec, FormalChain, chain_boundary
from .cubical import Cell, ChainMap, Cubulation, product


class NegativeDegree(ValueError):
    def __init__(self, p1: int, p2: int, b: int):
        super().__init__(f"NegativeDegree: {p1} + {p2} - {b} < 0")


class BaseMismatch(ValueError):
    def __init__(self, cell: Hashable, component: Hashable):
        super().__init__(f"BaseMismatch: {cell!r} is not a cell of base component {component!r}")
        self.cell = cell


def fibered_degree(p1: int, p2: int, b: int) -> int:
    d = p1 + p2 - b
    if d < 0:
        raise NegativeDegree(p1, p2, b)
    return d


def convention_sign(b: int, p2: int) -> int:
    return -1 if (b * p2) % 2 else 1


def pullback_sign(b: int, f: int) -> int:
    """Net sign identifying P x_B (B x F) with P x F."""
    reorder = -1 if (b * f) % 2 else 1
    normal = -1 if b % 2 else 1
    return convention_sign(b, b + f) * reorder * normal


# -- symbolic calculus -------------------------------------------------------

@dataclass(frozen=True)
class Fib:
    """Symbolic fibered product ``left x_B right`` with dim B = ``base``."""

    left: Hashable
    base: int
    right: Hashable


def sym_degree(t: Hashable, atom_degree: Callable[[Hashable], int]) -> int:
    if isinstance(t, Fib):
        return fibered_degree(sym_degree(t.left, atom_degree), sym_degree(t.right, atom_degree), t.base)
    return atom_degree(t)


class FiberedCalculus:
    """Formal fibered products over atoms whose boundaries come from a BoundarySpec."""

    def __init__(self, spec: BoundarySpec):
        self.spec = spec
        self._deg = {g.key: g.degree for g in spec.face_list}
        self._gid = {g.key: g for g in spec.face_list}

    def degree(self, t: Hashable) -> int:
        return sym_degree(t, self._deg.__getitem__)

    def atom_boundary(self, key: Hashable) -> FormalChain:
        g = self._gid[key]
        return chain_boundary(FormalChain.single(g, degree=g.degree), self.spec).map_keys(lambda h: h.key)

    def product(self, c1: FormalChain, c2: FormalChain, b: int) -> FormalChain:
        """Bilinear extension of x_B; zero if either factor is zero.

        Terms of negative expected dimension are empty and dropped.
        """
        out: dict = {}
        for t1, a in c1.items():
            for t2, c in c2.items():
                if self.degree(t1) + self.degree(t2) < b:
                    continue
                t = Fib(t1, b, t2)
                out[t] = out.get(t, 0) + a * c
        deg = None
        if c1.degree is not None and c2.degree is not None:
            deg = c1.degree + c2.degree - b
        return FormalChain(out, deg)

    def boundary_term(self, t: Hashable) -> FormalChain:
        if not isinstance(t, Fib):
            return self.atom_boundary(t)
        return fibered_boundary(
            FormalChain.single(t.left, degree=self.degree(t.left)),
            FormalChain.single(t.right, degree=self.degree(t.right)),
            t.base,
            self,
        )

    def boundary(self, c: FormalChain) -> FormalChain:
        out: dict = {}
        for t, a in c.items():
            for s, d in self.boundary_term(t).items():
                out[s] = out.get(s, 0) + a * d
        return FormalChain(out, None if c.degree is None else c.degree - 1)


def fibered_boundary(p1: FormalChain, p2: FormalChain, b: int, calc: FiberedCalculus) -> FormalChain:
    """d(P1 x_B P2) = dP1 x_B P2 + (-1)^{p1+b} P1 x_B dP2."""
    deg1 = p1.degree if p1.degree is not None else calc.degree(next(iter(p1))) if p1 else 0
    sign = -1 if (deg1 + b) % 2 else 1
    first = calc.product(calc.boundary(p1), p2, b)
    second = calc.product(p1, calc.boundary(p2), b)
    return first + sign * second


def flatten(t: Hashable) -> tuple:
    """Word (a1, b1, a2, b2, a3, ...) of a bracketed product."""
    if isinstance(t, Fib):
        return flatten(t.left) + (t.base,) + flatten(t.right)
    return (t,)


def word_is_empty(word: tuple, atom_degree: Callable[[Hashable], int]) -> bool:
    """A flattened product is empty if some run of consecutive factors is.

    In general position a fibered product of negative expected dimension is
    empty, and so is anything built from it, whatever the bracketing.
    """
    atoms, bases = word[0::2], word[1::2]
    degs = [atom_degree(a) for a in atoms]
    for i in range(len(atoms)):
        d = degs[i]
        for j in range(i + 1, len(atoms)):
            d += degs[j] - bases[j - 1]
            if d < 0:
                return True
    return False


def canonical(c: FormalChain, atom_degree: Callable[[Hashable], int] | None = None) -> tuple:
    """Byte-comparable canonical form of a chain of bracketed products."""
    acc: dict = {}
    for t, a in c.items():
        w = flatten(t)
        if atom_degree is not None and word_is_empty(w, atom_degree):
            continue
        acc[w] = acc.get(w, 0) + a
    return tuple(sorted(((repr(w), a) for w, a in acc.items() if a)))


# -- concrete pieces and pullbacks ---------------------------------------------

@dataclass
class BundlePiece:
    """Trivial bundle base x fiber over one base component."""

    base_component: Hashable
    base: Cubulation
    fiber: Cubulation
    orientation: int = 1
    endpoint: ChainMap | None = None
    id: Hashable = None
    strata: tuple = ()

    kind = "bundle"

    @property
    def total_degree(self) -> int:
        return self.base.dim + self.fiber.dim

    @cached_property
    def total(self) -> Cubulation:
        return product(self.base, self.fiber)

    def fiber_sign(self) -> int:
        return pullback_sign(self.base.dim, self.fiber.dim) * self.orientation


@dataclass
class LocalPiece:
    """Signed points in top cells of the base component, each with a copy of the fiber.

    ``points`` holds ``(point_id, base_cell, sign)``.  The total complex has
    cells ``(point_id, fiber_cell)``.
    """

    base_component: Hashable
    base: Cubulation
    fiber: Cubulation
    points: Sequence[tuple[Hashable, Hashable, int]]
    orientation: int = 1
    endpoint: ChainMap | None = None
    id: Hashable = None
    strata: tuple = ()

    kind = "local"

    @property
    def total_degree(self) -> int:
        return self.fiber.dim

    @cached_property
    def total(self) -> Cubulation:
        pts = Cubulation.from_cells([Cell(pid, 0) for pid, _, _ in self.points])
        return product(pts, self.fiber)

    def fiber_sign(self) -> int:
        # the base coordinates are used up by the point, so only the fiber remains
        return pullback_sign(self.base.dim, self.fiber.dim) * self.orientation


Piece = BundlePiece | LocalPiece


@dataclass
class FiberedDomain:
    """P x_B piece realised inside the piece's total complex."""

    complex: Cubulation
    chain: FormalChain
    degree: int


def pullback(sigma: FormalChain, piece: Piece, fiber_chain: FormalChain | None = None) -> FiberedDomain:
    """Representing chain of sigma x_B piece: signed sum of product cells over [F].

    ``fiber_chain`` replaces [F], e.g. by a single boundary cell of the fiber.
    """
    fund = piece.fiber.fundamental if fiber_chain is None else fiber_chain
    if fund is None:
        raise ValueError(f"fiber of piece {piece.id!r} has no fundamental chain")
    for cid in sigma:
        if cid not in piece.base.cells:
            raise BaseMismatch(cid, piece.base_component)
    q = sigma.degree
    if q is None:
        q = piece.base.cells[next(iter(sigma))].dim if sigma else 0
    fdim = piece.fiber.cells[next(iter(fund))].dim if fund else piece.fiber.dim
    deg = fdim if isinstance(piece, LocalPiece) else q + fdim
    sign = piece.fiber_sign()
    out: dict = {}
    if isinstance(piece, LocalPiece):
        if q == piece.base.dim:
            for pid, cell, s in piece.points:
                c = sigma[cell]
                if c:
                    for f, cf in fund.items():
                        out[(pid, f)] = out.get((pid, f), 0) + sign * s * c * cf
    else:
        for cid, c in sigma.items():
            for f, cf in fund.items():
                out[(cid, f)] = out.get((cid, f), 0) + sign * c * cf
    return FiberedDomain(piece.total, FormalChain(out, deg), deg)


def push(domain_chain: FormalChain, piece: Piece) -> FormalChain:
    """Apply the endpoint map of ``piece`` to a chain on its total complex."""
    if piece.endpoint is None:
        raise ValueError(f"piece {piece.id!r} has no endpoint map")
    return piece.endpoint.apply(domain_chain)


# -- associativity of iterated pullbacks ---------------------------------------------

def _reassociate(cid):
    """((s, f2), f3) -> (s, (f2, f3))."""
    (s, f2), f3 = cid
    return (s, (f2, f3))


def _flat(cid) -> tuple:
    if isinstance(cid, tuple) and len(cid) == 2:
        return _flat(cid[0]) + _flat(cid[1])
    return (cid,)


@dataclass
class FiberedTriple:
    """Chain q on B1, a piece over B1 (fiber F2), and a bundle over B2 (fiber F3).

    Only the dimensions of the bases enter the orientation signs, so B2 is
    described by its dimension.
    """

    q: FormalChain
    piece2: BundlePiece
    b2: int
    fiber3: Cubulation
    orientation3: int = 1


def _iterated(t: FiberedTriple, sign_rule) -> tuple[FormalChain, FormalChain]:
    b1, f2, f3 = t.piece2.base.dim, t.piece2.fiber.dim, t.fiber3.dim
    fund2, fund3 = t.piece2.fiber.fundamental, t.fiber3.fundamental
    o2, o3 = t.piece2.orientation, t.orientation3
    # (q x_B1 P2) x_B2 P3
    first = {(s, g): c * cg * sign_rule(b1, f2) * o2 for s, c in t.q.items() for g, cg in fund2.items()}
    left = {(x, h): c * ch * sign_rule(t.b2, f3) * o3 for x, c in first.items() for h, ch in fund3.items()}
    # q x_B1 (P2 x_B2 P3), where P2 x_B2 P3 is a bundle over B1 with fiber F2 x F3
    inner = {(g, h): cg * ch * sign_rule(t.b2, f3) * o3 for g, cg in fund2.items() for h, ch in fund3.items()}
    right = {(s, gh): c * cgh * sign_rule(b1, f2 + f3) * o2 for s, c in t.q.items() for gh, cgh in inner.items()}
    deg = (t.q.degree or 0) + f2 + f3
    return FormalChain(left, deg), FormalChain(right, deg)


def check_associativity(t: FiberedTriple, sign_rule: Callable[[int, int], int] = pullback_sign) -> bool:
    """Both bracketings agree as chains and as boundaries, after flattening cell ids."""
    left, right = _iterated(t, sign_rule)
    k_left = product(product(t.piece2.base, t.piece2.fiber), t.fiber3)
    k_right = product(t.piece2.base, product(t.piece2.fiber, t.fiber3))

    def canon(c: FormalChain) -> tuple:
        return tuple(sorted((repr(_flat(k)), v) for k, v in c.items()))

    if canon(left) != canon(right):
        return False
    return canon(k_left.chain_boundary(left)) == canon(k_right.chain_boundary(right))


def symbolic_associativity(
    calc: FiberedCalculus, p1: Hashable, b1: int, p2: Hashable, b2: int, p3: Hashable
) -> bool:
    """Bracketings of p1 x_b1 p2 x_b2 p3 have equal degrees and boundaries."""
    one = lambda t: FormalChain.single(t, degree=calc.degree(t))
    lt = Fib(Fib(p1, b1, p2), b2, p3)
    rt = Fib(p1, b1, Fib(p2, b2, p3))
    if calc.degree(lt) != calc.degree(rt):
        return False
    deg = calc._deg.__getitem__
    return canonical(calc.boundary(one(lt)), deg) == canonical(calc.boundary(one(rt)), deg)
