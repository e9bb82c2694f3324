"""Faces of the N-cube, cubulated spaces and cellular chain maps between them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from .algebra import GradedBoundaryMatrices, HomologyGroups, IntMatrix, homology_of_complex
from .chains import BoundarySpec, FormalChain, GeneratorId, ValidationReport, _sort_key

DEFAULT_AMBIENT = 16
FREE = "free"


class DegreeZero(ValueError):
    def __init__(self) -> None:
        super().__init__("DegreeZero: a 0-face has no boundary")


class NotChainLevel(ValueError):
    def __init__(self, cell: Hashable, detail: str = ""):
        super().__init__(f"NotChainLevel: {cell!r} {detail}".rstrip())
        self.cell = cell


# -- faces of I^N ------------------------------------------------------------

@dataclass(frozen=True)
class CubeFace:
    """A face of I^N: each axis is free or fixed at 0 or 1."""

    status: tuple  # entries are FREE, 0 or 1

    def __post_init__(self) -> None:
        if not self.status:
            raise ValueError("ambient dimension must be positive")
        for s in self.status:
            if s not in (FREE, 0, 1):
                raise ValueError(f"bad coordinate status {s!r}")

    @classmethod
    def full(cls, n: int) -> "CubeFace":
        return cls((FREE,) * n)

    @property
    def ambient(self) -> int:
        return len(self.status)

    @property
    def free_axes(self) -> tuple[int, ...]:
        return tuple(a for a, s in enumerate(self.status) if s == FREE)

    @property
    def degree(self) -> int:
        return len(self.free_axes)

    def restrict(self, j: int, side: int) -> "CubeFace":
        """Fix the j-th free coordinate (1-based, ambient order) to ``side``."""
        axis = self.free_axes[j - 1]
        st = list(self.status)
        st[axis] = side
        return CubeFace(tuple(st))

    def __repr__(self) -> str:
        return "".join("*" if s == FREE else str(s) for s in self.status)


def face_boundary(p: CubeFace) -> FormalChain:
    """sum_j (-1)^j [P|x_j=1 - P|x_j=0] over free axes in ambient order."""
    if p.degree == 0:
        raise DegreeZero()
    terms: dict = {}
    for j in range(1, p.degree + 1):
        s = (-1) ** j
        terms[p.restrict(j, 1)] = terms.get(p.restrict(j, 1), 0) + s
        terms[p.restrict(j, 0)] = terms.get(p.restrict(j, 0), 0) - s
    return FormalChain(terms, p.degree - 1)


def subfaces(p: CubeFace) -> list[CubeFace]:
    """All faces of ``p`` (including ``p``), fixing subsets of its free axes."""
    axes = p.free_axes
    out = []
    for choice in itertools.product((FREE, 0, 1), repeat=len(axes)):
        st = list(p.status)
        for a, c in zip(axes, choice):
            st[a] = c
        out.append(CubeFace(tuple(st)))
    return out


def cube_boundary_spec(n: int) -> BoundarySpec:
    """Boundary spec of every face of I^n, as abstract chains."""
    faces = subfaces(CubeFace.full(n))
    spec = {}
    for f in faces:
        gid = GeneratorId(f, f.degree, "cube-face")
        spec[gid] = (
            []
            if f.degree == 0
            else [(c, GeneratorId(g, g.degree, "cube-face")) for g, c in face_boundary(f).sorted_items()]
        )
    return BoundarySpec(spec)


# -- cubulations ---------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    id: Hashable
    dim: int
    # (sign, axis, side, target); axis is 1-based among the cell's own axes
    boundary: tuple[tuple[int, int, int, Hashable], ...] = ()


@dataclass
class Cubulation:
    """Finite complex of abstract cubes with signed incidences.

    ``fundamental`` is a chain of top cells.  For closed oriented manifolds its
    boundary is zero; for fibers of moduli bundles it is a relative
    fundamental chain whose boundary lives on the boundary strata.
    """

    cells: dict[Hashable, Cell]
    fundamental: FormalChain | None = None
    name: str = ""

    @classmethod
    def from_cells(cls, cells: Iterable[Cell], fundamental: Mapping | None = None, name: str = "") -> "Cubulation":
        cells = list(cells)
        fc = None
        if fundamental is not None:
            top = max((c.dim for c in cells), default=0)
            fc = FormalChain(fundamental, top)
        return cls({c.id: c for c in cells}, fc, name)

    @cached_property
    def dim(self) -> int:
        return max((c.dim for c in self.cells.values()), default=-1)

    @cached_property
    def _by_dim(self) -> dict[int, list[Hashable]]:
        out: dict[int, list[Hashable]] = {}
        for c in self.cells.values():
            out.setdefault(c.dim, []).append(c.id)
        return {k: sorted(v, key=_sort_key) for k, v in out.items()}

    def cells_of_dim(self, p: int) -> list[Hashable]:
        return self._by_dim.get(p, [])

    @cached_property
    def index(self) -> dict[Hashable, int]:
        """Position of each cell within its dimension, in sorted order."""
        return {cid: i for ids in self._by_dim.values() for i, cid in enumerate(ids)}

    def boundary(self, cid: Hashable) -> FormalChain:
        cell = self.cells[cid]
        return FormalChain(((t, s) for s, _, _, t in cell.boundary), cell.dim - 1)

    def chain_boundary(self, chain: FormalChain) -> FormalChain:
        out: dict = {}
        for cid, c in chain.items():
            for s, _, _, t in self.cells[cid].boundary:
                out[t] = out.get(t, 0) + c * s
        deg = None if chain.degree is None else chain.degree - 1
        return FormalChain(out, deg)

    def face(self, cid: Hashable, axis: int, side: int) -> tuple[int, Hashable]:
        for s, a, sd, t in self.cells[cid].boundary:
            if a == axis and sd == side:
                return s, t
        raise KeyError((cid, axis, side))

    @cached_property
    def components(self) -> list[frozenset]:
        """Connected components, each a frozenset of cell ids, in sorted order."""
        parent = {cid: cid for cid in self.cells}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for c in self.cells.values():
            for _, _, _, t in c.boundary:
                if t in parent:
                    parent[find(c.id)] = find(t)
        groups: dict = {}
        for cid in self.cells:
            groups.setdefault(find(cid), set()).add(cid)
        comps = [frozenset(g) for g in groups.values()]
        return sorted(comps, key=lambda g: min(_sort_key(x) for x in g))

    def component_of(self, cid: Hashable) -> int:
        for i, comp in enumerate(self.components):
            if cid in comp:
                return i
        raise KeyError(cid)

    def validate(self, closed: bool = True) -> ValidationReport:
        report = ValidationReport()
        for c in self.cells.values():
            seen = set()
            if len(c.boundary) != 2 * c.dim:
                report.add(f"cell {c.id!r}: {len(c.boundary)} boundary entries, expected {2 * c.dim}")
            for s, axis, side, t in c.boundary:
                if s not in (1, -1):
                    report.add(f"cell {c.id!r}: coefficient {s} is not +1 or -1")
                if not 1 <= axis <= c.dim or side not in (0, 1):
                    report.add(f"cell {c.id!r}: bad face slot (axis {axis}, side {side})")
                if (axis, side) in seen:
                    report.add(f"cell {c.id!r}: face slot (axis {axis}, side {side}) repeated")
                seen.add((axis, side))
                if t not in self.cells:
                    report.add(f"cell {c.id!r}: unknown face {t!r}")
                elif self.cells[t].dim != c.dim - 1:
                    report.add(f"cell {c.id!r}: face {t!r} has dimension {self.cells[t].dim}")
        if not report.ok:
            return report
        for c in self.cells.values():
            dd = self.chain_boundary(self.boundary(c.id))
            if dd:
                report.add(f"cell {c.id!r}: boundary of boundary is {dd!r}")
        if self.fundamental is not None:
            for cid in self.fundamental:
                if cid not in self.cells:
                    report.add(f"fundamental chain: unknown cell {cid!r}")
                elif self.cells[cid].dim != self.dim:
                    report.add(f"fundamental chain: {cid!r} is not a top cell")
            if report.ok and closed and self.dim > 0 and self.chain_boundary(self.fundamental):
                report.add("fundamental chain is not a cycle")
        return report

    def boundary_matrices(self) -> GradedBoundaryMatrices:
        dims = {p: len(self.cells_of_dim(p)) for p in range(0, self.dim + 1)}
        mats = {}
        for p in range(1, self.dim + 1):
            m = IntMatrix.zeros(dims[p - 1], dims[p])
            for j, cid in enumerate(self.cells_of_dim(p)):
                for t, s in self.boundary(cid).items():
                    m[self.index[t], j] += s
            mats[p] = m
        return GradedBoundaryMatrices(dims, mats)

    def chain_vector(self, chain: FormalChain, p: int) -> list[int]:
        vec = [0] * len(self.cells_of_dim(p))
        for cid, c in chain.items():
            vec[self.index[cid]] += c
        return vec

    def relabel(self, f) -> "Cubulation":
        cells = [Cell(f(c.id), c.dim, tuple((s, a, sd, f(t)) for s, a, sd, t in c.boundary)) for c in self.cells.values()]
        fund = None if self.fundamental is None else self.fundamental.map_keys(f)
        return Cubulation({c.id: c for c in cells}, fund, self.name)


def product(k: Cubulation, l: Cubulation, name: str = "") -> Cubulation:
    """Product cubulation with cell ids ``(a, b)``; axes of ``k`` come first.

    d(a x b) = da x b + (-1)^{dim a} a x db, which is the face formula with the
    second factor's axes shifted by dim a.
    """
    cells = []
    for a in k.cells.values():
        for b in l.cells.values():
            bd = [(s, axis, side, (t, b.id)) for s, axis, side, t in a.boundary]
            sgn = (-1) ** a.dim
            bd += [(sgn * s, axis + a.dim, side, (a.id, t)) for s, axis, side, t in b.boundary]
            cells.append(Cell((a.id, b.id), a.dim + b.dim, tuple(bd)))
    fund = None
    if k.fundamental is not None and l.fundamental is not None:
        fund = FormalChain(
            {(x, y): cx * cy for x, cx in k.fundamental.items() for y, cy in l.fundamental.items()},
            k.dim + l.dim,
        )
    return Cubulation({c.id: c for c in cells}, fund, name)


def cubical_homology(k: Cubulation) -> HomologyGroups:
    return homology_of_complex(k.boundary_matrices())


# -- standard spaces -------------------------------------------------------------

def point(cid: Hashable = "pt", coeff: int = 1) -> Cubulation:
    return Cubulation.from_cells([Cell(cid, 0)], {cid: coeff}, "point")


def circle(n: int = 2, prefix: str = "") -> Cubulation:
    """Circle with vertices v0..v{n-1} and edges e_i running from v_i to v_{i+1}."""
    cells = [Cell(f"{prefix}v{i}", 0) for i in range(n)]
    for i in range(n):
        # x=1 end is v_{i+1}: sign (-1)^1 on side 1, +1 on side 0
        cells.append(Cell(f"{prefix}e{i}", 1, ((-1, 1, 1, f"{prefix}v{(i + 1) % n}"), (1, 1, 0, f"{prefix}v{i}"))))
    return Cubulation.from_cells(cells, {f"{prefix}e{i}": 1 for i in range(n)}, "circle")


def interval(prefix: str = "") -> Cubulation:
    cells = [Cell(f"{prefix}a0", 0), Cell(f"{prefix}a1", 0), Cell(f"{prefix}a", 1, ((-1, 1, 1, f"{prefix}a1"), (1, 1, 0, f"{prefix}a0")))]
    return Cubulation.from_cells(cells, {f"{prefix}a": 1}, "interval")


def torus(n: int = 2, m: int = 2) -> Cubulation:
    t = product(circle(n), circle(m), "torus")
    return t.relabel(lambda cid: f"{cid[0]}|{cid[1]}")


def face_complex(p: CubeFace, faces: Iterable[CubeFace] | None = None) -> Cubulation:
    """The faces of ``p`` as a cubulation, incidences from the face formula."""
    cells = []
    for f in (subfaces(p) if faces is None else faces):
        bd = []
        for j in range(1, f.degree + 1):
            bd.append(((-1) ** j, j, 1, f.restrict(j, 1)))
            bd.append((-((-1) ** j), j, 0, f.restrict(j, 0)))
        cells.append(Cell(f, f.degree, tuple(bd)))
    return Cubulation.from_cells(cells, {p: 1}, repr(p))


def cube_sphere(n: int = 3) -> Cubulation:
    """S^{n-1} as the proper faces of I^n, oriented as the boundary of I^n."""
    full = CubeFace.full(n)
    faces = [f for f in subfaces(full) if f.degree < n]
    k = face_complex(full, faces)
    return Cubulation(k.cells, face_boundary(full), f"sphere{n - 1}")


# -- cellular chain maps ---------------------------------------------------------

@dataclass
class ChainMap:
    source: Cubulation
    target: Cubulation
    images: dict[Hashable, FormalChain]

    def image(self, cid: Hashable) -> FormalChain:
        ch = self.images.get(cid)
        return ch if ch is not None else FormalChain((), self.source.cells[cid].dim)

    def apply(self, chain: FormalChain) -> FormalChain:
        out: dict = {}
        for cid, c in chain.items():
            for t, d in self.image(cid).items():
                out[t] = out.get(t, 0) + c * d
        return FormalChain(out, chain.degree)

    def matrix(self, p: int) -> IntMatrix:
        src, dst = self.source.cells_of_dim(p), self.target.cells_of_dim(p)
        m = IntMatrix.zeros(len(dst), len(src))
        for j, cid in enumerate(src):
            for t, c in self.image(cid).items():
                m[self.target.index[t], j] += c
        return m


def cellular_chain_map(
    source: Cubulation, target: Cubulation, assignment: Mapping[Hashable, Mapping | FormalChain]
) -> ChainMap:
    """Validate a cell-by-cell assignment and return it as a chain map.

    Cells missing from ``assignment`` map to zero, which is how maps that
    collapse a cell onto something of lower dimension are written.
    """
    images = {}
    for cid, img in assignment.items():
        if cid not in source.cells:
            raise NotChainLevel(cid, "is not a source cell")
        ch = img if isinstance(img, FormalChain) else FormalChain(img)
        p = source.cells[cid].dim
        for t in ch:
            if t not in target.cells or target.cells[t].dim != p:
                raise NotChainLevel(cid, f"image term {t!r} is not a {p}-cell of the target")
        images[cid] = FormalChain(ch, p)
    f = ChainMap(source, target, images)
    for cid in sorted(source.cells, key=lambda c: (source.cells[c].dim, _sort_key(c))):
        if source.cells[cid].dim == 0:
            continue
        lhs = target.chain_boundary(f.image(cid))
        rhs = f.apply(source.boundary(cid))
        if lhs != rhs:
            raise NotChainLevel(cid, f"d(image) = {lhs!r} but image(d) = {rhs!r}")
    return f


# -- singular cubes and degeneracy normalisation -------------------------------

@dataclass(frozen=True)
class SingularCube:
    """A cellular map from the face complex of a face of I^N into a target."""

    face: CubeFace
    images: tuple  # sorted ((subface, chain items), ...)

    @classmethod
    def make(cls, face: CubeFace, f: ChainMap) -> "SingularCube":
        items = tuple(
            (sf, tuple(f.image(sf).sorted_items())) for sf in sorted(f.source.cells, key=repr)
        )
        return cls(face, items)

    def image_of(self, sf: CubeFace) -> FormalChain:
        for key, items in self.images:
            if key == sf:
                return FormalChain(items, sf.degree)
        raise KeyError(sf)

    def restrict(self, sub: CubeFace) -> "SingularCube":
        keep = set(subfaces(sub))
        return SingularCube(sub, tuple((k, v) for k, v in self.images if k in keep))


def singular_boundary(chain: FormalChain) -> FormalChain:
    """Face formula applied to a chain of singular cubes."""
    out: dict = {}
    deg = None
    for sc, c in chain.items():
        if sc.face.degree == 0:
            continue
        for f, s in face_boundary(sc.face).items():
            g = sc.restrict(f)
            out[g] = out.get(g, 0) + c * s
        deg = sc.face.degree - 1
    return FormalChain(out, deg if chain.degree is None else chain.degree - 1)


def normalize(chain: FormalChain) -> FormalChain:
    """Cellular image of a chain of singular cubes.

    Cubes whose image is the zero chain (maps that ignore a free coordinate)
    drop out, and cubes carried on different faces of I^N with the same image
    merge into one term.
    """
    out: dict = {}
    for sc, c in chain.items():
        if not isinstance(sc, SingularCube):
            out[sc] = out.get(sc, 0) + c
            continue
        for t, d in sc.image_of(sc.face).items():
            out[t] = out.get(t, 0) + c * d
    return FormalChain(out, chain.degree)
