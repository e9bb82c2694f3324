"""Total complex of a flow category: generators, d0 + d1 + ... + dm, and homology."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable

from .algebra import GradedBoundaryMatrices, HomologyGroup, HomologyGroups, IntMatrix, homology_of_complex
from .chains import FormalChain
from .flow import FlowCategory

Generator = tuple[int, str, Hashable]  # (level, component, cell)


class DSquaredViolation(ValueError):
    def __init__(self, k: int, i: int, j: int):
        super().__init__(f"DSquaredViolation: degree {k}, level {i}, gap {j}")
        self.k, self.i, self.j = k, i, j


def generator_degree(fc: FlowCategory, g: Generator) -> int:
    i, _, cell = g
    return fc.levels[i].complex.cells[cell].dim + i


def generators(fc: FlowCategory, k: int) -> list[Generator]:
    """Degree-k generators ordered by (level, component, cell)."""
    out = []
    for i in sorted(fc.levels):
        if k - i >= 0:
            out += [(i, comp, cid) for comp, cid in fc.levels[i].generators(k - i)]
    return out


def max_degree(fc: FlowCategory) -> int:
    return max((i + lv.dim for i, lv in fc.levels.items() if lv.components), default=-1)


def partial0(fc: FlowCategory, g: Generator) -> FormalChain:
    """(-1)^k times the cellular boundary, on the same level."""
    i, comp, cell = g
    k = generator_degree(fc, g)
    bd = fc.levels[i].complex.boundary(cell)
    sgn = -1 if k % 2 else 1
    return FormalChain({(i, comp, c): sgn * v for c, v in bd.items()}, k - 1)


def partialj(fc: FlowCategory, g: Generator, j: int) -> FormalChain:
    """Image of g under the moduli bundle from level i to level i - j."""
    i, _, cell = g
    k = generator_degree(fc, g)
    t = i - j
    bundle = fc.moduli.get((i, t))
    if bundle is None:
        return FormalChain((), k - 1)
    p = fc.levels[i].complex.cells[cell].dim
    img = fc.operator.apply_bundle(bundle, FormalChain({cell: 1}, p))
    level = fc.levels[t]
    return FormalChain({(t, level.owner(c).id, c): v for c, v in img.items()}, k - 1)


def partial(fc: FlowCategory, g: Generator) -> FormalChain:
    out = partial0(fc, g)
    for j in range(1, g[0] + 1):
        out = out + partialj(fc, g, j)
    return out


@dataclass
class MorseBottComplex:
    generators: dict[int, list[Generator]]
    boundary: GradedBoundaryMatrices
    # (k, i, j) -> matrix of d_j from level-i generators of degree k
    blocks: dict[tuple[int, int, int], IntMatrix] = field(default_factory=dict)
    truncated: bool = False

    def index(self, k: int) -> dict[Generator, int]:
        return {g: n for n, g in enumerate(self.generators.get(k, []))}

    def vector(self, chain: FormalChain, k: int) -> list[int]:
        idx = self.index(k)
        v = [0] * len(idx)
        for g, c in chain.items():
            v[idx[g]] += c
        return v


def _block(fc: FlowCategory, k: int, i: int, j: int, rows: list[Generator], cols: list[Generator]) -> IntMatrix:
    row = {g: r for r, g in enumerate(rows)}
    src = [g for g in cols if g[0] == i]
    m = IntMatrix.zeros(len(rows), len(cols))
    col = {g: c for c, g in enumerate(cols)}
    for g in src:
        img = partial0(fc, g) if j == 0 else partialj(fc, g, j)
        for h, v in img.items():
            if h not in row:
                raise DSquaredViolation(k, i, j)
            m[row[h], col[g]] += v
    return m


def assemble(fc: FlowCategory, k_max: int | None = None) -> MorseBottComplex:
    """Fill the boundary matrices up to degree k_max and check sum_q d_q d_{j-q} = 0 blockwise."""
    top = max_degree(fc)
    if k_max is None:
        k_max = top
    gens = {k: generators(fc, k) for k in range(0, k_max + 1)}
    dims = {k: len(g) for k, g in gens.items()}
    blocks: dict = {}
    mats: dict = {}
    levels = sorted(fc.levels)
    for k in range(1, k_max + 1):
        total = IntMatrix.zeros(dims[k - 1], dims[k])
        for i in levels:
            for j in range(0, i + 1):
                b = _block(fc, k, i, j, gens[k - 1], gens[k])
                blocks[(k, i, j)] = b
                total = total + b
        mats[k] = total
    if 0 in dims:
        for i in levels:
            for j in range(0, i + 1):
                blocks[(0, i, j)] = IntMatrix.zeros(0, dims[0])
    cx = MorseBottComplex(
        gens,
        GradedBoundaryMatrices(dims, mats),
        blocks,
        truncated=bool(generators(fc, k_max + 1)),
    )
    check_blockwise(fc, cx)
    return cx


def check_blockwise(fc: FlowCategory, cx: MorseBottComplex) -> None:
    """Raise DSquaredViolation unless sum_q d_q d_{j-q} vanishes on each level and gap."""
    levels = sorted(fc.levels)
    for k in range(2, max(cx.generators, default=0) + 1):
        for i in levels:
            for j in range(0, i + 1):
                acc = IntMatrix.zeros(len(cx.generators[k - 2]), len(cx.generators[k]))
                for q in range(0, j + 1):
                    first = cx.blocks.get((k, i, j - q))
                    second = cx.blocks.get((k - 1, i - (j - q), q))
                    if first is None or second is None:
                        continue
                    acc = acc + second @ first
                if not acc.is_zero():
                    raise DSquaredViolation(k, i, j)


def morse_bott_homology(fc: FlowCategory, k_max: int | None = None) -> HomologyGroups:
    """Homology in degrees 0..k_max; the top degree is provisional if higher generators were cut off."""
    cx = assemble(fc, k_max)
    top = max(cx.generators, default=-1)
    if top < 0:
        return HomologyGroups({0: HomologyGroup(0)})
    h = homology_of_complex(cx.boundary, range(0, top + 1))
    return HomologyGroups(h.groups, frozenset({top}) if cx.truncated else frozenset())


def truncation_bound(fc: FlowCategory, k: int) -> int:
    """Smallest k_max for which degree-k homology is exact."""
    if fc.is_empty:
        return 0
    return k + 1
