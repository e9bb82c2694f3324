"""Exact integer linear algebra.

Smith normal form with unimodular transforms, homology of finitely generated
free chain complexes and the maps they induce.  Everything is plain Python
``int`` so entries never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence


class CompositionNotZero(ValueError):
    """matrix_at(k-1) @ matrix_at(k) is not the zero matrix."""

    def __init__(self, k: int):
        super().__init__(f"CompositionNotZero: d_{k - 1} o d_{k} != 0")
        self.k = k


class NotAChainMap(ValueError):
    def __init__(self, k: int):
        super().__init__(f"NotAChainMap: square fails at degree {k}")
        self.k = k


class IntMatrix:
    """Dense integer matrix.  ``rows`` and ``cols`` may be zero."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: Sequence[Sequence[int]] | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            self.data = [[0] * cols for _ in range(rows)]
        else:
            self.data = [[int(x) for x in row] for row in data]
            if len(self.data) != rows or any(len(r) != cols for r in self.data):
                raise ValueError(f"IntMatrix: data does not have shape {rows}x{cols}")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> "IntMatrix":
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, [[int(i == j) for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.data[i][j]

    def __setitem__(self, ij: tuple[int, int], value: int) -> None:
        i, j = ij
        self.data[i][j] = int(value)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, tuple(map(tuple, self.data))))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}, {self.cols}, {self.data!r})"

    def copy(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, self.data)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, [list(c) for c in zip(*self.data)] if self.rows else [[] for _ in range(self.cols)])

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols_t = [[other.data[k][j] for k in range(other.rows)] for j in range(other.cols)]
        out = [[sum(a * b for a, b in zip(row, col) if a) for col in cols_t] for row in self.data]
        return IntMatrix(self.rows, other.cols, out)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        return IntMatrix(self.rows, self.cols, [[a + b for a, b in zip(r, s)] for r, s in zip(self.data, other.data)])

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, [[-a for a in r] for r in self.data])

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        return self + (-other)

    def is_zero(self) -> bool:
        return all(not a for r in self.data for a in r)

    def diagonal(self) -> list[int]:
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]


def determinant(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("determinant of a non-square matrix")
    n = m.rows
    a = m.tolist()
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


# -- Smith normal form ------------------------------------------------------

def _smallest_pivot(a: list[list[int]], t: int) -> tuple[int, int] | None:
    best = None
    for i in range(t, len(a)):
        for j in range(t, len(a[i])):
            v = a[i][j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, j)
                if best[0] == 1:
                    return i, j
    return None if best is None else (best[1], best[2])


def smith_normal_form(m: IntMatrix) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return ``(S, U, V)`` with ``U @ m @ V == S``.

    ``S`` is diagonal with non-negative entries ``d_1 | d_2 | ...`` and
    ``U``, ``V`` are unimodular.  Pivots are chosen with the smallest
    nonzero absolute value (first in row-major order on ties), which keeps
    the output deterministic.
    """
    rows, cols = m.shape
    a = m.tolist()
    u = IntMatrix.identity(rows).data
    v = IntMatrix.identity(cols).data

    def swap_rows(i: int, j: int) -> None:
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i: int, j: int) -> None:
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(dst: int, src: int, q: int) -> None:
        # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst: int, src: int, q: int) -> None:
        for r in a:
            r[dst] += q * r[src]
        for r in v:
            r[dst] += q * r[src]

    t = 0
    while t < min(rows, cols):
        piv = _smallest_pivot(a, t)
        if piv is None:
            break
        while True:
            i, j = piv
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            p = a[t][t]
            dirty = False
            for r in range(t + 1, rows):
                if a[r][t]:
                    add_row(r, t, -(a[r][t] // p))
                    dirty = dirty or a[r][t] != 0
            for c in range(t + 1, cols):
                if a[t][c]:
                    add_col(c, t, -(a[t][c] // p))
                    dirty = dirty or a[t][c] != 0
            if not dirty:
                bad = next(
                    ((r, c) for r in range(t + 1, rows) for c in range(t + 1, cols) if a[r][c] % p),
                    None,
                )
                if bad is None:
                    break
                add_row(t, bad[0], 1)
            # restrict the search to the pivot row and column, where the
            # remainders live, so finished rows are never disturbed
            cand = [(abs(a[r][t]), r, t) for r in range(t, rows) if a[r][t]]
            cand += [(abs(a[t][c]), t, c) for c in range(t, cols) if a[t][c]]
            _, pi, pj = min(cand)
            piv = (pi, pj)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1
    return IntMatrix(rows, cols, a), IntMatrix(rows, rows, u), IntMatrix(cols, cols, v)


def inverse_unimodular(m: IntMatrix) -> IntMatrix:
    """Exact inverse of a unimodular matrix via Gauss-Jordan over the integers."""
    n = m.rows
    a = [row[:] + [int(i == j) for j in range(n)] for i, row in enumerate(m.tolist())]
    for c in range(n):
        while True:
            nz = [r for r in range(c, n) if a[r][c]]
            if not nz:
                raise ValueError("matrix is singular")
            r0 = min(nz, key=lambda r: abs(a[r][c]))
            a[c], a[r0] = a[r0], a[c]
            done = True
            for r in range(c + 1, n):
                if a[r][c]:
                    q = a[r][c] // a[c][c]
                    a[r] = [x - q * y for x, y in zip(a[r], a[c])]
                    done = done and a[r][c] == 0
            if done:
                break
        if abs(a[c][c]) != 1:
            raise ValueError("matrix is not unimodular")
        if a[c][c] < 0:
            a[c] = [-x for x in a[c]]
    for c in range(n - 1, -1, -1):
        for r in range(c):
            if a[r][c]:
                q = a[r][c]
                a[r] = [x - q * y for x, y in zip(a[r], a[c])]
    return IntMatrix(n, n, [row[n:] for row in a])


def rank(m: IntMatrix) -> int:
    s, _, _ = smith_normal_form(m)
    return sum(1 for d in s.diagonal() if d)


# -- chain complexes --------------------------------------------------------

@dataclass
class GradedBoundaryMatrices:
    """Matrices of d_k: C_k -> C_{k-1} over a contiguous range of degrees.

    ``dims[k]`` is the rank of C_k.  Degrees outside ``dims`` have rank 0,
    and a missing matrix is the zero map of the appropriate shape.
    """

    dims: dict[int, int]
    matrices: dict[int, IntMatrix] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for k, mat in self.matrices.items():
            if mat.shape != (self.dim(k - 1), self.dim(k)):
                raise ValueError(
                    f"d_{k} has shape {mat.shape}, expected {(self.dim(k - 1), self.dim(k))}"
                )

    @property
    def degrees(self) -> range:
        if not self.dims:
            return range(0)
        return range(min(self.dims), max(self.dims) + 1)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def matrix_at(self, k: int) -> IntMatrix:
        mat = self.matrices.get(k)
        return mat if mat is not None else IntMatrix.zeros(self.dim(k - 1), self.dim(k))

    def check_composition(self) -> None:
        for k in self.degrees:
            if not (self.matrix_at(k - 1) @ self.matrix_at(k)).is_zero():
                raise CompositionNotZero(k)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * n for k, n in self.dims.items())


@dataclass(frozen=True)
class HomologyGroup:
    betti: int
    torsion: tuple[int, ...] = ()

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion]
        if self.betti == 1:
            parts.insert(0, "Z")
        elif self.betti > 1:
            parts.insert(0, f"Z^{self.betti}")
        return "+".join(parts) if parts else "0"

    @property
    def is_zero(self) -> bool:
        return self.betti == 0 and not self.torsion


@dataclass
class HomologyGroups:
    groups: dict[int, HomologyGroup]
    provisional: frozenset[int] = frozenset()

    def __getitem__(self, k: int) -> HomologyGroup:
        return self.groups.get(k, HomologyGroup(0))

    @property
    def betti(self) -> tuple[int, ...]:
        if not self.groups:
            return ()
        return tuple(self[k].betti for k in range(0, max(self.groups) + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * g.betti for k, g in self.groups.items())

    def text(self) -> str:
        return " ".join(f"H_{k}={self[k]}" for k in sorted(self.groups))


@dataclass
class _DegreeData:
    """SNF-derived presentation of H_k.

    ``cycle_coords`` maps a chain (length n_k) in ker d_k to coordinates in
    the kernel basis; ``reduce`` takes those to homology coordinates.
    """

    kernel: IntMatrix          # n_k x z, columns form a basis of ker d_k
    kernel_coords: IntMatrix   # z x n_k, left inverse of ``kernel`` on ker d_k
    u: IntMatrix               # z x z, change of basis of ker diagonalising im d_{k+1}
    u_inv: IntMatrix
    invariants: list[int]      # per kernel coordinate: d>1 torsion, 1 trivial, 0 free
    group: HomologyGroup

    @property
    def generator_indices(self) -> list[int]:
        # torsion generators first (ascending), then free generators
        return [i for i, d in enumerate(self.invariants) if d != 1]

    def generators(self) -> list[list[int]]:
        """Chain-level representatives of the homology generators."""
        basis = self.kernel @ self.u_inv
        return [[basis[r, i] for r in range(basis.rows)] for i in self.generator_indices]

    def coordinates(self, chain: Sequence[int]) -> list[int]:
        x = [sum(self.kernel_coords[i, r] * chain[r] for r in range(len(chain))) for i in range(self.kernel_coords.rows)]
        y = [sum(self.u[i, k] * x[k] for k in range(len(x))) for i in range(len(x))]
        out = []
        for i in self.generator_indices:
            d = self.invariants[i]
            out.append(y[i] % d if d > 1 else y[i])
        return out


def _degree_data(d_k: IntMatrix, d_k1: IntMatrix, n_k: int) -> _DegreeData:
    s, _, v = smith_normal_form(d_k)
    r = sum(1 for d in s.diagonal() if d)
    z = n_k - r
    kernel = IntMatrix(n_k, z, [[v[i, j] for j in range(r, n_k)] for i in range(n_k)])
    v_inv = inverse_unimodular(v) if n_k else IntMatrix.identity(0)
    kernel_coords = IntMatrix(z, n_k, [v_inv.data[i] for i in range(r, n_k)])
    # image of d_{k+1} written in the kernel basis
    image = kernel_coords @ d_k1
    s2, u2, _ = smith_normal_form(image)
    diag = s2.diagonal()
    invariants = [diag[i] if i < len(diag) else 0 for i in range(z)]
    torsion = tuple(d for d in invariants if d > 1)
    betti = sum(1 for d in invariants if d == 0)
    return _DegreeData(
        kernel=kernel,
        kernel_coords=kernel_coords,
        u=u2,
        u_inv=inverse_unimodular(u2) if z else IntMatrix.identity(0),
        invariants=invariants,
        group=HomologyGroup(betti, torsion),
    )


def _check_complex(b: GradedBoundaryMatrices) -> None:
    b.check_composition()


def homology_of_complex(b: GradedBoundaryMatrices, degrees: Iterable[int] | None = None) -> HomologyGroups:
    """Betti numbers and torsion of ker d_k / im d_{k+1} for each degree."""
    _check_complex(b)
    ks = list(b.degrees) if degrees is None else list(degrees)
    groups = {}
    for k in ks:
        groups[k] = _homology_degree(b, k)
    return HomologyGroups(groups)


def _homology_degree(b: GradedBoundaryMatrices, k: int) -> HomologyGroup:
    n_k = b.dim(k)
    d_k = b.matrix_at(k)
    d_k1 = b.matrix_at(k + 1)
    s1, _, _ = smith_normal_form(d_k)
    r_k = sum(1 for d in s1.diagonal() if d)
    s2, _, _ = smith_normal_form(d_k1)
    diag = [d for d in s2.diagonal() if d]
    torsion = tuple(d for d in diag if d > 1)
    return HomologyGroup(n_k - r_k - len(diag), torsion)


@dataclass
class InducedMap:
    matrices: dict[int, IntMatrix]
    isomorphism: dict[int, bool]
    source: dict[int, HomologyGroup]
    target: dict[int, HomologyGroup]

    def is_identity(self) -> bool:
        return all(
            m == IntMatrix.identity(m.rows) and self.source[k] == self.target[k]
            for k, m in self.matrices.items()
        )


def _is_iso(m: IntMatrix, src: HomologyGroup, dst: HomologyGroup, target_invariants: list[int]) -> bool:
    if src != dst:
        return False
    # surjective iff the cokernel of [m | relations] is trivial; a surjection
    # between isomorphic finitely generated abelian groups is an isomorphism
    rel_cols = [d for d in target_invariants if d > 1]
    full = IntMatrix(
        m.rows,
        m.cols + len(rel_cols),
        [m.data[i] + [rel_cols[c] if c == i else 0 for c in range(len(rel_cols))] for i in range(m.rows)],
    )
    s, _, _ = smith_normal_form(full)
    return all(d == 1 for d in s.diagonal()) and min(full.rows, full.cols) == full.rows


def induced_map_on_homology(
    f: dict[int, IntMatrix],
    source: GradedBoundaryMatrices,
    target: GradedBoundaryMatrices,
    degrees: Iterable[int] | None = None,
) -> InducedMap:
    """Matrices of f_* in SNF-derived homology bases plus per-degree iso flags.

    Rows and columns are ordered torsion generators first, then free ones.
    Torsion coordinates are reduced modulo their order.
    """
    _check_complex(source)
    _check_complex(target)
    all_k = sorted(set(source.degrees) | set(target.degrees))

    def fk(k: int) -> IntMatrix:
        m = f.get(k)
        return m if m is not None else IntMatrix.zeros(target.dim(k), source.dim(k))

    for k in all_k:
        if fk(k).shape != (target.dim(k), source.dim(k)):
            raise ValueError(f"f_{k} has shape {fk(k).shape}, expected {(target.dim(k), source.dim(k))}")
    for k in all_k:
        if target.matrix_at(k) @ fk(k) != fk(k - 1) @ source.matrix_at(k):
            raise NotAChainMap(k)

    ks = all_k if degrees is None else list(degrees)
    mats, iso, src_g, dst_g = {}, {}, {}, {}
    for k in ks:
        sd = _degree_data(source.matrix_at(k), source.matrix_at(k + 1), source.dim(k))
        td = _degree_data(target.matrix_at(k), target.matrix_at(k + 1), target.dim(k))
        cols = []
        for g in sd.generators():
            image = [sum(fk(k)[r, c] * g[c] for c in range(len(g))) for r in range(target.dim(k))]
            cols.append(td.coordinates(image))
        nrows = len(td.generator_indices)
        m = IntMatrix(nrows, len(cols), [[cols[c][r] for c in range(len(cols))] for r in range(nrows)])
        mats[k] = m
        src_g[k] = sd.group
        dst_g[k] = td.group
        iso[k] = _is_iso(m, sd.group, td.group, [td.invariants[i] for i in td.generator_indices])
    return InducedMap(mats, iso, src_g, dst_g)
