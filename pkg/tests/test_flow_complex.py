import copy
import dataclasses

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from generators import valid_categories
from mbhom.algebra import IntMatrix
from mbhom.chains import FormalChain
from mbhom.complex import (
    DSquaredViolation,
    assemble,
    check_blockwise,
    morse_bott_homology,
    partial0,
    partialj,
    truncation_bound,
)
from mbhom.cubical import cubical_homology, torus
from mbhom.flow import (
    fiber_boundary,
    moduli_boundary,
    validate_degrees,
    validate_flow_category,
    validate_moduli_boundary,
    validate_moduli_d_squared,
    validate_weak_self_indexing,
)
from mbhom.io import fixtures_dir, load_flow_category

CATEGORIES = [
    "sphere-z2",
    "sphere-neg-z2",
    "sphere-morse",
    "torus-constant",
    "torus-morse-smale",
    "three-level",
    "circle-constant",
]


def fc(name):
    return load_flow_category(f"{name}.json")


def groups(h):
    return [(h[k].betti, h[k].torsion) for k in sorted(h.groups)]


Z, ZERO, Z2 = (1, ()), (0, ()), (2, ())


# -- validation ----------------------------------------------------------------------

@pytest.mark.parametrize("name", CATEGORIES)
def test_fixtures_validate(name):
    assert validate_flow_category(fc(name)).ok


def test_fixture_list_is_complete():
    on_disk = {p.stem for p in fixtures_dir().glob("*.json")}
    assert set(CATEGORIES) <= on_disk


def test_weak_self_indexing_violation():
    c = fc("sphere-z2")
    c.moduli[(0, 2)] = c.moduli[(2, 0)]
    assert not validate_weak_self_indexing(c).ok


def test_wrong_fiber_degree_is_reported():
    c = fc("torus-morse-smale")
    m1 = c.moduli[(1, 0)].pieces[0]
    # put a gap-one fiber on the gap-two bundle
    c.moduli[(2, 0)].pieces[0].fiber = m1.fiber
    assert "degree" in str(validate_degrees(c))


def test_swapped_stratum_labels_break_d_squared():
    c = fc("three-level")
    piece = c.moduli[(2, 0)].pieces[0]
    s = list(piece.strata)
    s[0], s[1] = dataclasses.replace(s[0], right_cell=s[1].right_cell), dataclasses.replace(s[1], right_cell=s[0].right_cell)
    piece.strata = tuple(s)
    assert not validate_moduli_boundary(c).ok
    assert not validate_moduli_d_squared(c).ok


def test_dropped_stratum_is_reported():
    c = fc("torus-morse-smale")
    piece = c.moduli[(2, 0)].pieces[0]
    piece.strata = piece.strata[1:]
    assert not validate_flow_category(c).ok


def test_moduli_boundary_cancels_on_closed_and_gap_one():
    c = fc("torus-morse-smale")
    assert moduli_boundary(c, 1, 1).is_zero()
    b = moduli_boundary(c, 2, 2)
    # four intervals, two ends each, every end labelled by a broken flow
    assert sum(abs(v) for v in b.values()) == 8


def test_interval_fiber_boundary():
    c = fc("three-level")
    piece = c.moduli[(2, 0)].pieces[0]
    # d a = a0 - a1 on each interval of the fiber
    assert fiber_boundary(piece) == {"I0a0": 1, "I0a1": -1, "I1a0": 1, "I1a1": -1}


# -- differentials -------------------------------------------------------------------

def test_sphere_z2_generators_and_blocks():
    c = fc("sphere-z2")
    cx = assemble(c)
    assert cx.generators == {
        0: [(0, "B0", "v0"), (0, "B0", "v1")],
        1: [(0, "B0", "e0"), (0, "B0", "e1")],
        2: [(2, "n", "n"), (2, "s", "s")],
    }
    # d1 = -(cellular boundary) on edges; d2 sends n to e0 + e1, s to -(e0 + e1)
    assert cx.boundary.matrix_at(1) == IntMatrix.from_rows([[-1, 1], [1, -1]])
    assert cx.boundary.matrix_at(2) == IntMatrix.from_rows([[1, -1], [1, -1]])
    assert cx.blocks[(2, 2, 2)] == cx.boundary.matrix_at(2)
    assert cx.blocks[(1, 0, 0)] == cx.boundary.matrix_at(1)


def test_partial_examples():
    c = fc("sphere-z2")
    assert partial0(c, (0, "B0", "e0")) == {(0, "B0", "v0"): -1, (0, "B0", "v1"): 1}
    assert partialj(c, (2, "n", "n"), 2) == {(0, "B0", "e0"): 1, (0, "B0", "e1"): 1}
    assert partialj(c, (2, "n", "n"), 1).is_zero()


def test_sphere_neg_z2_point_boundary():
    c = fc("sphere-neg-z2")
    assert partialj(c, (1, "B1", "v0"), 1) == {(0, "n", "n"): 1, (0, "s", "s"): -1}
    assert partialj(c, (1, "B1", "v1"), 1) == {(0, "n", "n"): 1, (0, "s", "s"): -1}
    # degree-2 edge: plain cellular boundary
    assert partial0(c, (1, "B1", "e0")) == {(1, "B1", "v0"): 1, (1, "B1", "v1"): -1}


@pytest.mark.parametrize(
    "name, expected",
    [
        ("sphere-z2", [Z, ZERO, Z]),
        ("sphere-neg-z2", [Z, ZERO, Z]),
        ("sphere-morse", [Z, ZERO, Z]),
        ("torus-constant", [Z, Z2, Z]),
        ("torus-morse-smale", [Z, Z2, Z]),
        ("three-level", [Z, Z, Z]),
        ("circle-constant", [Z, Z]),
    ],
)
def test_fixture_homology(name, expected):
    h = morse_bott_homology(fc(name))
    assert groups(h) == expected
    assert not h.provisional


def _oracle_homology(cx):
    dims = {k: len(g) for k, g in cx.generators.items()}
    mats = {k: cx.boundary.matrix_at(k).tolist() for k in dims if k > 0}
    return oracles.homology(dims, mats)


@pytest.mark.parametrize("name", CATEGORIES)
def test_homology_agrees_with_oracle(name):
    c = fc(name)
    cx = assemble(c)
    o = _oracle_homology(cx)
    assert groups(morse_bott_homology(c)) == [o[k] for k in sorted(o)]


def test_constant_function_is_cubical_complex():
    c = fc("torus-constant")
    cx = assemble(c)
    space = c.levels[0].components[0].complex
    assert len(space.cells) == len(torus(2, 2).cells)
    cub = space.boundary_matrices()
    for k in range(3):
        assert [g[2] for g in cx.generators[k]] == list(space.cells_of_dim(k))
    for k in (1, 2):
        sign = -1 if k % 2 else 1
        assert cx.boundary.matrix_at(k) == (cub.matrix_at(k) if sign > 0 else -cub.matrix_at(k))
    h = cubical_homology(space)
    assert groups(morse_bott_homology(c)) == [(h[k].betti, h[k].torsion) for k in range(3)]


def test_morse_smale_specialisation():
    c = fc("torus-morse-smale")
    cx = assemble(c)
    for k, gens in cx.generators.items():
        # one generator per index-k critical point, all cells are points
        assert all(g[0] == k and c.levels[k].complex.cells[g[2]].dim == 0 for g in gens)
    assert [len(cx.generators[k]) for k in range(3)] == [1, 2, 1]
    for (k, i, j), b in cx.blocks.items():
        if j != 1:
            assert b.is_zero()
    # gap-one fibers hold signed points that cancel in pairs
    for (i, t), bundle in c.moduli.items():
        if i - t == 1:
            for piece in bundle.pieces:
                assert sum(piece.fiber.fundamental.values()) == 0
    o = _oracle_homology(cx)
    assert [o[k] for k in range(3)] == [Z, Z2, Z]


def test_empty_category():
    c = fc("sphere-z2")
    for lv in c.levels.values():
        lv.components = []
    c.moduli = {}
    assert truncation_bound(c, 3) == 0


def test_truncation_marks_top_degree():
    c = fc("sphere-z2")
    h = morse_bott_homology(c, k_max=1)
    assert h.provisional == frozenset({1})
    assert truncation_bound(c, 1) == 2
    assert groups(morse_bott_homology(c, k_max=2)) == [Z, ZERO, Z]


def test_blockwise_check_catches_corruption():
    c = fc("sphere-z2")
    cx = assemble(c)
    cx.blocks[(2, 2, 2)] = IntMatrix.from_rows([[1, 0], [0, 0]])
    with pytest.raises(DSquaredViolation):
        check_blockwise(c, cx)


def test_flipped_orientation_changes_top_differential():
    c = fc("sphere-z2")
    c.moduli[(2, 0)].pieces[0].orientation = -1
    # n and s now both send the equator to e0 + e1 with the same sign
    cx = assemble(c)
    assert cx.boundary.matrix_at(2) == IntMatrix.from_rows([[-1, -1], [-1, -1]])


# -- random categories ---------------------------------------------------------------

RANDOM = valid_categories(seed=20241, count=100)


def _compose_zero(cx):
    for k in cx.generators:
        if k >= 2 and cx.generators[k] and cx.generators[k - 2]:
            a = cx.boundary.matrix_at(k - 1).tolist()
            b = cx.boundary.matrix_at(k).tolist()
            assert all(x == 0 for row in oracles.matmul(a, b) for x in row)


@pytest.mark.parametrize("idx", range(0, 100, 10))
def test_random_categories_validate(idx):
    for c in RANDOM[idx : idx + 10]:
        assert validate_flow_category(c).ok, c.name
        cx = assemble(c)
        _compose_zero(cx)


@given(st.integers(0, 99))
@settings(max_examples=50, deadline=None)
def test_random_partial_matches_matrix(idx):
    c = RANDOM[idx]
    cx = assemble(c)
    for k in range(1, max(cx.generators, default=0) + 1):
        m = cx.boundary.matrix_at(k)
        for col, g in enumerate(cx.generators[k]):
            img = FormalChain()
            img = img + partial0(c, g) if c.levels[g[0]].complex.cells[g[2]].dim else img
            for j in range(1, g[0] + 1):
                img = img + partialj(c, g, j)
            assert cx.vector(img, k - 1) == [m[r, col] for r in range(m.rows)]


def test_random_categories_nontrivial():
    # the generator exercises higher differentials and gap-two bundles
    higher = sum(1 for c in RANDOM if any(not b.is_zero() for (k, i, j), b in assemble(c).blocks.items() if j >= 1))
    gap_two = sum(1 for c in RANDOM if (2, 0) in c.moduli)
    assert higher > 10 and gap_two > 0


def test_random_corruption_detected():
    hits = 0
    for c in RANDOM:
        for (i, t), bundle in c.moduli.items():
            if i - t == 1:
                d = copy.deepcopy(c)
                piece = d.moduli[(i, t)].pieces[0]
                f = next(iter(piece.fiber.fundamental))
                piece.fiber.fundamental = piece.fiber.fundamental + FormalChain({f: -2 * piece.fiber.fundamental[f]})
                if (2, 0) in c.moduli:
                    hits += 1
                    assert not validate_flow_category(d).ok
                break
    assert hits > 0
