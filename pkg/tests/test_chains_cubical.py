import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from mbhom.chains import BoundarySpec, FormalChain, GeneratorId, UnknownGenerator, chain_boundary, validate_boundary_spec
from mbhom.cubical import (
    FREE,
    Cell,
    CubeFace,
    Cubulation,
    DegreeZero,
    NotChainLevel,
    SingularCube,
    cellular_chain_map,
    circle,
    cube_boundary_spec,
    cube_sphere,
    cubical_homology,
    face_boundary,
    face_complex,
    interval,
    normalize,
    point,
    product,
    singular_boundary,
    subfaces,
    torus,
)


# -- formal chains -------------------------------------------------------------------

def test_formal_chain_drops_zeros():
    c = FormalChain({"a": 1, "b": 0}) + FormalChain({"a": -1})
    assert c.is_zero() and len(c) == 0
    assert FormalChain({"x": 2}) * 3 == {"x": 6}


def test_generator_degree_checked():
    with pytest.raises(ValueError):
        GeneratorId("x", -1)
    with pytest.raises(ValueError):
        GeneratorId("x", 0, "nonsense")


def test_unknown_generator():
    spec = BoundarySpec({GeneratorId("p", 0): []})
    with pytest.raises(UnknownGenerator):
        chain_boundary(FormalChain({GeneratorId("q", 1): 1}), spec)


def test_boundary_spec_validation():
    p, q, e = GeneratorId("p", 0), GeneratorId("q", 0), GeneratorId("e", 1)
    good = BoundarySpec({p: [], q: [], e: [(1, p), (-1, q)]})
    assert validate_boundary_spec(good).ok
    bad = BoundarySpec({p: [], q: [], e: [(2, p), (-1, q)]})
    report = validate_boundary_spec(bad)
    assert not report.ok and "not +1 or -1" in str(report)


def test_cube_spec_is_valid():
    assert validate_boundary_spec(cube_boundary_spec(3)).ok


# -- faces ------------------------------------------------------------------------------

def test_interval_face_boundary():
    b = face_boundary(CubeFace((FREE, 0)))
    assert b == {CubeFace((0, 0)): 1, CubeFace((1, 0)): -1}


def test_point_has_no_boundary():
    with pytest.raises(DegreeZero):
        face_boundary(CubeFace((0, 1)))


@given(st.lists(st.sampled_from([FREE, 0, 1]), min_size=1, max_size=5))
@settings(max_examples=200, deadline=None)
def test_face_boundary_matches_oracle(status):
    face = CubeFace(tuple(status))
    if face.degree == 0:
        return
    ours = {tuple("*" if s == FREE else s for s in f.status): c for f, c in face_boundary(face).items()}
    assert ours == oracles.cube_face_boundary(tuple("*" if s == FREE else s for s in status))
    assert face_boundary(face).degree == face.degree - 1


@given(st.integers(1, 4))
@settings(deadline=None)
def test_boundary_squares_to_zero(n):
    for f in subfaces(CubeFace.full(n)):
        if f.degree >= 2:
            out: dict = {}
            for g, c in face_boundary(f).items():
                for h, d in face_boundary(g).items():
                    out[h] = out.get(h, 0) + c * d
            assert not any(out.values())


# -- cubulations -----------------------------------------------------------------------

def _oracle(k: Cubulation):
    b = k.boundary_matrices()
    dims = dict(b.dims)
    mats = {p: b.matrix_at(p).tolist() for p in dims if p > 0}
    return oracles.homology(dims, mats)


@pytest.mark.parametrize(
    "space, expected",
    [
        (circle(2), [(1, ()), (1, ())]),
        (circle(5), [(1, ()), (1, ())]),
        (cube_sphere(3), [(1, ()), (0, ()), (1, ())]),
        (torus(2, 2), [(1, ()), (2, ()), (1, ())]),
        (point(), [(1, ())]),
        (interval(), [(1, ()), (0, ())]),
    ],
)
def test_cubical_homology(space, expected):
    assert space.validate(closed=False).ok
    h = cubical_homology(space)
    got = [(h[k].betti, h[k].torsion) for k in range(space.dim + 1)]
    assert got == expected
    oracle = _oracle(space)
    assert got == [oracle[k] for k in range(space.dim + 1)]


def test_cube_sphere_cells():
    s = cube_sphere(3)
    assert len(s.cells) == 26
    assert s.validate().ok


def test_torus_cell_count():
    assert len(torus(2, 2).cells) == 16


def test_validate_rejects_bad_sign():
    cells = [Cell("a", 0), Cell("b", 0), Cell("e", 1, ((2, 1, 1, "b"), (1, 1, 0, "a")))]
    report = Cubulation.from_cells(cells).validate(closed=False)
    assert "not +1 or -1" in str(report)


def test_validate_rejects_open_fundamental():
    assert not interval().validate(closed=True).ok
    assert interval().validate(closed=False).ok


def test_product_boundary_sign():
    p = product(interval("x"), interval("y"))
    b = p.boundary(("xa", "ya"))
    # d(a x b) = da x b - a x db for dim a = 1
    assert b == {("xa0", "ya"): 1, ("xa1", "ya"): -1, ("xa", "ya0"): -1, ("xa", "ya1"): 1}
    assert p.validate(closed=False).ok


def test_cellular_chain_map_checks():
    c = circle(2)
    rot = {"v0": {"v1": 1}, "v1": {"v0": 1}, "e0": {"e1": 1}, "e1": {"e0": 1}}
    f = cellular_chain_map(c, c, rot)
    assert f.apply(FormalChain({"e0": 1, "e1": 1})) == {"e0": 1, "e1": 1}
    bad = {"v0": {"v0": 1}, "v1": {"v1": 1}, "e0": {"e0": -1}, "e1": {"e1": -1}}
    with pytest.raises(NotChainLevel):
        cellular_chain_map(c, c, bad)
    with pytest.raises(NotChainLevel):
        cellular_chain_map(c, c, {"e0": {"v0": 1}})


def test_constant_map_kills_edges():
    c = circle(2)
    f = cellular_chain_map(c, point("p"), {"v0": {"p": 1}, "v1": {"p": 1}})
    assert f.image("e0").is_zero()


# -- singular cubes ------------------------------------------------------------------

def _square_into_circle():
    sq = CubeFace((FREE, FREE))
    src = face_complex(sq)
    target = circle(2)
    assign = {}
    for f in src.cells:
        if src.cells[f].dim == 0:
            assign[f] = {"v0": 1}
    return sq, src, target, cellular_chain_map(src, target, assign)


def test_degenerate_cube_normalises_to_zero():
    sq, _, _, f = _square_into_circle()
    cube = SingularCube.make(sq, f)
    assert normalize(FormalChain({cube: 1}, 2)).is_zero()
    # its boundary consists of constant edges, also zero after normalising
    assert normalize(singular_boundary(FormalChain({cube: 1}, 2))).is_zero()


def test_normalise_commutes_with_boundary():
    e = CubeFace((FREE,))
    src = face_complex(e)
    c = circle(2)
    f = cellular_chain_map(src, c, {CubeFace((0,)): {"v0": 1}, CubeFace((1,)): {"v1": 1}, e: {"e0": 1}})
    chain = FormalChain({SingularCube.make(e, f): 1}, 1)
    assert normalize(singular_boundary(chain)) == c.chain_boundary(normalize(chain))


def test_normalise_is_idempotent():
    e = CubeFace((FREE,))
    src = face_complex(e)
    c = circle(2)
    f = cellular_chain_map(src, c, {CubeFace((0,)): {"v0": 1}, CubeFace((1,)): {"v1": 1}, e: {"e0": 1}})
    n1 = normalize(FormalChain({SingularCube.make(e, f): 2}, 1))
    assert normalize(n1) == n1 == {"e0": 2}
