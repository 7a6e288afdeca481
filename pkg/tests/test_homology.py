import random

import pytest
from hypothesis import given, strategies as st

from conftest import space
from oracles import simplicial_complex, simplicial_homology
from tropicore.errors import NotBalanced, NotPurelySkeletal
from tropicore.homology import (
    SYSTEMS,
    Chain,
    barycentric_complex,
    boundary,
    cell_to_bar,
    cellular_complex,
    cowave_chain,
    cycle_divisibility,
    homology_basis,
    homology_table,
    straight_class,
)
from tropicore.library import BUNDLED

ALL = BUNDLED + ["tp-product:1,1", "torus:3,3"]


class TestNodalCurve:
    def test_framing_ranks(self):
        T = homology_table(space("nodal-genus2"), "F")
        assert T.ranks() == {(0, 0): 1, (1, 0): 1, (0, 1): 2, (1, 1): 1}
        assert all(not t for _, t in T.entries.values())

    def test_wave_ranks(self):
        T = homology_table(space("nodal-genus2"), "W")
        # keys are (k, q) for H^q(W_k)
        assert T.ranks() == {(0, 0): 1, (1, 0): 0, (0, 1): 2, (1, 1): 2}

    def test_f1_complex(self):
        # the bundled curve is subdivided; only the fiber at the node has rank 2
        X = space("nodal-genus2")
        C = cellular_complex(X, "F", 1)
        ranks = {v: C.fiber(0, i).rank for i, v in enumerate(C.cells[0])}
        assert ranks["v"] == 2 and all(r == 1 for v, r in ranks.items() if v != "v")
        assert C.homology(1) == (1, []) and C.homology(0) == (1, [])


class TestSmallComplexes:
    def test_circle(self):
        C = cellular_complex(space("elliptic:3"), "F", 0)
        assert C.matrix(1).tolist() == [[-1, 0, 1], [1, -1, 0], [0, 1, -1]]

    def test_tp1_f1(self):
        C = cellular_complex(space("tp:1"), "F", 1)
        assert C.size(1) == 2 and C.size(0) == 1
        assert C.homology(1) == (1, [])

    @pytest.mark.parametrize("name,ranks", [
        ("elliptic:5", {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1}),
        ("tp:2", {(0, 0): 1, (1, 1): 1, (2, 2): 1}),
        ("tp-product:1,1", {(0, 0): 1, (1, 1): 2, (2, 2): 1}),
        ("torus:1,1", {(0, 0): 1, (0, 1): 2, (0, 2): 1, (1, 0): 2, (1, 1): 4, (1, 2): 2,
                       (2, 0): 1, (2, 1): 2, (2, 2): 1}),
    ])
    def test_hodge_numbers(self, name, ranks):
        got = {k: v for k, v in homology_table(space(name)).ranks().items() if v}
        assert got == ranks


@pytest.mark.parametrize("name", ALL)
def test_constant_coefficients_match_simplicial(name):
    X = space(name)
    T = homology_table(X, "F")
    ref = simplicial_homology(X)
    assert {q: T.entries[(0, q)] for q in range(X.dim + 1)} == ref


def test_oracle_triangulation_is_simplicial():
    for name in ALL:
        X = space(name)
        faces = simplicial_complex(X)
        assert len(faces[X.dim]) == len(set(faces[X.dim]))


@pytest.mark.parametrize("name", ALL)
@pytest.mark.parametrize("system", SYSTEMS)
def test_cell_and_bar_agree(name, system):
    X = space(name)
    cell = homology_table(X, system, "cell")
    bar = homology_table(X, system, "bar")
    assert cell.ranks() == bar.ranks()


@pytest.mark.parametrize("name", ALL)
@pytest.mark.parametrize("system", SYSTEMS)
def test_differential_squares_to_zero(name, system):
    X = space(name)
    for p in range(X.dim + 1):
        assert cellular_complex(X, system, p).composition_is_zero()
        assert barycentric_complex(X, system, p).composition_is_zero()


def divisibility_failures(X):
    """(p, q, cells) for every cycle in the kernel bases that is not divisible on its infinite cells."""
    out = []
    for p in range(X.dim + 1):
        C = cellular_complex(X, "F", p)
        for q in range(X.dim + 1):
            for k in homology_basis(X, "F", p, q).kernel:
                bad = cycle_divisibility(X, C.chain(q, dict(enumerate(k))))
                if bad:
                    out.append((p, q, bad))
    return out


@pytest.mark.parametrize("name", ["tp:1", "line-r2", "elliptic:3", "elliptic:5", "nodal-genus2", "torus:1,1", "torus:3,3"])
def test_kernel_bases_divisible(name):
    assert divisibility_failures(space(name)) == []


def test_divisibility_fails_with_sedentary_edges():
    # In TP^2 the sedentary edge p0-p01 cancels the boundary of the ray o-p0 at p0,
    # so the loop o, p0, p01, p1 is an F_0 cycle with undivided coefficients.
    X = space("tp:2")
    C = cellular_complex(X, "F", 0)
    loop = Chain("cell", "F", 0, 1, {"c_0": {(): 1}, "c0_1": {(): 1}, "c1_0": {(): -1}, "c_1": {(): -1}})
    assert boundary(X, loop).is_zero()
    assert cycle_divisibility(X, loop) == ["c0_1", "c1_0", "c_0", "c_1"]
    assert homology_basis(X, "F", 0, 1).rank == 0
    assert (0, 1, ["c0_1", "c1_0", "c_0", "c_1"]) in divisibility_failures(X)


@pytest.mark.parametrize("name", ["elliptic:3", "tp:2", "nodal-genus2", "torus:1,1", "tp-product:1,1"])
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_boundary_commutes_with_subdivision(name, seed):
    X = space(name)
    rng = random.Random(seed)
    p = rng.randint(0, X.dim)
    q = rng.randint(1, X.dim)
    C = cellular_complex(X, "F", p)
    ch = C.chain(q, {i: rng.randint(-3, 3) for i in range(C.size(q))})
    assert boundary(X, ch) == C.chain(q - 1, C.apply(q, C.vector(ch)))
    assert boundary(X, cell_to_bar(X, ch)) == cell_to_bar(X, boundary(X, ch))
    assert boundary(X, boundary(X, ch)).is_zero() if q > 1 else True


class TestStraight:
    def test_elliptic_fundamental_class(self):
        X = space("elliptic:3")
        Z = straight_class(X, {"e0": 1, "e1": 1, "e2": 1})
        C = cellular_complex(X, "F", 1)
        assert homology_basis(X, "F", 1, 1).coordinates(C.vector(Z)) == [1]

    def test_tp2_hyperplane(self):
        X = space("tp:2")
        Z = straight_class(X, {"c_0": 1, "c_1": 1, "c_2": 1})
        C = cellular_complex(X, "F", 1)
        assert homology_basis(X, "F", 1, 1).coordinates(C.vector(Z)) == [1]

    def test_unbalanced(self):
        with pytest.raises(NotBalanced):
            straight_class(space("tp:2"), {"c_0": 1, "c_1": 1})

    def test_single_ray(self):
        with pytest.raises(NotBalanced):
            straight_class(space("line-r2"), {"r0": 1})


class TestCowaves:
    def test_closed_curve(self):
        r = cowave_chain(space("elliptic:3"), {"e0": 1, "e1": 1, "e2": 1})
        assert r.m == 1 and r.cobalanced

    def test_open_edge(self):
        assert not cowave_chain(space("elliptic:3"), {"e0": 1}).cobalanced

    def test_zero_coweights(self):
        assert cowave_chain(space("elliptic:3"), {"e0": 0, "e1": 0}).cobalanced

    def test_varying_wave_dimension(self):
        with pytest.raises(NotPurelySkeletal):
            cowave_chain(space("nodal-genus2"), {"v": 1, "a1": 1})

    def test_cobalanced_iff_balanced_at_finite_points(self):
        X = space("tp:2")
        C = cellular_complex(X, "Wdual", 1)
        owner = {C.offsets[0][i] + a: v for i, v in enumerate(C.cells[0]) for a in range(C.fiber(0, i).rank)}

        def dual_area(f):
            # the area form of the chart at o, written in the reference chart of f
            return {(0, 1): X.transport_poly({(0, 1): 1}, X.ref(f), "o")[(0, 1)]}

        def support(cells):
            r = cowave_chain(X, {f: dual_area(f) for f in cells})
            return sorted({owner[j] for j in C.apply(1, r.vector)})

        # balanced hyperplane: the wave cosheaf survives at infinity, so only the points at infinity remain
        assert support(["c_0", "c_1", "c_2"]) == ["p0", "p1", "p2"]
        assert "o" in support(["c_0", "c_1"])


def test_chain_arithmetic():
    a = Chain("cell", "F", 0, 1, {"e0": {(): 2}})
    b = Chain("cell", "F", 0, 1, {"e0": {(): 2}, "e1": {(): 1}})
    assert (b - a).terms == {"e1": {(): 1}}
    assert a.scaled(0).is_zero()
