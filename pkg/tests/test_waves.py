import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from tropicore.coefficients import wave_fiber
from tropicore.errors import DeformationTooLarge, NotACocycle, NotACycle, NotDivisible
from tropicore.homology import (
    Chain,
    barycentric_complex,
    boundary,
    cell_to_bar,
    cellular_complex,
    homology_basis,
    homology_table,
    straight_class,
)
from tropicore.tropical_space import barycentric_subdivision, validate
from tropicore.waves import (
    WaveCocycle,
    bar_class,
    cap,
    cap_eigenwave,
    check_wave_values,
    coboundary,
    deform,
    eigenwave,
    eigenwave_cap_cellular,
    homologous,
    induced_homology_map,
    is_cocycle,
    total_length,
)

COMPACT = ["tp:1", "tp:2", "elliptic:3", "elliptic:5", "nodal-genus2", "line-r2", "torus:1,1", "tp-product:1,1"]


def random_cochain(X, r, rng):
    B = barycentric_subdivision(X)
    vals = {}
    for s in B.simplices.get(r, []):
        W = wave_fiber(X, s.carrier, r)
        if W.rank and rng.random() < 0.6:
            v = W.element([rng.randint(-2, 2) for _ in range(W.rank)])
            if v:
                vals[s.flag] = v
    return WaveCocycle(r, vals)


def random_bar_chain(X, p, q, rng):
    Bc = barycentric_complex(X, "F", p)
    return Bc.chain(q, {i: rng.randint(-2, 2) for i in range(Bc.size(q)) if rng.random() < 0.5})


def leibniz_holds(X, rng):
    """One random instance of (-1)^r d(a cap g) = (delta a) cap g + a cap (d g); None if not applicable."""
    q = rng.randint(1, X.dim)
    r = rng.randint(0, q)
    p = rng.randint(0, X.dim - r)
    a = random_cochain(X, r, rng)
    g = random_bar_chain(X, p, q, rng)
    try:
        lhs = boundary(X, cap(X, a, g)).scaled((-1) ** r)
        rhs = cap(X, coboundary(X, a), g) + cap(X, a, boundary(X, g))
    except NotDivisible:
        return None
    return lhs == rhs


@pytest.mark.parametrize("name", COMPACT)
def test_eigenwave_is_a_wave_cocycle(name):
    X = space(name)
    phi = eigenwave(X)
    check_wave_values(X, phi)
    assert is_cocycle(X, phi)


def test_eigenwave_on_elliptic_edges():
    X = space("elliptic:3")
    phi = eigenwave(X)
    # each half-edge from a vertex to the edge midpoint has displacement 1/2 along the edge
    vals = sorted(abs(v[(0,)]) for v in phi.values.values())
    assert vals == [Fraction(1, 2)] * 6


@pytest.mark.parametrize("name", COMPACT)
@given(seed=st.integers(0, 2 ** 32 - 1))
@settings(max_examples=15)
def test_coboundary_squares_to_zero(name, seed):
    X = space(name)
    rng = random.Random(seed)
    r = rng.randint(0, max(0, X.dim - 2))
    a = random_cochain(X, r, rng)
    assert coboundary(X, coboundary(X, a)).is_zero()


@pytest.mark.parametrize("name", ["elliptic:3", "nodal-genus2", "torus:1,1", "tp:2", "tp-product:1,1", "tp:1"])
@given(seed=st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20)
def test_leibniz(name, seed):
    assert leibniz_holds(space(name), random.Random(seed)) in (True, None)


class TestCap:
    def test_constant_one(self):
        X = space("elliptic:3")
        g = cell_to_bar(X, homology_basis(X, "F", 0, 1).cycle_chain(0))
        one = WaveCocycle(0, {s.flag: {(): 1} for s in barycentric_subdivision(X).simplices[0]})
        assert cap(X, one, g) == g

    @pytest.mark.parametrize("name,l", [("elliptic:3", 3), ("elliptic:5", 5)])
    def test_fundamental_cycle_content(self, name, l):
        X = space(name)
        g = homology_basis(X, "F", 0, 1).cycle_chain(0)
        assert [abs(x) for x in bar_class(X, 1, 0, cap_eigenwave(X, g, 1))] == [l]

    def test_straight_class_of_curve(self):
        X = space("elliptic:3")
        Z = straight_class(X, {"e0": 1, "e1": 1, "e2": 1})
        assert cap_eigenwave(X, Z, 1).is_zero()

    def test_tp2_hyperplane_class_vanishes(self):
        X = space("tp:2")
        Z = straight_class(X, {"c_0": 1, "c_1": 1, "c_2": 1})
        capped = cap_eigenwave(X, Z, 1)
        assert homologous(X, 2, 0, capped, Chain("bar", "F", 2, 0))

    def test_descriptions_agree(self):
        X = space("elliptic:3")
        g = homology_basis(X, "F", 0, 1).cycle_chain(0)
        one = eigenwave_cap_cellular(X, g, 1, 1)
        two = eigenwave_cap_cellular(X, g, 1, 2)
        assert two.kind == "cell" and set(two.terms) == {"v0", "v1", "v2"}
        assert homologous(X, 1, 0, one, two)

    def test_zero_power(self):
        X = space("elliptic:3")
        g = homology_basis(X, "F", 0, 1).cycle_chain(0)
        assert eigenwave_cap_cellular(X, g, 0) == g

    def test_not_a_cycle(self):
        X = space("elliptic:3")
        with pytest.raises(NotACycle):
            eigenwave_cap_cellular(X, Chain("cell", "F", 0, 1, {"e0": {(): 1}}), 1)


class TestInducedMaps:
    def test_elliptic(self):
        M = induced_homology_map(space("elliptic:3"), 0, 1, 1)
        assert M.matrix == [[3]] and M.isomorphism

    def test_nodal_not_isomorphism(self):
        M = induced_homology_map(space("nodal-genus2"), 0, 1, 1)
        assert M.rank == 1 and not M.isomorphism
        assert sorted(map(abs, M.matrix[0])) == [3, 3]

    @pytest.mark.parametrize("name", ["tp:2", "tp-product:1,1", "torus:1,1", "torus:3,3"])
    def test_smooth_surfaces(self, name):
        X = space(name)
        for p in range(X.dim + 1):
            for q in range(p, X.dim + 1):
                assert induced_homology_map(X, p, q, q - p).isomorphism

    @pytest.mark.parametrize("name", COMPACT)
    def test_zero_power_is_identity(self, name):
        X = space(name)
        for p in range(X.dim + 1):
            for q in range(X.dim + 1):
                M = induced_homology_map(X, p, q, 0)
                n = len(M.matrix)
                assert M.matrix == [[int(i == j) for j in range(n)] for i in range(n)]


def _coboundary_cocycle(X, g):
    """tau_ab = g_b - T_ab(g_a): changes every chart by a translation."""
    return {(a, b): [y - x for x, y in zip(X.transition(a, b).apply_vector(g[a]), g[b])]
            for (a, b) in X.transitions}


class TestDeform:
    def test_lengthen_elliptic(self):
        X = space("elliptic:3")
        Y = deform(X, {("v2", "v0"): (-1,)}, Fraction(1, 2))
        assert total_length(Y) == Fraction(7, 2)
        assert validate(Y).valid

    @given(st.fractions(min_value=0, max_value=5, max_denominator=12))
    def test_length_is_affine(self, eps):
        X = space("elliptic:3")
        Y = deform(X, {("v2", "v0"): (-1,)}, eps)
        assert total_length(Y) == 3 + eps

    def test_epsilon_zero(self):
        X = space("elliptic:3")
        assert deform(X, {("v2", "v0"): (1,)}, 0) is X

    def test_coboundary_gives_isomorphic_space(self):
        X = space("elliptic:3")
        tau = _coboundary_cocycle(X, {"v0": [Fraction(1)], "v1": [Fraction(0)], "v2": [Fraction(-1, 3)]})
        Y = deform(X, tau, Fraction(1, 4))
        assert total_length(Y) == 3
        assert homology_table(Y).ranks() == homology_table(X).ranks()

    def test_too_large(self):
        with pytest.raises(DeformationTooLarge) as exc:
            deform(space("elliptic:3"), {("v2", "v0"): (1,)}, 5)
        assert 0 < exc.value.bound < 5

    def test_not_antisymmetric(self):
        with pytest.raises(NotACocycle):
            deform(space("elliptic:3"), {("v2", "v0"): (1,), ("v0", "v2"): (1,)}, 1)

    def test_negative_epsilon(self):
        with pytest.raises(ValueError):
            deform(space("elliptic:3"), {}, -1)
