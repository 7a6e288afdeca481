import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import space
from tropicore.errors import NotCertified, TwistOutOfRange
from tropicore.homology import homology_table
from tropicore.konstruktor import (
    Propeller,
    boundary_identity,
    check_unimodular_smooth,
    descent_volume_balance,
    face_sum_identity,
    finite_simplices,
    is_balanced,
    konstruktor_check,
    konstruktor_embed,
    monodromy_check,
    propeller_space,
    si_dd_zero,
    si_E2,
)

CERTIFIED = ["elliptic:3", "tp:1", "tp:2", "tp-product:1,1"]


class TestCertificate:
    @pytest.mark.parametrize("name", CERTIFIED + ["torus:3,3", "line-r2"])
    def test_passes(self, name):
        assert check_unimodular_smooth(space(name)).ok

    @pytest.mark.parametrize("name", ["elliptic:5", "torus:1,1"])
    def test_fails(self, name):
        c = check_unimodular_smooth(space(name))
        assert not c and c.violations
        assert c.render().startswith("unimodular smooth: no")

    def test_uncertified_space_refused(self):
        X = space("elliptic:5")
        with pytest.raises(NotCertified):
            si_dd_zero(X, 0)


class TestPropellers:
    def test_line_vertex(self):
        # three rays with one balancing relation in R^2 leave a rank-1 space
        X = space("line-r2")
        assert [len(propeller_space(X, "o", l)) for l in range(2)] == [1, 1]

    @pytest.mark.parametrize("name,simplex,ranks", [
        ("elliptic:3", "v0", [1, 1]),
        ("elliptic:3", "e0", [1]),
        ("tp:2", "o", [1, 1, 1]),
        ("tp-product:1,1", "o*o", [1, 2, 1]),
    ])
    def test_ranks(self, name, simplex, ranks):
        X = space(name)
        assert [len(propeller_space(X, simplex, l)) for l in range(len(ranks))] == ranks

    @pytest.mark.parametrize("name", CERTIFIED + ["torus:3,3"])
    def test_basis_is_balanced(self, name):
        X = space(name)
        for D in finite_simplices(X):
            for l in range(X.dim - X.faces[D].dim + 1):
                assert all(is_balanced(X, c) for c in propeller_space(X, D, l))

    def test_scaling(self):
        c = Propeller("e0", 0, {"e0": 1})
        assert c.scaled(0).is_zero() and c.scaled(2).coefficients == {"e0": 2}


@pytest.mark.parametrize("name", CERTIFIED + ["torus:3,3"])
def test_spectral_sequence_matches_homology(name):
    X = space(name)
    T = homology_table(X, "F", "cell")
    for p in range(X.dim + 1):
        assert si_dd_zero(X, p)
        E2 = si_E2(X, p)
        assert {q: E2.get(q, 0) for q in range(X.dim + 1)} == {q: T.rank(p, q) for q in range(X.dim + 1)}


@pytest.mark.parametrize("name", ["elliptic:3", "tp:2", "tp-product:1,1"])
def test_identities_exact(name):
    X = space(name)
    for D in finite_simplices(X):
        k = X.faces[D].dim
        for l in range(X.dim - k + 1):
            for c in propeller_space(X, D, l):
                for r in range(k + 1):
                    lhs, rhs = boundary_identity(X, c, r)
                    assert lhs == rhs
                    assert monodromy_check(X, c, r).exact


def test_torus_report():
    rep = konstruktor_check(space("torus:3,3"))
    assert rep.ok and not rep.failures
    assert rep.boundary_checks == rep.monodromy_checks == 216
    # the 36 checks on triangles at twists 0 and 1 carry the sign (-1)^(k+1)
    assert rep.monodromy_signed == 36
    assert all(rep.lefschetz.values())


def test_uncertified_report():
    rep = konstruktor_check(space("torus:1,1"))
    assert not rep.ok and rep.render().splitlines()[0] == "unimodular smooth: no"


def test_twist_out_of_range():
    X = space("elliptic:3")
    c = propeller_space(X, "e0", 0)[0]
    with pytest.raises(TwistOutOfRange):
        konstruktor_embed(X, c, 2)
    with pytest.raises(TwistOutOfRange):
        monodromy_check(X, c, -1)


def _unimodular(n, rng):
    """Product of random elementary integer matrices with a random sign."""
    M = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2)
        c = rng.randint(-2, 2)
        M[i] = [a + c * b for a, b in zip(M[i], M[j])]
    if rng.random() < 0.5:
        M[0] = [-a for a in M[0]]
    return M


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(2, 4))
@settings(max_examples=60)
def test_face_sum_identity_on_unimodular_simplices(seed, n):
    rng = random.Random(seed)
    M = _unimodular(n, rng)
    shift = [rng.randint(-5, 5) for _ in range(n)]
    pts = [tuple(shift)] + [tuple(s + M[r][i] for i, s in enumerate(shift)) for r in range(n)]
    cut = rng.randint(1, n)
    a, b = pts[:cut], pts[cut:]
    left, mid, right = face_sum_identity(a, b)
    assert left == mid == right


def _combination(X, D, l, rng):
    basis = propeller_space(X, D, l)
    out = {}
    for c in basis:
        x = rng.randint(-3, 3)
        for G, y in c.coefficients.items():
            out[G] = out.get(G, 0) + x * y
    return Propeller(D, l, {G: y for G, y in out.items() if y})


@pytest.mark.parametrize("name", ["elliptic:3", "tp:2", "tp-product:1,1", "torus:3,3"])
@given(seed=st.integers(0, 2 ** 32 - 1))
@settings(max_examples=15)
def test_descent_volume_balance(name, seed):
    X = space(name)
    rng = random.Random(seed)
    simplices = [D for D in finite_simplices(X) if X.faces[D].dim > 0]
    if not simplices:
        return  # only a vertex is finite; there is nothing to descend to
    D = rng.choice(simplices)
    l = rng.randint(0, X.dim - X.faces[D].dim)
    c = _combination(X, D, l, rng)
    v = rng.choice(X.face(D).vertex_ids)
    assert all(not vol for vol in descent_volume_balance(X, c, v).values())
