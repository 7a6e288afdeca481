import json
from fractions import Fraction
from math import factorial

import pytest
from hypothesis import given, strategies as st

from conftest import space
from tropicore.errors import UnknownFace
from tropicore.fileformat import dumps_space, loads_space
from tropicore.library import BUNDLED, affine_simplex, fan_space
from tropicore.tropical_space import (
    barycentric_subdivision,
    is_inf,
    parent_and_family,
    tangent_fibers,
    validate,
)


@pytest.mark.parametrize("name", BUNDLED + ["torus:3,3", "tp-product:1,1"])
def test_bundled_examples_validate(name):
    rep = validate(space(name))
    assert rep.valid, str(rep)


class TestValidate:
    def test_line_is_balanced(self):
        # the bundled line carries its three points at infinity
        rep = validate(space("line-r2"))
        assert rep.valid and rep.compact

    def test_two_rays_unbalanced(self):
        Y = fan_space([(1, 0), (0, 1)], [(0,), (1,)])
        rep = validate(Y)
        assert [(v.kind, v.ids) for v in rep.violations] == [("balancing", ("o",))]

    def test_elliptic_compact(self):
        rep = validate(space("elliptic:3"))
        assert rep.valid and rep.compact

    def test_inconsistent_transition_detected(self):
        doc = json.loads(dumps_space(space("elliptic:3")))
        t = doc["transitions"][0]
        t["translation"] = ["7/2"]
        rep = validate(loads_space(json.dumps(doc)))
        assert not rep.valid


class TestFamilies:
    def test_mobile_face_is_own_parent(self):
        X = space("tp:1")
        p, fam = parent_and_family(X, "o")
        assert p == "o" and fam.members == ["o"]

    def test_tp1_endpoint(self):
        p, fam = parent_and_family(space("tp:1"), "p0")
        assert p == "c_0" and len(fam.members) == 2

    def test_tp2_corner(self):
        p, fam = parent_and_family(space("tp:2"), "p01")
        assert p == "c_01"
        assert len(fam.members) == 4
        assert sorted(len(s) for s in fam.divisorial_index.values()) == [0, 1, 1, 2]

    def test_unknown_face(self):
        with pytest.raises(UnknownFace):
            parent_and_family(space("tp:1"), "nope")


class TestSubdivision:
    def test_segment(self):
        assert barycentric_subdivision(affine_simplex(1)).count(1) == 2

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_simplex_flags(self, d):
        assert barycentric_subdivision(affine_simplex(d)).count(d) == factorial(d + 1)

    def test_tp1(self):
        X = space("tp:1")
        B = barycentric_subdivision(X)
        assert B.count(1) == 2
        ends = {s.vertices[1] for s in B.simplices[1]}
        assert ends == {"p0", "p1"}
        assert all(X.faces[v].sedentarity for v in ends)

    def test_tp2_top_count(self):
        B = barycentric_subdivision(space("tp:2"))
        assert B.count(2) == 6

    @pytest.mark.parametrize("name", ["elliptic:3", "tp:2", "torus:1,1", "nodal-genus2"])
    def test_boundary_faces_are_simplices(self, name):
        B = barycentric_subdivision(space(name))
        for q in range(1, B.dim + 1):
            for i in range(B.count(q)):
                for j, s in B.boundary_terms(q, i):
                    assert 0 <= j < B.count(q - 1) and s in (1, -1)


class TestTangentFibers:
    def test_curve_edge(self):
        assert tangent_fibers(space("elliptic:3"), "e0").ranks == (1, 1, 0)

    def test_line_vertex(self):
        assert tangent_fibers(space("line-r2"), "o").ranks == (2, 0, 0)

    def test_tp1_endpoint(self):
        assert tangent_fibers(space("tp:1"), "p0").ranks == (0, 1, 1)

    def test_tp2(self):
        X = space("tp:2")
        assert tangent_fibers(X, "o").ranks == (2, 2, 0)
        assert tangent_fibers(X, "p0").ranks == (1, 2, 1)
        assert tangent_fibers(X, "p01").ranks == (0, 2, 2)

    def test_nodal_vertex(self):
        assert tangent_fibers(space("nodal-genus2"), "v").ranks == (2, 0, 0)


@given(st.fractions(min_value=0, max_value=3))
def test_point_transport_round_trip(x):
    X = space("elliptic:3")
    y = X.point_in_chart((Fraction(x),), "v0", "v1")
    assert X.point_in_chart(y, "v1", "v0") == (Fraction(x),)


@pytest.mark.parametrize("name", ["tp:2", "tp-product:1,1"])
def test_transitions_compose(name):
    X = space(name)
    for (a, b) in X.transitions:
        for c in X.vertices:
            if (b, c) in X.transitions and (a, c) in X.transitions:
                pt = X.chart(a).coordinates[a]
                if any(is_inf(t) for t in pt):
                    continue
                direct = X.point_in_chart(pt, a, c)
                two = X.point_in_chart(X.point_in_chart(pt, a, b), b, c)
                assert [t for t in direct if not is_inf(t)] == [t for t in two if not is_inf(t)]
