from fractions import Fraction as Fr

import pytest

from conftest import space
from tropicore.errors import DimensionMismatch, NotSpanning, NotTransversal
from tropicore.homology import Chain, homology_basis
from tropicore.intersection import (
    check_transversal,
    dot_product,
    geo_from_bar,
    geo_from_cells,
    geo_point,
    pairing,
    polarized_torus,
    q_form,
    walk_cycle,
)
from tropicore.waves import bar_class, cap_eigenwave

E1, E2 = {(0,): 1}, {(1,): 1}


def _torus_reps(X, start_h, start_v):
    return [walk_cycle(X, "L00", start_h, (1, 0), E1), walk_cycle(X, "L00", start_h, (1, 0), E2),
            walk_cycle(X, "L00", start_v, (0, 1), E1), walk_cycle(X, "L00", start_v, (0, 1), E2)]


class TestCurves:
    def test_elliptic_self_pairing(self):
        X = space("elliptic:3")
        G = geo_from_cells(X, homology_basis(X, "F", 0, 1).cycle_chain(0))
        assert pairing(X, G, G) == 3

    @pytest.mark.parametrize("name,l", [("elliptic:3", 3), ("elliptic:5", 5)])
    def test_q_form_is_length(self, name, l):
        X = space(name)
        G = geo_from_cells(X, homology_basis(X, "F", 0, 1).cycle_chain(0))
        J = q_form(X, 0, 1, [G])
        assert J.g == 1 and J.Q == [[l]] and J.abelian

    def test_point_meets_cycle_once(self):
        X = space("elliptic:3")
        G = geo_from_cells(X, homology_basis(X, "F", 0, 1).cycle_chain(0))
        P = geo_point(X, "e0", (Fr(1, 2),), {(0,): 1})
        assert pairing(X, P, G) == pairing(X, G, P) == 1

    def test_nodal_pairings_match_eigenwave(self):
        X = space("nodal-genus2")
        H = homology_basis(X, "F", 0, 1)
        G = [geo_from_cells(X, H.cycle_chain(i)) for i in range(2)]
        for a in range(2):
            capped = geo_from_bar(X, cap_eigenwave(X, G[a].source, 1))
            for b in range(2):
                assert pairing(X, G[a], G[b]) == pairing(X, capped, G[b])
        assert q_form(X, 0, 1, G).Q == [[3, 0], [0, 3]]


class TestTorus:
    def test_fundamental_class_area(self):
        X = space("torus:1,1")
        Z = homology_basis(X, "F", 0, 2).cycle_chain(0)
        G = geo_from_cells(X, Z)
        assert pairing(X, G, G) == 2
        assert pairing(X, geo_from_bar(X, cap_eigenwave(X, Z, 2)), G) == 2

    def test_walked_circles_cross_once(self):
        X = space("torus:1,1")
        h = walk_cycle(X, "L00", (Fr(1, 7), Fr(1, 11)), (1, 0), E1)
        v = walk_cycle(X, "L00", (Fr(2, 7), Fr(1, 13)), (0, 1), E2)
        assert check_transversal(X, h, v).ok
        assert pairing(X, h, v) == pairing(X, v, h) == 1

    def test_parallel_copies_not_transversal(self):
        X = space("torus:1,1")
        h = walk_cycle(X, "L00", (Fr(1, 7), Fr(1, 11)), (1, 0), E1)
        assert not check_transversal(X, h, h)
        with pytest.raises(NotTransversal):
            pairing(X, h, h)

    def test_q_form_with_pushed_partners(self):
        X = space("torus:1,1")
        reps = _torus_reps(X, (Fr(1, 7), Fr(1, 11)), (Fr(2, 7), Fr(1, 13)))
        parts = _torus_reps(X, (Fr(1, 4), Fr(1, 5)), (Fr(1, 5), Fr(1, 17)))
        hc = lambda fr: Chain("cell", "F", 1, 1, {f"h{i}0": fr for i in range(3)})
        vc = lambda fr: Chain("cell", "F", 1, 1, {f"u0{j}": fr for j in range(3)})
        cl = [bar_class(X, 1, 1, c) for c in [hc(E1), hc(E2), vc(E1), vc(E2)]]
        J = q_form(X, 1, 1, reps, parts, cl)
        assert J.g == 4 and J.symmetric and J.nondegenerate
        assert J.Q == [[0, 0, 0, 1], [0, 0, -1, 0], [0, -1, 0, 0], [1, 0, 0, 0]]
        assert not J.abelian

    def test_reps_without_source_need_classes(self):
        X = space("torus:1,1")
        reps = _torus_reps(X, (Fr(1, 7), Fr(1, 11)), (Fr(2, 7), Fr(1, 13)))
        with pytest.raises(NotSpanning):
            q_form(X, 1, 1, reps)


class TestDimensions:
    def test_low_total_dimension_is_empty(self):
        X = space("torus:1,1")
        P = geo_point(X, "L00", (Fr(1, 3), Fr(1, 5)), {})
        h = walk_cycle(X, "L00", (Fr(1, 7), Fr(1, 11)), (1, 0), E1)
        # q' + q'' = 1 < 2
        assert dot_product(X, P, h).terms == []

    def test_pairing_needs_complementary_degrees(self):
        X = space("torus:1,1")
        h = walk_cycle(X, "L00", (Fr(1, 7), Fr(1, 11)), (1, 0), {})
        with pytest.raises(DimensionMismatch):
            pairing(X, h, h)

    def test_q_form_degree(self):
        X = space("torus:1,1")
        with pytest.raises(DimensionMismatch):
            q_form(X, 0, 1, [])


class TestPolarizedTorus:
    def test_positive(self):
        T = polarized_torus([[2, 1], [1, 2]])
        assert T.det == 3 and T.abelian
        assert T.gamma2 == [[Fr(2, 3), Fr(-1, 3)], [Fr(-1, 3), Fr(2, 3)]]

    def test_indefinite(self):
        T = polarized_torus([[0, 1], [1, 0]])
        assert T.nondegenerate and not T.abelian

    def test_degenerate(self):
        T = polarized_torus([[1, 1], [1, 1]])
        assert T.det == 0 and not T.nondegenerate and T.gamma2 is None

    def test_render(self):
        out = polarized_torus([[3]]).render()
        assert out.splitlines()[:3] == ["g = 1", "Q =", "[3]"]
        assert "abelian variety: yes" in out
