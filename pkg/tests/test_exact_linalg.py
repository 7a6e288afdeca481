from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors as sympy_invariant_factors

from tropicore.errors import CompositionNonzero, DimensionMismatch
from tropicore.exact_linalg import (
    IntMatrix,
    determinant,
    exterior_power_map,
    hermite_normal_form,
    homology_of_pair,
    in_lattice,
    integer_kernel,
    invariant_factors,
    lattice_index,
    poly_apply,
    rational_nullspace,
    rational_rank,
    rational_solve,
    saturate_and_basis,
    smith_normal_form,
    wedge,
    wedge_vectors,
)

small = st.integers(min_value=-6, max_value=6)


@st.composite
def int_matrices(draw, max_rows=4, max_cols=4):
    m = draw(st.integers(1, max_rows))
    n = draw(st.integers(1, max_cols))
    return [draw(st.lists(small, min_size=n, max_size=n)) for _ in range(m)]


def _mul(a, b):
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


class TestSmith:
    def test_diag_2_3(self):
        assert invariant_factors([[2, 0], [0, 3]]) == [1, 6]

    def test_zero_matrix(self):
        _, D, _ = smith_normal_form([[0, 0, 0], [0, 0, 0]])
        assert D.is_zero()

    def test_2468(self):
        assert invariant_factors([[2, 4], [6, 8]]) == [2, 4]

    @given(int_matrices())
    def test_decomposition(self, a):
        U, D, V = smith_normal_form(a)
        assert _mul(_mul(U.tolist(), a), V.tolist()) == D.tolist()
        assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
        diag = [D[i, i] for i in range(min(D.shape))]
        assert all(D[i, j] == 0 for i in range(D.rows) for j in range(D.cols) if i != j)
        nz = [d for d in diag if d]
        assert all(d > 0 for d in nz)
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))

    @given(int_matrices())
    def test_against_sympy(self, a):
        ref = [int(x) for x in sympy_invariant_factors(Matrix(a), domain=ZZ) if x]
        assert invariant_factors(a) == ref


class TestHomologyOfPair:
    def test_multiplication_by_two(self):
        assert homology_of_pair(IntMatrix([[0]]), IntMatrix([[2]])) == (0, [2])

    def test_identity_case(self):
        assert homology_of_pair(IntMatrix.zeros(0, 3), IntMatrix.zeros(3, 0)) == (3, [])

    def test_circle(self):
        d1 = IntMatrix([[-1, 0, 1], [1, -1, 0], [0, 1, -1]])
        assert homology_of_pair(IntMatrix.zeros(0, 3), d1) == (1, [])
        assert homology_of_pair(d1, IntMatrix.zeros(3, 0)) == (1, [])

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            homology_of_pair(IntMatrix.zeros(1, 2), IntMatrix.zeros(3, 1))

    def test_nonzero_composition(self):
        with pytest.raises(CompositionNonzero):
            homology_of_pair(IntMatrix([[1]]), IntMatrix([[1]]))


class TestLattices:
    def test_saturate_examples(self):
        assert saturate_and_basis([(1, 0), (0, 1), (-1, -1)]) == [(1, 0), (0, 1)]
        assert saturate_and_basis([]) == []
        assert saturate_and_basis([(2, 0), (0, 2), (2, 2)]) == [(2, 0), (0, 2)]

    def test_hnf(self):
        assert hermite_normal_form([(2, 0), (0, 2), (2, 2)]) == [(2, 0), (0, 2)]

    def test_index(self):
        assert lattice_index([(2, 0), (0, 1)], 2) == 2
        assert lattice_index([(1, 1), (0, 1)], 2) == 1

    @given(int_matrices(3, 4))
    def test_kernel_is_kernel(self, a):
        K = integer_kernel(a, len(a[0]))
        for v in K:
            assert all(sum(x * y for x, y in zip(r, v)) == 0 for r in a)
        assert len(K) == len(a[0]) - rational_rank(a)

    @given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
    def test_hnf_spans_same_lattice(self, vs):
        H = hermite_normal_form(vs)
        assert all(in_lattice(v, H) for v in vs)
        assert len(H) == rational_rank(vs)

    @given(int_matrices(3, 4))
    def test_nullspace_and_solve(self, a):
        n = len(a[0])
        for v in rational_nullspace(a, n):
            assert all(sum(Fraction(x) * y for x, y in zip(r, v)) == 0 for r in a)
        b = [sum(a[i][j] * (j + 1) for j in range(n)) for i in range(len(a))]
        x = rational_solve(a, b)
        assert x is not None
        assert [sum(Fraction(p) * q for p, q in zip(r, x)) for r in a] == b


class TestExterior:
    def test_top_power_is_determinant(self):
        assert exterior_power_map([[1, 2], [3, 4]], 2).tolist() == [[-2]]

    @given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=3, max_size=3), st.integers(1, 3))
    def test_functorial(self, a, k):
        # Lambda^k(A B) = Lambda^k A Lambda^k B
        b = [[1, 2, 0], [0, 1, -1], [1, 0, 1]]
        lhs = exterior_power_map(_mul(a, b), k).tolist()
        rhs = _mul(exterior_power_map(a, k).tolist(), exterior_power_map(b, k).tolist())
        assert lhs == rhs

    @given(st.lists(small, min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3))
    def test_wedge_antisymmetric(self, u, v):
        a, b = wedge_vectors([u]), wedge_vectors([v])
        assert wedge(a, b) == {K: -x for K, x in wedge(b, a).items()}
        assert wedge(a, a) == {}

    @given(int_matrices(3, 3))
    def test_poly_apply_matches_minors(self, a):
        n = len(a[0])
        vecs = [[1 if i == j else 0 for i in range(n)] for j in range(min(2, n))]
        img = poly_apply(a, wedge_vectors(vecs))
        assert img == wedge_vectors([[r[j] for r in a] for j in range(len(vecs))])
