"""Independent reference computations used by the tests."""

from itertools import combinations

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from tropicore.tropical_space import barycentric_subdivision


def simplicial_complex(X):
    """The barycentric triangulation as plain vertex sets (family centers), closed under faces."""
    B = barycentric_subdivision(X)
    top = [frozenset(s.vertices) for q in B.simplices for s in B.simplices[q]]
    faces = set()
    for s in top:
        for k in range(1, len(s) + 1):
            faces.update(frozenset(c) for c in combinations(sorted(s), k))
    by_dim = {}
    for s in faces:
        by_dim.setdefault(len(s) - 1, []).append(tuple(sorted(s)))
    return {d: sorted(v) for d, v in by_dim.items()}


def _boundary_matrix(faces, d):
    rows = {s: i for i, s in enumerate(faces.get(d - 1, []))}
    cols = faces.get(d, [])
    M = [[0] * len(cols) for _ in rows]
    for j, s in enumerate(cols):
        for i in range(len(s)):
            M[rows[s[:i] + s[i + 1:]]][j] = (-1) ** i
    return M


def _factors(M):
    if not M or not M[0]:
        return []
    return [int(x) for x in invariant_factors(Matrix(M), domain=ZZ) if x]


def simplicial_homology(X):
    """{q: (betti, torsion)} with integer coefficients, via Smith normal form in sympy."""
    faces = simplicial_complex(X)
    top = max(faces)
    out = {}
    for q in range(top + 1):
        n = len(faces[q])
        r_out = len(_factors(_boundary_matrix(faces, q))) if q > 0 else 0
        f_in = _factors(_boundary_matrix(faces, q + 1)) if q + 1 in faces else []
        out[q] = (n - r_out - len(f_in), [d for d in f_in if d > 1])
    return out
