"""Exact integer and rational linear algebra.

Everything here works with Python ints and fractions.Fraction; there is no
floating point anywhere.  Matrices are small immutable row-major objects,
polyvectors are dicts from sorted index tuples to coefficients.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from .errors import CompositionNonzero, DimensionMismatch


class IntMatrix:
    """Immutable integer matrix with an explicit shape (empty shapes allowed)."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, data: Iterable[Iterable[int]], rows: int | None = None, cols: int | None = None):
        body = tuple(tuple(int(x) for x in r) for r in data)
        if rows is None:
            rows = len(body)
        if cols is None:
            cols = len(body[0]) if body else 0
        if len(body) != rows or any(len(r) != cols for r in body):
            raise DimensionMismatch(f"ragged matrix data for shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.data = body

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> "IntMatrix":
        return cls([[c[i] for c in columns] for i in range(rows)], rows, len(columns))

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.data[ij[0]][ij[1]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntMatrix):
            return NotImplemented
        return self.shape == other.shape and self.data == other.data

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"IntMatrix({[list(r) for r in self.data]}, {self.rows}, {self.cols})"

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def row(self, i: int) -> tuple[int, ...]:
        return self.data[i]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.data)

    def transpose(self) -> "IntMatrix":
        return IntMatrix([[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)], self.cols, self.rows)

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        ot = other.transpose().data
        return IntMatrix([[sum(a * b for a, b in zip(r, c)) for c in ot] for r in self.data], self.rows, other.cols)

    def apply(self, v: Sequence) -> list:
        if len(v) != self.cols:
            raise DimensionMismatch(f"vector of length {len(v)} against {self.cols} columns")
        return [sum(a * b for a, b in zip(r, v)) for r in self.data]

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)


def as_int_matrix(a) -> IntMatrix:
    if isinstance(a, IntMatrix):
        return a
    rows = [list(r) for r in a]
    return IntMatrix(rows, len(rows), len(rows[0]) if rows else 0)


# ---------------------------------------------------------------- vectors

def vgcd(v: Iterable[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def primitive(v: Sequence) -> tuple[int, ...]:
    """Primitive integer vector on the ray through a nonzero rational vector."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    iv = [int(Fraction(x) * den) for x in v]
    g = vgcd(iv)
    if g == 0:
        raise ValueError("zero vector has no primitive direction")
    return tuple(x // g for x in iv)


def ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


# ---------------------------------------------------------------- Smith form

def smith_normal_form(a) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U*A*V = D, U and V unimodular, d_i | d_{i+1}, d_i >= 0."""
    A = as_int_matrix(a)
    m, n = A.shape
    M = A.tolist()
    U = IntMatrix.identity(m).tolist()
    V = IntMatrix.identity(n).tolist()

    def row_op(i, j, c):  # row_i += c*row_j
        if c:
            Mi, Mj = M[i], M[j]
            for k in range(n):
                Mi[k] += c * Mj[k]
            Ui, Uj = U[i], U[j]
            for k in range(m):
                Ui[k] += c * Uj[k]

    def col_op(i, j, c):  # col_i += c*col_j
        if c:
            for r in M:
                r[i] += c * r[j]
            for r in V:
                r[i] += c * r[j]

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in M:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    t = 0
    while t < min(m, n):
        best = None
        for i in range(t, m):
            for j in range(t, n):
                x = M[i][j]
                if x and (best is None or abs(x) < abs(M[best[0]][best[1]])):
                    best = (i, j)
                    if abs(x) == 1:
                        break
            if best and abs(M[best[0]][best[1]]) == 1:
                break
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            p = M[t][t]
            dirty = False
            for i in range(t + 1, m):
                if M[i][t]:
                    row_op(i, t, -(M[i][t] // p))
                    if M[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if M[t][j]:
                    col_op(j, t, -(M[t][j] // p))
                    if M[t][j]:
                        dirty = True
            if dirty:
                # bring the smallest remainder to the pivot and repeat
                cand = [(abs(M[i][t]), 0, i) for i in range(t + 1, m) if M[i][t]]
                cand += [(abs(M[t][j]), 1, j) for j in range(t + 1, n) if M[t][j]]
                _, kind, idx = min(cand)
                if kind == 0:
                    swap_rows(t, idx)
                else:
                    swap_cols(t, idx)
                continue
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if M[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, 1)
        if M[t][t] < 0:
            M[t] = [-x for x in M[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    return IntMatrix(U, m, m), IntMatrix(M, m, n), IntMatrix(V, n, n)


def _sparse_rows(a) -> list[dict[int, int]]:
    A = as_int_matrix(a)
    return [{j: x for j, x in enumerate(r) if x} for r in A.data]


def invariant_factors(a, rows: list[dict[int, int]] | None = None) -> list[int]:
    """Nonzero diagonal of the Smith form.

    Sparse elimination on unit pivots first (boundary matrices are mostly
    +-1), then a dense Smith form on whatever is left.
    """
    R = [dict(r) for r in (rows if rows is not None else _sparse_rows(a))]
    R = [r for r in R if r]
    units = 0
    col_index: dict[int, set[int]] = {}
    for i, r in enumerate(R):
        for j in r:
            col_index.setdefault(j, set()).add(i)
    alive = set(range(len(R)))
    progress = True
    while progress:
        progress = False
        for i in sorted(alive):
            r = R[i]
            piv = None
            for j, x in r.items():
                if x in (1, -1) and (piv is None or len(col_index[j]) < len(col_index[piv])):
                    piv = j
            if piv is None:
                continue
            p = r[piv]
            for k in list(col_index[piv]):
                if k == i:
                    continue
                rk = R[k]
                c = -rk[piv] * p
                for j, x in r.items():
                    y = rk.get(j, 0) + c * x
                    if y:
                        if j not in rk:
                            col_index.setdefault(j, set()).add(k)
                        rk[j] = y
                    else:
                        if j in rk:
                            del rk[j]
                            col_index[j].discard(k)
                if not rk:
                    alive.discard(k)
            for j in r:
                col_index[j].discard(i)
            alive.discard(i)
            R[i] = {}
            units += 1
            progress = True
    rest = [R[i] for i in sorted(alive) if R[i]]
    if not rest:
        return [1] * units
    cols = sorted({j for r in rest for j in r})
    pos = {j: k for k, j in enumerate(cols)}
    dense = [[0] * len(cols) for _ in rest]
    for i, r in enumerate(rest):
        for j, x in r.items():
            dense[i][pos[j]] = x
    _, D, _ = smith_normal_form(IntMatrix(dense, len(rest), len(cols)))
    diag = [D[i, i] for i in range(min(D.shape)) if D[i, i]]
    return [1] * units + diag


def integer_rank(a) -> int:
    return len(invariant_factors(a))


def determinant(a) -> int:
    """Bareiss fraction-free determinant."""
    M = as_int_matrix(a).tolist()
    n = len(M)
    if n == 0:
        return 1
    if any(len(r) != n for r in M):
        raise DimensionMismatch("determinant of a non-square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def inverse_unimodular(a) -> IntMatrix:
    A = as_int_matrix(a)
    inv = rational_inverse(A.tolist())
    if any(x.denominator != 1 for r in inv for x in r):
        raise ValueError("matrix is not unimodular")
    return IntMatrix([[int(x) for x in r] for r in inv], A.rows, A.cols)


# ---------------------------------------------------------------- Hermite form / lattices

def hermite_normal_form(vectors: Sequence[Sequence[int]], dim: int | None = None) -> list[tuple[int, ...]]:
    """Row-style HNF basis of the subgroup generated by the given vectors.

    Pivots are positive and strictly increasing in position; entries above a
    pivot are reduced into [0, pivot).  Zero rows are dropped.
    """
    rows = [list(map(int, v)) for v in vectors]
    if dim is None:
        dim = len(rows[0]) if rows else 0
    out: list[list[int]] = []
    col = 0
    while rows and col < dim:
        nz = [r for r in rows if r[col]]
        zr = [r for r in rows if not r[col]]
        if not nz:
            col += 1
            continue
        while len(nz) > 1:
            nz.sort(key=lambda r: abs(r[col]))
            p = nz[0]
            nxt = [p]
            for r in nz[1:]:
                q = r[col] // p[col]
                r2 = [x - q * y for x, y in zip(r, p)]
                if r2[col]:
                    nxt.append(r2)
                elif any(r2):
                    zr.append(r2)
            nz = nxt
        p = nz[0]
        if p[col] < 0:
            p = [-x for x in p]
        for k, o in enumerate(out):
            q = o[col] // p[col]
            if q:
                out[k] = [x - q * y for x, y in zip(o, p)]
        out.append(p)
        rows = zr
        col += 1
    return [tuple(r) for r in out]


def saturate_and_basis(vectors: Sequence[Sequence[int]], dim: int | None = None, saturate: bool = False) -> list[tuple[int, ...]]:
    """HNF basis of the generated subgroup, or of its saturation when asked."""
    vecs = [tuple(map(int, v)) for v in vectors]
    if dim is None:
        dim = len(vecs[0]) if vecs else 0
    if not vecs:
        return []
    if not saturate:
        return hermite_normal_form(vecs, dim)
    return hermite_normal_form(saturation_basis(vecs, dim), dim)


def saturation_basis(vectors: Sequence[Sequence[int]], dim: int) -> list[tuple[int, ...]]:
    """Basis of (span_Q of vectors) intersected with Z^dim."""
    vecs = [list(map(int, v)) for v in vectors if any(v)]
    if not vecs:
        return []
    # generators as columns: U*A*V = D, so the first r columns of U^{-1} span the saturation
    A = IntMatrix.from_columns(vecs, dim)
    U, D, _ = smith_normal_form(A)
    r = sum(1 for i in range(min(D.shape)) if D[i, i])
    Uinv = inverse_unimodular(U)
    return [tuple(Uinv.column(i)) for i in range(r)]


def integer_kernel(a, ncols: int | None = None) -> list[tuple[int, ...]]:
    """Z-basis of {x in Z^n : A x = 0}."""
    A = as_int_matrix(a)
    n = A.cols if ncols is None else ncols
    if A.rows == 0:
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    _, D, V = smith_normal_form(A)
    r = sum(1 for i in range(min(D.shape)) if D[i, i])
    return hermite_normal_form([V.column(j) for j in range(r, n)], n)


def lattice_index(sub: Sequence[Sequence[int]], dim: int) -> int:
    """Index of the generated subgroup in its saturation (1 when saturated)."""
    f = invariant_factors(IntMatrix.from_columns([list(v) for v in sub], dim)) if sub else []
    out = 1
    for x in f:
        out *= x
    return out


def in_lattice(v: Sequence, basis: Sequence[Sequence[int]]) -> bool:
    """Integral membership of a vector in the subgroup spanned by basis."""
    if not any(v):
        return True
    if not basis:
        return False
    sol = rational_solve([list(c) for c in zip(*basis)], list(v))
    if sol is None:
        return False
    hnf = hermite_normal_form(basis, len(v))
    sol = rational_solve([list(c) for c in zip(*hnf)], list(v))
    return sol is not None and all(Fraction(x).denominator == 1 for x in sol)


# ---------------------------------------------------------------- rational elimination

def rref(rows: Sequence[Sequence], ncols: int | None = None) -> tuple[list[list[Fraction]], list[int]]:
    M = [[Fraction(x) for x in r] for r in rows]
    if ncols is None:
        ncols = len(M[0]) if M else 0
    piv: list[int] = []
    r = 0
    for c in range(ncols):
        k = next((i for i in range(r, len(M)) if M[i][c]), None)
        if k is None:
            continue
        M[r], M[k] = M[k], M[r]
        p = M[r][c]
        M[r] = [x / p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [x - f * y for x, y in zip(M[i], M[r])]
        piv.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], piv


def rational_rank(rows: Sequence[Sequence]) -> int:
    rows = [r for r in rows if any(r)]
    if not rows:
        return 0
    return len(rref(rows)[1])


def rational_nullspace(rows: Sequence[Sequence], ncols: int) -> list[list[Fraction]]:
    R, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    out = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, p in enumerate(piv):
            v[p] = -R[i][f]
        out.append(v)
    return out


def rational_solve(rows: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Some solution x of A x = b over Q, or None."""
    ncols = len(rows[0]) if rows else 0
    if not rows:
        return [] if not any(b) else None
    aug = [list(r) + [bb] for r, bb in zip(rows, b)]
    R, piv = rref(aug, ncols + 1)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for i, p in enumerate(piv):
        x[p] = R[i][ncols]
    return x


def rational_inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(rows)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    R, piv = rref(aug, 2 * n)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ValueError("singular matrix")
    return [r[n:] for r in R[:n]]


def integer_row_space_basis(vectors: Sequence[Sequence], dim: int) -> list[tuple[int, ...]]:
    """Saturated integer basis of the rational span of rational vectors."""
    ints = [primitive(v) for v in vectors if any(v)]
    return saturation_basis(ints, dim)


class SparseSolver:
    """Incremental column space over Q for repeated membership queries.

    Columns are sparse dicts row -> value.  Keeps an echelon basis together
    with how each basis vector is combined from the inserted columns.
    """

    def __init__(self):
        self.pivots: dict[int, tuple[dict[int, Fraction], dict[int, Fraction]]] = {}
        self.count = 0

    def _reduce(self, vec: dict[int, Fraction], combo: dict[int, Fraction]):
        vec = dict(vec)
        changed = True
        while changed:
            changed = False
            for r in sorted(vec):
                if r in self.pivots and vec.get(r):
                    bvec, bcombo = self.pivots[r]
                    f = vec[r]
                    for k, x in bvec.items():
                        y = vec.get(k, 0) - f * x
                        if y:
                            vec[k] = y
                        else:
                            vec.pop(k, None)
                    for k, x in bcombo.items():
                        y = combo.get(k, 0) - f * x
                        if y:
                            combo[k] = y
                        else:
                            combo.pop(k, None)
                    changed = True
                    break
        return vec, combo

    def add(self, column: dict[int, object]) -> bool:
        vec = {k: Fraction(v) for k, v in column.items() if v}
        idx = self.count
        self.count += 1
        vec, combo = self._reduce(vec, {idx: Fraction(1)})
        if not vec:
            return False
        p = min(vec)
        f = vec[p]
        vec = {k: x / f for k, x in vec.items()}
        combo = {k: x / f for k, x in combo.items()}
        # keep the basis fully reduced on pivot rows
        for r, (bvec, bcombo) in list(self.pivots.items()):
            g = bvec.get(p)
            if g:
                for k, x in vec.items():
                    y = bvec.get(k, 0) - g * x
                    if y:
                        bvec[k] = y
                    else:
                        bvec.pop(k, None)
                for k, x in combo.items():
                    y = bcombo.get(k, 0) - g * x
                    if y:
                        bcombo[k] = y
                    else:
                        bcombo.pop(k, None)
        self.pivots[p] = (vec, combo)
        return True

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def solve(self, target: dict[int, object]) -> dict[int, Fraction] | None:
        """Coefficients c (by insertion index) with sum c_i col_i = target, or None."""
        vec = {k: Fraction(v) for k, v in target.items() if v}
        neg: dict[int, Fraction] = {}
        vec, neg = self._reduce(vec, neg)
        if vec:
            return None
        return {k: -x for k, x in neg.items() if x}


# ---------------------------------------------------------------- homology of a pair

def homology_of_pair(d_out, d_in) -> tuple[int, list[int]]:
    """Homology at the middle of  C_in --d_in--> C --d_out--> C_out.

    Returns (betti, torsion coefficients > 1).
    """
    Do = as_int_matrix(d_out)
    Di = as_int_matrix(d_in)
    if Do.cols != Di.rows:
        raise DimensionMismatch(f"d_out has {Do.cols} columns but d_in has {Di.rows} rows")
    if Do.rows and Di.cols and not (Do @ Di).is_zero():
        raise CompositionNonzero("d_out * d_in is not zero")
    return homology_from_sparse(_sparse_rows(Do), _sparse_rows(Di), Do.cols)


def homology_from_sparse(out_rows: list[dict[int, int]], in_rows: list[dict[int, int]], n: int) -> tuple[int, list[int]]:
    r_out = len(invariant_factors(None, out_rows))
    f_in = invariant_factors(None, in_rows)
    betti = n - r_out - len(f_in)
    return betti, [d for d in f_in if d > 1]


# ---------------------------------------------------------------- exterior algebra

def wedge_basis(n: int, k: int) -> list[tuple[int, ...]]:
    """Lexicographic basis e_I = e_{i1} ^ ... ^ e_{ik}, i1 < ... < ik."""
    if k < 0 or k > n:
        return []
    return list(combinations(range(n), k))


def exterior_power_map(a, k: int) -> IntMatrix:
    """Matrix of Lambda^k A in lexicographic wedge bases; entries are minors."""
    A = as_int_matrix(a)
    rb = wedge_basis(A.rows, k)
    cb = wedge_basis(A.cols, k)
    data = [[determinant([[A[i, j] for j in J] for i in I]) if k else 1 for J in cb] for I in rb]
    return IntMatrix(data, len(rb), len(cb))


Poly = dict  # tuple[int, ...] -> coefficient


def _merge_sign(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    if set(a) & set(b):
        return 0
    inv = 0
    for x in a:
        for y in b:
            if x > y:
                inv += 1
    return -1 if inv % 2 else 1


def poly_from_vector(v: Sequence) -> Poly:
    return {(i,): x for i, x in enumerate(v) if x}


def poly_one() -> Poly:
    return {(): 1}


def wedge(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for I, x in a.items():
        for J, y in b.items():
            s = _merge_sign(I, J)
            if s:
                K = tuple(sorted(I + J))
                out[K] = out.get(K, 0) + s * x * y
    return {K: x for K, x in out.items() if x}


def wedge_vectors(vectors: Sequence[Sequence]) -> Poly:
    out = poly_one()
    for v in vectors:
        out = wedge(out, poly_from_vector(v))
    return out


def poly_add(a: Poly, b: Poly, c=1) -> Poly:
    out = dict(a)
    for K, x in b.items():
        y = out.get(K, 0) + c * x
        if y:
            out[K] = y
        else:
            out.pop(K, None)
    return out


def poly_scale(a: Poly, c) -> Poly:
    return {K: c * x for K, x in a.items() if c * x}


def poly_degree(a: Poly) -> int | None:
    degs = {len(K) for K in a}
    if len(degs) > 1:
        raise ValueError("inhomogeneous polyvector")
    return degs.pop() if degs else None


def poly_to_coords(a: Poly, n: int, k: int) -> list:
    return [a.get(K, 0) for K in wedge_basis(n, k)]


def coords_to_poly(c: Sequence, n: int, k: int) -> Poly:
    return {K: x for K, x in zip(wedge_basis(n, k), c) if x}


def poly_apply(a, p: Poly) -> Poly:
    """Push a polyvector forward along a linear map given as a matrix (rows x cols)."""
    A = a.tolist() if isinstance(a, IntMatrix) else [list(r) for r in a]
    m = len(A)
    out: Poly = {}
    for I, x in p.items():
        img = poly_one()
        for i in I:
            img = wedge(img, poly_from_vector([A[r][i] for r in range(m)]))
        out = poly_add(out, img, x)
    return out


def poly_zero_coords(p: Poly, coords: Iterable[int]) -> Poly:
    """Image under the projection killing the listed coordinates."""
    s = set(coords)
    return {K: x for K, x in p.items() if not (set(K) & s)}


def contract(form: Poly, vec: Poly) -> Poly:
    """Interior product of a k-form (dual basis coefficients) with an m-vector, m <= k.

    (form |_ vec)(eta) = form(vec ^ eta).
    """
    out: Poly = {}
    for K, f in form.items():
        sK = set(K)
        for I, v in vec.items():
            if not set(I) <= sK:
                continue
            rest = tuple(x for x in K if x not in I)
            s = _merge_sign(I, rest)
            out[rest] = out.get(rest, 0) + s * f * v
    return {K: x for K, x in out.items() if x}


def pair_form(form: Poly, vec: Poly):
    return sum(f * vec.get(K, 0) for K, f in form.items())
