"""Intersections of framed geometric chains, the pairing, and polarized tori.

A geometric simplex is an affine simplex with rational vertices written in
the reference chart of a finite simplicial top face whose closure contains
it.  Its framing is a polyvector in the same chart.  Constant forms are
integrated over a k-cell by evaluating them on the normalized volume
polyvector (v_1 - v_0) ^ ... ^ (v_k - v_0), summed over a triangulation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import ChartMismatch, DimensionMismatch, NotSpanning, NotTransversal, TropicoreError
from .exact_linalg import (
    Poly,
    contract,
    pair_form,
    poly_add,
    poly_from_vector,
    poly_one,
    poly_scale,
    rational_inverse,
    rational_nullspace,
    rational_rank,
    rational_solve,
    rref,
    wedge,
    wedge_vectors,
)
from .homology import Chain, carrier_of, cell_to_bar
from .tropical_space import TropicalSpace, barycentric_subdivision, poly_ratio

Point = tuple[Fraction, ...]


@dataclass
class GeoSimplex:
    face: str
    vertices: tuple[Point, ...]
    framing: Poly

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def edge_vectors(self) -> list[list[Fraction]]:
        a = self.vertices[0]
        return [[y - x for x, y in zip(a, b)] for b in self.vertices[1:]]

    def orientation(self) -> Poly:
        return wedge_vectors(self.edge_vectors()) if self.dim else poly_one()


@dataclass
class GeoChain:
    p: int
    q: int
    simplices: list[GeoSimplex] = field(default_factory=list)
    source: Chain | None = None

    def scaled(self, c) -> "GeoChain":
        return GeoChain(self.p, self.q, [GeoSimplex(s.face, s.vertices, poly_scale(s.framing, c)) for s in self.simplices],
                        self.source.scaled(c) if self.source is not None else None)

    def __add__(self, other: "GeoChain") -> "GeoChain":
        src = self.source + other.source if self.source is not None and other.source is not None else None
        return GeoChain(self.p, self.q, self.simplices + other.simplices, src)


def _pt(x) -> Point:
    return tuple(Fraction(a) for a in x)


def _check_top(X: TropicalSpace, f: str) -> None:
    F = X.face(f)
    if F.dim != X.dim or F.sedentarity or not F.is_finite or len(F.vertex_ids) != F.dim + 1:
        raise TropicoreError(f"geometric simplices must lie in finite simplicial top faces, not {f}")


# ---------------------------------------------------------------- builders


def geo_point(X: TropicalSpace, face: str, point: Sequence, framing: Poly, p: int | None = None) -> GeoChain:
    _check_top(X, face)
    deg = p if p is not None else len(next(iter(framing))) if framing else 0
    return GeoChain(deg, 0, [GeoSimplex(face, (_pt(point),), dict(framing))])


def geo_from_cells(X: TropicalSpace, chain: Chain) -> GeoChain:
    """A cellular chain supported on top faces, as geometric simplices with vertex order from the face."""
    if chain.kind != "cell":
        raise TypeError("expected a cellular chain")
    out = GeoChain(chain.p, chain.q, [], chain)
    for f, beta in sorted(chain.terms.items()):
        _check_top(X, f)
        F = X.face(f)
        r = F.vertex_ids[0]
        co = X.chart(r).coordinates
        verts = tuple(_pt(co[w]) for w in F.vertex_ids)
        s = GeoSimplex(f, verts, beta)
        c = poly_ratio(s.orientation(), X.volume(f)) if F.dim else 1
        out.simplices.append(GeoSimplex(f, verts, beta if c > 0 else poly_scale(beta, -1)))
    return out


def geo_from_bar(X: TropicalSpace, chain: Chain) -> GeoChain:
    """A barycentric chain as geometric simplices spanned by face barycenters.

    Each simplex is placed in the first top face above its carrier.
    """
    if chain.kind != "bar":
        chain = cell_to_bar(X, chain)
    B = barycentric_subdivision(X)
    out = GeoChain(chain.p, chain.q, [], chain)
    for fl, beta in sorted(chain.terms.items()):
        c = carrier_of(X, "bar", fl)
        tops = sorted(g for g in X.above[c] if X.faces[g].dim == X.dim)
        if not tops:
            raise TropicoreError(f"carrier {c} is not contained in a top face")
        f = tops[0]
        _check_top(X, f)
        r = X.ref(f)
        verts = tuple(_pt(B.point(X.center(x), r)) for x in fl)
        out.simplices.append(GeoSimplex(f, verts, X.transport_poly(beta, X.ref(c), r)))
    return out


def walk_cycle(X: TropicalSpace, face: str, start: Sequence, direction: Sequence, framing: Poly,
               p: int | None = None, max_pieces: int = 1000) -> GeoChain:
    """Follow a straight line from a point until it closes up, cutting it at the walls between top faces."""
    _check_top(X, face)
    x0 = _pt(start)
    if stratum_of(X, face, x0) != face:
        raise TropicoreError("the starting point must lie in the open face")
    f, x, d, beta = face, x0, _pt(direction), dict(framing)
    pieces: list[GeoSimplex] = []
    deg = p if p is not None else (len(next(iter(framing))) if framing else 0)
    for _ in range(max_pieces):
        F = X.face(f)
        r = F.vertex_ids[0]
        co = X.chart(r).coordinates
        V = [_pt(co[w]) for w in F.vertex_ids]
        lam = _barycentric(V, x)
        dl = _barycentric_direction(V, d)
        ts = [l / -e for l, e in zip(lam, dl) if e < 0]
        if not ts:
            raise TropicoreError("the line does not leave the face")
        t = min(ts)
        if f == face and pieces:
            s = _param_on_ray(x, d, x0)
            if s is not None and 0 < s <= t:
                pieces.append(GeoSimplex(f, (x, x0), beta))
                return GeoChain(deg, 1, pieces)
        y = tuple(a + t * b for a, b in zip(x, d))
        pieces.append(GeoSimplex(f, (x, y), beta))
        lam_y = [l + t * e for l, e in zip(lam, dl)]
        zero = [i for i, l in enumerate(lam_y) if l == 0]
        if len(zero) != 1:
            raise TropicoreError("the line passes through a face of codimension two or more")
        wall_verts = frozenset(w for i, w in enumerate(F.vertex_ids) if i not in zero)
        wall = next(h for h in X.facets_of[f] if frozenset(X.face(h).vertex_ids) == wall_verts)
        nxt = [g for g in X.cofacets_of[wall] if g != f and not X.faces[g].sedentarity]
        if len(nxt) != 1:
            raise TropicoreError(f"the line reaches the wall {wall} with {len(nxt)} continuations")
        g = nxt[0]
        _check_top(X, g)
        h = X.ref(wall)
        rg = X.face(g).vertex_ids[0]
        y = X.point_in_chart(X.point_in_chart(y, r, h), h, rg)
        d = tuple(_move_vector(X, _move_vector(X, d, r, h), h, rg))
        beta = X.transport_poly(X.transport_poly(beta, r, h), h, rg)
        f, x = g, _pt(y)
        d = _pt(d)
    raise TropicoreError("the line did not close up")


def _move_vector(X: TropicalSpace, v: Sequence, a: str, b: str) -> list:
    return list(v) if a == b else X.transition(a, b).apply_vector(v)


def _param_on_ray(x: Point, d: Point, target: Point) -> Fraction | None:
    s = None
    for a, b, c in zip(x, d, target):
        if b == 0:
            if a != c:
                return None
            continue
        t = (c - a) / b
        if s is None:
            s = t
        elif s != t:
            return None
    return s


def _barycentric(V: list[Point], x: Point) -> list[Fraction]:
    rows = [[v[i] for v in V] for i in range(len(x))] + [[Fraction(1)] * len(V)]
    sol = rational_solve(rows, list(x) + [Fraction(1)])
    if sol is None:
        raise TropicoreError("point is not in the affine span of the face")
    return sol


def _barycentric_direction(V: list[Point], d: Point) -> list[Fraction]:
    rows = [[v[i] for v in V] for i in range(len(d))] + [[Fraction(1)] * len(V)]
    sol = rational_solve(rows, list(d) + [Fraction(0)])
    if sol is None:
        raise TropicoreError("direction is not tangent to the face")
    return sol


# ---------------------------------------------------------------- strata and transversality


def stratum_of(X: TropicalSpace, face: str, x: Point) -> str | None:
    """The face of the closure of a top face whose relative interior contains x (None if outside)."""
    F = X.face(face)
    r = F.vertex_ids[0]
    V = [_pt(X.chart(r).coordinates[w]) for w in F.vertex_ids]
    lam = _barycentric(V, x)
    if any(l < 0 for l in lam):
        return None
    verts = frozenset(w for w, l in zip(F.vertex_ids, lam) if l > 0)
    for g in X.below[face]:
        if frozenset(X.face(g).vertex_ids) == verts:
            return g
    return None


@dataclass
class IntersectionRecord:
    first: int
    second: int
    face: str
    vertices: tuple[Point, ...]
    dim: int


@dataclass
class TransversalPairCertificate:
    records: list[IntersectionRecord]
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def chain_violations(X: TropicalSpace, chain: GeoChain, label: str = "") -> list[str]:
    """Faces of codimension k of a simplex may only meet strata of dimension n-k or more."""
    out = []
    n = X.dim
    for i, s in enumerate(chain.simplices):
        _check_top(X, s.face)
        q = s.dim
        for m in range(1, q + 2):
            for sub in combinations(s.vertices, m):
                k = q - (m - 1)
                bc = tuple(sum(c) / m for c in zip(*sub))
                g = stratum_of(X, s.face, bc)
                if g is None:
                    out.append(f"{label}simplex {i} leaves its face {s.face}")
                    break
                if X.faces[g].dim < n - k:
                    out.append(f"{label}simplex {i} has a codimension-{k} face inside the stratum {g}")
    return out


def _common_chart(X: TropicalSpace, f: str, g: str) -> str | None:
    common = sorted(set(X.face(f).vertex_ids) & set(X.face(g).vertex_ids))
    return common[0] if common else None


def _intersect(A: Sequence[Point], B: Sequence[Point]) -> list[Point]:
    """Vertices of the intersection of two closed simplices given by vertex lists."""
    a0, b0 = A[0], B[0]
    Ad = [[y - x for x, y in zip(a0, a)] for a in A[1:]]
    Bd = [[y - x for x, y in zip(b0, b)] for b in B[1:]]
    na, nb = len(Ad), len(Bd)
    N = len(a0)
    # variables z = (lam, mu): a0 + sum lam_i Ad_i = b0 + sum mu_j Bd_j
    eq_rows = [[Ad[i][c] for i in range(na)] + [-Bd[j][c] for j in range(nb)] for c in range(N)]
    eq_rhs = [b0[c] - a0[c] for c in range(N)]
    nv = na + nb
    # inequalities g(z) >= 0 written as (coefficients, constant)
    ineq = [([int(i == j) for j in range(nv)], 0) for i in range(nv)]
    ineq.append(([-1] * na + [0] * nb, 1))
    ineq.append(([0] * na + [-1] * nb, 1))
    R, piv = rref([r + [x] for r, x in zip(eq_rows, eq_rhs)], nv + 1)
    if nv in piv:
        return []
    r = len(piv)
    d = nv - r
    pts: list[Point] = []
    if nv == 0:
        return [a0] if a0 == b0 else []
    for tight in combinations(range(len(ineq)), d):
        rows = [list(row) for row in eq_rows] + [list(ineq[t][0]) for t in tight]
        rhs = list(eq_rhs) + [-ineq[t][1] for t in tight]
        if rational_rank(rows) < nv:
            continue
        z = rational_solve(rows, rhs)
        if z is None:
            continue
        if any(sum(c * zi for c, zi in zip(g, z)) + k < 0 for g, k in ineq):
            continue
        x = tuple(a0[c] + sum(z[i] * Ad[i][c] for i in range(na)) for c in range(N))
        if x not in pts:
            pts.append(x)
    return sorted(pts)


def _affine_dim(pts: Sequence[Point]) -> int:
    if not pts:
        return -1
    return rational_rank([[y - x for x, y in zip(pts[0], p)] for p in pts[1:]]) if len(pts) > 1 else 0


def _span(vectors: list[list[Fraction]]) -> list[list[Fraction]]:
    R, piv = rref(vectors, len(vectors[0])) if vectors else ([], [])
    return [r for r in R[: len(piv)]]


def check_transversal(X: TropicalSpace, first: GeoChain, second: GeoChain) -> TransversalPairCertificate:
    n = X.dim
    viol = chain_violations(X, first, "first chain: ") + chain_violations(X, second, "second chain: ")
    k = first.q + second.q - n
    records = []
    for i, s in enumerate(first.simplices):
        for j, t in enumerate(second.simplices):
            if s.face == t.face:
                P = _intersect(s.vertices, t.vertices)
                if not P:
                    continue
                dim = _affine_dim(P)
                T = X.tangent_basis(s.face)
                span = s.edge_vectors() + t.edge_vectors()
                if rational_rank(span) < len(T) or dim != k:
                    viol.append(f"simplices {i} and {j} are not transversal in {s.face}")
                    continue
                records.append(IntersectionRecord(i, j, s.face, tuple(P), dim))
            else:
                w = _common_chart(X, s.face, t.face)
                if w is None:
                    continue
                rs, rt = X.ref(s.face), X.ref(t.face)
                A = [_pt(X.point_in_chart(v, rs, w)) for v in s.vertices]
                B = [_pt(X.point_in_chart(v, rt, w)) for v in t.vertices]
                P = _intersect(A, B)
                if P and _affine_dim(P) >= max(k, 0):
                    viol.append(f"simplices {i} and {j} meet along a lower stratum")
    return TransversalPairCertificate(records, viol)


# ---------------------------------------------------------------- products


def _orient_complement(t: list[list[Fraction]], own: list[list[Fraction]], P: Poly) -> tuple[list[list[Fraction]], int]:
    """Vectors a with t ^ a spanning the same space as own, and the sign of t ^ a against P."""
    a: list[list[Fraction]] = []
    for v in own:
        if rational_rank(t + a + [v]) > len(t) + len(a):
            a.append(list(v))
    if not a and not t:
        return a, 1
    c = poly_ratio(wedge_vectors(t + a), P)
    if c is None:
        raise TropicoreError("orientation mismatch")
    if c < 0 and a:
        a[0] = [-x for x in a[0]]
        return a, 1
    return a, (1 if c > 0 else -1)


def _normalized_volume(pts: Sequence[Point], t: list[list[Fraction]]) -> Poly:
    """Normalized volume polyvector of a convex polytope of dimension len(t), oriented by t."""
    k = len(t)
    if k == 0:
        return poly_one()
    base = wedge_vectors(t)
    p0 = pts[0]
    if k == 1:
        # project on t and take the extreme points
        vals = sorted(sum(a * b for a, b in zip([y - x for x, y in zip(p0, p)], t[0])) for p in pts)
        lo = next(p for p in pts if sum(a * b for a, b in zip([y - x for x, y in zip(p0, p)], t[0])) == vals[0])
        hi = next(p for p in pts if sum(a * b for a, b in zip([y - x for x, y in zip(p0, p)], t[0])) == vals[-1])
        return poly_from_vector([y - x for x, y in zip(lo, hi)])
    if k == 2:
        # coordinates of the points in the basis t, then a fan triangulation in angular order
        co = []
        for p in pts:
            s = rational_solve([[v[c] for v in t] for c in range(len(p0))], [y - x for x, y in zip(p0, p)])
            co.append(tuple(s))
        cx = sum(c[0] for c in co) / len(co)
        cy = sum(c[1] for c in co) / len(co)
        order = sorted(range(len(co)), key=lambda i: _angle_key(co[i][0] - cx, co[i][1] - cy))
        area2 = Fraction(0)
        for a, b in zip(order, order[1:] + order[:1]):
            area2 += co[a][0] * co[b][1] - co[b][0] * co[a][1]
        return poly_scale(base, area2)
    raise TropicoreError("intersection cells of dimension above 2 are not supported")


def _angle_key(x: Fraction, y: Fraction):
    # exact monotone key for the angle of (x, y) in [0, 2pi)
    if y == 0 and x > 0:
        return (0, Fraction(0))
    if y > 0:
        return (1, -x / (abs(x) + y))
    if y == 0:
        return (2, Fraction(0))
    return (3, x / (abs(x) - y))


@dataclass
class DotTerm:
    face: str
    vertices: tuple[Point, ...]
    form: Poly      # element of W^{n-p'-p''} as a form in the face's reference chart
    value: Fraction | None  # integral of the form over the cell when it is a top-degree form


@dataclass
class DotProduct:
    degree: int
    p: int
    terms: list[DotTerm]

    def total(self) -> Fraction:
        return sum((t.value or 0 for t in self.terms), Fraction(0))


def _volume_form(X: TropicalSpace, f: str, sign: int) -> Poly:
    V = X.canonical_volume(f)
    K, c = min(V.items())
    return {K: Fraction(sign, c)}


def dot_product(X: TropicalSpace, first: GeoChain, second: GeoChain) -> DotProduct:
    n = X.dim
    k = first.q + second.q - n
    out = DotProduct(k, n - first.p - second.p, [])
    if k < 0 or first.p + second.p > n:
        return out
    cert = check_transversal(X, first, second)
    if not cert.ok:
        raise NotTransversal("; ".join(cert.violations))
    for rec in cert.records:
        s, t = first.simplices[rec.first], second.simplices[rec.second]
        T1, T2 = s.edge_vectors(), t.edge_vectors()
        if T1 and T2:
            both = T1 + T2
            null = rational_nullspace([[v[c] for v in both] for c in range(len(both[0]))], len(both))
            tvecs = _span([[sum(z[i] * T1[i][c] for i in range(len(T1))) for c in range(len(T1[0]))] for z in null])
        else:
            tvecs = []
        tvecs = [list(v) for v in tvecs][:k]
        a1, s1 = _orient_complement(tvecs, T1, s.orientation())
        a2, s2 = _orient_complement(tvecs, T2, t.orientation())
        vol_x = wedge_vectors(tvecs + a1 + a2)
        c = poly_ratio(vol_x, X.canonical_volume(s.face))
        omega = _volume_form(X, s.face, 1 if c > 0 else -1)
        prod = poly_scale(wedge(s.framing, X.transport_poly(t.framing, X.ref(t.face), X.ref(s.face))
                                if t.face != s.face else t.framing), s1 * s2)
        form = contract(omega, prod)
        value = None
        if first.p + second.p + k == n:
            value = pair_form(form, _normalized_volume(rec.vertices, tvecs))
        out.terms.append(DotTerm(s.face, rec.vertices, form, value))
    return out


def pairing(X: TropicalSpace, first: GeoChain, second: GeoChain) -> Fraction:
    """The integrated intersection product of chains with p'+q' = p''+q'' = n."""
    n = X.dim
    if first.p + first.q != n or second.p + second.q != n:
        raise DimensionMismatch(f"pairing needs p+q = {n} on both sides")
    if first.q + second.q < n:
        raise DimensionMismatch("the chains have too small total dimension")
    return dot_product(X, first, second).total()


# ---------------------------------------------------------------- polarized tori


@dataclass
class PolarizedTorus:
    g: int
    Q: list[list[Fraction]]
    det: Fraction
    symmetric: bool
    nondegenerate: bool
    positive_definite: bool
    gamma2: list[list[Fraction]] | None

    @property
    def abelian(self) -> bool:
        return self.positive_definite

    def render(self) -> str:
        from .waves import _fmt
        lines = [f"g = {self.g}", "Q ="]
        lines += ["[" + " ".join(_fmt(x) for x in row) + "]" for row in self.Q]
        lines.append(f"det Q = {_fmt(self.det)}")
        lines.append(f"symmetric: {'yes' if self.symmetric else 'no'}")
        lines.append(f"nondegenerate: {'yes' if self.nondegenerate else 'no'}")
        lines.append(f"abelian variety: {'yes' if self.positive_definite else 'no'}")
        return "\n".join(lines)


def _det_and_pd(Q: list[list[Fraction]]) -> tuple[Fraction, bool]:
    n = len(Q)
    A = [list(map(Fraction, r)) for r in Q]
    det = Fraction(1)
    pd = True
    for i in range(n):
        if A[i][i] <= 0:
            pd = False
        piv = next((r for r in range(i, n) if A[r][i]), None)
        if piv is None:
            return Fraction(0), False
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det *= A[i][i]
        for r in range(i + 1, n):
            c = A[r][i] / A[i][i]
            if c:
                A[r] = [x - c * y for x, y in zip(A[r], A[i])]
    return det, pd


def polarized_torus(Q: list[list[Fraction]]) -> PolarizedTorus:
    g = len(Q)
    Q = [[Fraction(x) for x in r] for r in Q]
    sym = all(Q[i][j] == Q[j][i] for i in range(g) for j in range(g))
    det, pd = _det_and_pd(Q) if g else (Fraction(1), True)
    nondeg = det != 0
    gamma2 = None
    if nondeg and g:
        inv = rational_inverse(Q)
        gamma2 = [[inv[i][j] for i in range(g)] for j in range(g)]
    return PolarizedTorus(g, Q, det, sym, nondeg, pd and sym and nondeg, gamma2)


def q_form(X: TropicalSpace, p: int, q: int, representatives: Sequence[GeoChain],
           partners: Sequence[GeoChain] | None = None,
           classes: Sequence[Sequence] | None = None) -> PolarizedTorus:
    """The form Q(a, b) = integral of a . b on representatives of a basis of H_q(F_p).

    partners, when given, are homologous copies used as second arguments
    (for instance pushed-off copies).  Classes are read from the
    representatives' combinatorial sources unless given explicitly.
    """
    from .homology import homology_basis
    from .waves import bar_class
    if p + q != X.dim:
        raise DimensionMismatch("the form is defined for p + q = dim X")
    H = homology_basis(X, "F", p, q)
    g = H.rank
    if classes is None:
        classes = []
        for r in representatives:
            if r.source is None:
                raise NotSpanning("a representative has no combinatorial source; pass classes explicitly")
            classes.append(bar_class(X, p, q, r.source))
    if len(classes) != g or (g and rational_rank([list(c) for c in classes]) < g):
        raise NotSpanning(f"the representatives do not span the free part of rank {g}")
    partners = list(partners) if partners is not None else list(representatives)
    Q = [[pairing(X, a, b) for b in partners] for a in representatives]
    # express in the homology basis: reps = C e, so Q_reps = C Q C^T
    C = [[Fraction(x) for x in c] for c in classes]
    if g:
        Ci = rational_inverse(C)
        M = [[sum(Ci[i][a] * Q[a][b] for a in range(g)) for b in range(g)] for i in range(g)]
        Q = [[sum(M[i][b] * Ci[j][b] for b in range(g)) for j in range(g)] for i in range(g)]
    return polarized_torus(Q)
