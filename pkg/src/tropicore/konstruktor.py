"""Propellers, the relabeled Steenbrink-Illusie complex and the konstruktor embedding.

Everything here assumes a compact space whose finite cells are unimodular
simplices and whose infinite cells are products of such a simplex with a
cone spanned by divisorial rays.  Around a finite mobile simplex D the
mobile faces G containing D are described by their extra generators: the
finite vertices of G outside D and the rays of G.  A propeller of degree l
is a rational weight on the faces G with dim G = dim D + l that is balanced
along D.

Orientation conventions.  For G above D with extra generators u_1..u_l
(sorted by key) the face G is oriented by Vol(D) ^ u_1 ^ ... ^ u_l.  For a
face D' of D the coefficient on the dual cell of D' in G is
rho_G * Vol(D') ^ u_1 ^ ... ^ u_l, and a bar simplex D' < F_1 < ... < G of
that dual cell carries the sign making Vol(D') ^ (its direction) agree
with the orientation of G, times (-1)^(m(m+3)/2) for m = dim D - dim D'.
The differential d' carries the extra sign (-1)^(dim D + 1).  With these
choices d(c[-r]) = (d'c)[-r] + (d''c)[-r-1] holds exactly, and the cap with
the eigenwave gives phi cap c[-r] = (-1)^(dim D + 1) c[-r-1].  That sign
cannot be removed: the cap satisfies d(phi cap g) = -phi cap d(g), which
is incompatible with both identities holding without signs once dim D >= 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import IdentityFails, NotCertified, TwistOutOfRange
from .exact_linalg import (
    Poly,
    lattice_index,
    poly_add,
    poly_from_vector,
    poly_one,
    poly_scale,
    rational_nullspace,
    rational_rank,
    rational_solve,
    wedge,
)
from .homology import Chain, boundary, carrier_of, homology_table
from .tropical_space import (
    TropicalSpace,
    Violation,
    is_inf,
    poly_ratio,
    validate,
)
from .waves import cap_eigenwave, induced_homology_map


# ---------------------------------------------------------------- local geometry


def _finite_vertices(X: TropicalSpace, fid: str) -> list[str]:
    return [w for w in X.face(fid).vertex_ids if not X.faces[w].sedentarity]


def _coord(X: TropicalSpace, w: str, chart: str) -> tuple[Fraction, ...]:
    got = X.chart(chart).coordinates.get(w)
    if got is not None and not any(is_inf(x) for x in got):
        return tuple(Fraction(x) for x in got)
    return tuple(X.point_in_chart(X.chart(w).coordinates[w], w, chart))


def _rays(X: TropicalSpace, fid: str, chart: str) -> list[tuple]:
    """Ray vectors of an infinite mobile face, written in the given chart."""
    out = set()
    for e in X.below[fid]:
        E = X.faces[e]
        if E.dim != 1 or E.sedentarity:
            continue
        fin = [w for w in E.vertex_ids if not X.faces[w].sedentarity]
        if len(fin) != 1 or len(E.vertex_ids) != 2:
            continue
        (u,) = fin
        g = X.record(e, u).generators[0]
        out.add(tuple(Fraction(x) for x in X.transport_vector(g, u, chart)))
    return sorted(out)


def _sub(a, b) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def _interior_point(X: TropicalSpace, fid: str, chart: str) -> tuple:
    """Barycenter of the finite vertices plus the sum of the rays: a point inside the face."""
    pts = [_coord(X, w, chart) for w in _finite_vertices(X, fid)]
    n = X.chart(chart).ambient
    out = [sum((p[i] for p in pts), Fraction(0)) / len(pts) for i in range(n)]
    for r in _rays(X, fid, chart):
        out = [a + b for a, b in zip(out, r)]
    return tuple(out)


def _items(X: TropicalSpace, D: str, G: str, chart: str) -> dict:
    """Extra generators of G over D: ("v", id) for finite vertices, ("r", vector) for rays."""
    Dv = set(X.face(D).vertex_ids)
    out = {("v", w): None for w in _finite_vertices(X, G) if w not in Dv}
    for r in _rays(X, G, chart):
        out[("r", r)] = r
    return out


def _item_vector(X: TropicalSpace, key, base: str, chart: str) -> tuple:
    if key[0] == "r":
        return key[1]
    return _sub(_coord(X, key[1], chart), _coord(X, base, chart))


def _vol_simplex(X: TropicalSpace, fid: str, chart: str) -> Poly:
    """The oriented volume element of a finite face, in the given chart."""
    if not X.face(fid).dim:
        return poly_one()
    if chart in X.face(fid).vertex_ids:
        return X.volume(fid, chart)
    return X.transport_poly(X.volume(fid), X.ref(fid), chart)


def _vol_join(X: TropicalSpace, Dp: str, keys: Sequence, chart: str) -> Poly:
    """Vol(D') ^ u_1 ^ ... ^ u_l with the u measured from a vertex of D'."""
    base = X.face(Dp).vertex_ids[0]
    out = _vol_simplex(X, Dp, chart)
    for k in keys:
        out = wedge(out, poly_from_vector(_item_vector(X, k, base, chart)))
    return out


def finite_simplices(X: TropicalSpace, k: int | None = None) -> list[str]:
    return sorted(f for f, F in X.faces.items()
                  if not F.sedentarity and F.is_finite and (k is None or F.dim == k))


def link(X: TropicalSpace, D: str, l: int) -> list[str]:
    """Mobile faces G containing D with dim G = dim D + l."""
    d = X.face(D).dim + l
    return sorted(g for g in X.above[D] if not X.faces[g].sedentarity and X.faces[g].dim == d)


# ---------------------------------------------------------------- certificate


@dataclass
class Certificate:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok

    def render(self) -> str:
        if self.ok:
            return "unimodular smooth: yes"
        return "unimodular smooth: no\n" + "\n".join(str(v) for v in self.violations)


def check_unimodular_smooth(X: TropicalSpace) -> Certificate:
    key = ("unimodular",)
    if key in X._cache:
        return X._cache[key]
    bad: list[Violation] = []
    if not X.compact():
        bad.append(Violation("compactness", "space is not compact", ()))
    rep = validate(X)
    if not rep.valid:
        bad.append(Violation("validity", "space does not validate", ()))
    if not bad:
        for f in sorted(X.faces):
            F = X.faces[f]
            if F.sedentarity:
                continue
            fin = _finite_vertices(X, f)
            if not fin:
                bad.append(Violation("unimodular", "mobile face without a finite vertex", (f,)))
                continue
            base = fin[0]
            vecs = [_sub(_coord(X, w, base), _coord(X, base, base)) for w in fin[1:]]
            vecs += [tuple(r) for r in _rays(X, f, base)]
            if len(vecs) != F.dim or (vecs and rational_rank([list(v) for v in vecs]) != F.dim):
                bad.append(Violation("unimodular", "not a simplex times a divisorial cone", (f,)))
                continue
            if any(x.denominator != 1 for v in vecs for x in v):
                bad.append(Violation("unimodular", "edge vectors are not lattice vectors", (f,)))
                continue
            if vecs and lattice_index([[int(x) for x in v] for v in vecs], X.chart(base).ambient) != 1:
                bad.append(Violation("unimodular", "edge vectors do not extend to a lattice basis", (f,)))
        for f in sorted(X.faces):
            F = X.faces[f]
            if F.sedentarity or F.dim != X.dim - 1:
                continue
            v = X.ref(f)
            up = [g for g in X.star_faces(f) if g != f]
            outs = [X.outward_vector(g, f, v) for g in up]
            T = [list(t) for t in X.tangent_basis(f, v)]
            if rational_rank(T + [list(o) for o in outs]) != len(T) + len(outs) - 1:
                bad.append(Violation("smoothness", "codimension-one star is not smooth", (f,)))
    out = Certificate(not bad, bad)
    X._cache[key] = out
    return out


def _require(X: TropicalSpace) -> None:
    cert = check_unimodular_smooth(X)
    if not cert.ok:
        raise NotCertified(cert.render())


# ---------------------------------------------------------------- propellers


@dataclass
class Propeller:
    simplex: str
    l: int
    coefficients: dict = field(default_factory=dict)

    def scaled(self, c) -> "Propeller":
        return Propeller(self.simplex, self.l, {g: c * x for g, x in self.coefficients.items() if c * x})

    def is_zero(self) -> bool:
        return not any(self.coefficients.values())


def _balancing_matrix(X: TropicalSpace, D: str, l: int) -> tuple[list[str], list[list[Fraction]]]:
    chart = X.face(D).vertex_ids[0]
    cols = link(X, D, l)
    rows: list[list[Fraction]] = []
    if l == 0:
        return cols, rows
    n = X.chart(chart).ambient
    for H in link(X, D, l - 1):
        hk = set(_items(X, D, H, chart))
        T = [list(t) for t in X.tangent_basis(H, chart)] if X.faces[H].dim else []
        # coordinates of the quotient by T(H): project onto a complement via a rational basis
        comp = _quotient_map(T, n)
        block = [[Fraction(0)] * len(cols) for _ in comp]
        for j, G in enumerate(cols):
            if not X.leq(H, G):
                continue
            (k,) = [k for k in _items(X, D, G, chart) if k not in hk]
            u = _item_vector(X, k, X.face(D).vertex_ids[0], chart)
            for i, row in enumerate(comp):
                block[i][j] = sum((a * b for a, b in zip(row, u)), Fraction(0))
        rows.extend(block)
    return cols, rows


def _quotient_map(T: list[list], n: int) -> list[list[Fraction]]:
    """Rows of a linear map R^n -> R^{n - rank T} with kernel span(T)."""
    if not T:
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    return [list(v) for v in rational_nullspace([list(map(Fraction, t)) for t in T], n)]


def propeller_space(X: TropicalSpace, D: str, l: int) -> list[Propeller]:
    """A rational basis of the balanced propellers of degree l along D."""
    _require(X)
    key = ("prop", D, l)
    if key in X._cache:
        return X._cache[key]
    cols, rows = _balancing_matrix(X, D, l)
    if not cols:
        basis = []
    elif not rows:
        basis = [[Fraction(int(i == j)) for j in range(len(cols))] for i in range(len(cols))]
    else:
        basis = rational_nullspace(rows, len(cols))
    out = [Propeller(D, l, {g: x for g, x in zip(cols, b) if x}) for b in basis]
    X._cache[key] = out
    return out


def is_balanced(X: TropicalSpace, c: Propeller) -> bool:
    cols, rows = _balancing_matrix(X, c.simplex, c.l)
    vec = [Fraction(c.coefficients.get(g, 0)) for g in cols]
    if any(g not in cols for g in c.coefficients if c.coefficients[g]):
        return False
    return all(sum((a * b for a, b in zip(r, vec)), Fraction(0)) == 0 for r in rows)


def _orient_sign(X: TropicalSpace, big: str, small: str, extra: tuple, chart: str) -> int:
    """+1 when Vol(small) ^ extra agrees with the stored orientation of big."""
    r = poly_ratio(wedge(_vol_simplex(X, small, chart), poly_from_vector(extra)), _vol_simplex(X, big, chart))
    if r is None or r == 0:
        raise ValueError(f"{small} is not a facet of {big}")
    return 1 if r > 0 else -1


def _orient_sign_first(X: TropicalSpace, big: str, small: str, extra: tuple, chart: str) -> int:
    r = poly_ratio(wedge(poly_from_vector(extra), _vol_simplex(X, small, chart)), _vol_simplex(X, big, chart))
    if r is None or r == 0:
        raise ValueError(f"{small} is not a facet of {big}")
    return 1 if r > 0 else -1


def gysin(X: TropicalSpace, c: Propeller) -> list[Propeller]:
    """d'': restriction of a propeller to the finite simplices one dimension higher."""
    _require(X)
    D = c.simplex
    chart = X.face(D).vertex_ids[0]
    out = []
    if c.l == 0:
        return out
    for Dq in finite_simplices(X, X.faces[D].dim + 1):
        if not X.leq(D, Dq):
            continue
        (k,) = list(_items(X, D, Dq, chart))
        s = _orient_sign(X, Dq, D, _item_vector(X, k, chart, chart), chart)
        coeffs = {G: s * x for G, x in c.coefficients.items() if X.leq(Dq, G) and x}
        if coeffs:
            out.append(Propeller(Dq, c.l - 1, coeffs))
    return out


def _opposite_facet(X: TropicalSpace, D: str, v: str) -> str:
    return next(f for f in X.facets_of[D] if v not in X.faces[f].vertex_ids)


def descent_coefficients(X: TropicalSpace, c: Propeller, v: str) -> dict[str, Fraction]:
    """The weights rho_{v r} completing the descent of c to the facet opposite v.

    For every H above D of one degree less, rho_v is the unique number with
    sum_G rho_G u_G + rho_v (v - D') in the span of D' and the generators of H.
    """
    D = c.simplex
    chart = X.face(D).vertex_ids[0]
    n = X.chart(chart).ambient
    Dp = _opposite_facet(X, D, v)
    base = X.face(Dp).vertex_ids[0]
    vvec = _sub(_coord(X, v, chart), _coord(X, base, chart))
    out: dict[str, Fraction] = {}
    if not c.l:
        return out
    for H in link(X, D, c.l - 1):
        hk = set(_items(X, D, H, chart))
        span = [list(_sub(_coord(X, w, chart), _coord(X, base, chart))) for w in X.face(Dp).vertex_ids[1:]]
        span += [list(_item_vector(X, k, base, chart)) for k in hk]
        Q = _quotient_map(span, n)
        rhs = [Fraction(0)] * len(Q)
        for G, x in c.coefficients.items():
            if not x or not X.leq(H, G):
                continue
            (k,) = [k for k in _items(X, D, G, chart) if k not in hk]
            u = _item_vector(X, k, base, chart)
            for i, row in enumerate(Q):
                rhs[i] -= x * sum((a * b for a, b in zip(row, u)), Fraction(0))
        col = [[sum((a * b for a, b in zip(row, vvec)), Fraction(0))] for row in Q]
        if rational_rank(col) != 1:
            raise IdentityFails(f"descent relation at {D} -> {Dp} over {H} is not unique")
        sol = rational_solve(col, rhs)
        if sol is None:
            raise IdentityFails(f"descent relation has no solution at {D} -> {Dp} over {H}")
        out[H] = sol[0]
    return out


def descent_volume_balance(X: TropicalSpace, c: Propeller, v: str) -> dict[str, Poly]:
    """sum_G rho_G Vol(D' q_G r) + rho_v Vol(D' v r) for every H = {D r}; all values should vanish."""
    D = c.simplex
    chart = X.face(D).vertex_ids[0]
    Dp = _opposite_facet(X, D, v)
    rho_v = descent_coefficients(X, c, v)
    out = {}
    for H, x in rho_v.items():
        hk = sorted(_items(X, D, H, chart))
        total = _vol_join(X, Dp, [("v", v)] + hk, chart)
        total = poly_scale(total, x)
        for G, y in c.coefficients.items():
            if y and X.leq(H, G):
                (k,) = [k for k in _items(X, D, G, chart) if k not in hk]
                total = poly_add(total, _vol_join(X, Dp, [k] + hk, chart), y)
        out[H] = total
    return out


def inclusion(X: TropicalSpace, c: Propeller) -> list[Propeller]:
    """d': descent of a propeller to the facets of its simplex, completed to a balanced one."""
    _require(X)
    D = c.simplex
    FD = X.face(D)
    out = []
    if FD.dim == 0:
        return out
    chart = FD.vertex_ids[0]
    for v in FD.vertex_ids:
        Dp = _opposite_facet(X, D, v)
        base = X.face(Dp).vertex_ids[0]
        vvec = _sub(_coord(X, v, chart), _coord(X, base, chart))
        # facet orientation by the outward normal, times (-1)^(k+1) so that d o d = 0
        s = _orient_sign_first(X, D, Dp, tuple(-x for x in vvec), chart) * (1 if FD.dim % 2 else -1)
        coeffs: dict[str, Fraction] = {}
        for G, x in c.coefficients.items():
            if not x:
                continue
            Gp = next(g for g in X.facets_of[G] if not X.faces[g].sedentarity and v not in X.faces[g].vertex_ids)
            coeffs[Gp] = coeffs.get(Gp, Fraction(0)) + s * x
        for H, x in descent_coefficients(X, c, v).items():
            if x:
                coeffs[H] = coeffs.get(H, Fraction(0)) + s * x
        coeffs = {g: x for g, x in coeffs.items() if x}
        if coeffs:
            out.append(Propeller(Dp, c.l, coeffs))
    return out


def si_differentials(X: TropicalSpace, c: Propeller, direction: str) -> list[Propeller]:
    if direction == "gysin":
        return gysin(X, c)
    if direction == "inclusion":
        return inclusion(X, c)
    raise ValueError("direction must be 'gysin' or 'inclusion'")


# ---------------------------------------------------------------- the relabeled SI complex


@dataclass
class SIComplex:
    """The relabeled E1 page in row p: term q is the sum over twists r of K_{p-r}(q-p+2r)[-r]."""

    p: int
    blocks: dict  # q -> list of (k, l, r, simplex, basis list[Propeller])
    matrices: dict  # q -> matrix from degree q to q-1 (rows target, cols source)

    def size(self, q: int) -> int:
        return sum(len(b[4]) for b in self.blocks.get(q, []))

    def ranks(self) -> dict[int, int]:
        out = {}
        for q in sorted(self.blocks):
            dim = self.size(q)
            r_out = rational_rank(self.matrices[q]) if self.matrices.get(q) else 0
            r_in = rational_rank(self.matrices[q + 1]) if self.matrices.get(q + 1) else 0
            out[q] = dim - r_out - r_in
        return out


def _coords_in(X: TropicalSpace, c: Propeller, basis: list[Propeller]) -> list[Fraction]:
    cols = link(X, c.simplex, c.l)
    A = [[Fraction(b.coefficients.get(g, 0)) for b in basis] for g in cols]
    rhs = [Fraction(c.coefficients.get(g, 0)) for g in cols]
    sol = rational_solve(A, rhs)
    if sol is None:
        raise IdentityFails(f"propeller at {c.simplex} is not balanced")
    return sol


def si_complex(X: TropicalSpace, p: int) -> SIComplex:
    _require(X)
    key = ("si", p)
    if key in X._cache:
        return X._cache[key]
    n = X.dim
    blocks: dict[int, list] = {}
    for q in range(0, 2 * n + 1):
        for r in range(0, p + 1):
            l, k = p - r, q - p + 2 * r
            if k < 0 or r > k or k > n:
                continue
            for D in finite_simplices(X, k):
                B = propeller_space(X, D, l)
                if B:
                    blocks.setdefault(q, []).append((k, l, r, D, B))
    blocks = {q: v for q, v in blocks.items() if v}
    offsets = {}
    for q, bl in blocks.items():
        off = 0
        for b in bl:
            offsets[(q, b[2], b[3])] = off
            off += len(b[4])
    matrices = {}
    for q, bl in blocks.items():
        if q - 1 not in blocks:
            continue
        tgt = {(b[2], b[3]): b for b in blocks[q - 1]}
        M = [[Fraction(0)] * sum(len(b[4]) for b in bl) for _ in range(sum(len(b[4]) for b in blocks[q - 1]))]
        col = 0
        for (k, l, r, D, B) in bl:
            for c in B:
                images = [(r, e) for e in inclusion(X, c)] + [(r + 1, e) for e in gysin(X, c)]
                for rr, e in images:
                    t = tgt.get((rr, e.simplex))
                    if t is None:
                        continue
                    off = offsets[(q - 1, rr, e.simplex)]
                    for i, x in enumerate(_coords_in(X, e, t[4])):
                        M[off + i][col] += x
                col += 1
        matrices[q] = M
    out = SIComplex(p, blocks, matrices)
    X._cache[key] = out
    return out


def si_E2(X: TropicalSpace, p: int) -> dict[int, int]:
    """Ranks of the second page in row p, indexed by q."""
    return si_complex(X, p).ranks()


def si_dd_zero(X: TropicalSpace, p: int) -> bool:
    C = si_complex(X, p)
    for q in C.matrices:
        if q - 1 in C.matrices:
            A, B = C.matrices[q - 1], C.matrices[q]
            for i in range(len(A)):
                for j in range(len(B[0])):
                    if sum((A[i][t] * B[t][j] for t in range(len(B))), Fraction(0)):
                        return False
    return True


def si_matches_homology(X: TropicalSpace) -> bool:
    T = homology_table(X, "F", "cell")
    for p in range(X.dim + 1):
        E = si_E2(X, p)
        for q in range(X.dim + 1):
            if E.get(q, 0) != T.rank(p, q):
                return False
    return True


# ---------------------------------------------------------------- konstruktor chains


@dataclass
class KonstruktorChain:
    source: Propeller
    r: int
    chain: Chain


def _flags_between(X: TropicalSpace, lo: str, hi: str) -> list[tuple[str, ...]]:
    out = [(lo,)]
    for _ in range(X.faces[hi].dim - X.faces[lo].dim):
        nxt = []
        for fl in out:
            for g in X.cofacets_of[fl[-1]]:
                if X.leq(g, hi) and not X.faces[g].sedentarity:
                    nxt.append(fl + (g,))
        out = nxt
    return out


def konstruktor_embed(X: TropicalSpace, c: Propeller, r: int) -> KonstruktorChain:
    """c[-r]: the propeller spread over the dual cells of the r-faces of its simplex."""
    _require(X)
    D = c.simplex
    k = X.faces[D].dim
    if r < 0 or r > k:
        raise TwistOutOfRange(f"twist {r} outside 0..{k}")
    chart = X.face(D).vertex_ids[0]
    out = Chain("bar", "F", c.l + r, k + c.l - r)
    faces_r = sorted(f for f in X.below[D] if X.faces[f].dim == r)
    m = k - r
    twist_sign = -1 if (m * (m + 3) // 2) % 2 else 1
    for G, rho in sorted(c.coefficients.items()):
        if not rho:
            continue
        keys = sorted(_items(X, D, G, chart))
        vol_G = _vol_join(X, D, keys, chart)
        for Dp in faces_r:
            coef = _vol_join(X, Dp, keys, chart)
            vol_Dp = _vol_simplex(X, Dp, chart)
            for fl in _flags_between(X, Dp, G):
                pts = [_interior_point(X, f, chart) for f in fl]
                w = vol_Dp
                for a, b in zip(pts, pts[1:]):
                    w = wedge(w, poly_from_vector(_sub(b, a)))
                s = poly_ratio(w, vol_G)
                if not s:
                    raise IdentityFails(f"degenerate bar simplex {fl}")
                car = carrier_of(X, "bar", fl)
                val = X.transport_poly(coef, chart, X.ref(car))
                out.add_term(fl, val, rho * twist_sign * (1 if s > 0 else -1))
    return KonstruktorChain(c, r, out)


def _embed_all(X: TropicalSpace, props: list[Propeller], r: int, p: int, q: int) -> Chain:
    out = Chain("bar", "F", p, q)
    for e in props:
        if 0 <= r <= X.faces[e.simplex].dim:
            out = out + konstruktor_embed(X, e, r).chain
    return out


def boundary_identity(X: TropicalSpace, c: Propeller, r: int) -> tuple[Chain, Chain]:
    """Both sides of d(c[-r]) = (d'c)[-r] + (d''c)[-r-1]."""
    lhs = boundary(X, konstruktor_embed(X, c, r).chain)
    rhs = _embed_all(X, inclusion(X, c), r, lhs.p, lhs.q) + _embed_all(X, gysin(X, c), r + 1, lhs.p, lhs.q)
    return lhs, rhs


def _first_difference(a: Chain, b: Chain) -> str:
    d = a - b
    for key in sorted(d.terms, key=str):
        return f"{key}: {a.terms.get(key, {})} != {b.terms.get(key, {})}"
    return ""


@dataclass
class MonodromyReport:
    simplex: str
    l: int
    r: int
    sign: int
    detail: str = ""

    @property
    def exact(self) -> bool:
        """phi cap c[-r] equals c[-r-1] with no sign."""
        return self.sign == 1

    @property
    def expected(self) -> bool:
        """The sign matches the forced (-1)^(dim D + 1)."""
        return self.sign == self.forced_sign

    forced_sign: int = 1


def monodromy_check(X: TropicalSpace, c: Propeller, r: int) -> MonodromyReport:
    """Compare phi cap c[-r] with c[-r-1] (zero when r is the top twist).

    Returns the sign s with phi cap c[-r] = s c[-r-1]; raises IdentityFails
    when the two chains are not proportional by +-1.
    """
    _require(X)
    k = X.faces[c.simplex].dim
    if r < 0 or r > k:
        raise TwistOutOfRange(f"twist {r} outside 0..{k}")
    lhs = cap_eigenwave(X, konstruktor_embed(X, c, r).chain, 1, description=1)
    if r + 1 <= k:
        rhs = konstruktor_embed(X, c, r + 1).chain
    else:
        rhs = Chain("bar", "F", lhs.p, lhs.q)
    # both sides vanish at the top twist
    forced = 1 if k % 2 or r == k else -1
    if lhs == rhs:
        return MonodromyReport(c.simplex, c.l, r, 1, "", forced)
    if lhs == rhs.scaled(-1):
        return MonodromyReport(c.simplex, c.l, r, -1, "holds up to sign", forced)
    raise IdentityFails(f"phi cap c[-{r}] at {c.simplex}: {_first_difference(lhs, rhs)}")


@dataclass
class KonstruktorReport:
    certificate: Certificate
    dd_zero: bool = False
    e2_ranks: dict = field(default_factory=dict)
    homology_ranks: dict = field(default_factory=dict)
    boundary_checks: int = 0
    monodromy_checks: int = 0
    monodromy_signed: int = 0
    failures: list = field(default_factory=list)
    lefschetz: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return (self.certificate.ok and self.dd_zero and not self.failures
                and self.e2_ranks == self.homology_ranks)

    def render(self) -> str:
        lines = [self.certificate.render().splitlines()[0]]
        if not self.certificate.ok:
            lines.extend(self.certificate.render().splitlines()[1:])
            return "\n".join(lines)
        lines.append(f"d o d = 0: {'yes' if self.dd_zero else 'no'}")
        for p in sorted(self.e2_ranks):
            e = " ".join(str(self.e2_ranks[p].get(q, 0)) for q in sorted(self.homology_ranks[p]))
            h = " ".join(str(self.homology_ranks[p][q]) for q in sorted(self.homology_ranks[p]))
            lines.append(f"p={p}: E2 ranks {e} | homology ranks {h}")
        lines.append(f"boundary identity: {self.boundary_checks} checks")
        lines.append(f"monodromy identity: {self.monodromy_checks} checks, {self.monodromy_signed} with sign -1")
        for (p, q), iso in sorted(self.lefschetz.items()):
            lines.append(f"phi^{q - p}: H_{q}(F_{p}) -> H_{p}(F_{q}) isomorphism: {'yes' if iso else 'no'}")
        for f in self.failures:
            lines.append(f"FAIL {f}")
        lines.append(f"all identities: {'yes' if self.ok else 'no'}")
        return "\n".join(lines)


def konstruktor_check(X: TropicalSpace) -> KonstruktorReport:
    """Run every identity on a basis of every propeller space."""
    cert = check_unimodular_smooth(X)
    rep = KonstruktorReport(cert)
    if not cert.ok:
        return rep
    n = X.dim
    T = homology_table(X, "F", "cell")
    rep.dd_zero = all(si_dd_zero(X, p) for p in range(n + 1))
    for p in range(n + 1):
        rep.e2_ranks[p] = {q: si_E2(X, p).get(q, 0) for q in range(n + 1)}
        rep.homology_ranks[p] = {q: T.rank(p, q) for q in range(n + 1)}
    for D in finite_simplices(X):
        k = X.faces[D].dim
        for l in range(0, n - k + 1):
            for c in propeller_space(X, D, l):
                for r in range(0, k + 1):
                    lhs, rhs = boundary_identity(X, c, r)
                    rep.boundary_checks += 1
                    if lhs != rhs:
                        rep.failures.append(f"boundary at {D}, l={l}, r={r}: {_first_difference(lhs, rhs)}")
                    try:
                        m = monodromy_check(X, c, r)
                        rep.monodromy_checks += 1
                        if m.sign != 1:
                            rep.monodromy_signed += 1
                        if not m.expected:
                            rep.failures.append(f"monodromy sign at {D}, l={l}, r={r}: {m.sign}")
                    except IdentityFails as e:
                        rep.failures.append(str(e))
    for p in range(n + 1):
        for q in range(p + 1, n + 1):
            rep.lefschetz[(p, q)] = induced_homology_map(X, p, q, q - p).isomorphism
    return rep


# ---------------------------------------------------------------- simplex identities


def join_volume(points: Sequence[Sequence]) -> Poly:
    """(x_1 - x_0) ^ ... ^ (x_m - x_0) for an ordered list of points."""
    out = poly_one()
    for x in points[1:]:
        out = wedge(out, poly_from_vector(_sub(x, points[0])))
    return out


def facets_with_signs(points: Sequence) -> list[tuple[int, list]]:
    """Codimension-one faces of an ordered simplex with their boundary signs."""
    return [((-1) ** i, list(points[:i]) + list(points[i + 1:])) for i in range(len(points))]


def face_sum_identity(a: Sequence, b: Sequence) -> tuple[Poly, Poly, Poly]:
    """Sum over facets t of b of Vol(a t), Vol(a) ^ Vol(b), and the sum over facets t of a of Vol(t b).

    The last sum carries the boundary sign (-1)^(dim a) so that all three agree.
    """
    left: Poly = {}
    for s, t in facets_with_signs(b):
        left = poly_add(left, join_volume(list(a) + t), s)
    mid = wedge(join_volume(a), join_volume(b))
    right: Poly = {}
    for s, t in facets_with_signs(a):
        if t:
            right = poly_add(right, join_volume(t + list(b)), s)
        else:
            right = poly_add(right, join_volume(list(b)), s)
    return left, mid, poly_scale(right, (-1) ** (len(a) - 1))
