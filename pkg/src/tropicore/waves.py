"""The eigenwave, cap products of wave cochains with chains, and deformations.

Barycentric simplices are flags of mobile faces; their vertices are the
family centers of the flag entries, listed in increasing face dimension.
A wave r-cochain assigns to each r-flag an element of W_r of its carrier,
written in the carrier's reference chart.  Coboundary convention here is
``delta(a) = -a o boundary``, which gives

    (-1)^r d(a cap g) = delta(a) cap g + a cap d(g).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .coefficients import (
    echelon_coords,
    transport_framing,
    transport_wave,
    wave_fiber,
    wedge_action,
)
from .errors import DeformationTooLarge, NotACocycle, NotACycle, TropicoreError
from .exact_linalg import (
    Poly,
    SparseSolver,
    poly_add,
    poly_from_vector,
    poly_one,
    poly_scale,
    wedge,
    rational_rank,
)
from .homology import (
    Chain,
    barycentric_complex,
    boundary,
    carrier_of,
    cell_to_bar,
    cellular_complex,
    homology_basis,
)
from .tropical_space import (
    FaceSpec,
    StarChart,
    TropicalSpace,
    Transition,
    assemble,
    barycentric_subdivision,
    is_inf,
    subdivision_terms,
    validate,
)


@dataclass
class WaveCocycle:
    """A wave r-cochain on the barycentric subdivision."""

    degree: int
    values: dict = field(default_factory=dict)
    eigenwave: bool = False

    def value(self, flag) -> Poly:
        return self.values.get(tuple(flag), {})

    def __add__(self, other: "WaveCocycle") -> "WaveCocycle":
        out = dict(self.values)
        for k, v in other.values.items():
            s = poly_add(out.get(k, {}), v)
            if s:
                out[k] = s
            else:
                out.pop(k, None)
        return WaveCocycle(self.degree, out)

    def is_zero(self) -> bool:
        return not any(self.values.values())


# ---------------------------------------------------------------- eigenwave


def nearby_mobile_point(X: TropicalSpace, center: str, chart: str) -> tuple[Fraction, ...]:
    """The barycenter of a family center, pushed off infinity, written in the given chart.

    Infinite coordinates are replaced by 0 in the center's own reference
    chart and the resulting finite point is carried over by the transition.
    """
    B = barycentric_subdivision(X)
    r = X.ref(center)
    y = B.mobile_point(center, r)
    return tuple(X.point_in_chart(y, r, chart))


def eigen_vector(X: TropicalSpace, start: str, end: str, chart: str) -> list[Fraction]:
    """w = y(end) - y(start) for two family centers, in the given chart."""
    a = nearby_mobile_point(X, start, chart)
    b = nearby_mobile_point(X, end, chart)
    return [y - x for x, y in zip(a, b)]


def eigenwave_value(X: TropicalSpace, centers: Sequence[str], carrier: str) -> Poly:
    """w_{01} ^ w_{12} ^ ... for an ordered list of simplex vertices, in chart ref(carrier)."""
    v = X.ref(carrier)
    out = poly_one()
    for a, b in zip(centers, centers[1:]):
        out = wedge(out, poly_from_vector(eigen_vector(X, a, b, v)))
        if not out:
            break
    return out


def eigenwave(X: TropicalSpace, power: int = 1) -> WaveCocycle:
    """The eigenwave (power=1) or its cup power phi^k on all barycentric k-simplices."""
    key = ("phi", power)
    if key in X._cache:
        return X._cache[key]
    B = barycentric_subdivision(X)
    vals = {}
    for s in B.simplices.get(power, []):
        w = eigenwave_value(X, s.vertices, s.carrier)
        if w:
            vals[s.flag] = w
    out = WaveCocycle(power, vals, eigenwave=True)
    X._cache[key] = out
    return out


def coboundary(X: TropicalSpace, alpha: WaveCocycle) -> WaveCocycle:
    """delta(alpha)(s) = -sum_j (-1)^j alpha(d_j s), pushed to the carrier of s."""
    B = barycentric_subdivision(X)
    r = alpha.degree
    out = {}
    for s in B.simplices.get(r + 1, []):
        acc: Poly = {}
        for j in range(len(s.flag)):
            sub = s.flag[:j] + s.flag[j + 1:]
            a = alpha.value(sub)
            if a:
                acc = poly_add(acc, transport_wave(X, a, carrier_of(X, "bar", sub), s.carrier), -(-1) ** j)
        if acc:
            out[s.flag] = acc
    return WaveCocycle(r + 1, out)


def check_wave_values(X: TropicalSpace, alpha: WaveCocycle) -> None:
    """Raise ValueError if some value does not lie in W_r of its carrier."""
    for fl, val in alpha.values.items():
        wave_fiber(X, carrier_of(X, "bar", fl), alpha.degree).coords(val)


def is_cocycle(X: TropicalSpace, alpha: WaveCocycle) -> bool:
    """delta(alpha) = 0 modulo the divisorial ideals of the carriers."""
    d = coboundary(X, alpha)
    for fl, val in d.values.items():
        c = carrier_of(X, "bar", fl)
        W = wave_fiber(X, c, d.degree)
        if not W.divisorial_ideal:
            return False
        coords = echelon_coords(W.divisorial_ideal, _coords(val, W))
        if coords is None:
            return False
    return True


def _coords(val: Poly, W) -> list:
    from .exact_linalg import poly_to_coords
    return poly_to_coords(val, W.ambient, W.degree)


# ---------------------------------------------------------------- cap product


def cap(X: TropicalSpace, alpha: WaveCocycle, gamma: Chain) -> Chain:
    """alpha cap gamma = sum (alpha(s_{0..r}) ^ beta) s_{r..q} on barycentric chains."""
    if gamma.kind != "bar":
        gamma = cell_to_bar(X, gamma)
    r = alpha.degree
    q = gamma.q
    out = Chain("bar", "F", gamma.p + r, q - r)
    if r > q:
        return out
    for fl, beta in gamma.terms.items():
        front, back = fl[: r + 1], fl[r:]
        a = alpha.value(front)
        if not a:
            continue
        c = carrier_of(X, "bar", fl)
        w = transport_wave(X, a, carrier_of(X, "bar", front), c)
        val = wedge_action(X, c, w, beta)
        if val:
            out.add_term(back, transport_framing(X, val, c, carrier_of(X, "bar", back)))
    return out


def _rev_sign(q: int) -> int:
    return -1 if (q * (q + 1) // 2) % 2 else 1


def cap_eigenwave(X: TropicalSpace, gamma: Chain, k: int, description: int = 1) -> Chain:
    """phi^k cap gamma with simplex vertices ordered by increasing (1) or decreasing (2) face dimension."""
    if gamma.kind != "bar":
        gamma = cell_to_bar(X, gamma)
    if description == 1:
        return cap(X, eigenwave(X, k), gamma) if k else gamma.copy()
    if description != 2:
        raise ValueError("description must be 1 or 2")
    if k == 0:
        return gamma.copy()
    q = gamma.q
    out = Chain("bar", "F", gamma.p + k, q - k)
    if k > q:
        return out
    sign = _rev_sign(q) * _rev_sign(q - k)
    for fl, beta in gamma.terms.items():
        c = carrier_of(X, "bar", fl)
        B = barycentric_subdivision(X)
        verts = B.simplices[q][B.index[fl][1]].vertices
        # reversed order: front = the k+1 largest faces (descending), back = the rest ascending
        front_centers = tuple(reversed(verts[q - k:]))
        w = eigenwave_value(X, front_centers, c)
        if not w:
            continue
        val = wedge_action(X, c, w, beta)
        if val:
            back = fl[: q - k + 1]
            out.add_term(back, transport_framing(X, val, c, carrier_of(X, "bar", back)), sign)
    return out


def bar_to_cell(X: TropicalSpace, chain: Chain) -> Chain | None:
    """A cellular chain whose subdivision equals the given barycentric chain, if there is one."""
    out = Chain("cell", chain.system, chain.p, chain.q)
    for f in X.faces_of_dim(chain.q):
        if X.faces[f].sedentarity:
            continue
        terms = subdivision_terms(X, f)
        if not terms:
            continue
        fl, s = terms[0]
        val = chain.terms.get(fl)
        if val:
            out.add_term(f, val, s)
    return out if cell_to_bar(X, out) == chain else None


def eigenwave_cap_cellular(X: TropicalSpace, gamma: Chain, k: int, description: int = 1) -> Chain:
    """phi^k cap gamma for a cellular cycle.

    Description 1 returns a barycentric chain on the dual cells; description
    2 returns a cellular chain on the (q-k)-skeleton.
    """
    if gamma.kind != "cell":
        raise TypeError("expected a cellular chain")
    if gamma.q > 0 and not boundary(X, gamma).is_zero():
        raise NotACycle("the chain is not a cycle")
    if k == 0:
        return gamma.copy()
    res = cap_eigenwave(X, cell_to_bar(X, gamma), k, description)
    if description == 2:
        cell = bar_to_cell(X, res)
        if cell is None:
            raise TropicoreError("description 2 result is not cellular")
        return cell
    return res


# ---------------------------------------------------------------- classes and induced maps


def bar_class(X: TropicalSpace, p: int, q: int, chain: Chain) -> list[Fraction]:
    """Coordinates over Q of a barycentric F_p cycle in the cellular homology basis of H_q."""
    if chain.kind == "cell":
        chain = cell_to_bar(X, chain)
    H = homology_basis(X, "F", p, q)
    Bc = barycentric_complex(X, "F", p)
    target = Bc.vector(chain)
    if q > 0 and Bc.apply(q, target):
        raise NotACycle("the barycentric chain is not a cycle")
    C = cellular_complex(X, "F", p)
    solver = SparseSolver()
    for g in H.generators:
        solver.add(Bc.vector(cell_to_bar(X, C.chain(q, g))))
    if q + 1 <= X.dim:
        for col in Bc.maps[q + 1]:
            if col:
                solver.add(col)
    sol = solver.solve(target)
    if sol is None:
        raise NotACycle("the chain does not define a homology class")
    return [Fraction(sol.get(i, 0)) for i in range(H.rank)]


def homologous(X: TropicalSpace, p: int, q: int, a: Chain, b: Chain) -> bool:
    """Do two barycentric F_p chains differ by a boundary (over Q)?"""
    if a.kind == "cell":
        a = cell_to_bar(X, a)
    if b.kind == "cell":
        b = cell_to_bar(X, b)
    Bc = barycentric_complex(X, "F", p)
    diff = Bc.vector(a - b)
    if not diff:
        return True
    if q + 1 > X.dim:
        return False
    solver = SparseSolver()
    for col in Bc.maps[q + 1]:
        if col:
            solver.add(col)
    return solver.solve(diff) is not None


@dataclass
class InducedMap:
    source: tuple[int, int]
    target: tuple[int, int]
    matrix: list[list[Fraction]]
    rank: int
    isomorphism: bool

    def render(self) -> str:
        rows = [" ".join(_fmt(x) for x in r) for r in self.matrix]
        body = "\n".join(f"[{r}]" for r in rows) if rows else "[]"
        return body


def _fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def induced_homology_map(X: TropicalSpace, p: int, q: int, k: int) -> InducedMap:
    """Matrix of phi^k cap : H_q(F_p) -> H_{q-k}(F_{p+k}) over Q in the cellular homology bases."""
    src = homology_basis(X, "F", p, q)
    C = cellular_complex(X, "F", p)
    tp, tq = p + k, q - k
    if tq < 0 or tp > X.dim:
        return InducedMap((p, q), (tp, tq), [], 0, src.rank == 0)
    tgt = homology_basis(X, "F", tp, tq)
    cols = []
    for g in src.generators:
        z = C.chain(q, g)
        capped = cap_eigenwave(X, cell_to_bar(X, z), k, 1)
        cols.append(bar_class(X, tp, tq, capped))
    M = [[cols[j][i] for j in range(len(cols))] for i in range(tgt.rank)]
    rank = rational_rank(M) if M and cols else 0
    iso = src.rank == tgt.rank == rank
    return InducedMap((p, q), (tp, tq), M, rank, iso)


# ---------------------------------------------------------------- deformations


def _specs_of(X: TropicalSpace) -> tuple[list[FaceSpec], dict]:
    specs = []
    explicit = {}
    for f, F in sorted(X.faces.items()):
        facets = tuple(X.facets_of[f]) if not F.compact else None
        specs.append(FaceSpec(f, F.vertex_ids, F.dim, F.orientation, facets, F.compact))
        if F.dim == 1 and len(F.vertex_ids) == 1:
            v = F.vertex_ids[0]
            explicit[(f, v)] = X.record(f, v)
    return specs, explicit


def check_overlap_cocycle(X: TropicalSpace, tau: Mapping[tuple[str, str], Sequence]) -> dict:
    """Normalize a cocycle on chart overlaps: fill in reverse pairs, then check antisymmetry and
    the cocycle rule on vertex triples sharing a face."""
    full: dict[tuple[str, str], list[Fraction]] = {}
    for (a, b), vec in tau.items():
        if (a, b) not in X.transitions:
            raise NotACocycle(f"charts {a} and {b} do not overlap")
        if len(vec) != X.chart(b).ambient:
            raise NotACocycle(f"value on ({a},{b}) has the wrong length")
        full[(a, b)] = [Fraction(x) for x in vec]
    for (a, b) in list(full):
        back = [-x for x in X.transition(b, a).apply_vector(full[(a, b)])]
        if (b, a) in full:
            if any(x != y for i, (x, y) in enumerate(zip(full[(b, a)], back))
                   if i not in X.chart(a).infinity_coords):
                raise NotACocycle(f"values on ({a},{b}) and ({b},{a}) are not opposite")
        else:
            full[(b, a)] = back
    zero = {(a, b): [Fraction(0)] * X.chart(b).ambient for (a, b) in X.transitions}
    for k, v in full.items():
        zero[k] = v
    full = zero
    for F in X.faces.values():
        vs = F.vertex_ids
        for a in vs:
            for b in vs:
                for c in vs:
                    if len({a, b, c}) < 3 or (a, b) not in full or (b, c) not in full or (a, c) not in full:
                        continue
                    lhs = [x + y for x, y in zip(X.transition(b, c).apply_vector(full[(a, b)]), full[(b, c)])]
                    inf = X.chart(c).infinity_coords
                    if any(x != y for i, (x, y) in enumerate(zip(lhs, full[(a, c)])) if i not in inf):
                        raise NotACocycle(f"cocycle rule fails on charts {a}, {b}, {c}")
    return full


def _deformed(X: TropicalSpace, full: dict, eps: Fraction) -> TropicalSpace | None:
    trans = []
    for (a, b), T in sorted(X.transitions.items()):
        t = tuple(x + eps * y for x, y in zip(T.translation, full[(a, b)]))
        trans.append(Transition(a, b, T.linear, t))
    tmap = {(t.source, t.target): t for t in trans}
    charts = []
    for v, ch in sorted(X.charts.items()):
        coords = {}
        for w in ch.coordinates:
            if w == v:
                coords[w] = ch.coordinates[w]
            else:
                own = X.chart(w).coordinates[w]
                coords[w] = tmap[(w, v)].apply_point(own)
        charts.append(StarChart(v, ch.ambient, ch.infinity_coords, {}, coords))
    specs, explicit = _specs_of(X)
    try:
        Y = assemble(specs, charts, trans, explicit, dict(X.weights), X.name)
    except TropicoreError:
        return None
    if not validate(Y).valid:
        return None
    for v, ch in X.charts.items():
        for f, rec in ch.face_records.items():
            if Y.chart(v).face_records.get(f) != rec:
                return None
    return Y


def deform(X: TropicalSpace, tau: Mapping[tuple[str, str], Sequence], epsilon, steps: int = 40) -> TropicalSpace:
    """Shift every transition translation by epsilon * tau and re-solve the chart coordinates.

    tau maps (source chart, target chart) to a vector in the target chart;
    missing reverse pairs are filled in by antisymmetry.
    """
    eps = Fraction(epsilon)
    if eps < 0:
        raise ValueError("epsilon must be nonnegative")
    full = check_overlap_cocycle(X, tau)
    if eps == 0:
        return X
    Y = _deformed(X, full, eps)
    if Y is not None:
        return Y
    lo, hi = Fraction(0), eps
    for _ in range(steps):
        mid = (lo + hi) / 2
        if _deformed(X, full, mid) is not None:
            lo = mid
        else:
            hi = mid
    raise DeformationTooLarge(f"the deformed space is not valid for epsilon={eps}; largest valid found {lo}", lo)


def total_length(X: TropicalSpace) -> Fraction:
    """Sum of lattice lengths of the compact mobile edges of a curve."""
    out = Fraction(0)
    for e in X.faces_of_dim(1):
        F = X.faces[e]
        if F.sedentarity or len(F.vertex_ids) != 2 or not F.is_finite:
            continue
        r = F.vertex_ids[0]
        co = X.chart(r).coordinates
        diff = [b - a for a, b in zip(co[F.vertex_ids[0]], co[F.vertex_ids[1]]) if not is_inf(a)]
        g = X.tangent_basis(e, r)[0]
        i = next(j for j, x in enumerate(g) if x)
        out += abs(Fraction(diff[i]) / g[i])
    return out
