"""Compact polyhedral tropical spaces: faces, star charts, transitions.

Conventions used throughout the package:

* ``vertex_ids[0]`` of a face is its reference vertex; builders list a most
  sedentary vertex first so that every vertex of the face has coordinates in
  the reference chart.
* A face record in ``chart(v)`` lists the directions at ``v`` of the edges of
  the face through ``v``.  Directions towards a more sedentary vertex are
  ``-e_j``; at a sedentary vertex the direction back out of infinity is
  recorded as the divisorial vector ``-e_j`` with its flag set.
* Orientations are stored as a sign relative to the canonical volume element
  of the face in its reference chart (the primitive top wedge whose first
  nonzero coordinate is positive).
* Incidence signs follow the outward-normal-first rule:
  ``[D : D'] = +1`` iff ``n_out ^ Vol(D') = +Vol(D)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ChartMismatch, UnknownFace
from .exact_linalg import (
    IntMatrix,
    ext_gcd,
    integer_kernel,
    hermite_normal_form,
    poly_apply,
    poly_add,
    poly_from_vector,
    poly_scale,
    poly_zero_coords,
    primitive,
    rational_rank,
    rational_solve,
    saturation_basis,
    wedge,
    wedge_vectors,
)


class _NegInf:
    """The coordinate value minus infinity."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "-inf"

    def __reduce__(self):
        return (_NegInf, ())


NEG_INF = _NegInf()


def is_inf(x) -> bool:
    return x is NEG_INF


Coord = tuple  # entries are Fraction or NEG_INF


@dataclass
class Face:
    id: str
    dim: int
    vertex_ids: tuple[str, ...]
    orientation: int = 1
    sedentarity: frozenset = frozenset()
    parent_id: str | None = None
    is_finite: bool = True
    compact: bool = True


@dataclass
class FaceRecord:
    generators: tuple[tuple[int, ...], ...]
    divisorial: tuple[bool, ...]


@dataclass
class StarChart:
    vertex_id: str
    ambient: int
    infinity_coords: frozenset
    face_records: dict[str, FaceRecord] = field(default_factory=dict)
    coordinates: dict[str, Coord] = field(default_factory=dict)


@dataclass
class Transition:
    source: str
    target: str
    linear: IntMatrix
    translation: tuple[Fraction, ...]

    def apply_vector(self, v: Sequence) -> list:
        return self.linear.apply(list(v))

    def apply_point(self, x: Coord) -> Coord:
        out = []
        for r, t in zip(self.linear.data, self.translation):
            acc = Fraction(t)
            inf = False
            for a, xi in zip(r, x):
                if not a:
                    continue
                if is_inf(xi):
                    if a < 0:
                        raise ChartMismatch(f"transition {self.source}->{self.target} sends a point to +inf")
                    inf = True
                else:
                    acc += a * xi
            out.append(NEG_INF if inf else acc)
        return tuple(out)


@dataclass
class Violation:
    kind: str
    detail: str
    ids: tuple = ()

    def __str__(self) -> str:
        return f"{self.kind}: {self.detail}" + (f" [{', '.join(map(str, self.ids))}]" if self.ids else "")


@dataclass
class ValidationReport:
    violations: list[Violation]
    compact: bool

    @property
    def valid(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        if self.valid:
            return "OK"
        return "\n".join(str(v) for v in self.violations)


class TropicalSpace:
    """A polyhedral tropical space given by charts around its vertices."""

    def __init__(self, faces: Iterable[Face], charts: Iterable[StarChart], transitions: Iterable[Transition],
                 incidence: dict[tuple[str, str], int], weights: dict[str, int] | None = None, name: str = ""):
        self.faces: dict[str, Face] = {f.id: f for f in faces}
        self.charts: dict[str, StarChart] = {c.vertex_id: c for c in charts}
        self.transitions: dict[tuple[str, str], Transition] = {(t.source, t.target): t for t in transitions}
        self.incidence = dict(incidence)
        self.weights = dict(weights or {})
        self.name = name
        self._cache: dict = {}

    # ------------------------------------------------------------ poset

    def face(self, fid: str) -> Face:
        try:
            return self.faces[fid]
        except KeyError:
            raise UnknownFace(f"no face with id {fid!r}") from None

    @cached_property
    def dim(self) -> int:
        return max((f.dim for f in self.faces.values()), default=-1)

    @cached_property
    def facets_of(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {f: [] for f in self.faces}
        for (a, b) in sorted(self.incidence):
            out[a].append(b)
        return out

    @cached_property
    def cofacets_of(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {f: [] for f in self.faces}
        for (a, b) in sorted(self.incidence):
            out[b].append(a)
        return out

    @cached_property
    def below(self) -> dict[str, frozenset]:
        """All faces contained in a face, the face included."""
        memo: dict[str, frozenset] = {}
        for f in sorted(self.faces, key=lambda x: self.faces[x].dim):
            s = {f}
            for g in self.facets_of[f]:
                s |= memo[g]
            memo[f] = frozenset(s)
        return memo

    @cached_property
    def above(self) -> dict[str, frozenset]:
        out: dict[str, set] = {f: set() for f in self.faces}
        for f, lows in self.below.items():
            for g in lows:
                out[g].add(f)
        return {f: frozenset(s) for f, s in out.items()}

    def leq(self, a: str, b: str) -> bool:
        return a in self.below[b]

    def faces_of_dim(self, d: int) -> list[str]:
        return sorted(f for f, F in self.faces.items() if F.dim == d)

    @cached_property
    def vertices(self) -> list[str]:
        return self.faces_of_dim(0)

    def ref(self, fid: str) -> str:
        return self.face(fid).vertex_ids[0]

    def chart(self, v: str) -> StarChart:
        try:
            return self.charts[v]
        except KeyError:
            raise ChartMismatch(f"no chart at vertex {v!r}") from None

    # ------------------------------------------------------------ charts and transport

    def transition(self, a: str, b: str) -> Transition:
        if a == b:
            n = self.chart(a).ambient
            return Transition(a, b, IntMatrix.identity(n), tuple(Fraction(0) for _ in range(n)))
        try:
            return self.transitions[(a, b)]
        except KeyError:
            raise ChartMismatch(f"no transition from chart {a} to chart {b}") from None

    def record(self, fid: str, v: str) -> FaceRecord:
        rec = self.chart(v).face_records.get(fid)
        if rec is None:
            raise ChartMismatch(f"face {fid} has no record in chart {v}")
        return rec

    def sed_at(self, fid: str, v: str) -> frozenset:
        rec = self.record(fid, v)
        div = {next(i for i, x in enumerate(g) if x) for g, d in zip(rec.generators, rec.divisorial) if d}
        return frozenset(self.chart(v).infinity_coords - div)

    def tangent_basis(self, fid: str, v: str | None = None) -> list[tuple[int, ...]]:
        """Saturated lattice basis of the tangent space of a face, in chart v."""
        v = self.ref(fid) if v is None else v
        key = ("T", fid, v)
        if key not in self._cache:
            rec = self.record(fid, v) if self.face(fid).dim > 0 else FaceRecord((), ())
            n = self.chart(v).ambient
            self._cache[key] = hermite_normal_form(saturation_basis(list(rec.generators), n), n)
        return self._cache[key]

    def transport_vector(self, vec: Sequence, a: str, b: str, kill: Iterable[int] = ()) -> list:
        out = self.transition(a, b).apply_vector(vec)
        for i in kill:
            out[i] = 0
        return out

    def transport_poly(self, p: dict, a: str, b: str, kill: Iterable[int] = ()) -> dict:
        if a == b:
            return poly_zero_coords(p, kill)
        return poly_zero_coords(poly_apply(self.transition(a, b).linear, p), kill)

    def canonical_volume(self, fid: str, v: str | None = None) -> dict:
        v = self.ref(fid) if v is None else v
        p = wedge_vectors(self.tangent_basis(fid, v))
        return normalize_sign(p)

    def volume(self, fid: str, v: str | None = None) -> dict:
        """Oriented primitive volume element of a face, expressed in chart v."""
        key = ("vol", fid, v)
        if key not in self._cache:
            F = self.face(fid)
            r = F.vertex_ids[0]
            base = poly_scale(self.canonical_volume(fid, r), F.orientation)
            if v is None or v == r:
                out = base
            else:
                out = self.transport_poly(base, r, v, self.sed_at(fid, v))
            self._cache[key] = out
        return self._cache[key]

    # ------------------------------------------------------------ sedentarity and families

    def family(self, parent: str) -> list[str]:
        return sorted(f for f, F in self.faces.items() if F.parent_id == parent)

    def center(self, fid: str) -> str:
        """Most sedentary member of the family of a face (a finite face)."""
        P = self.face(fid).parent_id or fid
        fam = self.family(P)
        return max(fam, key=lambda f: (len(self.faces[f].sedentarity), f))

    def is_mobile(self, fid: str) -> bool:
        return not self.face(fid).sedentarity

    @cached_property
    def mobile_faces(self) -> list[str]:
        return sorted(f for f in self.faces if self.is_mobile(f))

    def star_faces(self, fid: str, same_sedentarity: bool = True) -> list[str]:
        """Faces containing fid; optionally only those of the same sedentarity (evaluated in fid's reference chart)."""
        r = self.ref(fid)
        sed = self.face(fid).sedentarity
        out = []
        for g in sorted(self.above[fid]):
            if not same_sedentarity or self.sed_at(g, r) == sed:
                out.append(g)
        return out

    # ------------------------------------------------------------ geometry helpers

    def barycenter(self, fid: str) -> Coord:
        """Mean of the vertex coordinates of a finite face in its reference chart."""
        F = self.face(fid)
        ch = self.chart(F.vertex_ids[0])
        pts = [ch.coordinates[w] for w in F.vertex_ids]
        n = ch.ambient
        out = []
        for i in range(n):
            vals = [p[i] for p in pts]
            if any(is_inf(x) for x in vals):
                out.append(NEG_INF)
            else:
                out.append(sum(vals, Fraction(0)) / len(vals))
        return tuple(out)

    def point_in_chart(self, x: Coord, a: str, b: str) -> Coord:
        return x if a == b else self.transition(a, b).apply_point(x)

    def outward_vector(self, big: str, small: str, v: str | None = None) -> tuple[int, ...]:
        """Primitive vector pointing from the codim-1 face `small` into `big`, modulo span(small), in chart v.

        Returned as a representative in Z^N; for a sedentary facet this is the
        negated divisorial vector.
        """
        v = self.ref(small) if v is None else v
        rec = self.record(big, v)
        Ts = self.tangent_basis(small, v)
        n = self.chart(v).ambient
        sed_small = self.sed_at(small, v)
        sed_big = self.sed_at(big, v)
        if sed_small != sed_big:
            (j,) = tuple(sed_small - sed_big)
            return tuple(1 if i == j else 0 for i in range(n))
        for g, d in zip(rec.generators, rec.divisorial):
            if rational_rank(list(Ts) + [list(g)]) > len(Ts):
                return quotient_primitive(g, Ts, self.tangent_basis(big, v))
        raise ValueError(f"{big} has no direction outside {small}")

    # ------------------------------------------------------------ convenience

    def compact(self) -> bool:
        return all(F.compact for F in self.faces.values())

    def weight(self, fid: str) -> int:
        return self.weights.get(fid, 1)


def normalize_sign(p: dict) -> dict:
    if not p:
        return p
    k = min(p)
    return p if p[k] > 0 else poly_scale(p, -1)


def poly_ratio(a: dict, b: dict) -> Fraction | None:
    """The scalar c with a = c*b, or None when not proportional."""
    if not b:
        return None
    k = min(b)
    c = Fraction(a.get(k, 0)) / b[k]
    for K in set(a) | set(b):
        if Fraction(a.get(K, 0)) != c * b.get(K, 0):
            return None
    return c


def quotient_primitive(g: Sequence[int], sub_basis: Sequence[Sequence[int]], lattice_basis: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """Lattice vector u whose class generates lattice/sub (corank one), on the side of g."""
    m = len(lattice_basis)
    cols = [list(c) for c in zip(*lattice_basis)]
    sub_c = [[int(x) for x in rational_solve(cols, list(s))] for s in sub_basis]
    g_c = rational_solve(cols, list(g))
    if sub_c:
        f = integer_kernel(IntMatrix(sub_c, len(sub_c), m))
    else:
        f = [tuple(1 if i == j else 0 for i in range(m)) for j in range(m)]
    if len(f) != 1:
        raise ValueError("sublattice is not of corank one")
    f = f[0]
    if sum(a * b for a, b in zip(f, g_c)) < 0:
        f = tuple(-a for a in f)
    # integer y with f.y = 1
    y = [0] * m
    acc_g, coeffs = 0, []
    for a in f:
        gg, x0, x1 = ext_gcd(acc_g, a)
        coeffs = [c * x0 for c in coeffs] + [x1]
        acc_g = gg
    for i, c in enumerate(coeffs):
        y[i] = c
    return tuple(sum(y[j] * lattice_basis[j][i] for j in range(m)) for i in range(len(g)))


# ---------------------------------------------------------------- assembly from builder data

def edge_direction(ref_coords: dict[str, Coord], x: str, y: str) -> tuple[tuple[int, ...], bool]:
    """Direction at x of the edge xy, both endpoints given in one chart.

    Returns (vector, divisorial flag).
    """
    cx, cy = ref_coords[x], ref_coords[y]
    Ix = {i for i, a in enumerate(cx) if is_inf(a)}
    Iy = {i for i, a in enumerate(cy) if is_inf(a)}
    n = len(cx)
    if Ix == Iy:
        diff = [0 if i in Ix else cy[i] - cx[i] for i in range(n)]
        return primitive(diff), False
    if Iy > Ix and len(Iy - Ix) == 1:
        (j,) = tuple(Iy - Ix)
        if any(cx[i] != cy[i] for i in range(n) if i not in Iy):
            raise ChartMismatch(f"edge {x}{y} is not parallel to its sedentary direction")
        return tuple(-1 if i == j else 0 for i in range(n)), False
    if Ix > Iy and len(Ix - Iy) == 1:
        (j,) = tuple(Ix - Iy)
        if any(cx[i] != cy[i] for i in range(n) if i not in Ix):
            raise ChartMismatch(f"edge {x}{y} is not parallel to its sedentary direction")
        return tuple(-1 if i == j else 0 for i in range(n)), True
    raise ChartMismatch(f"edge {x}{y} changes sedentarity by more than one direction")


@dataclass
class FaceSpec:
    id: str
    vertex_ids: tuple[str, ...]
    dim: int
    orientation: int | None = None  # None: from vertex order when possible, else +1
    facets: tuple[str, ...] | None = None  # needed for non-compact faces
    compact: bool = True


def assemble(face_specs: Sequence[FaceSpec], charts: Sequence[StarChart], transitions: Sequence[Transition],
             explicit_records: dict[tuple[str, str], FaceRecord] | None = None,
             weights: dict[str, int] | None = None, name: str = "") -> TropicalSpace:
    """Derive records, sedentarity, parents, orientations and incidences from builder data."""
    explicit_records = dict(explicit_records or {})
    specs = {s.id: s for s in face_specs}
    charts = {c.vertex_id: StarChart(c.vertex_id, c.ambient, frozenset(c.infinity_coords), {}, dict(c.coordinates)) for c in charts}
    vsets = {s.id: frozenset(s.vertex_ids) for s in face_specs}

    # poset: explicit facets, else vertex-set containment among compact faces
    facets: dict[str, list[str]] = {}
    by_dim: dict[int, list[str]] = {}
    for s in face_specs:
        by_dim.setdefault(s.dim, []).append(s.id)
    for s in face_specs:
        if s.facets is not None:
            facets[s.id] = list(s.facets)
        elif s.dim == 0:
            facets[s.id] = []
        else:
            facets[s.id] = [t for t in by_dim.get(s.dim - 1, []) if vsets[t] <= vsets[s.id]]

    faces = {s.id: Face(s.id, s.dim, tuple(s.vertex_ids), 1, frozenset(), None, True, s.compact) for s in face_specs}
    tmp = TropicalSpace(faces.values(), charts.values(), [], {(a, b): 1 for a, fs in facets.items() for b in fs})
    for t in transitions:
        tmp.transitions[(t.source, t.target)] = t

    # edge directions at each endpoint, in the endpoint's chart
    edge_dirs: dict[tuple[str, str], tuple[tuple[int, ...], bool]] = {}
    for e in by_dim.get(1, []):
        verts = specs[e].vertex_ids
        if len(verts) == 1:
            rec = explicit_records[(e, verts[0])]
            edge_dirs[(e, verts[0])] = (rec.generators[0], rec.divisorial[0])
            continue
        r = verts[0]
        coords = charts[r].coordinates
        for x, y in ((verts[0], verts[1]), (verts[1], verts[0])):
            vec, div = edge_direction(coords, x, y)
            if x != r:
                vec = tuple(tmp.transition(r, x).apply_vector(vec))
                inf_x = charts[x].infinity_coords
                vec = primitive([0 if i in inf_x else a for i, a in enumerate(vec)])
            edge_dirs[(e, x)] = (vec, div)

    below = tmp.below
    for s in face_specs:
        for v in s.vertex_ids:
            if (s.id, v) in explicit_records:
                charts[v].face_records[s.id] = explicit_records[(s.id, v)]
                continue
            if s.dim == 0:
                charts[v].face_records[s.id] = FaceRecord((), ())
                continue
            gens, divs = [], []
            for e in sorted(below[s.id]):
                if (e, v) in edge_dirs:
                    g, d = edge_dirs[(e, v)]
                    if g not in gens:
                        gens.append(g)
                        divs.append(d)
            charts[v].face_records[s.id] = FaceRecord(tuple(gens), tuple(divs))

    X = TropicalSpace(faces.values(), charts.values(), transitions, {}, weights, name)
    X.facets_of  # noqa: B018
    X.__dict__["facets_of"] = {f: sorted(fs) for f, fs in facets.items()}
    X.__dict__["cofacets_of"] = {f: sorted(a for a, fs in facets.items() if f in fs) for f in facets}

    # sedentarity in the reference chart
    for f in faces.values():
        r = f.vertex_ids[0]
        ch = charts[r]
        if f.compact:
            sed = None
            for w in f.vertex_ids:
                if w not in ch.coordinates:
                    raise ChartMismatch(f"vertex {w} of face {f.id} has no coordinates in reference chart {r}")
                Iw = {i for i, a in enumerate(ch.coordinates[w]) if is_inf(a)}
                sed = Iw if sed is None else sed & Iw
            f.sedentarity = frozenset(sed or ())
        else:
            f.sedentarity = X.sed_at(f.id, r)
    for f in faces.values():
        r = f.vertex_ids[0]
        f.is_finite = f.compact and all(
            frozenset(i for i, a in enumerate(charts[r].coordinates[w]) if is_inf(a)) == f.sedentarity
            for w in f.vertex_ids
        )
    # parents
    above = X.above
    for f in faces.values():
        if not f.sedentarity:
            f.parent_id = f.id
            continue
        r = f.vertex_ids[0]
        cands = []
        for g in above[f.id]:
            G = faces[g]
            if not G.sedentarity and G.dim == f.dim + len(f.sedentarity):
                cands.append(g)
        f.parent_id = cands[0] if len(cands) == 1 else None
    # orientations
    for s in face_specs:
        f = faces[s.id]
        if s.orientation is not None:
            f.orientation = s.orientation
        elif f.dim > 0 and f.is_finite and len(f.vertex_ids) == f.dim + 1:
            r = f.vertex_ids[0]
            co = charts[r].coordinates
            vecs = [[0 if is_inf(a) else a - b for a, b in zip(co[w], co[r])] for w in f.vertex_ids[1:]]
            c = poly_ratio(wedge_vectors(vecs), X.canonical_volume(f.id, r))
            f.orientation = 1 if c is None or c > 0 else -1
        else:
            f.orientation = 1
    X._cache.clear()
    X.incidence = compute_incidence(X)
    return X


def compute_incidence(X: TropicalSpace) -> dict[tuple[str, str], int]:
    out = {}
    for big, smalls in X.facets_of.items():
        for small in smalls:
            out[(big, small)] = incidence_sign(X, big, small)
    return out


def incidence_sign(X: TropicalSpace, big: str, small: str) -> int:
    v = X.ref(small)
    nout = [-x for x in X.outward_vector(big, small, v)]
    lhs = wedge(poly_from_vector(nout), X.volume(small, v))
    c = poly_ratio(lhs, X.volume(big, v))
    if c is None or c == 0:
        raise ChartMismatch(f"orientation of {big} and {small} are not comparable in chart {v}")
    return 1 if c > 0 else -1


# ---------------------------------------------------------------- validation

def validate(X: TropicalSpace) -> ValidationReport:
    """Check every structural invariant; never raises on bad input."""
    viol: list[Violation] = []

    def add(kind, detail, *ids):
        viol.append(Violation(kind, detail, tuple(ids)))

    try:
        _validate_structure(X, add)
    except Exception as exc:  # a broken structure can make later checks meaningless
        add("structure", f"validation aborted early: {exc}")
        return ValidationReport(viol, False)
    for check in (_validate_records, _validate_poset, _validate_boundary, _validate_families,
                  _validate_transitions, _validate_balancing, _validate_weights):
        try:
            check(X, add)
        except Exception as exc:
            add("structure", f"{check.__name__[10:]} check failed: {exc}")
    return ValidationReport(viol, X.compact())


def _validate_structure(X: TropicalSpace, add):
    for f, F in X.faces.items():
        if F.dim < 0:
            add("structure", "negative dimension", f)
        if not F.vertex_ids:
            add("structure", "face without vertices", f)
        for w in F.vertex_ids:
            if w not in X.faces or X.faces[w].dim != 0:
                add("structure", f"vertex {w} is not a 0-dimensional face", f)
            elif w not in X.charts:
                add("chart", f"vertex {w} has no chart", f)
        if F.orientation not in (1, -1):
            add("structure", "orientation must be +1 or -1", f)
        if F.dim == 0 and F.vertex_ids != (f,):
            add("structure", "a vertex must list itself as its only vertex", f)
    for (a, b), s in X.incidence.items():
        if a not in X.faces or b not in X.faces:
            add("incidence", "incidence refers to an unknown face", a, b)
        elif X.faces[a].dim != X.faces[b].dim + 1:
            add("incidence", "incidence between faces not of codimension one", a, b)
        if s not in (1, -1):
            add("incidence", "incidence sign must be +1 or -1", a, b)
    for (a, b), t in X.transitions.items():
        if a not in X.charts or b not in X.charts:
            add("transition", "transition between unknown charts", a, b)
            continue
        if t.linear.shape != (X.charts[b].ambient, X.charts[a].ambient) or len(t.translation) != X.charts[b].ambient:
            add("transition", "transition has the wrong shape", a, b)


def _validate_records(X: TropicalSpace, add):
    for f, F in X.faces.items():
        r = F.vertex_ids[0]
        for w in F.vertex_ids:
            ch = X.charts.get(w)
            if ch is None:
                continue
            if f not in ch.face_records:
                add("missing-record", f"face {f} is shared with chart {w} but absent from its records", f, w)
                continue
            rec = ch.face_records[f]
            if len(rec.generators) != len(rec.divisorial):
                add("record", "generator and divisorial flag lists differ in length", f, w)
            for g, d in zip(rec.generators, rec.divisorial):
                if len(g) != ch.ambient:
                    add("record", "generator of the wrong length", f, w)
                    continue
                if d:
                    nz = [i for i, x in enumerate(g) if x]
                    if len(nz) != 1 or g[nz[0]] != -1 or nz[0] not in ch.infinity_coords:
                        add("divisorial", "divisorial generator is not -e_i for an infinite coordinate", f, w)
                elif any(g[i] for i in ch.infinity_coords):
                    add("record", "non-divisorial generator moves a coordinate at -inf", f, w)
            if F.dim == 1 and len(rec.generators) == 1 and any(rec.generators[0]):
                from .exact_linalg import vgcd
                if vgcd(rec.generators[0]) != 1:
                    add("record", "edge generator is not primitive", f, w)
            if F.dim > 0 and rational_rank([list(g) for g in rec.generators]) != F.dim:
                add("record", f"face generators span rank {rational_rank([list(g) for g in rec.generators])}, expected {F.dim}", f, w)
        if F.compact:
            ch = X.charts.get(r)
            if ch is not None:
                for w in F.vertex_ids:
                    if w not in ch.coordinates:
                        add("chart", f"vertex {w} not representable in the reference chart {r}", f)
            # reference vertex must be a most sedentary one
            if ch is not None and all(w in ch.coordinates for w in F.vertex_ids):
                sizes = {w: sum(1 for a in ch.coordinates[w] if is_inf(a)) for w in F.vertex_ids}
                if sizes[r] < max(sizes.values()):
                    add("chart", "reference vertex is not of maximal sedentarity", f)
    for v, ch in X.charts.items():
        own = ch.coordinates.get(v)
        if own is None:
            add("chart", "chart lacks coordinates of its own vertex", v)
        elif frozenset(i for i, a in enumerate(own) if is_inf(a)) != ch.infinity_coords:
            add("chart", "infinity coordinates disagree with the base vertex", v)


def _validate_poset(X: TropicalSpace, add):
    fids = sorted(X.faces)
    below = X.below
    for a, b in combinations(fids, 2):
        common = below[a] & below[b]
        if not common:
            continue
        maxes = [c for c in common if not any(c != d and c in below[d] for d in common)]
        if len(maxes) != 1:
            add("poset", "intersection of two faces is not a face", a, b)
    for f, F in X.faces.items():
        if F.dim > 0 and not X.facets_of.get(f):
            add("poset", "face of positive dimension without facets", f)


def _validate_boundary(X: TropicalSpace, add):
    for f, F in X.faces.items():
        if F.dim < 2:
            continue
        acc: dict[str, int] = {}
        for g in X.facets_of[f]:
            for h in X.facets_of[g]:
                acc[h] = acc.get(h, 0) + X.incidence.get((f, g), 0) * X.incidence.get((g, h), 0)
        for h, x in acc.items():
            if x:
                add("boundary", "incidence signs do not square to zero", f, h)
    for (big, small), s in X.incidence.items():
        try:
            if incidence_sign(X, big, small) != s:
                add("orientation", "incidence sign disagrees with the outward-normal rule", big, small)
        except Exception as exc:
            add("orientation", str(exc), big, small)


def _validate_families(X: TropicalSpace, add):
    for f, F in X.faces.items():
        if F.sedentarity and F.parent_id is None:
            add("family", "sedentary face has no unique parent", f)
    parents = {F.parent_id for F in X.faces.values() if F.parent_id}
    for p in parents:
        fam = X.family(p)
        smax = max(len(X.faces[m].sedentarity) for m in fam)
        if len(fam) != 2 ** smax:
            add("family", f"family has {len(fam)} members, expected {2 ** smax}", p)
        tops = [m for m in fam if len(X.faces[m].sedentarity) == smax]
        if len(tops) != 1 or (X.faces[p].compact and not X.faces[tops[0]].is_finite):
            add("family", "family has no unique finite most sedentary member", p)
        for m in fam:
            M = X.faces[m]
            if M.dim != X.faces[p].dim - len(M.sedentarity):
                add("regularity", "face at infinity has the wrong dimension", m, p)
            # projection of the parent's tangent space along divisorial directions spans the member's
            r = M.vertex_ids[0]
            try:
                Tp = X.tangent_basis(p, r)
                proj = [[0 if i in M.sedentarity else a for i, a in enumerate(g)] for g in Tp]
                Tm = X.tangent_basis(m, r)
                if rational_rank(proj) != len(Tm) or rational_rank(proj + [list(t) for t in Tm]) != len(Tm):
                    add("family", "projected parent tangent space differs from the member's", m, p)
            except ChartMismatch as exc:
                add("family", str(exc), m, p)


def _validate_transitions(X: TropicalSpace, add):
    for f, F in X.faces.items():
        verts = F.vertex_ids
        for a in verts:
            for b in verts:
                if a == b:
                    continue
                if (a, b) not in X.transitions:
                    add("transition", "vertices sharing a face have no transition", a, b)
                    continue
                T = X.transitions[(a, b)]
                # tangent data of the face goes to tangent data of the face
                try:
                    Ta = X.tangent_basis(f, a)
                    Tb = X.tangent_basis(f, b)
                    sb = X.sed_at(f, b)
                    img = [[0 if i in sb else x for i, x in enumerate(T.apply_vector(g))] for g in Ta]
                    if rational_rank(img) != len(Tb) or rational_rank(img + [list(t) for t in Tb]) != len(Tb):
                        add("naturality", f"transition does not carry the tangent space of {f}", a, b)
                except ChartMismatch as exc:
                    add("naturality", str(exc), a, b)
                # coordinates agree where both charts see a vertex of the face
                ca, cb = X.charts[a].coordinates, X.charts[b].coordinates
                for w in verts:
                    if w in ca and w in cb:
                        try:
                            img = T.apply_point(ca[w])
                        except ChartMismatch as exc:
                            add("coordinates", str(exc), a, b, w)
                            continue
                        if img != tuple(cb[w]):
                            add("coordinates", f"transition moves vertex {w} to the wrong place", a, b, w)
                for c in verts:
                    if c in (a, b) or (b, c) not in X.transitions or (a, c) not in X.transitions:
                        continue
                    Tc = X.transitions[(b, c)]
                    direct = X.transitions[(a, c)]
                    sc = X.sed_at(f, c)
                    for g in X.tangent_basis(f, a):
                        two = Tc.apply_vector(T.apply_vector(g))
                        one = direct.apply_vector(g)
                        if any(x != y for i, (x, y) in enumerate(zip(two, one)) if i not in sc):
                            add("cocycle", "linear parts do not compose around a face", a, b, c)
                            break


def _validate_balancing(X: TropicalSpace, add):
    n = X.dim
    tops = set(X.faces_of_dim(n))
    for tau in X.faces_of_dim(n - 1):
        if X.faces[tau].sedentarity:
            continue
        v = X.ref(tau)
        adj = [s for s in X.cofacets_of[tau] if s in tops and not X.faces[s].sedentarity]
        if not adj:
            continue
        Ts = X.tangent_basis(tau, v)
        total = [0] * X.charts[v].ambient
        for s in adj:
            u = X.outward_vector(s, tau, v)
            w = X.weight(s)
            total = [a + w * b for a, b in zip(total, u)]
        if rational_rank([list(t) for t in Ts] + [total]) != len(Ts):
            add("balancing", f"weighted outward vectors sum to {tuple(total)} modulo the face span", tau)


def _validate_weights(X: TropicalSpace, add):
    for f, w in X.weights.items():
        if f not in X.faces:
            add("weights", "weight on an unknown face", f)
        elif not isinstance(w, int) or w <= 0:
            add("weights", "weights must be positive integers", f)
        elif X.faces[f].dim != X.dim:
            add("weights", "weights live on facets", f)


# ---------------------------------------------------------------- families

@dataclass
class Family:
    parent: str
    members: list[str]
    divisorial_index: dict[str, frozenset]  # member -> subset of divisorial directions


def parent_and_family(X: TropicalSpace, fid: str) -> tuple[str, Family]:
    F = X.face(fid)
    p = F.parent_id
    if p is None:
        raise UnknownFace(f"face {fid} has no parent")
    members = X.family(p)
    return p, Family(p, members, {m: X.faces[m].sedentarity for m in members})


# ---------------------------------------------------------------- tangent data

@dataclass
class TangentFibers:
    T: list[tuple[int, ...]]
    W: list[tuple]
    W_div: list[tuple[int, ...]]

    @property
    def ranks(self) -> tuple[int, int, int]:
        return (len(self.T), len(self.W), len(self.W_div))


def tangent_span(X: TropicalSpace, fid: str) -> list[tuple[int, ...]]:
    """Lattice spanned by the cones of same-sedentarity faces around fid (reference chart)."""
    r = X.ref(fid)
    gens: list[list[int]] = []
    for g in X.star_faces(fid):
        gens.extend(list(t) for t in X.tangent_basis(g, r))
    n = X.chart(r).ambient
    return hermite_normal_form(saturation_basis(gens, n), n) if gens else []


def wave_space(X: TropicalSpace, fid: str) -> list[tuple[int, ...]]:
    """Wave tangent space of a face as a saturated lattice basis in its reference chart.

    Computed at a mobile point near the face: the intersection of the
    maximal linear subspaces contained in the local fan of the parent.
    """
    key = ("W", fid)
    if key in X._cache:
        return X._cache[key]
    r = X.ref(fid)
    P = X.face(fid).parent_id or fid
    n = X.chart(r).ambient
    base = [list(t) for t in X.tangent_basis(P, r)]
    cones = {}
    for g in sorted(X.above[P]):
        if X.faces[g].sedentarity:
            continue
        rec = X.record(g, r)
        gens = [list(x) for x in rec.generators] + base + [[-a for a in b] for b in base]
        cones[g] = gens
    dims = {g: rational_rank(c) for g, c in cones.items()}
    covered: list[list[list[int]]] = []
    for g in sorted(cones, key=lambda x: -dims[x]):
        L = cones[g]
        d = dims[g]
        if any(_span_contains(C, L) for C in covered):
            continue
        inside = [h for h in cones if dims[h] == d and _span_contains(L, cones[h])]
        if _covers(X, L, d, inside, cones, dims, P):
            covered.append(L)
    maximal = [L for L in covered if not any(L is not M and _span_contains(M, L) and rational_rank(M) > rational_rank(L) for M in covered)]
    W = _intersect_spans(maximal, n)
    out = hermite_normal_form(saturation_basis(W, n), n) if W else []
    X._cache[key] = out
    return out


def _span_contains(big: list, small: list) -> bool:
    rb = rational_rank(big)
    return rational_rank(big + small) == rb


def _covers(X, L, d, inside, cones, dims, P) -> bool:
    """Do the d-cones `inside` (all in span L) cover the d-dimensional space span L?"""
    if d == dims[P]:
        return True
    # walls: (d-1)-cones that are faces of inside cones; each needs cones on both sides
    walls = [h for h in cones if dims[h] == d - 1 and any(X.leq(h, g) for g in inside)]
    if not walls:
        return False
    from .exact_linalg import rational_nullspace
    basis = _basis_of_span(L)
    for w in walls:
        wb = _basis_of_span(cones[w])
        # functional on span L vanishing on the wall
        coords = [rational_solve([list(c) for c in zip(*basis)], list(x)) for x in wb]
        ker = rational_nullspace(coords, len(basis))
        if len(ker) != 1:
            return False
        f = ker[0]
        sides = set()
        for g in inside:
            if not X.leq(w, g):
                continue
            for x in cones[g]:
                c = rational_solve([list(c) for c in zip(*basis)], list(x))
                val = sum(a * b for a, b in zip(f, c))
                if val:
                    sides.add(val > 0)
                    break
        if sides != {True, False}:
            return False
    return True


def _basis_of_span(vectors: list) -> list[list[Fraction]]:
    from .exact_linalg import rref
    R, piv = rref(vectors)
    return [r for r in R if any(r)]


def _intersect_spans(spans: list, n: int) -> list[list[int]]:
    from .exact_linalg import rational_nullspace
    if not spans:
        return []
    cur = [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    for S in spans:
        # intersection of span(cur) and span(S): solve a*cur = b*S
        B = _basis_of_span(S)
        if not B:
            return []
        A = _basis_of_span(cur) if cur else []
        if not A:
            return []
        rows = [[A[i][k] for i in range(len(A))] + [-B[j][k] for j in range(len(B))] for k in range(n)]
        ker = rational_nullspace(rows, len(A) + len(B))
        cur = [[sum(v[i] * A[i][k] for i in range(len(A))) for k in range(n)] for v in ker]
        if not cur:
            return []
    return [list(primitive(v)) for v in cur if any(v)]


def divisorial_space(X: TropicalSpace, fid: str) -> list[tuple[int, ...]]:
    n = X.chart(X.ref(fid)).ambient
    return [tuple(1 if i == j else 0 for i in range(n)) for j in sorted(X.face(fid).sedentarity)]


def tangent_fibers(X: TropicalSpace, fid: str) -> TangentFibers:
    X.face(fid)
    return TangentFibers(tangent_span(X, fid), wave_space(X, fid), divisorial_space(X, fid))


# ---------------------------------------------------------------- barycentric subdivision

@dataclass(frozen=True)
class BarSimplex:
    flag: tuple[str, ...]
    vertices: tuple[str, ...]  # family centers, one per flag entry
    carrier: str

    @property
    def dim(self) -> int:
        return len(self.flag) - 1


class BarycentricComplex:
    def __init__(self, X: TropicalSpace):
        self.space = X
        self.simplices: dict[int, list[BarSimplex]] = {}
        self.index: dict[tuple[str, ...], tuple[int, int]] = {}
        mobile = X.mobile_faces
        flags: list[tuple[str, ...]] = [(f,) for f in mobile]
        frontier = list(flags)
        while frontier:
            nxt = []
            for fl in frontier:
                top = fl[-1]
                for g in sorted(X.above[top]):
                    if g != top and not X.faces[g].sedentarity:
                        nxt.append(fl + (g,))
            flags.extend(nxt)
            frontier = nxt
        for fl in sorted(set(flags), key=lambda x: (len(x), x)):
            verts = tuple(X.center(f) for f in fl)
            s = BarSimplex(fl, verts, _carrier(X, fl[-1], verts))
            lst = self.simplices.setdefault(len(fl) - 1, [])
            self.index[fl] = (len(fl) - 1, len(lst))
            lst.append(s)
        self.barycenter_coords: dict[str, Coord] = {c: X.barycenter(c) for c in {X.center(f) for f in mobile}}

    @property
    def dim(self) -> int:
        return max(self.simplices, default=-1)

    def count(self, q: int) -> int:
        return len(self.simplices.get(q, []))

    def simplex(self, q: int, i: int) -> BarSimplex:
        return self.simplices[q][i]

    def lookup(self, flag: tuple[str, ...]) -> int:
        return self.index[flag][1]

    def boundary_terms(self, q: int, i: int) -> list[tuple[int, int]]:
        """(index, sign) of the faces of a q-simplex, face j dropping flag entry j."""
        s = self.simplices[q][i]
        out = []
        for j in range(len(s.flag)):
            fl = s.flag[:j] + s.flag[j + 1:]
            if fl:
                out.append((self.index[fl][1], -1 if j % 2 else 1))
        return out

    def point(self, center: str, chart_vertex: str) -> Coord:
        X = self.space
        return X.point_in_chart(self.barycenter_coords[center], X.ref(center), chart_vertex)

    def mobile_point(self, center: str, chart_vertex: str) -> tuple[Fraction, ...]:
        """A nearby mobile point: the barycenter with -inf entries replaced by 0."""
        return tuple(Fraction(0) if is_inf(x) else x for x in self.point(center, chart_vertex))


def _carrier(X: TropicalSpace, top: str, centers: tuple[str, ...]) -> str:
    cands = [g for g in X.below[top] if all(X.leq(c, g) for c in centers)]
    return min(cands, key=lambda g: (X.faces[g].dim, g))


def barycentric_subdivision(X: TropicalSpace) -> BarycentricComplex:
    key = ("bar",)
    if key not in X._cache:
        X._cache[key] = BarycentricComplex(X)
    return X._cache[key]


def full_flags(X: TropicalSpace, fid: str) -> list[tuple[str, ...]]:
    """Complete flags Delta_0 < ... < Delta_q = fid with dim Delta_i = i."""
    out = [(fid,)]
    for _ in range(X.face(fid).dim):
        nxt = []
        for fl in out:
            for g in X.facets_of[fl[0]]:
                nxt.append((g,) + fl)
        out = nxt
    return out


def subdivision_terms(X: TropicalSpace, fid: str) -> list[tuple[tuple[str, ...], int]]:
    """Bar simplices (as mobile flags) subdividing a cell, with orientation signs."""
    key = ("sd", fid)
    if key in X._cache:
        return X._cache[key]
    out = []
    for fl in full_flags(X, fid):
        par = tuple(X.faces[f].parent_id for f in fl)
        if any(par[i] == par[i + 1] for i in range(len(par) - 1)):
            continue
        sign = 1
        for i in range(1, len(fl)):
            sign *= (-1) ** i * X.incidence[(fl[i], fl[i - 1])]
        out.append((par, sign))
    X._cache[key] = out
    return out
