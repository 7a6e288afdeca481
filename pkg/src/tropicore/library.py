"""Builders for the bundled tropical spaces."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .exact_linalg import IntMatrix
from .tropical_space import (
    NEG_INF,
    FaceRecord,
    FaceSpec,
    StarChart,
    Transition,
    TropicalSpace,
    assemble,
    is_inf,
)

Z = Fraction(0)


def _chart(v, coords, ambient=None):
    ambient = len(coords[v]) if ambient is None else ambient
    inf = frozenset(i for i, a in enumerate(coords[v]) if is_inf(a))
    return StarChart(v, ambient, inf, {}, {w: tuple(c) for w, c in coords.items()})


def _translation(a, b, shift):
    n = len(shift)
    return Transition(a, b, IntMatrix.identity(n), tuple(Fraction(x) for x in shift))


# ---------------------------------------------------------------- projective spaces

def tp(n: int) -> TropicalSpace:
    """Tropical projective space with its fan structure (one finite vertex)."""
    full = frozenset(range(n + 1))
    faces = []
    for s in range(n + 1):
        for S in combinations(range(n + 1), s):
            rest = [i for i in range(n + 1) if i not in S]
            for f in range(len(rest)):
                if s + f > n:
                    continue
                for F in combinations(rest, f):
                    faces.append((frozenset(S), frozenset(F)))

    def vname(S):
        return "o" if not S else "p" + "".join(map(str, sorted(S)))

    def fname(S, F):
        if not F:
            return vname(S)
        return "c" + "".join(map(str, sorted(S))) + "_" + "".join(map(str, sorted(F)))

    def verts(S, F):
        out = []
        for k in range(len(F), -1, -1):
            for T in combinations(sorted(F), k):
                out.append(vname(S | frozenset(T)))
        return tuple(out)

    def coords_for(j0):
        idx = [i for i in range(n + 1) if i != j0]
        return idx

    def point(S, j0):
        return tuple(NEG_INF if i in S else Z for i in coords_for(j0))

    vertices = [S for (S, F) in faces if not F]
    j0_of = {S: min(full - S) for S in vertices}
    charts = []
    for S in vertices:
        j0 = j0_of[S]
        coords = {}
        for S2 in vertices:
            if j0 in S2:
                continue
            # shares a face with S iff S2 | S is proper
            if len(S2 | S) <= n:
                coords[vname(S2)] = point(S2, j0)
        charts.append(_chart(vname(S), coords))

    def lin(j0, j1):
        src = coords_for(j0)
        dst = coords_for(j1)
        rows = []
        for i in dst:
            # x'_i = X_i - X_j1 = x_i - x_j1, with x_j0 = 0
            r = [0] * n
            if i != j0:
                r[src.index(i)] += 1
            if j1 != j0:
                r[src.index(j1)] -= 1
            rows.append(r)
        return IntMatrix(rows, n, n)

    trans = []
    for S1 in vertices:
        for S2 in vertices:
            if S1 != S2 and len(S1 | S2) <= n:
                trans.append(Transition(vname(S1), vname(S2), lin(j0_of[S1], j0_of[S2]), (Z,) * n))
    specs = [FaceSpec(fname(S, F), verts(S, F), len(F)) for (S, F) in faces]
    return assemble(specs, charts, trans, name=f"tp:{n}")


# ---------------------------------------------------------------- curves

def elliptic(length) -> TropicalSpace:
    """Circle of the given length as three edges of a third of the length."""
    l = Fraction(length)
    if l <= 0:
        raise ValueError("length must be positive")
    h = l / 3
    vs = ["v0", "v1", "v2"]
    charts = [
        _chart("v0", {"v0": (Z,), "v1": (h,), "v2": (-h,)}),
        _chart("v1", {"v1": (h,), "v0": (Z,), "v2": (2 * h,)}),
        _chart("v2", {"v2": (2 * h,), "v1": (h,), "v0": (l,)}),
    ]
    trans = [
        _translation("v0", "v1", [0]), _translation("v1", "v0", [0]),
        _translation("v1", "v2", [0]), _translation("v2", "v1", [0]),
        _translation("v2", "v0", [-l]), _translation("v0", "v2", [l]),
    ]
    specs = [FaceSpec(v, (v,), 0) for v in vs]
    specs += [FaceSpec("e0", ("v0", "v1"), 1), FaceSpec("e1", ("v1", "v2"), 1), FaceSpec("e2", ("v2", "v0"), 1)]
    return assemble(specs, charts, trans, name=f"elliptic:{_fmt(l)}")


def nodal_genus2() -> TropicalSpace:
    """One four-valent vertex with two loops, each loop cut into three edges.

    The vertex chart is the union of the coordinate axes.  Loop 1 leaves
    along +x and comes back along +y, loop 2 leaves along -x and comes back
    along -y.
    """
    one = Fraction(1)
    charts = [
        _chart("v", {"v": (Z, Z), "a1": (one, Z), "b1": (Z, one), "a2": (-one, Z), "b2": (Z, -one)}),
        _chart("a1", {"a1": (Z,), "v": (-one,), "b1": (one,)}),
        _chart("b1", {"b1": (Z,), "a1": (-one,), "v": (one,)}),
        _chart("a2", {"a2": (Z,), "v": (-one,), "b2": (one,)}),
        _chart("b2", {"b2": (Z,), "a2": (-one,), "v": (one,)}),
    ]

    def emb(a, b, col, shift):
        return Transition(a, b, IntMatrix([[c] for c in col], 2, 1), tuple(Fraction(x) for x in shift))

    def proj(a, b, row, shift):
        return Transition(a, b, IntMatrix([row], 1, 2), (Fraction(shift),))

    trans = [
        # v <-> a1 along +x: t = x - 1
        proj("v", "a1", [1, 0], -1), emb("a1", "v", [1, 0], [1, 0]),
        # v <-> b1 along +y: t = 1 - y
        proj("v", "b1", [0, -1], 1), emb("b1", "v", [0, -1], [0, 1]),
        # v <-> a2 along -x: t = -x - 1
        proj("v", "a2", [-1, 0], -1), emb("a2", "v", [-1, 0], [-1, 0]),
        # v <-> b2 along -y: t = 1 + y
        proj("v", "b2", [0, 1], 1), emb("b2", "v", [0, 1], [0, -1]),
        _translation("a1", "b1", [-1]), _translation("b1", "a1", [1]),
        _translation("a2", "b2", [-1]), _translation("b2", "a2", [1]),
    ]
    specs = [FaceSpec(v, (v,), 0) for v in ["v", "a1", "b1", "a2", "b2"]]
    specs += [
        FaceSpec("l1a", ("v", "a1"), 1), FaceSpec("l1b", ("a1", "b1"), 1), FaceSpec("l1c", ("b1", "v"), 1),
        FaceSpec("l2a", ("v", "a2"), 1), FaceSpec("l2b", ("a2", "b2"), 1), FaceSpec("l2c", ("b2", "v"), 1),
    ]
    return assemble(specs, charts, trans, name="nodal-genus2")


_LINE_FRAMES = {
    # direction d and a matrix A in GL2(Z) with A d = -e_1
    "q0": ((1, 0), [[-1, 0], [0, 1]]),
    "q1": ((0, 1), [[0, -1], [1, 0]]),
    "q2": ((-1, -1), [[1, 0], [-1, 1]]),
}


def _inv2(A):
    (a, b), (c, d) = A
    det = a * d - b * c
    return [[d * det, -b * det], [-c * det, a * det]]


def line_r2(rays=("q0", "q1", "q2")) -> TropicalSpace:
    """The tropical line in R^2 closed up by its points at infinity."""
    charts = [_chart("o", {"o": (Z, Z)})]
    trans = []
    specs = [FaceSpec("o", ("o",), 0)]
    for q in rays:
        d, A = _LINE_FRAMES[q]
        charts.append(_chart(q, {q: (NEG_INF, Z), "o": (Z, Z)}))
        trans.append(Transition("o", q, IntMatrix(A, 2, 2), (Z, Z)))
        trans.append(Transition(q, "o", IntMatrix(_inv2(A), 2, 2), (Z, Z)))
        specs.append(FaceSpec(q, (q,), 0))
        specs.append(FaceSpec("r" + q[1:], (q, "o"), 1))
    return assemble(specs, charts, trans, name="line-r2")


# ---------------------------------------------------------------- torus

def torus(a=1, b=1) -> TropicalSpace:
    """R^2 / (aZ + bZ) triangulated by a 3x3 grid with diagonals."""
    a, b = Fraction(a), Fraction(b)
    if a <= 0 or b <= 0:
        raise ValueError("periods must be positive")
    ha, hb = a / 3, b / 3

    def vid(i, j):
        return f"v{i % 3}{j % 3}"

    star = [(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, -1)]
    charts = []
    trans = []
    for i in range(3):
        for j in range(3):
            coords = {vid(i + di, j + dj): ((i + di) * ha, (j + dj) * hb) for di, dj in star}
            charts.append(_chart(vid(i, j), coords))
            for di, dj in star[1:]:
                i2, j2 = (i + di) % 3, (j + dj) % 3
                # same point: (i+di, j+dj) in chart (i,j) is (i2, j2) in its own chart
                shift = ((i2 - (i + di)) * ha, (j2 - (j + dj)) * hb)
                trans.append(_translation(vid(i, j), vid(i2, j2), shift))
    specs = [FaceSpec(vid(i, j), (vid(i, j),), 0) for i in range(3) for j in range(3)]
    for i in range(3):
        for j in range(3):
            specs.append(FaceSpec(f"h{i}{j}", (vid(i, j), vid(i + 1, j)), 1))
            specs.append(FaceSpec(f"u{i}{j}", (vid(i, j), vid(i, j + 1)), 1))
            specs.append(FaceSpec(f"d{i}{j}", (vid(i, j), vid(i + 1, j + 1)), 1))
            specs.append(FaceSpec(f"L{i}{j}", (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)), 2))
            specs.append(FaceSpec(f"U{i}{j}", (vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)), 2))
    return assemble(specs, charts, trans, name=f"torus:{_fmt(a)},{_fmt(b)}")


# ---------------------------------------------------------------- products

def product(X: TropicalSpace, Y: TropicalSpace, name: str = "") -> TropicalSpace:
    def pid(f, g):
        return f"{f}*{g}"

    specs = []
    for f, F in X.faces.items():
        for g, G in Y.faces.items():
            verts = tuple(pid(v, w) for v in F.vertex_ids for w in G.vertex_ids)
            specs.append(FaceSpec(pid(f, g), verts, F.dim + G.dim, orientation=1))
    charts = []
    for v, cx in X.charts.items():
        for w, cy in Y.charts.items():
            coords = {pid(a, b): tuple(pa) + tuple(pb) for a, pa in cx.coordinates.items() for b, pb in cy.coordinates.items()}
            charts.append(StarChart(pid(v, w), cx.ambient + cy.ambient,
                                    frozenset(cx.infinity_coords) | frozenset(cx.ambient + i for i in cy.infinity_coords),
                                    {}, coords))

    def share_x(a, b):
        return a == b or (a, b) in X.transitions

    def share_y(a, b):
        return a == b or (a, b) in Y.transitions

    trans = []
    for v in X.charts:
        for w in Y.charts:
            for v2 in X.charts:
                for w2 in Y.charts:
                    if (v, w) == (v2, w2) or not share_x(v, v2) or not share_y(w, w2):
                        continue
                    tx, ty = X.transition(v, v2), Y.transition(w, w2)
                    nx, ny = tx.linear.cols, ty.linear.cols
                    mx, my = tx.linear.rows, ty.linear.rows
                    rows = [list(r) + [0] * ny for r in tx.linear.data] + [[0] * nx + list(r) for r in ty.linear.data]
                    trans.append(Transition(pid(v, w), pid(v2, w2), IntMatrix(rows, mx + my, nx + ny),
                                            tuple(tx.translation) + tuple(ty.translation)))
    Xp = assemble(specs, charts, trans, name=name or f"{X.name}*{Y.name}")
    # product orientation: Vol_F ^ Vol_G
    from .exact_linalg import poly_apply, wedge
    from .tropical_space import compute_incidence, poly_ratio
    for f, F in X.faces.items():
        for g, G in Y.faces.items():
            P = Xp.faces[pid(f, g)]
            r = P.vertex_ids[0]
            nx = X.chart(F.vertex_ids[0]).ambient
            ny = Y.chart(G.vertex_ids[0]).ambient
            emb_x = [[1 if i == j else 0 for j in range(nx)] for i in range(nx)] + [[0] * nx for _ in range(ny)]
            emb_y = [[0] * ny for _ in range(nx)] + [[1 if i == j else 0 for j in range(ny)] for i in range(ny)]
            vol = wedge(poly_apply(emb_x, X.volume(f)), poly_apply(emb_y, Y.volume(g)))
            c = poly_ratio(vol, Xp.canonical_volume(P.id, r))
            P.orientation = 1 if c is None or c > 0 else -1
    Xp._cache.clear()
    Xp.incidence = compute_incidence(Xp)
    return Xp


# ---------------------------------------------------------------- fans

def fan_space(rays: list[tuple[int, ...]], cones: list[tuple[int, ...]], weights: dict | None = None,
              name: str = "fan", ambient: int | None = None) -> TropicalSpace:
    """A fan as a (non-compact) tropical space with a single vertex.

    cones lists every cone (as sorted ray-index tuples) of positive dimension;
    the fan must be closed under taking faces.
    """
    n = len(rays[0]) if rays else ambient
    cones = sorted({tuple(sorted(c)) for c in cones}, key=lambda c: (len(c), c))
    ids = {c: "k" + "_".join(map(str, c)) for c in cones}
    specs = [FaceSpec("o", ("o",), 0)]
    records = {}
    for c in cones:
        if len(c) == 1:
            facets = ("o",)
        else:
            facets = tuple(ids[tuple(x for x in c if x != y)] for y in c)
        specs.append(FaceSpec(ids[c], ("o",), len(c), orientation=1, facets=facets, compact=False))
        records[(ids[c], "o")] = FaceRecord(tuple(tuple(rays[i]) for i in c), tuple(False for _ in c))
    chart = StarChart("o", n, frozenset(), {}, {"o": (Z,) * n})
    w = None if weights is None else {ids[tuple(sorted(c))]: x for c, x in weights.items()}
    return assemble(specs, [chart], [], explicit_records=records, weights=w, name=name)


# ---------------------------------------------------------------- plain simplices (subdivision tests)

def affine_simplex(dim: int) -> TropicalSpace:
    """A standard simplex in R^dim with all its faces (not balanced)."""
    pts = {f"x{i}": tuple(Fraction(int(i == j + 1)) for j in range(dim)) for i in range(dim + 1)}
    names = sorted(pts)
    specs = []
    for k in range(1, dim + 2):
        for S in combinations(names, k):
            specs.append(FaceSpec(S[0] if k == 1 else "s" + "".join(x[1:] for x in S), S, k - 1))
    charts = [_chart(v, pts) for v in names]
    trans = [_translation(a, b, [0] * dim) for a in names for b in names if a != b]
    return assemble(specs, charts, trans, name=f"simplex:{dim}")


# ---------------------------------------------------------------- names

def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def example(name: str) -> TropicalSpace:
    """Build a bundled example from its command-line name."""
    from .errors import ParseError
    try:
        if name.startswith("tp:"):
            return tp(int(name[3:]))
        if name.startswith("elliptic:"):
            return elliptic(Fraction(name[9:]))
        if name == "nodal-genus2":
            return nodal_genus2()
        if name.startswith("torus:"):
            a, b = name[6:].split(",")
            return torus(Fraction(a), Fraction(b))
        if name == "line-r2":
            return line_r2()
        if name.startswith("tp-product:"):
            a, b = name[11:].split(",")
            return product(tp(int(a)), tp(int(b)), name=name)
        if name.startswith("bergman:"):
            from .matroid import bergman_space, matroid_from_ref
            return bergman_space(matroid_from_ref(name[8:]))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad example parameters in {name!r}: {exc}") from None
    raise ParseError(f"unknown example {name!r}")


BUNDLED = ["tp:1", "tp:2", "elliptic:3", "elliptic:5", "nodal-genus2", "line-r2", "torus:1,1", "tp-product:1,1"]
