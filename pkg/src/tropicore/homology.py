"""Cellular and barycentric chain complexes with framing and wave coefficients.

Systems:

* ``F``      chains with coefficients F_p   (homological, integral)
* ``Fdual``  cochains with values in F^p    (cohomological, integral)
* ``W``      cochains with values in W_k    (cohomological, ranks over Q)
* ``Wdual``  chains with coefficients W^k   (homological, ranks over Q)

Cellular cells are all faces (sedentary ones included); barycentric
simplices are flags of mobile faces and carry the fiber of their carrier
face.  Coboundaries are plain transposes, ``delta(a) = a o boundary``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .coefficients import (
    cell_divisorial,
    echelon_coords,
    framing_fiber,
    iota,
    pi,
    transport_framing,
    wave_fiber,
)
from .errors import NotBalanced, NotPurelySkeletal, TropicoreError
from .exact_linalg import (
    IntMatrix,
    Poly,
    contract,
    homology_from_sparse,
    integer_kernel,
    inverse_unimodular,
    invariant_factors,
    pair_form,
    poly_add,
    poly_scale,
    poly_to_coords,
    rational_rank,
    smith_normal_form,
    wedge,
    wedge_vectors,
)
from .tropical_space import (
    TropicalSpace,
    barycentric_subdivision,
    normalize_sign,
    subdivision_terms,
    wave_space,
)

SYSTEMS = ("F", "Fdual", "W", "Wdual")


# ---------------------------------------------------------------- chains


@dataclass
class Chain:
    """A chain (or cochain) with polyvector coefficients in the fibers of its cells.

    kind is "cell" (keys are face ids) or "bar" (keys are flags).  Each value
    lives in the reference chart of the key's carrier face.
    """

    kind: str
    system: str
    p: int
    q: int
    terms: dict = field(default_factory=dict)

    def copy(self) -> "Chain":
        return Chain(self.kind, self.system, self.p, self.q, dict(self.terms))

    def add_term(self, key, value: Poly, c=1) -> None:
        cur = poly_add(self.terms.get(key, {}), value, c)
        if cur:
            self.terms[key] = cur
        else:
            self.terms.pop(key, None)

    def __add__(self, other: "Chain") -> "Chain":
        out = self.copy()
        for k, v in other.terms.items():
            out.add_term(k, v)
        return out

    def __sub__(self, other: "Chain") -> "Chain":
        return self + other.scaled(-1)

    def scaled(self, c) -> "Chain":
        return Chain(self.kind, self.system, self.p, self.q,
                     {k: poly_scale(v, c) for k, v in self.terms.items() if c})

    def is_zero(self) -> bool:
        return not any(self.terms.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return (self.kind, self.q) == (other.kind, other.q) and (self - other).is_zero()


def carrier_of(X: TropicalSpace, kind: str, key) -> str:
    if kind == "cell":
        return key
    B = barycentric_subdivision(X)
    q, i = B.index[key]
    return B.simplices[q][i].carrier


def boundary(X: TropicalSpace, chain: Chain) -> Chain:
    """Boundary of an F_p chain computed directly on polyvectors."""
    out = Chain(chain.kind, chain.system, chain.p, chain.q - 1)
    if chain.kind == "cell":
        for f, beta in chain.terms.items():
            for g in X.facets_of[f]:
                out.add_term(g, transport_framing(X, beta, f, g), X.incidence[(f, g)])
    else:
        for fl, beta in chain.terms.items():
            c = carrier_of(X, "bar", fl)
            for j in range(len(fl)):
                sub = fl[:j] + fl[j + 1:]
                if sub:
                    out.add_term(sub, transport_framing(X, beta, c, carrier_of(X, "bar", sub)), -1 if j % 2 else 1)
    return out


def cell_to_bar(X: TropicalSpace, chain: Chain) -> Chain:
    """The barycentric chain with equal coefficients on the simplices of each cell."""
    out = Chain("bar", chain.system, chain.p, chain.q)
    for f, beta in chain.terms.items():
        for fl, sign in subdivision_terms(X, f):
            out.add_term(fl, transport_framing(X, beta, f, carrier_of(X, "bar", fl)), sign)
    return out


def is_divisible(X: TropicalSpace, fid: str, beta: Poly) -> bool:
    """Is a coefficient on a cell divisible by all divisorial vectors of the cell?"""
    extra = cell_divisorial(X, fid) - X.face(fid).sedentarity
    return all(not wedge({(j,): 1}, beta) for j in extra)


# ---------------------------------------------------------------- complexes


class ChainComplexData:
    """Graded sparse (co)boundary matrices of a chain complex with fiber coefficients.

    ``maps[q]`` is a list of sparse columns (dict row -> value) describing
    the differential leaving degree q: to q-1 for homological systems, to
    q+1 for cohomological ones.
    """

    def __init__(self, X: TropicalSpace, system: str, p: int, method: str = "cell"):
        if system not in SYSTEMS:
            raise ValueError(f"unknown coefficient system {system!r}")
        if method not in ("cell", "bar"):
            raise ValueError(f"unknown method {method!r}")
        self.space = X
        self.system = system
        self.p = p
        self.method = method
        self.homological = system in ("F", "Wdual")
        self.dim = X.dim
        self.cells: dict[int, list] = {}
        self.carriers: dict[int, list[str]] = {}
        self.offsets: dict[int, list[int]] = {}
        self.sizes: dict[int, int] = {}
        self.index: dict[int, dict] = {}
        self._fiber = framing_fiber if system in ("F", "Fdual") else wave_fiber
        if method == "cell":
            for q in range(self.dim + 1):
                self._register(q, X.faces_of_dim(q), X.faces_of_dim(q))
        else:
            B = barycentric_subdivision(X)
            for q in range(self.dim + 1):
                sims = B.simplices.get(q, [])
                self._register(q, [s.flag for s in sims], [s.carrier for s in sims])
        self.maps: dict[int, list[dict]] = {}
        for q in range(self.dim + 1):
            self.maps[q] = self._build(q)

    def _register(self, q: int, keys: list, carriers: list[str]) -> None:
        self.cells[q] = list(keys)
        self.carriers[q] = list(carriers)
        self.index[q] = {k: i for i, k in enumerate(keys)}
        offs = []
        total = 0
        for c in carriers:
            offs.append(total)
            total += self._fiber(self.space, c, self.p).rank
        self.offsets[q] = offs
        self.sizes[q] = total

    def fiber(self, q: int, i: int):
        return self._fiber(self.space, self.carriers[q][i], self.p)

    def size(self, q: int) -> int:
        return self.sizes.get(q, 0)

    def _faces(self, q: int, i: int) -> list[tuple[int, int]]:
        """(index of a codim-1 face in degree q-1, incidence sign)."""
        X = self.space
        if self.method == "cell":
            f = self.cells[q][i]
            return [(self.index[q - 1][g], X.incidence[(f, g)]) for g in X.facets_of[f]]
        fl = self.cells[q][i]
        out = []
        for j in range(len(fl)):
            sub = fl[:j] + fl[j + 1:]
            if sub:
                out.append((self.index[q - 1][sub], -1 if j % 2 else 1))
        return out

    def _block(self, big: str, small: str) -> IntMatrix:
        X, p = self.space, self.p
        if self.system in ("F", "Fdual"):
            return iota(X, big, small, p).matrix
        return pi(X, small, big, p).matrix

    def _build(self, q: int) -> list[dict]:
        X = self.space
        n = self.size(q)
        cols: list[dict] = [dict() for _ in range(n)]
        if self.homological:
            if q == 0:
                return cols
            for i in range(len(self.cells[q])):
                big = self.carriers[q][i]
                o_big = self.offsets[q][i]
                for j, s in self._faces(q, i):
                    small = self.carriers[q - 1][j]
                    o_small = self.offsets[q - 1][j]
                    M = self._block(big, small)
                    if self.system == "Wdual":
                        M = M.transpose()
                    for a in range(M.cols):
                        col = cols[o_big + a]
                        for b in range(M.rows):
                            x = M[b, a]
                            if x:
                                col[o_small + b] = col.get(o_small + b, 0) + s * x
        else:
            if q == self.dim:
                return cols
            for i in range(len(self.cells[q + 1])):
                big = self.carriers[q + 1][i]
                o_big = self.offsets[q + 1][i]
                for j, s in self._faces(q + 1, i):
                    small = self.carriers[q][j]
                    o_small = self.offsets[q][j]
                    M = self._block(big, small)
                    if self.system == "Fdual":
                        M = M.transpose()
                    # M maps the degree-q fiber (small) into the degree-(q+1) fiber (big)
                    for a in range(M.cols):
                        col = cols[o_small + a]
                        for b in range(M.rows):
                            x = M[b, a]
                            if x:
                                col[o_big + b] = col.get(o_big + b, 0) + s * x
        return [{k: v for k, v in c.items() if v} for c in cols]

    # -------------------------------------------------------- matrices

    def target_degree(self, q: int) -> int:
        return q - 1 if self.homological else q + 1

    def matrix(self, q: int) -> IntMatrix:
        t = self.target_degree(q)
        rows = self.size(t) if 0 <= t <= self.dim else 0
        cols = self.maps.get(q, [])
        data = [[0] * len(cols) for _ in range(rows)]
        for j, c in enumerate(cols):
            for i, x in c.items():
                data[i][j] = x
        return IntMatrix(data, rows, len(cols))

    def rows_of(self, q: int) -> list[dict[int, int]]:
        t = self.target_degree(q)
        rows = self.size(t) if 0 <= t <= self.dim else 0
        out: list[dict[int, int]] = [dict() for _ in range(rows)]
        for j, c in enumerate(self.maps.get(q, [])):
            for i, x in c.items():
                out[i][j] = x
        return out

    def incoming(self, q: int) -> list[dict[int, int]]:
        """Rows of the differential arriving in degree q."""
        src = q + 1 if self.homological else q - 1
        if not 0 <= src <= self.dim:
            return []
        return self.rows_of(src)

    def apply(self, q: int, vec: Mapping[int, object]) -> dict[int, object]:
        out: dict[int, object] = {}
        cols = self.maps.get(q, [])
        for j, x in vec.items():
            if x:
                for i, y in cols[j].items():
                    out[i] = out.get(i, 0) + x * y
        return {i: x for i, x in out.items() if x}

    def composition_is_zero(self) -> bool:
        for q in range(self.dim + 1):
            t = self.target_degree(q)
            if not 0 <= t <= self.dim:
                continue
            for c in self.maps[q]:
                if self.apply(t, c):
                    return False
        return True

    def homology(self, q: int) -> tuple[int, list[int]]:
        if not 0 <= q <= self.dim:
            return 0, []
        betti, tors = homology_from_sparse(self.rows_of(q), self.incoming(q), self.size(q))
        if self.system in ("W", "Wdual"):
            tors = []
        return betti, tors

    # -------------------------------------------------------- chains <-> vectors

    def vector(self, chain: Chain, integral: bool = False) -> dict[int, object]:
        q = chain.q
        out: dict[int, object] = {}
        for key, val in chain.terms.items():
            i = self.index[q][key]
            coords = self.fiber(q, i).coords(val, integral=integral)
            for a, x in enumerate(coords):
                if x:
                    out[self.offsets[q][i] + a] = x
        return out

    def chain(self, q: int, vec: Mapping[int, object]) -> Chain:
        kind = "cell" if self.method == "cell" else "bar"
        out = Chain(kind, self.system, self.p, q)
        for i, key in enumerate(self.cells[q]):
            F = self.fiber(q, i)
            o = self.offsets[q][i]
            coords = [vec.get(o + a, 0) for a in range(F.rank)]
            if any(coords):
                out.terms[key] = F.element(coords)
        return out


def cellular_complex(X: TropicalSpace, system: str, p: int) -> ChainComplexData:
    key = ("cx", system, p, "cell")
    if key not in X._cache:
        X._cache[key] = ChainComplexData(X, system, p, "cell")
    return X._cache[key]


def barycentric_complex(X: TropicalSpace, system: str, p: int) -> ChainComplexData:
    key = ("cx", system, p, "bar")
    if key not in X._cache:
        X._cache[key] = ChainComplexData(X, system, p, "bar")
    return X._cache[key]


def chain_complex(X: TropicalSpace, system: str, p: int, method: str = "cell") -> ChainComplexData:
    return cellular_complex(X, system, p) if method == "cell" else barycentric_complex(X, system, p)


# ---------------------------------------------------------------- tables


@dataclass
class HomologyTable:
    system: str
    method: str
    dim: int
    entries: dict[tuple[int, int], tuple[int, list[int]]]

    def rank(self, p: int, q: int) -> int:
        return self.entries[(p, q)][0]

    def ranks(self) -> dict[tuple[int, int], int]:
        return {k: v[0] for k, v in self.entries.items()}

    def render(self) -> str:
        lines = [f"system {self.system}  method {self.method}"]
        for (p, q), (b, t) in sorted(self.entries.items()):
            tor = "" if not t else "  torsion " + " ".join(f"Z/{d}" for d in t)
            lines.append(f"p={p} q={q}: rank {b}{tor}")
        return "\n".join(lines)

    def render_hodge(self) -> str:
        """Ranks h^{p,q} arranged with p along rows and q along columns."""
        n = self.dim
        width = max(len(str(b)) for b, _ in self.entries.values()) if self.entries else 1
        lines = [" " * 4 + " ".join(f"q={q}".rjust(width + 2) for q in range(n + 1))]
        for p in range(n, -1, -1):
            lines.append(f"p={p} " + " ".join(str(self.rank(p, q)).rjust(width + 2) for q in range(n + 1)))
        return "\n".join(lines)


def homology_table(X: TropicalSpace, system: str = "F", method: str = "cell") -> HomologyTable:
    n = X.dim
    entries = {}
    for p in range(n + 1):
        C = chain_complex(X, system, p, method)
        for q in range(n + 1):
            entries[(p, q)] = C.homology(q)
    return HomologyTable(system, method, n, entries)


# ---------------------------------------------------------------- homology bases


class HomologyBasis:
    """Integral generators of the free part of a homology group of a chain complex.

    Generators are the cycles K U^{-1} e_i for the free indices of the Smith
    form of the boundaries written in an HNF basis K of the cycles.
    """

    def __init__(self, C: ChainComplexData, q: int):
        self.complex = C
        self.q = q
        n = C.size(q)
        t = C.target_degree(q)
        if 0 <= t <= C.dim and C.size(t):
            K = integer_kernel(C.matrix(q), n)
        else:
            K = [tuple(int(i == j) for i in range(n)) for j in range(n)]
        self.kernel = [tuple(k) for k in K]
        m = len(K)
        src = q + 1 if C.homological else q - 1
        bcols = C.maps.get(src, []) if 0 <= src <= C.dim else []
        bmat_cols = []
        for c in bcols:
            if not c:
                continue
            v = [c.get(i, 0) for i in range(n)]
            coords = echelon_coords(self.kernel, v)
            if coords is None:
                raise TropicoreError("boundary is not a cycle")
            bmat_cols.append([int(x) for x in coords])
        if m and bmat_cols:
            Bm = IntMatrix.from_columns(bmat_cols, m)
            U, D, _ = smith_normal_form(Bm)
            r = sum(1 for i in range(min(D.shape)) if D[i, i])
            self.torsion = [D[i, i] for i in range(r) if D[i, i] > 1]
        else:
            U = IntMatrix.identity(m)
            r = 0
            self.torsion = []
        self._U = U
        self._r = r
        Uinv = inverse_unimodular(U) if m else IntMatrix.identity(0)
        self.generators: list[dict[int, int]] = []
        for i in range(r, m):
            col = Uinv.column(i)
            vec: dict[int, int] = {}
            for c, k in zip(col, self.kernel):
                if c:
                    for a, x in enumerate(k):
                        if x:
                            vec[a] = vec.get(a, 0) + c * x
            self.generators.append({a: x for a, x in vec.items() if x})

    @property
    def rank(self) -> int:
        return len(self.generators)

    def coordinates(self, vec: Mapping[int, object]) -> list[Fraction]:
        """Class of a cycle in the free basis (over Q)."""
        n = self.complex.size(self.q)
        v = [vec.get(i, 0) for i in range(n)]
        c = echelon_coords(self.kernel, v) if self.kernel else ([] if not any(v) else None)
        if c is None:
            raise TropicoreError("vector is not a cycle")
        m = len(self.kernel)
        u = [sum(self._U[i, j] * c[j] for j in range(m)) for i in range(m)]
        out = u[self._r:]
        # torsion-free over Q: also divide out the image directions
        return [Fraction(x) for x in out]

    def cycle_chain(self, i: int) -> Chain:
        return self.complex.chain(self.q, self.generators[i])


def homology_basis(X: TropicalSpace, system: str, p: int, q: int, method: str = "cell") -> HomologyBasis:
    key = ("hb", system, p, q, method)
    if key not in X._cache:
        X._cache[key] = HomologyBasis(chain_complex(X, system, p, method), q)
    return X._cache[key]


def cycle_divisibility(X: TropicalSpace, chain: Chain) -> list[str]:
    """Cells on which a cellular chain violates divisibility by divisorial vectors."""
    return sorted(f for f, beta in chain.terms.items() if not is_divisible(X, f, beta))


# ---------------------------------------------------------------- straight classes


def straight_class(X: TropicalSpace, weights: Mapping[str, int]) -> Chain:
    """Fundamental chain sum w(s) Vol_s s of a weighted subcomplex made of p-dimensional faces.

    A negative weight reverses the face orientation.  Raises NotBalanced at
    the first mobile codimension-one face where weighted balancing fails.
    """
    facets = {f: int(w) for f, w in weights.items() if w}
    if not facets:
        raise NotBalanced("empty weighted subcomplex")
    dims = {X.face(f).dim for f in facets}
    if len(dims) != 1:
        raise NotBalanced("facets of different dimensions")
    p = dims.pop()
    ridges = sorted({g for f in facets for g in X.facets_of[f] if not X.faces[g].sedentarity})
    for r in ridges:
        v = X.ref(r)
        T = [list(t) for t in X.tangent_basis(r, v)]
        n = X.chart(v).ambient
        total = [0] * n
        for f, w in facets.items():
            if r in X.facets_of[f] and not X.sed_at(f, v):
                out = X.outward_vector(f, r, v)
                total = [a + w * b for a, b in zip(total, out)]
        if any(total) and rational_rank(T + [total]) > len(T):
            raise NotBalanced(f"weighted outward vectors at {r} sum to {tuple(total)}")
    chain = Chain("cell", "F", p, p)
    for f, w in sorted(facets.items()):
        chain.add_term(f, X.volume(f), w)
    if not boundary(X, chain).is_zero():
        raise NotBalanced("the weighted fundamental chain is not a cycle")
    return chain


# ---------------------------------------------------------------- straight cowaves


@dataclass
class CowaveChain:
    chain: Chain
    vector: dict[int, object]
    m: int
    cobalanced: bool


def wave_volume_form(X: TropicalSpace, fid: str) -> Poly:
    """Dual of the canonical volume element of W(fid): a form taking value 1 on it."""
    W = wave_space(X, fid)
    vol = normalize_sign(wedge_vectors(W))
    # the dual basis form e^K with value 1 on vol: pick the first coordinate of vol
    K, c = min(vol.items())
    return {K: Fraction(1, c)}


def cowave_chain(X: TropicalSpace, coweights: Mapping[str, object]) -> CowaveChain:
    """The straight cowave chain of a purely skeletal coweighted union of q-faces.

    A coweight is either a number (a multiple of the dual canonical volume
    form of W) or an explicit form.
    """
    cells = {f: c for f, c in coweights.items()}
    if not cells:
        raise NotPurelySkeletal("empty subspace")
    dims = {X.face(f).dim for f in cells}
    if len(dims) != 1:
        raise NotPurelySkeletal("facets of different dimensions")
    q = dims.pop()
    wdims = {len(wave_space(X, f)) for f in cells}
    if len(wdims) != 1:
        raise NotPurelySkeletal(f"wave dimension varies over the facets: {sorted(wdims)}")
    m = wdims.pop()
    if m < q:
        raise NotPurelySkeletal(f"wave dimension {m} is smaller than the facet dimension {q}")
    C = cellular_complex(X, "Wdual", m - q)
    chain = Chain("cell", "Wdual", m - q, q)
    vec: dict[int, object] = {}
    for f, cw in sorted(cells.items()):
        form = poly_scale(wave_volume_form(X, f), Fraction(cw)) if not isinstance(cw, dict) else dict(cw)
        vol = X.volume(f)
        # functional  lambda -> cow(lambda ^ Vol) = (-1)^{q(m-q)} (cow |_ Vol)(lambda)
        sign = -1 if (q * (m - q)) % 2 else 1
        coef_form = poly_scale(contract(form, vol), sign)
        i = C.index[q][f]
        Fb = C.fiber(q, i)
        vals = [pair_form(coef_form, e) for e in Fb.polys()]
        chain.terms[f] = coef_form
        for a, x in enumerate(vals):
            if x:
                vec[C.offsets[q][i] + a] = x
    bd = C.apply(q, vec) if q > 0 else {}
    return CowaveChain(chain, vec, m, not bd)
