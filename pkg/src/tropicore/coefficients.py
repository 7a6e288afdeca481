"""Framing fibers F_p, wave fibers W_k and the maps between them.

Every fiber is stored as an HNF lattice basis inside the exterior power of
the ambient lattice of a chart (the face's reference chart unless another
vertex is requested).  Elements are handled as polyvectors (dicts keyed by
sorted index tuples) and converted to carrier coordinates on demand.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .errors import NotAFacePair, NotDivisible
from .exact_linalg import (
    IntMatrix,
    Poly,
    coords_to_poly,
    hermite_normal_form,
    poly_add,
    poly_scale,
    poly_to_coords,
    poly_zero_coords,
    wedge,
    wedge_basis,
    wedge_vectors,
)
from .tropical_space import TropicalSpace, divisorial_space, wave_space


def echelon_coords(basis: Sequence[Sequence[int]], vec: Sequence) -> list[Fraction] | None:
    """Coordinates of vec in an echelon (HNF) row basis, or None if vec is outside its span."""
    v = [Fraction(x) for x in vec]
    out = []
    for row in basis:
        piv = next(i for i, x in enumerate(row) if x)
        c = v[piv] / row[piv]
        out.append(c)
        if c:
            for i, x in enumerate(row):
                if x:
                    v[i] -= c * x
    if any(v):
        return None
    return out


@dataclass(frozen=True)
class _Carrier:
    face_id: str
    degree: int
    chart: str
    ambient: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    def polys(self) -> list[Poly]:
        return [coords_to_poly(b, self.ambient, self.degree) for b in self.basis]

    def coords(self, p: Poly, integral: bool = False) -> list:
        """Coordinates of an element in the carrier basis; raises ValueError if it does not lie in the span."""
        if self.degree > self.ambient:
            if p:
                raise ValueError("nonzero element in a zero fiber")
            return []
        c = echelon_coords(self.basis, poly_to_coords(p, self.ambient, self.degree))
        if c is None:
            raise ValueError(f"element is not in the fiber of {self.face_id}")
        if integral:
            if any(x.denominator != 1 for x in c):
                raise ValueError(f"element is not integral in the fiber of {self.face_id}")
            return [int(x) for x in c]
        return c

    def element(self, coords: Sequence) -> Poly:
        out: Poly = {}
        for c, b in zip(coords, self.polys()):
            if c:
                out = poly_add(out, b, c)
        return out


@dataclass(frozen=True)
class CoefFiber(_Carrier):
    """The framing lattice F_p of a face."""

    @property
    def p(self) -> int:
        return self.degree


@dataclass(frozen=True)
class WaveFiber(_Carrier):
    """Lambda^k of the wave lattice of a face, with its divisorial ideal and quotient carrier."""

    divisorial_ideal: tuple[tuple[int, ...], ...] = ()
    quotient: tuple[tuple[int, ...], ...] = ()

    @property
    def k(self) -> int:
        return self.degree


@dataclass(frozen=True)
class TransportMap:
    from_face: str
    to_face: str
    degree: int
    matrix: IntMatrix


def _wedges(vectors: Sequence[Sequence[int]], k: int, n: int) -> list[list[int]]:
    return [poly_to_coords(wedge_vectors(S), n, k) for S in combinations(vectors, k)]


def framing_fiber(X: TropicalSpace, fid: str, p: int, chart: str | None = None) -> CoefFiber:
    """F_p of a face: generated by p-fold wedges of tangent vectors of single adjacent faces of equal sedentarity."""
    X.face(fid)
    v = X.ref(fid) if chart is None else chart
    key = ("F", fid, p, v)
    if key in X._cache:
        return X._cache[key]
    n = X.chart(v).ambient
    I = X.sed_at(fid, v)
    gens: list[list[int]] = []
    if p == 0:
        gens = [[1]]
    elif p <= n:
        for g in sorted(X.above[fid]):
            if X.sed_at(g, v) != I:
                continue
            T = [tuple(0 if i in I else a for i, a in enumerate(t)) for t in X.tangent_basis(g, v)]
            gens.extend(_wedges(T, p, n))
    dim = len(wedge_basis(n, p)) if p <= n else 0
    basis = hermite_normal_form(gens, dim) if gens and dim else []
    out = CoefFiber(fid, p, v, n, tuple(basis))
    X._cache[key] = out
    return out


def cell_divisorial(X: TropicalSpace, fid: str) -> frozenset:
    """Coordinates (in the reference chart) of all divisorial directions of a cell, including its own sedentarity."""
    return X.chart(X.ref(fid)).infinity_coords


def wave_fiber(X: TropicalSpace, fid: str, k: int) -> WaveFiber:
    X.face(fid)
    key = ("Wk", fid, k)
    if key in X._cache:
        return X._cache[key]
    v = X.ref(fid)
    n = X.chart(v).ambient
    W = [tuple(w) for w in wave_space(X, fid)]
    div = [tuple(d) for d in divisorial_space(X, fid)]
    dim = len(wedge_basis(n, k)) if k <= n else 0
    if k == 0:
        basis = [(1,)]
    else:
        basis = hermite_normal_form(_wedges(W, k, n), dim) if dim and len(W) >= k else []
    # a basis of W adapted to the divisorial part: divisorial vectors first, then a complement
    sed = set(X.face(fid).sedentarity)
    comp = [tuple(0 if i in sed else a for i, a in enumerate(w)) for w in W]
    comp = hermite_normal_form([c for c in comp if any(c)], n) if comp else []
    ideal: list[list[int]] = []
    if k >= 1 and div:
        for j in range(1, min(k, len(div)) + 1):
            for D in combinations(div, j):
                for C in combinations(comp, k - j):
                    ideal.append(poly_to_coords(wedge_vectors(list(D) + list(C)), n, k))
    ideal_b = hermite_normal_form(ideal, dim) if ideal else []
    quot = hermite_normal_form(_wedges(comp, k, n), dim) if k and dim and len(comp) >= k else ([(1,)] if k == 0 else [])
    out = WaveFiber(fid, k, v, n, tuple(basis), tuple(ideal_b), tuple(quot))
    X._cache[key] = out
    return out


# ---------------------------------------------------------------- transport maps


def transport_framing(X: TropicalSpace, p_elem: Poly, a: str, b: str) -> Poly:
    """Push an element of F_p(a) (in chart ref(a)) to the face b below a."""
    return X.transport_poly(p_elem, X.ref(a), X.ref(b), X.face(b).sedentarity)


def transport_wave(X: TropicalSpace, w: Poly, a: str, b: str) -> Poly:
    """Push an element of W_k(a) (chart ref(a)) to a face b above a."""
    return X.transport_poly(w, X.ref(a), X.ref(b))


def _check_pair(X: TropicalSpace, big: str, small: str) -> None:
    X.face(big)
    X.face(small)
    if not X.leq(small, big):
        raise NotAFacePair(f"{small} is not a face of {big}")


def iota(X: TropicalSpace, from_face: str, to_face: str, p: int) -> TransportMap:
    """The cosheaf map F_p(from_face) -> F_p(to_face) for to_face a face of from_face."""
    _check_pair(X, from_face, to_face)
    key = ("iota", from_face, to_face, p)
    if key in X._cache:
        return X._cache[key]
    A = framing_fiber(X, from_face, p)
    B = framing_fiber(X, to_face, p)
    cols = [B.coords(transport_framing(X, e, from_face, to_face), integral=True) for e in A.polys()]
    M = IntMatrix.from_columns(cols, B.rank) if cols else IntMatrix.zeros(B.rank, 0)
    out = TransportMap(from_face, to_face, p, M)
    X._cache[key] = out
    return out


def pi(X: TropicalSpace, from_face: str, to_face: str, k: int) -> TransportMap:
    """The sheaf map W_k(from_face) -> W_k(to_face) for from_face a face of to_face."""
    _check_pair(X, to_face, from_face)
    key = ("pi", from_face, to_face, k)
    if key in X._cache:
        return X._cache[key]
    A = wave_fiber(X, from_face, k)
    B = wave_fiber(X, to_face, k)
    cols = [B.coords(transport_wave(X, e, from_face, to_face), integral=True) for e in A.polys()]
    M = IntMatrix.from_columns(cols, B.rank) if cols else IntMatrix.zeros(B.rank, 0)
    out = TransportMap(from_face, to_face, k, M)
    X._cache[key] = out
    return out


# ---------------------------------------------------------------- wedge action


def wedge_action(X: TropicalSpace, fid: str, w: Poly, beta: Poly) -> Poly:
    """w ^ beta in F_{p+k}(fid) tensor Q for w in Lambda^k(W/W_div) and beta in F_p(fid).

    w is lifted by dropping its divisorial coordinates.  The result does not
    depend on the lift exactly when beta is divisible by every divisorial
    vector of the cell; otherwise NotDivisible is raised.
    """
    X.face(fid)
    D = cell_divisorial(X, fid)
    sed = X.face(fid).sedentarity
    lifted = poly_zero_coords(w, D)
    if any(len(K) for K in w):
        for j in sorted(D - sed):
            e = {(j,): 1}
            if wedge(e, beta):
                raise NotDivisible(f"coefficient on {fid} is not divisible by the divisorial vector e_{j}")
    return poly_zero_coords(wedge(lifted, beta), sed)


def project_wave(X: TropicalSpace, fid: str, w: Poly) -> Poly:
    """Projection of a wave polyvector at a face along its own divisorial directions."""
    return poly_zero_coords(w, X.face(fid).sedentarity)

