"""Matroids given by rank functions, their flats and Bergman fans.

Ground set elements are the integers ``1..n``.  The ray of element ``j`` is
the standard basis vector ``e_j`` of ``Z^(n-1)`` for ``j < n`` and
``e_n = -(e_1 + ... + e_(n-1))``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Iterable

from .errors import InvalidRankFunction, LooplessRequired, NotCodimOne, ParseError
from .exact_linalg import primitive, rational_rank, rational_solve

Subset = frozenset


class Matroid:
    """A matroid on {1..n} with an explicit rank table over all subsets."""

    def __init__(self, ground: int, rank: dict[frozenset, int], check: bool = True):
        self.ground = ground
        self._rank = {frozenset(k): int(v) for k, v in rank.items()}
        if check:
            self.check()

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(range(1, self.ground + 1))

    def rank(self, A: Iterable[int] = None) -> int:
        A = frozenset(self.elements if A is None else A)
        try:
            return self._rank[A]
        except KeyError:
            raise InvalidRankFunction(f"rank of {sorted(A)} is not defined") from None

    def subsets(self):
        for k in range(self.ground + 1):
            for S in combinations(self.elements, k):
                yield frozenset(S)

    def check(self) -> None:
        subs = list(self.subsets())
        for A in subs:
            if A not in self._rank:
                raise InvalidRankFunction(f"rank of {sorted(A)} is missing")
        if self._rank[frozenset()] != 0:
            raise InvalidRankFunction("rank of the empty set must be 0")
        for A in subs:
            r = self._rank[A]
            if r < 0 or r > len(A):
                raise InvalidRankFunction(f"rank of {sorted(A)} must lie in [0, |A|]")
            for x in self.elements:
                if x not in A:
                    s = self._rank[A | {x}]
                    if s < r or s > r + 1:
                        raise InvalidRankFunction(f"adding {x} to {sorted(A)} changes the rank by {s - r}")
        for A in subs:
            for B in subs:
                if self._rank[A | B] + self._rank[A & B] > self._rank[A] + self._rank[B]:
                    raise InvalidRankFunction(f"submodularity fails for {sorted(A)} and {sorted(B)}")

    def is_loopless(self) -> bool:
        return all(self._rank[frozenset({x})] == 1 for x in self.elements)

    def __eq__(self, other) -> bool:
        return isinstance(other, Matroid) and self.ground == other.ground and self._rank == other._rank

    def __repr__(self) -> str:
        return f"Matroid(ground={self.ground}, rank={self.rank()})"


def uniform(r: int, n: int) -> Matroid:
    if not 0 <= r <= n:
        raise InvalidRankFunction(f"uniform matroid needs 0 <= r <= n, got ({r}, {n})")
    return Matroid(n, {frozenset(S): min(len(S), r) for k in range(n + 1) for S in combinations(range(1, n + 1), k)},
                   check=False)


def from_bases(bases: Iterable[Iterable[int]], ground: int | None = None) -> Matroid:
    bases = [frozenset(b) for b in bases]
    if not bases:
        raise InvalidRankFunction("a matroid needs at least one basis")
    if ground is None:
        ground = max((max(b) for b in bases if b), default=0)
    sizes = {len(b) for b in bases}
    if len(sizes) != 1:
        raise InvalidRankFunction("bases have different sizes")
    if any(x < 1 or x > ground for b in bases for x in b):
        raise InvalidRankFunction("basis element outside the ground set")
    base_set = set(bases)
    for B1 in bases:
        for B2 in bases:
            for x in B1 - B2:
                if not any((B1 - {x}) | {y} in base_set for y in B2 - B1):
                    raise InvalidRankFunction(f"basis exchange fails for {sorted(B1)}, {sorted(B2)}")
    rank = {}
    for k in range(ground + 1):
        for S in combinations(range(1, ground + 1), k):
            S = frozenset(S)
            rank[S] = max(len(S & B) for B in bases)
    return Matroid(ground, rank)


def _parse_subset(key: str) -> frozenset:
    key = key.strip()
    if not key:
        return frozenset()
    return frozenset(int(x) for x in key.replace(" ", "").split(","))


def parse_matroid(obj) -> Matroid:
    """Build a matroid from its JSON description."""
    if not isinstance(obj, dict):
        raise ParseError("matroid description must be an object")
    try:
        if "uniform" in obj:
            r, n = obj["uniform"]
            return uniform(int(r), int(n))
        if "bases" in obj:
            return from_bases(obj["bases"], obj.get("ground"))
        if "rank" in obj:
            n = int(obj["ground"])
            return Matroid(n, {_parse_subset(k): int(v) for k, v in obj["rank"].items()})
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"malformed matroid description: {exc}") from None
    raise ParseError("matroid description needs one of 'uniform', 'bases', 'rank'")


def matroid_from_ref(ref: str) -> Matroid:
    """Resolve ``uniform:r,n`` / ``U:r,n`` shorthands or a path to a matroid JSON file."""
    for prefix in ("uniform:", "U:", "u:"):
        if ref.startswith(prefix):
            try:
                r, n = (int(x) for x in ref[len(prefix):].split(","))
            except ValueError:
                raise ParseError(f"bad uniform matroid reference {ref!r}") from None
            return uniform(r, n)
    p = Path(ref)
    if not p.exists():
        raise ParseError(f"cannot resolve matroid reference {ref!r}")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, position=f"column {exc.colno}") from None
    return parse_matroid(obj)


def matroid_to_json(M: Matroid) -> dict:
    return {"ground": M.ground,
            "rank": {",".join(map(str, sorted(S))): M.rank(S) for S in M.subsets()}}


# ---------------------------------------------------------------- flats


def closure(M: Matroid, A: Iterable[int]) -> frozenset:
    A = frozenset(A)
    r = M.rank(A)
    return A | {x for x in M.elements if M.rank(A | {x}) == r}


def flats(M: Matroid) -> list[tuple[frozenset, int]]:
    """All flats with their ranks, ordered by rank then lexicographically."""
    out = []
    for A in M.subsets():
        r = M.rank(A)
        if all(M.rank(A | {x}) > r for x in M.elements if x not in A):
            out.append((A, r))
    return sorted(out, key=lambda fr: (fr[1], sorted(fr[0])))


# ---------------------------------------------------------------- Bergman fan


def element_vector(j: int, n: int) -> tuple[int, ...]:
    if j == n:
        return tuple(-1 for _ in range(n - 1))
    return tuple(int(i == j - 1) for i in range(n - 1))


def flat_vector(F: Iterable[int], n: int) -> tuple[int, ...]:
    out = [0] * (n - 1)
    for j in F:
        for i, x in enumerate(element_vector(j, n)):
            out[i] += x
    return tuple(out)


@dataclass
class BergmanFan:
    ambient_dim: int
    rays: dict[frozenset, tuple[int, ...]]
    cones: list[tuple[frozenset, ...]]  # chains of proper nonempty flats
    dim: int
    matroid: Matroid = field(repr=False)

    @property
    def maximal_cones(self) -> list[tuple[frozenset, ...]]:
        return [c for c in self.cones if len(c) == self.dim]

    def ray_list(self) -> list[frozenset]:
        return sorted(self.rays, key=lambda F: (len(F), sorted(F)))

    def contains(self, x) -> bool:
        """Whether a rational point of the ambient space lies in the support."""
        x = [Fraction(a) for a in x]
        if not any(x):
            return True
        for cone in self.maximal_cones or [()]:
            if not cone:
                continue
            cols = [self.rays[F] for F in cone]
            rows = [[c[i] for c in cols] for i in range(self.ambient_dim)]
            lam = rational_solve(rows, x)
            if lam is not None and all(t >= 0 for t in lam):
                return True
        return False


def bergman_fan(M: Matroid) -> BergmanFan:
    if not M.is_loopless():
        raise LooplessRequired("the Bergman fan is defined for loopless matroids only")
    n = M.ground
    proper = [F for F, r in flats(M) if 0 < r < M.rank()]
    rays = {F: flat_vector(F, n) for F in proper}
    cones: list[tuple[frozenset, ...]] = []
    chains = [(F,) for F in proper]
    while chains:
        cones.extend(chains)
        chains = [c + (G,) for c in chains for G in proper if c[-1] < G]
    cones.sort(key=lambda c: (len(c), [sorted(F) for F in c]))
    return BergmanFan(n - 1, rays, cones, M.rank() - 1, M)


def bergman_space(M: Matroid, name: str | None = None):
    """The Bergman fan as a single-vertex (non-compact) tropical space."""
    from .library import fan_space
    fan = bergman_fan(M)
    order = fan.ray_list()
    idx = {F: i for i, F in enumerate(order)}
    if not order:
        return fan_space([], [], name=name or "bergman", ambient=fan.ambient_dim)
    return fan_space([fan.rays[F] for F in order], [tuple(idx[F] for F in c) for c in fan.cones],
                     name=name or "bergman")


# ---------------------------------------------------------------- smoothness in codimension one


@dataclass
class Certificate:
    face: str
    vectors: list[tuple[int, ...]]
    rank: int
    passed: bool
    detail: str = ""

    def __bool__(self) -> bool:
        return self.passed


def codim1_smoothness_certificate(X, fid: str) -> Certificate:
    """Check that the outward vectors around a mobile codimension-one face satisfy a single relation."""
    F = X.face(fid)
    if F.sedentarity:
        raise NotCodimOne(f"face {fid} is sedentary")
    up = [g for g in X.cofacets_of[fid] if not X.faces[g].sedentarity]
    if not up or any(X.faces[g].dim > F.dim + 1 for g in X.above[fid] if not X.faces[g].sedentarity):
        raise NotCodimOne(f"face {fid} is not of codimension one in its star")
    r = X.ref(fid)
    T = [list(t) for t in X.tangent_basis(fid, r)]
    vecs = [tuple(X.outward_vector(g, fid, r)) for g in up]
    k = len(vecs)
    rank = rational_rank(T + [list(v) for v in vecs]) - len(T) if T else rational_rank([list(v) for v in vecs])
    total = [sum(X.weight(g) * v[i] for g, v in zip(up, vecs)) for i in range(len(vecs[0]))]
    balanced = rational_rank(T + [total]) == len(T) if T else not any(total)
    ok = balanced and rank == k - 1
    detail = "" if ok else ("not balanced" if not balanced else f"{k} vectors span rank {rank}, expected {k - 1}")
    return Certificate(fid, [tuple(primitive(v)) for v in vecs], rank, ok, detail)
