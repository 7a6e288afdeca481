"""Reading and writing the tropspace/1 text format.

A space file is a JSON document with a "format" header and lists of faces,
charts and transitions.  Every number is written as a string "p/q" (q > 0,
lowest terms) and minus infinity as "-inf", so files compare bit-exactly.
Cocycle and chain files used by the command line follow the same rules.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .errors import ParseError
from .exact_linalg import IntMatrix
from .tropical_space import (
    NEG_INF,
    Face,
    FaceRecord,
    StarChart,
    TropicalSpace,
    Transition,
    compute_incidence,
    is_inf,
)

SPACE_FORMAT = "tropspace/1"
COCYCLE_FORMAT = "tropcocycle/1"
CYCLE_FORMAT = "tropcycle/1"


def fmt_rational(x) -> str:
    if is_inf(x):
        return "-inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: Any, where: str = "") -> Fraction:
    if isinstance(s, bool) or not isinstance(s, (str, int)):
        raise ParseError(f"expected a rational, got {s!r}", position=where)
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {s!r}", position=where) from None


def parse_coordinate(s: Any, where: str = ""):
    if s == "-inf":
        return NEG_INF
    return parse_rational(s, where)


def parse_int(s: Any, where: str = "") -> int:
    x = parse_rational(s, where)
    if x.denominator != 1:
        raise ParseError(f"expected an integer, got {s!r}", position=where)
    return int(x)


def _load(text: str, expected: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno, position=f"column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", line=1)
    if doc.get("format") != expected:
        raise ParseError(f"missing or unsupported format header (expected {expected!r})", line=1)
    return doc


def _get(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"missing field {key!r}", position=where)
    return obj[key]


def _dump(doc: dict) -> str:
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


# ---------------------------------------------------------------- spaces


def dumps_space(X: TropicalSpace) -> str:
    faces = []
    for fid in sorted(X.faces):
        F = X.faces[fid]
        faces.append({
            "id": F.id,
            "dim": fmt_rational(F.dim),
            "vertices": list(F.vertex_ids),
            "sedentarity": [fmt_rational(i) for i in sorted(F.sedentarity)],
            "parent": F.parent_id,
            "orientation": fmt_rational(F.orientation),
            "finite": F.is_finite,
            "compact": F.compact,
            "facets": sorted(X.facets_of.get(fid, [])),
        })
    charts = []
    for v in sorted(X.charts):
        C = X.charts[v]
        charts.append({
            "vertex": v,
            "ambient_dim": fmt_rational(C.ambient),
            "infinity_coords": [fmt_rational(i) for i in sorted(C.infinity_coords)],
            "coordinates": {w: [fmt_rational(a) for a in C.coordinates[w]] for w in sorted(C.coordinates)},
            "cones": [
                {"face": f,
                 "generators": [[fmt_rational(a) for a in g] for g in C.face_records[f].generators],
                 "divisorial": list(C.face_records[f].divisorial)}
                for f in sorted(C.face_records)
            ],
        })
    transitions = []
    for (a, b) in sorted(X.transitions):
        T = X.transitions[(a, b)]
        transitions.append({
            "from": a,
            "to": b,
            "linear": [[fmt_rational(x) for x in row] for row in T.linear.data],
            "translation": [fmt_rational(x) for x in T.translation],
        })
    doc = {"format": SPACE_FORMAT, "name": X.name, "faces": faces, "charts": charts, "transitions": transitions}
    if X.weights:
        doc["weights"] = {f: fmt_rational(w) for f, w in sorted(X.weights.items())}
    return _dump(doc)


def loads_space(text: str) -> TropicalSpace:
    doc = _load(text, SPACE_FORMAT)
    faces = []
    facets: dict[str, list[str]] = {}
    for i, f in enumerate(_get(doc, "faces", "top level")):
        w = f"faces[{i}]"
        fid = _get(f, "id", w)
        if not isinstance(fid, str):
            raise ParseError("face id must be a string", position=w)
        faces.append(Face(
            fid,
            parse_int(_get(f, "dim", w), w + ".dim"),
            tuple(_get(f, "vertices", w)),
            parse_int(f.get("orientation", "1"), w + ".orientation"),
            frozenset(parse_int(x, w + ".sedentarity") for x in f.get("sedentarity", [])),
            f.get("parent"),
            bool(f.get("finite", True)),
            bool(f.get("compact", True)),
        ))
        facets[fid] = list(f.get("facets", []))
    ids = {F.id for F in faces}
    for fid, fs in facets.items():
        for g in fs:
            if g not in ids:
                raise ParseError(f"facet {g!r} of {fid!r} is not a face", position="faces")
    charts = []
    for i, c in enumerate(_get(doc, "charts", "top level")):
        w = f"charts[{i}]"
        n = parse_int(_get(c, "ambient_dim", w), w + ".ambient_dim")
        coords = {}
        for vid, xs in _get(c, "coordinates", w).items():
            pt = tuple(parse_coordinate(x, f"{w}.coordinates.{vid}") for x in xs)
            if len(pt) != n:
                raise ParseError(f"coordinates of {vid} have length {len(pt)}, expected {n}", position=w)
            coords[vid] = pt
        recs = {}
        for j, cone in enumerate(c.get("cones", [])):
            cw = f"{w}.cones[{j}]"
            gens = tuple(tuple(parse_int(a, cw) for a in g) for g in _get(cone, "generators", cw))
            divs = tuple(bool(d) for d in _get(cone, "divisorial", cw))
            if len(gens) != len(divs):
                raise ParseError("generators and divisorial flags differ in length", position=cw)
            recs[_get(cone, "face", cw)] = FaceRecord(gens, divs)
        inf = frozenset(parse_int(x, w + ".infinity_coords") for x in c.get("infinity_coords", []))
        charts.append(StarChart(_get(c, "vertex", w), n, inf, recs, coords))
    transitions = []
    for i, t in enumerate(doc.get("transitions", [])):
        w = f"transitions[{i}]"
        rows = [[parse_int(x, w + ".linear") for x in row] for row in _get(t, "linear", w)]
        trans = tuple(parse_rational(x, w + ".translation") for x in _get(t, "translation", w))
        ncols = len(rows[0]) if rows else 0
        transitions.append(Transition(_get(t, "from", w), _get(t, "to", w), IntMatrix(rows, len(rows), ncols), trans))
    weights = {f: parse_int(x, "weights") for f, x in doc.get("weights", {}).items()}
    X = TropicalSpace(faces, charts, transitions, {}, weights, str(doc.get("name", "")))
    X.__dict__["facets_of"] = {f: sorted(fs) for f, fs in facets.items()}
    X.__dict__["cofacets_of"] = {f: sorted(a for a, fs in facets.items() if f in fs) for f in facets}
    try:
        X.incidence = compute_incidence(X)
    except Exception as exc:  # inconsistent charts surface as parse failures of the file
        raise ParseError(f"cannot orient faces: {exc}") from None
    return X


def read_space(path: str) -> TropicalSpace:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads_space(text)


def write_space(X: TropicalSpace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_space(X))


def spaces_equal(X: TropicalSpace, Y: TropicalSpace) -> bool:
    """Structural equality of two spaces (faces, charts, transitions, weights)."""
    if X.faces != Y.faces or X.weights != Y.weights:
        return False
    if set(X.charts) != set(Y.charts) or set(X.transitions) != set(Y.transitions):
        return False
    for v, C in X.charts.items():
        D = Y.charts[v]
        if (C.ambient, C.infinity_coords, C.face_records) != (D.ambient, D.infinity_coords, D.face_records):
            return False
        if set(C.coordinates) != set(D.coordinates):
            return False
        for w, p in C.coordinates.items():
            q = D.coordinates[w]
            if [fmt_rational(a) for a in p] != [fmt_rational(a) for a in q]:
                return False
    for k, T in X.transitions.items():
        U = Y.transitions[k]
        if T.linear.data != U.linear.data or tuple(T.translation) != tuple(U.translation):
            return False
    return X.facets_of == Y.facets_of and X.incidence == Y.incidence


# ---------------------------------------------------------------- cocycles and cycles


def loads_cocycle(text: str) -> dict[tuple[str, str], tuple[Fraction, ...]]:
    """Chart-overlap vectors {(a, b): tau_ab} for deformations."""
    doc = _load(text, COCYCLE_FORMAT)
    out = {}
    for i, e in enumerate(_get(doc, "values", "top level")):
        w = f"values[{i}]"
        out[(_get(e, "from", w), _get(e, "to", w))] = tuple(parse_rational(x, w) for x in _get(e, "vector", w))
    return out


def dumps_cocycle(tau: dict) -> str:
    vals = [{"from": a, "to": b, "vector": [fmt_rational(x) for x in v]} for (a, b), v in sorted(tau.items())]
    return _dump({"format": COCYCLE_FORMAT, "values": vals})


def loads_cycle(text: str) -> dict:
    """A cellular chain: {"p", "q", "terms": [{"cell", "framing": [{"indices", "value"}]}]}."""
    doc = _load(text, CYCLE_FORMAT)
    p = parse_int(_get(doc, "p", "top level"), "p")
    q = parse_int(_get(doc, "q", "top level"), "q")
    terms = {}
    for i, t in enumerate(_get(doc, "terms", "top level")):
        w = f"terms[{i}]"
        poly = {}
        for j, m in enumerate(_get(t, "framing", w)):
            idx = tuple(parse_int(a, f"{w}.framing[{j}]") for a in _get(m, "indices", w))
            poly[idx] = parse_rational(_get(m, "value", w), w)
        terms[_get(t, "cell", w)] = poly
    return {"p": p, "q": q, "terms": terms}


def dumps_cycle(p: int, q: int, terms: dict) -> str:
    out = []
    for cell in sorted(terms):
        fr = [{"indices": [fmt_rational(a) for a in k], "value": fmt_rational(v)}
              for k, v in sorted(terms[cell].items()) if v]
        out.append({"cell": cell, "framing": fr})
    return _dump({"format": CYCLE_FORMAT, "p": fmt_rational(p), "q": fmt_rational(q), "terms": out})
