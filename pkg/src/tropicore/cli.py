"""Command-line entry point.

Exit codes: 0 success, 1 mathematical failure, 2 usage error, 3 parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .errors import ParseError, TropicoreError
from .fileformat import dumps_space, loads_cocycle, loads_cycle, read_space
from .homology import Chain, homology_basis, homology_table
from .library import BUNDLED, example
from .waves import _fmt, cap_eigenwave, deform, induced_homology_map, total_length

EXIT_OK, EXIT_MATH, EXIT_USAGE, EXIT_PARSE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _threads() -> int:
    """TROPICORE_THREADS is advisory; everything runs in one thread and output never depends on it."""
    raw = os.environ.get("TROPICORE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _read_text(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _read_cycle(X, path: str) -> Chain:
    d = loads_cycle(_read_text(path))
    for cell in d["terms"]:
        X.face(cell)
    return Chain("cell", "F", d["p"], d["q"], {c: dict(v) for c, v in d["terms"].items() if v})


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    from .tropical_space import validate
    X = read_space(args.space)
    rep = validate(X)
    if rep.valid:
        print("OK")
        return EXIT_OK
    print(str(rep))
    return EXIT_MATH


def cmd_homology(args) -> int:
    X = read_space(args.space)
    T = homology_table(X, args.system, args.method)
    print(T.render())
    return EXIT_OK


def cmd_hodge_table(args) -> int:
    X = read_space(args.space)
    T = homology_table(X, args.system, args.method)
    print(f"system {T.system}  method {T.method}")
    print(T.render_hodge())
    return EXIT_OK


def cmd_eigenwave(args) -> int:
    X = read_space(args.space)
    M = induced_homology_map(X, args.p, args.q, args.power)
    (sp, sq), (tp, tq) = M.source, M.target
    print(f"phi^{args.power}: H_{sq}(F_{sp}) -> H_{tq}(F_{tp})")
    print(M.render())
    print(f"rank: {M.rank}")
    print(f"isomorphism: {'yes' if M.isomorphism else 'no'}")
    return EXIT_OK


def cmd_pair(args) -> int:
    from .intersection import geo_from_bar, geo_from_cells, pairing
    X = read_space(args.space)
    a = _read_cycle(X, args.cycle1)
    b = _read_cycle(X, args.cycle2)
    value = pairing(X, geo_from_cells(X, a), geo_from_cells(X, b))
    print(f"intersection: {_fmt(value)}")
    if args.eigenwave is not None:
        capped = geo_from_bar(X, cap_eigenwave(X, a, args.eigenwave))
        via = pairing(X, capped, geo_from_cells(X, b))
        print(f"eigenwave pairing: {_fmt(via)}")
    return EXIT_OK


def cmd_jacobian(args) -> int:
    from .intersection import geo_from_cells, q_form
    X = read_space(args.space)
    if args.reps:
        reps = [geo_from_cells(X, _read_cycle(X, r)) for r in args.reps]
    else:
        H = homology_basis(X, "F", args.p, args.q)
        reps = [geo_from_cells(X, H.cycle_chain(i)) for i in range(H.rank)]
    partners = [geo_from_cells(X, _read_cycle(X, r)) for r in args.partners] if args.partners else None
    J = q_form(X, args.p, args.q, reps, partners)
    print(J.render())
    return EXIT_OK


def cmd_bergman(args) -> int:
    from .matroid import bergman_fan, bergman_space, codim1_smoothness_certificate, matroid_from_ref
    M = matroid_from_ref(args.matroid)
    fan = bergman_fan(M)
    print(f"ground set: {M.ground}  rank: {M.rank()}")
    print(f"fan dimension: {fan.dim}  ambient dimension: {fan.ambient_dim}")
    print("rays:")
    for F in fan.ray_list():
        print(f"  {{{','.join(map(str, sorted(F)))}}} -> ({' '.join(map(str, fan.rays[F]))})")
    print("maximal cones:")
    for c in fan.maximal_cones:
        print("  " + " < ".join("{" + ",".join(map(str, sorted(F))) + "}" for F in c))
    X = bergman_space(M)
    ridges = [f for f in X.faces if not X.faces[f].sedentarity and X.faces[f].dim == fan.dim - 1]
    ok = all(codim1_smoothness_certificate(X, f).passed for f in ridges) if fan.dim > 0 else True
    print(f"balanced: {'yes' if ok else 'no'}")
    return EXIT_OK if ok else EXIT_MATH


def cmd_konstruktor(args) -> int:
    from .konstruktor import check_unimodular_smooth, konstruktor_check
    X = read_space(args.space)
    if not args.check:
        cert = check_unimodular_smooth(X)
        print(cert.render())
        return EXIT_OK if cert.ok else EXIT_MATH
    rep = konstruktor_check(X)
    print(rep.render())
    return EXIT_OK if rep.ok else EXIT_MATH


def cmd_deform(args) -> int:
    X = read_space(args.space)
    tau = loads_cocycle(_read_text(args.cocycle))
    try:
        eps = Fraction(args.epsilon)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad epsilon {args.epsilon!r}") from None
    if eps < 0:
        print("tropicore deform: error: epsilon must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    Y = deform(X, tau, eps)
    text = dumps_space(Y)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        if Y.dim == 1:
            print(f"total length: {_fmt(total_length(Y))}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_example(args) -> int:
    if args.list:
        print("\n".join(BUNDLED))
        return EXIT_OK
    if not args.name:
        raise ParseError("example needs --name or --list")
    sys.stdout.write(dumps_space(example(args.name)))
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tropicore", description="Exact tropical homology, eigenwaves and intersections.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a space file")
    p.add_argument("space")
    p.set_defaults(func=cmd_validate)

    for name, func in (("homology", cmd_homology), ("hodge-table", cmd_hodge_table)):
        p = sub.add_parser(name, help="tropical homology ranks and torsion")
        p.add_argument("space")
        p.add_argument("--system", choices=["F", "W", "Fdual", "Wdual"], default="F")
        p.add_argument("--method", choices=["cell", "bar"], default="cell")
        p.set_defaults(func=func)

    p = sub.add_parser("eigenwave", help="matrix of the eigenwave action on homology")
    p.add_argument("space")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--power", type=int, default=1)
    p.set_defaults(func=cmd_eigenwave)

    p = sub.add_parser("pair", help="intersection number of two cellular cycles")
    p.add_argument("space")
    p.add_argument("cycle1")
    p.add_argument("cycle2")
    p.add_argument("--eigenwave", type=int, default=None, metavar="K",
                   help="also pair phi^K cap cycle1 with cycle2")
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("jacobian", help="intersection form on H_q(F_p)")
    p.add_argument("space")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("reps", nargs="*", help="cycle files spanning H_q(F_p); default: the cellular basis")
    p.add_argument("--partners", nargs="*", default=None, help="homologous copies used as second arguments")
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("bergman", help="Bergman fan of a matroid (uniform:r,n or a JSON file)")
    p.add_argument("matroid")
    p.set_defaults(func=cmd_bergman)

    p = sub.add_parser("konstruktor", help="unimodularity certificate and konstruktor identities")
    p.add_argument("space")
    p.add_argument("--check", action="store_true", help="run every identity")
    p.set_defaults(func=cmd_konstruktor)

    p = sub.add_parser("deform", help="deform chart overlaps by a cocycle")
    p.add_argument("space")
    p.add_argument("cocycle")
    p.add_argument("--epsilon", required=True)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("example", help="print a bundled example as a space file")
    p.add_argument("--name", default=None)
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _threads()
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TropicoreError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
