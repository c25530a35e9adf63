"""Command-line entry point ``unicrit``.

Every option can also be set through an environment variable named
``UNICRIT_<OPTION>`` (upper case, dashes as underscores), e.g.
``UNICRIT_GRID=512x512``. Flags given on the command line win.

Exit codes: 0 success, 2 solver or cap failure, 3 negative margin under
``--strict``.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import override, settings
from .dynamics import GreenField
from .errors import UnicritError
from .sphere import SphereGrid

log = logging.getLogger("unicrit")

ENV_PREFIX = "UNICRIT_"
EXIT_SOLVER = 2
EXIT_NEGATIVE = 3


def _periods(text: str, start: int = 1) -> list[int]:
    """``"6"`` -> ``start..6``; ``"2,3,4,6"`` -> that list."""
    if "," in text:
        return [int(x) for x in text.split(",") if x]
    return list(range(start, int(text) + 1))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _common(p: argparse.ArgumentParser, n_help: str, n_default: str | None = None):
    p.add_argument("-d", type=int, default=2, help="degree of z^d + lam (default 2)")
    p.add_argument("-n", default=n_default, required=n_default is None, help=n_help)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--root-cap", type=int, default=None,
                   help="raise the Aberth degree cap for this run")


def _experiment(p: argparse.ArgumentParser):
    p.add_argument("--grid", default="1024x1024", help="sphere grid NxM")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--safety", type=float, default=1.5,
                   help="factor applied to the sampled C_Bf lower estimate")
    p.add_argument("--samples", type=int, default=1000, help="boundary samples for C_Bf")
    p.add_argument("--sphere-nodes", type=int, default=4096, help="sphere nodes for C_Bf")
    p.add_argument("--phi", default="", help="comma-separated test-function names")
    p.add_argument("--strict", action="store_true", help="exit 3 on a negative margin")
    p.add_argument("--no-timing", action="store_true",
                   help="write runtime_ms as 0 so output is bit-reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="unicrit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("centers", help="roots of F_n with residuals")
    _common(p, "period n")

    p = sub.add_parser("theorem1", help="discrepancy rows for F_n^* delta_0")
    _common(p, "largest n, or a comma list of periods")
    _experiment(p)
    p.add_argument("--no-l1", action="store_true", help="omit the L1 rows")

    p = sub.add_parser("theorem2", help="discrepancy rows for Per*(n, 0) and its averages")
    _common(p, "largest n, or a comma list of periods")
    _experiment(p)
    p.add_argument("--r", default="0.5,1", help="comma-separated radii in (0, 1]")

    p = sub.add_parser("constants", help="C_Bf, C_0, C_0* and the t_n tables")
    _common(p, "largest n for the t_n tables", "10")
    _experiment(p)

    p = sub.add_parser("greenfield", help="render a Green function on the sphere grid")
    p.add_argument("-d", type=int, default=2)
    p.add_argument("--grid", default="1024x1024")
    p.add_argument("--kind", choices=list(GreenField.KINDS), default="g_param")
    p.add_argument("--lam", type=complex, default=None, help="parameter for kind g_dyn")
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--format", choices=["pgm", "csv"], default="pgm")
    p.add_argument("--out", default="greenfield.pgm")
    return parser


def _apply_env(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Turn ``UNICRIT_*`` variables into defaults of the chosen subcommand."""
    subs = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    for sp in subs:
        for sub in sp.choices.values():
            for action in sub._actions:
                if not action.option_strings or action.dest == "help":
                    continue
                key = ENV_PREFIX + action.dest.upper()
                if key not in os.environ:
                    continue
                raw = os.environ[key]
                if isinstance(action, argparse._StoreTrueAction):
                    action.default = raw.lower() in ("1", "true", "yes", "on")
                else:
                    action.default = action.type(raw) if action.type else raw
                    action.required = False


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_provenance(out: str | None, prov: dict) -> None:
    if out:
        Path(out + ".provenance.json").write_text(json.dumps(prov, indent=2, default=str))


def cmd_centers(args) -> int:
    from . import reports

    n = int(args.n)
    roots = reports.centers(args.d, n)
    text = roots.to_json() + "\n" if args.format == "json" else roots.to_csv()
    _emit(text, args.out)
    sep = roots.min_separation() if roots.count > 1 else float("inf")
    print(f"count={roots.count} min_separation={sep:.3e} "
          f"max_residual={float(roots.residuals.max()):.3e}", file=sys.stderr)
    return 0


def _constants(args, grid):
    from . import reports

    return reports.compute_constants(args.d, grid, args.seed, args.safety,
                                     args.samples, args.sphere_nodes)


def _report(args, rows, const, command) -> int:
    from . import reports

    prov = reports.provenance(command, const, grid=args.grid, seed=args.seed,
                              safety=args.safety, timing=not args.no_timing)
    if args.format == "json":
        _emit(reports.rows_to_json(rows, prov) + "\n", args.out)
    else:
        _emit(reports.rows_to_csv(rows), args.out)
    _write_provenance(args.out, prov)
    bad = reports.negative_rows(rows)
    for r in bad:
        print(f"NEGATIVE MARGIN d={r.d} n={r.n} phi={r.phi} margin={r.margin:.6g}",
              file=sys.stderr)
    return EXIT_NEGATIVE if bad and args.strict else 0


def cmd_theorem1(args) -> int:
    from . import reports

    grid = SphereGrid.parse(args.grid)
    const = _constants(args, grid)
    phis = reports.select_test_functions([s for s in args.phi.split(",") if s])
    rows = reports.theorem1(args.d, _periods(args.n), grid, const, phis,
                            l1=not args.no_l1, timing=not args.no_timing)
    return _report(args, rows, const, "theorem1")


def cmd_theorem2(args) -> int:
    from . import reports

    grid = SphereGrid.parse(args.grid)
    const = _constants(args, grid)
    phis = reports.select_test_functions([s for s in args.phi.split(",") if s])
    rows = reports.theorem2(args.d, _periods(args.n, start=2), _floats(args.r), grid,
                            const, phis, timing=not args.no_timing)
    return _report(args, rows, const, "theorem2")


def cmd_constants(args) -> int:
    from . import reports

    grid = SphereGrid.parse(args.grid)
    const = _constants(args, grid)
    table = reports.constants_table(const, int(args.n))
    table["C_Bf_lower"] = table.pop("c_bf_lower")
    table["safety_factor"] = table.pop("safety")
    _emit(json.dumps(table, indent=2) + "\n", args.out)
    return 0


def cmd_greenfield(args) -> int:
    grid = SphereGrid.parse(args.grid)
    field = GreenField.compute(args.kind, args.d, grid, args.lam, args.n_max)
    if args.format == "csv":
        field.to_csv(args.out)
    else:
        field.to_pgm(args.out)
    print(f"kind={args.kind} sup_abs={field.meta['sup_abs']:.6g} -> {args.out}",
          file=sys.stderr)
    return 0


COMMANDS = {"centers": cmd_centers, "theorem1": cmd_theorem1, "theorem2": cmd_theorem2,
            "constants": cmd_constants, "greenfield": cmd_greenfield}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    _apply_env(parser, argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cap = getattr(args, "root_cap", None)
    try:
        with override(root_cap=cap or settings.root_cap):
            return COMMANDS[args.command](args)
    except UnicritError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
