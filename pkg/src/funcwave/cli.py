"""Command line: ``funcwave {list-profiles,solve,field,verify}``.

Exit status is 0 on success, 1 when a verification fails and 2 for usage or
configuration errors.  Results go to stdout (or ``--out``) as CSV or JSON;
diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .abel import closed_form_abel
from .errors import FuncWaveError, UnknownKind
from .geometry import ProfileKind, _BUILDERS
from .recipes import build_case, bundled_names, load_config
from .verify import run_suite
from .wavefield import Rect, extend_field, sample_grid

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2

# parameters that make each catalog kind constructible for the listing
_EXAMPLE_PARAMS = {
    ProfileKind.WEDGE: {"tau": 0.5},
    ProfileKind.ISOSCELES_TRIANGLE: {"tau": 0.35},
    ProfileKind.HYPERBOLIC_LENS: {"c": 2.0},
    ProfileKind.HYPERBOLIC_HUMP: {"tau": 0.5},
    ProfileKind.DAI_HYPERBOLA: {"r": 1.0},
}


class UsageError(Exception):
    pass


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _window(args, cfg) -> Rect:
    if args.window:
        return Rect.parse(args.window)
    if "window" in cfg:
        return Rect.of(cfg["window"])
    raise UsageError("no --window given and the config has none")


def cmd_list_profiles(args) -> int:
    rows = []
    for kind in ProfileKind:
        if kind is ProfileKind.CUSTOM:
            rows.append((kind.value, "samples", "no"))
            continue
        _, allowed = _BUILDERS[kind]
        try:
            closed_form_abel(kind, _EXAMPLE_PARAMS.get(kind))
            has = "yes"
        except (UnknownKind, FuncWaveError):
            has = "no"
        rows.append((kind.value, " ".join(sorted(allowed)), has))
    if args.format == "json":
        text = json.dumps({
            "profiles": [{"kind": k, "params": p.split(), "closed_form_abel": h == "yes"}
                         for k, p, h in rows],
            "configs": bundled_names("configs"),
            "suites": bundled_names("suites"),
        }, indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "params", "closed_form_abel"])
        w.writerows(rows)
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def _need_config(args) -> dict:
    if not args.config:
        raise UsageError("--config is required")
    return load_config(args.config)


def cmd_solve(args) -> int:
    """Tabulate the surface profile ``f`` of a config on ``nx`` points."""
    cfg = _need_config(args)
    built = build_case(cfg)
    w = _window(args, cfg)
    xs = np.linspace(w.x_lo, w.x_hi, args.nx + 2)[1:-1]
    dom = built.wave.domain
    xs = xs[dom.contains(xs)]
    fs = np.asarray(built.wave(xs), dtype=float)
    if args.format == "json":
        text = json.dumps({
            "provenance": built.wave.provenance,
            "label": built.wave.label,
            "flux": built.flux,
            "nu": built.nu,
            "x": xs.tolist(),
            "f": fs.tolist(),
        }) + "\n"
    else:
        buf = io.StringIO()
        buf.write("x,f\n")
        for x, f in zip(xs, fs):
            buf.write(f"{x:.17g},{f:.17g}\n")
        text = buf.getvalue()
    _emit(text, args.out)
    return EXIT_OK


def cmd_field(args) -> int:
    cfg = _need_config(args)
    built = build_case(cfg)
    if built.profile is None:
        raise UsageError("field sampling needs a profile in the config")
    nx = args.nx if args.nx is not None else cfg.get("nx", 200)
    nz = args.nz if args.nz is not None else cfg.get("nz", 100)
    grid = sample_grid(extend_field(built.wave, built.nu), built.profile, _window(args, cfg), nx, nz)
    _emit(grid.dumps(args.format) + ("\n" if args.format == "json" else ""), args.out)
    return EXIT_OK


def _override_seeds(cfg: dict, seed: int) -> dict:
    cases = []
    for case in cfg.get("cases", []):
        case = dict(case)
        case["sweep"] = {**(case.get("sweep") or {}), "seed": seed}
        cases.append(case)
    return {**cfg, "cases": cases}


def cmd_verify(args) -> int:
    if args.suite and args.config:
        raise UsageError("give either --suite or --config, not both")
    if args.config:
        cfg = load_config(args.config)
        if "cases" not in cfg:
            cfg = {"cases": [{**cfg, "name": Path(args.config).stem, "check": "fet"}]}
    else:
        cfg = load_config(args.suite or "default", "suites")
    if args.seed is not None:
        cfg = _override_seeds(cfg, args.seed)
    report = run_suite(cfg)
    _emit(json.dumps(report.to_json(), indent=1) + "\n", args.out)
    for e in report.entries:
        if not e.passed:
            msg = e.error or f"max residual {e.report.max_abs:.3g} >= {e.tolerance:.3g}"
            print(f"FAIL {e.name}: {msg}", file=sys.stderr)
    return EXIT_OK if report.all_passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config JSON path or bundled config name")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(
        prog="funcwave", description="Standing internal waves from functional equations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("list-profiles", parents=[common], help="catalog of bottom profiles")
    p.set_defaults(func=cmd_list_profiles)

    p = sub.add_parser("solve", parents=[common], help="tabulate the surface profile f")
    p.add_argument("--nx", type=int, default=200)
    p.add_argument("--window", help="x0,x1,z0,z1 (write --window=-1,1,-1,0 when x0 is negative)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("field", parents=[common], help="sample the stream function on a grid")
    p.add_argument("--nx", type=int, default=None, help="default 200")
    p.add_argument("--nz", type=int, default=None, help="default 100")
    p.add_argument("--window", help="x0,x1,z0,z1 (write --window=-1,1,-1,0 when x0 is negative)")
    p.set_defaults(func=cmd_field)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("--suite", help="suite JSON path or bundled suite name (default: default)")
    p.add_argument("--seed", type=int, help="seed for every random sweep")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (UsageError, FuncWaveError, OSError) as e:
        print(f"funcwave: error: {e}", file=sys.stderr)
        return EXIT_USAGE


run_cli = main

if __name__ == "__main__":
    sys.exit(main())
