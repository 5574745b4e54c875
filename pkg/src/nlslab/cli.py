"""``nlslab`` command line.

Exit codes: 0 success, 2 parameter or domain error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .criteria import DataStats, classify
from .diagnostics import decay_fit
from .errors import DomainError, ParameterError, SolverError
from .ground_state import ground_state, shoot_ground_state
from .lab import ConfigError, load_config, run, sweep
from .radial import ModelParams, make_grid, to_csv

EXIT_OK, EXIT_PARAM, EXIT_SOLVER = 0, 2, 3


def _emit(obj) -> None:
    # json renders floats with repr, i.e. 17 significant digits
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _overrides(pairs: Sequence[str]) -> dict:
    out = {}
    for item in pairs or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _cmd_simulate(args, frame: Optional[str] = None) -> int:
    overrides = _overrides(args.set)
    if frame is not None:
        overrides["run.frame"] = frame
    config = load_config(args.config, overrides)
    record = run(config, args.out)
    _emit(record.to_dict())
    return EXIT_OK


def _cmd_lens(args) -> int:
    return _cmd_simulate(args, frame="lens")


def _cmd_ground_state(args) -> int:
    if args.R is None and args.M is None:
        res = ground_state(args.N) if args.tol == 1e-12 else shoot_ground_state(args.N, args.tol)
    else:
        grid = make_grid(args.R or 40.0, args.M or 8191, args.N)
        res = shoot_ground_state(args.N, args.tol, grid)
    if args.profile:
        Path(args.profile).write_text(to_csv(res.W))
    _emit(res.to_dict())
    return EXIT_OK


def _cmd_classify(args) -> int:
    params = ModelParams(args.N, args.lambda1, args.lambda2, args.p1, args.p2)
    stats = None if args.mass is None else DataStats(args.mass, args.energy, args.sigma)
    CN = None
    if params.lambda1 > 0 and params.lambda2 < 0:
        CN = ground_state(params.N).CN
    verdict = classify(params, stats, CN)
    _emit({"params": params.to_dict(), **verdict.to_dict()})
    return EXIT_OK


def _read_series(path: Path, column: str) -> tuple[np.ndarray, np.ndarray]:
    with path.open() as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ParameterError(f"{path} holds no rows")
    tkey = "t" if "t" in rows[0] else "s_or_t"
    if column not in rows[0]:
        raise ParameterError(f"{path} has no column {column!r}; columns are {list(rows[0])}")
    t = np.array([float(r[tkey]) for r in rows])
    y = np.array([float(r[column]) for r in rows])
    return t, y


def _cmd_decay_fit(args) -> int:
    if args.csv:
        t, y = _read_series(Path(args.csv), args.column or f"L{args.r:g}")
        window = tuple(args.window) if args.window else None
        fit = decay_fit(t, y, args.r, args.N, window)
        _emit({"r": args.r, "N": args.N, "slope": fit.slope, "theory": fit.theory,
               "relative_error": fit.relative_error, "window": list(fit.window)})
        return EXIT_OK
    overrides = _overrides(args.set)
    config = load_config(args.config, overrides)
    if "decay" not in config.monitors:
        config = config.replace(monitors=tuple(config.monitors) + ("decay",))
    record = run(config, args.out)
    frame = "lens" if "lens" in record.monitors else "physical"
    _emit({"run_id": record.run_id, "frame": frame, "decay": record.monitors[frame]["decay"]})
    return EXIT_OK


def _cmd_extract(args) -> int:
    overrides = _overrides(args.set)
    overrides["run.frame"] = "lens"
    if args.eps:
        overrides["extract.eps"] = ", ".join(repr(e) for e in args.eps)
    config = load_config(args.config, overrides)
    if "extract" not in config.monitors:
        config = config.replace(monitors=tuple(config.monitors) + ("extract",))
    record = run(config, args.out)
    _emit({"run_id": record.run_id, "directory": str(record.directory), **record.extraction})
    return EXIT_OK


def _parse_axis(text: str) -> tuple[str, list]:
    if "=" not in text:
        raise ConfigError(f"--axis expects key=v1,v2,..., got {text!r}")
    key, values = text.split("=", 1)
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not items:
        raise ConfigError(f"--axis {key} has no values")
    return key.strip(), items


def _cmd_sweep(args) -> int:
    config = load_config(args.config, _overrides(args.set))
    axes = dict(_parse_axis(a) for a in args.axis)
    report = sweep(config, axes, args.out, jobs=args.jobs)
    _emit({"summary": str(report.path), "points": len(report.rows),
           "failures": report.failures,
           "rows": report.rows})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlslab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_args(p, with_config=True):
        if with_config:
            p.add_argument("config", help="key=value or JSON configuration file")
        p.add_argument("--out", default="runs", help="root directory for run directories")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a configuration entry (repeatable)")

    p = sub.add_parser("simulate", help="run a configuration as written")
    run_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("lens", help="run a configuration in the lens frame")
    run_args(p)
    p.set_defaults(func=_cmd_lens)

    p = sub.add_parser("ground-state", help="ground state and sharp GN constant")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--R", type=float)
    p.add_argument("--M", type=int)
    p.add_argument("--profile", help="write the profile W(r) as CSV")
    p.set_defaults(func=_cmd_ground_state)

    p = sub.add_parser("classify", help="regime verdict for a parameter tuple")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--lambda1", type=float, required=True)
    p.add_argument("--lambda2", type=float, default=0.0)
    p.add_argument("--p1", type=float, required=True)
    p.add_argument("--p2", type=float)
    p.add_argument("--mass", type=float, help="||phi||_2, needed when lambda1 > 0 > lambda2")
    p.add_argument("--energy", type=float)
    p.add_argument("--sigma", type=float)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("decay-fit", help="fit the L^r decay exponent")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--csv", help="series CSV with a t (or s_or_t) column")
    src.add_argument("--config", help="run this configuration with the decay monitor")
    p.add_argument("--r", type=float, default=4.0)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--column", help="norm column (default L<r>)")
    p.add_argument("--window", type=float, nargs=2, metavar=("T0", "T1"))
    run_args(p, with_config=False)
    p.set_defaults(func=_cmd_decay_fit)

    p = sub.add_parser("extract", help="scattering-state extraction report")
    run_args(p)
    p.add_argument("--eps", type=float, nargs="+", help="distances 1 - s of the lens stops")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("sweep", help="run a parameter lattice")
    run_args(p)
    p.add_argument("--axis", action="append", required=True, metavar="KEY=V1,V2,...",
                   help="lattice axis over a configuration key (repeatable)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=_cmd_sweep)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ParameterError, DomainError) as exc:
        print(f"nlslab: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except SolverError as exc:
        print(f"nlslab: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (OSError, ValueError) as exc:
        print(f"nlslab: error: {exc}", file=sys.stderr)
        return EXIT_PARAM


if __name__ == "__main__":
    sys.exit(main())
