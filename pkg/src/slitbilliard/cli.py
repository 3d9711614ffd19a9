"""Command-line entry point: ``python -m slitbilliard <verb> ...``.

Exit codes: 0 success, 2 configuration error, 3 numerical abort.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .analysis import (
    FringeError,
    IntensityProfile,
    fringe_visibility,
    pattern_symmetry_defect,
    profile_distance,
)
from .experiment import (
    load_config,
    recipe,
    run_experiment,
    run_one_slit_pair,
    validate_config,
)
from .grid import ConfigurationError, StructuralError
from .propagator import NumericalInstability, set_threads

EXIT_CONFIG, EXIT_ABORT = 2, 3


def _load(path):
    # a bare recipe name is accepted in place of a file
    if not Path(path).exists() and not path.endswith(".json"):
        return recipe(path)
    return load_config(path)


def cmd_run(args):
    cfg = _load(args.config)
    result = run_experiment(cfg, args.out, args.max_steps, args.snapshot_stride)
    print(f"{cfg.name}: {result.stop_reason} after {result.state.n} steps, "
          f"leaked {result.leaked:.4f}, {result.wall_time:.1f} s")
    return 0


def cmd_one_slit_pair(args):
    cfg = _load(args.config)
    res = run_one_slit_pair(cfg, args.out, two_slit=True if args.run_two_slit else args.two_slit,
                            max_steps=args.max_steps)
    if res.score is None:
        print("no two-slit profile to compare with; wrote the one-slit runs and their sum")
    else:
        print(f"incoherent sum score: {res.score:.4f}")
    return 0


def cmd_validate(args):
    report = validate_config(_load(args.config))
    for line in report.lines():
        print(line)
    return 0 if report.ok else EXIT_CONFIG


def cmd_analyze(args):
    profiles = [IntensityProfile.from_csv(p) for p in args.profiles]
    for path, prof in zip(args.profiles, profiles):
        sym = pattern_symmetry_defect(prof)
        try:
            vis = f"{fringe_visibility(prof):.4f}"
        except FringeError as exc:
            vis = f"n/a ({exc})"
        print(f"{path}: visibility {vis}, symmetry defect {sym.defect:.3e}, "
              f"central maximum {'yes' if sym.central_max else 'no'}")
    for i in range(1, len(profiles)):
        print(f"distance {args.profiles[0]} vs {args.profiles[i]}: "
              f"{profile_distance(profiles[0], profiles[i]):.4f}")
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="slitbilliard", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, default=None, help="stencil worker threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="run one experiment")
    pair = sub.add_parser("one-slit-pair", help="close each slit in turn")
    for p in (run, pair):
        p.add_argument("config", help="config JSON or recipe name")
        p.add_argument("--out", type=Path, default=None)
        p.add_argument("--max-steps", type=int, default=None)
    run.add_argument("--snapshot-stride", type=int, default=None)
    run.set_defaults(func=cmd_run)
    pair.add_argument("--two-slit", type=Path, default=None, help="two-slit intensity CSV")
    pair.add_argument("--run-two-slit", action="store_true", help="also run the two-slit case")
    pair.set_defaults(func=cmd_one_slit_pair)

    val = sub.add_parser("validate", help="check a config and report the symmetry verdict")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)

    ana = sub.add_parser("analyze", help="fringe statistics of intensity CSVs")
    ana.add_argument("profiles", nargs="+")
    ana.set_defaults(func=cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is not None:
        set_threads(args.threads)
    try:
        return args.func(args)
    except (ConfigurationError, StructuralError, FileNotFoundError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalInstability as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
