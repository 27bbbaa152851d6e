import argparse
import json
import logging
import sys
from typing import List, Optional

from models import __version__
from models.frames import (
    FRAME_MODES,
    estimate_frame_probability,
    estimate_lower_bound,
    lower_bound_parameters,
    scan_frames,
)
from models.generators import DEFAULT_SEED, GENERATOR_KINDS, Seed, exponential_chain, generate
from models.highway import gaps
from models.interference import ALGORITHMS, compute_profile, interference_fast
from models.monte_carlo import ExperimentConfig, fit_scaling, run_trials
from models.pilot import run_pilot
from utils.data_helpers import (
    PILOT_FIXTURES,
    export,
    export_profile,
    export_records,
    load_aggregate_csv,
    load_pilot_fixtures,
    parse_count,
    parse_grid,
    read_points_file,
    write_metadata,
    write_pilot_records,
    write_points_file,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def _budget(text: str):
    """Parse an N=T per-n trial budget"""
    n, _, trials = text.partition("=")
    if not trials:
        raise argparse.ArgumentTypeError(f"expected N=TRIALS, got {text!r}")
    return parse_count(n), int(trials)


def _count(text: str) -> int:
    try:
        return parse_count(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _grid(text: str) -> List[int]:
    try:
        return parse_grid(text)
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def cmd_gen(args) -> int:
    """Write a generated point set in the points file format"""
    seed = Seed(args.seed)
    points = generate(args.kind, args.n, seed.stream(purpose=args.kind, n=args.n), ratio=args.ratio)
    header = {"kind": args.kind, "n": args.n, "seed": args.seed}
    if args.kind == "chain":
        header["ratio"] = args.ratio
    write_points_file(points, args.out, header)
    return EXIT_OK


def cmd_interfere(args) -> int:
    """Interference profile of a points file"""
    points = read_points_file(args.input)
    if points.n < 2:
        raise ValueError("need at least 2 points")
    profile = compute_profile(points, args.algo)
    export_profile(profile, args.format, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    """Monte Carlo aggregates of Z_S across an n grid"""
    config = ExperimentConfig(
        n_grid=args.n_grid,
        trials=args.trials,
        seed=args.seed,
        generator=args.generator,
        ratio=args.ratio,
        trials_by_n=dict(args.budget or []),
        output_path=args.out,
        records_path=args.records,
    )
    logger.info("simulate: seed=%d generator=%s grid=%s", config.seed, config.generator, config.n_grid)
    rows, records = run_trials(config, threads=args.threads)
    export(rows, "csv", args.out)
    if args.out:
        write_metadata(config, f"{args.out}.meta.json")
    if args.records:
        export_records(records, args.records)
    return EXIT_OK


def cmd_scaling(args) -> int:
    """Fit mean Z_S against sqrt(ln n) from an aggregate CSV"""
    fit = fit_scaling(load_aggregate_csv(args.input))
    export(fit, "json", args.out)
    return EXIT_OK


def cmd_frames(args) -> int:
    """Empirical k-frame frequency against the 2^-(k+2)^2 bound"""
    estimate = estimate_frame_probability(args.k, args.trials, args.seed, threads=args.threads)
    report = estimate.to_dict()
    report["seed"] = args.seed
    if args.scan is not None:
        points = read_points_file(args.scan)
        report["scan"] = scan_frames(gaps(points), args.k, args.mode, estimate).to_dict()
    if args.n is not None:
        report["lower_bound"] = lower_bound_parameters(args.n, args.c).to_dict()
        if args.lower_bound_trials:
            observed = estimate_lower_bound(args.n, args.c, args.lower_bound_trials, args.seed)
            report["lower_bound"]["estimate"] = observed.to_dict()
    json.dump(report, sys.stdout)
    sys.stdout.write("\n")
    return EXIT_OK


def cmd_pilot(args) -> int:
    """Run the pilot configurations and record their observed statistics"""
    fixtures = load_pilot_fixtures(args.fixtures)
    write_pilot_records(run_pilot(fixtures, threads=args.threads), args.out)
    return EXIT_OK


def cmd_worstcase(args) -> int:
    """Check the Omega(n) interference of the exponential node chain"""
    if args.n < 3:
        raise ValueError("worstcase needs N >= 3")
    profile = interference_fast(exponential_chain(args.n, args.ratio))
    leftmost = int(profile.counts[0])
    expected = max(args.n - 2, 2)
    passed = leftmost == args.n - 2 and profile.max == expected
    print(f"n={args.n} z_max={profile.max} leftmost={leftmost} expected={expected} "
          f"{'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="highway-interference",
        description="Interference of randomly placed sensors in the highway model",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser("gen", help="Generate a points file")
    gen.add_argument("--kind", choices=GENERATOR_KINDS, default="uniform")
    gen.add_argument("--n", type=_count, required=True)
    gen.add_argument("--seed", type=int, default=DEFAULT_SEED)
    gen.add_argument("--ratio", type=float, default=0.5)
    gen.add_argument("--out", default=None, help="Output file (stdout by default)")
    gen.set_defaults(handler=cmd_gen)

    interfere = commands.add_parser("interfere", help="Interference profile of a points file")
    interfere.add_argument("--in", dest="input", required=True)
    interfere.add_argument("--algo", choices=ALGORITHMS, default="fast")
    interfere.add_argument("--format", choices=("csv", "json"), default="csv")
    interfere.add_argument("--out", default=None)
    interfere.set_defaults(handler=cmd_interfere)

    simulate = commands.add_parser("simulate", help="Monte Carlo aggregates of Z_S")
    simulate.add_argument("--n-grid", type=_grid, required=True, help="Comma list, e.g. 2^10,2^12")
    simulate.add_argument("--trials", type=int, default=100)
    simulate.add_argument("--seed", type=int, default=DEFAULT_SEED)
    simulate.add_argument("--generator", choices=GENERATOR_KINDS, default="uniform")
    simulate.add_argument("--ratio", type=float, default=0.5)
    simulate.add_argument("--trials-for", dest="budget", type=_budget, action="append",
                          help="Per-n trial budget N=TRIALS (repeatable)")
    simulate.add_argument("--threads", type=int, default=1)
    simulate.add_argument("--out", default=None)
    simulate.add_argument("--records", default=None, help="Also write per-trial records")
    simulate.set_defaults(handler=cmd_simulate)

    scaling = commands.add_parser("scaling", help="Fit the sqrt(ln n) scaling law")
    scaling.add_argument("--in", dest="input", required=True)
    scaling.add_argument("--out", default=None)
    scaling.set_defaults(handler=cmd_scaling)

    frames = commands.add_parser("frames", help="Estimate k-frame probability")
    frames.add_argument("--k", type=int, required=True)
    frames.add_argument("--trials", type=_count, default=10 ** 6)
    frames.add_argument("--seed", type=int, default=DEFAULT_SEED)
    frames.add_argument("--threads", type=int, default=1)
    frames.add_argument("--n", type=_count, default=None, help="Also report lower-bound parameters")
    frames.add_argument("--c", type=float, default=1.0)
    frames.add_argument("--lower-bound-trials", type=_count, default=0,
                        help="Also sample n-sensor sequences and compare with the guaranteed fraction")
    frames.add_argument("--scan", default=None, help="Points file whose gaps are scanned for k-frames")
    frames.add_argument("--mode", choices=FRAME_MODES, default="sliding")
    frames.set_defaults(handler=cmd_frames)

    pilot = commands.add_parser("pilot", help="Record observed statistics of the pilot configurations")
    pilot.add_argument("--fixtures", default=str(PILOT_FIXTURES))
    pilot.add_argument("--threads", type=int, default=1)
    pilot.add_argument("--out", default=None, help="Output file, e.g. data/pilot_records.json (stdout by default)")
    pilot.set_defaults(handler=cmd_pilot)

    worstcase = commands.add_parser("worstcase", help="Exponential node chain check")
    worstcase.add_argument("--n", type=_count, required=True)
    worstcase.add_argument("--ratio", type=float, default=0.5)
    worstcase.set_defaults(handler=cmd_worstcase)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as err:
        logger.debug("Unexpected failure", exc_info=True)
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
