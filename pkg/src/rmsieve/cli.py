"""Command-line front end: ``rm-sieve <subcommand>``.

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd

from rmsieve import __version__
from rmsieve.algebra.dgcodes import format_matrix_dump
from rmsieve.algebra.galois import field_spec
from rmsieve.config import RunConfig, resolve_threads
from rmsieve.engine import (
    VERIFY_SUITE,
    StepResult,
    SuiteRunner,
    VerifyContext,
    default_router,
)
from rmsieve.errors import SieveError
from rmsieve.reports.audit import RunJournal
from rmsieve.reports.store import (
    read_config,
    read_measurement,
    write_csv,
    write_json,
    write_text,
)
from rmsieve.sensing.chirp import (
    default_threshold,
    detect_at,
    reconstruct,
    residual_bound,
)
from rmsieve.sensing.frame import FrameSpec, coherence_stats, format_dense_export
from rmsieve.stats.noise import noise_variance_experiment
from rmsieve.stats.recovery import recovery_sweep
from rmsieve.stats.strip import strip_montecarlo
from rmsieve.stats.tail import tail_noise_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2

CONFIG_HELP = "Config keys (key = value, '#' comments): " + ", ".join(RunConfig.allowed_keys())


def _frame(args: argparse.Namespace) -> FrameSpec:
    return FrameSpec(field_spec(args.m), args.r)


def _out_dir(args: argparse.Namespace, cfg: RunConfig | None = None) -> Path:
    if args.out is not None:
        return Path(args.out)
    return Path(cfg.output if cfg else "out")


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        return RunConfig()
    return read_config(args.config)


def _annotate(cfg: RunConfig, threads: int | None = None) -> None:
    context = {"m": cfg.m, "r": cfg.r, "master_seed": cfg.master_seed}
    if threads is not None:
        context["threads"] = threads
    RunJournal.annotate(**context)


def _run_context(args: argparse.Namespace) -> dict[str, int]:
    """Frame, seed and thread count known from the command line alone."""
    names = {"m": "m", "r": "r", "seed": "master_seed", "threads": "threads"}
    return {
        key: getattr(args, attr)
        for attr, key in names.items()
        if getattr(args, attr, None) is not None
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_construct(args: argparse.Namespace) -> int:
    spec = field_spec(args.m)
    fs = FrameSpec(spec, args.r)
    out = _out_dir(args)
    dump = write_text(format_matrix_dump(spec, args.r), out / f"dg_m{args.m}_r{args.r}.txt")
    print(f"{fs.describe()}: {fs.C} columns written to {dump}")
    if args.dense:
        dense = write_text(format_dense_export(fs), out / f"phi_m{args.m}_r{args.r}.txt")
        print(f"Dense matrix written to {dense}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    ctx = VerifyContext.create(args.m, args.r, seed=args.seed)
    runner = SuiteRunner(default_router())
    outputs = runner.run(VERIFY_SUITE, ctx)

    print(f"Verification of {ctx.frame.describe()} over {ctx.spec.describe()}")
    print("=" * 80)
    for name, output in outputs.items():
        print(f"[{output.result.value.upper()}] {name}")
        print(f"  {output.message}")
    print("=" * 80)
    passed = sum(1 for o in outputs.values() if o.result != StepResult.FAIL)
    print(f"Summary: {passed}/{len(outputs)} checks passed")

    if args.out is not None:
        write_json(ctx.to_dict(), Path(args.out) / f"verify_m{args.m}_r{args.r}.json")
    return EXIT_OK if runner.passed else EXIT_CHECK_FAILED


def cmd_recover(args: argparse.Namespace) -> int:
    if args.measurement is not None:
        return _recover_measurement(args)
    cfg = _load_config(args)
    threads = resolve_threads(args.threads, cfg.threads)
    _annotate(cfg, threads)
    result = recovery_sweep(cfg.trial_config(), cfg.k_values, cfg.noise_grid(), threads)
    for row in result.table.to_dict("records"):
        RunJournal.log_event(
            "cell_finished",
            k=int(row["k"]),
            sigma_d=float(row["sigma_d"]),
            sigma_m=float(row["sigma_m"]),
            success_rate=float(row["success_rate"]),
        )
    out = _out_dir(args, cfg)
    write_csv(result.table, out / "recovery.csv")
    write_json(result.to_dict(), out / "recovery.json")
    print(result.table.to_string(index=False))
    return EXIT_OK


def _recover_measurement(args: argparse.Namespace) -> int:
    fs = _frame(args)
    f = read_measurement(args.measurement, fs.N)
    threads = resolve_threads(args.threads)
    RunJournal.annotate(threads=threads)
    result = reconstruct(
        fs, f, args.k, include_zero=not args.exclude_zero, score=args.score, threads=threads
    )
    out = _out_dir(args)
    write_json(result.to_report(include_timings=args.timings), out / "reconstruction.json")
    write_csv(result.evidence.to_frame(), out / "evidence.csv")
    print(json.dumps(result.to_report(include_timings=args.timings), indent=2))
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    fs = _frame(args)
    f = read_measurement(args.measurement, fs.N)
    lam = detect_at(fs, f, args.delta, include_zero=not args.exclude_zero)

    # Without a known signal norm, ||f|| stands in for ||alpha|| (noiseless, near-isometric).
    alpha_norm = args.alpha_norm if args.alpha_norm is not None else float(np.linalg.norm(f))
    report = {
        "delta": args.delta,
        "lambda": [lam.real, lam.imag],
        "magnitude": abs(lam),
        "residual_bound": residual_bound(fs, alpha_norm),
    }
    threshold = args.threshold
    if threshold is None and args.alpha_min is not None:
        threshold = default_threshold(args.alpha_min, fs.N)
    if threshold is not None:
        report["threshold"] = threshold
        report["present"] = abs(lam) >= threshold
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_strip(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    _annotate(cfg)
    trial_cfg = cfg.trial_config()
    fs = trial_cfg.frame()
    coherence = coherence_stats(fs, seed=cfg.master_seed)
    eta = coherence.eta_hat if coherence.eta_hat is not None else 0.0
    table = strip_montecarlo(fs, trial_cfg, cfg.epsilon, eta)
    write_csv(table, _out_dir(args, cfg) / "strip.csv")
    print(table.to_string(index=False))
    return EXIT_OK


def cmd_noise(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    _annotate(cfg)
    fs = cfg.trial_config().frame()
    frames = [
        noise_variance_experiment(
            fs, noise, cfg.noise_trials, cfg.master_seed, mode=cfg.measure_mode
        ).to_frame()
        for noise in cfg.noise_grid()
    ]
    table = pd.concat(frames, ignore_index=True)
    write_csv(table, _out_dir(args, cfg) / "noise.csv")
    print(table.to_string(index=False))
    return EXIT_OK


def cmd_tail(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    _annotate(cfg)
    trial_cfg = cfg.trial_config()
    report = tail_noise_experiment(trial_cfg.frame(), trial_cfg, exponent=cfg.tail_exponent)
    write_json(report.to_dict(), _out_dir(args, cfg) / "tail.json")
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _add_frame_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int, required=True, help="Odd field degree, 3..15.")
    parser.add_argument("--r", type=int, required=True, help="DG level, 0..(m-1)/2.")


def _add_offset_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--exclude-zero",
        action="store_true",
        help="Average evidence over nonzero offsets only.",
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", "-v", action="store_true", help="Log at DEBUG level.")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Worker threads (falls back to the config, then RM_SIEVE_THREADS, then 1).",
    )
    common.add_argument("--out", default=None, help="Output directory for reports.")

    parser = argparse.ArgumentParser(
        prog="rm-sieve",
        description="Deterministic Reed-Muller sensing frames and chirp reconstruction.",
        epilog=CONFIG_HELP,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    construct = sub.add_parser(
        "construct", parents=[common], help="Dump the DG(m, r) matrices."
    )
    _add_frame_args(construct)
    construct.add_argument(
        "--dense", action="store_true", help="Also export the dense N x C matrix (size-guarded)."
    )
    construct.set_defaults(handler=cmd_construct)

    verify = sub.add_parser(
        "verify", parents=[common], help="Run the structural and coherence checks."
    )
    _add_frame_args(verify)
    verify.add_argument("--seed", type=int, default=0, help="Seed for sampled checks.")
    verify.set_defaults(handler=cmd_verify)

    recover = sub.add_parser(
        "recover",
        parents=[common],
        help="Recovery sweep from a config file, or reconstruct one measurement file.",
        epilog=CONFIG_HELP,
    )
    recover.add_argument("--config", default=None, help="Experiment config file.")
    recover.add_argument("--measurement", default=None, help="File of N 're im' lines.")
    recover.add_argument("--m", type=int, default=None)
    recover.add_argument("--r", type=int, default=None)
    recover.add_argument("--k", type=int, default=1, help="Columns to select (measurement mode).")
    recover.add_argument("--score", choices=("magnitude", "real"), default="magnitude")
    recover.add_argument(
        "--timings", action="store_true", help="Include wall-clock timings in the JSON report."
    )
    _add_offset_args(recover)
    recover.set_defaults(handler=cmd_recover)

    detect = sub.add_parser("detect", parents=[common], help="Evidence for a single column.")
    _add_frame_args(detect)
    detect.add_argument("--measurement", required=True, help="File of N 're im' lines.")
    detect.add_argument("--delta", type=int, required=True, help="Column label.")
    detect.add_argument("--threshold", type=float, default=None, help="Decision threshold.")
    detect.add_argument(
        "--alpha-min", type=float, default=None, help="Derive the threshold |a_min|^2/(2 sqrt N)."
    )
    detect.add_argument(
        "--alpha-norm", type=float, default=None, help="Signal norm for the residual bound."
    )
    _add_offset_args(detect)
    detect.set_defaults(handler=cmd_detect)

    for name, handler, text in (
        ("strip", cmd_strip, "Monte Carlo of the three restricted-isometry statistics."),
        ("noise", cmd_noise, "Noise-shaping variance experiment."),
        ("tail", cmd_tail, "Compressible-signal tail experiment."),
    ):
        command = sub.add_parser(name, parents=[common], help=text, epilog=CONFIG_HELP)
        command.add_argument("--config", default=None, help="Experiment config file.")
        command.set_defaults(handler=handler)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    if args.command == "recover" and args.measurement is not None and (
        args.m is None or args.r is None
    ):
        parser.error("recover --measurement needs --m and --r")

    RunJournal.start_run(**_run_context(args))
    RunJournal.log_event("command_started", command=args.command, argv=list(argv or sys.argv[1:]))
    try:
        code = args.handler(args)
    except (SieveError, ValueError, OSError) as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        code = EXIT_USAGE
    RunJournal.log_event("command_finished", command=args.command, exit_code=code)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
