#!/usr/bin/env python3
"""Desk-scale acceptance checks and regression baselines for the sieve."""

from __future__ import annotations

import argparse
import json
import math
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass

import numpy as np

from rmsieve.algebra.dgcodes import verify_dg_properties
from rmsieve.algebra.galois import field_spec
from rmsieve.engine import VERIFY_SUITE, SuiteRunner, VerifyContext, default_router
from rmsieve.sensing.chirp import accumulate_evidence, detect_at
from rmsieve.sensing.frame import FrameSpec, SparseSignal, coherence_stats, synthesize
from rmsieve.sensing.wht import fwht, naive_wht
from rmsieve.stats.noise import noise_variance_experiment
from rmsieve.stats.recovery import recovery_sweep
from rmsieve.stats.sampling import NoiseModel, TrialConfig
from rmsieve.stats.strip import strip_montecarlo

DG_GRID = [(3, 0), (3, 1), (5, 0), (5, 1), (5, 2)]


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    details: str
    latency_ms: int


def check_dg_structure() -> tuple[bool, str]:
    """Closure, injectivity, rank bound and Kerdock facts on the small grid."""
    failed = []
    for m, r in DG_GRID:
        report = verify_dg_properties(field_spec(m), r)
        if not report.passed:
            failed.append(f"DG({m},{r})")
    if failed:
        return False, f"failed: {', '.join(failed)}"
    return True, f"all of {DG_GRID} pass"


def check_verify_suite() -> tuple[bool, str]:
    ctx = VerifyContext.create(3, 1)
    runner = SuiteRunner(default_router())
    outputs = runner.run(VERIFY_SUITE, ctx)
    return runner.passed, json.dumps({k: v.message for k, v in outputs.items()})


def check_coherence() -> tuple[bool, str]:
    kerdock = coherence_stats(FrameSpec(field_spec(5), 0))
    dg = coherence_stats(FrameSpec(field_spec(5), 1))
    ok = str(kerdock.mu_squared) == "1/32" and dg.mu <= 2.0 / math.sqrt(32) + 1e-12
    details = {
        "kerdock_mu_squared": str(kerdock.mu_squared),
        "dg51_mu": dg.mu,
        "dg51_max_pair": dg.max_pair,
        "dg51_row_sums_identical": dg.row_sum_identical,
    }
    return ok, json.dumps(details)


def check_transform() -> tuple[bool, str]:
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in (8, 32, 128):
        for _ in range(100):
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            worst = max(worst, float(np.abs(fwht(v) - naive_wht(v)).max()))
            worst = max(worst, float(np.abs(fwht(fwht(v)) - v).max()))
    return worst <= 1e-12, f"max deviation {worst:.3g}"


def check_detection_paths() -> tuple[bool, str]:
    fs = FrameSpec(field_spec(5), 1)
    rng = np.random.default_rng(1)
    support = sorted(int(v) for v in rng.choice(fs.C, size=3, replace=False))
    f = synthesize(fs, SparseSignal(tuple(support), (1.0, 0.5 - 0.5j, -0.75)))
    ev = accumulate_evidence(fs, f)
    deltas = rng.choice(fs.C, size=50, replace=False)
    worst = max(abs(detect_at(fs, f, int(d)) - ev.value(int(d))) for d in deltas)
    return worst <= 1e-12, f"max |detect - batch| {worst:.3g}"


def check_noiseless_recovery() -> tuple[bool, str]:
    cfg = TrialConfig(m=7, r=1, k=1, trials=100)
    table = recovery_sweep(cfg, range(1, 9)).table
    rates = dict(zip(table["k"].tolist(), table["success_rate"].tolist()))
    first_drop = next((k for k, rate in rates.items() if rate < 1.0), None)
    ok = all(rates[k] == 1.0 for k in (1, 2, 3, 4))
    return ok, json.dumps({"success_rate": rates, "first_drop": first_drop})


def check_noise_shaping() -> tuple[bool, str]:
    fs = FrameSpec(field_spec(5), 1)
    report = noise_variance_experiment(fs, NoiseModel(1.0, 0.5), trials=3125, mode="exact")
    return report.relative_error <= 0.05, f"emp {report.emp_var:.4f} vs {report.pred_var:.4f}"


def check_error_scaling() -> tuple[bool, str]:
    grid = [NoiseModel(0.0, 0.01), NoiseModel(0.0, 0.02)]
    cfg = TrialConfig(m=7, r=1, k=3, trials=100)
    table = recovery_sweep(cfg, [3], grid).table
    low, high = table["mean_meas_err"].tolist()
    ratio = high / low if low else math.inf
    details = {"ratio": ratio, "c_hat": table["c_hat"].tolist()}
    return abs(ratio - 4.0) <= 1.0, json.dumps(details)


def check_strip() -> tuple[bool, str]:
    fs = FrameSpec(field_spec(5), 1)
    eta = coherence_stats(fs).eta_hat or 0.0
    control = strip_montecarlo(fs, TrialConfig(m=5, r=1, k=1, trials=200), [0.5], eta)
    table = strip_montecarlo(fs, TrialConfig(m=5, r=1, k=4, trials=1000), [0.5], eta)
    control_zero = control.set_index("statistic").loc[["Sp2", "Sp3"], "exceed_freq"].eq(0).all()
    baseline = dict(zip(table["statistic"], table["exceed_freq"]))
    return bool(control_zero), json.dumps({"k4_exceed_freq": baseline})


def _run_check(name: str, fn: Callable[[], tuple[bool, str]]) -> CheckResult:
    start = time.perf_counter()
    try:
        ok, details = fn()
    except Exception as exc:
        ok, details = False, f"{type(exc).__name__}: {exc}"
    latency_ms = int((time.perf_counter() - start) * 1000)
    return CheckResult(name=name, ok=ok, details=details, latency_ms=latency_ms)


def _print_results(results: list[CheckResult], as_json: bool) -> None:
    if as_json:
        print(json.dumps([asdict(r) for r in results], indent=2))
        return
    print("Acceptance Baselines")
    print("=" * 80)
    for res in results:
        status = "PASS" if res.ok else "FAIL"
        print(f"[{status}] {res.name} ({res.latency_ms} ms)")
        print(f"  {res.details}")
    print("=" * 80)
    passed = sum(1 for r in results if r.ok)
    print(f"Summary: {passed}/{len(results)} checks passed")


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        description="Run the desk-scale acceptance checks and print regression baselines."
    )
    parser.add_argument(
        "--quick",
        action="store_true",
        help="Skip the Monte Carlo sweeps and only run the exact algebraic checks.",
    )
    parser.add_argument("--json", action="store_true", help="Print results as JSON.")
    return parser.parse_args()


def main() -> int:
    args = parse_args()

    results = [
        _run_check("dg_structure", check_dg_structure),
        _run_check("verify_suite_m3_r1", check_verify_suite),
        _run_check("coherence", check_coherence),
        _run_check("transform", check_transform),
        _run_check("detection_paths", check_detection_paths),
    ]
    if not args.quick:
        results.extend(
            [
                _run_check("noiseless_recovery", check_noiseless_recovery),
                _run_check("noise_shaping", check_noise_shaping),
                _run_check("error_scaling", check_error_scaling),
                _run_check("strip", check_strip),
            ]
        )

    _print_results(results, args.json)
    return 0 if all(r.ok for r in results) else 1


if __name__ == "__main__":
    raise SystemExit(main())
