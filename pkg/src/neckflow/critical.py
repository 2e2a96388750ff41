"""Locate and characterize the critical shape parameter.

Dumbbells with a loose waist (small lambda) turn convex and shrink to a
round point; tightly corseted ones (lambda near 1) pinch at the center.
``classify`` runs one flow and reports which side a given lambda falls
on; ``bisect_critical`` brackets the transition; ``critical_exponent``
fits the divergence of the maximal pole curvature on the supercritical
branch, H_pole ~ L0 * (lambda - lambda_c)^(-n).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BracketError, FitError, MonotonicityError
from .evolution import (
    CENTRAL_NECKPINCH,
    NUMERICAL_FAILURE,
    SHRINKS_ROUND,
    StepControl,
    evolve,
)
from .geometry import FLOAT_FMT, CassiniShape

__all__ = [
    "ClassifiedRun",
    "CriticalEstimate",
    "classify",
    "bisect_critical",
    "sweep",
    "critical_exponent",
    "sweep_csv_text",
    "search_json_text",
]


@dataclass(frozen=True)
class ClassifiedRun:
    lam: float
    outcome: str
    H_pole_max: float
    T_est: float
    error: str = ""


@dataclass(frozen=True)
class CriticalEstimate:
    lambda_lo: float
    lambda_hi: float
    iterations: int
    n_grid: int
    runs: tuple = ()


def classify(lam: float, n: int, control: StepControl = StepControl(),
             b: float = 1.0) -> ClassifiedRun:
    """Evolve the lambda dumbbell and report the outcome.

    ShrinksRound marks the subcritical side, CentralNeckpinch the
    supercritical side; CurvatureBlowup (neither threshold met cleanly)
    is reported as-is and treated as a critical candidate.
    """
    shape = CassiniShape.from_lambda(lam, b)
    trace, report, _, _ = evolve(shape, n, control)
    h_pole_max = float(np.max(trace.H_pole)) if len(trace) else float("nan")
    return ClassifiedRun(lam=lam, outcome=report.outcome,
                         H_pole_max=h_pole_max, T_est=report.T_est)


def _side(run: ClassifiedRun) -> Optional[str]:
    if run.outcome == SHRINKS_ROUND:
        return "sub"
    if run.outcome == CENTRAL_NECKPINCH:
        return "super"
    return None


def bisect_critical(lo: float, hi: float, tol_lambda: float, n: int,
                    control: StepControl = StepControl(),
                    b: float = 1.0) -> CriticalEstimate:
    """Bracket the critical shape parameter by bisection.

    Requires classify(lo) subcritical and classify(hi) supercritical.
    Classification is assumed monotone in lambda; a midpoint that fails
    to classify cleanly (critical candidate) is resolved by probing
    mid +- tol_lambda, and only if both probes agree is the bracket
    moved past it.
    """
    if not (lo < hi):
        raise BracketError(f"need lo < hi, got ({lo}, {hi})")
    if tol_lambda < 1e-5:
        raise ValueError(f"tol_lambda must be >= 1e-5, got {tol_lambda}")
    runs = []

    def run_one(lam):
        r = classify(lam, n, control, b)
        runs.append(r)
        return r

    r_lo = run_one(lo)
    r_hi = run_one(hi)
    if _side(r_lo) != "sub" or _side(r_hi) != "super":
        raise BracketError(
            f"endpoints do not bracket the transition: "
            f"{lo} -> {r_lo.outcome}, {hi} -> {r_hi.outcome}"
        )

    iterations = 0
    while hi - lo > tol_lambda:
        mid = 0.5 * (lo + hi)
        r_mid = run_one(mid)
        iterations += 1
        side = _side(r_mid)
        if side == "sub":
            lo = mid
        elif side == "super":
            hi = mid
        else:
            # critical candidate: probe both neighbors within tol
            r_m = run_one(max(mid - tol_lambda, lo))
            r_p = run_one(min(mid + tol_lambda, hi))
            s_m, s_p = _side(r_m), _side(r_p)
            if s_m == "sub" and s_p == "super":
                lo, hi = r_m.lam, r_p.lam
                break
            if s_m == "sub" and s_p == "sub":
                lo = r_p.lam
            elif s_m == "super" and s_p == "super":
                hi = r_m.lam
            else:
                raise MonotonicityError(
                    f"classification not monotone around lambda={mid}",
                    lambdas=(r_m.lam, mid, r_p.lam),
                )
    return CriticalEstimate(lambda_lo=lo, lambda_hi=hi, iterations=iterations,
                            n_grid=n, runs=tuple(runs))


def sweep(lambdas, n: int, control: StepControl = StepControl(),
          b: float = 1.0, jobs: int = 1):
    """Classify each lambda independently; order-preserving output.

    Per-run failures are captured in the returned ClassifiedRun rather
    than aborting the sweep.  jobs > 1 fans runs out over a process pool.
    """
    lambdas = list(lambdas)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_classify_guarded,
                                 [(lam, n, control, b) for lam in lambdas]))
    return [_classify_guarded((lam, n, control, b)) for lam in lambdas]


def _classify_guarded(args) -> ClassifiedRun:
    lam, n, control, b = args
    try:
        return classify(lam, n, control, b)
    except Exception as exc:  # noqa: BLE001 - per-run errors are data here
        return ClassifiedRun(lam=lam, outcome=NUMERICAL_FAILURE,
                             H_pole_max=float("nan"), T_est=float("nan"),
                             error=str(exc))


def critical_exponent(runs, lambda_c: float):
    """Fit H_pole_max ~ L0 (lambda - lambda_c)^(-n) on the supercritical branch.

    Uses only CentralNeckpinch runs with lambda > lambda_c; needs at
    least 5.  Returns a FitResult with the exponent sign-flipped to
    positive.
    """
    from .analysis import FitResult

    sel = [r for r in runs
           if r.outcome == CENTRAL_NECKPINCH and r.lam > lambda_c
           and np.isfinite(r.H_pole_max) and r.H_pole_max > 0.0]
    if len(sel) < 5:
        raise FitError(f"need >= 5 supercritical runs above lambda_c, got {len(sel)}")
    x = np.log(np.array([r.lam - lambda_c for r in sel]))
    y = np.log(np.array([r.H_pole_max for r in sel]))
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    dl = [r.lam - lambda_c for r in sel]
    return FitResult(exponent=float(-slope), prefactor=float(np.exp(intercept)),
                     residual=resid, window=(float(min(dl)), float(max(dl))))


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def sweep_csv_text(runs) -> str:
    lines = ["lambda,outcome,H_pole_max,T_est"]
    for r in runs:
        lines.append(",".join([
            FLOAT_FMT % r.lam, r.outcome,
            FLOAT_FMT % r.H_pole_max, FLOAT_FMT % r.T_est,
        ]))
    return "\n".join(lines) + "\n"


def search_json_text(est: CriticalEstimate) -> str:
    payload = {
        "lambda_lo": est.lambda_lo,
        "lambda_hi": est.lambda_hi,
        "iterations": est.iterations,
        "n_grid": est.n_grid,
        "runs": [
            {"lambda": r.lam, "outcome": r.outcome,
             "H_pole_max": r.H_pole_max, "T_est": r.T_est}
            for r in est.runs
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
