"""Singularity rescalings, asymptotic model curves and exponent fits.

Two zooms are used to study a forming singularity:

* pole_blowup: curvature-normalized magnification about a pole.  The
  magnification factor is the pole mean curvature itself, so the rescaled
  cap always has tip curvature one and can be compared directly with the
  unit-speed bowl soliton.

* cylinder_rescale: the parabolic zoom about the neck,
  (x, y) -> (x - x_neck, y) / sqrt(T - t), under which a shrinking neck
  approaches the cylinder of radius sqrt(2).

Model curves:

* degenerate_profile: sqrt(2) + K * Hm_m(x) * (T - t)^(m/2 - 1), the
  borderline-neckpinch correction to the cylinder, with Hm_m the degree-m
  Hermite polynomial normalized to unit leading coefficient and x the
  unrescaled axial offset (x = x_tilde * sqrt(T - t)).

* generic_pinch_profile: K |x| / sqrt(log(1/|x|)), the terminal cusp
  shape of an ordinary neckpinch.

fit_power performs the log-log least-squares rate fits H ~ (T - t)^p and
refines T by a golden-section search on the fit residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import hermite as _np_hermite
from scipy.interpolate import PchipInterpolator

from .errors import FitError, InsufficientOverlapError
from .evolution import FlowTrace, neck_index, pole_mean_curvature
from .geometry import ProfileCurve
from .soliton import SolitonCurve

__all__ = [
    "RescaledCurve",
    "AsymptoteParams",
    "FitResult",
    "hermite",
    "pole_blowup",
    "cylinder_rescale",
    "degenerate_profile",
    "generic_pinch_profile",
    "fit_power",
    "compare_to_soliton",
    "mean_curvature_comparison",
    "planar_mean_curvature",
    "monotone_cap",
]

SQRT2 = float(np.sqrt(2.0))


@dataclass(frozen=True)
class RescaledCurve:
    """A profile curve after zooming about a blow-up point.

    x, y are dimensionless; ``scale`` is the magnification applied
    (curvatures of the rescaled curve are original curvatures / scale).
    """

    x: np.ndarray
    y: np.ndarray
    scale: float
    source_time: float


@dataclass(frozen=True)
class AsymptoteParams:
    """Parameters of the degenerate-neckpinch model curve."""

    K: float
    m: int
    T: float

    def __post_init__(self):
        if self.m % 2 != 0 or self.m < 2:
            raise ValueError(f"Hermite order m must be even and >= 2, got {self.m}")


@dataclass(frozen=True)
class FitResult:
    exponent: float
    prefactor: float
    residual: float              # RMS residual of the log-log fit
    window: tuple
    T_refined: Optional[float] = None


def hermite(m: int) -> np.ndarray:
    """Monomial coefficients (ascending) of the degree-m Hermite polynomial
    rescaled to unit leading coefficient, i.e. physicists' H_m / 2^m.

    All coefficients are dyadic rationals, hence exact in floats.
    """
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m}")
    basis = np.zeros(m + 1)
    basis[m] = 1.0
    return _np_hermite.herm2poly(basis) / 2.0**m


def pole_blowup(curve: ProfileCurve, pole: str = "left") -> RescaledCurve:
    """Curvature-normalized zoom about a pole.

    The magnification is eps = H(pole), so the rescaled cap has tip
    curvature 1 (up to extrapolation error).  For the right pole the
    axial sign is flipped so the cap always opens toward +x with the
    pole at the origin.
    """
    eps = pole_mean_curvature(curve, pole)
    if not np.isfinite(eps) or eps <= 0.0:
        raise ValueError(f"pole mean curvature must be positive, got {eps}")
    w = (1.875, -1.25, 0.375)  # parabola through theta = (1/2,3/2,5/2)*dtheta at 0
    if pole == "left":
        s_pole = w[0] * curve.S[0] + w[1] * curve.S[1] + w[2] * curve.S[2]
        x = eps * (curve.S - s_pole)
        y = eps * curve.R
    else:
        s_pole = w[0] * curve.S[-1] + w[1] * curve.S[-2] + w[2] * curve.S[-3]
        x = (eps * (s_pole - curve.S))[::-1].copy()
        y = (eps * curve.R)[::-1].copy()
    return RescaledCurve(x=x, y=y, scale=float(eps), source_time=curve.t)


def cylinder_rescale(curve: ProfileCurve, T: float) -> RescaledCurve:
    """Parabolic zoom about the neck: (x, y) / sqrt(T - t)."""
    if T <= curve.t:
        raise ValueError(f"need T > t, got T={T}, t={curve.t}")
    scale = 1.0 / np.sqrt(T - curve.t)
    i = neck_index(curve.R)
    x = scale * (curve.S - curve.S[i])
    y = scale * curve.R
    return RescaledCurve(x=x, y=y, scale=float(scale), source_time=curve.t)


def degenerate_profile(params: AsymptoteParams, t: float, x_tilde) -> np.ndarray:
    """Rescaled radius of the borderline neckpinch near the cylinder limit.

    y_tilde = sqrt(2) + K * Hm_m(x) * (T - t)^(m/2 - 1), evaluated at the
    unrescaled axial offset x = x_tilde * sqrt(T - t).
    """
    if params.m % 2 != 0:
        raise ValueError("Hermite order m must be even")
    if params.m < 4:
        raise ValueError("degenerate neckpinch requires m >= 4")
    if t >= params.T:
        raise ValueError(f"need t < T, got t={t}, T={params.T}")
    x_tilde = np.asarray(x_tilde, dtype=float)
    rem = params.T - t
    x = x_tilde * np.sqrt(rem)
    coeffs = hermite(params.m)
    return SQRT2 + params.K * np.polynomial.polynomial.polyval(x, coeffs) * rem ** (
        params.m / 2.0 - 1.0
    )


def generic_pinch_profile(K: float, x) -> np.ndarray:
    """Terminal cusp shape of an ordinary neckpinch: K |x| / sqrt(log 1/|x|)."""
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if np.any(ax >= 1.0):
        raise ValueError("|x| must be < 1 (log(1/|x|) must be positive)")
    with np.errstate(divide="ignore"):
        y = np.where(ax > 0.0, K * ax / np.sqrt(np.log(1.0 / np.where(ax > 0, ax, 0.5))), 0.0)
    return y


def _golden_min(f, a: float, b: float, tol: float) -> float:
    """Golden-section minimum of a unimodal f on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = f(c)
    fd = f(d)
    while (b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def _loglog_fit(ts, qs, T):
    x = np.log(T - ts)
    y = np.log(qs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), float(intercept), resid


def fit_power(trace: FlowTrace, quantity: str, T_est: float) -> FitResult:
    """Fit quantity ~ C (T - t)^p over the final decade of the trace.

    The fit window is the set of records with T_est - t within a factor
    10 of the smallest remaining time; at least 10 such records are
    required.  T is then refined by golden-section minimization of the
    fit RMS over [t_last, t_last + 4 (T_est - t_last)] and the power law
    refit at the optimum.
    """
    qs_all = trace.quantity(quantity)
    ts_all = trace.t
    if len(trace) < 2:
        raise FitError("trace too short for a rate fit")
    t_last = float(ts_all[-1])
    rem = T_est - t_last
    if rem <= 0.0:
        raise FitError(f"T_est={T_est} does not exceed the last trace time {t_last}")
    mask = (T_est - ts_all) <= 10.0 * rem
    ts = ts_all[mask]
    qs = qs_all[mask]
    if ts.shape[0] < 10:
        raise FitError(
            f"need >= 10 records in the final decade before T_est, got {ts.shape[0]}"
        )
    if np.any(~np.isfinite(qs)) or np.any(qs <= 0.0):
        raise FitError(f"quantity {quantity!r} must be positive for a log-log fit")

    T_lo = t_last + 1e-6 * rem
    T_hi = t_last + 4.0 * rem
    T_star = _golden_min(lambda T: _loglog_fit(ts, qs, T)[2], T_lo, T_hi,
                         1e-3 * (T_hi - T_lo))
    slope, intercept, resid = _loglog_fit(ts, qs, T_star)
    return FitResult(
        exponent=slope,
        prefactor=float(np.exp(intercept)),
        residual=resid,
        window=(float(ts[0]), float(ts[-1])),
        T_refined=float(T_star),
    )


# ---------------------------------------------------------------------------
# Curve comparison helpers
# ---------------------------------------------------------------------------

def monotone_cap(x: np.ndarray, y: np.ndarray):
    """Prefix of (x, y) on which the cap is a horizontal graph.

    Keeps samples from the tip up to the first maximum of y, dropping any
    non-increasing x (interpolators need strictly increasing abscissae).
    """
    k = int(np.argmax(y))
    xs = x[: k + 1]
    ys = y[: k + 1]
    keep = np.concatenate(([True], np.diff(xs) > 0.0))
    return xs[keep], ys[keep]


def compare_to_soliton(rc: RescaledCurve, sol: SolitonCurve, x_window: float,
                       n_grid: int = 256):
    """(Linf, L2) distance between a rescaled cap and a soliton profile.

    Both curves are restricted to their horizontal-graph cap region,
    resampled on a common uniform grid over [0, x_window] with monotone
    cubic interpolation, and compared pointwise.  ``sol`` should be the
    unit-speed soliton when ``rc`` comes from pole_blowup (those caps are
    normalized to tip curvature 1).
    """
    xf, yf = monotone_cap(rc.x, rc.y)
    if xf.shape[0] < 4 or xf[-1] < x_window:
        raise InsufficientOverlapError(
            f"rescaled cap covers x <= {xf[-1] if xf.size else 0.0:.3g}, "
            f"need {x_window}"
        )
    if sol.x[-1] < x_window:
        raise InsufficientOverlapError(
            f"soliton extent {sol.x[-1]:.3g} is short of the window {x_window}"
        )
    grid = np.linspace(0.0, x_window, n_grid)
    y_flow = PchipInterpolator(xf, yf)(grid)
    y_sol = PchipInterpolator(sol.x, sol.y)(grid)
    diff = np.abs(y_flow - y_sol)
    return float(diff.max()), float(np.sqrt(np.mean(diff**2)))


def _nonuniform_d1_d2(f: np.ndarray, s: np.ndarray):
    """Interior first/second derivatives of f(s), exact for quadratics."""
    hm = s[1:-1] - s[:-2]
    hp = s[2:] - s[1:-1]
    fm, f0, fp = f[:-2], f[1:-1], f[2:]
    d1 = (hm * hm * fp - hp * hp * fm + (hp * hp - hm * hm) * f0) / (
        hm * hp * (hm + hp)
    )
    d2 = 2.0 * (hm * fp + hp * fm - (hm + hp) * f0) / (hm * hp * (hm + hp))
    return d1, d2


def planar_mean_curvature(x: np.ndarray, y: np.ndarray):
    """Mean curvature of the revolved planar curve from samples alone.

    Finite differences in arclength (which stays regular through a
    vertical tangent): kappa_u = y' x'' - x' y'' at unit speed and
    kappa_phi = x' / y.  Returns (mask, H) where mask selects the
    interior samples H was computed on.
    """
    s = np.concatenate(([0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))))
    if s.shape[0] < 5:
        raise ValueError("need at least 5 samples for curvature estimates")
    xp, xpp = _nonuniform_d1_d2(x, s)
    yp, ypp = _nonuniform_d1_d2(y, s)
    mask = np.zeros(s.shape[0], dtype=bool)
    mask[1:-1] = True
    norm2 = xp * xp + yp * yp
    kappa_u = (yp * xpp - xp * ypp) / norm2**1.5
    kappa_phi = xp / (y[mask] * np.sqrt(norm2))
    return mask, kappa_u + kappa_phi


def mean_curvature_comparison(rcs, sol: SolitonCurve):
    """Mean curvature versus axial offset for rescaled caps and the soliton.

    Returns (flows, reference): ``flows`` is a list of (x, H) arrays, one
    per rescaled snapshot (cap region only, finite-difference curvature);
    ``reference`` is (x, H) of the soliton's closed form.  Plot data
    only; no pass/fail logic.
    """
    flows = []
    for rc in rcs:
        xf, yf = monotone_cap(rc.x, rc.y)
        mask, H = planar_mean_curvature(xf, yf)
        flows.append((xf[mask], H))
    return flows, (sol.x.copy(), sol.H.copy())
