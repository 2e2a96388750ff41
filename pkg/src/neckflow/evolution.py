"""Mean curvature flow of a profile curve and termination classification.

The surface evolves by moving every generator-curve node with the normal
velocity -H, written out for the coordinates (S, R) as

    dR/dt = S'(S'R'' - R'S'') / g^2 - S'^2 / (R g)
    dS/dt = R'(R'S'' - S'R'') / g^2 + R' S' / (R g),      g = S'^2 + R'^2,

discretized with centered differences on the ghosted cell-centered grid
(see the geometry module) and integrated with forward Euler under the
adaptive step

    dt = safety * min( min_i g_i * dtheta^2, 1 / max_i |A|^2_i, (min_i R_i)^2 ).

The first term is the parabolic CFL limit, the second resolves the
fastest curvature time scale, and the third shrinks steps as a neck
collapses (kappa_phi ~ 1/R dominates the stiffness there).

The hot loop is JIT-compiled; a run only returns to Python to flush
diagnostic records, store snapshots and classify termination.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from . import geometry
from .errors import NumericalFailureError, StepCollapseError
from .geometry import CassiniShape, ProfileCurve, cassini_profile, curvatures

__all__ = [
    "StepControl",
    "FlowTrace",
    "TerminationReport",
    "step",
    "evolve",
    "pole_mean_curvature",
    "flow_velocity",
    "neck_index",
    "SHRINKS_ROUND",
    "CENTRAL_NECKPINCH",
    "CURVATURE_BLOWUP",
    "STEP_LIMIT",
    "NUMERICAL_FAILURE",
    "write_trace_csv",
    "load_trace_csv",
    "snapshot_filename",
]

SHRINKS_ROUND = "ShrinksRound"
CENTRAL_NECKPINCH = "CentralNeckpinch"
CURVATURE_BLOWUP = "CurvatureBlowup"
STEP_LIMIT = "StepLimit"
NUMERICAL_FAILURE = "NumericalFailure"

# Kernel stop reasons.
_R_BLOCK = 0      # block budget or record buffer exhausted; not a termination
_R_EXTINCT = 1
_R_PINCH = 2
_R_A2CAP = 3
_R_DTMIN = 4
_R_NONFINITE = 5

_SNAP_CAP = 512   # at snapshot_factor=1.2 a run stores ~50 snapshots

TRACE_HEADER = "t,H_max,H_pole,R_min,R_max,convex,dt,H_center"


@dataclass(frozen=True)
class StepControl:
    """Adaptive-step and termination policy.

    Threshold fields left at None are resolved against the length scale b
    of the initial shape: eps_pinch = 1e-3 b, eps_extinct = 1e-2 b,
    a2_cap = 1e8 / b^2, dt_min = 1e-16 b^2.
    """

    safety: float = 0.1
    dt_min: Optional[float] = None
    eps_pinch: Optional[float] = None
    eps_extinct: Optional[float] = None
    a2_cap: Optional[float] = None
    max_steps: int = 50_000_000
    record_every: int = 8
    snapshot_factor: float = 1.2

    def __post_init__(self):
        if not (0.0 < self.safety <= 1.0):
            raise ValueError(f"safety must be in (0, 1], got {self.safety}")
        if self.record_every < 1 or self.max_steps < 1:
            raise ValueError("record_every and max_steps must be positive")
        if self.snapshot_factor <= 1.0:
            raise ValueError("snapshot_factor must exceed 1")

    def resolved(self, b: float):
        """Concrete (eps_pinch, eps_extinct, a2_cap, dt_min) for scale b."""
        eps_pinch = 1e-3 * b if self.eps_pinch is None else self.eps_pinch
        eps_extinct = 1e-2 * b if self.eps_extinct is None else self.eps_extinct
        a2_cap = 1e8 / b**2 if self.a2_cap is None else self.a2_cap
        dt_min = 1e-16 * b**2 if self.dt_min is None else self.dt_min
        if min(eps_pinch, eps_extinct, a2_cap, dt_min) <= 0.0:
            raise ValueError("all thresholds must be strictly positive")
        return eps_pinch, eps_extinct, a2_cap, dt_min


@dataclass(frozen=True)
class FlowTrace:
    """Diagnostic time series of one evolution (one entry per record)."""

    t: np.ndarray
    H_max: np.ndarray
    H_pole: np.ndarray
    R_min: np.ndarray      # innermost interior local minimum of R (the neck)
    R_max: np.ndarray
    convex: np.ndarray     # bool
    dt: np.ndarray
    H_center: np.ndarray   # mean curvature at the neck node

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def records(self):
        return list(
            zip(self.t, self.H_max, self.H_pole, self.R_min, self.R_max,
                self.convex, self.dt, self.H_center)
        )

    def quantity(self, name: str) -> np.ndarray:
        try:
            return getattr(self, name)
        except AttributeError:
            raise KeyError(f"unknown trace quantity {name!r}") from None


@dataclass(frozen=True)
class TerminationReport:
    outcome: str
    T_est: float
    pinch_location: Optional[float] = None


@njit(cache=True)
def _advance(S, R, H, dS, dR, t, dtheta, safety,
             eps_pinch, eps_extinct, a2_cap, dt_min,
             block_steps, record_every, step_index, ever_convex,
             h_snap_next, snap_factor, rec, snapS, snapR, snapT, nsnap):
    """Advance (S, R) in place for up to block_steps Euler steps.

    Diagnostics of the pre-update state (plus the dt about to be taken)
    are written into ``rec`` every record_every steps and at every stop.
    Snapshots are copied into snapS/snapR/snapT whenever max H crosses
    the geometric schedule h_snap_next.

    Returns (reason, t, step_index, nrec, ever_convex, h_snap_next, nsnap).
    """
    n = S.shape[0]
    dth2 = dtheta * dtheta
    nrec = 0
    for _ in range(block_steps):
        gmin = 1.0e300
        a2max = 0.0
        hmax = -1.0e300
        habs = 0.0
        kumin = 1.0e300
        kpmin = 1.0e300
        rmin = 1.0e300
        rmax = -1.0e300
        for i in range(n):
            if i > 0:
                Sm = S[i - 1]
                Rm = R[i - 1]
            else:
                Sm = S[0]
                Rm = -R[0]
            if i < n - 1:
                Sq = S[i + 1]
                Rq = R[i + 1]
            else:
                Sq = S[n - 1]
                Rq = -R[n - 1]
            Sp = (Sq - Sm) / (2.0 * dtheta)
            Rp = (Rq - Rm) / (2.0 * dtheta)
            Spp = (Sq - 2.0 * S[i] + Sm) / dth2
            Rpp = (Rq - 2.0 * R[i] + Rm) / dth2
            g = Sp * Sp + Rp * Rp
            sg = np.sqrt(g)
            ri = R[i]
            cross = Rp * Spp - Sp * Rpp
            ku = cross / (g * sg)
            kphi = Sp / (ri * sg)
            h = ku + kphi
            H[i] = h
            a2 = ku * ku + kphi * kphi
            gg = g * g
            rg = ri * g
            dS[i] = Rp * cross / gg + Rp * Sp / rg
            dR[i] = -Sp * cross / gg - Sp * Sp / rg
            if g < gmin:
                gmin = g
            if a2 > a2max:
                a2max = a2
            if h > hmax:
                hmax = h
            ah = abs(h)
            if ah > habs:
                habs = ah
            if ku < kumin:
                kumin = ku
            if kphi < kpmin:
                kpmin = kphi
            if ri < rmin:
                rmin = ri
            if ri > rmax:
                rmax = ri

        # neck = innermost interior local minimum of R; if the profile has
        # none (convex-like shapes) fall back to the central node pair
        neck_r = 1.0e300
        neck_i = -1
        for i in range(1, n - 1):
            ri = R[i]
            if ri <= R[i - 1] and ri <= R[i + 1] and ri < neck_r:
                neck_r = ri
                neck_i = i
        if neck_i < 0:
            neck_i = n // 2
            if R[neck_i - 1] < R[neck_i]:
                neck_i -= 1
            neck_r = R[neck_i]

        tolc = 1e-10 * habs
        convex = 1 if (kumin >= -tolc and kpmin >= -tolc) else 0
        if convex == 1:
            ever_convex = 1

        dt = safety * min(gmin * dth2, min(1.0 / a2max, rmin * rmin))

        reason = _R_BLOCK
        if not (np.isfinite(hmax) and np.isfinite(rmax) and rmin > 0.0):
            reason = _R_NONFINITE
        elif rmax < eps_extinct:
            reason = _R_EXTINCT
        elif neck_r < eps_pinch and rmax > 10.0 * eps_pinch:
            reason = _R_PINCH
        elif a2max > a2_cap:
            reason = _R_A2CAP
        elif dt < dt_min:
            reason = _R_DTMIN

        if reason != _R_BLOCK or step_index % record_every == 0:
            rec[nrec, 0] = t
            rec[nrec, 1] = hmax
            hp_l = 1.875 * H[0] - 1.25 * H[1] + 0.375 * H[2]
            hp_r = 1.875 * H[n - 1] - 1.25 * H[n - 2] + 0.375 * H[n - 3]
            rec[nrec, 2] = max(hp_l, hp_r)
            rec[nrec, 3] = neck_r
            rec[nrec, 4] = rmax
            rec[nrec, 5] = convex
            rec[nrec, 6] = dt
            rec[nrec, 7] = H[neck_i]
            nrec += 1

        if reason != _R_BLOCK:
            return reason, t, step_index, nrec, ever_convex, h_snap_next, nsnap

        if hmax >= h_snap_next and nsnap < snapS.shape[0]:
            for i in range(n):
                snapS[nsnap, i] = S[i]
                snapR[nsnap, i] = R[i]
            snapT[nsnap] = t
            nsnap += 1
            while h_snap_next <= hmax:
                h_snap_next *= snap_factor

        for i in range(n):
            S[i] += dt * dS[i]
            R[i] += dt * dR[i]
        t += dt
        step_index += 1

        if nrec >= rec.shape[0] - 1:
            break
    return _R_BLOCK, t, step_index, nrec, ever_convex, h_snap_next, nsnap


def neck_index(R: np.ndarray) -> int:
    """Innermost interior local minimum of R, or the central node if none."""
    n = R.shape[0]
    interior = R[1:-1]
    is_min = (interior <= R[:-2]) & (interior <= R[2:])
    if np.any(is_min):
        cand = np.where(is_min)[0]
        return int(cand[np.argmin(interior[cand])]) + 1
    i = n // 2
    return i - 1 if R[i - 1] < R[i] else i


def flow_velocity(curve: ProfileCurve):
    """Right-hand sides (dS/dt, dR/dt) of the flow on the current grid.

    Pure-numpy reference for the JIT kernel; used by tests and one-off
    diagnostics.
    """
    Sp, Rp, Spp, Rpp = geometry.derivatives(curve)
    g = Sp * Sp + Rp * Rp
    cross = Rp * Spp - Sp * Rpp
    dSdt = Rp * cross / g**2 + Rp * Sp / (curve.R * g)
    dRdt = -Sp * cross / g**2 - Sp * Sp / (curve.R * g)
    return dSdt, dRdt


def _kernel_buffers(n: int, cap_records: int):
    H = np.empty(n)
    dS = np.empty(n)
    dR = np.empty(n)
    rec = np.empty((cap_records, 8))
    return H, dS, dR, rec


def step(curve: ProfileCurve, control: StepControl = StepControl()):
    """One forward-Euler step; returns (new curve, dt_used).

    Thresholds other than dt_min are not applied here (single steps never
    classify outcomes).  dt_min is resolved at unit scale when left
    unset; pass an explicit value for b != 1 problems.
    """
    _, _, _, dt_min = control.resolved(1.0)
    S = curve.S.copy()
    R = curve.R.copy()
    n = curve.n
    H, dS, dR, rec = _kernel_buffers(n, 4)
    snapS = np.empty((0, n))
    snapR = np.empty((0, n))
    snapT = np.empty(0)
    reason, t, _, nrec, _, _, _ = _advance(
        S, R, H, dS, dR, curve.t, curve.dtheta, control.safety,
        0.0, 0.0, np.inf, dt_min,
        1, 1, 0, 0, np.inf, control.snapshot_factor,
        rec, snapS, snapR, snapT, 0,
    )
    if reason == _R_NONFINITE:
        raise NumericalFailureError("non-finite state entering the step")
    if reason == _R_DTMIN:
        raise StepCollapseError(f"adaptive step fell below dt_min={dt_min}")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(R))):
        raise NumericalFailureError("non-finite update")
    dt_used = float(rec[nrec - 1, 6])
    return ProfileCurve(S=S, R=R, t=t), dt_used


def _initial_T_guess(outcome: str, trace_rows: np.ndarray) -> float:
    """Crude remaining-time estimate used to seed the T refinement."""
    t_last = trace_rows[-1, 0]
    h_last = max(trace_rows[-1, 1], 1e-300)
    r_neck = trace_rows[-1, 3]
    r_max = trace_rows[-1, 4]
    if outcome == SHRINKS_ROUND:
        rem = 0.25 * r_max**2
    elif outcome == CENTRAL_NECKPINCH:
        rem = 0.5 * r_neck**2
    else:
        rem = 0.5 / h_last**2
    return float(t_last + max(rem, 1e-300))


def evolve(shape: CassiniShape, n: int, control: StepControl = StepControl()):
    """Run the flow from a Cassini initial surface until termination.

    Returns (trace, report, final_curve, snapshots).  Snapshots are taken
    on a geometric max-curvature schedule (every time max H grows by
    control.snapshot_factor) plus the initial and final states.

    Termination:
      * ShrinksRound      convexity was acquired and R_max < eps_extinct
      * CentralNeckpinch  neck radius < eps_pinch while R_max > 10 eps_pinch
      * CurvatureBlowup   |A|^2 exceeded a2_cap (near-critical flows), or
                          extinction reached without ever turning convex
      * StepLimit         max_steps exhausted
      * NumericalFailure  non-finite state or dt < dt_min

    T_est extrapolates the singular time by fitting H_max against a power
    of (T - t) over the final decade of the trace.
    """
    initial = cassini_profile(shape, n)
    eps_pinch, eps_extinct, a2_cap, dt_min = control.resolved(shape.b)

    S = initial.S.copy()
    R = initial.R.copy()
    field0 = curvatures(initial)
    h_snap_next = float(np.max(field0.H)) * control.snapshot_factor

    block = 200_000
    H, dS, dR, rec = _kernel_buffers(n, block // control.record_every + 4)
    snapS = np.empty((_SNAP_CAP, n))
    snapR = np.empty((_SNAP_CAP, n))
    snapT = np.empty(_SNAP_CAP)

    rows = []
    t = initial.t
    step_index = 0
    ever_convex = 0
    nsnap = 0
    reason = _R_BLOCK
    while True:
        budget = min(block, control.max_steps - step_index)
        if budget <= 0:
            break
        reason, t, step_index, nrec, ever_convex, h_snap_next, nsnap = _advance(
            S, R, H, dS, dR, t, initial.dtheta, control.safety,
            eps_pinch, eps_extinct, a2_cap, dt_min,
            budget, control.record_every, step_index, ever_convex,
            h_snap_next, control.snapshot_factor,
            rec, snapS, snapR, snapT, nsnap,
        )
        if nrec:
            rows.append(rec[:nrec].copy())
        if reason != _R_BLOCK:
            break

    rows = np.vstack(rows) if rows else np.empty((0, 8))
    trace = FlowTrace(
        t=rows[:, 0].copy(),
        H_max=rows[:, 1].copy(),
        H_pole=rows[:, 2].copy(),
        R_min=rows[:, 3].copy(),
        R_max=rows[:, 4].copy(),
        convex=rows[:, 5] > 0.5,
        dt=rows[:, 6].copy(),
        H_center=rows[:, 7].copy(),
    )

    final = ProfileCurve(S=S, R=R, t=t)
    snapshots = [initial]
    for k in range(nsnap):
        snapshots.append(ProfileCurve(S=snapS[k].copy(), R=snapR[k].copy(),
                                      t=float(snapT[k])))
    if not snapshots or snapshots[-1].t < final.t:
        snapshots.append(final)

    pinch_location = None
    if reason == _R_EXTINCT:
        outcome = SHRINKS_ROUND if ever_convex else CURVATURE_BLOWUP
    elif reason == _R_PINCH:
        outcome = CENTRAL_NECKPINCH
        pinch_location = float(final.S[neck_index(final.R)])
    elif reason == _R_A2CAP:
        outcome = CURVATURE_BLOWUP
    elif reason in (_R_DTMIN, _R_NONFINITE):
        outcome = NUMERICAL_FAILURE
    else:
        outcome = STEP_LIMIT

    T_est = t
    if len(trace) >= 2:
        T_guess = _initial_T_guess(outcome, rows)
        from .analysis import fit_power
        from .errors import FitError
        try:
            fit = fit_power(trace, "H_max", T_guess)
            T_est = fit.T_refined
        except (FitError, ValueError):
            T_est = T_guess
    T_est = max(float(T_est), float(t))

    report = TerminationReport(outcome=outcome, T_est=T_est,
                               pinch_location=pinch_location)
    return trace, report, final, snapshots


def pole_mean_curvature(curve: ProfileCurve, pole: str = "left") -> float:
    """Mean curvature at a pole by even quadratic extrapolation of H(theta).

    The three nodes nearest the pole sit at theta = (1/2, 3/2, 5/2) dtheta;
    the parabola through them evaluated at the pole gives weights
    (15, -10, 3)/8.  At the axis the surface is umbilic, so this also
    equals 2 kappa_u.
    """
    field = curvatures(curve)
    H = field.H
    if pole == "left":
        h1, h2, h3 = H[0], H[1], H[2]
    elif pole == "right":
        h1, h2, h3 = H[-1], H[-2], H[-3]
    else:
        raise ValueError(f"pole must be 'left' or 'right', got {pole!r}")
    return float(1.875 * h1 - 1.25 * h2 + 0.375 * h3)


# ---------------------------------------------------------------------------
# Trace / snapshot persistence
# ---------------------------------------------------------------------------

def write_trace_csv(path, trace: FlowTrace):
    fmt = geometry.FLOAT_FMT
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for i in range(len(trace)):
            fh.write(",".join([
                fmt % trace.t[i], fmt % trace.H_max[i], fmt % trace.H_pole[i],
                fmt % trace.R_min[i], fmt % trace.R_max[i],
                "1" if trace.convex[i] else "0",
                fmt % trace.dt[i], fmt % trace.H_center[i],
            ]) + "\n")


def load_trace_csv(path) -> FlowTrace:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    ncol = data.shape[1]
    if ncol < 7:
        raise ValueError(f"{path}: expected >= 7 trace columns")
    h_center = data[:, 7] if ncol >= 8 else np.full(data.shape[0], np.nan)
    return FlowTrace(
        t=data[:, 0].copy(), H_max=data[:, 1].copy(), H_pole=data[:, 2].copy(),
        R_min=data[:, 3].copy(), R_max=data[:, 4].copy(),
        convex=data[:, 5] > 0.5, dt=data[:, 6].copy(), H_center=h_center.copy(),
    )


def snapshot_filename(index: int, t: float) -> str:
    return f"snap_{index}_t={t:.12g}.csv"


def snapshot_time_from_filename(name: str) -> float:
    stem = name.rsplit("=", 1)[-1]
    return float(stem[:-4] if stem.endswith(".csv") else stem)
