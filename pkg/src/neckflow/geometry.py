"""Cassini-oval profile curves and surface-of-revolution geometry.

A closed surface of revolution is described by its generator curve
(S(theta), R(theta)) in the half plane R >= 0, revolved about the S-axis.
The angular grid is cell-centered: node i (0-based) sits at
theta_i = (i + 1/2) * pi / n, so the poles theta = 0 and theta = pi fall
halfway between the first/last interior node and a ghost node.  Ghost
values follow the axis reflection rules

    S[-1] = S[0],   R[-1] = -R[0]      (theta = 0)
    S[n]  = S[n-1], R[n]  = -R[n-1]    (theta = pi)

i.e. S extends evenly and R oddly across each pole, which makes R = 0 and
S' = 0 exact at the axis.  All derivatives are second-order centered
differences on this ghosted grid.

Sign conventions: the mean curvature of a sphere is positive.  With the
orientation used here (S increasing with theta) the principal curvatures
are

    kappa_u   = (R' S'' - S' R'') / g^(3/2)        (meridians)
    kappa_phi = S' / (R sqrt(g))                   (parallels)

with g = S'^2 + R'^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, InvalidShapeError, SingularCurveError

__all__ = [
    "CassiniShape",
    "ProfileCurve",
    "CurvatureField",
    "cassini_profile",
    "curvatures",
    "integral_quantities",
    "extinction_bounds",
    "is_convex",
    "profile_csv_text",
    "write_profile_csv",
    "load_profile_csv",
]

# Relative tolerance for the convexity test, in units of max |H|.
CONVEXITY_TOL_FACTOR = 1e-10

# Pairwise diameter search decimates the profile to at most this many nodes.
DIAMETER_SUBSAMPLE = 512

# Float formatting used by every CSV writer in the package (17 significant
# digits round-trips IEEE doubles exactly).
FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class CassiniShape:
    """One member of the Cassini oval family.

    The oval is the locus of points whose distances to the two foci at
    (+-a, 0) have product b^2; in Cartesian form

        (x^2 + y^2 + a^2)^2 - 4 a^2 x^2 - b^4 = 0.

    ``lam`` is the dimensionless shape parameter a/b.  Only the
    single-loop regime 0 <= lam < 1 is accepted; at lam = 1 the loop
    degenerates to a figure-eight through the origin.
    """

    a: float
    b: float
    lam: float

    def __post_init__(self):
        if not (self.b > 0.0 and np.isfinite(self.b)):
            raise InvalidShapeError(f"b must be positive and finite, got {self.b}")
        if not (0.0 <= self.lam < 1.0):
            raise InvalidShapeError(
                f"shape parameter lambda={self.lam} outside single-loop regime [0, 1)"
            )
        if abs(self.a - self.lam * self.b) > 1e-12 * self.b:
            raise InvalidShapeError(
                f"inconsistent shape: a={self.a}, b={self.b}, lambda={self.lam}"
            )

    @classmethod
    def from_lambda(cls, lam: float, b: float = 1.0) -> "CassiniShape":
        return cls(a=lam * b, b=b, lam=lam)

    @property
    def x_max(self) -> float:
        """Axial half-extent of the loop: the quartic meets y=0 at sqrt(a^2+b^2)."""
        return float(np.hypot(self.a, self.b) if self.a else self.b)


@dataclass(frozen=True)
class ProfileCurve:
    """Generator curve sampled on the cell-centered angular grid.

    S : axial coordinates, shape (n,)
    R : radii, shape (n,); positive on every interior node of a regular curve
    t : flow time of the snapshot
    """

    S: np.ndarray
    R: np.ndarray
    t: float = 0.0

    @property
    def n(self) -> int:
        return self.S.shape[0]

    @property
    def theta(self) -> np.ndarray:
        n = self.n
        return (np.arange(n) + 0.5) * (np.pi / n)

    @property
    def dtheta(self) -> float:
        return np.pi / self.n


@dataclass(frozen=True)
class CurvatureField:
    """Pointwise curvature diagnostics of a profile curve.

    By construction H = kappa_u + kappa_phi, A2 = kappa_u^2 + kappa_phi^2
    and Rsc = H^2 - A2 = 2 kappa_u kappa_phi hold exactly.
    """

    kappa_u: np.ndarray
    kappa_phi: np.ndarray
    H: np.ndarray
    A2: np.ndarray
    Rsc: np.ndarray


def cassini_profile(shape: CassiniShape, n: int) -> ProfileCurve:
    """Sample the single-loop Cassini oval on the angular grid.

    The chart is S(theta) = -x_max * cos(theta), which clusters nodes at
    the high-curvature polar caps, and R follows from the quartic:
    R^2 = sqrt(b^4 + 4 a^2 S^2) - S^2 - a^2.  The returned curve is
    exactly reflection-symmetric (the right half is a mirrored copy of
    the left half, so S(theta) = -S(pi - theta) holds to the last bit).
    """
    if n < 16:
        raise ValueError(f"need at least 16 grid nodes, got {n}")
    a, b = shape.a, shape.b
    x_max = shape.x_max
    theta = (np.arange(n) + 0.5) * (np.pi / n)

    half = (n + 1) // 2
    S_half = -x_max * np.cos(theta[:half])
    r2 = np.sqrt(b**4 + 4.0 * a * a * S_half * S_half) - S_half * S_half - a * a
    if not np.all(np.isfinite(r2)) or np.any(r2 <= 0.0):
        raise ConstructionError(
            f"Cassini radii are not positive/finite for lambda={shape.lam}, n={n}"
        )
    R_half = np.sqrt(r2)

    S = np.empty(n)
    R = np.empty(n)
    S[:half] = S_half
    R[:half] = R_half
    S[n - half:] = -S_half[::-1]
    R[n - half:] = R_half[::-1]
    if n % 2 == 1:
        S[half - 1] = 0.0  # center node sits exactly on the waist
        R[half - 1] = np.sqrt(np.sqrt(b**4) - a * a)
    return ProfileCurve(S=S, R=R, t=0.0)


def ghosted(values: np.ndarray, odd: bool) -> np.ndarray:
    """Extend an array by one reflected ghost value on each side."""
    left = -values[0] if odd else values[0]
    right = -values[-1] if odd else values[-1]
    return np.concatenate(([left], values, [right]))


def derivatives(curve: ProfileCurve):
    """Centered first and second theta-derivatives of S and R.

    Returns (Sp, Rp, Spp, Rpp) with the pole ghosts applied.
    """
    dth = curve.dtheta
    Se = ghosted(curve.S, odd=False)
    Re = ghosted(curve.R, odd=True)
    Sp = (Se[2:] - Se[:-2]) / (2.0 * dth)
    Rp = (Re[2:] - Re[:-2]) / (2.0 * dth)
    Spp = (Se[2:] - 2.0 * Se[1:-1] + Se[:-2]) / dth**2
    Rpp = (Re[2:] - 2.0 * Re[1:-1] + Re[:-2]) / dth**2
    return Sp, Rp, Spp, Rpp


def curvatures(curve: ProfileCurve) -> CurvatureField:
    """Principal curvatures and derived invariants of a regular curve."""
    if np.any(curve.R <= 0.0):
        raise SingularCurveError("curve has non-positive radii; curvatures undefined")
    Sp, Rp, Spp, Rpp = derivatives(curve)
    g = Sp * Sp + Rp * Rp
    sg = np.sqrt(g)
    kappa_u = (Rp * Spp - Sp * Rpp) / (g * sg)
    kappa_phi = Sp / (curve.R * sg)
    H = kappa_u + kappa_phi
    A2 = kappa_u**2 + kappa_phi**2
    Rsc = H * H - A2
    return CurvatureField(kappa_u=kappa_u, kappa_phi=kappa_phi, H=H, A2=A2, Rsc=Rsc)


def integral_quantities(curve: ProfileCurve):
    """Surface area, enclosed volume and diameter of the revolved curve.

    Midpoint quadrature on the cell-centered grid:
        area   = 2 pi sum R sqrt(g) dtheta
        volume = pi sum R^2 S' dtheta   (oriented; positive for S increasing)
    The diameter is the exact maximum pairwise distance between sampled
    surface points (the antipodal pair (S_i, R_i), (S_j, -R_j) always
    dominates the same-meridian pair), evaluated on a decimated
    subsample.
    """
    if np.any(curve.R <= 0.0):
        raise SingularCurveError("integral quantities need a regular curve")
    Sp, Rp, _, _ = derivatives(curve)
    dth = curve.dtheta
    g = Sp * Sp + Rp * Rp
    area = 2.0 * np.pi * float(np.sum(curve.R * np.sqrt(g))) * dth
    volume = np.pi * float(np.sum(curve.R**2 * Sp)) * dth

    stride = max(1, curve.n // DIAMETER_SUBSAMPLE)
    S = curve.S[::stride]
    R = curve.R[::stride]
    d2 = (S[:, None] - S[None, :]) ** 2 + (R[:, None] + R[None, :]) ** 2
    diameter = float(np.sqrt(d2.max()))
    return area, volume, diameter


def extinction_bounds(curve: ProfileCurve):
    """Lower and upper bounds on the extinction time of the flow.

    For a closed surface (n = 2) of positive mean curvature:
        2 V^2 / A^2  <=  T  <=  diam^2 / 16.
    """
    area, volume, diameter = integral_quantities(curve)
    t_lower = 2.0 * volume**2 / area**2
    t_upper = diameter**2 / 16.0
    return t_lower, t_upper


def is_convex(field: CurvatureField, tol_factor: float = CONVEXITY_TOL_FACTOR) -> bool:
    """True iff both principal curvatures are nonnegative everywhere.

    The tolerance floor tol_factor * max|H| absorbs rounding in the
    discrete curvatures at points where kappa_u crosses zero.
    """
    tol = tol_factor * float(np.max(np.abs(field.H)))
    return bool(np.all(field.kappa_u >= -tol) and np.all(field.kappa_phi >= -tol))


# ---------------------------------------------------------------------------
# CSV serialization: header theta,S,R (plus curvature columns when a field
# is supplied), one row per node, 17 significant digits.
# ---------------------------------------------------------------------------

def profile_csv_text(curve: ProfileCurve, field: CurvatureField | None = None) -> str:
    cols = [curve.theta, curve.S, curve.R]
    header = "theta,S,R"
    if field is not None:
        cols += [field.kappa_u, field.kappa_phi, field.H, field.A2, field.Rsc]
        header += ",kappa_u,kappa_phi,H,A2,Rsc"
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join(FLOAT_FMT % v for v in row))
    return "\n".join(lines) + "\n"


def write_profile_csv(path, curve: ProfileCurve, field: CurvatureField | None = None):
    with open(path, "w") as fh:
        fh.write(profile_csv_text(curve, field))


def load_profile_csv(path, t: float = 0.0) -> ProfileCurve:
    """Read a profile written by :func:`write_profile_csv`.

    The flow time is not stored in the CSV; pass it explicitly (snapshot
    filenames carry it, see the evolution module).
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] < 3:
        raise ValueError(f"{path}: expected at least 3 columns theta,S,R")
    return ProfileCurve(S=data[:, 1].copy(), R=data[:, 2].copy(), t=t)
