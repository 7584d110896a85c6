"""Gaussian variational analysis of a trapped condensate.

Restricting the energy functional to normalized isotropic Gaussians
psi(r) = pi^(-d/4) sigma^(-d/2) exp(-r^2 / (2 sigma^2)) gives, per
particle and in oscillator units,

    E(sigma) = (d/4) (sigma^-2 + sigma^2) + g' * sigma^-d,
    g' = g / (2 * (2*pi)^(d/2)),

with kinetic, trap and interaction terms (d/4) sigma^-2, (d/4) sigma^2
and g' sigma^-d.  Stationary widths solve

    sigma^(d+2) - sigma^(d-2) - 2 g' = 0,

and the small-sigma behaviour of E decides boundedness: the interaction
term wins for d > 2, ties with the kinetic term at d = 2, and loses for
d < 2.  Those two facts drive everything here: stationary-point search,
stability classification, critical couplings and barrier heights.

The formulas are analytic in d, so real d >= 1 is accepted throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

# Root search window and bracketing-scan resolution for the stationarity
# residual; roots outside the window are unphysical for |g| <= 1e6.
SIGMA_WINDOW = (1e-6, 1e3)
SCAN_PANELS = 4096

# Refinement target for root polishing and the (looser) bound a freshly
# constructed stationary point must satisfy.
POLISH_TOL = 1e-12
CONSTRUCTION_TOL = 1e-10

# |E''| below this is treated as degenerate rather than guessed min/max.
CURVATURE_TOL = 1e-8

# d = 2 sits exactly on the kinetic/interaction balance: E is bounded
# below iff 1 + 2 g' >= 0.  Equality within this tolerance is critical.
_D2_BOUNDARY_TOL = 1e-12


class PointKind(str, Enum):
    LOCAL_MIN = "LocalMin"
    LOCAL_MAX = "LocalMax"
    DEGENERATE = "Degenerate"


class Classification(str, Enum):
    STABLE = "Stable"
    METASTABLE = "Metastable"
    UNSTABLE = "Unstable"
    CRITICAL = "Critical"


@dataclass(frozen=True)
class AnsatzProblem:
    """A (dimension, coupling) point of the variational analysis.

    Attributes:
        dimension: Real spatial dimension d >= 1 (1, 2, 3 are the physical
            cases; real d is an analytic extension).
        coupling: Dimensionless interaction strength g.
        reduced_coupling: Cached g' = g / (2 * (2*pi)^(d/2)).
    """

    dimension: float
    coupling: float
    reduced_coupling: float = 0.0

    def __post_init__(self) -> None:
        if not (self.dimension >= 1.0 and math.isfinite(self.dimension)):
            raise ValueError(f"dimension must be a real number >= 1, got {self.dimension}")
        if not math.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        gp = self.coupling / (2.0 * (2.0 * math.pi) ** (self.dimension / 2.0))
        object.__setattr__(self, "reduced_coupling", gp)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy per particle, term by term, in units of hbar*omega."""

    kinetic: float
    potential: float
    interaction: float
    total: float

    @classmethod
    def from_terms(cls, kinetic: float, potential: float, interaction: float) -> "EnergyBreakdown":
        return cls(kinetic, potential, interaction, kinetic + potential + interaction)


@dataclass(frozen=True)
class VariationalPoint:
    """A stationary width of the Gaussian energy landscape.

    Attributes:
        sigma: Width in oscillator lengths.
        energy: EnergyBreakdown at sigma.
        curvature: E''(sigma).
        kind: LocalMin / LocalMax / Degenerate by the sign of the
            curvature against CURVATURE_TOL.
    """

    sigma: float
    energy: EnergyBreakdown
    curvature: float
    kind: PointKind


@dataclass(frozen=True)
class StabilityReport:
    """Classification of a (d, g) point with its supporting evidence."""

    classification: Classification
    points: Tuple[VariationalPoint, ...]
    barrier_height: Optional[float] = None
    mean_radius: Optional[float] = None


@dataclass(frozen=True)
class CriticalCoupling:
    """Collapse threshold: coupling g_c and, where defined, the fold width."""

    g_c: float
    sigma_c: Optional[float]


def gaussian_energy(problem: AnsatzProblem, sigma: float) -> EnergyBreakdown:
    """Evaluate the Gaussian energy at width sigma.

    Args:
        problem: Dimension and coupling.
        sigma: Width in oscillator lengths, > 0.

    Returns:
        EnergyBreakdown with kinetic = (d/4) sigma^-2, potential =
        (d/4) sigma^2, interaction = g' sigma^-d.

    Raises:
        ValueError: If sigma <= 0.
    """
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = problem.dimension
    kinetic = 0.25 * d / (sigma * sigma)
    potential = 0.25 * d * sigma * sigma
    interaction = problem.reduced_coupling * sigma ** (-d)
    return EnergyBreakdown.from_terms(kinetic, potential, interaction)


def stationarity_residual(problem: AnsatzProblem, sigma: float) -> float:
    """sigma^(d+2) - sigma^(d-2) - 2 g'; zero exactly at stationary widths.

    The residual equals (2 sigma^(d+1) / d) * dE/dsigma, so its sign is
    the sign of the energy slope.
    """
    d = problem.dimension
    return sigma ** (d + 2.0) - sigma ** (d - 2.0) - 2.0 * problem.reduced_coupling


def energy_curvature(problem: AnsatzProblem, sigma: float) -> float:
    """Second derivative E''(sigma) of the Gaussian energy."""
    d = problem.dimension
    gp = problem.reduced_coupling
    return 0.5 * d * (1.0 + 3.0 * sigma**-4) + d * (d + 1.0) * gp * sigma ** (-d - 2.0)


def mean_radius(dimension: float, sigma: float) -> float:
    """Root-mean-square radius sqrt(<r^2>) = sqrt(d/2) * sigma of the Gaussian."""
    if not sigma > 0.0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return math.sqrt(0.5 * dimension) * sigma


def _residual_on(problem: AnsatzProblem, sigma: np.ndarray) -> np.ndarray:
    d = problem.dimension
    return sigma ** (d + 2.0) - sigma ** (d - 2.0) - 2.0 * problem.reduced_coupling


def _residual_slope(problem: AnsatzProblem, sigma: float) -> float:
    d = problem.dimension
    return (d + 2.0) * sigma ** (d + 1.0) - (d - 2.0) * sigma ** (d - 3.0)


def _refine_root(problem: AnsatzProblem, lo: float, hi: float) -> float:
    """Bisect a sign-changing bracket, then Newton-polish the best point."""
    f_lo = stationarity_residual(problem, lo)
    if f_lo == 0.0:
        sigma = lo
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            f_mid = stationarity_residual(problem, mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if (f_lo < 0.0) == (f_mid < 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
        sigma = 0.5 * (lo + hi)
    best = sigma
    best_res = abs(stationarity_residual(problem, sigma))
    for _ in range(8):
        if best_res < POLISH_TOL:
            break
        slope = _residual_slope(problem, sigma)
        if slope == 0.0 or not math.isfinite(slope):
            break
        step = stationarity_residual(problem, sigma) / slope
        sigma -= step
        if not (sigma > 0.0 and math.isfinite(sigma)):
            break
        res = abs(stationarity_residual(problem, sigma))
        if res < best_res:
            best, best_res = sigma, res
        else:
            break
    return best


def _point_at(problem: AnsatzProblem, sigma: float, check: bool = True) -> VariationalPoint:
    if check:
        res = abs(stationarity_residual(problem, sigma))
        if not res < CONSTRUCTION_TOL:
            raise ValueError(
                f"not a stationary point: |residual| = {res:.3e} at sigma = {sigma!r}"
            )
    curv = energy_curvature(problem, sigma)
    if curv > CURVATURE_TOL:
        kind = PointKind.LOCAL_MIN
    elif curv < -CURVATURE_TOL:
        kind = PointKind.LOCAL_MAX
    else:
        kind = PointKind.DEGENERATE
    return VariationalPoint(
        sigma=sigma, energy=gaussian_energy(problem, sigma), curvature=curv, kind=kind
    )


def find_stationary_points(problem: AnsatzProblem) -> List[VariationalPoint]:
    """All stationary widths in SIGMA_WINDOW, ascending in sigma.

    A log-spaced bracketing scan locates sign changes of the stationarity
    residual; for d > 2 the residual's single turning point
    sigma* = ((d-2)/(d+2))^(1/4) is inserted into the scan grid so the
    scan cannot step over a nearly merged pair of roots near the fold.
    Each bracket is refined by bisection plus a Newton polish.

    Returns:
        Possibly empty list (empty = no stationary width, the collapse
        regime).
    """
    d = problem.dimension
    grid = np.logspace(math.log10(SIGMA_WINDOW[0]), math.log10(SIGMA_WINDOW[1]), SCAN_PANELS + 1)
    if d > 2.0:
        turning = ((d - 2.0) / (d + 2.0)) ** 0.25
        if SIGMA_WINDOW[0] < turning < SIGMA_WINDOW[1]:
            grid = np.sort(np.append(grid, turning))
    vals = _residual_on(problem, grid)
    roots: List[float] = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(grid[i])
        elif (a < 0.0) != (b < 0.0):
            roots.append(_refine_root(problem, float(grid[i]), float(grid[i + 1])))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    points = []
    for sigma in roots:
        if points and abs(sigma - points[-1].sigma) <= 1e-9 * points[-1].sigma:
            continue
        points.append(_point_at(problem, sigma))
    return points


def classify(problem: AnsatzProblem) -> StabilityReport:
    """Classify a (d, g) point as Stable / Metastable / Unstable / Critical.

    Boundedness of E below is decided analytically from the small-sigma
    competition: unbounded for g < 0 and d > 2; for d = 2 bounded iff
    1 + 2 g' >= 0; always bounded for d < 2.  Stationary points from
    find_stationary_points supply the rest.
    """
    d = problem.dimension
    gp = problem.reduced_coupling
    points = tuple(find_stationary_points(problem))
    minima = [p for p in points if p.kind is PointKind.LOCAL_MIN]
    maxima = [p for p in points if p.kind is PointKind.LOCAL_MAX]
    degenerate = any(p.kind is PointKind.DEGENERATE for p in points)

    radius = mean_radius(d, minima[0].sigma) if minima else None

    if degenerate:
        return StabilityReport(Classification.CRITICAL, points, mean_radius=radius)
    if d == 2.0 and abs(1.0 + 2.0 * gp) <= _D2_BOUNDARY_TOL:
        # Borderline scale invariance: E(sigma) -> sigma^2/2, infimum not attained.
        return StabilityReport(Classification.CRITICAL, points, mean_radius=radius)

    if d < 2.0:
        bounded = True
    elif d == 2.0:
        bounded = 1.0 + 2.0 * gp > 0.0
    else:
        bounded = gp >= 0.0

    if not minima:
        return StabilityReport(Classification.UNSTABLE, points)
    if bounded:
        return StabilityReport(Classification.STABLE, points, mean_radius=radius)
    barrier = None
    if maxima:
        barrier = maxima[0].energy.total - minima[0].energy.total
    return StabilityReport(
        Classification.METASTABLE, points, barrier_height=barrier, mean_radius=radius
    )


def critical_coupling(dimension: float) -> Optional[CriticalCoupling]:
    """Collapse threshold for a given dimension, or None when absent.

    For d > 2 the fold where the two stationary widths merge solves
    E' = E'' = 0 simultaneously:

        sigma_c = ((d-2)/(d+2))^(1/4),
        2 g'_c  = sigma_c^(d+2) - sigma_c^(d-2).

    For d = 2 the threshold is the boundedness boundary g_c = -2*pi with
    no fold width (sigma_c is None).  For d < 2 there is no finite
    threshold and None is returned.
    """
    if dimension < 2.0:
        return None
    if dimension == 2.0:
        return CriticalCoupling(g_c=-2.0 * math.pi, sigma_c=None)
    d = dimension
    sigma_c = ((d - 2.0) / (d + 2.0)) ** 0.25
    two_gp_c = sigma_c ** (d + 2.0) - sigma_c ** (d - 2.0)
    g_c = (2.0 * math.pi) ** (d / 2.0) * two_gp_c
    return CriticalCoupling(g_c=g_c, sigma_c=sigma_c)


def barrier_height(problem: AnsatzProblem) -> Optional[float]:
    """E(sigma_max) - E(sigma_min) in the metastable regime, else None."""
    report = classify(problem)
    return report.barrier_height if report.classification is Classification.METASTABLE else None


def scan_minimize(
    problem: AnsatzProblem, sigma_lo: float, sigma_hi: float, n_points: int
) -> Optional[VariationalPoint]:
    """Brute-force energy minimum on a log grid, golden-section refined.

    This is the deliberately naive oracle the test suite plays against
    find_stationary_points: no root finding, just a dense evaluation of
    gaussian_energy.  Returns None when the grid minimum sits on the
    window boundary (the landscape keeps falling, i.e. collapse within
    the window).  Golden-section localizes a smooth minimum only to
    about sqrt(machine eps) in sigma, so the returned point is built
    without the stationarity-residual check.

    Args:
        problem: Dimension and coupling.
        sigma_lo: Lower window edge, > 0.
        sigma_hi: Upper window edge, > sigma_lo.
        n_points: Grid size, >= 3.
    """
    if not (0.0 < sigma_lo < sigma_hi):
        raise ValueError(f"need 0 < sigma_lo < sigma_hi, got [{sigma_lo}, {sigma_hi}]")
    if n_points < 3:
        raise ValueError(f"n_points must be >= 3, got {n_points}")
    d = problem.dimension
    gp = problem.reduced_coupling
    sigmas = np.logspace(math.log10(sigma_lo), math.log10(sigma_hi), n_points)
    energies = 0.25 * d * (sigmas**-2 + sigmas**2) + gp * sigmas ** (-d)
    i = int(np.argmin(energies))
    if i == 0 or i == n_points - 1:
        return None
    lo, hi = float(sigmas[i - 1]), float(sigmas[i + 1])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0

    def e(s: float) -> float:
        return 0.25 * d * (s**-2 + s**2) + gp * s ** (-d)

    a, b = lo, hi
    c1 = b - invphi * (b - a)
    c2 = a + invphi * (b - a)
    f1, f2 = e(c1), e(c2)
    for _ in range(200):
        if b - a <= 1e-14 * max(1.0, abs(a)):
            break
        if f1 < f2:
            b, c2, f2 = c2, c1, f1
            c1 = b - invphi * (b - a)
            f1 = e(c1)
        else:
            a, c1, f1 = c1, c2, f2
            c2 = a + invphi * (b - a)
            f2 = e(c2)
    return _point_at(problem, 0.5 * (a + b), check=False)
