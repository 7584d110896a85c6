"""Radial-grid ground-state solver: normalized gradient flow.

Minimizes the same per-particle energy functional as the variational
module, but over all radial profiles on a uniform grid r_i = i*h,
i = 0..n-1, instead of a Gaussian family:

    E[psi] = S_d * int [ (1/2) psi'^2 + (1/2) r^2 psi^2
                         + (g/2) psi^4 ] r^(d-1) dr,

with S_d the unit-sphere measure (2, 2*pi, 4*pi) and the norm
S_d * int psi^2 r^(d-1) dr = 1 (d = 1 counts even functions on the
half-line, hence S_1 = 2).  The flow is imaginary-time relaxation

    psi <- psi - tau * H psi,
    H psi = -(1/2)(psi'' + (d-1)/r psi') + (1/2) r^2 psi + g psi^3,

renormalized exactly after each step.  The plain explicit update is
unstable for tau >> h^2, far below the default tau, so the step is
applied in the standard stabilized (semi-implicit) form: the linear
operator and the frozen density g*psi^2 are treated backward-Euler,
which solves one tridiagonal system per step, agrees with the explicit
rule to O(tau^2), is unconditionally stable, and has the exact discrete
stationary states as fixed points.

Spatial discretization is second-order central differences with even
symmetry at the origin (psi'(0) = 0; the Laplacian limit there is
d * psi''(0)) and psi = 0 at r_max.  Collapse is detected operationally:
the flow is declared collapsed when the rms radius falls below a floor
or the energy below a (coupling-dependent) floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numba import njit

from .variational import EnergyBreakdown

SOLID_ANGLE = {1: 2.0, 2: 2.0 * math.pi, 3: 4.0 * math.pi}

_CONVERGED, _COLLAPSED, _EXHAUSTED = 0, 1, 2


@dataclass(frozen=True)
class SolverConfig:
    """Grid and flow parameters.

    collapse_radius_floor defaults to 3*h and collapse_energy_floor to
    -(10 + 10*|g|); leave them None to get those per-run defaults.
    """

    r_max: float = 8.0
    n_points: int = 1024
    time_step: float = 1e-3
    energy_tol: float = 1e-9
    max_iters: int = 2_000_000
    collapse_radius_floor: Optional[float] = None
    collapse_energy_floor: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.r_max > 0.0:
            raise ValueError(f"r_max must be positive, got {self.r_max}")
        if self.n_points < 16:
            raise ValueError(f"n_points must be >= 16, got {self.n_points}")
        if not self.time_step > 0.0:
            raise ValueError(f"time_step must be positive, got {self.time_step}")
        if not self.energy_tol > 0.0:
            raise ValueError(f"energy_tol must be positive, got {self.energy_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    @property
    def grid_spacing(self) -> float:
        return self.r_max / (self.n_points - 1)


@dataclass(frozen=True)
class RadialState:
    """A radial profile on the solver grid.

    psi holds non-negative node values normalized to unit total density;
    converged reports whether the energy-change criterion was met and
    iterations how many flow steps ran.  energy_trace is the per-step
    energy sequence when relax() was asked to record it.
    """

    dimension: int
    coupling: float
    grid: np.ndarray
    psi: np.ndarray
    converged: bool
    iterations: int
    energy_trace: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Observables:
    energy: EnergyBreakdown
    chemical_potential: float
    rms_radius: float
    central_density_amplitude: float


class RelaxationError(RuntimeError):
    """Base for flow outcomes that do not produce a converged state."""

    def __init__(
        self, message: str, dimension: int, coupling: float, iterations: int,
        energy: float, rms_radius: float,
    ) -> None:
        super().__init__(message)
        self.dimension = dimension
        self.coupling = coupling
        self.iterations = iterations
        self.energy = energy
        self.rms_radius = rms_radius


class CollapseDetected(RelaxationError):
    """The flow crossed a collapse floor: the unstable regime."""


class NonConverged(RelaxationError):
    """max_iters exhausted with neither convergence nor collapse."""


class BracketError(RuntimeError):
    """The initial coupling bracket does not straddle the transition."""


@njit(cache=True, nogil=True)
def _flow(psi, r, h, d, g, tau, energy_tol, max_iters, e_floor, r_floor, meas, trace):
    """Run the semi-implicit normalized flow in place.

    Returns (status, iterations, kinetic, potential, interaction, rms).
    trace: preallocated energy log, or a length-1 array to disable.
    """
    n = psi.shape[0]
    record = trace.shape[0] >= max_iters

    # Static tridiagonal pieces of I + tau*L, L = -(1/2)*radial Laplacian
    # + (1/2) r^2.  Row 0 uses the even-symmetry limit d*psi''(0); the
    # last row is the identity (Dirichlet).
    sub = np.empty(n)
    sup = np.empty(n)
    dia = np.empty(n)
    inv_h2 = 1.0 / (h * h)
    sup[0] = -tau * d * inv_h2
    dia[0] = 1.0 + tau * d * inv_h2
    sub[0] = 0.0
    for i in range(1, n - 1):
        drift = (d - 1.0) / (2.0 * h * r[i])
        sub[i] = -tau * 0.5 * (inv_h2 - drift)
        sup[i] = -tau * 0.5 * (inv_h2 + drift)
        dia[i] = 1.0 + tau * (inv_h2 + 0.5 * r[i] * r[i])
    sub[n - 1] = 0.0
    sup[n - 1] = 0.0
    dia[n - 1] = 1.0

    cp = np.empty(n)
    dp = np.empty(n)
    inv_2h = 1.0 / (2.0 * h)
    e_prev = np.inf
    kin = 0.0
    pot = 0.0
    inter = 0.0
    rms = 0.0
    for k in range(1, max_iters + 1):
        # Thomas solve of (I + tau*(L + g*diag(psi^2))) psi_new = psi.
        inv = 1.0 / (dia[0] + tau * g * psi[0] * psi[0])
        cp[0] = sup[0] * inv
        dp[0] = psi[0] * inv
        for i in range(1, n - 1):
            inv = 1.0 / (dia[i] + tau * g * psi[i] * psi[i] - sub[i] * cp[i - 1])
            cp[i] = sup[i] * inv
            dp[i] = (psi[i] - sub[i] * dp[i - 1]) * inv
        psi[n - 1] = 0.0
        psi[n - 2] = dp[n - 2]
        for i in range(n - 3, -1, -1):
            psi[i] = dp[i] - cp[i] * psi[i + 1]

        # Clip, then quadrature sums on the unscaled profile; the
        # normalization enters as s^2 (quadratic terms) and s^4 (quartic).
        # The r^2 moment and the trap term share one accumulator.
        nrm = 0.0
        pot2 = 0.0
        quart = 0.0
        for i in range(n):
            if psi[i] < 0.0:
                psi[i] = 0.0
            p2 = psi[i] * psi[i]
            m = meas[i]
            nrm += m * p2
            pot2 += m * r[i] * r[i] * p2
            quart += m * p2 * p2
        kin = 0.0
        for i in range(1, n - 1):
            dpsi = (psi[i + 1] - psi[i - 1]) * inv_2h
            kin += meas[i] * dpsi * dpsi
        edge = (psi[n - 1] - psi[n - 2]) / h
        kin += meas[n - 1] * edge * edge
        s2 = 1.0 / nrm
        s = np.sqrt(s2)
        for i in range(n):
            psi[i] *= s
        kin *= 0.5 * s2
        pot = 0.5 * s2 * pot2
        inter = 0.5 * g * s2 * s2 * quart
        rms = np.sqrt(s2 * pot2)

        e = kin + pot + inter
        if record:
            trace[k - 1] = e
        if rms < r_floor or e < e_floor:
            return _COLLAPSED, k, kin, pot, inter, rms
        if abs(e - e_prev) / tau < energy_tol:
            return _CONVERGED, k, kin, pot, inter, rms
        e_prev = e
    return _EXHAUSTED, max_iters, kin, pot, inter, rms


def _grid_and_measure(dimension: int, config: SolverConfig) -> Tuple[np.ndarray, float, np.ndarray]:
    r = np.linspace(0.0, config.r_max, config.n_points)
    h = r[1] - r[0]
    w = np.full(config.n_points, h)
    w[0] = w[-1] = 0.5 * h
    # 0**0 = 1 makes the d = 1 origin weight come out right.
    meas = SOLID_ANGLE[dimension] * w * r ** (dimension - 1)
    return r, float(h), meas


def gaussian_state(
    config: SolverConfig, dimension: int, coupling: float, width: float = 1.0
) -> RadialState:
    """A normalized Gaussian profile of the given width on the solver grid.

    The default width 1 is the flow's standard starting point; narrower
    widths can sit inside the collapse region of an attractive landscape
    and are exposed for exactly that experiment.
    """
    if dimension not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    if not width > 0.0:
        raise ValueError(f"width must be positive, got {width}")
    r, _, meas = _grid_and_measure(dimension, config)
    psi = np.exp(-0.5 * (r / width) ** 2)
    psi[-1] = 0.0
    psi /= math.sqrt(float(meas @ (psi * psi)))
    return RadialState(
        dimension=dimension, coupling=coupling, grid=r, psi=psi,
        converged=False, iterations=0,
    )


def relax(
    config: SolverConfig,
    dimension: int,
    coupling: float,
    initial: Optional[RadialState] = None,
    track_energy: bool = False,
) -> RadialState:
    """Relax to a grid ground state by normalized gradient flow.

    Args:
        config: Grid and flow parameters.
        dimension: 1, 2 or 3.
        coupling: Dimensionless interaction strength g.
        initial: Starting profile; must share the solver grid geometry.
            Defaults to the unit Gaussian.
        track_energy: Record the per-step energy sequence on the result.

    Returns:
        Converged RadialState (its energy change per unit imaginary time
        fell below config.energy_tol).

    Raises:
        CollapseDetected: rms radius or energy crossed a collapse floor.
        NonConverged: max_iters exhausted without either outcome.
        ValueError: bad dimension or mismatched initial grid.
    """
    if dimension not in (1, 2, 3):
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    r, h, meas = _grid_and_measure(dimension, config)
    if initial is None:
        psi = np.exp(-0.5 * r * r)
        psi[-1] = 0.0
        psi /= math.sqrt(float(meas @ (psi * psi)))
    else:
        if initial.psi.shape != r.shape or not np.array_equal(initial.grid, r):
            raise ValueError("initial profile does not match the solver grid")
        psi = initial.psi.copy()
        psi[-1] = 0.0
        psi /= math.sqrt(float(meas @ (psi * psi)))

    r_floor = config.collapse_radius_floor
    if r_floor is None:
        r_floor = 3.0 * h
    e_floor = config.collapse_energy_floor
    if e_floor is None:
        e_floor = -(10.0 + 10.0 * abs(coupling))

    trace = np.empty(config.max_iters if track_energy else 1)
    status, iters, kin, pot, inter, rms = _flow(
        psi, r, h, float(dimension), float(coupling), config.time_step,
        config.energy_tol, config.max_iters, e_floor, r_floor, meas, trace,
    )
    energy = kin + pot + inter
    if status == _COLLAPSED:
        raise CollapseDetected(
            f"collapse at d={dimension}, g={coupling}: rms={rms:.4g}, E={energy:.4g} "
            f"after {iters} steps",
            dimension, coupling, iters, energy, rms,
        )
    if status == _EXHAUSTED:
        raise NonConverged(
            f"no convergence at d={dimension}, g={coupling} within {config.max_iters} steps "
            f"(E={energy:.6g}, rms={rms:.4g})",
            dimension, coupling, iters, energy, rms,
        )
    return RadialState(
        dimension=dimension, coupling=coupling, grid=r, psi=psi,
        converged=True, iterations=iters,
        energy_trace=trace[:iters].copy() if track_energy else None,
    )


def norm(state: RadialState) -> float:
    """Total density S_d * sum w_i psi_i^2 r_i^(d-1); 1 for valid states."""
    r = state.grid
    h = float(r[1] - r[0])
    w = np.full(r.shape, h)
    w[0] = w[-1] = 0.5 * h
    meas = SOLID_ANGLE[state.dimension] * w * r ** (state.dimension - 1)
    return float(meas @ (state.psi * state.psi))


def observables(state: RadialState) -> Observables:
    """Energies, chemical potential and rms radius of a radial profile.

    All integrals are trapezoid sums on the solver grid; the gradient in
    the kinetic term uses the same central differences as the flow.  The
    chemical potential is total + interaction, the interaction term being
    quadratic in the density.
    """
    r = state.grid
    psi = state.psi
    d = state.dimension
    g = state.coupling
    h = float(r[1] - r[0])
    w = np.full(r.shape, h)
    w[0] = w[-1] = 0.5 * h
    meas = SOLID_ANGLE[d] * w * r ** (d - 1)

    dpsi = np.empty_like(psi)
    dpsi[0] = 0.0  # even symmetry at the origin
    dpsi[1:-1] = (psi[2:] - psi[:-2]) / (2.0 * h)
    dpsi[-1] = (psi[-1] - psi[-2]) / h
    kinetic = 0.5 * float(meas @ (dpsi * dpsi))
    potential = 0.5 * float(meas @ (r * r * psi * psi))
    interaction = 0.5 * g * float(meas @ (psi**4))
    energy = EnergyBreakdown.from_terms(kinetic, potential, interaction)
    rms = math.sqrt(float(meas @ (r * r * psi * psi)))
    return Observables(
        energy=energy,
        chemical_potential=energy.total + interaction,
        rms_radius=rms,
        central_density_amplitude=float(psi[0]),
    )


def virial_residual(state: RadialState) -> float:
    """2*kinetic - 2*potential + d*interaction; ~0 at flow fixed points."""
    obs = observables(state)
    e = obs.energy
    return 2.0 * e.kinetic - 2.0 * e.potential + state.dimension * e.interaction


def critical_coupling_grid(
    config: SolverConfig, dimension: int, g_lo: float, g_hi: float, tol_g: float
) -> Tuple[float, float]:
    """Bisect the collapse transition of the grid flow in g.

    Each probe relaxes from the most recent converged profile (warm
    start); probes that collapse move g_lo, probes that converge move
    g_hi.  A probe that exhausts its iteration budget without tripping a
    collapse floor has not demonstrated a metastable state, so it counts
    toward the unstable side; this keeps the search deterministic in the
    marginal band where relaxation slows critically.

    Args:
        config: Solver parameters for every probe.
        dimension: 2 or 3 (no collapse exists in 1D).
        g_lo: Coupling that collapses (more attractive edge).
        g_hi: Coupling that converges, g_lo < g_hi < 0.
        tol_g: Terminal bracket width.

    Returns:
        The final (g_lo, g_hi) bracket with g_hi - g_lo < tol_g.

    Raises:
        ValueError: Bad dimension, ordering, or tolerance.
        BracketError: The endpoints do not straddle the transition.
    """
    if dimension not in (2, 3):
        raise ValueError(f"a collapse transition exists only for d in (2, 3), got {dimension}")
    if not (g_lo < g_hi < 0.0):
        raise ValueError(f"need g_lo < g_hi < 0, got ({g_lo}, {g_hi})")
    if not tol_g > 0.0:
        raise ValueError(f"tol_g must be positive, got {tol_g}")

    warm: Optional[RadialState] = None

    def survives(g: float) -> bool:
        nonlocal warm
        try:
            warm = relax(config, dimension, g, initial=warm)
            return True
        except CollapseDetected:
            return False
        except NonConverged:
            return False

    if not survives(g_hi):
        raise BracketError(f"relax does not converge at g_hi = {g_hi}")
    if survives(g_lo):
        raise BracketError(f"relax does not collapse at g_lo = {g_lo}")
    while g_hi - g_lo > tol_g:
        mid = 0.5 * (g_lo + g_hi)
        if survives(mid):
            g_hi = mid
        else:
            g_lo = mid
    return g_lo, g_hi


def save_profile(state: RadialState, path: str) -> None:
    """Write a two-column (r, psi) text profile for external plotting."""
    obs = observables(state)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# dimension={state.dimension} coupling={state.coupling!r} "
            f"energy={obs.energy.total!r} iterations={state.iterations}\n"
        )
        for ri, pi in zip(state.grid, state.psi):
            fh.write(f"{float(ri)!r} {float(pi)!r}\n")


def default_config() -> SolverConfig:
    return SolverConfig()


def with_overrides(config: SolverConfig, **kwargs) -> SolverConfig:
    """A copy of config with the given fields replaced."""
    return replace(config, **kwargs)
