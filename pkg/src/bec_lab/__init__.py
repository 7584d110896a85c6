"""Stability of trapped condensates across dimensions.

Two engines answer the same question — does an attractive condensate in
a harmonic trap have a (meta)stable ground state, and how large is it:

- variational: closed-form analysis on the Gaussian family, giving
  classifications, critical couplings, and barrier heights;
- gpesolve: ansatz-free normalized gradient flow on a radial grid.

sweep batches either engine over couplings or atom numbers; units maps
laboratory parameters (mass, trap frequency, scattering length) to the
single dimensionless coupling and back; cli exposes everything as the
bec-lab command.
"""

from .gpesolve import (
    BracketError,
    CollapseDetected,
    NonConverged,
    Observables,
    RadialState,
    SolverConfig,
    critical_coupling_grid,
    gaussian_state,
    observables,
    relax,
    save_profile,
    virial_residual,
)
from .sweep import (
    UNBOUNDED,
    Engine,
    PhaseCell,
    SweepRow,
    SweepSpec,
    max_boson_number,
    phase_diagram,
    radius_vs_coupling,
)
from .units import (
    Coupling,
    PhysicalSystem,
    coupling_from_physical,
    critical_atom_number,
    oscillator_length,
)
from .variational import (
    AnsatzProblem,
    Classification,
    CriticalCoupling,
    EnergyBreakdown,
    PointKind,
    StabilityReport,
    VariationalPoint,
    barrier_height,
    classify,
    critical_coupling,
    find_stationary_points,
    gaussian_energy,
    mean_radius,
    scan_minimize,
    stationarity_residual,
)

__version__ = "0.1.0"

__all__ = [
    "AnsatzProblem",
    "BracketError",
    "Classification",
    "CollapseDetected",
    "Coupling",
    "CriticalCoupling",
    "EnergyBreakdown",
    "Engine",
    "NonConverged",
    "Observables",
    "PhaseCell",
    "PhysicalSystem",
    "PointKind",
    "RadialState",
    "SolverConfig",
    "StabilityReport",
    "SweepRow",
    "SweepSpec",
    "UNBOUNDED",
    "VariationalPoint",
    "barrier_height",
    "classify",
    "coupling_from_physical",
    "critical_atom_number",
    "critical_coupling",
    "critical_coupling_grid",
    "find_stationary_points",
    "gaussian_energy",
    "gaussian_state",
    "max_boson_number",
    "mean_radius",
    "observables",
    "oscillator_length",
    "phase_diagram",
    "radius_vs_coupling",
    "relax",
    "save_profile",
    "scan_minimize",
    "stationarity_residual",
    "virial_residual",
    "__version__",
]
