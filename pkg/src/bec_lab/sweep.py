"""Batch evaluation: radius curves, phase diagrams, maximum boson numbers.

Rows of a sweep are independent (no warm starts), so they can run on a
thread pool; results are always assembled in input order, which makes
the output bit-identical for any thread count.  The classification
column always comes from the variational analysis, which is cheap and
defined at every coupling; grid columns are filled only when the grid
engine runs and relaxes to a converged state.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple, Union

from . import variational
from .gpesolve import (
    CollapseDetected,
    NonConverged,
    SolverConfig,
    critical_coupling_grid,
    observables,
    relax,
)
from .units import PhysicalSystem, coupling_from_physical, critical_atom_number
from .variational import AnsatzProblem, Classification, PointKind

DEFAULT_GRID_BRACKET = (-10.0, -4.0)
DEFAULT_GRID_TOL = 0.02


class Engine(str, enum.Enum):
    VARIATIONAL = "variational"
    GRID = "grid"
    BOTH = "both"


class _UnboundedType:
    """Singleton answer for traps that hold any number of bosons."""

    _instance: Optional["_UnboundedType"] = None

    def __new__(cls) -> "_UnboundedType":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unbounded"


UNBOUNDED = _UnboundedType()


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional scan over coupling (or atom number) at fixed d.

    Either coupling_values is given directly, or atom_counts plus a
    PhysicalSystem (d = 3 only), in which case each row's coupling is
    derived from the atom count.
    """

    dimension: int
    coupling_values: Tuple[float, ...] = ()
    engine: Engine = Engine.VARIATIONAL
    solver: SolverConfig = SolverConfig()
    atom_counts: Tuple[int, ...] = ()
    system: Optional[PhysicalSystem] = None

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        by_atoms = bool(self.atom_counts)
        if by_atoms == bool(self.coupling_values):
            raise ValueError("give exactly one of coupling_values or atom_counts")
        if by_atoms:
            if self.system is None:
                raise ValueError("atom_counts requires a PhysicalSystem")
            if self.dimension != 3:
                raise ValueError("atom-number sweeps are defined for d = 3 only")
            if any(n < 1 for n in self.atom_counts):
                raise ValueError("atom counts must be >= 1")
            if list(self.atom_counts) != sorted(self.atom_counts):
                raise ValueError("atom_counts must be sorted ascending")
        else:
            vals = self.coupling_values
            if not all(math.isfinite(g) for g in vals):
                raise ValueError("coupling values must be finite")
            if list(vals) != sorted(vals):
                raise ValueError("coupling_values must be sorted ascending")


@dataclass(frozen=True)
class SweepRow:
    """One sweep point; None marks a quantity the row did not produce.

    grid_status records the grid engine's outcome ('converged',
    'collapsed', 'nonconverged') when it ran; sweep rows never abort the
    whole sweep on a failed relaxation.
    """

    dimension: int
    coupling: float
    atom_count: Optional[int]
    classification: Classification
    sigma_min: Optional[float]
    rms_radius_variational: Optional[float]
    rms_radius_grid: Optional[float]
    energy_variational: Optional[float]
    energy_grid: Optional[float]
    barrier: Optional[float]
    grid_status: Optional[str] = None


@dataclass(frozen=True)
class PhaseCell:
    """Classification at one (d, g); boundary marks a change from the
    previous coupling in the same dimension's scan."""

    dimension: int
    coupling: float
    classification: Classification
    boundary: bool


def _variational_minimum(report: variational.StabilityReport):
    minima = [p for p in report.points if p.kind is PointKind.LOCAL_MIN]
    if not minima:
        return None
    return min(minima, key=lambda p: p.energy.total)


def _build_row(
    dimension: int,
    coupling: float,
    atom_count: Optional[int],
    engine: Engine,
    solver: SolverConfig,
) -> SweepRow:
    report = variational.classify(AnsatzProblem(dimension, coupling))
    best = _variational_minimum(report)
    sigma_min = best.sigma if best is not None else None
    rms_var = report.mean_radius
    energy_var = best.energy.total if best is not None else None

    rms_grid = energy_grid = None
    grid_status = None
    if engine in (Engine.GRID, Engine.BOTH):
        try:
            state = relax(solver, dimension, coupling)
        except CollapseDetected:
            grid_status = "collapsed"
        except NonConverged:
            grid_status = "nonconverged"
        else:
            grid_status = "converged"
            obs = observables(state)
            rms_grid = obs.rms_radius
            energy_grid = obs.energy.total

    return SweepRow(
        dimension=dimension,
        coupling=coupling,
        atom_count=atom_count,
        classification=report.classification,
        sigma_min=sigma_min,
        rms_radius_variational=rms_var,
        rms_radius_grid=rms_grid,
        energy_variational=energy_var,
        energy_grid=energy_grid,
        barrier=report.barrier_height,
        grid_status=grid_status if engine in (Engine.GRID, Engine.BOTH) else None,
    )


def radius_vs_coupling(spec: SweepSpec, threads: int = 1) -> List[SweepRow]:
    """Evaluate one row per coupling (or atom count), in input order.

    Args:
        spec: What to sweep and with which engine(s).
        threads: Worker threads; the output is identical for any value.

    Returns:
        Rows in the order of the input values.  A row whose grid
        relaxation collapses or stalls carries empty grid columns and a
        grid_status note instead of aborting the sweep.
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if spec.atom_counts:
        jobs = []
        for n in spec.atom_counts:
            sys_n = replace(spec.system, atom_count=n)
            jobs.append((coupling_from_physical(sys_n).g, n))
    else:
        jobs = [(g, None) for g in spec.coupling_values]

    def work(job: Tuple[float, Optional[int]]) -> SweepRow:
        g, n = job
        return _build_row(spec.dimension, g, n, spec.engine, spec.solver)

    if threads == 1 or len(jobs) <= 1:
        return [work(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, jobs))


def phase_diagram(
    d_list: Sequence[int], g_grid: Sequence[float]
) -> List[PhaseCell]:
    """Variational classification over a (dimension, coupling) grid.

    Cells are ordered by dimension then coupling; within each
    dimension's scan a cell is flagged as boundary when its
    classification differs from the previous coupling's.
    """
    if not d_list or not g_grid:
        raise ValueError("d_list and g_grid must be non-empty")
    if any(d not in (1, 2, 3) for d in d_list):
        raise ValueError("dimensions must be in {1, 2, 3}")
    cells: List[PhaseCell] = []
    for d in d_list:
        prev: Optional[Classification] = None
        for g in g_grid:
            c = variational.classify(AnsatzProblem(d, float(g))).classification
            cells.append(
                PhaseCell(
                    dimension=d,
                    coupling=float(g),
                    classification=c,
                    boundary=prev is not None and c is not prev,
                )
            )
            prev = c
    return cells


def max_boson_number(
    system: PhysicalSystem,
    dimension: int,
    engine: Engine,
    solver: Optional[SolverConfig] = None,
    bracket: Tuple[float, float] = DEFAULT_GRID_BRACKET,
    tol_g: float = DEFAULT_GRID_TOL,
) -> Union[int, _UnboundedType]:
    """Largest atom number the trap holds before collapse.

    d = 1 supports any population (no collapse).  d = 3 maps the chosen
    engine's critical coupling through the atom-number relation; the
    grid engine uses the center of its bisection bracket.  d = 2 has no
    physical coupling mapping here, and a single integer cannot report
    two engines, so Engine.BOTH is rejected.

    Args:
        system: Trap and scattering parameters; a_s < 0 required for d = 3.
        dimension: 1 or 3 (2 is rejected, see above).
        engine: Engine.VARIATIONAL or Engine.GRID.
        solver: Grid engine configuration (defaults when None).
        bracket: Initial (g_lo, g_hi) for the grid bisection.
        tol_g: Terminal bracket width for the grid bisection.

    Returns:
        Floor of the critical atom number, or UNBOUNDED for d = 1.
    """
    if dimension == 1:
        return UNBOUNDED
    if dimension == 2:
        raise ValueError("no physical coupling mapping exists for d = 2")
    if dimension != 3:
        raise ValueError(f"dimension must be 1, 2 or 3, got {dimension}")
    if engine is Engine.BOTH:
        raise ValueError("pick one engine for a single atom-number answer")
    if engine is Engine.VARIATIONAL:
        g_c = variational.critical_coupling(3).g_c
    else:
        lo, hi = critical_coupling_grid(
            solver if solver is not None else SolverConfig(),
            3, bracket[0], bracket[1], tol_g,
        )
        g_c = 0.5 * (lo + hi)
    return int(math.floor(critical_atom_number(system, g_c)))
