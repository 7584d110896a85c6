"""Conversions between laboratory trap parameters and oscillator units.

Everything downstream of this module works in trap oscillator units:
lengths in a_ho = sqrt(hbar / (m * omega)) and energies in hbar * omega,
so the whole analysis is controlled by a single dimensionless coupling g.
In three dimensions the contact interaction B = 4*pi*hbar^2*a_s/m gives

    g = 4 * pi * N * a_s / a_ho.

No comparable physical normalization exists for the zero-range coupling
in d != 3, so there g is supplied directly as a dimensionless number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA, J*s and kg.
HBAR = 1.0545718e-34
ATOMIC_MASS = 1.6605391e-27


@dataclass(frozen=True)
class PhysicalSystem:
    """Laboratory description of a harmonically trapped dilute Bose gas.

    Attributes:
        mass: Single-atom mass in kg.
        trap_frequency: Angular trap frequency omega in rad/s.
        scattering_length: s-wave scattering length in m; sign carries the
            character of the interaction (negative = attractive).
        atom_count: Number of condensed atoms N.
    """

    mass: float
    trap_frequency: float
    scattering_length: float
    atom_count: int = 1

    def __post_init__(self) -> None:
        if not (self.mass > 0.0 and math.isfinite(self.mass)):
            raise ValueError(f"mass must be positive and finite, got {self.mass}")
        if not (self.trap_frequency > 0.0 and math.isfinite(self.trap_frequency)):
            raise ValueError(
                f"trap_frequency must be positive and finite, got {self.trap_frequency}"
            )
        if not math.isfinite(self.scattering_length):
            raise ValueError("scattering_length must be finite")
        if self.atom_count < 1:
            raise ValueError(f"atom_count must be >= 1, got {self.atom_count}")


@dataclass(frozen=True)
class Coupling:
    """Dimensionless interaction strength g in d spatial dimensions."""

    dimension: int
    g: float

    def __post_init__(self) -> None:
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not math.isfinite(self.g):
            raise ValueError("coupling must be finite")


def oscillator_length(system: PhysicalSystem) -> float:
    """Harmonic oscillator length a_ho = sqrt(hbar / (m * omega)) in m."""
    return math.sqrt(HBAR / (system.mass * system.trap_frequency))


def coupling_from_physical(system: PhysicalSystem, dimension: int = 3) -> Coupling:
    """Dimensionless 3D coupling g = 4*pi*N*a_s/a_ho for a physical system.

    Args:
        system: Trap and atom parameters.
        dimension: Must be 3; the contact coupling has a physical
            normalization only there.  In d != 3 callers supply g directly.

    Returns:
        Coupling with d = 3.

    Raises:
        ValueError: If dimension != 3.
    """
    if dimension != 3:
        raise ValueError(
            "the physical contact coupling is defined only in 3 dimensions; "
            f"supply g directly for d = {dimension}"
        )
    a_ho = oscillator_length(system)
    g = 4.0 * math.pi * system.atom_count * system.scattering_length / a_ho
    return Coupling(dimension=3, g=g)


def critical_atom_number(system: PhysicalSystem, g_critical: float) -> float:
    """Largest atom number compatible with a critical coupling g_critical.

    Inverts g = 4*pi*N*a_s/a_ho at g = g_critical:

        N_c = |g_critical| * a_ho / (4*pi*|a_s|).

    Returns the real-valued N_c; callers floor it for reporting.

    Raises:
        ValueError: If the scattering length is not negative (no maximum
            exists for repulsive or ideal gases) or g_critical >= 0.
    """
    if system.scattering_length >= 0.0:
        raise ValueError(
            "a maximum atom number exists only for attractive interactions "
            f"(a_s < 0), got a_s = {system.scattering_length}"
        )
    if g_critical >= 0.0:
        raise ValueError(f"g_critical must be negative, got {g_critical}")
    a_ho = oscillator_length(system)
    return abs(g_critical) * a_ho / (4.0 * math.pi * abs(system.scattering_length))
