"""Physical constants and the recoil unit system.

Only the CLI touches SI values; every other module works with momenta in
photon recoils (hbar*k_L), energies in recoil energies (hbar*omega_R) and
times in Talbot times.
"""

import math
from dataclasses import dataclass
from functools import cached_property

from scipy.constants import hbar, atomic_mass

from .errors import InvalidParameter

RB87_MASS_U = 86.909
DEFAULT_WAVELENGTH = 780e-9


@dataclass(frozen=True)
class PhysicalContext:
    atom_mass: float  # kg
    wavelength: float  # m

    @cached_property
    def k_L(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @cached_property
    def omega_R(self) -> float:
        return hbar * self.k_L**2 / (2.0 * self.atom_mass)

    @cached_property
    def talbot_time(self) -> float:
        return math.pi / (2.0 * self.omega_R)

    @cached_property
    def recoil_momentum(self) -> float:
        return hbar * self.k_L

    @cached_property
    def recoil_energy(self) -> float:
        return hbar * self.omega_R

    # conversions between SI and recoil units

    def momentum_to_recoils(self, p):
        return p / self.recoil_momentum

    def recoils_to_momentum(self, q):
        return q * self.recoil_momentum

    def energy_to_recoils(self, e):
        return e / self.recoil_energy

    def time_to_talbot(self, t):
        return t / self.talbot_time

    def talbot_to_time(self, t):
        return t * self.talbot_time

    def length_to_dimensionless(self, x):
        """Length in metres to position units of 1/k_L."""
        return x * self.k_L


def make_context(atom_mass=RB87_MASS_U * atomic_mass, wavelength=DEFAULT_WAVELENGTH):
    """Build a context from the atomic mass (kg) and the kick-laser wavelength (m)."""
    if not (atom_mass > 0 and wavelength > 0):
        raise InvalidParameter(
            f"atom_mass and wavelength must be positive, got {atom_mass!r}, {wavelength!r}"
        )
    return PhysicalContext(float(atom_mass), float(wavelength))
