"""Split-operator propagation of a wavefunction through a kick train.

Position is measured in 1/k_L, so the standing wave cos(2 k_L x) becomes
cos(2x) with lattice period pi. A box of `n_periods` lattice periods has
momentum spacing 2/n_periods recoils, which puts the comb p = 2j on nodes.
"""

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .distributions import LadderDistribution, Profile, split_beta
from .errors import InvalidParameter, NumericalFailure

# Mass farther than this from every comb centre counts as off-comb.
COMB_CORE_HALFWIDTH = 0.5


@dataclass(frozen=True)
class SpatialGrid:
    n_points: int = 2**16
    n_periods: int = 256

    def __post_init__(self):
        n, m = self.n_points, self.n_periods
        if n < 2 or n & (n - 1):
            raise InvalidParameter(f"n_points must be a power of two, got {n}")
        if m < 1 or n % m:
            raise InvalidParameter(f"n_periods must divide n_points, got {m}")

    @property
    def box_length(self) -> float:
        return self.n_periods * np.pi

    @property
    def dx(self) -> float:
        return self.box_length / self.n_points

    @property
    def dp(self) -> float:
        return 2.0 / self.n_periods

    @cached_property
    def x(self):
        return (np.arange(self.n_points) - self.n_points // 2) * self.dx

    @cached_property
    def p(self):
        """Momentum (recoils) of each FFT bin, in FFT order."""
        return sfft.fftfreq(self.n_points, d=1.0 / self.n_points) * self.dp

    @cached_property
    def cos2x(self):
        return np.cos(2.0 * self.x)

    def nearest_momentum(self, q):
        return round(q / self.dp) * self.dp


@dataclass(frozen=True)
class WaveState:
    """Position-space amplitudes with discrete norm sum |psi|^2 = 1.

    `beta` is the imprinted quasimomentum in units of 2 hbar k_L (not reduced).
    """

    amplitudes: np.ndarray = field(repr=False)
    grid: SpatialGrid
    beta: float

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def momentum_amplitudes(self):
        return sfft.fft(self.amplitudes, norm="ortho")

    def with_amplitudes(self, psi):
        return replace(self, amplitudes=psi)


def fidelity(a, b):
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2 / (a.norm() * b.norm()))


def init_wavepacket(grid, sigma_w, k_i=0.0):
    """Gaussian packet exp(-x^2 / 2 sigma_w^2) moving at the grid momentum nearest k_i.

    sigma_w is in units of 1/k_L (5 um at 780 nm is about 40.3); k_i in recoils.
    """
    if not np.pi <= sigma_w <= grid.box_length / 6:
        raise InvalidParameter(
            f"sigma_w must lie in [pi, box_length/6] = [{np.pi:.3g}, {grid.box_length / 6:.3g}]"
            f", got {sigma_w}"
        )
    q0 = grid.nearest_momentum(k_i)
    x = grid.x
    psi = np.exp(-(x**2) / (2.0 * sigma_w**2) + 1j * q0 * x)
    psi /= np.sqrt(np.vdot(psi, psi).real)
    return WaveState(psi, grid, q0 / 2.0)


def init_plane_wave(grid, k_i=0.0):
    """Exact plane wave at the grid momentum nearest k_i (an infinitely wide packet)."""
    q0 = grid.nearest_momentum(k_i)
    psi = np.exp(1j * q0 * grid.x) / np.sqrt(grid.n_points)
    return WaveState(psi, grid, q0 / 2.0)


def apply_kick(state, phi_d):
    if phi_d == 0:
        return state
    return state.with_amplitudes(state.amplitudes * np.exp(-1j * phi_d * state.grid.cos2x))


def _free_phase(grid, duration):
    # p^2/2m over hbar, in recoils and Talbot times, is (pi/2) q^2 per T_T
    return np.exp(-0.5j * np.pi * duration * grid.p**2)


def apply_free(state, duration):
    """Free evolution for `duration` Talbot times."""
    if duration == 0:
        return state
    phi = sfft.fft(state.amplitudes) * _free_phase(state.grid, duration)
    return state.with_amplitudes(sfft.ifft(phi))


def run_schedule(state, schedule):
    """Apply `schedule.n_kicks` Floquet periods (kick, then free evolution)."""
    if schedule.n_kicks == 0:
        return state
    grid = state.grid
    psi = state.amplitudes.copy()
    T = schedule.period
    if schedule.pulse_width_fraction == 0:
        kick = np.exp(-1j * schedule.phi_d * grid.cos2x)
        free = _free_phase(grid, T)
        for step in range(schedule.n_kicks):
            psi = sfft.ifft(sfft.fft(psi * kick) * free)
            _check_finite(psi, step)
    else:
        s = schedule.substeps
        tau = schedule.pulse_width_fraction * T
        # Strang splitting of the pulse: half drift, kick of area phi_d/s, half drift
        kick = np.exp(-1j * (schedule.phi_d / s) * grid.cos2x)
        half = _free_phase(grid, tau / (2 * s))
        rest = _free_phase(grid, T - tau)
        for step in range(schedule.n_kicks):
            phi = sfft.fft(psi)
            for _ in range(s):
                psi = sfft.ifft(phi * half) * kick
                phi = sfft.fft(psi) * half
            psi = sfft.ifft(phi * rest)
            _check_finite(psi, step)
    return state.with_amplitudes(psi)


def _check_finite(psi, step):
    if not np.all(np.isfinite(psi)):
        raise NumericalFailure(f"non-finite amplitudes after kick {step + 1}", step=step + 1)


def momentum_distribution(state, core_halfwidth=COMB_CORE_HALFWIDTH):
    """Comb-order populations and the fine momentum density of a state.

    Each comb order collects the grid nodes within `core_halfwidth` recoils of
    its centre 2 (j + beta); anything else is reported as off-comb mass.
    Returns (LadderDistribution, Profile).
    """
    grid = state.grid
    prob = np.abs(state.momentum_amplitudes()) ** 2
    q = sfft.fftshift(grid.p)
    prob = sfft.fftshift(prob)
    profile = Profile(q, prob / grid.dp, {"beta": state.beta})

    _, beta = split_beta(state.beta)
    offset = (q - 2.0 * beta) / 2.0
    j = np.floor(offset + 0.5).astype(int)
    core = np.abs(offset - j) * 2.0 <= core_halfwidth
    orders = np.arange(j.min(), j.max() + 1)
    masses = np.bincount(j[core] - orders[0], weights=prob[core], minlength=len(orders))
    ladder = LadderDistribution(beta, orders, masses, float(prob[~core].sum()))
    return ladder, profile
