"""Containers shared by the propagator, the closed form and the estimators."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter


def split_beta(beta):
    """Split a quasimomentum (units of 2 hbar k_L) into integer order and fraction in [0, 1)."""
    k = math.floor(beta)
    frac = beta - k
    if frac >= 1.0:  # rounding at the top of the interval
        k, frac = k + 1, 0.0
    return k, frac


@dataclass
class LadderDistribution:
    """Probabilities on the comb p = 2 (j + beta) recoils.

    `beta` is the fractional quasimomentum in [0, 1); `orders` are absolute comb
    indices, so an atom that started at p_i sits at order floor(p_i / 2).
    """

    beta: float
    orders: np.ndarray
    probabilities: np.ndarray
    off_comb_mass: float = 0.0

    @property
    def momenta(self):
        return 2.0 * (self.orders + self.beta)

    def total(self):
        return float(self.probabilities.sum() + self.off_comb_mass)

    def probability(self, j):
        idx = np.searchsorted(self.orders, j)
        if idx < len(self.orders) and self.orders[idx] == j:
            return float(self.probabilities[idx])
        return 0.0

    def as_dict(self):
        return {int(j): float(p) for j, p in zip(self.orders, self.probabilities)}

    def aligned(self, other):
        """Probabilities of self and other on their common order range."""
        lo = min(self.orders[0], other.orders[0])
        hi = max(self.orders[-1], other.orders[-1])
        a = np.zeros(hi - lo + 1)
        b = np.zeros(hi - lo + 1)
        a[self.orders - lo] = self.probabilities
        b[other.orders - lo] = other.probabilities
        return np.arange(lo, hi + 1), a, b


@dataclass
class Profile:
    """A probability density sampled on a uniform momentum axis (recoils)."""

    momentum: np.ndarray
    density: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.momentum = np.asarray(self.momentum, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        if self.momentum.shape != self.density.shape or self.momentum.ndim != 1:
            raise InvalidParameter("momentum and density must be 1D arrays of equal length")
        if len(self.momentum) < 2:
            raise InvalidParameter("a profile needs at least two samples")

    @property
    def spacing(self) -> float:
        return float(self.momentum[1] - self.momentum[0])

    @property
    def weights(self):
        """Probability per sample (density times spacing)."""
        return self.density * self.spacing

    def integral(self) -> float:
        return float(self.weights.sum())

    def normalized(self):
        s = self.integral()
        if not s > 0:
            raise InvalidParameter("cannot normalize a profile with zero integral")
        return Profile(self.momentum, self.density / s, dict(self.meta))

    def window(self, lo, hi):
        """The sub-profile with lo <= p <= hi (not renormalized)."""
        sel = (self.momentum >= lo) & (self.momentum <= hi)
        return Profile(self.momentum[sel], self.density[sel], dict(self.meta))

    @classmethod
    def from_ladder(cls, dist, momentum):
        """Deposit comb probabilities onto the nearest node of a uniform axis."""
        momentum = np.asarray(momentum, dtype=float)
        dp = momentum[1] - momentum[0]
        dens = np.zeros_like(momentum)
        idx = np.rint((dist.momenta - momentum[0]) / dp).astype(int)
        inside = (idx >= 0) & (idx < len(momentum))
        np.add.at(dens, idx[inside], dist.probabilities[inside] / dp)
        return cls(momentum, dens)


def comb_masses(momentum, weights, beta, orders=None):
    """Bin per-sample probabilities onto comb orders with +-1 recoil windows.

    Returns (orders, masses). Samples are assigned to the nearest comb centre
    2 (j + beta), ties going to the upper order.
    """
    j = np.floor((np.asarray(momentum) - 2.0 * beta) / 2.0 + 0.5).astype(int)
    if orders is None:
        orders = np.arange(j.min(), j.max() + 1)
    masses = np.zeros(len(orders))
    sel = (j >= orders[0]) & (j <= orders[-1])
    np.add.at(masses, j[sel] - orders[0], np.asarray(weights)[sel])
    return np.asarray(orders), masses
