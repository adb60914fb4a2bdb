"""Closed-form ladder amplitudes at T = l T_T / 2 for integer l.

After n kicks from the comb element at quasimomentum beta,

    c_j = J_j(phi_d sin(n U) / sin U) i^j exp(-i j (n+1) U) exp(-i n pi beta^2 l),
    U   = pi (1 + 2 beta) l / 2,

and <p^2> = (2 hbar k_L)^2 sum_j |c_j|^2 (j + beta)^2.
"""

import math
from dataclasses import dataclass

import numpy as np

from .bessel import jn
from .distributions import LadderDistribution, split_beta
from .errors import InvalidParameter

SINGULAR_EPS = 1e-8
TAIL_MASS = 1e-12


def upsilon(beta, l):
    return 0.5 * math.pi * (1.0 + 2.0 * beta) * l


def kick_argument(n, ups, phi_d, eps=SINGULAR_EPS):
    """Effective single-kick strength phi_d sin(n U)/sin(U) of n kicks.

    At sin(U) = 0 the ratio is replaced by its limit n cos(nU)/cos(U), i.e.
    +-n, evaluated at the nearest multiple of pi.
    """
    if n < 1:
        raise InvalidParameter(f"n must be >= 1, got {n}")
    s = math.sin(ups)
    if abs(s) < eps:
        k = round(ups / math.pi)
        # cos(n k pi) / cos(k pi) = (-1)^((n-1) k)
        return phi_d * n * (-1.0 if ((n - 1) * k) % 2 else 1.0)
    return phi_d * math.sin(n * ups) / s


@dataclass
class LadderAmplitudes:
    orders: np.ndarray  # absolute comb indices, p = 2 (j + beta)
    c: np.ndarray
    beta: float  # reduced to [0, 1)
    n: int
    l: int
    phi_d: float
    argument: float

    @property
    def probabilities(self):
        return np.abs(self.c) ** 2

    def distribution(self):
        return LadderDistribution(self.beta, self.orders.copy(), self.probabilities, 0.0)


def _tail_halfwidth(arg):
    r = math.ceil(abs(arg)) + 20
    while True:
        edge = jn([r - 1, r], arg)
        if 2.0 * float((edge**2).sum()) < TAIL_MASS * 1e-2:
            return r
        r += 10


def ladder_amplitudes(n, l, beta, phi_d, j_range=None):
    """Amplitudes of every comb order after n kicks, starting at momentum 2 beta recoils.

    `beta` may carry an integer part; it is split off as a shift of the starting
    order so the returned `beta` lies in [0, 1). `j_range` = (lo, hi) fixes the
    absolute order range instead of choosing one wide enough for a tail below 1e-12.
    """
    if int(l) != l or l < 1:
        raise InvalidParameter(
            f"the closed form needs T = l T_T/2 with integer l >= 1, got l = {l}"
        )
    if int(n) != n or n < 0:
        raise InvalidParameter(f"n must be a non-negative integer, got {n}")
    if not (math.isfinite(beta) and math.isfinite(phi_d) and phi_d >= 0):
        raise InvalidParameter(f"beta and phi_d must be finite, phi_d >= 0; got {beta}, {phi_d}")
    l, n = int(l), int(n)
    start, b = split_beta(beta)
    ups = upsilon(b, l)
    arg = kick_argument(n, ups, phi_d) if n else 0.0
    if j_range is None:
        r = _tail_halfwidth(arg)
        orders = np.arange(start - r, start + r + 1)
    else:
        orders = np.arange(j_range[0], j_range[1] + 1)
    rel = orders - start
    phase = (1j) ** (rel % 4) * np.exp(-1j * rel * (n + 1) * ups) * np.exp(-1j * n * math.pi * b**2 * l)
    c = jn(rel, arg) * phase
    return LadderAmplitudes(orders, c, b, n, l, float(phi_d), arg)


def second_moment(amps):
    """Mean kinetic energy in recoil energies, 4 sum_j |c_j|^2 (j + beta)^2."""
    return float(4.0 * np.sum(amps.probabilities * (amps.orders + amps.beta) ** 2))


def oracle_distribution(schedule, beta):
    """Comb distribution from the closed form for a `KickSchedule`."""
    return ladder_amplitudes(schedule.n_kicks, schedule.l, beta, schedule.phi_d).distribution()
