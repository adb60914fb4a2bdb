"""Energy estimators: direct second moment, per-order Gaussian fits, repeat statistics."""

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import LadderDistribution, Profile, comb_masses, split_beta
from .errors import InvalidParameter

FIT_MAX_ITER = 200
FIT_XTOL = 1e-8
# Orders whose seeded mass falls below this fraction of the total are not fitted.
FIT_MIN_MASS = 1e-6
DEFAULT_WINDOW_MASS = 1e-4


@dataclass
class EnergyScan:
    parameter: str
    values: np.ndarray
    energy: np.ndarray  # recoil energies
    uncertainty: np.ndarray
    meta: dict = field(default_factory=dict)
    second_moment: np.ndarray = None  # <p^2>, when energy is taken about p_i

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.energy = np.asarray(self.energy, dtype=float)
        self.uncertainty = np.asarray(self.uncertainty, dtype=float)
        if not (len(self.values) == len(self.energy) == len(self.uncertainty)):
            raise InvalidParameter("values, energy and uncertainty must have equal lengths")
        if np.any(self.energy < 0):
            raise InvalidParameter("energies must be non-negative")


def _samples(dist):
    if isinstance(dist, LadderDistribution):
        return dist.momenta, dist.probabilities
    if isinstance(dist, Profile):
        return dist.momentum, dist.weights
    raise InvalidParameter(f"unsupported distribution type {type(dist).__name__}")


def default_window(dist, min_mass=DEFAULT_WINDOW_MASS):
    """Half-width reaching two orders beyond the outermost order holding > min_mass."""
    p, w = _samples(dist)
    orders, masses = comb_masses(p, w, 0.0)
    populated = orders[masses > min_mass]
    if len(populated) == 0:
        raise InvalidParameter("no comb order holds enough mass to define a window")
    return 2.0 * (np.abs(populated).max() + 2) + 1.0


def direct_variance(dist, window=None, center=0.0):
    """<(p - center)^2> in recoil units, i.e. mean kinetic energy in recoil energies.

    `window` is None (whole axis), "auto" (see `default_window`), a half-width
    |p| <= window, or a (lo, hi) pair. The moment is normalized to the mass
    inside the window.
    """
    p, w = _samples(dist)
    if window is None:
        sel = np.ones(len(p), dtype=bool)
    else:
        if isinstance(window, str):
            if window != "auto":
                raise InvalidParameter(f"unknown window {window!r}")
            window = default_window(dist)
        lo, hi = (-window, window) if np.isscalar(window) else window
        sel = (p >= lo) & (p <= hi)
    mass = w[sel].sum()
    if not sel.any() or not mass > 0:
        raise InvalidParameter("window contains no probability")
    return float(np.sum((p[sel] - center) ** 2 * w[sel]) / mass)


@dataclass
class GaussianFitResult:
    """One Gaussian per comb order; `areas` are probability masses."""

    orders: np.ndarray
    centers: np.ndarray
    areas: np.ndarray
    widths: np.ndarray
    fitted: np.ndarray  # False for orders too empty to fit (area fixed at 0)
    converged: bool
    iterations: int
    residual_norm: float

    @property
    def energy(self):
        return self.energy_about(0.0)

    def energy_about(self, center):
        """Second moment of the fitted model about `center`."""
        a = self.areas
        return float(np.sum(a * ((self.centers - center) ** 2 + self.widths**2)) / a.sum())

    def model(self, p):
        p = np.asarray(p, dtype=float)
        return _gauss_sum(p, self.areas[self.fitted], self.centers[self.fitted], self.widths[self.fitted])


def _gauss_sum(p, a, c, s):
    z = (p[:, None] - c) / s
    return (a / (math.sqrt(2 * math.pi) * s) * np.exp(-0.5 * z * z)).sum(axis=1)


def _residual_and_jacobian(theta, p, y):
    a, c, s = theta[0::3], theta[1::3], theta[2::3]
    z = (p[:, None] - c) / s
    g = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * s)
    r = (a * g).sum(axis=1) - y
    J = np.empty((len(p), len(theta)))
    J[:, 0::3] = g
    J[:, 1::3] = a * g * z / s
    J[:, 2::3] = a * g * (z * z - 1.0) / s
    return r, J


def _levenberg_marquardt(theta, p, y, lower, upper):
    lam = 1e-3
    r, J = _residual_and_jacobian(theta, p, y)
    cost = r @ r
    converged = False
    it = 0
    for it in range(1, FIT_MAX_ITER + 1):
        A = J.T @ J
        g = J.T @ r
        d = np.diag(A).copy()
        d = np.maximum(d, 1e-12 * d.max())
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(d), -g)
            except np.linalg.LinAlgError:
                step = np.zeros_like(theta)
            trial = np.clip(theta + step, lower, upper)
            r_t, J_t = _residual_and_jacobian(trial, p, y)
            cost_t = r_t @ r_t
            if cost_t <= cost:
                break
            lam *= 10.0
            if lam > 1e16:
                # no descent direction left: at a (bounded) minimum
                return theta, True, it, math.sqrt(cost)
        moved = np.linalg.norm(trial - theta)
        theta, r, J, cost = trial, r_t, J_t, cost_t
        lam = max(lam / 10.0, 1e-12)
        if moved <= FIT_XTOL * (np.linalg.norm(theta) + FIT_XTOL):
            converged = True
            break
    return theta, converged, it, math.sqrt(cost)


def fit_orders(dist, expected_beta, max_order, seed_width=None):
    """Fit one Gaussian per comb order j in [-max_order, max_order] around the start order.

    Centres are seeded at 2 (j + beta) and kept within +-0.5 recoil of the seed;
    areas from the +-1 recoil comb-bin masses; widths from `seed_width` (the source
    sigma) or the rms of the most populated order. Returns (result, fitted energy).
    """
    if not isinstance(dist, Profile):
        raise InvalidParameter("fit_orders needs a fine-grained Profile")
    p, y = dist.momentum, dist.density
    if not np.any(y > 0):
        raise InvalidParameter("cannot fit an empty distribution")
    start, beta = split_beta(expected_beta)
    orders = np.arange(start - max_order, start + max_order + 1)
    seeds = 2.0 * (orders + beta)
    _, masses = comb_masses(p, dist.weights, beta, orders)
    fitted = masses > FIT_MIN_MASS * dist.integral()
    if not fitted.any():
        raise InvalidParameter("no order holds enough mass to fit")

    dp = dist.spacing
    if seed_width is None:
        k = np.argmax(masses)
        sel = np.abs(p - seeds[k]) < 1.0
        mu = np.average(p[sel], weights=y[sel])
        seed_width = math.sqrt(np.average((p[sel] - mu) ** 2, weights=y[sel]))
    seed_width = max(seed_width, 1.5 * dp)

    act = np.flatnonzero(fitted)
    theta = np.column_stack([masses[act], seeds[act], np.full(len(act), seed_width)]).ravel()
    lower = np.column_stack([np.zeros(len(act)), seeds[act] - 0.5, np.full(len(act), dp / 4)]).ravel()
    upper = np.column_stack([np.full(len(act), np.inf), seeds[act] + 0.5, np.full(len(act), 1.0)]).ravel()
    span = (p >= seeds[act[0]] - 1.0) & (p <= seeds[act[-1]] + 1.0)
    theta, converged, iters, res = _levenberg_marquardt(theta, p[span], y[span], lower, upper)

    areas = np.zeros(len(orders))
    centers = seeds.copy()
    widths = np.full(len(orders), seed_width)
    areas[act], centers[act], widths[act] = theta[0::3], theta[1::3], theta[2::3]
    result = GaussianFitResult(orders, centers, areas, widths, fitted, converged, iters, res)
    return result, result.energy


def repeat_statistics(scans):
    """Mean and sample standard deviation across repeated scans on one grid."""
    if len(scans) < 2:
        raise InvalidParameter("need at least two repeats")
    first = scans[0]
    for s in scans[1:]:
        if s.parameter != first.parameter or not np.array_equal(s.values, first.values):
            raise InvalidParameter("repeats must share the same parameter grid")
    e = np.array([s.energy for s in scans])
    second = None
    if all(s.second_moment is not None for s in scans):
        second = np.mean([s.second_moment for s in scans], axis=0)
    return EnergyScan(
        first.parameter, first.values.copy(), e.mean(axis=0), e.std(axis=0, ddof=1),
        dict(first.meta, repeats=len(scans)), second,
    )


def reduce_image(matrix, axis=0, spacing=1.0):
    """Sum a 2D density along `axis` and normalize the profile to unit integral."""
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2:
        raise InvalidParameter("image must be a 2D matrix")
    if np.any(m < 0):
        raise InvalidParameter("image must be non-negative")
    prof = m.sum(axis=axis)
    total = prof.sum() * spacing
    if not total > 0:
        raise InvalidParameter("image is all zero")
    return prof / total
