"""Incoherent averaging over the momentum spread of the atomic source."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from . import propagator as prop
from .distributions import Profile, comb_masses, split_beta
from .errors import InvalidParameter, NumericalFailure
from .oracle import ladder_amplitudes, second_moment

ENGINES = ("propagator", "oracle")


@dataclass(frozen=True)
class SourceSpec:
    mean_momentum: float  # recoils
    sigma: float  # rms width, recoils
    n_samples: int = 33
    span: float = 3.0  # half-width of the sampled window, in sigmas

    def __post_init__(self):
        if not self.sigma > 0:
            raise InvalidParameter(f"sigma must be > 0, got {self.sigma}")
        if self.n_samples < 3:
            raise InvalidParameter(f"n_samples must be >= 3, got {self.n_samples}")
        if not self.span > 0:
            raise InvalidParameter(f"span must be > 0, got {self.span}")


def sample_source(spec):
    """Equispaced initial momenta over mean +- span*sigma and their normalized Gaussian weights."""
    offsets = np.linspace(-spec.span * spec.sigma, spec.span * spec.sigma, spec.n_samples)
    w = np.exp(-0.5 * (offsets / spec.sigma) ** 2)
    return spec.mean_momentum + offsets, w / w.sum()


@dataclass
class AveragedDistribution:
    momentum: np.ndarray  # recoils, uniform
    density: np.ndarray  # per recoil
    nodes: np.ndarray  # initial momenta sampled
    weights: np.ndarray
    per_sample: np.ndarray = field(repr=False)  # densities, one row per node
    engine: str = "propagator"

    @property
    def profile(self):
        return Profile(self.momentum, self.density)

    def order_masses(self, beta=None):
        """Mass per comb order, +-1 recoil windows around 2 (j + beta)."""
        if beta is None:
            beta = split_beta(np.average(self.nodes, weights=self.weights) / 2.0)[1]
        dp = self.momentum[1] - self.momentum[0]
        return comb_masses(self.momentum, self.density * dp, beta)

    def energy(self):
        dp = self.momentum[1] - self.momentum[0]
        return float(np.sum(self.momentum**2 * self.density) * dp)


def _packet_components(grid, sigma_w, p_i):
    """Grid momenta and probabilities of a Gaussian packet of width sigma_w at p_i.

    Uses the continuous Fourier transform of exp(-x^2/2 sigma_w^2), whose
    momentum probability is exp(-(q - q0)^2 sigma_w^2).
    """
    q0 = grid.nearest_momentum(p_i)
    if sigma_w is None:
        return np.array([q0]), np.array([1.0])
    half = int(np.ceil(7.0 / (sigma_w * grid.dp)))
    q = q0 + grid.dp * np.arange(-half, half + 1)
    w = np.exp(-((q - q0) ** 2) * sigma_w**2)
    return q, w / w.sum()


def single_profile(schedule, p_i, engine="propagator", grid=None, sigma_w=None):
    """Final momentum density for one initial momentum, on the grid's momentum axis.

    `sigma_w` None means a plane wave. The oracle engine snaps p_i to the grid and
    expands a finite packet over its momentum components, which evolve independently.
    """
    grid = grid or prop.SpatialGrid()
    axis = sfft.fftshift(grid.p)
    if engine == "propagator":
        if sigma_w is None:
            state = prop.init_plane_wave(grid, p_i)
        else:
            state = prop.init_wavepacket(grid, sigma_w, p_i)
        try:
            state = prop.run_schedule(state, schedule)
        except NumericalFailure as exc:
            raise NumericalFailure(f"p_i = {p_i}: {exc}", step=exc.step) from exc
        return prop.momentum_distribution(state)[1]
    if engine == "oracle":
        l = schedule.l
        dens = np.zeros_like(axis)
        for q, w in zip(*_packet_components(grid, sigma_w, p_i)):
            d = ladder_amplitudes(schedule.n_kicks, l, q / 2.0, schedule.phi_d).distribution()
            dens += w * Profile.from_ladder(d, axis).density
        return Profile(axis, dens)
    raise InvalidParameter(f"engine must be one of {ENGINES}, got {engine!r}")


def _node_task(args):
    return single_profile(*args).density


def _map(tasks, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(_node_task, tasks))
    return [_node_task(t) for t in tasks]


def average_incoherently(schedule, spec, engine="propagator", grid=None, sigma_w=None, workers=1):
    """Weighted sum of final momentum densities over the sampled source."""
    if engine not in ENGINES:
        raise InvalidParameter(f"engine must be one of {ENGINES}, got {engine!r}")
    if engine == "oracle":
        schedule.l  # raises for non-integer l before any work
    grid = grid or prop.SpatialGrid()
    nodes, weights = sample_source(spec)
    rows = np.array(_map([(schedule, p, engine, grid, sigma_w) for p in nodes], workers))
    # fixed node order keeps the reduction bit-stable whatever the worker count
    density = np.zeros(rows.shape[1])
    for w, row in zip(weights, rows):
        density += w * row
    return AveragedDistribution(sfft.fftshift(grid.p), density, nodes, weights, rows, engine)


def scan_initial_momentum(
    schedule, p_values, spec=None, engine="propagator", grid=None, sigma_w=None, workers=1
):
    """Energy versus initial momentum.

    The scan energy is <(p - p_i)^2>, the kinetic energy in the frame where the
    atoms start at rest and the lattice moves at p_i (how the initial momentum is
    set experimentally); <p^2> is kept as `second_moment`. Without `spec` each point
    is a single initial momentum; with it the source is re-centred on each p_i and
    averaged. Returns (EnergyScan, distributions): LadderDistributions (oracle,
    plane wave), Profiles (propagator) or AveragedDistributions.
    """
    from .observables import EnergyScan

    p_values = np.asarray(p_values, dtype=float)
    if p_values.ndim != 1 or len(p_values) == 0:
        raise InvalidParameter("p_values must be a non-empty 1D sequence")
    steps = np.diff(p_values)
    if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
        raise InvalidParameter("p_values must be strictly monotone")
    if engine not in ENGINES:
        raise InvalidParameter(f"engine must be one of {ENGINES}, got {engine!r}")
    if engine == "oracle":
        schedule.l
    grid = grid or prop.SpatialGrid()
    moments, dists = [], []
    if spec is None:
        if engine == "oracle" and sigma_w is None:
            for p in p_values:
                amps = ladder_amplitudes(schedule.n_kicks, schedule.l, p / 2.0, schedule.phi_d)
                dists.append(amps.distribution())
        else:
            rows = _map([(schedule, p, engine, grid, sigma_w) for p in p_values], workers)
            axis = sfft.fftshift(grid.p)
            dists = [Profile(axis, row) for row in rows]
    else:
        for p in p_values:
            sub = SourceSpec(float(p), spec.sigma, spec.n_samples, spec.span)
            dists.append(average_incoherently(schedule, sub, engine, grid, sigma_w, workers))
    energy, second = [], []
    for p, d in zip(p_values, dists):
        mom, w = _samples(d)
        energy.append(float(np.sum((mom - p) ** 2 * w)))
        second.append(float(np.sum(mom**2 * w)))
    scan = EnergyScan(
        "p_i_recoils",
        p_values,
        np.array(energy),
        np.zeros(len(p_values)),
        {"engine": engine, "n": schedule.n_kicks, "l": schedule.l_real, "phi_d": schedule.phi_d},
        second_moment=np.array(second),
    )
    return scan, dists


def _samples(d):
    if isinstance(d, AveragedDistribution):
        dp = d.momentum[1] - d.momentum[0]
        return d.momentum, d.density * dp
    if isinstance(d, Profile):
        return d.momentum, d.weights
    return d.momenta, d.probabilities
