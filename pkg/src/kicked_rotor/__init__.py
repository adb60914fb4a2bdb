"""Atom-optics delta-kicked rotor: Floquet propagation, closed-form ladder
amplitudes, incoherent source averaging and energy estimators.

Everything below the CLI works in recoil units: momentum in hbar*k_L,
energy in hbar*omega_R, time in Talbot times, position in 1/k_L.
"""

from .units import PhysicalContext, make_context, RB87_MASS_U
from .schedule import KickSchedule
from .distributions import LadderDistribution, Profile
from .propagator import (
    SpatialGrid,
    WaveState,
    init_wavepacket,
    apply_kick,
    apply_free,
    run_schedule,
    momentum_distribution,
)
from .oracle import (
    LadderAmplitudes,
    upsilon,
    kick_argument,
    ladder_amplitudes,
    second_moment,
    oracle_distribution,
)
from .ensemble import (
    SourceSpec,
    AveragedDistribution,
    sample_source,
    average_incoherently,
    scan_initial_momentum,
)
from .observables import (
    EnergyScan,
    GaussianFitResult,
    direct_variance,
    fit_orders,
    repeat_statistics,
    reduce_image,
)
from .errors import InvalidParameter, NumericalFailure

__version__ = "0.1.0"
