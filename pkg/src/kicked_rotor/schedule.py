import math
from dataclasses import dataclass

from .errors import InvalidParameter

# 33.15 us at Rb-87/780 nm is l = 1.0008; a 0.2 % band treats it as l = 1.
INTEGER_L_RTOL = 2e-3


@dataclass(frozen=True)
class KickSchedule:
    """A train of `n_kicks` kicks of area `phi_d`, one every `period` Talbot times.

    `pulse_width_fraction` is tau/T; zero means ideal delta kicks.
    """

    n_kicks: int
    period: float
    phi_d: float
    pulse_width_fraction: float = 0.0
    substeps: int = 32

    def __post_init__(self):
        if self.n_kicks < 0:
            raise InvalidParameter(f"n_kicks must be >= 0, got {self.n_kicks}")
        if not self.period > 0:
            raise InvalidParameter(f"period must be > 0, got {self.period}")
        if not self.phi_d >= 0:
            raise InvalidParameter(f"phi_d must be >= 0, got {self.phi_d}")
        if not 0 <= self.pulse_width_fraction < 0.1:
            raise InvalidParameter(
                f"pulse_width_fraction must lie in [0, 0.1), got {self.pulse_width_fraction}"
            )
        if self.substeps < 1:
            raise InvalidParameter(f"substeps must be >= 1, got {self.substeps}")

    @classmethod
    def from_l(cls, n_kicks, l, phi_d, **kw):
        """Schedule with period T = l * T_T / 2."""
        return cls(n_kicks, l / 2.0, phi_d, **kw)

    @property
    def l_real(self) -> float:
        return 2.0 * self.period

    @property
    def is_talbot_multiple(self) -> bool:
        """True when T is a half-integer multiple of T_T, where the closed form applies."""
        l = self.l_real
        k = round(l)
        return k >= 1 and math.isclose(l, k, rel_tol=INTEGER_L_RTOL)

    @property
    def l(self) -> int:
        if not self.is_talbot_multiple:
            raise InvalidParameter(
                f"period {self.period} T_T is not a half-integer multiple of the Talbot "
                f"time (l = {self.l_real:.6g})"
            )
        return int(round(self.l_real))


def to_dimensionless(ctx, period_s, n_kicks, phi_d, pulse_width_s=0.0, substeps=32):
    """Convert an SI period (and pulse width) into a `KickSchedule`."""
    if not period_s > 0:
        raise InvalidParameter(f"period must be > 0, got {period_s}")
    return KickSchedule(
        n_kicks=int(n_kicks),
        period=ctx.time_to_talbot(period_s),
        phi_d=float(phi_d),
        pulse_width_fraction=pulse_width_s / period_s,
        substeps=substeps,
    )
