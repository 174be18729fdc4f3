"""Exact kinematics of a laser-locked Compton-frequency clock.

A particle is driven back and forth by n-photon-pair kicks from two
counterpropagating beams whose lab frequencies omega_plus and omega_minus
are locked so that their difference equals the modulation frequency
omega_m = omega_L / N, with omega_L the geometric mean.  All quantities
follow in closed form from the order n and the (rational) divisor N:

    beta        = 1 / sqrt(1 + 4 N^2)       speed between kicks
    beta gamma  = 1 / (2 N) = n omega_L / omega_C
    omega_L     = omega_C / (2 n N)
    omega_m     = omega_C / (2 n N^2)
    omega_pm    = omega_L sqrt((1 +- beta)/(1 -+ beta))

The free-evolution and kick phases are equal and opposite:
    phi = -+ 4 omega_C T beta^2 / (1 + beta^2) = -+ 2 omega_C T / (1 + 2 N^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .constants import C, H, CODATA2010

__all__ = [
    "ClockConfig",
    "ClockSolution",
    "FrameKinematics",
    "solve_lock",
    "beamsplitter_frame",
    "clock_phases",
    "alpha_from_compton",
    "mass_from_compton",
    "chain_compton_frequency",
]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    raise TypeError(f"cannot interpret {value!r} as an exact ratio")


@dataclass(frozen=True)
class ClockConfig:
    """Lock settings: kick order, frequency divisor, Compton scale, duration."""

    bragg_order_n: int
    divisor_N: Fraction          # omega_L / omega_m, exact rational
    omega_compton: float         # [rad/s]
    T: float                     # half-period between kicks [s]

    def __post_init__(self):
        if self.bragg_order_n < 1:
            raise ValueError("bragg_order_n must be a positive integer")
        n_div = _as_fraction(self.divisor_N)
        if n_div <= 0:
            raise ValueError("divisor_N must be positive")
        if self.omega_compton <= 0.0 or self.T <= 0.0:
            raise ValueError("omega_compton and T must be positive")
        object.__setattr__(self, "divisor_N", n_div)


@dataclass(frozen=True)
class ClockSolution:
    """Closed-form lock point for one configuration."""

    beta: float                # one-kick speed, units of c
    gamma: float
    beta_double: float         # speed after two same-direction kicks
    gamma_double: float
    omega_laser: float         # geometric mean of the two beams [rad/s]
    omega_modulation: float    # beam difference frequency [rad/s]
    omega_plus: float          # blue-shifted beam [rad/s]
    omega_minus: float         # red-shifted beam [rad/s]
    omega_compton: float       # [rad/s]
    phase_free: float          # free-evolution phase over T [rad]
    phase_kick: float          # kick-imprinted phase over T [rad]

    def ratios(self) -> dict:
        """Frequencies as fractions of the Compton frequency."""
        w = self.omega_compton
        return {
            "beta": self.beta,
            "beta_double": self.beta_double,
            "omega_m_over_omega_C": self.omega_modulation / w,
            "omega_L_over_omega_C": self.omega_laser / w,
            "omega_plus_over_omega_C": self.omega_plus / w,
            "omega_minus_over_omega_C": self.omega_minus / w,
        }


def solve_lock(cfg: ClockConfig) -> ClockSolution:
    """Solve the lock exactly; rational steps stay rational until the root."""
    n = cfg.bragg_order_n
    n_div = cfg.divisor_N
    beta_sq = Fraction(1) / (1 + 4 * n_div**2)
    beta = math.sqrt(float(beta_sq))
    gamma = 1.0 / math.sqrt(float(1 - beta_sq))
    beta_double = 2.0 * beta / (1.0 + float(beta_sq))
    gamma_double = float((1 + beta_sq) / (1 - beta_sq))
    ratio_laser = Fraction(1, 2 * n) / n_div
    ratio_mod = Fraction(1, 2 * n) / n_div**2
    omega_laser = float(ratio_laser) * cfg.omega_compton
    omega_mod = float(ratio_mod) * cfg.omega_compton
    doppler = math.sqrt((1.0 + beta) / (1.0 - beta))
    phase = 2.0 * cfg.omega_compton * cfg.T / float(1 + 2 * n_div**2)
    return ClockSolution(
        beta=beta,
        gamma=gamma,
        beta_double=beta_double,
        gamma_double=gamma_double,
        omega_laser=omega_laser,
        omega_modulation=omega_mod,
        omega_plus=omega_laser * doppler,
        omega_minus=omega_laser / doppler,
        omega_compton=cfg.omega_compton,
        phase_free=-phase,
        phase_kick=+phase,
    )


@dataclass(frozen=True)
class FrameKinematics:
    """Kick kinematics for given laser and Compton frequencies."""

    beta: float
    gamma: float
    beta_double: float
    gamma_double: float
    omega_plus: float
    omega_minus: float


def beamsplitter_frame(n: int, omega_laser: float, omega_compton: float) -> FrameKinematics:
    """Kinematics from the resonance beta gamma = n omega_L / omega_C.

    The two lab beam frequencies omega_pm = omega_L sqrt((1+-beta)/(1-+beta))
    both appear Doppler-shifted to omega_L in the frame moving at beta, and
    their product is omega_L^2 at any beta.
    """
    if n < 1 or omega_laser <= 0.0 or omega_compton <= 0.0:
        raise ValueError("n, omega_laser and omega_compton must be positive")
    r = n * omega_laser / omega_compton
    gamma = math.sqrt(1.0 + r**2)
    beta = r / gamma
    doppler = math.sqrt((1.0 + beta) / (1.0 - beta))
    return FrameKinematics(
        beta=beta,
        gamma=gamma,
        beta_double=2.0 * beta / (1.0 + beta**2),
        gamma_double=(1.0 + beta**2) / (1.0 - beta**2),
        omega_plus=omega_laser * doppler,
        omega_minus=omega_laser / doppler,
    )


def clock_phases(cfg: ClockConfig) -> tuple[float, float]:
    """(free-evolution, kick) phases over one interval T; they cancel."""
    sol = solve_lock(cfg)
    return sol.phase_free, sol.phase_kick


def alpha_from_compton(nu_compton: float, atom_relative_mass: float,
                       rydberg: float = CODATA2010.Rinf,
                       electron_relative_mass: float = CODATA2010.Ar_e,
                       c: float = C) -> float:
    """Fine-structure constant from a measured atomic Compton frequency.

    alpha^2 = 2 Rinf c / nu_C * A_r(atom) / A_r(e); ties an optical
    frequency measurement to alpha through the Rydberg constant and the
    relative-mass ratio, with no reliance on the mole or the kilogram.
    """
    if nu_compton <= 0.0 or atom_relative_mass <= 0.0:
        raise ValueError("frequency and relative mass must be positive")
    alpha_sq = (2.0 * rydberg * c / nu_compton
                * atom_relative_mass / electron_relative_mass)
    return math.sqrt(alpha_sq)


def mass_from_compton(nu_compton: float, h: float = H, c: float = C) -> float:
    """Mass h nu_C / c^2 [kg] realized by a frequency measurement."""
    if nu_compton <= 0.0:
        raise ValueError("frequency must be positive")
    return h * nu_compton / c**2


def chain_compton_frequency(nu_ref: float, counter_ratio: float,
                            dds_tuning: int, dds_bits: int, order_n: int) -> float:
    """Compton frequency synthesized by the frequency chain.

    nu_C = 4 n N_c^2 / N_DDS * nu_ref with N_c the counter ratio and
    N_DDS = dds_tuning / 2^dds_bits the direct-digital-synthesis fraction.
    """
    n_dds = dds_tuning / 2.0**dds_bits
    return 4.0 * order_n * counter_ratio**2 / n_dds * nu_ref
