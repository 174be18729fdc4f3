"""Electron interferometry in a harmonic axial trap.

The axial motion z(t) = C sin(w t) + D cos(w t) is kicked four times by
photon recoils with signs (+,-,+,-) spaced T apart.  A kick of sign s at
time t_k shifts the quadrature pair by

    C -> C + s (v_kick / w) cos(w t_k),   D -> D - s (v_kick / w) sin(w t_k)

and imprints a laser phase s k z(t_k).  At w T = pi/2 the kicked arm
returns exactly onto the unkicked reference after the fourth kick, for any
initial amplitude and phase.  The arm phase is the action difference over
the three inter-kick segments plus the imprinted phases; everything below
is expressed through the recoil frequency omega_r = hbar k^2 / (2 m), so
the electron mass never appears explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .constants import E_CHARGE, H, HBAR, KB, A0 as BOHR_RADIUS, RINF, C as C_LIGHT, EPS0, get_species
from .errors import PerturbationInvalid

__all__ = [
    "TrapConfig",
    "ElectronState",
    "TrapTrajectory",
    "trajectories",
    "single_phase",
    "single_phase_expansion",
    "double_diffraction_sum",
    "double_diffraction_phase",
    "anharmonic_shift",
    "closure_gap_and_temperature",
    "damping_optimum",
    "axial_damping_rate",
    "charged_rabi",
    "hydrogen_two_photon_rabi",
    "charged_to_neutral_ratio",
]

_M_E = get_species("electron").mass
_ANHARM_WARN = 1e-2


@dataclass(frozen=True)
class TrapConfig:
    """Axial trap: frequency, electrode scale, anharmonicity, damping."""

    omega_z: float               # axial frequency [rad/s]
    d: float                     # electrode length scale [m]
    D3: float = 0.0              # cubic potential coefficient, dimensionless
    D4: float = 0.0              # quartic potential coefficient, dimensionless
    gamma: float = 0.0           # energy damping rate [rad/s]
    R_loss: float | None = None  # detection resistor [ohm], None if absent

    def __post_init__(self):
        if self.omega_z <= 0.0 or self.d <= 0.0:
            raise ValueError("omega_z and d must be positive")
        if self.gamma < 0.0:
            raise ValueError("gamma must be nonnegative")
        if self.R_loss is not None and self.R_loss <= 0.0:
            raise ValueError("R_loss must be positive when present")
        if max(abs(self.D3), abs(self.D4)) > _ANHARM_WARN:
            warnings.warn(
                f"anharmonic coefficients |D3|={abs(self.D3):.3g}, "
                f"|D4|={abs(self.D4):.3g} exceed the perturbative regime",
                stacklevel=2)


@dataclass(frozen=True)
class ElectronState:
    """Initial axial motion z(t) = A0 sin(omega_z t + phi0)."""

    A0: float      # amplitude [m]
    phi0: float    # phase [rad]

    def __post_init__(self):
        if self.A0 < 0.0:
            raise ValueError("A0 must be nonnegative")


def _segment_action(w: float, c: float, d: float, t1: float, t2: float) -> float:
    """Specific action integral of (v^2 - w^2 z^2)/2 over one segment."""
    return (w / 4.0) * ((c * c - d * d) * (math.sin(2 * w * t2) - math.sin(2 * w * t1))
                        + 2.0 * c * d * (math.cos(2 * w * t2) - math.cos(2 * w * t1)))


def _arm_phase(w: float, T: float, signs, v_init: float, phi0: float,
               k: float, hbar_over_m: float) -> float:
    """Kicked-arm phase relative to the unkicked reference state."""
    kick_v = hbar_over_m * k
    c = v_init / w * math.cos(phi0)
    d = v_init / w * math.sin(phi0)
    c_ref, d_ref = c, d
    action = 0.0
    laser = 0.0
    times = [0.0, T, 2.0 * T, 3.0 * T]
    for i, (tk, sgn) in enumerate(zip(times, signs)):
        laser += sgn * k * (c * math.sin(w * tk) + d * math.cos(w * tk))
        c += sgn * kick_v / w * math.cos(w * tk)
        d -= sgn * kick_v / w * math.sin(w * tk)
        if i < 3:
            action += (_segment_action(w, c, d, times[i], times[i + 1])
                       - _segment_action(w, c_ref, d_ref, times[i], times[i + 1]))
    return action / hbar_over_m + laser


@dataclass(frozen=True)
class TrapTrajectory:
    """Piecewise quadratures of one kicked arm over the full sequence."""

    segments: tuple        # ((t0, t1, C, D), ...)
    z_final: float         # position at 4T [m]
    v_final: float         # velocity at 4T [m/s]
    closure_error: float   # quadrature distance to the unkicked state [m]


def trajectories(state: ElectronState, trap: TrapConfig, k: float, T: float,
                 arm: int = +1, mass: float = _M_E) -> TrapTrajectory:
    """Quadrature history of one arm under kicks (+,-,+,-) (arm=+1) or the
    sign-flipped pattern (arm=-1), spaced T apart starting at t=0."""
    if arm not in (+1, -1):
        raise ValueError("arm must be +1 or -1")
    w = trap.omega_z
    kick_v = HBAR * k / mass
    c = state.A0 * math.cos(state.phi0)
    d = state.A0 * math.sin(state.phi0)
    c_ref, d_ref = c, d
    segments = []
    times = [0.0, T, 2.0 * T, 3.0 * T]
    signs = [arm, -arm, arm, -arm]
    for i, (tk, sgn) in enumerate(zip(times, signs)):
        c += sgn * kick_v / w * math.cos(w * tk)
        d -= sgn * kick_v / w * math.sin(w * tk)
        t_next = times[i + 1] if i < 3 else 4.0 * T
        segments.append((tk, t_next, c, d))
    t_end = 4.0 * T
    z_end = c * math.sin(w * t_end) + d * math.cos(w * t_end)
    v_end = w * (c * math.cos(w * t_end) - d * math.sin(w * t_end))
    closure = math.hypot(c - c_ref, d - d_ref)
    return TrapTrajectory(tuple(segments), z_end, v_end, closure)


def _check_detuning(delta_z: float, T: float) -> None:
    if abs(delta_z * T) > 0.1:
        raise PerturbationInvalid(
            f"trap detuning |delta_z T| = {abs(delta_z * T):.3g} exceeds 0.1; "
            f"the four-kick sequence no longer nearly closes")


def single_phase(omega_r: float, T: float, k0_over_k: float = 0.0,
                 phi0: float = 0.0, delta_z: float = 0.0) -> float:
    """Exact single-diffraction phase of the kicked arm against the
    unkicked reference.

    The trap frequency is pi/(2T) + delta_z; k0_over_k sets the initial
    velocity amplitude v0 = hbar k0 / m relative to the kick.  At
    delta_z = 0 the result is -(4/pi) omega_r T for every initial state.
    """
    if omega_r <= 0.0 or T <= 0.0:
        raise ValueError("omega_r and T must be positive")
    _check_detuning(delta_z, T)
    w = math.pi / (2.0 * T) + delta_z
    # scale-free evaluation: k = 1, hbar/m = 2 omega_r / k^2
    hbar_over_m = 2.0 * omega_r
    v_init = hbar_over_m * k0_over_k
    return _arm_phase(w, T, (+1, -1, +1, -1), v_init, phi0, 1.0, hbar_over_m)


def single_phase_expansion(omega_r: float, T: float, k0_over_k: float = 0.0,
                           phi0: float = 0.0, delta_z: float = 0.0) -> float:
    """First-order detuning expansion of the single-diffraction phase, in
    the form it is usually quoted.

    Matches the exact phase at k0 = 0 through first order in delta_z; its
    initial-state terms deviate from the exact series (the zeroth-order
    state dependence here is spurious, the exact phase has none).
    """
    base = -(4.0 / math.pi) * omega_r * T * (
        1.0 - k0_over_k * (math.cos(phi0) - math.sin(phi0)))
    slope = -(4.0 / math.pi**2) * omega_r * delta_z * T**2 * (
        2.0 * (math.pi - 1.0)
        + k0_over_k * (2.0 * (math.pi + 1.0) * math.cos(phi0)
                       + (math.pi - 2.0) * math.sin(phi0)))
    return base + slope


def double_diffraction_sum(omega_r: float, T: float, k0_over_k: float = 0.0,
                           phi0: float = 0.0, delta_z: float = 0.0) -> float:
    """Exact sum of the two opposite-sign single-diffraction phases.

    The initial-state dependence cancels between the arms at every
    detuning, leaving -(8/pi) omega_r T at delta_z = 0.
    """
    if omega_r <= 0.0 or T <= 0.0:
        raise ValueError("omega_r and T must be positive")
    _check_detuning(delta_z, T)
    w = math.pi / (2.0 * T) + delta_z
    hbar_over_m = 2.0 * omega_r
    v_init = hbar_over_m * k0_over_k
    return (_arm_phase(w, T, (+1, -1, +1, -1), v_init, phi0, 1.0, hbar_over_m)
            + _arm_phase(w, T, (-1, +1, -1, +1), v_init, phi0, 1.0, hbar_over_m))


def double_diffraction_phase(omega_r: float, T: float, delta_z: float = 0.0) -> float:
    """Closed-form double-diffraction phase as usually displayed.

    Evaluates to +8 omega_r T / pi at delta_z = 0; the sign convention is
    opposite to the arm sum, and the detuning dependence agrees with the
    exact sum through first order only.
    """
    if omega_r <= 0.0 or T <= 0.0:
        raise ValueError("omega_r and T must be positive")
    w = math.pi / (2.0 * T) + delta_z
    if w <= 0.0:
        raise ValueError("detuning drives the trap frequency nonpositive")
    h = w * T / 2.0
    bracket = (3.0 * math.cos(h) - math.cos(3.0 * h) + 2.0 * math.cos(7.0 * h)
               - math.cos(9.0 * h) + math.cos(11.0 * h))
    return 2.0 * (omega_r / w) * math.sin(h) * bracket


def anharmonic_shift(trap: TrapConfig, omega_r: float, T: float, k: float,
                     k0: float = 0.0, phi0: float = 0.0) -> float:
    """Leading anharmonic phase shift of the double-diffraction sum.

    Cubic and quartic distortions of the trap potential (coefficients D3,
    D4 at electrode scale d) shift the phase by

        (8 omega_r^2 T^2 / (k^2 pi^3 d^2)) * [ 4 D3 k0 pi d (cos phi0 - sin phi0)
          + D4 omega_r T (9 pi - 16 + 24 (k0/k)^2 (pi - 1)
                          + 6 (k0/k)^2 pi sin 2 phi0) ]
    """
    if omega_r <= 0.0 or T <= 0.0 or k <= 0.0:
        raise ValueError("omega_r, T and k must be positive")
    ratio = k0 / k
    cubic = 4.0 * trap.D3 * k0 * math.pi * trap.d * (math.cos(phi0) - math.sin(phi0))
    quartic = trap.D4 * omega_r * T * (
        9.0 * math.pi - 16.0
        + 24.0 * ratio**2 * (math.pi - 1.0)
        + 6.0 * ratio**2 * math.pi * math.sin(2.0 * phi0))
    return 8.0 * omega_r**2 * T**2 / (k**2 * math.pi**3 * trap.d**2) * (cubic + quartic)


def closure_gap_and_temperature(trap: TrapConfig, v_r: float, v0: float,
                                T: float, phi0: float = 0.0) -> tuple[float, float]:
    """Anharmonic closure gap and the temperature at which it defeats
    interference.

    The quartic term leaves the arms displaced by
    gap = 32 sqrt(2) D4 v_r^2 v0 T^3 sin(phi0 - pi/4) / (d^2 pi^3); the
    contrast survives while the gap stays below the thermal coherence
    length, giving T_e = h d^2 pi^(5/2) / (64 D4 v_r^2 T^3 kB).  With
    D4 = 0 the gap vanishes and the bound is infinite.
    """
    if v_r <= 0.0 or T <= 0.0:
        raise ValueError("v_r and T must be positive")
    if trap.D4 == 0.0:
        return 0.0, math.inf
    gap = (32.0 * math.sqrt(2.0) * trap.D4 * v_r**2 * v0 * T**3
           * math.sin(phi0 - math.pi / 4.0) / (trap.d**2 * math.pi**3))
    temp = (H * trap.d**2 * math.pi**2.5
            / (64.0 * abs(trap.D4) * v_r**2 * T**3 * KB))
    return gap, temp


def damping_optimum(omega_r: float, gamma: float) -> tuple[float, float, float]:
    """(T, omega_z, phase) maximizing phase per coherence-limited sequence.

    T = sqrt(pi / (8 omega_r gamma)), omega_z = 2 sqrt(pi omega_r gamma),
    phase = 4 sqrt(omega_r / (pi gamma)); the product omega_z T is then
    pi / sqrt(2) exactly.
    """
    if omega_r <= 0.0 or gamma <= 0.0:
        raise ValueError("omega_r and gamma must be positive")
    t_opt = math.sqrt(math.pi / (8.0 * omega_r * gamma))
    w_opt = 2.0 * math.sqrt(math.pi * omega_r * gamma)
    phase = 4.0 * math.sqrt(omega_r / (math.pi * gamma))
    return t_opt, w_opt, phase


def axial_damping_rate(resistance: float, d: float, mass: float = _M_E,
                       kappa: float = 0.8) -> float:
    """Resistive damping rate (e kappa / 2d)^2 R / m [rad/s]."""
    if resistance <= 0.0 or d <= 0.0:
        raise ValueError("resistance and d must be positive")
    return (E_CHARGE * kappa / (2.0 * d)) ** 2 * resistance / mass


def charged_rabi(charge: float, intensity: float, omega_laser: float,
                 mass: float) -> float:
    """Two-photon Rabi frequency of a free charge in a standing wave.

    Omega = q^2 I / (hbar eps0 c omega_L^2 m): the ponderomotive coupling,
    far off any internal resonance.
    """
    if intensity < 0.0 or omega_laser <= 0.0 or mass <= 0.0:
        raise ValueError("intensity must be nonnegative; omega_laser, mass positive")
    return charge**2 * intensity / (HBAR * EPS0 * C_LIGHT * omega_laser**2 * mass)


def hydrogen_two_photon_rabi(intensity: float) -> float:
    """Ground-state hydrogen two-photon Rabi frequency 9 pi a0^3 I/(hbar c).

    Static-polarizability estimate alpha_pol I / (2 hbar eps0 c) with
    alpha_pol = (9/2) 4 pi eps0 a0^3.
    """
    if intensity < 0.0:
        raise ValueError("intensity must be nonnegative")
    return 9.0 * math.pi * BOHR_RADIUS**3 * intensity / (HBAR * C_LIGHT)


def charged_to_neutral_ratio(wavelength: float) -> float:
    """Electron-to-hydrogen Rabi ratio (256/81) (lambda / lambda0)^2 with
    lambda0 = 4 / (3 Rinf); exact consequence of the two formulas above."""
    if wavelength <= 0.0:
        raise ValueError("wavelength must be positive")
    lambda0 = 4.0 / (3.0 * RINF)
    return 256.0 / 81.0 * (wavelength / lambda0) ** 2
