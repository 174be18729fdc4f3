"""Interferometer phase models and source-mass geometry.

Coordinates: x points up, free fall is x'' = -g.  Phases follow the sign
convention in which a standard Mach-Zehnder returns +n(2 k g T^2 - phi_L);
the clock-comparison decomposition uses the same convention, so its total
equals the potential term once the time-dilation and laser terms cancel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .constants import C, G_NEWTON, HBAR, STANDARD_GRAVITY, Species
from .errors import InsideSource, NotClosed, SymmetryViolation

__all__ = [
    "InterferometerGeometry",
    "PiecewiseTrajectory",
    "SourceMassConfig",
    "ClockComparison",
    "mz_phase",
    "rb_phase",
    "clock_comparison_decompose",
    "sphere_pair_potential",
    "ab_optimal_geometry",
    "ab_design_geometry",
    "ab_phase",
    "ab_position_systematic",
]


@dataclass(frozen=True)
class InterferometerGeometry:
    """Pulse geometry of a light-pulse interferometer.

    order_n counts photon pairs per beam splitter (momentum 2 n hbar k),
    wavenumber_k is the single-photon wavenumber.  laser_phases holds one
    reference phase per pulse: three entries for a Mach-Zehnder, four for
    a Ramsey-Borde sequence.
    """

    order_n: int
    wavenumber_k: float          # [1/m]
    T: float                     # pulse separation [s]
    T_prime: float = 0.0         # mid-sequence gap of a 4-pulse sequence [s]
    laser_phases: tuple = (0.0, 0.0, 0.0)
    branch: int = +1             # +1 upper, -1 lower conjugate interferometer
    gravity_g: float = STANDARD_GRAVITY

    def __post_init__(self):
        if self.order_n < 1:
            raise ValueError("order_n must be a positive integer")
        if self.wavenumber_k <= 0.0 or self.T <= 0.0:
            raise ValueError("wavenumber_k and T must be positive")
        if self.T_prime < 0.0:
            raise ValueError("T_prime must be nonnegative")
        if self.branch not in (+1, -1):
            raise ValueError("branch must be +1 or -1")


def mz_phase(geom: InterferometerGeometry) -> float:
    """Mach-Zehnder phase n(2 k g T^2 - phi_L), phi_L = phi1 - 2 phi2 + phi3."""
    if len(geom.laser_phases) != 3:
        raise ValueError("a Mach-Zehnder sequence has three pulses")
    p1, p2, p3 = geom.laser_phases
    phi_l = p1 - 2.0 * p2 + p3
    return geom.order_n * (2.0 * geom.wavenumber_k * geom.gravity_g * geom.T**2 - phi_l)


def rb_phase(geom: InterferometerGeometry, omega_r: float) -> float:
    """Ramsey-Borde phase: recoil, gravity and laser terms.

    Returns branch * 8 n^2 omega_r T + 2 n k g (T + T') T + n phi_L with
    phi_L = phi2 - phi1 - phi4 + phi3.  The branch-antisymmetric recoil
    term is what a conjugate pair isolates.
    """
    if len(geom.laser_phases) != 4:
        raise ValueError("a Ramsey-Borde sequence has four pulses")
    p1, p2, p3, p4 = geom.laser_phases
    phi_l = p2 - p1 - p4 + p3
    n = geom.order_n
    recoil = geom.branch * 8.0 * n**2 * omega_r * geom.T
    gravity = 2.0 * n * geom.wavenumber_k * geom.gravity_g * (geom.T + geom.T_prime) * geom.T
    return recoil + gravity + n * phi_l


# ---------------------------------------------------------------------------
# Piecewise free-fall trajectories and the clock-comparison decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PiecewiseTrajectory:
    """Parabolic free-fall arcs joined by instantaneous velocity kicks.

    kicks is a sequence of (time, velocity change); times must be
    nondecreasing and within [0, duration].  Between kicks the motion is
    x'' = -gravity.
    """

    x0: float                    # position at t = 0, before any kick [m]
    v0: float                    # velocity at t = 0, before any kick [m/s]
    gravity: float               # [m/s^2]
    kicks: tuple                 # ((t, dv), ...)
    duration: float              # [s]

    def __post_init__(self):
        kicks = tuple((float(t), float(dv)) for t, dv in self.kicks)
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        times = [t for t, _ in kicks]
        if times != sorted(times):
            raise ValueError("kick times must be nondecreasing")
        if times and (times[0] < 0.0 or times[-1] > self.duration):
            raise ValueError("kick times must lie within [0, duration]")
        object.__setattr__(self, "kicks", kicks)

    def _segments(self):
        """Yield (t_start, t_end, x_start, v_start) for each arc."""
        t, x, v = 0.0, self.x0, self.v0
        for tk, dv in self.kicks:
            if tk > t:
                yield t, tk, x, v
                dt = tk - t
                x += v * dt - 0.5 * self.gravity * dt**2
                v -= self.gravity * dt
                t = tk
            v += dv
        if self.duration > t:
            yield t, self.duration, x, v

    def position(self, t: float) -> float:
        """Position at time t (kicks at exactly t are applied)."""
        x, v, t0 = self.x0, self.v0, 0.0
        for tk, dv in self.kicks:
            tk = min(tk, t)
            dt = tk - t0
            x += v * dt - 0.5 * self.gravity * dt**2
            v = v - self.gravity * dt + (dv if tk <= t else 0.0)
            t0 = tk
            if t0 >= t:
                break
        dt = t - t0
        return x + v * dt - 0.5 * self.gravity * dt**2

    def velocity(self, t: float) -> float:
        """Velocity just after time t (kicks at exactly t included)."""
        v = self.v0 - self.gravity * t
        return v + sum(dv for tk, dv in self.kicks if tk <= t)

    def kick_events(self):
        """(time, position, velocity change) for every kick."""
        return tuple((tk, self.position(tk), dv) for tk, dv in self.kicks)

    def turning_points(self):
        """Positions at the kick times, in time order."""
        return tuple(self.position(tk) for tk, _ in self.kicks)

    def integral_position(self) -> float:
        """Exact integral of x(t) dt over [0, duration]."""
        total = 0.0
        for t0, t1, x, v in self._segments():
            dt = t1 - t0
            total += x * dt + 0.5 * v * dt**2 - self.gravity * dt**3 / 6.0
        return total

    def integral_velocity_sq(self) -> float:
        """Exact integral of v(t)^2 dt over [0, duration]."""
        total = 0.0
        for t0, t1, _, v in self._segments():
            dt = t1 - t0
            total += v**2 * dt - v * self.gravity * dt**2 + self.gravity**2 * dt**3 / 3.0
        return total

    @classmethod
    def shifted_pair(cls, pattern, shift: float, duration: float,
                     gravity: float = STANDARD_GRAVITY, x0: float = 0.0,
                     v_init: float = 0.0):
        """Closed arm pair: the lower arm repeats the upper kick pattern
        delayed by shift.  pattern is ((t, dv), ...) with zero net dv.
        """
        pattern = tuple((float(t), float(dv)) for t, dv in pattern)
        if abs(sum(dv for _, dv in pattern)) > 1e-12 * max(
                abs(dv) for _, dv in pattern):
            raise ValueError("pattern must have zero net velocity change")
        if shift <= 0.0 or pattern[-1][0] + shift > duration:
            raise ValueError("shifted pattern must fit within the duration")
        upper = cls(x0, v_init, gravity, pattern, duration)
        lower = cls(x0, v_init, gravity,
                    tuple((t + shift, dv) for t, dv in pattern), duration)
        return upper, lower

    @classmethod
    def mach_zehnder_pair(cls, kick_speed: float, T: float,
                          gravity: float = STANDARD_GRAVITY, x0: float = 0.0,
                          v_init: float = 0.0):
        """Symmetric three-pulse geometry as a shifted (+,-) pair."""
        pattern = ((0.0, +kick_speed), (T, -kick_speed))
        return cls.shifted_pair(pattern, T, 2.0 * T, gravity, x0, v_init)

    @classmethod
    def single_kick_pair(cls, kick_speed: float, T: float,
                         gravity: float = STANDARD_GRAVITY, x0: float = 0.0,
                         v_init: float = 0.0):
        """One arm kicked at 0, T and 2T; the other kicked once at T.

        The four kick positions are the loop turning points x1, x2, x3
        (upper) and x4 (lower).
        """
        upper = cls(x0, v_init, gravity,
                    ((0.0, +kick_speed), (T, -kick_speed), (2.0 * T, +kick_speed)),
                    2.0 * T)
        lower = cls(x0, v_init, gravity, ((T, +kick_speed),), 2.0 * T)
        return upper, lower


@dataclass(frozen=True)
class ClockComparison:
    """Phase decomposition of a two-arm comparison."""

    phi_U: float     # potential (redshift) term [rad]
    phi_TD: float    # time-dilation term [rad]
    phi_I: float     # kick-imprinted (laser) term [rad]
    total: float     # [rad]


def clock_comparison_decompose(traj_upper: PiecewiseTrajectory,
                               traj_lower: PiecewiseTrajectory,
                               omega_clock: float, v0: float,
                               potential_windows_upper=(),
                               potential_windows_lower=()) -> ClockComparison:
    """Decompose the arm phase difference into potential, time-dilation and
    kick-imprint parts.

    phi_U  = +(omega/c^2) integral of g (x_u - x_l) dt plus any uniform
             potential windows (specific potential [J/kg] over [t0, t1]),
    phi_TD = +(omega/2c^2) integral of (v_u^2 - v_l^2) dt,
    phi_I  = +(omega/c^2) sum over kicks of dv * x, upper minus lower.

    Every kick must transfer a whole multiple of the unit kick speed v0;
    phi_TD then equals -omega (v0/c^2)(x1 - x2 + x3 - x4) on a four-corner
    loop.  Verifies phi_TD + phi_I = 0 to 1e-12 relative; the total
    therefore reduces to phi_U alone.
    """
    if traj_upper.gravity != traj_lower.gravity:
        raise ValueError("arms must share the same gravitational acceleration")
    if traj_upper.duration != traj_lower.duration:
        raise ValueError("arms must span the same time interval")
    tf = traj_upper.duration
    xu_end, xl_end = traj_upper.position(tf), traj_lower.position(tf)
    vu_end, vl_end = traj_upper.velocity(tf), traj_lower.velocity(tf)
    scale_x = max(abs(traj_upper.x0), abs(xu_end), abs(xl_end),
                  abs(v0) * tf, 1e-30)
    scale_v = max(abs(v0), abs(vu_end), abs(vl_end), 1e-30)
    if abs(traj_upper.x0 - traj_lower.x0) > 1e-9 * scale_x:
        raise NotClosed("arms start at different positions")
    if abs(traj_upper.v0 - traj_lower.v0) > 1e-9 * scale_v:
        raise NotClosed("arms start with different velocities")
    if abs(xu_end - xl_end) > 1e-9 * scale_x:
        raise NotClosed("arms end at different positions")
    if abs(vu_end - vl_end) > 1e-9 * scale_v:
        raise NotClosed("arms end with different velocities")
    for traj in (traj_upper, traj_lower):
        for _, dv in traj.kicks:
            multiple = dv / v0
            if abs(multiple - round(multiple)) > 1e-9:
                raise ValueError(f"kick {dv!r} is not a multiple of the unit kick speed")

    g = traj_upper.gravity
    w = omega_clock / C**2
    phi_u = w * g * (traj_upper.integral_position() - traj_lower.integral_position())
    for u_spec, t0, t1 in potential_windows_upper:
        phi_u += w * u_spec * (t1 - t0)
    for u_spec, t0, t1 in potential_windows_lower:
        phi_u -= w * u_spec * (t1 - t0)
    phi_td = 0.5 * w * (traj_upper.integral_velocity_sq() - traj_lower.integral_velocity_sq())
    kick_sum = (sum(dv * x for _, x, dv in traj_upper.kick_events())
                - sum(dv * x for _, x, dv in traj_lower.kick_events()))
    phi_i = w * kick_sum

    floor = abs(w) * abs(v0) ** 2 * tf * 1e-9
    if abs(phi_td + phi_i) > max(1e-12 * abs(phi_td), floor * 1e-3):
        raise SymmetryViolation(
            f"kick imprint fails to cancel time dilation: phi_TD={phi_td!r}, "
            f"phi_I={phi_i!r}; the arm kick patterns are not conjugate")
    return ClockComparison(phi_u, phi_td, phi_i, phi_u + phi_td + phi_i)


# ---------------------------------------------------------------------------
# Paired source masses: potentials, saddle points, optimal geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SourceMassConfig:
    """Two identical solid spheres centered at -L/2 and +L/2 on the axis."""

    sphere_radius_R: float       # [m]
    packet_separation_s: float   # wave-packet separation [m]
    center_spacing_L: float      # [m]
    density_rho: float           # [kg/m^3]
    hold_time_T: float           # [s]

    def __post_init__(self):
        if min(self.sphere_radius_R, self.packet_separation_s,
               self.density_rho, self.hold_time_T) <= 0.0:
            raise ValueError("all source-mass parameters must be positive")
        if self.center_spacing_L <= 2.0 * self.sphere_radius_R:
            raise ValueError("spheres overlap: require L > 2R")

    @property
    def sphere_mass(self) -> float:
        return 4.0 / 3.0 * math.pi * self.sphere_radius_R**3 * self.density_rho


def _sphere_potential(dist, radius: float, gm: float, allow_interior: bool):
    """Specific potential of one solid sphere at center distance dist."""
    dist = np.asarray(dist, dtype=float)
    inside = dist < radius
    if inside.any() and not allow_interior:
        raise InsideSource("evaluation point lies inside a source sphere")
    safe = np.where(inside, radius, dist)
    out = -gm / safe
    if inside.any():
        out = np.where(inside, -gm * (3.0 * radius**2 - dist**2) / (2.0 * radius**3), out)
    return out


def sphere_pair_potential(cfg: SourceMassConfig, x, allow_interior: bool = False):
    """Specific potential [J/kg] on the symmetry axis at position(s) x.

    Exterior points see -GM/r from each sphere; interior points are only
    evaluated when allow_interior is set (uniform-density interior law).
    """
    gm = G_NEWTON * cfg.sphere_mass
    x = np.asarray(x, dtype=float)
    half = cfg.center_spacing_L / 2.0
    u = (_sphere_potential(np.abs(x - half), cfg.sphere_radius_R, gm, allow_interior)
         + _sphere_potential(np.abs(x + half), cfg.sphere_radius_R, gm, allow_interior))
    return float(u) if u.ndim == 0 else u


def _pair_potential_3d(cfg: SourceMassConfig, x, r):
    """Specific potential at axial offset x and transverse offset r.

    Interior points use the solid-sphere law; needed for the saddle inside
    the near sphere and for displaced-packet sampling.
    """
    gm = G_NEWTON * cfg.sphere_mass
    half = cfg.center_spacing_L / 2.0
    d_near = np.sqrt((np.asarray(x, dtype=float) - half) ** 2 + np.asarray(r, dtype=float) ** 2)
    d_far = np.sqrt((np.asarray(x, dtype=float) + half) ** 2 + np.asarray(r, dtype=float) ** 2)
    return (_sphere_potential(d_near, cfg.sphere_radius_R, gm, True)
            + _sphere_potential(d_far, cfg.sphere_radius_R, gm, True))


def _near_saddle(cfg: SourceMassConfig) -> float:
    """Newton-solve the axial force balance inside the near sphere.

    Interior pull of the near sphere balances the far sphere; converges
    quadratically from the sphere center.
    """
    gm = G_NEWTON * cfg.sphere_mass
    half = cfg.center_spacing_L / 2.0
    radius = cfg.sphere_radius_R
    x = half - 0.1 * radius
    for _ in range(80):
        grad = gm * (x - half) / radius**3 + gm / (x + half) ** 2
        curv = gm / radius**3 - 2.0 * gm / (x + half) ** 3
        step = grad / curv
        x -= step
        if abs(step) < 1e-15 * radius:
            break
    if abs(gm * (x - half) / radius**3 + gm / (x + half) ** 2) > 1e-10 * gm / radius**2:
        raise RuntimeError("near-sphere saddle search did not converge")
    return x


def _saddle_points(cfg: SourceMassConfig) -> tuple[float, float]:
    """(x_A, x_B): midpoint saddle and the saddle inside the near sphere."""
    return 0.0, _near_saddle(cfg)


def _potential_contrast(cfg: SourceMassConfig) -> float:
    """|U(x_B) - U(x_A)| between the two axial saddle points [J/kg]."""
    x_a, x_b = _saddle_points(cfg)
    u_a = _pair_potential_3d(cfg, x_a, 0.0)
    u_b = _pair_potential_3d(cfg, x_b, 0.0)
    return float(abs(u_b - u_a))


def _config_for_spacing(radius: float, spacing: float, density: float,
                        hold_time: float) -> SourceMassConfig:
    probe = SourceMassConfig(radius, radius, spacing, density, hold_time)
    x_a, x_b = _saddle_points(probe)
    return SourceMassConfig(radius, x_b - x_a, spacing, density, hold_time)


def ab_optimal_geometry(radius: float, density: float = 20000.0,
                        hold_time: float = 1.0) -> SourceMassConfig:
    """Geometry maximizing the potential contrast per squared separation.

    Scans the center spacing L; for each L the packets sit at the two
    force-free points, so the separation s follows from L.  The optimum is
    flat: s = 1.14 R, L = 2.62 R, contrast 1.17 G rho s^2 to the quoted
    rounding.
    """
    if radius <= 0.0:
        raise ValueError("radius must be positive")

    def negative_merit(spacing: float) -> float:
        cfg = _config_for_spacing(radius, spacing, density, hold_time)
        return -_potential_contrast(cfg) / (
            G_NEWTON * density * cfg.packet_separation_s**2)

    res = optimize.minimize_scalar(negative_merit,
                                   bounds=(2.05 * radius, 4.0 * radius),
                                   method="bounded",
                                   options={"xatol": 1e-12 * radius})
    return _config_for_spacing(radius, float(res.x), density, hold_time)


def ab_design_geometry(radius: float, density: float = 20000.0,
                       hold_time: float = 1.0) -> SourceMassConfig:
    """Geometry with the center spacing pinned at L = 2.62 R."""
    return _config_for_spacing(radius, 2.62 * radius, density, hold_time)


def ab_phase(cfg: SourceMassConfig, species: Species) -> float:
    """Hold phase m |U(B) - U(A)| T / hbar between the two saddles [rad]."""
    return species.mass * _potential_contrast(cfg) * cfg.hold_time_T / HBAR


@dataclass(frozen=True)
class PositionSystematic:
    """Fractional phase systematic from packet placement jitter."""

    mean_fractional: float
    std_fractional: float
    curvature_axial: tuple      # (U_xx at A, U_xx at B) [1/s^2]
    curvature_transverse: tuple  # (U_rr at A, U_rr at B) [1/s^2]
    mc_mean: float | None = None
    mc_std: float | None = None
    mc_se_mean: float | None = None
    mc_se_std: float | None = None


def _saddle_curvatures(cfg: SourceMassConfig):
    """Axial (analytic) and transverse (finite-difference) curvatures of the
    pair potential at the two saddles."""
    gm = G_NEWTON * cfg.sphere_mass
    half = cfg.center_spacing_L / 2.0
    radius = cfg.sphere_radius_R
    x_a, x_b = _saddle_points(cfg)

    def axial(x: float) -> float:
        total = 0.0
        for center in (-half, half):
            d = abs(x - center)
            if d < radius:
                total += gm / radius**3
            else:
                total += -2.0 * gm / d**3
        return total

    h = 1e-5 * radius

    def transverse(x: float) -> float:
        return float((_pair_potential_3d(cfg, x, h) - _pair_potential_3d(cfg, x, 0.0))
                     * 2.0 / h**2)

    return (axial(x_a), axial(x_b)), (transverse(x_a), transverse(x_b)), (x_a, x_b)


def ab_position_systematic(cfg: SourceMassConfig, sigma_axial: float,
                           sigma_transverse: float, mc_samples: int = 0,
                           seed: int | None = None) -> PositionSystematic:
    """Fractional phase error from Gaussian placement jitter of both packets.

    Each packet is displaced independently by one axial and one transverse
    Gaussian coordinate.  The saddle gradients vanish, so the leading
    effect is curvature: the closed form uses the chi-squared moments of
    the quadratic expansion; the optional Monte Carlo samples the exact
    potentials as a cross-check.
    """
    (uxx_a, uxx_b), (urr_a, urr_b), (x_a, x_b) = _saddle_curvatures(cfg)
    u_a = float(_pair_potential_3d(cfg, x_a, 0.0))
    u_b = float(_pair_potential_3d(cfg, x_b, 0.0))
    du = u_b - u_a

    c_xa, c_xb = -0.5 * uxx_a / du, +0.5 * uxx_b / du
    c_ra, c_rb = -0.5 * urr_a / du, +0.5 * urr_b / du
    mean = (c_xa + c_xb) * sigma_axial**2 + (c_ra + c_rb) * sigma_transverse**2
    var = (2.0 * (c_xa**2 + c_xb**2) * sigma_axial**4
           + 2.0 * (c_ra**2 + c_rb**2) * sigma_transverse**4)
    result = PositionSystematic(mean, math.sqrt(var),
                                (uxx_a, uxx_b), (urr_a, urr_b))
    if mc_samples <= 0:
        return result

    rng = np.random.default_rng(seed)
    dxa, dxb = rng.normal(0.0, sigma_axial, (2, mc_samples))
    dra, drb = rng.normal(0.0, sigma_transverse, (2, mc_samples))
    u_a_s = _pair_potential_3d(cfg, x_a + dxa, dra)
    u_b_s = _pair_potential_3d(cfg, x_b + dxb, drb)
    frac = ((u_b_s - u_a_s) - du) / du
    mc_mean = float(frac.mean())
    mc_std = float(frac.std(ddof=1))
    return PositionSystematic(mean, math.sqrt(var),
                              (uxx_a, uxx_b), (urr_a, urr_b),
                              mc_mean, mc_std,
                              mc_std / math.sqrt(mc_samples),
                              mc_std / math.sqrt(2.0 * (mc_samples - 1)))
