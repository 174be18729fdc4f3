"""Quantum-dynamics kernel.

Three independent building blocks used by the interferometer models:

* Dirac matrices in flat space and in static curved backgrounds, where the
  spatial triad is the principal square root of the effective spatial
  metric block.
* One-dimensional nonrelativistic propagation by two separate routes: an
  iterated lattice-kernel convolution (time-sliced sum over paths) and a
  Strang split-step Fourier integrator.  The two routes share no code and
  cross-check each other.
* Bragg beam-splitter dynamics on a truncated momentum ladder, plus the
  stationary-phase formula for the effective n-th order Rabi frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.signal import fftconvolve

from .constants import HBAR, C
from .errors import GridTooNarrow, NotPositiveDefinite, TruncationLeak

__all__ = [
    "WavePacket1D",
    "MetricSample",
    "DiracOperatorSet",
    "BraggPulse",
    "gaussian_packet",
    "dirac_flat",
    "dirac_curved",
    "path_integral_propagate",
    "splitstep_schrodinger",
    "effective_rabi",
    "bragg_pulse_evolve",
    "packet_overlap",
]

_NORM_TOL = 1e-9


@dataclass(frozen=True)
class WavePacket1D:
    """Normalized wave function sampled on a uniform 1D grid."""

    grid: np.ndarray          # sample positions [m], uniform spacing
    amplitudes: np.ndarray    # complex amplitudes, unit norm
    mass: float               # [kg]
    t: float = 0.0            # time label [s]

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if grid.ndim != 1 or grid.size < 8:
            raise ValueError("grid must be 1D with at least 8 points")
        if amps.shape != grid.shape:
            raise ValueError("amplitudes must match the grid")
        steps = np.diff(grid)
        if not np.allclose(steps, steps[0], rtol=1e-12, atol=0.0):
            raise ValueError("grid must be uniform")
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "amplitudes", amps)
        norm = self.norm()
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"packet norm {norm!r} deviates from 1 beyond {_NORM_TOL}")

    @property
    def dx(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2) * self.dx))

    def probability_density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def mean_position(self) -> float:
        return float(np.sum(self.grid * self.probability_density()) * self.dx)

    def replace(self, amplitudes: np.ndarray, t: float) -> "WavePacket1D":
        return WavePacket1D(self.grid, amplitudes, self.mass, t)


def gaussian_packet(grid, sigma0: float, x0: float, velocity: float,
                    mass: float, hbar: float = HBAR) -> WavePacket1D:
    """Minimum-uncertainty Gaussian packet, normalized on the grid.

    sigma0 is the initial position-space standard deviation of the
    probability density.
    """
    grid = np.asarray(grid, dtype=float)
    psi = ((2.0 * np.pi * sigma0**2) ** -0.25
           * np.exp(-((grid - x0) ** 2) / (4.0 * sigma0**2))
           * np.exp(1j * mass * velocity * grid / hbar))
    dx = grid[1] - grid[0]
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    return WavePacket1D(grid, psi, mass)


def packet_overlap(a: WavePacket1D, b: WavePacket1D) -> float:
    """|<a|b>|^2; packets must share a grid."""
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid):
        raise ValueError("packets are sampled on different grids")
    return float(np.abs(np.sum(np.conj(a.amplitudes) * b.amplitudes) * a.dx) ** 2)


# ---------------------------------------------------------------------------
# Dirac algebra
# ---------------------------------------------------------------------------

_SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
)


def dirac_flat() -> tuple[tuple[np.ndarray, np.ndarray, np.ndarray], np.ndarray]:
    """Flat-space alpha matrices (Dirac representation) and beta."""
    zeros = np.zeros((2, 2), dtype=complex)
    alpha = tuple(
        np.block([[zeros, s], [s, zeros]]) for s in _SIGMA
    )
    beta = np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex)
    return alpha, beta


@dataclass(frozen=True)
class MetricSample:
    """Inverse metric g^{mu nu} at one event, signature (-, +, +, +)."""

    g_inv: np.ndarray  # 4x4 symmetric, g^{00} < 0

    def __post_init__(self):
        g = np.asarray(self.g_inv, dtype=float)
        if g.shape != (4, 4):
            raise ValueError("g_inv must be 4x4")
        if not np.allclose(g, g.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(g).max())):
            raise ValueError("g_inv must be symmetric")
        if g[0, 0] >= 0.0:
            raise ValueError("g^{00} must be negative for a timelike observer")
        object.__setattr__(self, "g_inv", g)

    @classmethod
    def minkowski(cls) -> "MetricSample":
        return cls(np.diag([-1.0, 1.0, 1.0, 1.0]))

    @classmethod
    def static_diagonal(cls, g00_inv: float, gjj_inv: float = 1.0) -> "MetricSample":
        """Diagonal metric with g^{00} = g00_inv and g^{jk} = gjj_inv * delta."""
        return cls(np.diag([g00_inv, gjj_inv, gjj_inv, gjj_inv]))

    def rescaled(self) -> np.ndarray:
        """g^{mu nu} / (-g^{00}): the time-normalized inverse metric."""
        return self.g_inv / (-self.g_inv[0, 0])


@dataclass(frozen=True)
class DiracOperatorSet:
    """Flat and curved-space Dirac matrices for one metric sample."""

    alpha: tuple[np.ndarray, np.ndarray, np.ndarray]
    beta: np.ndarray
    alpha_bar: tuple[np.ndarray, np.ndarray, np.ndarray]
    g0j_bar: np.ndarray       # rescaled g^{0j} row, shape (3,)
    m_bar_over_m: float       # 1/sqrt(-g^{00})
    dreibein: np.ndarray = field(repr=False, default=None)  # 3x3 principal sqrt

    def spatial_quadratic(self) -> np.ndarray:
        """The 3x3 form contracted with momenta in the squared operator."""
        return self.dreibein @ self.dreibein

    def anticommutator_residual(self) -> float:
        """Max deviation of {alpha_bar, alpha_bar}, {alpha_bar, beta}, beta^2."""
        m = self.spatial_quadratic()
        eye = np.eye(4, dtype=complex)
        worst = 0.0
        for j in range(3):
            for k in range(3):
                acomm = self.alpha_bar[j] @ self.alpha_bar[k] + self.alpha_bar[k] @ self.alpha_bar[j]
                worst = max(worst, float(np.abs(acomm - 2.0 * m[j, k] * eye).max()))
            acomm = self.alpha_bar[j] @ self.beta + self.beta @ self.alpha_bar[j]
            worst = max(worst, float(np.abs(acomm).max()))
        worst = max(worst, float(np.abs(self.beta @ self.beta - eye).max()))
        return worst

    def squared_identity_residual(self, momentum, mass: float, c: float = C) -> float:
        """Residual of (alpha_bar . p + beta m_bar c)^2 against its scalar value."""
        p = np.asarray(momentum, dtype=float)
        m_bar = self.m_bar_over_m * mass
        op = sum(p[j] * self.alpha_bar[j] for j in range(3)) + m_bar * c * self.beta
        scalar = float(p @ self.spatial_quadratic() @ p + (m_bar * c) ** 2)
        residual = op @ op - scalar * np.eye(4, dtype=complex)
        return float(np.abs(residual).max() / max(scalar, 1e-300))


def dirac_curved(metric: MetricSample) -> DiracOperatorSet:
    """Curved-space Dirac matrices from the principal triad square root.

    The triad d is the symmetric positive-definite square root of
    g0j_bar g0k_bar + gjk_bar (time-normalized inverse metric), and
    alpha_bar^j = d^j_a alpha^a.  Raises NotPositiveDefinite when the
    quadratic form has a nonpositive eigenvalue.
    """
    alpha, beta = dirac_flat()
    g_bar = metric.rescaled()
    g0 = g_bar[0, 1:]
    quad = np.outer(g0, g0) + g_bar[1:, 1:]
    evals, evecs = np.linalg.eigh(quad)
    if evals.min() <= 1e-14 * max(1.0, evals.max()):
        raise NotPositiveDefinite(
            f"spatial quadratic form has eigenvalues {evals}; no real triad exists")
    dreibein = (evecs * np.sqrt(evals)) @ evecs.T
    alpha_bar = tuple(
        sum(dreibein[j, a] * alpha[a] for a in range(3)) for j in range(3)
    )
    return DiracOperatorSet(
        alpha=alpha,
        beta=beta,
        alpha_bar=alpha_bar,
        g0j_bar=g0.copy(),
        m_bar_over_m=1.0 / math.sqrt(-metric.g_inv[0, 0]),
        dreibein=dreibein,
    )


def weak_field_potential(h00: float, mass: float, c: float = C) -> float:
    """Schroedinger-limit potential energy -m c^2 h00 / 2 for g_00 = -(1+h00)."""
    return -mass * c**2 * h00 / 2.0


# ---------------------------------------------------------------------------
# Route A: time-sliced kernel convolution
# ---------------------------------------------------------------------------

def _lattice_kernel(n_points: int, dx: float, mass: float, eps: float,
                    hbar: float, oversample: int = 16,
                    roll: tuple[float, float] = (0.7, 0.9)) -> np.ndarray:
    """Band-limited free-propagation taps for one time slice.

    The taps are the Fourier synthesis of exp(-i hbar k^2 eps/(2m)) under a
    raised-cosine window (flat to roll[0] k_Nyquist, zero past roll[1]),
    evaluated with one oversampled FFT.  The window keeps the transfer gain
    at or below one for every grid mode, which a directly sampled
    free-particle kernel does not.
    """
    m_fft = oversample * n_points
    dk = 2.0 * np.pi / (dx * m_fft)
    k = -np.pi / dx + np.arange(m_fft) * dk
    k_nyq = np.pi / dx
    a1, a2 = roll[0] * k_nyq, roll[1] * k_nyq
    ak = np.abs(k)
    window = np.ones(m_fft)
    window[ak >= a2] = 0.0
    mid = (ak > a1) & (ak < a2)
    window[mid] = 0.5 * (1.0 + np.cos(np.pi * (ak[mid] - a1) / (a2 - a1)))
    symbol = window * np.exp(-1j * hbar * k**2 * eps / (2.0 * mass))
    # K(j dx) = (dk/2pi) e^{-i pi j} sum_p symbol_p e^{2pi i p j/m_fft}
    synth = np.fft.ifft(symbol) * m_fft
    j = np.arange(m_fft)
    j_signed = np.where(j <= m_fft // 2, j, j - m_fft)
    taps_all = dk / (2.0 * np.pi) * np.exp(-1j * np.pi * j_signed) * synth * dx
    order = np.arange(-(n_points - 1), n_points)
    return taps_all[order % m_fft]


def _as_potential_array(potential, grid: np.ndarray) -> np.ndarray:
    if callable(potential):
        values = np.asarray(potential(grid), dtype=float)
    else:
        values = np.asarray(potential, dtype=float)
        if values.ndim == 0:
            values = np.full(grid.shape, float(values))
    if values.shape != grid.shape:
        raise ValueError("potential samples must match the grid")
    return values


def _check_edges(packet: WavePacket1D, stage: str, threshold: float) -> None:
    n_edge = max(4, packet.grid.size // 64)
    dens = packet.probability_density() * packet.dx
    edge_mass = float(dens[:n_edge].sum() + dens[-n_edge:].sum())
    if edge_mass > threshold:
        raise GridTooNarrow(
            f"{stage}: probability {edge_mass:.2e} within {n_edge} points of the "
            f"grid edge exceeds {threshold:.0e}; enlarge the grid")


def path_integral_propagate(packet: WavePacket1D, potential, duration: float,
                            slices: int, hbar: float = HBAR) -> WavePacket1D:
    """Propagate by iterated kernel convolution (time-sliced sum over paths).

    Each slice applies the potential phase exp(-i V eps/hbar) followed by a
    linear convolution with the band-limited free kernel.  First-order
    accurate in the slice width; exactly norm-stable on band-limited states.
    Raises GridTooNarrow if probability reaches the grid edge or is lost
    from the grid.
    """
    if slices < 1:
        raise ValueError("slices must be >= 1")
    _check_edges(packet, "initial state", 1e-10)
    values = _as_potential_array(potential, packet.grid)
    eps = duration / slices
    taps = _lattice_kernel(packet.grid.size, packet.dx, packet.mass, eps, hbar)
    phase = np.exp(-1j * values * eps / hbar)
    psi = packet.amplitudes.astype(complex)
    for _ in range(slices):
        psi = fftconvolve(psi * phase, taps, mode="same")
    norm = float(np.sqrt(np.sum(np.abs(psi) ** 2) * packet.dx))
    if abs(norm - 1.0) > 1e-6:
        raise GridTooNarrow(
            f"norm drifted to {norm!r}; probability left the grid or the "
            f"state exceeds the resolved band")
    result = packet.replace(psi / norm, packet.t + duration)
    _check_edges(result, "final state", 1e-6)
    return result


# ---------------------------------------------------------------------------
# Route B: Strang split-step Fourier
# ---------------------------------------------------------------------------

def splitstep_schrodinger(packet: WavePacket1D, potential, duration: float,
                          steps: int, hbar: float = HBAR) -> WavePacket1D:
    """Propagate with the symmetric (Strang) split-step Fourier method.

    Periodic boundary conditions; unitary to rounding; second-order
    accurate in the step size.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    values = _as_potential_array(potential, packet.grid)
    dt = duration / steps
    k = 2.0 * np.pi * np.fft.fftfreq(packet.grid.size, packet.dx)
    kinetic = np.exp(-1j * hbar * k**2 * dt / (2.0 * packet.mass))
    half = np.exp(-1j * values * dt / (2.0 * hbar))
    psi = packet.amplitudes.astype(complex)
    for _ in range(steps):
        psi = half * np.fft.ifft(kinetic * np.fft.fft(half * psi))
    return packet.replace(psi, packet.t + duration)


# ---------------------------------------------------------------------------
# Bragg beam splitters
# ---------------------------------------------------------------------------

def effective_rabi(two_photon_rabi, recoil, order: int):
    """Effective n-th order Bragg Rabi frequency.

    Omega_eff = Omega^n / ((8 omega_r)^(n-1) ((n-1)!)^2).  Pure-Python
    arithmetic so exact (Fraction) inputs stay exact.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    n = order
    return two_photon_rabi**n / ((8 * recoil) ** (n - 1) * math.factorial(n - 1) ** 2)


@dataclass(frozen=True)
class BraggPulse:
    """Gaussian two-photon Bragg pulse on a momentum ladder."""

    two_photon_rabi_peak: float    # [rad/s]
    envelope_sigma: float          # [s]
    effective_wavenumber: float    # two-photon k [1/m]
    detuning_ramp: float = 0.0     # d(delta)/dt [rad/s^2]
    order_truncation: int = 8      # ladder spans -n..+n

    def __post_init__(self):
        if self.envelope_sigma <= 0.0 or self.effective_wavenumber <= 0.0:
            raise ValueError("envelope_sigma and effective_wavenumber must be positive")
        if self.order_truncation < 2:
            raise ValueError("order_truncation must be >= 2")

    def area(self) -> float:
        """Integrated Gaussian pulse area Omega_0 sigma sqrt(2 pi)."""
        return self.two_photon_rabi_peak * self.envelope_sigma * math.sqrt(2.0 * math.pi)


def bragg_pulse_evolve(pulse: BraggPulse, mass: float,
                       initial_velocity: float | None = None,
                       initial_order: int = 0, hbar: float = HBAR,
                       rtol: float = 1e-10, atol: float = 1e-12):
    """Integrate the momentum-ladder amplitudes through one Bragg pulse.

    States are plane waves with momentum 2 n hbar k + m v; the pulse couples
    neighboring orders with strength Omega(t)/2.  By default the initial
    velocity sits on the first-order resonance v = -hbar k / m, which makes
    the n = 0 and n = +1 levels degenerate.  Returns (orders, amplitudes).
    Raises TruncationLeak if population builds up near the ladder boundary.
    """
    k = pulse.effective_wavenumber
    if initial_velocity is None:
        initial_velocity = -hbar * k / mass
    n_max = pulse.order_truncation
    orders = np.arange(-n_max, n_max + 1)
    if abs(initial_order) > n_max:
        raise ValueError("initial_order outside the truncated ladder")
    c0 = np.zeros(orders.size, dtype=complex)
    c0[initial_order + n_max] = 1.0

    kin = (2.0 * orders * hbar * k + mass * initial_velocity) ** 2 / (2.0 * mass * hbar)
    sigma = pulse.envelope_sigma
    omega0 = pulse.two_photon_rabi_peak
    ramp = pulse.detuning_ramp

    def rhs(t, c):
        coupling = omega0 * np.exp(-(t**2) / (2.0 * sigma**2)) / 2.0
        diag = kin if ramp == 0.0 else kin + orders * ramp * t
        dc = -1j * diag * c
        dc[1:] += -1j * coupling * c[:-1]
        dc[:-1] += -1j * coupling * c[1:]
        return dc

    sol = solve_ivp(rhs, (-5.0 * sigma, 5.0 * sigma), c0, method="DOP853",
                    rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(f"ladder integration failed: {sol.message}")
    amps = sol.y[:, -1]
    norm = float(np.sum(np.abs(amps) ** 2))
    if abs(norm - 1.0) > _NORM_TOL * 1e3:
        raise RuntimeError(f"ladder norm drifted to {norm!r}; tighten tolerances")
    edge_pop = float(np.sum(np.abs(amps[:2]) ** 2) + np.sum(np.abs(amps[-2:]) ** 2))
    if edge_pop > 1e-4:
        raise TruncationLeak(
            f"population {edge_pop:.2e} within two orders of the ladder boundary; "
            f"raise order_truncation")
    return orders, amps
