"""Lorentz-violation and equivalence-principle phenomenology.

Three groups of tools share this module because they share coefficient
conventions.  First, the photon-sector coupling tensor kF with its
kappa-tilde combinations and the leading-order dispersion shift.
Second, the sidereal/annual Fourier signal model for a vertical
interferometer measuring g, and the weighted fit that extracts the
seven anisotropy parameters from fragmented time series.  Third, the
composition algebra that turns per-particle EEP-violation coefficients
into test-body sensitivities, clock shift coefficients, and a global
multivariate-normal fit over the five isotropic degrees of freedom.

Frame and index conventions: indices run (T, X, Y, Z) = (0..3) in the
Sun-centered celestial equatorial frame with metric signature
(-,+,+,+).  Times fed to the signal model are seconds since an epoch
at which the laboratory sits at zero local sidereal phase and Earth
crosses the vernal equinox; `LabFrame.phase_phi` absorbs any offset
from that convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .constants import C, M_E_GEV, M_N_GEV, M_P_GEV, Species, get_species
from .errors import RankDeficient, SymmetryViolation

# Earth motion constants for the sidereal signal model.
SIDEREAL_ANGULAR_FREQUENCY = 2.0 * math.pi / 86164.0905   # [rad/s]
ANNUAL_ANGULAR_FREQUENCY = 2.0 * math.pi / (365.2564 * 86400.0)  # [rad/s]
EARTH_ORBITAL_BETA = 9.936e-5        # orbital speed / c
EARTH_ORBITAL_TILT = 0.40907504      # obliquity of the ecliptic [rad]
# Spherical Earth would give +1; the actual moment of inertia flips the sign.
EARTH_INERTIA_FACTOR = -0.5          # 1 - 3 I / (M R^2)

_ETA = np.diag([-1.0, 1.0, 1.0, 1.0])

_EPS3 = np.zeros((3, 3, 3))
for _i, _j, _k, _s in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                       (0, 2, 1, -1.0), (2, 1, 0, -1.0), (1, 0, 2, -1.0)):
    _EPS3[_i, _j, _k] = _s

ISOTROPY_PARAM_NAMES = (
    "sigma_TX", "sigma_TY", "sigma_TZ",
    "sigma_XX-YY", "sigma_XY", "sigma_XZ", "sigma_YZ",
)
GLOBAL_PARAM_NAMES = ("alpha_a_n", "alpha_a_e+p", "c_n", "c_p", "c_e")

_CONDITION_LIMIT = 1e12


# --------------------------------------------------------------------------
# photon sector: kF tensor, kappa combinations, dispersion

def _tensor_tolerance(t: np.ndarray) -> float:
    scale = float(np.max(np.abs(t)))
    return 1e-12 * scale + 1e-30


def _check_kf_symmetries(kf: np.ndarray, require_double_traceless: bool) -> None:
    kf = np.asarray(kf, dtype=float)
    if kf.shape != (4, 4, 4, 4):
        raise SymmetryViolation("kF must be a 4x4x4x4 tensor")
    tol = _tensor_tolerance(kf)
    if np.max(np.abs(kf + np.swapaxes(kf, 0, 1))) > tol:
        raise SymmetryViolation("kF must be antisymmetric in its first index pair")
    if np.max(np.abs(kf + np.swapaxes(kf, 2, 3))) > tol:
        raise SymmetryViolation("kF must be antisymmetric in its second index pair")
    if np.max(np.abs(kf - np.transpose(kf, (2, 3, 0, 1)))) > tol:
        raise SymmetryViolation("kF must be symmetric under index-pair exchange")
    cyc = kf + np.transpose(kf, (0, 2, 3, 1)) + np.transpose(kf, (0, 3, 1, 2))
    if np.max(np.abs(cyc)) > tol:
        raise SymmetryViolation("kF must satisfy the cyclic index identity")
    if require_double_traceless:
        dtr = float(np.einsum("ab,mn,ambn->", _ETA, _ETA, kf))
        if abs(dtr) > tol:
            raise SymmetryViolation("kF must have vanishing double trace")


@dataclass(frozen=True)
class KappaCombinations:
    """The five parity/trace blocks equivalent to a valid kF tensor."""

    e_plus: np.ndarray    # symmetric traceless 3x3
    e_minus: np.ndarray   # symmetric traceless 3x3
    o_plus: np.ndarray    # antisymmetric 3x3
    o_minus: np.ndarray   # symmetric 3x3
    trace: float


def kappa_combinations(kf: np.ndarray) -> KappaCombinations:
    """Reduce kF to its electric/magnetic parity blocks.

    Requires the Riemann-type index symmetries; raises SymmetryViolation
    otherwise.  A nonzero double trace is tolerated and lands in the
    trace parts, so `e_minus` is made traceless explicitly.
    """
    kf = np.asarray(kf, dtype=float)
    _check_kf_symmetries(kf, require_double_traceless=False)
    k_de = -2.0 * kf[0, 1:, 0, 1:]
    k_hb = 0.5 * np.einsum("jpq,krs,pqrs->jk", _EPS3, _EPS3, kf[1:, 1:, 1:, 1:])
    k_db = np.einsum("jpq,kpq->jk", kf[0, 1:, 1:, 1:], _EPS3)
    k_he = -k_db.T
    e_minus = 0.5 * (k_de - k_hb)
    e_minus = e_minus - np.eye(3) * np.trace(e_minus) / 3.0
    return KappaCombinations(
        e_plus=0.5 * (k_de + k_hb),
        e_minus=e_minus,
        o_plus=0.5 * (k_db + k_he),
        o_minus=0.5 * (k_db - k_he),
        trace=float(np.trace(k_de)) / 3.0,
    )


def _kf_from_vector_potential(big_k: np.ndarray) -> np.ndarray:
    # kF^{ambn} = (eta^{ab} K^{mn} + eta^{mn} K^{ab}
    #             - eta^{an} K^{mb} - eta^{mb} K^{an}) / 2
    return 0.5 * (np.einsum("ab,mn->ambn", _ETA, big_k)
                  + np.einsum("mn,ab->ambn", _ETA, big_k)
                  - np.einsum("an,mb->ambn", _ETA, big_k)
                  - np.einsum("mb,an->ambn", _ETA, big_k))


def nonbirefringent_kf(kappa_e_minus: np.ndarray | None = None,
                       kappa_o_plus: np.ndarray | None = None,
                       kappa_tr: float = 0.0) -> np.ndarray:
    """Build the unique kF with the given blocks and no birefringence.

    The non-birefringent subspace is parametrized by a symmetric
    trace-free 4x4 tensor; nine degrees of freedom match the five of
    `kappa_e_minus`, the three of `kappa_o_plus`, and `kappa_tr`, while
    `e_plus` and `o_minus` vanish identically.
    """
    e_minus = np.zeros((3, 3)) if kappa_e_minus is None else np.asarray(kappa_e_minus, float)
    o_plus = np.zeros((3, 3)) if kappa_o_plus is None else np.asarray(kappa_o_plus, float)
    if e_minus.shape != (3, 3) or o_plus.shape != (3, 3):
        raise SymmetryViolation("kappa blocks must be 3x3")
    tol = _tensor_tolerance(e_minus) + _tensor_tolerance(o_plus) + 1e-12 * abs(kappa_tr)
    if np.max(np.abs(e_minus - e_minus.T)) > tol:
        raise SymmetryViolation("kappa_e_minus must be symmetric")
    if abs(np.trace(e_minus)) > tol:
        raise SymmetryViolation("kappa_e_minus must be traceless")
    if np.max(np.abs(o_plus + o_plus.T)) > tol:
        raise SymmetryViolation("kappa_o_plus must be antisymmetric")
    big_k = np.zeros((4, 4))
    big_k[0, 0] = -1.5 * kappa_tr
    big_k[1:, 1:] = e_minus - 0.5 * np.eye(3) * kappa_tr
    k0 = 0.5 * np.einsum("jkq,jk->q", _EPS3, o_plus)
    big_k[0, 1:] = k0
    big_k[1:, 0] = k0
    return _kf_from_vector_potential(big_k)


@dataclass(frozen=True)
class DispersionShift:
    """Direction-dependent photon dispersion, per unit |k|."""

    rho: float
    sigma: float
    k0_plus: float
    k0_minus: float


def photon_dispersion(kf: np.ndarray, direction) -> DispersionShift:
    """Leading-order modified dispersion for a photon along `direction`.

    Returns the polarization-averaged shift rho, the birefringent
    splitting sigma, and the two mode frequencies per unit wavenumber,
    k0 = (1 + rho +- sigma).
    """
    kf = np.asarray(kf, dtype=float)
    _check_kf_symmetries(kf, require_double_traceless=False)
    n_hat = np.asarray(direction, dtype=float)
    if n_hat.shape != (3,) or abs(np.linalg.norm(n_hat) - 1.0) > 1e-9:
        raise ValueError("direction must be a 3-component unit vector")
    p_lower = np.concatenate(([-1.0], n_hat))
    k_tilde = np.einsum("ambn,m,n->ab", kf, p_lower, p_lower)
    rho = -0.5 * float(np.einsum("ab,ab->", _ETA, k_tilde))
    k_lower = _ETA @ k_tilde @ _ETA
    sigma_sq = 0.5 * float(np.einsum("ab,ab->", k_lower, k_tilde)) - rho * rho
    sigma = math.sqrt(max(sigma_sq, 0.0))
    return DispersionShift(rho=rho, sigma=sigma,
                           k0_plus=1.0 + rho + sigma,
                           k0_minus=1.0 + rho - sigma)


class SMECoefficients:
    """Gravity-sector s_bar and photon-sector kF, with derived blocks.

    `s_bar` is the symmetric 4x4 gravity-sector tensor; `kf` must carry
    the full Riemann-type symmetries including the vanishing double
    trace.  The kappa blocks are computed once on construction.
    """

    def __init__(self, s_bar: np.ndarray | None = None,
                 kf: np.ndarray | None = None):
        s_bar = np.zeros((4, 4)) if s_bar is None else np.asarray(s_bar, dtype=float)
        if s_bar.shape != (4, 4):
            raise SymmetryViolation("s_bar must be a 4x4 tensor")
        if np.max(np.abs(s_bar - s_bar.T)) > _tensor_tolerance(s_bar):
            raise SymmetryViolation("s_bar must be symmetric")
        kf = np.zeros((4, 4, 4, 4)) if kf is None else np.asarray(kf, dtype=float)
        _check_kf_symmetries(kf, require_double_traceless=True)
        self.s_bar = s_bar.copy()
        self.kf = kf.copy()
        self.s_bar.flags.writeable = False
        self.kf.flags.writeable = False
        blocks = kappa_combinations(self.kf)
        self.kappa_e_plus = blocks.e_plus
        self.kappa_e_minus = blocks.e_minus
        self.kappa_o_plus = blocks.o_plus
        self.kappa_o_minus = blocks.o_minus
        self.kappa_tr = blocks.trace

    @classmethod
    def nonbirefringent(cls, s_bar: np.ndarray | None = None,
                        kappa_e_minus: np.ndarray | None = None,
                        kappa_o_plus: np.ndarray | None = None,
                        kappa_tr: float = 0.0) -> "SMECoefficients":
        return cls(s_bar, nonbirefringent_kf(kappa_e_minus, kappa_o_plus, kappa_tr))


# --------------------------------------------------------------------------
# isotropy-of-gravity signal model and fit

@dataclass(frozen=True)
class LabFrame:
    """Laboratory location and Earth-motion parameters for the signal model."""

    colatitude_chi: float                      # [rad]
    phase_phi: float = 0.0                     # longitude phase offset [rad]
    eta: float = EARTH_ORBITAL_TILT            # orbital tilt [rad]
    v_orbital: float = EARTH_ORBITAL_BETA      # orbital speed / c
    i4: float = EARTH_INERTIA_FACTOR

    def __post_init__(self):
        if not 0.0 <= self.colatitude_chi <= math.pi:
            raise ValueError("colatitude must lie in [0, pi]")


@dataclass(frozen=True)
class SignalComponent:
    """One Fourier component of the fractional gravity modulation."""

    label: str
    omega: float       # [rad/s]
    phase: float       # phase offset [rad]
    cosine: float      # amplitude of cos(omega t + phase)
    sine: float        # amplitude of sin(omega t + phase)


def _sigma_groupings(coeffs: SMECoefficients, i4: float) -> np.ndarray:
    """The seven observable combinations i4*sigma, in fit-parameter order."""
    s = coeffs.s_bar
    em = coeffs.kappa_e_minus
    op = coeffs.kappa_o_plus
    return np.array([
        i4 * s[0, 1] + op[1, 2],
        i4 * s[0, 2] - op[0, 2],
        i4 * s[0, 3] + op[0, 1],
        i4 * (s[1, 1] - s[2, 2]) - (em[0, 0] - em[1, 1]),
        i4 * s[1, 2] - em[0, 1],
        i4 * s[1, 3] - em[0, 2],
        i4 * s[2, 3] - em[1, 2],
    ])


def _components_from_groupings(g: np.ndarray, frame: LabFrame) -> tuple[SignalComponent, ...]:
    g_tx, g_ty, g_tz, g_xxyy, g_xy, g_xz, g_yz = g
    sin2 = math.sin(frame.colatitude_chi) ** 2
    sin_2chi = math.sin(2.0 * frame.colatitude_chi)
    ce = math.cos(frame.eta)
    se = math.sin(frame.eta)
    v = frame.v_orbital
    w_sid = SIDEREAL_ANGULAR_FREQUENCY
    w_ann = ANNUAL_ANGULAR_FREQUENCY
    phi = frame.phase_phi
    return (
        SignalComponent("2w", 2.0 * w_sid, 2.0 * phi,
                        0.25 * sin2 * g_xxyy, 0.5 * sin2 * g_xy),
        SignalComponent("w", w_sid, phi,
                        0.5 * sin_2chi * g_xz, 0.5 * sin_2chi * g_yz),
        SignalComponent("2w+W", 2.0 * w_sid + w_ann, 2.0 * phi,
                        -0.25 * (ce - 1.0) * v * sin2 * g_ty,
                        0.25 * (ce - 1.0) * v * sin2 * g_tx),
        SignalComponent("2w-W", 2.0 * w_sid - w_ann, 2.0 * phi,
                        -0.25 * (ce + 1.0) * v * sin2 * g_ty,
                        0.25 * (ce + 1.0) * v * sin2 * g_tx),
        SignalComponent("w+W", w_sid + w_ann, phi,
                        0.25 * v * se * sin2 * g_tx,
                        0.25 * v * sin2 * ((1.0 - ce) * g_tz - se * g_ty)),
        SignalComponent("w-W", w_sid - w_ann, phi,
                        0.25 * v * se * sin2 * g_tx,
                        0.25 * v * sin2 * ((1.0 + ce) * g_tz + se * g_ty)),
    )


def isotropy_amplitudes(coeffs: SMECoefficients, frame: LabFrame) -> tuple[SignalComponent, ...]:
    """Fourier components (label, frequency, phase, C, D) of delta g / g.

    Labels use w for the sidereal and W for the annual angular
    frequency; the quadratures are C*cos(omega t + phase) and
    D*sin(omega t + phase).
    """
    return _components_from_groupings(_sigma_groupings(coeffs, frame.i4), frame)


def _evaluate_components(components, times: np.ndarray) -> np.ndarray:
    out = np.zeros_like(times, dtype=float)
    for comp in components:
        arg = comp.omega * times + comp.phase
        out += comp.cosine * np.cos(arg) + comp.sine * np.sin(arg)
    return out


def isotropy_signal(coeffs: SMECoefficients, frame: LabFrame, times) -> np.ndarray:
    """Fractional gravity modulation delta g / g at the given times [s]."""
    times = np.asarray(times, dtype=float)
    return _evaluate_components(isotropy_amplitudes(coeffs, frame), times)


def _isotropy_design_matrix(times: np.ndarray, frame: LabFrame) -> np.ndarray:
    cols = []
    for j in range(7):
        g = np.zeros(7)
        g[j] = frame.i4
        cols.append(_evaluate_components(_components_from_groupings(g, frame), times))
    return np.column_stack(cols)


@dataclass(frozen=True)
class FitResult:
    """Weighted least-squares estimates with their covariance.

    Iterates as (estimates, covariance) so callers can tuple-unpack.
    """

    estimates: np.ndarray
    covariance: np.ndarray
    parameter_names: tuple[str, ...]
    condition_number: float

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(np.diag(self.covariance))

    @property
    def correlation(self) -> np.ndarray:
        s = self.sigmas
        return self.covariance / np.outer(s, s)

    def __iter__(self):
        return iter((self.estimates, self.covariance))


def _weighted_linear_fit(design: np.ndarray, values: np.ndarray,
                         sigmas: np.ndarray, names: tuple[str, ...]) -> FitResult:
    weights = 1.0 / sigmas
    a = design * weights[:, None]
    y = values * weights
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    smax = s[0] if s.size else 0.0
    if smax <= 0.0 or s[-1] <= smax / _CONDITION_LIMIT:
        null = vt[s <= smax / _CONDITION_LIMIT].T if smax > 0.0 else np.eye(len(names))
        raise RankDeficient(
            "design matrix is ill-conditioned; unconstrained combinations exist",
            null_space=null)
    estimates = vt.T @ ((u.T @ y) / s)
    covariance = (vt.T * (1.0 / s**2)) @ vt
    return FitResult(estimates=estimates, covariance=covariance,
                     parameter_names=names, condition_number=float(smax / s[-1]))


def fit_isotropy(series, frame: LabFrame) -> FitResult:
    """Fit the seven anisotropy parameters to a (t, value, sigma) series.

    `series` is an (N, 3) array-like of sample time [s], measured
    delta g / g, and its one-sigma uncertainty.  Fragmented sampling is
    handled naturally; nearby Fourier components then show up as
    off-diagonal covariance.  Raises RankDeficient when the sampling
    cannot separate the parameters.
    """
    data = np.asarray(series, dtype=float)
    if data.ndim != 2 or data.shape[1] != 3:
        raise ValueError("series must be an (N, 3) array of (t, value, sigma)")
    if data.shape[0] < 2 * len(ISOTROPY_PARAM_NAMES):
        raise ValueError("need at least twice as many samples as parameters")
    times, values, sigmas = data.T
    if np.any(sigmas <= 0.0):
        raise ValueError("sample uncertainties must be positive")
    design = _isotropy_design_matrix(times, frame)
    return _weighted_linear_fit(design, values, sigmas, ISOTROPY_PARAM_NAMES)


# --------------------------------------------------------------------------
# EEP sensitivity algebra

@dataclass(frozen=True)
class EEPParams:
    """Isotropic per-particle EEP-violation coefficients.

    The a-type entries are the alpha-weighted time components in GeV;
    the c-type entries are dimensionless.  Only the sum a_e + a_p is
    observable with neutral matter, which is why the global fit runs
    over five parameters rather than six.
    """

    a_e: float = 0.0      # [GeV]
    a_p: float = 0.0      # [GeV]
    a_n: float = 0.0      # [GeV]
    c_e: float = 0.0
    c_p: float = 0.0
    c_n: float = 0.0
    frame: str = "sun-centered"

    @classmethod
    def zero(cls) -> "EEPParams":
        return cls()

    @classmethod
    def from_global_vector(cls, vec) -> "EEPParams":
        a_n, a_ep, c_n, c_p, c_e = (float(x) for x in vec)
        return cls(a_e=0.0, a_p=a_ep, a_n=a_n, c_e=c_e, c_p=c_p, c_n=c_n)

    def to_global_vector(self) -> np.ndarray:
        return np.array([self.a_n, self.a_e + self.a_p, self.c_n, self.c_p, self.c_e])


def eep_beta(species: Species, params: EEPParams) -> float:
    """Anomalous gravitational-to-inertial mass ratio offset of a test body.

    The body accelerates at g * (1 + beta); beta combines the a-type
    couplings and the mass-weighted c-type couplings of its
    constituents.
    """
    n_e, n_p, n_n = species.composition
    m_t = species.mass_gev
    a_sum = n_e * params.a_e + n_p * params.a_p + n_n * params.a_n
    c_sum = (n_e * M_E_GEV * params.c_e + n_p * M_P_GEV * params.c_p
             + n_n * M_N_GEV * params.c_n)
    return 2.0 * a_sum / m_t - (2.0 / 3.0) * c_sum / m_t


def eep_beta_row(species: Species) -> np.ndarray:
    """Linear weights such that eep_beta == row . global parameter vector.

    Valid for neutral composition (N_e == N_p), where the electron and
    proton a-couplings enter only through their sum.
    """
    n_e, n_p, n_n = species.composition
    if n_e != n_p:
        raise ValueError("global-parameter row requires neutral composition")
    m_t = species.mass_gev
    return np.array([
        2.0 * n_n / m_t,
        2.0 * n_p / m_t,
        -(2.0 / 3.0) * n_n * M_N_GEV / m_t,
        -(2.0 / 3.0) * n_p * M_P_GEV / m_t,
        -(2.0 / 3.0) * n_e * M_E_GEV / m_t,
    ])


def _composite_c_row(species: Species) -> np.ndarray:
    """Row (over the 5 global parameters) of the composite c coefficient."""
    n_e, n_p, n_n = species.composition
    m_t = species.mass_gev
    return np.array([0.0, 0.0,
                     n_n * M_N_GEV / m_t,
                     n_p * M_P_GEV / m_t,
                     n_e * M_E_GEV / m_t])


def _two_body_xi_row(m_light: float, light_row: np.ndarray,
                     m_heavy: float, heavy_row: np.ndarray) -> np.ndarray:
    """xi row for a transition scaling with the two-body reduced mass.

    A frequency f ~ (m1 m2)^2 / (m1 + m2)^3 (hyperfine case) and
    f ~ m1 m2 / (m1 + m2) (optical case) lead to the same structure;
    this helper implements the hyperfine power counting.
    """
    total = m_light + m_heavy
    return -(2.0 / 3.0) * ((2.0 * m_heavy - m_light) * light_row
                           + (2.0 * m_light - m_heavy) * heavy_row) / total


_C_E_ROW = np.array([0.0, 0.0, 0.0, 0.0, 1.0])
_C_P_ROW = np.array([0.0, 0.0, 0.0, 1.0, 0.0])
_C_N_ROW = np.array([0.0, 0.0, 1.0, 0.0, 0.0])


def clock_sensitivity_row(system: str, species: Species | None = None) -> np.ndarray:
    """Linear weights of a clock's potential-dependence coefficient xi.

    Systems: "H_hfs" (hydrogen ground-state hyperfine), "hfs" (hyperfine
    of `species`, nucleus treated as one composite body),
    "Fe57_mossbauer" (14.4 keV gamma transition, valence-neutron
    scaling), and "optical" (electronic transition of `species`,
    electron/atom reduced-mass scaling).
    """
    if system == "H_hfs":
        return _two_body_xi_row(M_E_GEV, _C_E_ROW, M_P_GEV, _C_P_ROW)
    if system == "hfs":
        if species is None:
            raise ValueError("hfs sensitivity needs a species")
        n_e, n_p, n_n = species.composition
        m_nuc = species.mass_gev - n_e * M_E_GEV
        nuc_row = (n_p * M_P_GEV * _C_P_ROW + n_n * M_N_GEV * _C_N_ROW) / m_nuc
        return _two_body_xi_row(M_E_GEV, _C_E_ROW, m_nuc, nuc_row)
    if system == "Fe57_mossbauer":
        fe56 = get_species("Fe56")
        m56 = fe56.mass_gev
        m57 = get_species("Fe57").mass_gev
        return -(2.0 / 3.0) * (m56 * _C_N_ROW
                               + M_N_GEV * _composite_c_row(fe56)) / m57
    if system == "optical":
        if species is None:
            raise ValueError("optical sensitivity needs a species")
        m_a = species.mass_gev
        # f ~ m_e m_A / (m_e + m_A): first-power reduced-mass scaling
        return -(2.0 / 3.0) * (m_a * _C_E_ROW + M_E_GEV * _composite_c_row(species)) \
            / (M_E_GEV + m_a)
    raise ValueError(f"unknown clock system {system!r}")


def clock_sensitivities(system: str, params: EEPParams,
                        species: Species | None = None) -> float:
    """Fractional frequency shift per unit gravitational potential, xi."""
    return float(clock_sensitivity_row(system, species) @ params.to_global_vector())


def gravitational_redshift_observable(potential_start: float, potential_end: float,
                                      source_speed: float, params: EEPParams,
                                      platform: Species | None = None) -> float:
    """Clock-comparison observable of a ballistic hydrogen-maser flight.

    Potentials are the mapped values at the two clocks [m^2/s^2] and
    `source_speed` the flying clock's speed [m/s].  The platform body
    (default fused silica) is the test mass whose free fall calibrated
    the potential map.  With all parameters zero this reduces to the
    standard redshift minus time dilation.
    """
    if platform is None:
        platform = get_species("silica")
    xi = clock_sensitivities("H_hfs", params)
    beta_pl = eep_beta(platform, params)
    return ((potential_start - potential_end) / C**2 * (1.0 + xi - beta_pl)
            - source_speed**2 / (2.0 * C**2))


def _free_particle_beta(mass_gev: float, a_gev: float, c00: float,
                        antiparticle: bool = False) -> float:
    sign = -1.0 if antiparticle else 1.0
    return 2.0 * sign * a_gev / mass_gev - (2.0 / 3.0) * c00


def neutron_excess_decomposition(species_a: Species, species_b: Species,
                                 params: EEPParams,
                                 kinetic_a: dict[str, float] | None = None,
                                 kinetic_b: dict[str, float] | None = None) -> float:
    """beta_A - beta_B in neutron-excess / mass-defect form.

    `kinetic_a` and `kinetic_b` map particle species "e", "p", "n" to
    the bound kinetic energy fractions T_int / (M c^2) of each body;
    they default to zero.  The kinetic terms couple to the
    particle+antiparticle anomaly sums, which survive even when the
    free-particle anomalies cancel.
    """
    kinetic_a = dict(kinetic_a or {})
    kinetic_b = dict(kinetic_b or {})
    m_e, m_p, m_n = M_E_GEV, M_P_GEV, M_N_GEV

    def excess_and_defect(sp: Species) -> tuple[float, float]:
        n_e, n_p, n_n = sp.composition
        excess = (m_e + m_p) / m_p * n_n - n_p
        defect = sp.mass_gev - n_n * m_n - n_p * m_p - n_e * m_e
        defect -= (m_n - m_p) * (m_e + m_p) / m_n * n_p
        return excess, defect

    beta_e = _free_particle_beta(m_e, params.a_e, params.c_e)
    beta_p = _free_particle_beta(m_p, params.a_p, params.c_p)
    beta_n = _free_particle_beta(m_n, params.a_n, params.c_n)
    beta_ep = m_e / m_p * beta_e + beta_p
    beta_ep_minus_n = beta_ep - (m_e + m_p) / m_n * beta_n
    beta_ep_plus_n = (m_e + m_p) / m_n * beta_ep + beta_n

    ex_a, de_a = excess_and_defect(species_a)
    ex_b, de_b = excess_and_defect(species_b)
    mass_a = species_a.mass_gev
    mass_b = species_b.mass_gev
    prefactor = m_n**2 / (m_n**2 + (m_e + m_p)**2)
    core = prefactor * ((ex_a / mass_a - ex_b / mass_b) * m_p * beta_ep_minus_n
                        - (de_a / mass_a - de_b / mass_b) * beta_ep_plus_n)

    pair_sums = {"e": -(4.0 / 3.0) * params.c_e,
                 "p": -(4.0 / 3.0) * params.c_p,
                 "n": -(4.0 / 3.0) * params.c_n}
    kinetic = 0.0
    for w, pair in pair_sums.items():
        kinetic -= 0.5 * (kinetic_a.get(w, 0.0) - kinetic_b.get(w, 0.0)) * pair
    return core + kinetic


# --------------------------------------------------------------------------
# global multivariate-normal fit

@dataclass(frozen=True)
class ExperimentConstraint:
    """One measured linear combination of the five global parameters."""

    label: str
    row: tuple[float, ...]
    value: float
    sigma: float
    citation: str = ""

    def __post_init__(self):
        row = tuple(float(x) for x in self.row)
        if len(row) != len(GLOBAL_PARAM_NAMES):
            raise ValueError(f"row must have {len(GLOBAL_PARAM_NAMES)} weights")
        if not all(math.isfinite(x) for x in row):
            raise ValueError("row weights must be finite")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "row", row)


def matter_wave_constraint(label: str, atom: Species, reference: Species,
                           value: float, sigma: float,
                           citation: str = "") -> ExperimentConstraint:
    """Constraint from comparing free-fall phase kgT^2 of an atom to a
    reference body; the observable is beta_atom - beta_reference.

    Lattice-hold (Bloch-oscillation) measurements produce the same row
    because the atoms stay in the species eigenstate throughout.
    """
    row = eep_beta_row(atom) - eep_beta_row(reference)
    return ExperimentConstraint(label=label, row=tuple(row), value=value,
                                sigma=sigma, citation=citation)


def global_fit(constraints) -> FitResult:
    """Generalized least squares over the five global EEP parameters.

    Needs at least five constraints with linearly independent rows;
    raises RankDeficient (with a null-space basis) otherwise.  Large
    condition numbers reproduce the situation where tight single-row
    bounds coexist with much looser marginal parameter bounds.
    """
    constraints = list(constraints)
    if len(constraints) < len(GLOBAL_PARAM_NAMES):
        raise ValueError("need at least as many constraints as parameters")
    design = np.array([c.row for c in constraints], dtype=float)
    values = np.array([c.value for c in constraints], dtype=float)
    sigmas = np.array([c.sigma for c in constraints], dtype=float)
    return _weighted_linear_fit(design, values, sigmas, GLOBAL_PARAM_NAMES)


def reference_bounds() -> dict:
    """Published reference bounds shipped for display and comparison.

    These numbers are dataset values, not regression targets: the raw
    data behind them is not distributed with the package.
    """
    text = resources.files("matterwave.data").joinpath("reference_bounds.json").read_text()
    return json.loads(text)
