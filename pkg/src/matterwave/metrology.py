"""Noise propagation and error budgets for drop-style interferometers.

Vibration noise enters through the two-sided sensitivity function of a
phase difference read out between two times t0 < t1 < 0 before release;
piecewise power-law acceleration spectra are integrated against it.  Allan
statistics and shot noise cover the random budget; systematic budgets sum
offsets and combine uncertainties in quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import CoverageGap, EmptySeries, InsufficientData, UnitMismatch

__all__ = [
    "NoiseSegment",
    "NoiseModel",
    "BudgetRow",
    "ErrorBudget",
    "sensitivity_function",
    "mz_sensitivity_function",
    "vibration_phase_noise",
    "allan_deviation",
    "shot_noise",
    "rotation_phase",
    "mean_field_phase",
    "budget_combine",
    "load_noise_model",
    "load_budget",
]

_BUDGET_UNITS = ("ppb", "ppt", "ppm", "rad")


@dataclass(frozen=True)
class NoiseSegment:
    """Power-law acceleration spectral density over one frequency band.

    a(f) = amplitude * (f / f_lo)^exponent for f in [f_lo, f_hi],
    amplitude in [m s^-2 Hz^-1/2].
    """

    f_lo: float
    f_hi: float
    amplitude: float
    exponent: float

    def __post_init__(self):
        if not 0.0 < self.f_lo < self.f_hi:
            raise ValueError("require 0 < f_lo < f_hi")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be nonnegative")

    def asd(self, f):
        return self.amplitude * (np.asarray(f) / self.f_lo) ** self.exponent


@dataclass(frozen=True)
class NoiseModel:
    """Contiguous piecewise power-law acceleration spectrum."""

    segments: tuple
    name: str = "custom"

    def __post_init__(self):
        segs = tuple(sorted(self.segments, key=lambda s: s.f_lo))
        if not segs:
            raise ValueError("a noise model needs at least one segment")
        for lo, hi in zip(segs, segs[1:]):
            if hi.f_lo > lo.f_hi * (1.0 + 1e-12):
                raise CoverageGap(
                    f"spectrum gap between {lo.f_hi} Hz and {hi.f_lo} Hz")
        object.__setattr__(self, "segments", segs)

    @property
    def f_lo(self) -> float:
        return self.segments[0].f_lo

    @property
    def f_hi(self) -> float:
        return self.segments[-1].f_hi


def sensitivity_function(t0: float, t1: float, omega):
    """Acceleration-to-phase transfer of a two-time position comparison.

    F(omega) = 4 sin(omega (t0 + t1)/2) sin(omega (t0 - t1)/2); the phase
    variance integrand is (k_eff a(f) |F| / omega^2)^2.
    """
    omega = np.asarray(omega, dtype=float)
    out = 4.0 * np.sin(omega * (t0 + t1) / 2.0) * np.sin(omega * (t0 - t1) / 2.0)
    return float(out) if out.ndim == 0 else out


def mz_sensitivity_function(pulse_separation: float, omega):
    """Three-pulse transfer 4 sin^2(omega T / 2)."""
    omega = np.asarray(omega, dtype=float)
    out = 4.0 * np.sin(omega * pulse_separation / 2.0) ** 2
    return float(out) if out.ndim == 0 else out


def vibration_phase_noise(model: NoiseModel, t0: float, t1: float,
                          k_eff: float, f_range=None) -> float:
    """RMS phase [rad] from acceleration noise filtered by the two-time
    sensitivity function.

    Integrates (a(f) F(2 pi f) / (2 pi f)^2)^2 over `f_range` (default:
    the model's full span) in oscillation-scaled chunks so the adaptive
    quadrature resolves every sideband, then scales by k_eff.  Raises
    CoverageGap when the model does not cover all of `f_range`.
    """
    if k_eff <= 0.0:
        raise ValueError("k_eff must be positive")
    if not (t0 < t1 < 0.0):
        raise ValueError("require t0 < t1 < 0 (times before release)")
    if f_range is None:
        f_range = (model.f_lo, model.f_hi)
    f_lo, f_hi = (float(f) for f in f_range)
    if not 0.0 < f_lo < f_hi:
        raise ValueError("require 0 < f_lo < f_hi")
    pad = 1.0 + 1e-12
    if f_lo * pad < model.f_lo or f_hi > model.f_hi * pad:
        raise CoverageGap(
            f"model covers [{model.f_lo}, {model.f_hi}] Hz, "
            f"requested [{f_lo}, {f_hi}] Hz")
    a = abs(t0 + t1) / 2.0
    b = abs(t0 - t1) / 2.0
    chunk = 4.0 / (2.0 * (a + b))
    total = 0.0
    for seg in model.segments:
        lo = max(seg.f_lo, f_lo)
        top = min(seg.f_hi, f_hi)
        if lo >= top:
            continue

        def integrand(f, seg=seg):
            w = 2.0 * math.pi * f
            return (seg.asd(f) * sensitivity_function(t0, t1, w) / w**2) ** 2

        while lo < top:
            hi = min(lo + chunk, top)
            val, _ = quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-10, limit=200)
            total += val
            lo = hi
    return k_eff * math.sqrt(total)


def allan_deviation(series, taus=None, sample_interval: float = 1.0):
    """Non-overlapping two-sample Allan deviation of a uniform series.

    Returns a list of (tau, deviation) pairs.  Each requested tau must
    be a multiple of the sample interval; the default ladder doubles
    the averaging window while at least three bins remain.  Raises
    InsufficientData when a tau leaves fewer than three bins.
    """
    y = np.asarray(series, dtype=float)
    if y.ndim != 1:
        raise ValueError("series must be one-dimensional")
    if sample_interval <= 0.0:
        raise ValueError("sample interval must be positive")
    n = y.size
    if taus is None:
        factors = []
        m = 1
        while n // m >= 3:
            factors.append(m)
            m *= 2
        if not factors:
            raise InsufficientData(f"{n} samples cannot form three bins")
    else:
        factors = []
        for tau in taus:
            m = int(round(tau / sample_interval))
            if m < 1 or abs(tau - m * sample_interval) > 1e-9 * sample_interval:
                raise ValueError(
                    f"tau {tau} is not a multiple of the sample interval")
            factors.append(m)
    out = []
    for m in factors:
        n_bins = n // m
        if n_bins < 3:
            raise InsufficientData(
                f"averaging factor {m} leaves {n_bins} bins; need at least 3")
        bins = y[: n_bins * m].reshape(n_bins, m).mean(axis=1)
        diffs = np.diff(bins)
        out.append((m * sample_interval,
                    math.sqrt(0.5 * float(np.mean(diffs**2)))))
    return out


def shot_noise(n_atoms: float, contrast: float, repetitions: int = 1) -> float:
    """Quantum-projection phase noise 1 / (C sqrt(N)) / sqrt(runs) [rad]."""
    if not 0.0 < contrast <= 1.0:
        raise ValueError("contrast must be in (0, 1]")
    if n_atoms <= 0 or repetitions < 1:
        raise ValueError("n_atoms and repetitions must be positive")
    return 1.0 / (contrast * math.sqrt(n_atoms)) / math.sqrt(repetitions)


def rotation_phase(k_eff: float, transverse_velocity: float,
                   rotation_rate: float, t0: float, t1: float) -> float:
    """Order-of-magnitude rotation phase k_eff * v * Omega * (t1 - t0) [rad].

    Budget-entry helper only; no beam-geometry modeling.
    """
    return k_eff * transverse_velocity * rotation_rate * (t1 - t0)


def mean_field_phase(scattering_length: float, density: float,
                     duration: float, mass: float, hbar: float | None = None) -> float:
    """Interaction phase 4 pi hbar a n T / m [rad]; inputs user-supplied."""
    if hbar is None:
        from .constants import HBAR
        hbar = HBAR
    return 4.0 * math.pi * hbar * scattering_length * density * duration / mass


@dataclass(frozen=True)
class BudgetRow:
    """One systematic or statistical term: a known offset plus an uncertainty."""

    label: str
    offset: float
    uncertainty: float
    unit: str

    def __post_init__(self):
        if self.unit not in _BUDGET_UNITS:
            raise UnitMismatch(
                f"unit {self.unit!r} not one of {_BUDGET_UNITS}")
        if self.uncertainty < 0.0:
            raise ValueError("uncertainty must be nonnegative")


@dataclass(frozen=True)
class ErrorBudget:
    """Named collection of independent error terms."""

    name: str
    rows: tuple

    def __post_init__(self):
        rows = tuple(self.rows)
        if not rows:
            raise EmptySeries("an error budget needs at least one row")
        object.__setattr__(self, "rows", rows)

    @property
    def unit(self) -> str:
        return self.rows[0].unit


def budget_combine(budget: ErrorBudget) -> tuple[float, float]:
    """(summed offsets, root-sum-squared uncertainties); single unit required."""
    units = {row.unit for row in budget.rows}
    if len(units) != 1:
        raise UnitMismatch(
            f"budget {budget.name!r} mixes units {sorted(units)}")
    offset = sum(row.offset for row in budget.rows)
    uncertainty = math.sqrt(sum(row.uncertainty**2 for row in budget.rows))
    return offset, uncertainty


def _read_toml(source, packaged: str) -> dict:
    """Parse `source` as a path, or fall back to the packaged table."""
    import os

    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    if isinstance(source, str) and not os.path.exists(source):
        from importlib import resources

        path = resources.files("matterwave.data") / packaged
        table = tomllib.loads(path.read_text(encoding="utf-8"))
        if source not in table:
            known = sorted(k for k in table if k != "schema_version")
            raise KeyError(f"{source!r} is not a packaged name; have {known}")
        return dict(table[source], name=source)
    with open(source, "rb") as fh:
        return tomllib.load(fh)


def load_noise_model(source) -> NoiseModel:
    """Build a NoiseModel from a packaged name ("low", "high",
    "very-low") or from a TOML file holding a single model."""
    table = _read_toml(source, "noise_models.toml")
    segments = tuple(
        NoiseSegment(f_lo=seg["f_lo"], f_hi=seg["f_hi"],
                     amplitude=seg["amplitude"], exponent=seg["exponent"])
        for seg in table["segments"])
    return NoiseModel(segments=segments, name=table.get("name", "custom"))


def load_budget(source) -> ErrorBudget:
    """Build an ErrorBudget from a packaged name (see data/budgets.toml)
    or from a TOML file holding a single budget."""
    table = _read_toml(source, "budgets.toml")
    unit = table["unit"]
    rows = tuple(
        BudgetRow(label=row["label"], offset=row["offset"],
                  uncertainty=row["uncertainty"], unit=unit)
        for row in table["rows"])
    return ErrorBudget(name=table.get("name", "custom"), rows=rows)
