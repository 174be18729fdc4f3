"""Fundamental constants and particle species data.

Every other module reads these values and never redefines them.  The
constant table is pinned to the 2010 CODATA adjustment: the headline
fine-structure-constant reproduction depends on that era's Rydberg
constant, electron relative mass, and atomic mass unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


@dataclass(frozen=True)
class PhysicalConstants:
    """Immutable table of fundamental constants (SI units, CODATA 2010)."""

    c: float = 299792458.0               # speed of light [m/s], exact
    h: float = 6.62606957e-34            # Planck constant [J s]
    G: float = 6.67384e-11               # Newton constant [m^3 kg^-1 s^-2]
    kB: float = 1.3806488e-23            # Boltzmann constant [J/K]
    a0: float = 0.52917721092e-10        # Bohr radius [m]
    Rinf: float = 10973731.568539        # Rydberg constant [1/m]
    amu: float = 1.660538921e-27         # atomic mass unit [kg]
    Ar_e: float = 5.4857990946e-4        # electron relative mass [dimensionless]
    # hbar and eps0 are derived in __post_init__ so that h = 2*pi*hbar and
    # eps0 = 1/(mu0 c^2) hold to machine precision.
    hbar: float = field(init=False)      # reduced Planck constant [J s]
    eps0: float = field(init=False)      # vacuum permittivity [F/m]

    def __post_init__(self):
        for name in ("c", "h", "G", "kB", "a0", "Rinf", "amu", "Ar_e"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"constant {name} must be positive")
        object.__setattr__(self, "hbar", self.h / (2.0 * math.pi))
        object.__setattr__(self, "eps0", 1.0 / (4.0e-7 * math.pi * self.c**2))


CODATA2010 = PhysicalConstants()

# Convenience aliases used throughout the package.
C = CODATA2010.c            # [m/s]
H = CODATA2010.h            # [J s]
HBAR = CODATA2010.hbar      # [J s]
G_NEWTON = CODATA2010.G     # [m^3 kg^-1 s^-2]
KB = CODATA2010.kB          # [J/K]
EPS0 = CODATA2010.eps0      # [F/m]
A0 = CODATA2010.a0          # [m]
RINF = CODATA2010.Rinf      # [1/m]
AMU = CODATA2010.amu        # [kg]

E_CHARGE = 1.602176565e-19  # elementary charge [C], CODATA 2010
STANDARD_GRAVITY = 9.80665  # [m/s^2]

# Particle rest energies [GeV], CODATA 2010; used by the equivalence-
# principle sensitivity algebra, which is conventionally written in GeV.
M_E_GEV = 0.510998928e-3
M_P_GEV = 0.938272046
M_N_GEV = 0.939565379

KG_TO_GEV = C**2 / (E_CHARGE * 1e9)  # mass [kg] -> rest energy [GeV]


@dataclass(frozen=True)
class Species:
    """A particle or atom with mass, charge, and nucleon composition."""

    name: str
    mass: float                      # [kg]
    relative_mass: float             # A_r [dimensionless]
    charge: float                    # [C], zero for neutrals
    composition: tuple[int, int, int]  # (N_e, N_p, N_n)
    polarizability: float | None = None  # dc polarizability [C m^2 / V]

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if any(n < 0 for n in self.composition):
            raise ValueError("composition entries must be nonnegative")
        n_e, n_p, _ = self.composition
        if self.charge == 0.0 and n_e != n_p:
            raise ValueError("neutral species must have N_e == N_p")

    @property
    def mass_gev(self) -> float:
        """Rest energy in GeV."""
        return self.mass * KG_TO_GEV


def _load_registry() -> tuple[dict[str, Species], dict[str, str]]:
    text = resources.files("matterwave.data").joinpath("species.toml").read_text()
    raw = tomllib.loads(text)
    table: dict[str, Species] = {}
    aliases: dict[str, str] = {}
    for name, entry in raw.items():
        ar = float(entry["relative_mass"])
        sp = Species(
            name=name,
            mass=ar * AMU,
            relative_mass=ar,
            charge=float(entry["charge"]) * E_CHARGE,
            composition=tuple(int(n) for n in entry["composition"]),
            polarizability=entry.get("polarizability"),
        )
        table[name] = sp
        aliases[_normalize(name)] = name
        for alias in entry.get("aliases", []):
            aliases[_normalize(alias)] = name
    return table, aliases


def _normalize(name: str) -> str:
    return "".join(ch for ch in name.lower() if ch.isalnum())


_REGISTRY, _ALIASES = _load_registry()


def get_species(name: str) -> Species:
    """Look up a species by name or alias (case and punctuation insensitive)."""
    key = _normalize(name)
    if key not in _ALIASES:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown species {name!r}; known: {known}")
    return _REGISTRY[_ALIASES[key]]


def list_species() -> list[str]:
    return sorted(_REGISTRY)


def compton_frequency(species: Species) -> float:
    """Rest-mass oscillation angular frequency m c^2 / hbar [rad/s]."""
    return species.mass * C**2 / HBAR


def recoil_frequency(species: Species, wavenumber: float) -> float:
    """Photon-recoil angular frequency hbar k^2 / (2 m) [rad/s]."""
    if wavenumber < 0.0:
        raise ValueError("wavenumber must be nonnegative")
    return HBAR * wavenumber**2 / (2.0 * species.mass)
