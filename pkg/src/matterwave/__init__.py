"""Phase models, clock solvers, and error budgets for matter-wave interferometry.

The package splits along the lines a measurement campaign does:

- `constants` / `errors`: pinned constant table, species registry, and
  the exception taxonomy every module shares.
- `cclock`: exact relativistic solver for an oscillator locked to a
  rational subharmonic of a particle's rest-mass frequency, and the
  fine-structure-constant readout built on it.
- `phases`: interferometer phase responses, the potential/time-dilation/
  free-evolution decomposition, and source-mass geometry optimization.
- `penning`: axial-trap electron interferometry, perturbative phase
  expansions, and trap damping/thermometry.
- `kernel`: numerical checks behind the analytics: lattice path-integral
  and split-step propagators, curved-space Dirac algebra, Bragg ladders.
- `metrology`: vibration sensitivity integrals, Allan statistics, and
  named error budgets.
- `sme`: Lorentz-violation phenomenology: photon-sector coefficient
  algebra, sidereal/annual signal synthesis and fitting, and the
  equivalence-principle global fit.

Numbers are SI unless a docstring says otherwise; per-species data come
from the packaged registry (`constants.get_species`).
"""

from . import cclock, constants, errors, kernel, metrology, phases, penning, sme
from .cclock import alpha_from_compton, chain_compton_frequency, solve_lock
from .constants import (
    CODATA2010,
    Species,
    compton_frequency,
    get_species,
    list_species,
    recoil_frequency,
)
from .kernel import path_integral_propagate, splitstep_schrodinger
from .metrology import (
    allan_deviation,
    budget_combine,
    load_budget,
    load_noise_model,
    shot_noise,
    vibration_phase_noise,
)
from .penning import damping_optimum, double_diffraction_phase, single_phase
from .phases import (
    ab_design_geometry,
    ab_optimal_geometry,
    ab_phase,
    clock_comparison_decompose,
    mz_phase,
    rb_phase,
)
from .sme import SMECoefficients, fit_isotropy, global_fit, isotropy_signal

__version__ = "0.1.0"

__all__ = [
    "cclock",
    "constants",
    "errors",
    "kernel",
    "metrology",
    "phases",
    "penning",
    "sme",
    "CODATA2010",
    "Species",
    "get_species",
    "list_species",
    "compton_frequency",
    "recoil_frequency",
    "solve_lock",
    "alpha_from_compton",
    "chain_compton_frequency",
    "mz_phase",
    "rb_phase",
    "clock_comparison_decompose",
    "ab_optimal_geometry",
    "ab_design_geometry",
    "ab_phase",
    "single_phase",
    "double_diffraction_phase",
    "damping_optimum",
    "path_integral_propagate",
    "splitstep_schrodinger",
    "vibration_phase_noise",
    "allan_deviation",
    "shot_noise",
    "load_noise_model",
    "load_budget",
    "budget_combine",
    "SMECoefficients",
    "isotropy_signal",
    "fit_isotropy",
    "global_fit",
    "__version__",
]
