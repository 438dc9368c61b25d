"""Casimir-Lifshitz interaction energies and surface pressures for a
dielectric sphere enclosed in a magnetodielectric spherical cavity.

The package computes the fluctuation-induced interaction energy, the mean
surface pressure from the principle of virtual work, thermal (Matsubara)
free energies, the dilute ball's renormalized self-energy contribution, and
the planar large-radius limit, together with randomized verification suites
for the exact sign and monotonicity theorems these quantities obey.
"""

from .energetics import (
    EnergyReport,
    Geometry,
    PlanarLimitReport,
    SpectrumSpec,
    dilute_self_energy,
    dilute_self_free_energy,
    dilute_self_pressure,
    interaction_energy,
    interaction_pressure,
    matsubara_free_energy,
    matsubara_pressure,
    mode_summand,
    pair_sign_class,
    planar_limit_force,
    self_pressure_crossover_temperature,
    static_limit_summand,
    total_pressure,
)
from .errors import (
    CapabilityError,
    ConfigError,
    ContractionError,
    ConvergenceError,
    CrossValidationError,
    DomainError,
    UndefinedSignError,
    ValidityWarning,
)
from .harness import THEOREM_IDS, TheoremReport, a_ell, run_monotonicity_suite, run_sign_suite
from .media import (
    ResponseModel,
    SignClass,
    classify_sign,
    default_kappa_grid,
    default_r_grid,
    permeability_at,
    permittivity_at,
    permittivity_profile_at,
)
from .scattering import (
    ExteriorAmplitude,
    InteriorAmplitude,
    Mode,
    mie_exterior,
    mie_interior_cavity,
    t_radius_derivative,
    variable_phase_T,
)
from .specfun import LMAX_CAP, BesselPair, bessel_derivative_combo, bessel_eval, bessel_ladder

__version__ = "0.1.0"

__all__ = [
    "BesselPair",
    "CapabilityError",
    "ConfigError",
    "ContractionError",
    "ConvergenceError",
    "CrossValidationError",
    "DomainError",
    "EnergyReport",
    "ExteriorAmplitude",
    "Geometry",
    "InteriorAmplitude",
    "LMAX_CAP",
    "Mode",
    "PlanarLimitReport",
    "ResponseModel",
    "SignClass",
    "SpectrumSpec",
    "THEOREM_IDS",
    "TheoremReport",
    "UndefinedSignError",
    "ValidityWarning",
    "a_ell",
    "bessel_derivative_combo",
    "bessel_eval",
    "bessel_ladder",
    "classify_sign",
    "default_kappa_grid",
    "default_r_grid",
    "dilute_self_energy",
    "dilute_self_free_energy",
    "dilute_self_pressure",
    "interaction_energy",
    "interaction_pressure",
    "matsubara_free_energy",
    "matsubara_pressure",
    "mie_exterior",
    "mie_interior_cavity",
    "mode_summand",
    "pair_sign_class",
    "permeability_at",
    "permittivity_at",
    "permittivity_profile_at",
    "planar_limit_force",
    "run_monotonicity_suite",
    "run_sign_suite",
    "self_pressure_crossover_temperature",
    "static_limit_summand",
    "t_radius_derivative",
    "total_pressure",
    "variable_phase_T",
]
