"""Interaction energies, surface pressures, and the planar limit.

The interaction energy of a sphere of radius r1 inside a concentric spherical
cavity of radius r2 is a frequency integral of decoupled mode logarithms,

    E_int = (1/2pi) Int_0^inf dkappa  Sum_{l>=1, P} (2l+1) ln(1 - N_lP(kappa)),

where the round-trip factor ``N = (exterior amplitude) x (interior amplitude)``
has magnitude strictly below one.  Pressures follow from the principle of
virtual work, -(1/4 pi r1^2) dE/dr1, either by central finite differences or
by differentiating each mode through the closed-form radius derivative of the
exterior amplitude.  A Matsubara ladder replaces the integral at finite
temperature, with the zero mode half-weighted and reached by Richardson
extrapolation from two small frequencies.

Sign conventions verified throughout: with s1, s2 the potential signs of the
sphere and the wall relative to the gap and s = s1 s2 defined,
sign(E_int) = -s and sign(p_int) = +s, mode by mode.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (
    ContractionError,
    ConvergenceError,
    CrossValidationError,
    DomainError,
    UndefinedSignError,
    ValidityWarning,
)
from .media import (
    ResponseModel,
    SignClass,
    classify_sign,
    default_kappa_grid,
    default_r_grid,
    permittivity_at,
)
from .scattering import POLARIZATIONS, Mode, exterior_tables, interior_tables

__all__ = [
    "Geometry",
    "SpectrumSpec",
    "EnergyReport",
    "PlanarLimitReport",
    "pair_sign_class",
    "mode_summand",
    "interaction_energy",
    "interaction_pressure",
    "matsubara_free_energy",
    "matsubara_pressure",
    "static_limit_summand",
    "dilute_self_energy",
    "dilute_self_free_energy",
    "dilute_self_pressure",
    "self_pressure_crossover_temperature",
    "total_pressure",
    "planar_limit_force",
]

_ENERGY_UNIT = "inverse_length"
_PRESSURE_UNIT = "inverse_length^4"


@dataclass(frozen=True)
class Geometry:
    """Concentric sphere-in-cavity arrangement with its three media.

    The gap medium must be homogeneous and nonmagnetic; the sphere is
    nonmagnetic (a dielectric, possibly radially inhomogeneous); the wall may
    carry a permeability.  Radial profiles are continued past their nominal
    support with the surface value when the sphere radius is dilated
    virtually (finite-difference pressures), so ``r_max`` slightly below a
    dilated r1 is acceptable.
    """

    r1: float
    r2: float
    sphere_medium: ResponseModel
    wall_medium: ResponseModel
    gap_medium: ResponseModel

    def __post_init__(self):
        if not 0.0 < self.r1 < self.r2:
            raise DomainError(f"need 0 < r1 < r2, got r1={self.r1}, r2={self.r2}")
        if self.gap_medium.is_profile:
            raise DomainError("gap medium must be homogeneous")
        if self.gap_medium.is_magnetic:
            raise DomainError("gap medium must be nonmagnetic")
        if self.sphere_medium.is_magnetic:
            raise DomainError("sphere medium must be nonmagnetic")

    @property
    def gap_width(self) -> float:
        return self.r2 - self.r1


@dataclass(frozen=True)
class SpectrumSpec:
    """Spectral discretization: zero-temperature quadrature or Matsubara ladder.

    Zero temperature integrates kappa over (0, inf) through the rational map
    kappa = u/(1-u) / (r2-r1) with Gauss-Legendre nodes in u, doubling the
    node count until the result is stable to ``quad_tol``.  The Matsubara
    ladder sums kappa_n = 2 pi n T (k_B = 1) with the n = 0 term
    half-weighted.  The multipole sum stops after ``l_tail_runs`` consecutive
    orders contribute less than ``l_tail_tol`` of the running total, up to
    the hard cap ``l_max``.
    """

    mode: str = "zero_temperature"
    n_kappa: int = 64
    auto_refine: bool = True
    quad_tol: float = 1e-8
    n_kappa_max: int = 1024
    temperature: Optional[float] = None
    matsubara_tail_tol: float = 1e-9
    matsubara_n_max: int = 100_000
    l_tail_tol: float = 1e-9
    l_tail_runs: int = 3
    l_max: int = 200
    ode_rtol: float = 1e-10
    keep_ledger: bool = True

    def __post_init__(self):
        if self.mode not in ("zero_temperature", "matsubara"):
            raise DomainError(f"unknown spectrum mode {self.mode!r}")
        if self.n_kappa < 8:
            raise DomainError("n_kappa must be >= 8")
        if self.mode == "matsubara":
            if self.temperature is None or self.temperature <= 0.0:
                raise DomainError("matsubara spectra need temperature > 0")
        if self.l_tail_tol <= 0.0 or self.quad_tol <= 0.0:
            raise DomainError("tolerances must be > 0")
        if self.l_max < 1:
            raise DomainError("l_max must be >= 1")

    @classmethod
    def zero_temperature(cls, **kwargs):
        return cls(mode="zero_temperature", **kwargs)

    @classmethod
    def matsubara(cls, temperature, **kwargs):
        return cls(mode="matsubara", temperature=temperature, **kwargs)


@dataclass(frozen=True)
class EnergyReport:
    """A converged energy or pressure with its per-mode ledger.

    ``per_mode`` holds (l, polarization, kappa_or_index, summand) records for
    the final pass; ``value`` equals the weighted sum of the ledger within
    accumulation tolerance.  ``sign_class`` is the pair class s = s1 s2.
    """

    value: float
    unit: str
    per_mode: tuple
    l_max_used: int
    n_kappa_used: int
    sign_class: SignClass
    converged: bool
    diagnostics: dict = field(repr=False, default_factory=dict)


@dataclass(frozen=True)
class PlanarLimitReport:
    """Radius-ladder extrapolation of the force per unit area at fixed gap."""

    sign: int
    force: float
    table: tuple
    converged: bool


# ---------------------------------------------------------------------------
# Sign classification of a geometry
# ---------------------------------------------------------------------------

def pair_sign_class(geometry: Geometry, n_kappa: int = 64, n_r: int = 32):
    """Classify both bodies against the gap; returns (pair, s1, s2)."""
    kgrid = default_kappa_grid(geometry.gap_width, n_kappa)
    s1 = classify_sign(
        geometry.sphere_medium, geometry.gap_medium, kgrid,
        default_r_grid(geometry.sphere_medium, n_r),
    )
    s2 = classify_sign(
        geometry.wall_medium, geometry.gap_medium, kgrid,
        default_r_grid(geometry.wall_medium, n_r),
    )
    if s1.defined and s2.defined:
        pair = SignClass("plus" if s1.s * s2.s > 0 else "minus")
    else:
        pair = SignClass("undefined")
    return pair, s1, s2


# ---------------------------------------------------------------------------
# Mode sums at fixed imaginary frequency
# ---------------------------------------------------------------------------

def _l_start_estimate(geometry: Geometry, spec: SpectrumSpec) -> int:
    # modes decay geometrically with ratio ~ (r1/r2)^2
    ratio = geometry.r1 / geometry.r2
    est = int(math.log(spec.l_tail_tol) / (2.0 * math.log(ratio))) + 8
    return max(8, min(spec.l_max, est))


def _mode_arrays(geometry, kappa, lmax, spec, need_rho):
    """Summand and radius-derivative arrays over l = 0..lmax at one kappa."""
    eps_gap = permittivity_at(geometry.gap_medium, kappa)
    sgn1, log1, rho1 = exterior_tables(
        geometry.sphere_medium, kappa, geometry.r1, eps_gap, lmax,
        need_rho=need_rho, rtol=spec.ode_rtol,
    )
    sgn2, log2 = interior_tables(geometry.wall_medium, kappa, geometry.r2, eps_gap, lmax)
    sgn_n = sgn1 * sgn2
    with np.errstate(over="ignore"):
        prod = np.where(sgn_n != 0.0, sgn_n * np.exp(log1 + log2), 0.0)
    worst = float(np.max(np.abs(prod))) if prod.size else 0.0
    if worst >= 1.0 or not np.all(np.isfinite(prod)):
        idx = np.unravel_index(np.argmax(np.abs(prod)), prod.shape)
        raise ContractionError(
            f"mode product magnitude {worst} >= 1 at l={idx[1]}, "
            f"P={POLARIZATIONS[idx[0]]}, kappa={kappa}"
        )
    weights = 2.0 * np.arange(lmax + 1, dtype=float) + 1.0
    summand = weights[None, :] * np.log1p(-prod)
    dsum = None
    if need_rho:
        dsum = -weights[None, :] * prod * rho1 / (1.0 - prod)
    return summand, dsum, worst


def _truncate_l(summand, tol, runs, floor=0.0):
    """First multipole where `runs` consecutive contributions fall below
    tol x |running total| (or below an absolute floor set by the caller from
    the already-accumulated integral scale); None when the rule never fires."""
    contrib = np.abs(summand[0, 1:]) + np.abs(summand[1, 1:])
    running = np.abs(np.cumsum(summand[0, 1:] + summand[1, 1:]))
    ok = (contrib <= tol * running) | (contrib <= floor)
    run = 0
    for i, flag in enumerate(ok):
        run = run + 1 if flag else 0
        if run >= runs:
            return i + 1  # l value (arrays offset by 1)
    return None


def _mode_sum(geometry, kappa, spec, need_rho, l_start, floor=0.0):
    """Converged multipole sum at one kappa.

    Returns (S, dS, l_used, summand, dsum, max_product); raises
    ConvergenceError when the multipole cap is hit before the tail rule.
    """
    lmax = max(8, min(l_start, spec.l_max))
    while True:
        summand, dsum, worst = _mode_arrays(geometry, kappa, lmax, spec, need_rho)
        l_used = _truncate_l(summand, spec.l_tail_tol, spec.l_tail_runs, floor)
        if l_used is not None:
            sl = summand[:, 1 : l_used + 1]
            s_total = float(np.sum(sl))
            d_total = float(np.sum(dsum[:, 1 : l_used + 1])) if need_rho else 0.0
            return s_total, d_total, l_used, summand[:, : l_used + 1], (
                dsum[:, : l_used + 1] if need_rho else None
            ), worst
        if lmax >= spec.l_max:
            tail = float(np.abs(summand[0, -1]) + np.abs(summand[1, -1]))
            raise ConvergenceError(
                f"multipole sum not converged at cap l_max={spec.l_max} "
                f"(kappa={kappa}); raise l_max for near-contact geometries",
                {"kappa": kappa, "l_max": spec.l_max, "last_contribution": tail},
            )
        lmax = min(2 * lmax, spec.l_max)


def mode_summand(geometry: Geometry, mode: Mode, kappa: float) -> float:
    """Single-channel contribution (2l+1) ln(1 - N) at one kappa.

    Negative when the pair sign s is +1, positive when s is -1, zero when
    either body matches the gap.  Raises ContractionError should the product
    magnitude reach one.
    """
    if kappa <= 0.0:
        raise DomainError("kappa must be > 0")
    spec = SpectrumSpec()
    summand, _, _ = _mode_arrays(geometry, kappa, mode.l, spec, need_rho=False)
    return float(summand[mode.pol_index, mode.l])


# ---------------------------------------------------------------------------
# Zero-temperature quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=32)
def _unit_gauss(n):
    t, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (t + 1.0), 0.5 * w


def _zero_t_pass(geometry, spec, n_nodes, need_rho):
    """One Gauss pass over the rational kappa map; per-node mode sums.

    Nodes run in increasing kappa so that, once the integral scale is
    established, the exponentially suppressed high-frequency nodes can stop
    their multipole sums at an absolute floor far below roundoff of the
    total instead of chasing nine decades of relative decay.
    """
    u, w = _unit_gauss(n_nodes)
    sigma = 1.0 / geometry.gap_width
    kappas = sigma * u / (1.0 - u)
    jac = sigma / (1.0 - u) ** 2
    l_hint = _l_start_estimate(geometry, spec)
    e_terms = []
    d_terms = []
    l_used_max = 0
    worst = 0.0
    scale = 0.0
    ledger = []
    for j, kappa in enumerate(kappas):
        weight = w[j] * jac[j] / (2.0 * math.pi)
        floor = 1e-16 * scale / weight if scale > 0.0 else 0.0
        s, d, l_used, summand, dsum, wj = _mode_sum(
            geometry, kappa, spec, need_rho, l_hint, floor
        )
        l_used_max = max(l_used_max, l_used)
        worst = max(worst, wj)
        e_terms.append(weight * s)
        scale = max(scale, abs(math.fsum(e_terms)))
        if need_rho:
            d_terms.append(weight * d)
        if spec.keep_ledger:
            for l in range(1, summand.shape[1]):
                for p, pol in enumerate(POLARIZATIONS):
                    ledger.append((l, pol, float(kappa), float(summand[p, l])))
    energy = math.fsum(e_terms)
    denergy = math.fsum(d_terms) if need_rho else 0.0
    return energy, denergy, l_used_max, worst, ledger


def _zero_t_converged(geometry, spec, need_rho):
    """Refine the node count until the integral is stable to quad_tol."""
    n = spec.n_kappa
    prev = None
    while True:
        res = _zero_t_pass(geometry, spec, n, need_rho)
        target = res[1] if need_rho else res[0]
        if not spec.auto_refine:
            return res, n, 0.0
        if prev is not None:
            delta = abs(target - prev)
            if delta <= spec.quad_tol * max(abs(target), 1e-300):
                return res, n, delta
        if 2 * n > spec.n_kappa_max:
            raise ConvergenceError(
                f"quadrature not converged at {n} nodes",
                {"n_kappa": n, "last_change": abs(target - (prev or 0.0))},
            )
        prev = target
        n *= 2


def _require_sign(geometry, allow_undefined):
    pair, s1, s2 = pair_sign_class(geometry)
    if not pair.defined and not allow_undefined:
        raise UndefinedSignError(
            "material orderings give no definite sign class; pass "
            "allow_undefined_sign=True to compute anyway"
        )
    return pair


def interaction_energy(geometry: Geometry, spectrum: SpectrumSpec,
                       allow_undefined_sign: bool = False) -> EnergyReport:
    """Interaction energy of the sphere-cavity pair at zero temperature.

    The returned value is negative when the pair sign s is +1 and positive
    when s is -1.  Dispatches to the Matsubara free energy when the spectrum
    is thermal.
    """
    if spectrum.mode == "matsubara":
        return matsubara_free_energy(geometry, spectrum, allow_undefined_sign)
    pair = _require_sign(geometry, allow_undefined_sign)
    (energy, _, l_used, worst, ledger), n_used, delta = _zero_t_converged(
        geometry, spectrum, need_rho=False
    )
    return EnergyReport(
        value=energy,
        unit=_ENERGY_UNIT,
        per_mode=tuple(ledger),
        l_max_used=l_used,
        n_kappa_used=n_used,
        sign_class=pair,
        converged=True,
        diagnostics={
            "quad_change": delta,
            "max_mode_product": worst,
            "gap_width": geometry.gap_width,
        },
    )


def _energy_value(geometry, spectrum, allow_undefined_sign):
    quiet = replace(spectrum, keep_ledger=False)
    if spectrum.mode == "matsubara":
        return matsubara_free_energy(geometry, quiet, allow_undefined_sign).value
    return interaction_energy(geometry, quiet, allow_undefined_sign).value


def _fd_derivative(f, x, h):
    """Central difference with one Richardson refinement step."""
    d1 = (f(x + h) - f(x - h)) / (2.0 * h)
    d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h
    return (4.0 * d2 - d1) / 3.0


def interaction_pressure(geometry: Geometry, spectrum: SpectrumSpec,
                         method: str = "calogero_analytic",
                         allow_undefined_sign: bool = False,
                         cross_validate: bool = False) -> EnergyReport:
    """Mean interaction pressure on the sphere surface, -(dE/dr1)/(4 pi r1^2).

    ``calogero_analytic`` differentiates every mode through the closed-form
    radius derivative of the exterior amplitude; ``finite_difference`` uses a
    Richardson-refined central difference with step 1e-4 (r2 - r1).  With
    ``cross_validate`` both routes run and must agree to 1e-3 relative.
    The value is positive (outward) when the pair sign s is +1.
    """
    if method not in ("finite_difference", "calogero_analytic"):
        raise DomainError(f"unknown pressure method {method!r}")
    if spectrum.mode == "matsubara":
        return matsubara_pressure(geometry, spectrum, method, allow_undefined_sign,
                                  cross_validate)
    pair = _require_sign(geometry, allow_undefined_sign)
    area = 4.0 * math.pi * geometry.r1 ** 2

    def analytic():
        (_, denergy, l_used, worst, ledger), n_used, delta = _zero_t_converged(
            geometry, spectrum, need_rho=True
        )
        return -denergy / area, l_used, n_used, worst, delta, ledger

    def finite_diff():
        h = 1e-4 * geometry.gap_width

        def e_of_r1(r1):
            return _energy_value(replace(geometry, r1=r1), spectrum, True)

        return -_fd_derivative(e_of_r1, geometry.r1, h) / area

    diagnostics = {}
    if method == "calogero_analytic" or cross_validate:
        p_an, l_used, n_used, worst, delta, ledger = analytic()
        diagnostics.update({"quad_change": delta, "max_mode_product": worst})
    if method == "finite_difference" or cross_validate:
        p_fd = finite_diff()
    if cross_validate:
        disagreement = abs(p_an - p_fd) / max(abs(p_an), abs(p_fd), 1e-300)
        diagnostics["method_disagreement"] = disagreement
        if disagreement > 1e-3:
            raise CrossValidationError(
                f"pressure routes disagree by {disagreement:.3e} relative "
                f"(analytic {p_an:.6e}, finite difference {p_fd:.6e})"
            )
    if method == "calogero_analytic":
        value = p_an
    else:
        value = p_fd
        if not cross_validate:
            l_used, n_used, ledger = 0, 0, []
            rep = interaction_energy(geometry, spectrum, allow_undefined_sign=True)
            l_used, n_used = rep.l_max_used, rep.n_kappa_used
            diagnostics["max_mode_product"] = rep.diagnostics["max_mode_product"]
            ledger = []
    return EnergyReport(
        value=value,
        unit=_PRESSURE_UNIT,
        per_mode=tuple(ledger if spectrum.keep_ledger else ()),
        l_max_used=l_used,
        n_kappa_used=n_used,
        sign_class=pair,
        converged=True,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Static limit and Matsubara ladder
# ---------------------------------------------------------------------------

def _static_sums(geometry, spec, need_rho):
    """kappa -> 0 limit of the mode sums by two-point Richardson extrapolation.

    The exterior and interior amplitudes separately vanish/diverge like
    kappa^(2l+1); their product tends to a finite limit, evaluated at
    kappa_eps and kappa_eps/2 and extrapolated assuming O(kappa^2) error.
    """
    kappa_eps = 1e-6 / geometry.gap_width
    l_hint = _l_start_estimate(geometry, spec)
    s_a, d_a, l_a, *_ = _mode_sum(geometry, kappa_eps, spec, need_rho, l_hint)
    s_b, d_b, l_b, *_ = _mode_sum(geometry, 0.5 * kappa_eps, spec, need_rho, l_hint)
    s0 = (4.0 * s_b - s_a) / 3.0
    d0 = (4.0 * d_b - d_a) / 3.0 if need_rho else 0.0
    if abs(s0 - s_b) > 0.25 * max(abs(s0), 1e-280):
        raise ConvergenceError(
            "static-limit extrapolation unstable",
            {"kappa_eps": kappa_eps, "coarse": s_a, "fine": s_b},
        )
    return s0, d0, max(l_a, l_b)


def static_limit_summand(geometry: Geometry, mode: Mode) -> float:
    """Zero-frequency limit of one channel's summand (the n = 0 Matsubara
    integrand), finite because the kappa powers of the two amplitudes cancel
    in the product."""
    spec = SpectrumSpec()
    kappa_eps = 1e-6 / geometry.gap_width
    a = mode_summand(geometry, mode, kappa_eps)
    b = mode_summand(geometry, mode, 0.5 * kappa_eps)
    s0 = (4.0 * b - a) / 3.0
    if abs(s0 - b) > 0.25 * max(abs(s0), 1e-280):
        raise ConvergenceError(
            "static-limit extrapolation unstable",
            {"kappa_eps": kappa_eps, "coarse": a, "fine": b},
        )
    return s0


def _matsubara_sums(geometry, spec, need_rho):
    """Half-weighted n=0 term plus the ladder sum, with tail control."""
    t = spec.temperature
    s0, d0, l0 = _static_sums(geometry, spec, need_rho)
    s_terms = [0.5 * s0]
    d_terms = [0.5 * d0]
    ledger = [(0, "all", 0, 0.5 * s0)] if spec.keep_ledger else []
    l_used = l0
    l_hint = _l_start_estimate(geometry, spec)
    worst = 0.0
    run = 0
    n = 1
    while n <= spec.matsubara_n_max:
        kappa_n = 2.0 * math.pi * n * t
        s, d, l_n, summand, _, wn = _mode_sum(geometry, kappa_n, spec, need_rho, l_hint)
        s_terms.append(s)
        d_terms.append(d)
        l_used = max(l_used, l_n)
        worst = max(worst, wn)
        if spec.keep_ledger:
            for l in range(1, summand.shape[1]):
                for p, pol in enumerate(POLARIZATIONS):
                    ledger.append((l, pol, n, float(summand[p, l])))
        running = abs(math.fsum(s_terms))
        if abs(s) <= spec.matsubara_tail_tol * max(running, 1e-300):
            run += 1
            if run >= 3:
                break
        else:
            run = 0
        n += 1
    else:
        raise ConvergenceError(
            f"Matsubara ladder not converged within {spec.matsubara_n_max} terms",
            {"n_max": spec.matsubara_n_max, "temperature": t},
        )
    f_val = t * math.fsum(s_terms)
    d_val = t * math.fsum(d_terms) if need_rho else 0.0
    return f_val, d_val, l_used, n, worst, ledger


def matsubara_free_energy(geometry: Geometry, spectrum: SpectrumSpec,
                          allow_undefined_sign: bool = False) -> EnergyReport:
    """Thermal interaction free energy, k_B T times the Matsubara ladder sum.

    Tends to the zero-temperature interaction energy as T -> 0; shares its
    sign rule sign(F_int) = -s.  ``n_kappa_used`` reports the number of
    ladder terms including the half-weighted zero mode.
    """
    if spectrum.mode != "matsubara":
        raise DomainError("matsubara_free_energy needs a matsubara SpectrumSpec")
    pair = _require_sign(geometry, allow_undefined_sign)
    f_val, _, l_used, n_terms, worst, ledger = _matsubara_sums(
        geometry, spectrum, need_rho=False
    )
    return EnergyReport(
        value=f_val,
        unit=_ENERGY_UNIT,
        per_mode=tuple(ledger),
        l_max_used=l_used,
        n_kappa_used=n_terms + 1,
        sign_class=pair,
        converged=True,
        diagnostics={
            "temperature": spectrum.temperature,
            "max_mode_product": worst,
            "ladder_terms": n_terms,
        },
    )


def matsubara_pressure(geometry: Geometry, spectrum: SpectrumSpec,
                       method: str = "calogero_analytic",
                       allow_undefined_sign: bool = False,
                       cross_validate: bool = False) -> EnergyReport:
    """Thermal interaction pressure, -(dF/dr1)/(4 pi r1^2); sign = s."""
    if spectrum.mode != "matsubara":
        raise DomainError("matsubara_pressure needs a matsubara SpectrumSpec")
    if method not in ("finite_difference", "calogero_analytic"):
        raise DomainError(f"unknown pressure method {method!r}")
    pair = _require_sign(geometry, allow_undefined_sign)
    area = 4.0 * math.pi * geometry.r1 ** 2

    p_an = p_fd = None
    l_used = n_terms = 0
    worst = 0.0
    if method == "calogero_analytic" or cross_validate:
        _, d_val, l_used, n_terms, worst, _ = _matsubara_sums(
            geometry, replace(spectrum, keep_ledger=False), need_rho=True
        )
        p_an = -d_val / area
    if method == "finite_difference" or cross_validate:
        h = 1e-4 * geometry.gap_width

        def f_of_r1(r1):
            return _energy_value(replace(geometry, r1=r1), spectrum, True)

        p_fd = -_fd_derivative(f_of_r1, geometry.r1, h) / area
    diagnostics = {"temperature": spectrum.temperature, "max_mode_product": worst}
    if cross_validate:
        disagreement = abs(p_an - p_fd) / max(abs(p_an), abs(p_fd), 1e-300)
        diagnostics["method_disagreement"] = disagreement
        if disagreement > 1e-3:
            raise CrossValidationError(
                f"thermal pressure routes disagree by {disagreement:.3e} relative"
            )
    value = p_an if method == "calogero_analytic" else p_fd
    return EnergyReport(
        value=value,
        unit=_PRESSURE_UNIT,
        per_mode=(),
        l_max_used=l_used,
        n_kappa_used=n_terms + 1,
        sign_class=pair,
        converged=True,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Dilute self-energy closed forms
# ---------------------------------------------------------------------------

_SELF_COEFF = 23.0 / (1536.0 * math.pi)
_DILUTE_GATE = 0.3
_THERMAL_GATE = 0.2


def dilute_self_energy(eps1: float, r1: float) -> float:
    """Renormalized self-energy of a dilute dielectric ball in vacuum,
    23 (eps1 - 1)^2 / (1536 pi r1); always >= 0.

    Emits a ValidityWarning outside the dilute gate |eps1 - 1| <= 0.3.
    """
    if r1 <= 0.0:
        raise DomainError("r1 must be > 0")
    if eps1 < 1.0:
        raise DomainError("eps1 must be >= 1")
    if abs(eps1 - 1.0) > _DILUTE_GATE:
        warnings.warn(
            f"dilute expansion requested at eps1={eps1}; the (eps1-1)^2 "
            "truncation is uncontrolled there",
            ValidityWarning,
            stacklevel=2,
        )
    return _SELF_COEFF * (eps1 - 1.0) ** 2 / r1


def dilute_self_free_energy(eps1: float, r1: float, temperature: float) -> float:
    """Low-temperature self free energy of the dilute ball in vacuum,
    (eps1-1)^2 [ 23/(1536 pi r1) + (7/270) (pi r1)^3 T^4 ].

    Warns outside the gate T r1 <= 0.2 (and outside the dilute gate).
    """
    if temperature < 0.0:
        raise DomainError("temperature must be >= 0")
    base = dilute_self_energy(eps1, r1)
    if temperature * r1 > _THERMAL_GATE:
        warnings.warn(
            f"low-temperature expansion requested at T r1 = {temperature * r1}",
            ValidityWarning,
            stacklevel=2,
        )
    thermal = (7.0 / 270.0) * (math.pi * r1) ** 3 * temperature ** 4
    return base + (eps1 - 1.0) ** 2 * thermal


def dilute_self_pressure(eps1: float, r1: float, temperature: float = 0.0) -> float:
    """Self pressure -(1/4 pi r1^2) dF1/dr1 of the dilute ball.

    Outward (positive) at T = 0; the T^4 term counteracts and flips the sign
    above the crossover temperature.
    """
    base = dilute_self_energy(eps1, r1) / (4.0 * math.pi * r1 ** 3)
    thermal = (7.0 / 360.0) * math.pi ** 2 * temperature ** 4
    return base - (eps1 - 1.0) ** 2 * thermal


def self_pressure_crossover_temperature(r1: float) -> float:
    """Temperature at which the dilute ball's self pressure changes sign,
    found as the root of the analytic radius derivative of the free energy."""
    if r1 <= 0.0:
        raise DomainError("r1 must be > 0")

    def g(t):
        return dilute_self_pressure(1.1, r1, t)  # (eps1-1)^2 scales out

    t_hi = 10.0 / r1
    return brentq(g, 1e-12 / r1, t_hi, xtol=1e-15, rtol=1e-14)


def total_pressure(geometry: Geometry, spectrum: SpectrumSpec,
                   allow_undefined_sign: bool = False) -> EnergyReport:
    """Total (self + interaction) pressure on a dilute sphere in a vacuum gap.

    The self part uses the dilute closed form (gated to a vacuum gap and a
    homogeneous sphere); the interaction part is the virtual-work pressure of
    the pair.  Both contributions are reported separately in diagnostics.
    """
    gap = geometry.gap_medium
    if gap.kind != "constant" or gap.param("eps") != 1.0:
        raise DomainError("total_pressure requires a vacuum gap medium")
    if geometry.sphere_medium.kind != "constant":
        raise DomainError("total_pressure requires a homogeneous constant sphere")
    eps1 = geometry.sphere_medium.param("eps")
    temperature = spectrum.temperature if spectrum.mode == "matsubara" else 0.0
    p_self = dilute_self_pressure(eps1, geometry.r1, temperature)
    p_int = interaction_pressure(
        geometry, spectrum, "calogero_analytic", allow_undefined_sign
    )
    diagnostics = dict(p_int.diagnostics)
    diagnostics.update({"self_pressure": p_self, "interaction_pressure": p_int.value})
    return EnergyReport(
        value=p_self + p_int.value,
        unit=_PRESSURE_UNIT,
        per_mode=p_int.per_mode,
        l_max_used=p_int.l_max_used,
        n_kappa_used=p_int.n_kappa_used,
        sign_class=p_int.sign_class,
        converged=p_int.converged,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Planar (large-radius) limit
# ---------------------------------------------------------------------------

def planar_limit_force(d: float, eps1: float, eps2: float, eps_m: float,
                       radius_ladder, n_kappa: int = 64, l_max: int = 2000,
                       l_tail_tol: float = 1e-9) -> PlanarLimitReport:
    """Force per unit area between the surfaces at fixed gap d, extrapolated
    along a ladder of sphere radii to the planar limit.

    Per rung the gap-widening force is -(1/4 pi r1^2) dE/dd at fixed r1
    (central differences in r2); the ladder is extrapolated polynomially in
    d/r1 to zero curvature.  Positive force = repulsive (gap-widening); the
    limit sign is -sign[(eps1 - eps_m)(eps2 - eps_m)].
    """
    radius_ladder = sorted(float(r) for r in radius_ladder)
    if len(radius_ladder) < 2:
        raise DomainError("radius ladder needs at least two entries")
    if d <= 0.0:
        raise DomainError("gap width d must be > 0")
    sphere = ResponseModel.constant(eps1)
    wall = ResponseModel.constant(eps2)
    gap = ResponseModel.constant(eps_m)
    spec = SpectrumSpec.zero_temperature(
        n_kappa=n_kappa, l_max=l_max, l_tail_tol=l_tail_tol, keep_ledger=False
    )
    rows = []
    for r1 in radius_ladder:
        geometry = Geometry(r1, r1 + d, sphere, wall, gap)
        h = 1e-4 * d

        def e_of_r2(r2, g=geometry):
            return _energy_value(replace(g, r2=r2), spec, True)

        de_dd = _fd_derivative(e_of_r2, geometry.r2, h)
        force = -de_dd / (4.0 * math.pi * r1 ** 2)
        rows.append({"r1": r1, "force_per_area": force, "aspect": r1 / d})
    x = np.array([d / row["r1"] for row in rows])
    f = np.array([row["force_per_area"] for row in rows])
    coeffs = np.polyfit(x, f, deg=len(rows) - 1)
    f_inf = float(np.polyval(coeffs, 0.0))
    converged = abs(f_inf - f[-1]) <= 0.5 * max(abs(f_inf), 1e-300)
    if not converged:
        raise ConvergenceError(
            "radius ladder too short for a stable planar extrapolation",
            {"rungs": rows, "extrapolated": f_inf},
        )
    sign = int(math.copysign(1.0, f_inf)) if f_inf != 0.0 else 0
    return PlanarLimitReport(sign=sign, force=f_inf, table=tuple(rows), converged=True)
