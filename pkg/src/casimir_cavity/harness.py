"""Randomized, reproducible verification suites for the sign theorems.

Each suite draws material/geometry configurations from a seeded generator,
skips draws without a definite sign class, and checks an exact statement:

* ``energy_sign``        sign(E_int) = -s
* ``pressure_sign``      sign(p_int) = +s (dielectric and magnetic walls)
* ``magnetodielectric_sign``  pressure sign with a permeable wall
* ``t_monotonicity``     s1 dT/dr1 > 0, closed form vs finite differences
* ``contraction``        every mode product magnitude stays below one
* ``a_ell_sign``         closed-form A_l sign = static mode pressure sign
* ``dlp_sign``           planar-limit force sign = -s

The theorems are exact, so a single counterexample is a failure; every trial
is reconstructible from (seed, index) and failed configurations are reported
in replayable form.

The sign checks run on deliberately light spectral grids: each mode summand
carries the sign individually, so truncating the multipole or frequency sums
can never flip the sign of the total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energetics import (
    Geometry,
    SpectrumSpec,
    interaction_energy,
    interaction_pressure,
    mode_summand,
    planar_limit_force,
    static_limit_summand,
)
from .errors import ContractionError, DomainError
from .media import ResponseModel
from .scattering import Mode, mie_exterior, t_radius_derivative

__all__ = ["THEOREM_IDS", "TheoremReport", "a_ell", "run_sign_suite", "run_monotonicity_suite"]

THEOREM_IDS = (
    "energy_sign",
    "pressure_sign",
    "t_monotonicity",
    "contraction",
    "a_ell_sign",
    "dlp_sign",
    "magnetodielectric_sign",
)


@dataclass(frozen=True)
class TheoremReport:
    """Outcome of one verification suite; empty failures means pass."""

    theorem_id: str
    trials: int
    failures: tuple
    seed: int

    @property
    def passed(self) -> bool:
        return not self.failures

    def __repr__(self):
        status = "PASS" if self.passed else f"FAIL({len(self.failures)})"
        return f"TheoremReport({self.theorem_id}, trials={self.trials}, {status})"


def a_ell(l: int, eps1: float, eps2: float, eps_m: float) -> float:
    """Closed-form static mode coefficient of the three-permittivity
    concentric configuration,

        A_l = (eps1 - eps_m)(eps2 - eps_m) l(l+1)
              / ([l eps1 + (l+1) eps_m] [l eps_m + (l+1) eps2]),

    whose sign equals the pair sign s and the interaction pressure sign.
    """
    if l < 1 or l != int(l):
        raise DomainError("l must be an integer >= 1")
    if min(eps1, eps2, eps_m) < 1.0:
        raise DomainError("permittivities must be >= 1")
    num = (eps1 - eps_m) * (eps2 - eps_m) * l * (l + 1.0)
    den = (l * eps1 + (l + 1.0) * eps_m) * (l * eps_m + (l + 1.0) * eps2)
    return num / den


# ---------------------------------------------------------------------------
# Configuration sampling
# ---------------------------------------------------------------------------

def _rng_for(seed, index):
    return np.random.default_rng([int(seed), int(index)])


def _sep(rng, low, high, away_from, margin=0.08):
    """Uniform draw in [low, high] at least `margin` away from a value."""
    for _ in range(200):
        x = rng.uniform(low, high)
        if abs(x - away_from) >= margin:
            return x
    raise RuntimeError("sampling failed to separate values")


def _draw_sphere(rng, eps_m, profile_fraction=0.3):
    """Sphere medium with a definite sign class against eps_m."""
    kind = rng.random()
    side = 1 if (eps_m < 1.2 or rng.random() < 0.5) else -1
    if side > 0:
        lo, hi = eps_m + 0.1, eps_m + 3.0
    else:
        lo, hi = 1.0, eps_m - 0.1
    if kind >= profile_fraction:
        return ResponseModel.constant(rng.uniform(lo, hi)), None
    # dilute-style radial profiles staying on one side of the medium
    r_max = 10.0  # clamped continuation; actual support set by geometry
    a, b = sorted(rng.uniform(lo, hi, size=2))
    if rng.random() < 0.5:
        return ResponseModel.two_layer(b, a, r_break=0.5 * r_max, r_max=r_max), "two_layer"
    return ResponseModel.linear(a, b, r_max=r_max), "linear"


def _draw_config(rng, magnetic="none"):
    """One random geometry + media draw with a definite pair sign class.

    magnetic='none' keeps the wall dielectric; 'mixed' draws a permeable
    wall about half the time; 'always' forces one.  A permeable wall
    (mu2 > 1) must sit at eps2 < eps_m for a definite class, so those draws
    force the minus ordering on the wall.
    """
    eps_m = rng.uniform(1.0, 4.0)
    want_mu = {"none": False, "mixed": rng.random() < 0.4, "always": True}[magnetic]
    if want_mu and eps_m < 1.2:
        eps_m = rng.uniform(1.5, 4.0)
    sphere, profile_kind = _draw_sphere(rng, eps_m)
    if want_mu:
        mu2 = rng.uniform(1.0, 5.0)
        eps2 = _sep(rng, 1.0, eps_m - 0.1, eps_m) if eps_m - 0.1 > 1.0 else 1.0
        if eps2 >= eps_m:
            eps2 = max(1.0, eps_m - 0.15)
        wall = ResponseModel.constant(eps2, mu=mu2)
    else:
        eps2 = _sep(rng, 1.0, eps_m + 4.0, eps_m)
        wall = ResponseModel.constant(eps2)
    gap = ResponseModel.constant(eps_m)
    r2 = rng.uniform(0.5, 2.0)
    r1 = r2 * rng.uniform(0.2, 0.9)
    geometry = Geometry(r1, r2, sphere, wall, gap)
    record = {
        "r1": r1,
        "r2": r2,
        "eps_m": eps_m,
        "wall_eps": eps2,
        "wall_mu": 1.0 if not want_mu else mu2,
        "sphere_kind": profile_kind or "constant",
        "sphere_params": dict(sphere.params),
    }
    return geometry, record


def _suite_spectrum(geometry):
    # light but sound: every retained summand carries the exact mode sign
    n_kappa = 16 if geometry.sphere_medium.is_profile else 24
    return SpectrumSpec.zero_temperature(
        n_kappa=n_kappa,
        auto_refine=False,
        l_tail_tol=1e-6,
        l_max=200,
        keep_ledger=False,
    )


# ---------------------------------------------------------------------------
# Individual theorem checks
# ---------------------------------------------------------------------------

def _check_energy_sign(rng, record_sink):
    geometry, record = _draw_config(rng)
    report = interaction_energy(geometry, _suite_spectrum(geometry))
    s = report.sign_class.s
    if math.copysign(1.0, report.value) != -s:
        record.update({"value": report.value, "s": s})
        record_sink(record)


def _check_pressure_sign(rng, record_sink, magnetic="mixed"):
    geometry, record = _draw_config(rng, magnetic=magnetic)
    report = interaction_pressure(geometry, _suite_spectrum(geometry))
    s = report.sign_class.s
    if math.copysign(1.0, report.value) != s:
        record.update({"value": report.value, "s": s})
        record_sink(record)


def _check_contraction(rng, record_sink):
    geometry, record = _draw_config(rng, magnetic="mixed")
    sigma = 1.0 / geometry.gap_width
    try:
        for kappa in np.geomspace(1e-3, 1e3, 7) * sigma:
            for l in (1, 2, 5):
                for pol in ("TE", "TM"):
                    mode = Mode(l, pol)
                    mode_summand(geometry, mode, kappa)
    except ContractionError as exc:
        record.update({"error": str(exc)})
        record_sink(record)


def _check_a_ell_sign(rng, record_sink):
    eps_m = rng.uniform(1.0, 4.0)
    eps1 = _sep(rng, 1.0, eps_m + 3.0, eps_m)
    eps2 = _sep(rng, 1.0, eps_m + 3.0, eps_m)
    l = int(rng.integers(1, 6))
    r2 = rng.uniform(0.8, 1.5)
    r1 = r2 * rng.uniform(0.3, 0.8)
    geometry = Geometry(
        r1, r2,
        ResponseModel.constant(eps1),
        ResponseModel.constant(eps2),
        ResponseModel.constant(eps_m),
    )
    coeff = a_ell(l, eps1, eps2, eps_m)
    # static mode pressure contribution by central differences in r1
    h = 1e-4 * geometry.gap_width
    mode = Mode(l, "TM")
    s_plus = static_limit_summand(
        Geometry(r1 + h, r2, geometry.sphere_medium, geometry.wall_medium,
                 geometry.gap_medium), mode)
    s_minus = static_limit_summand(
        Geometry(r1 - h, r2, geometry.sphere_medium, geometry.wall_medium,
                 geometry.gap_medium), mode)
    p_contrib = -(s_plus - s_minus) / (2.0 * h)
    if math.copysign(1.0, coeff) != math.copysign(1.0, p_contrib):
        record_sink({
            "l": l, "eps1": eps1, "eps2": eps2, "eps_m": eps_m,
            "r1": r1, "r2": r2, "a_ell": coeff, "pressure_contribution": p_contrib,
        })


def _check_dlp_sign(rng, record_sink):
    values = [1.2, 2.0, 3.0]
    rng.shuffle(values)
    eps1, eps2, eps_m = values
    d = rng.uniform(0.05, 0.2)
    report = planar_limit_force(
        d, eps1, eps2, eps_m, radius_ladder=[4 * d, 8 * d, 16 * d],
        n_kappa=32, l_max=400, l_tail_tol=1e-7,
    )
    expected = -int(math.copysign(1.0, (eps1 - eps_m) * (eps2 - eps_m)))
    if report.sign != expected:
        record_sink({
            "eps1": eps1, "eps2": eps2, "eps_m": eps_m, "d": d,
            "sign": report.sign, "expected": expected,
        })


def _monotonicity_trial(rng, record_sink):
    eps_m = rng.uniform(1.0, 4.0)
    eps1 = _sep(rng, 1.0, eps_m + 3.0, eps_m)
    s1 = 1 if eps1 > eps_m else -1
    r1 = rng.uniform(0.3, 2.0)
    kappa = math.exp(rng.uniform(math.log(0.05), math.log(5.0))) / r1
    mode = Mode(int(rng.integers(1, 7)), ("TE", "TM")[int(rng.integers(0, 2))])
    for factor in (0.8, 0.9, 1.0, 1.1, 1.2):
        r = r1 * factor
        amp = mie_exterior(mode, kappa, r, eps1, eps_m)
        deriv = t_radius_derivative(mode, kappa, r, amp.value, eps1, eps_m)
        h = 1e-5 * r
        tp = mie_exterior(mode, kappa, r + h, eps1, eps_m).value
        tm = mie_exterior(mode, kappa, r - h, eps1, eps_m).value
        tp2 = mie_exterior(mode, kappa, r + 0.5 * h, eps1, eps_m).value
        tm2 = mie_exterior(mode, kappa, r - 0.5 * h, eps1, eps_m).value
        fd = (4.0 * (tp2 - tm2) / h - (tp - tm) / (2.0 * h)) / 3.0
        rel = abs(deriv - fd) / max(abs(deriv), 1e-300)
        if s1 * deriv <= 0.0 or s1 * fd <= 0.0 or rel > 1e-5:
            record_sink({
                "eps1": eps1, "eps_m": eps_m, "kappa": kappa, "r1": r,
                "l": mode.l, "pol": mode.polarization,
                "closed_form": deriv, "finite_difference": fd, "s1": s1,
            })
            return


_CHECKS = {
    "energy_sign": lambda rng, sink: _check_energy_sign(rng, sink),
    "pressure_sign": lambda rng, sink: _check_pressure_sign(rng, sink, "mixed"),
    "magnetodielectric_sign": lambda rng, sink: _check_pressure_sign(rng, sink, "always"),
    "contraction": lambda rng, sink: _check_contraction(rng, sink),
    "a_ell_sign": lambda rng, sink: _check_a_ell_sign(rng, sink),
    "dlp_sign": lambda rng, sink: _check_dlp_sign(rng, sink),
    "t_monotonicity": lambda rng, sink: _monotonicity_trial(rng, sink),
}


def run_sign_suite(theorem_id: str, trials: int, seed: int) -> TheoremReport:
    """Run one theorem's randomized suite; deterministic under the seed.

    Any failing draw is recorded as a replayable configuration; the theorems
    are exact, so the expected failure list is empty.
    """
    if theorem_id not in THEOREM_IDS:
        raise DomainError(f"unknown theorem id {theorem_id!r}")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    check = _CHECKS[theorem_id]
    failures = []
    for i in range(trials):
        rng = _rng_for(seed, i)
        sink = lambda rec, i=i: failures.append({"trial": i, **rec})
        check(rng, sink)
    return TheoremReport(theorem_id, trials, tuple(failures), seed)


def run_monotonicity_suite(trials: int, seed: int) -> TheoremReport:
    """Radius-monotonicity of the exterior amplitude: the closed-form radius
    derivative and a finite-difference slope at five radii must both carry
    the sphere's potential sign and agree to 1e-5 relative."""
    return run_sign_suite("t_monotonicity", trials, seed)
