"""Per-mode scattering amplitudes at imaginary frequency.

Electromagnetic scattering off a spherically symmetric body decouples into
independent scalar channels labelled by the multipole order l >= 1 and the
polarization (TE or TM).  Per channel this module provides

* the exterior amplitude of a (possibly radially inhomogeneous) sphere,
  relating a regular wave to the outgoing wave it scatters into,
* the interior amplitude of a spherical cavity wall, relating an outgoing
  wave launched inside to the regular wave reflected back, and
* the closed-form radial derivative of the exterior amplitude, whose sign
  is that of ``eps_sphere - eps_gap`` for every channel and frequency.

Normalization: amplitudes are fixed so that the round-trip factor of the
mode-sum energy is exactly ``(exterior value) * (interior value)`` with no
extra mode-dependent constant.  With wavenumber ``xi = kappa sqrt(eps_gap)``
in the gap and radial solutions written as ``i_l(xi r) + t k_l(xi r)``, the
exterior values are ``T_TE = -t/xi`` and ``T_TM = +t/xi`` (the interior ones
carry the reciprocal factors), which makes ``s1 * T`` positive whenever the
sphere/gap ordering has a definite sign s1.

Everything is evaluated through logarithms and logarithmic-derivative ratios
of the modified spherical Bessel functions, so products over channels can be
formed at any ``kappa r`` without overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, DomainError
from .media import ResponseModel, _profile_clamped, permeability_at, permittivity_at
from .specfun import bessel_ladder

__all__ = [
    "POLARIZATIONS",
    "Mode",
    "ExteriorAmplitude",
    "InteriorAmplitude",
    "mie_exterior",
    "mie_interior_cavity",
    "variable_phase_T",
    "t_radius_derivative",
]

POLARIZATIONS = ("TE", "TM")


@dataclass(frozen=True)
class Mode:
    """One decoupled scattering channel: multipole order and polarization."""

    l: int
    polarization: str

    def __post_init__(self):
        if self.l != int(self.l) or self.l < 1:
            raise DomainError(f"multipole order must be an integer >= 1, got {self.l}")
        if self.polarization not in POLARIZATIONS:
            raise DomainError(f"polarization must be TE or TM, got {self.polarization!r}")

    @property
    def pol_index(self) -> int:
        return POLARIZATIONS.index(self.polarization)


@dataclass(frozen=True)
class ExteriorAmplitude:
    """Exterior sphere amplitude at one (mode, kappa).

    ``value = sign * exp(log_magnitude)``; the split form stays representable
    at argument combinations where the plain value would over- or underflow.
    """

    mode: Mode
    kappa: float
    value: float
    sign: float
    log_magnitude: float


@dataclass(frozen=True)
class InteriorAmplitude:
    """Interior cavity amplitude at one (mode, kappa); fields as exterior."""

    mode: Mode
    kappa: float
    value: float
    sign: float
    log_magnitude: float


def _signed_value(sign, log_mag):
    if sign == 0.0:
        return 0.0
    if log_mag > 709.0:
        return sign * math.inf
    return sign * math.exp(log_mag)


def _check_positive(name, value):
    if not np.isfinite(value) or value <= 0.0:
        raise DomainError(f"{name} must be positive and finite, got {value}")


# ---------------------------------------------------------------------------
# Homogeneous closed forms
# ---------------------------------------------------------------------------

def _exterior_tables_const(kappa, r1, eps1, eps_gap, lmax, need_rho=False):
    """Exterior amplitude tables for a homogeneous sphere, l = 0..lmax.

    Returns (sgn, log_mag, rho) arrays shaped (2, lmax+1), first axis TE/TM.
    ``rho`` is the logarithmic radius derivative (dT/dr1)/T (zero where the
    amplitude vanishes); it is only filled when ``need_rho`` is set.
    """
    n_m = math.sqrt(eps_gap)
    n_1 = math.sqrt(eps1)
    xi = kappa * n_m
    x1 = xi * r1
    z1 = kappa * n_1 * r1
    lad = bessel_ladder(np.array([x1, z1]), lmax)

    ls = np.arange(lmax + 1, dtype=float)
    Ls_x = 1.0 / x1 + lad.di_i[:, 0]
    Le_x = 1.0 / x1 + lad.dk_k[:, 0]
    L1 = 1.0 / z1 + lad.di_i[:, 1]
    log_ik = lad.log_i[:, 0] - lad.log_k[:, 0]

    bn = np.empty((2, lmax + 1))
    bd = np.empty((2, lmax + 1))
    bn[0] = n_1 * L1 - n_m * Ls_x
    bd[0] = n_1 * L1 - n_m * Le_x
    bn[1] = n_1 * Ls_x - n_m * L1
    bd[1] = n_m * L1 - n_1 * Le_x

    sgn = np.sign(bn) * np.sign(bd)
    with np.errstate(divide="ignore"):
        log_mag = log_ik[None, :] + np.log(np.abs(bn)) - np.log(np.abs(bd)) - math.log(xi)
    log_mag[sgn == 0.0] = -np.inf

    rho = np.zeros((2, lmax + 1))
    if need_rho:
        inv_ik = -(lad.log_i[:, 0] + lad.log_k[:, 0])
        contrast = eps1 - eps_gap
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            rho[0] = contrast * xi * np.exp(inv_ik) / (x1 * x1 * bd[0] * bn[0])
            # n_m^2 L1^2 / eps_gap + l(l+1) n_1^2 / (x1^2 eps1), with n^2 = eps
            bracket = L1 * L1 + ls * (ls + 1.0) / (x1 * x1)
            rho[1] = contrast * xi * bracket * np.exp(inv_ik) / (x1 * x1 * bd[1] * bn[1])
        rho[sgn == 0.0] = 0.0
    return sgn, log_mag, rho


def _interior_tables_const(kappa, r2, eps2, mu2, eps_gap, lmax):
    """Interior cavity-wall amplitude tables, l = 0..lmax; (sgn, log_mag)."""
    n_m = math.sqrt(eps_gap)
    xi = kappa * n_m
    q2 = math.sqrt(eps2 * mu2)
    x2 = xi * r2
    z2 = kappa * q2 * r2
    lad = bessel_ladder(np.array([x2, z2]), lmax)

    Ls_x = 1.0 / x2 + lad.di_i[:, 0]
    Le_x = 1.0 / x2 + lad.dk_k[:, 0]
    L2e = 1.0 / z2 + lad.dk_k[:, 1]
    log_ki = lad.log_k[:, 0] - lad.log_i[:, 0]

    w2 = mu2 * n_m / q2
    v2 = eps2 * n_m / (eps_gap * q2)

    bn = np.empty((2, lmax + 1))
    bd = np.empty((2, lmax + 1))
    bn[0] = w2 * Le_x - L2e
    bd[0] = L2e - w2 * Ls_x
    bn[1] = v2 * Le_x - L2e
    bd[1] = L2e - v2 * Ls_x

    sgn = np.sign(bn) * np.sign(bd)
    sgn[0] = -sgn[0]  # TE carries the opposite wave-coefficient map
    with np.errstate(divide="ignore"):
        log_mag = log_ki[None, :] + np.log(np.abs(bn)) - np.log(np.abs(bd)) + math.log(xi)
    log_mag[sgn == 0.0] = -np.inf
    return sgn, log_mag


# ---------------------------------------------------------------------------
# Variable-phase route for radial profiles
# ---------------------------------------------------------------------------

def _ode_exterior_u(model, kappa, r1, eps_gap, ls, rtol=1e-10):
    """Integrate the scaled amplitude ratio u = xi T (k_l/i_l)(xi r) outward.

    The cutoff-radius flow of the exterior amplitude, written in u, has a
    finite attracting fixed point at r -> 0 (the electrostatic ratio), so the
    integration starts at a small positive radius from the fixed-point seed
    instead of the degenerate origin.  Returns (u, du/dr) arrays shaped
    (2, len(ls)) evaluated at r1, first axis TE/TM.
    """
    ls = np.asarray(ls, dtype=int)
    lmax = int(ls.max())
    lsf = ls.astype(float)
    n_m = math.sqrt(eps_gap)
    xi = kappa * n_m
    m = ls.size

    r_start = min(1e-3 * r1, 1e-3 / kappa)
    eps_c = _profile_clamped(model, kappa, 0.0)
    c0 = eps_c - eps_gap
    u_tm0 = (lsf + 1.0) * c0 / (lsf * eps_c + (lsf + 1.0) * eps_gap)
    u_te0 = kappa * kappa * r_start * r_start * c0 / ((2.0 * lsf + 3.0) * (2.0 * lsf + 1.0))
    y0 = np.concatenate([u_te0, u_tm0])

    def rhs(r, y):
        z = xi * r
        lad = bessel_ladder(z, lmax)
        di = lad.di_i[ls, 0]
        dk = lad.dk_k[ls, 0]
        ricc_s = 1.0 / z + di
        ricc_e = 1.0 / z + dk
        p = np.exp(2.0 * math.log(z) + lad.log_i[ls, 0] + lad.log_k[ls, 0])
        eps_r = _profile_clamped(model, kappa, r)
        c = eps_r - eps_gap
        u_te = y[:m]
        u_tm = y[m:]
        decay = xi * (dk - di)
        d_te = (c / eps_gap) * xi * p * (1.0 - u_te) ** 2 + u_te * decay
        d_tm = (
            c * xi * p * (
                (ricc_s + u_tm * ricc_e) ** 2 / eps_gap
                + lsf * (lsf + 1.0) * (1.0 + u_tm) ** 2 / (z * z * eps_r)
            )
            + u_tm * decay
        )
        return np.concatenate([d_te, d_tm])

    sol = solve_ivp(rhs, (r_start, r1), y0, method="RK45", rtol=rtol, atol=1e-30)
    if not sol.success:
        raise ConvergenceError(
            f"variable-phase integration failed: {sol.message}",
            {"last_radius": float(sol.t[-1]), "kappa": kappa, "lmax": lmax},
        )
    u = sol.y[:, -1]
    dudr = rhs(r1, u)
    return u.reshape(2, m), dudr.reshape(2, m)


def _exterior_tables_profile(model, kappa, r1, eps_gap, l_values, need_rho=False, rtol=1e-10):
    """Exterior tables for a radial-profile sphere at the given l values."""
    l_values = np.asarray(l_values, dtype=int)
    u, dudr = _ode_exterior_u(model, kappa, r1, eps_gap, l_values, rtol=rtol)
    n_m = math.sqrt(eps_gap)
    xi = kappa * n_m
    x1 = xi * r1
    lad = bessel_ladder(x1, int(l_values.max()))
    log_ik = (lad.log_i[l_values, 0] - lad.log_k[l_values, 0])[None, :]
    sgn = np.sign(u)
    with np.errstate(divide="ignore"):
        log_mag = np.log(np.abs(u)) + log_ik - math.log(xi)
    log_mag[sgn == 0.0] = -np.inf
    rho = np.zeros_like(u)
    if need_rho:
        shift = xi * (lad.di_i[l_values, 0] - lad.dk_k[l_values, 0])[None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            rho = np.where(u != 0.0, dudr / np.where(u != 0.0, u, 1.0) + shift, 0.0)
    return sgn, log_mag, rho


def exterior_tables(model, kappa, r1, eps_gap, lmax, need_rho=False, rtol=1e-10):
    """Dispatch exterior amplitude tables for l = 1..lmax.

    Returns (sgn, log_mag, rho) shaped (2, lmax+1) with the l = 0 column
    zeroed; homogeneous models go through the closed form, radial profiles
    through the variable-phase integration.
    """
    if model.is_profile:
        ls = np.arange(1, lmax + 1)
        sgn = np.zeros((2, lmax + 1))
        log_mag = np.full((2, lmax + 1), -np.inf)
        rho = np.zeros((2, lmax + 1))
        s, lm, rh = _exterior_tables_profile(model, kappa, r1, eps_gap, ls, need_rho, rtol)
        sgn[:, 1:] = s
        log_mag[:, 1:] = lm
        rho[:, 1:] = rh
        return sgn, log_mag, rho
    eps1 = permittivity_at(model, kappa)
    sgn, log_mag, rho = _exterior_tables_const(kappa, r1, eps1, eps_gap, lmax, need_rho)
    sgn[:, 0] = 0.0
    log_mag[:, 0] = -np.inf
    rho[:, 0] = 0.0
    return sgn, log_mag, rho


def interior_tables(model, kappa, r2, eps_gap, lmax):
    """Interior amplitude tables for l = 1..lmax ((sgn, log_mag), l=0 zeroed)."""
    eps2 = permittivity_at(model, kappa)
    mu2 = permeability_at(model, kappa)
    sgn, log_mag = _interior_tables_const(kappa, r2, eps2, mu2, eps_gap, lmax)
    sgn[:, 0] = 0.0
    log_mag[:, 0] = -np.inf
    return sgn, log_mag


# ---------------------------------------------------------------------------
# Public single-mode operations
# ---------------------------------------------------------------------------

def mie_exterior(mode: Mode, kappa, r1, eps1, eps_m) -> ExteriorAmplitude:
    """Exterior amplitude of a homogeneous sphere (closed Lorenz-Mie form).

    Vanishes identically when ``eps1 == eps_m``; otherwise its sign matches
    the sign of ``eps1 - eps_m`` for every mode and kappa.
    """
    _check_positive("kappa", kappa)
    _check_positive("r1", r1)
    if eps1 < 1.0 or eps_m < 1.0:
        raise DomainError("permittivities must be >= 1")
    sgn, log_mag, _ = _exterior_tables_const(kappa, r1, eps1, eps_m, mode.l)
    i = mode.pol_index
    s = float(sgn[i, mode.l])
    lm = float(log_mag[i, mode.l])
    return ExteriorAmplitude(mode, float(kappa), _signed_value(s, lm), s, lm)


def mie_interior_cavity(mode: Mode, kappa, r2, eps2, mu2, eps_m) -> InteriorAmplitude:
    """Interior amplitude of a homogeneous half-space wall bounding r <= r2.

    Vanishes for a transparent wall (``eps2 == eps_m``, ``mu2 == 1``) and
    tends to the perfectly conducting ratio as ``eps2 -> inf``.
    """
    _check_positive("kappa", kappa)
    _check_positive("r2", r2)
    _check_positive("mu2", mu2)
    if eps2 < 1.0 or eps_m < 1.0:
        raise DomainError("permittivities must be >= 1")
    sgn, log_mag = _interior_tables_const(kappa, r2, eps2, mu2, eps_m, mode.l)
    i = mode.pol_index
    s = float(sgn[i, mode.l])
    lm = float(log_mag[i, mode.l])
    return InteriorAmplitude(mode, float(kappa), _signed_value(s, lm), s, lm)


def variable_phase_T(profile, mode: Mode, kappa, r1, eps_m, rtol=1e-10) -> ExteriorAmplitude:
    """Exterior amplitude of a radially inhomogeneous sphere.

    Integrates the per-channel nonlinear first-order flow of the amplitude in
    the cutoff radius from the center out to r1.  For a constant profile the
    result reproduces ``mie_exterior`` to integration tolerance.  Homogeneous
    models are accepted and treated as constant profiles.
    """
    _check_positive("kappa", kappa)
    _check_positive("r1", r1)
    if eps_m < 1.0:
        raise DomainError("eps_m must be >= 1")
    if not profile.is_profile:
        value = permittivity_at(profile, kappa)
        model = ResponseModel.from_profile(lambda k, r, v=value: v, r_max=r1)
    else:
        model = profile
        if model.r_max < r1:
            raise DomainError(f"profile support ends at {model.r_max} < r1 = {r1}")
    sgn, log_mag, _ = _exterior_tables_profile(
        model, kappa, r1, eps_m, np.array([mode.l]), need_rho=False, rtol=rtol
    )
    i = mode.pol_index
    s = float(sgn[i, 0])
    lm = float(log_mag[i, 0])
    return ExteriorAmplitude(mode, float(kappa), _signed_value(s, lm), s, lm)


def t_radius_derivative(mode: Mode, kappa, r1, T, eps1_at_surface, eps_m) -> float:
    """Closed-form derivative of the exterior amplitude in the sphere radius.

    Built from three real auxiliary parameters (combinations of I_{l+1/2},
    K_{l+1/2} at the gap wavenumber and the amplitude itself), so its sign is
    that of ``eps1_at_surface - eps_m`` whatever the amplitude value.  For a
    profile discontinuous exactly at the surface the interior-side limit of
    the permittivity is the one to pass.
    """
    _check_positive("kappa", kappa)
    _check_positive("r1", r1)
    if eps1_at_surface < 1.0 or eps_m < 1.0:
        raise DomainError("permittivities must be >= 1")
    xi = kappa * math.sqrt(eps_m)
    z = xi * r1
    l = mode.l
    lad = bessel_ladder(z, l + 1)
    # unscale: pi I_nu = sqrt(2 pi z) i_l,  K_nu = sqrt(pi z / 2) k_l
    i_l = math.exp(lad.log_i[l, 0])
    i_l1 = math.exp(lad.log_i[l + 1, 0])
    k_l = math.exp(lad.log_k[l, 0])
    k_l1 = math.exp(lad.log_k[l + 1, 0])
    pi_iv = math.sqrt(2.0 * math.pi * z) * i_l
    pi_iv1 = math.sqrt(2.0 * math.pi * z) * i_l1
    kv = math.sqrt(0.5 * math.pi * z) * k_l
    kv1 = math.sqrt(0.5 * math.pi * z) * k_l1
    if mode.polarization == "TE":
        a1 = pi_iv - 2.0 * T * xi * kv
        return (eps1_at_surface - eps_m) * a1 * a1 * z / (2.0 * math.pi * eps_m)
    a2 = pi_iv + 2.0 * T * xi * kv
    a3 = (
        2.0 * xi * T * ((l + 1.0) * kv - z * kv1)
        + z * pi_iv1
        + (l + 1.0) * pi_iv
    )
    num = a2 * a2 * l * (l + 1.0) + a3 * a3 * eps1_at_surface / eps_m
    return (eps1_at_surface - eps_m) * num / (2.0 * math.pi * z * eps1_at_surface)
