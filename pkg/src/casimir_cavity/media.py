"""Electromagnetic response functions on the imaginary-frequency axis.

All response models return real permittivities ``eps(i kappa) >= 1`` for
``kappa > 0``, as required by causality.  Units are natural
(``hbar = c = eps0 = mu0 = 1``), so ``kappa`` is an inverse length.

The module also classifies the sign of the scattering potential of a body
immersed in a homogeneous medium: ``plus`` when the body is optically denser
than the medium at every sampled point (with the permeability ordering
reversed when magnetic response is nontrivial), ``minus`` for the opposite
ordering, and ``undefined`` otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = [
    "ResponseModel",
    "SignClass",
    "permittivity_at",
    "permittivity_profile_at",
    "permeability_at",
    "classify_sign",
    "default_kappa_grid",
    "default_r_grid",
]

_KINDS = ("constant", "drude", "lorentz_oscillator", "radial_profile", "tabulated")


@dataclass(frozen=True)
class ResponseModel:
    """A permittivity model evaluated at imaginary frequency ``i kappa``.

    Instances are built through the class methods (``constant``, ``drude``,
    ``lorentz``, ``two_layer``, ``linear``, ``from_profile``, ``tabulated``)
    rather than the raw constructor.  ``params`` stores kind-specific named
    parameters as a tuple of pairs so the model stays hashable.

    An optional permeability part ``mu`` (another ResponseModel, or None for
    the nonmagnetic default mu = 1) rides along with the permittivity.
    """

    kind: str
    params: tuple = ()
    profile: Optional[Callable[[float, float], float]] = None
    r_max: Optional[float] = None
    mu: Optional["ResponseModel"] = None
    label: str = ""

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"unknown response model kind {self.kind!r}")

    def param(self, name):
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)

    @property
    def is_profile(self):
        return self.kind == "radial_profile"

    @property
    def is_magnetic(self):
        return self.mu is not None

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, eps, mu=None, label=""):
        """Frequency-independent permittivity ``eps >= 1``."""
        if eps < 1.0:
            raise DomainError(f"constant permittivity must be >= 1, got {eps}")
        return cls("constant", (("eps", float(eps)),), mu=_coerce_mu(mu), label=label)

    @classmethod
    def drude(cls, omega_p, gamma, mu=None, label=""):
        """Drude metal, ``eps(i kappa) = 1 + omega_p^2 / (kappa (kappa + gamma))``."""
        if omega_p < 0.0 or gamma < 0.0:
            raise DomainError("Drude parameters omega_p and gamma must be >= 0")
        return cls(
            "drude",
            (("omega_p", float(omega_p)), ("gamma", float(gamma))),
            mu=_coerce_mu(mu),
            label=label,
        )

    @classmethod
    def lorentz(cls, eps_static, omega_0, mu=None, label=""):
        """Single-oscillator dielectric,
        ``eps(i kappa) = 1 + (eps_static - 1) / (1 + kappa^2 / omega_0^2)``."""
        if eps_static < 1.0:
            raise DomainError("lorentz eps_static must be >= 1")
        if omega_0 <= 0.0:
            raise DomainError("lorentz omega_0 must be > 0")
        return cls(
            "lorentz_oscillator",
            (("eps_static", float(eps_static)), ("omega_0", float(omega_0))),
            mu=_coerce_mu(mu),
            label=label,
        )

    @classmethod
    def two_layer(cls, eps_core, eps_shell, r_break, r_max, mu=None, label=""):
        """Piecewise-constant radial profile: ``eps_core`` for r < r_break."""
        if min(eps_core, eps_shell) < 1.0:
            raise DomainError("layer permittivities must be >= 1")
        if not 0.0 < r_break < r_max:
            raise DomainError("need 0 < r_break < r_max")
        ec, es, rb = float(eps_core), float(eps_shell), float(r_break)

        def prof(kappa, r):
            return ec if r < rb else es

        return cls(
            "radial_profile",
            (("eps_core", ec), ("eps_shell", es), ("r_break", rb)),
            profile=prof,
            r_max=float(r_max),
            mu=_coerce_mu(mu),
            label=label,
        )

    @classmethod
    def linear(cls, eps_center, eps_surface, r_max, mu=None, label=""):
        """Radial profile interpolating linearly from center to surface."""
        if min(eps_center, eps_surface) < 1.0:
            raise DomainError("profile permittivities must be >= 1")
        e0, e1, rm = float(eps_center), float(eps_surface), float(r_max)

        def prof(kappa, r):
            return e0 + (e1 - e0) * (r / rm)

        return cls(
            "radial_profile",
            (("eps_center", e0), ("eps_surface", e1)),
            profile=prof,
            r_max=rm,
            mu=_coerce_mu(mu),
            label=label,
        )

    @classmethod
    def from_profile(cls, profile, r_max, mu=None, label=""):
        """Radial profile from a user callable ``profile(kappa, r) -> eps``."""
        return cls(
            "radial_profile",
            (),
            profile=profile,
            r_max=float(r_max),
            mu=_coerce_mu(mu),
            label=label,
        )

    @classmethod
    def tabulated(cls, kappas, eps_values, mu=None, label=""):
        """Tabulated ``eps(i kappa)``, interpolated log-log linearly in
        ``(kappa, eps - 1)`` and clamped to the end values outside the table."""
        kappas = np.asarray(kappas, dtype=float)
        eps_values = np.asarray(eps_values, dtype=float)
        if kappas.ndim != 1 or kappas.size < 2 or np.any(np.diff(kappas) <= 0):
            raise DomainError("tabulated kappas must be increasing, length >= 2")
        if np.any(kappas <= 0):
            raise DomainError("tabulated kappas must be > 0")
        if np.any(eps_values < 1.0):
            raise DomainError("tabulated permittivities must be >= 1")
        return cls(
            "tabulated",
            (
                ("log_kappa", tuple(np.log(kappas))),
                ("log_chi", tuple(np.log(np.maximum(eps_values - 1.0, 1e-300)))),
            ),
            mu=_coerce_mu(mu),
            label=label,
        )


def _coerce_mu(mu):
    if mu is None:
        return None
    if isinstance(mu, ResponseModel):
        return mu
    mu = float(mu)
    if mu <= 0.0:
        raise DomainError("permeability must be > 0")
    if mu == 1.0:
        return None
    return ResponseModel("constant", (("eps", mu),))


def permittivity_at(model: ResponseModel, kappa: float) -> float:
    """Evaluate ``eps(i kappa)`` for a homogeneous model.

    Raises DomainError for ``kappa <= 0`` (the static point is reached only
    through the dedicated zero-frequency extrapolation in energetics) and for
    radial-profile models, which must be queried with a radius.
    """
    if kappa <= 0.0 or not math.isfinite(kappa):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")
    if model.kind == "constant":
        return model.param("eps")
    if model.kind == "drude":
        wp = model.param("omega_p")
        g = model.param("gamma")
        return 1.0 + wp * wp / (kappa * (kappa + g))
    if model.kind == "lorentz_oscillator":
        es = model.param("eps_static")
        w0 = model.param("omega_0")
        return 1.0 + (es - 1.0) / (1.0 + (kappa / w0) ** 2)
    if model.kind == "tabulated":
        lk = np.asarray(model.param("log_kappa"))
        lc = np.asarray(model.param("log_chi"))
        x = np.clip(math.log(kappa), lk[0], lk[-1])
        return 1.0 + math.exp(np.interp(x, lk, lc))
    raise DomainError("radial_profile models require permittivity_profile_at")


def permittivity_profile_at(model: ResponseModel, kappa: float, r: float) -> float:
    """Evaluate ``eps(i kappa, r)`` for a radial-profile model."""
    if model.kind != "radial_profile":
        raise DomainError("model has no radial profile")
    if kappa <= 0.0 or not math.isfinite(kappa):
        raise DomainError(f"kappa must be positive and finite, got {kappa}")
    if not 0.0 <= r <= model.r_max:
        raise DomainError(f"radius {r} outside profile support [0, {model.r_max}]")
    return float(model.profile(kappa, r))


def _profile_clamped(model: ResponseModel, kappa: float, r: float) -> float:
    # Continuation past the nominal support with the surface value; used by
    # the variable-phase integrator when the sphere radius is dilated.
    if model.kind != "radial_profile":
        return permittivity_at(model, kappa)
    return float(model.profile(kappa, min(r, model.r_max)))


def permeability_at(model: ResponseModel, kappa: float) -> float:
    """Evaluate ``mu(i kappa)``; 1 for nonmagnetic models."""
    if model.mu is None:
        return 1.0
    return permittivity_at(model.mu, kappa)


@dataclass(frozen=True)
class SignClass:
    """Sign of a body's scattering potential relative to the medium.

    ``value`` is one of ``"plus"``, ``"minus"`` or ``"undefined"``;
    ``witnesses`` records the (kappa, r) grid certifying the class.
    """

    value: str
    witnesses: tuple = field(default=(), repr=False)

    @property
    def defined(self) -> bool:
        return self.value != "undefined"

    @property
    def s(self) -> int:
        """The sign as an integer: +1, -1, or 0 when undefined."""
        return {"plus": 1, "minus": -1}.get(self.value, 0)


def default_kappa_grid(length_scale: float, n: int = 64) -> np.ndarray:
    """Log-spaced certification grid over kappa in [1e-3, 1e3]/length_scale."""
    if length_scale <= 0.0:
        raise DomainError("length_scale must be > 0")
    return np.geomspace(1e-3, 1e3, n) / length_scale


def default_r_grid(model: ResponseModel, n_per_layer: int = 32) -> np.ndarray:
    """Uniform radial grid over the profile support, per layer when the
    model declares a layer break; a single point for homogeneous models."""
    if not model.is_profile:
        return np.array([0.0])
    try:
        rb = model.param("r_break")
    except KeyError:
        return np.linspace(0.0, model.r_max, 2 * n_per_layer)
    inner = np.linspace(0.0, rb * (1.0 - 1e-9), n_per_layer)
    outer = np.linspace(rb, model.r_max, n_per_layer)
    return np.concatenate([inner, outer])


def classify_sign(body: ResponseModel, medium: ResponseModel, kappa_grid, r_grid) -> SignClass:
    """Certify the potential sign of ``body`` against ``medium`` on a grid.

    ``plus`` requires eps_body > eps_medium strictly (and mu_body <= mu_medium
    when either side carries magnetic response) at every grid point;
    ``minus`` is the reversed ordering.  Equality in eps at any point yields
    ``undefined``: the classification never rounds a degenerate draw into a
    definite class.
    """
    kappa_grid = np.atleast_1d(np.asarray(kappa_grid, dtype=float))
    r_grid = np.atleast_1d(np.asarray(r_grid, dtype=float))
    if kappa_grid.size == 0 or r_grid.size == 0:
        raise DomainError("certification grids must be non-empty")
    if medium.is_profile:
        raise DomainError("the intermediate medium must be homogeneous")

    magnetic = body.is_magnetic or medium.is_magnetic
    eps_plus = True
    eps_minus = True
    mu_le = True
    mu_ge = True
    witnesses = []
    for kappa in kappa_grid:
        em = permittivity_at(medium, kappa)
        mm = permeability_at(medium, kappa)
        mb = permeability_at(body, kappa)
        if magnetic:
            mu_le &= mb <= mm
            mu_ge &= mb >= mm
        radii = r_grid if body.is_profile else r_grid[:1]
        for r in radii:
            if body.is_profile:
                eb = permittivity_profile_at(body, kappa, r)
                witnesses.append((float(kappa), float(r)))
            else:
                eb = permittivity_at(body, kappa)
                witnesses.append((float(kappa), None))
            eps_plus &= eb > em
            eps_minus &= eb < em

    if eps_plus and (not magnetic or mu_le):
        value = "plus"
    elif eps_minus and (not magnetic or mu_ge):
        value = "minus"
    else:
        value = "undefined"
    return SignClass(value, tuple(witnesses))
