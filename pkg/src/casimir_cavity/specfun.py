"""Exponentially scaled modified spherical Bessel functions.

The kernel of every scattering amplitude:

    i_l(z) = sqrt(pi/(2z)) I_{l+1/2}(z)   (regular,  grows like e^z / 2z)
    k_l(z) = sqrt(2/(pi z)) K_{l+1/2}(z)  (decaying, falls like e^-z / z)

Amplitude formulas downstream only ever need logarithms of the values plus
the logarithmic derivatives i'_l/i_l and k'_l/k_l, so the tables here are
built in that representation and never overflow: for small z and large l the
values themselves leave the double range (i_200(1e-6) ~ 1e-2500) while their
logs and ratios stay perfectly representable.

Construction: the k-family is generated by the upward ratio recurrence
k_{l+1}/k_l = (2l+1)/z + k_{l-1}/k_l (all terms positive, stable), anchored
at the closed form k_0 = e^-z/z.  The i-family uses scipy's scaled ``ive``
where it is representable and switches to a downward ratio recurrence seeded
by a continued fraction for I_{nu+1}/I_nu in the deep-underflow tail, anchored
at i_0 = sinh(z)/z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import CapabilityError, ConvergenceError, DomainError

__all__ = [
    "LMAX_CAP",
    "BesselPair",
    "BesselLadder",
    "bessel_eval",
    "bessel_ladder",
    "bessel_derivative_combo",
]

LMAX_CAP = 4096

# ive values below this are close enough to underflow that the tail recurrence
# takes over; above it the direct scaled values carry full precision.
_IVE_FLOOR = 1e-280

_LOG_HALF_PI = 0.5 * math.log(0.5 * math.pi)


def _i_ratio_cf(nu, z, maxiter=5000):
    """I_{nu+1}(z) / I_nu(z) by the modified Lentz continued fraction."""
    tiny = 1e-300
    f = tiny
    c = f
    d = 0.0
    for j in range(1, maxiter + 1):
        b = 2.0 * (nu + j) / z
        d = b + d
        if d == 0.0:
            d = tiny
        c = b + 1.0 / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            return f
    raise ConvergenceError(
        f"Bessel ratio continued fraction stalled at nu={nu}, z={z}",
        {"nu": nu, "z": z, "maxiter": maxiter},
    )


def _log_i0(z):
    """log i_0(z) = log(sinh z / z), overflow-safe."""
    z = np.asarray(z, dtype=float)
    return z - np.log(2.0 * z) + np.log1p(-np.exp(-2.0 * z))


@dataclass(frozen=True)
class BesselLadder:
    """Tables of log i_l, log k_l and logarithmic derivatives.

    Arrays are shaped ``(lmax + 1, len(z))`` and indexed by multipole order
    l = 0..lmax along the first axis.  ``di_i`` is i'_l(z)/i_l(z) (> 0) and
    ``dk_k`` is k'_l(z)/k_l(z) (< 0), derivatives with respect to z.
    """

    z: np.ndarray
    lmax: int
    log_i: np.ndarray
    log_k: np.ndarray
    di_i: np.ndarray
    dk_k: np.ndarray


def bessel_ladder(z, lmax) -> BesselLadder:
    """Build Bessel tables for all orders 0..lmax at each argument in z.

    ``z`` may be a scalar or a 1-D array of positive reals.  ``lmax`` must
    not exceed LMAX_CAP.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size == 0:
        raise DomainError("empty argument array")
    if np.any(~np.isfinite(z)) or np.any(z <= 0.0):
        raise DomainError("Bessel arguments must be positive and finite")
    if np.any(z < 1e-290):
        raise DomainError("Bessel arguments below 1e-290 are not supported")
    if lmax < 0:
        raise DomainError("lmax must be >= 0")
    if lmax > LMAX_CAP:
        raise CapabilityError(f"multipole order {lmax} exceeds cap {LMAX_CAP}")

    n = z.size
    nord = lmax + 2  # orders 0..lmax+1, one extra for derivative ratios

    # k-family: closed form at l=0, stable upward ratio recurrence above.
    log_k = np.empty((nord, n))
    rho = np.empty((nord - 1, n))  # rho[l] = k_{l+1} / k_l
    log_k[0] = -z - np.log(z)
    rho[0] = (z + 1.0) / z
    log_k[1] = log_k[0] + np.log(rho[0])
    for l in range(1, nord - 1):
        rho[l] = (2 * l + 1) / z + 1.0 / rho[l - 1]
        log_k[l + 1] = log_k[l] + np.log(rho[l])

    # i-family: scaled direct values where representable.
    nu = np.arange(nord) + 0.5
    iv = special.ive(nu[:, None], z[None, :])
    good = iv > _IVE_FLOOR  # contiguous prefix in l (I_nu decreases with nu)

    log_i = np.full((nord, n), -np.inf)
    with np.errstate(divide="ignore"):
        log_i[good] = (
            np.log(np.where(good, iv, 1.0))[good]
            + np.broadcast_to(z + _LOG_HALF_PI - 0.5 * np.log(z), (nord, n))[good]
        )
    r_i = np.empty((nord - 1, n))
    both = good[1:] & good[:-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        r_i[:] = np.where(both, iv[1:] / np.where(iv[:-1] > 0, iv[:-1], 1.0), np.nan)

    # Deep-underflow tails: continued-fraction seed at the top order, then the
    # downward ratio recurrence r_{l-1} = 1 / ((2l+1)/z + r_l).
    for j in np.nonzero(~good[-1])[0]:
        zj = z[j]
        l0 = int(np.argmin(good[:, j]))  # first bad order; l0 >= 1 always
        top = nord - 2
        r_i[top, j] = _i_ratio_cf(top + 0.5, zj)
        for l in range(top, max(l0 - 1, 0), -1):
            r_i[l - 1, j] = 1.0 / ((2 * l + 1) / zj + r_i[l, j])
        log_i[0, j] = _log_i0(zj)
        start = max(l0 - 1, 0)
        for l in range(start, nord - 1):
            log_i[l + 1, j] = log_i[l, j] + math.log(r_i[l, j])

    l_col = np.arange(lmax + 1)[:, None]
    di_i = r_i[: lmax + 1] + l_col / z[None, :]
    dk_k = l_col / z[None, :] - rho[: lmax + 1]
    return BesselLadder(z, lmax, log_i[: lmax + 1], log_k[: lmax + 1], di_i, dk_k)


@dataclass(frozen=True)
class BesselPair:
    """Scaled modified spherical Bessel values at one (l, z).

    ``i_scaled = i_l(z) e^-z`` and ``k_scaled = k_l(z) e^+z``; the derivative
    entries carry the same exponential factors.  All four are positive for
    z > 0 (i_scaled may underflow to 0.0 at extreme l/z combinations where
    the true value lies below the double-precision range).
    """

    l: int
    z: float
    i_scaled: float
    k_scaled: float
    di_scaled: float
    dk_scaled: float


def bessel_eval(l, z) -> BesselPair:
    """Evaluate the scaled Bessel pair and scaled derivatives at (l, z)."""
    if l != int(l) or l < 0:
        raise DomainError(f"order must be a non-negative integer, got {l}")
    l = int(l)
    if l > LMAX_CAP:
        raise CapabilityError(f"multipole order {l} exceeds cap {LMAX_CAP}")
    if not np.isfinite(z) or z <= 0.0:
        raise DomainError(f"argument must be positive and finite, got {z}")
    lad = bessel_ladder(z, l)
    zf = float(z)
    i_s = math.exp(lad.log_i[l, 0] - zf) if np.isfinite(lad.log_i[l, 0]) else 0.0
    k_s = math.exp(lad.log_k[l, 0] + zf)
    return BesselPair(l, zf, i_s, k_s, i_s * lad.di_i[l, 0], k_s * lad.dk_k[l, 0])


def bessel_derivative_combo(l, z, which, xi=1.0):
    """Radial entries (f(z), d/dr f(xi r), f(z)/r) at r = z/xi.

    ``which`` selects the regular family (``"J_entries"``, built from i_l)
    or the outgoing family (``"H_entries"``, built from k_l).  Values are
    unscaled but assembled from scaled internals; at arguments where the
    unscaled value exceeds the double range the entries saturate to inf.
    """
    if which not in ("J_entries", "H_entries"):
        raise DomainError(f"which must be J_entries or H_entries, got {which!r}")
    if xi <= 0.0:
        raise DomainError("xi must be positive")
    pair = bessel_eval(l, z)
    r = z / xi
    if which == "J_entries":
        log_f = math.log(pair.i_scaled) + z if pair.i_scaled > 0 else -math.inf
        ratio = pair.di_scaled / pair.i_scaled if pair.i_scaled > 0 else 0.0
    else:
        log_f = math.log(pair.k_scaled) - z
        ratio = pair.dk_scaled / pair.k_scaled
    f = math.exp(log_f) if log_f < 709.0 else math.inf
    return (f, xi * f * ratio, f / r)
