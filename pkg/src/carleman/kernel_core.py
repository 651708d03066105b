"""Scalar building blocks on the unit disc.

Principal logarithm and real powers, the reproducing kernels
``K_{w,alpha}(z) = (1 - conj(w) z)^(-alpha)`` and their normalized versions,
disc automorphisms, and the ``x log x`` convention.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError

#: Points closer than this to the unit circle are rejected.
BOUNDARY_MARGIN = 1e-12


@dataclass(frozen=True)
class DiscPoint:
    """A point of the open unit disc, kept away from the boundary."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not (cmath.isfinite(v) and abs(v) < 1.0 - BOUNDARY_MARGIN):
            raise DomainError(f"{v!r} is not a point of the unit disc")
        object.__setattr__(self, "value", v)

    def __complex__(self):
        return self.value


@dataclass(frozen=True)
class HalfPlaneValue:
    """A complex number with strictly positive real part."""

    value: complex

    def __post_init__(self):
        v = complex(self.value)
        if not v.real > 0:
            raise DomainError(f"{v!r} is not in the right half-plane")
        object.__setattr__(self, "value", v)

    def __complex__(self):
        return self.value


PointLike = Union[DiscPoint, complex, float]


def as_disc_point(w: PointLike) -> complex:
    """Validate ``w`` as a disc point and return it as a plain complex."""
    if isinstance(w, DiscPoint):
        return w.value
    return DiscPoint(w).value


def on_branch_cut(z: complex) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0


def principal_log(z: complex) -> complex:
    """Principal branch of log on C minus the closed negative real axis."""
    z = complex(z)
    if on_branch_cut(z):
        raise DomainError(f"principal_log undefined on the cut at {z!r}")
    return cmath.log(z)


def complex_power(base: complex, expo: float) -> complex:
    """``exp(expo * Log(base))``; real positive bases use the real power."""
    base = complex(base)
    if base.imag == 0.0 and base.real > 0.0:
        return complex(base.real ** expo)
    return cmath.exp(expo * principal_log(base))


def kernel_eval(w: PointLike, alpha: float, z: complex) -> complex:
    """Reproducing kernel ``(1 - conj(w) z)^(-alpha)``.

    For ``|w| < 1`` and ``|z| <= 1`` the base has positive real part, so the
    principal branch is never at risk.
    """
    w = as_disc_point(w)
    return complex_power(1.0 - w.conjugate() * complex(z), -alpha)


def normalized_kernel_eval(w: PointLike, beta: float, z: complex) -> complex:
    """``(1 - |w|^2)^(beta/2) * K_{w,beta}(z)``, a unit vector in A_beta^2."""
    w = as_disc_point(w)
    return (1.0 - abs(w) ** 2) ** (beta / 2) * kernel_eval(w, beta, z)


def mobius(a: PointLike, z: complex) -> complex:
    """Involutive disc automorphism ``(a - z) / (1 - conj(a) z)``."""
    a = as_disc_point(a)
    z = complex(z)
    return (a - z) / (1.0 - a.conjugate() * z)


def xlogx(x: float) -> float:
    """``x ln x`` extended by continuity with the value 0 at 0."""
    if x < 0:
        raise DomainError(f"xlogx undefined for negative {x!r}")
    if x == 0:
        return 0.0
    return x * math.log(x)


# Vectorized helpers used by the matrix-level modules. They trust their
# inputs; validation happens at the KernelCombo boundary.

def kernel_matrix(points, alpha: float, z=None) -> np.ndarray:
    """``[K_{w_i,alpha}(z_j)]``; with ``z=None`` this is the Gram matrix."""
    w = np.asarray(points, dtype=complex)
    z = w if z is None else np.asarray(z, dtype=complex)
    return np.exp(-alpha * np.log(1.0 - np.conj(w)[:, None] * z[None, :]))


def log_one_minus(points) -> np.ndarray:
    """``[Log(1 - conj(w_i) w_j)]``, always off the branch cut."""
    w = np.asarray(points, dtype=complex)
    return np.log(1.0 - np.conj(w)[:, None] * w[None, :])


def xlogx_array(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("xlogx undefined for negative entries")
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out
