"""Kernel combinations, their Gram matrices and the quadratic form N_alpha.

A :class:`KernelCombo` ``(alpha, w, c)`` stands for the function
``F(z) = sum_i c_i (1 - conj(w_i) z)^(-alpha)``.  With ``W = [a_ij]``,
``a_ij = (1 - conj(w_i) w_j)^(-alpha)``, the row vector ``f = c W`` holds the
values ``F(w_j)`` and ``N = c W c^*`` is ``||F||^2`` in ``A_alpha^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, SingularGramError
from .kernel_core import as_disc_point, kernel_matrix

#: Gram matrices with a larger condition estimate are not inverted.
CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class KernelCombo:
    """Exponent, kernel nodes and coefficients of a kernel combination."""

    alpha: float
    points: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        alpha = float(self.alpha)
        if not alpha > 0:
            raise DomainError(f"alpha must be positive, got {alpha}")
        pts = np.array([as_disc_point(w) for w in np.atleast_1d(self.points)],
                       dtype=complex)
        cs = np.array(np.atleast_1d(self.coeffs), dtype=complex)
        if pts.ndim != 1 or len(pts) < 1:
            raise DomainError("a combo needs at least one node")
        if cs.shape != pts.shape:
            raise DomainError(
                f"{len(pts)} nodes but {cs.size} coefficients")
        if not np.all(np.isfinite(cs)):
            raise DomainError("coefficients must be finite")
        pts.setflags(write=False)
        cs.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "coeffs", cs)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def real_nodes(self) -> bool:
        return bool(np.all(self.points.imag == 0))

    @property
    def real_coeffs(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))

    def with_alpha(self, alpha: float) -> "KernelCombo":
        return KernelCombo(alpha, self.points, self.coeffs)

    def __call__(self, z):
        """Evaluate the combination at ``z`` (scalar or array)."""
        z = np.asarray(z, dtype=complex)
        flat = z.reshape(-1)
        vals = self.coeffs @ kernel_matrix(self.points, self.alpha, flat)
        return vals.reshape(z.shape) if z.ndim else complex(vals[0])


@dataclass(frozen=True)
class GramMatrix:
    """Hermitian Gram matrix ``[(1 - conj(w_i) w_j)^(-alpha)]`` plus diagnostics.

    ``min_pivot`` is the smallest eigenvalue among the pivot blocks of a
    Bunch-Kaufman ``LDL^*`` factorization; ``min_eigenvalue`` and
    ``condition_estimate`` come from the spectrum (``k`` is small).
    """

    alpha: float
    points: np.ndarray
    entries: np.ndarray
    min_pivot: float
    min_eigenvalue: float
    condition_estimate: float
    _distinct: bool = field(repr=False, default=True)

    @property
    def k(self) -> int:
        return len(self.points)

    @property
    def psd(self) -> bool:
        scale = float(np.max(self.entries.diagonal().real))
        return self.min_eigenvalue >= -1e-10 * scale

    @property
    def invertible(self) -> bool:
        return self._distinct and self.condition_estimate <= CONDITION_LIMIT


def _as_points(points) -> np.ndarray:
    if isinstance(points, KernelCombo):
        return points.points
    return np.array([as_disc_point(w) for w in np.atleast_1d(points)],
                    dtype=complex)


def build_gram(points: Sequence, alpha: float) -> GramMatrix:
    """Gram matrix of the kernels at ``points``; exactly Hermitian."""
    pts = _as_points(points)
    if len(pts) < 1:
        raise DomainError("need at least one node")
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    k = len(pts)
    full = kernel_matrix(pts, alpha)
    entries = np.triu(full)
    entries = entries + np.conj(np.triu(full, 1)).T
    diag = (1.0 - np.abs(pts) ** 2) ** (-alpha)
    entries[np.diag_indices(k)] = diag
    entries.setflags(write=False)

    _, d, _ = scipy.linalg.ldl(entries, hermitian=True)
    min_pivot = float(np.min(np.linalg.eigvalsh(d)))
    eig = np.linalg.eigvalsh(entries)
    min_eig = float(eig[0])
    smallest = np.min(np.abs(eig))
    cond = float(np.max(np.abs(eig)) / smallest) if smallest > 0 else np.inf
    distinct = len(set(pts.tolist())) == k
    pts = pts.copy()
    pts.setflags(write=False)
    return GramMatrix(float(alpha), pts, entries, min_pivot, min_eig, cond,
                      distinct)


def gram_of(combo: KernelCombo) -> GramMatrix:
    return build_gram(combo.points, combo.alpha)


def _hermitian_form(c: np.ndarray, A: np.ndarray) -> tuple[float, float, float]:
    """Return ``(Re cAc^*, Im cAc^*, sum_i |c_i|^2 |a_ii|)``."""
    val = complex(c @ A @ np.conj(c))
    scale = float(np.sum(np.abs(c) ** 2 * np.abs(np.diag(A))))
    return val.real, val.imag, scale


def quadratic_form(combo: KernelCombo, gram: GramMatrix | None = None) -> float:
    """``N_alpha = c W c^*`` as a nonnegative real."""
    if gram is None:
        gram = gram_of(combo)
    elif gram.k != combo.k or gram.alpha != combo.alpha:
        raise DomainError("Gram matrix does not match the combo")
    re, im, scale = _hermitian_form(combo.coeffs, gram.entries)
    if abs(im) > 1e-10 * (abs(re) + scale):
        raise ArithmeticError(f"quadratic form not real: {re}+{im}j")
    if re < -1e-10 * scale:
        raise ArithmeticError(f"negative quadratic form {re}: Gram not PSD")
    return max(re, 0.0)


def eval_vector(combo: KernelCombo) -> np.ndarray:
    """Row vector ``f = c W``, i.e. the combination evaluated at its nodes."""
    return combo.coeffs @ gram_of(combo).entries


def _check_invertible(gram: GramMatrix):
    if not gram._distinct:
        raise SingularGramError("Gram nodes are not distinct")
    if not gram.condition_estimate <= CONDITION_LIMIT:
        raise SingularGramError(
            f"Gram condition estimate {gram.condition_estimate:.3g} exceeds "
            f"{CONDITION_LIMIT:.0e}")


def solve_coefficients(fvals, gram: GramMatrix) -> np.ndarray:
    """Coefficients ``c`` with ``c W = fvals``."""
    _check_invertible(gram)
    f = np.asarray(fvals, dtype=complex)
    if f.shape != (gram.k,):
        raise DomainError(f"expected {gram.k} values, got shape {f.shape}")
    # c W = f  <=>  W c^* = f^*  (W Hermitian)
    c = np.conj(scipy.linalg.solve(gram.entries, np.conj(f), assume_a="her"))
    resid = np.linalg.norm(c @ gram.entries - f)
    if resid > 1e-8 * np.linalg.norm(f):
        raise SingularGramError(f"solve residual {resid:.3g} too large")
    return c


def projection_norm_sq(fvals, gram: GramMatrix) -> float:
    """``f W^{-1} f^*``: squared norm of the projection onto the kernel span."""
    f = np.asarray(fvals, dtype=complex)
    c = solve_coefficients(f, gram)
    return max(float(np.real(c @ np.conj(f))), 0.0)
