"""Closed-form derivative of the norm ``N_f(alpha)`` on kernel combinations.

For ``f^alpha = sum_i c_i K_{w_i,alpha}`` with ``f = cW`` and ``N = cWc^*``::

    D = 2 Re sum_i c_i conj(f_i Log f_i)
        + alpha sum_ij c_i conj(c_j) a_ij Log(1 - conj(w_i) w_j)
        - N Log N

    dN_f/dalpha      = N_f^(1-2 alpha) D / (2 alpha^2)
    d(N_f^2alpha)/da = (D + N Log N) / alpha

The sign in front of ``alpha Log(1 - conj(w_i) w_j)`` is ``+``: that is the
only choice that makes a single kernel flat in ``alpha`` and agrees with
finite differences of the integral norms (see ``tests/test_derivative.py``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BranchError, ClassError, DegenerateError, DomainError
from .gram import (KernelCombo, build_gram, eval_vector, gram_of,
                   solve_coefficients)
from .kernel_core import log_one_minus, xlogx, xlogx_array

#: Re f_i must exceed this for the principal-branch formulas.
BRANCH_MARGIN = 1e-12

LAMBDA = "LambdaEps"
GAMMA = "Gamma"
OUTSIDE = "Outside"


@dataclass(frozen=True)
class ClassTag:
    """Class membership of ``(c, w)`` at a given ``alpha``.

    ``kind`` is ``LambdaEps`` when the Lambda_{alpha,epsilon} conditions hold
    (checked first), else ``Gamma`` when ``c`` and ``w`` are real, else
    ``Outside``.
    """

    kind: str
    epsilon: Optional[float]
    branch_ok: bool
    in_lambda: bool
    in_gamma: bool

    def summary(self) -> str:
        if self.kind == LAMBDA:
            return f"Lambda(eps={self.epsilon:g})"
        return self.kind


@dataclass(frozen=True)
class DerivativeReport:
    n_alpha: float
    n_f: float
    d_alpha: float
    dN_dalpha: float
    dNpow_dalpha: float
    cls: ClassTag


@dataclass(frozen=True)
class BMatrix:
    entries: np.ndarray


def branch_ok(fvals) -> bool:
    f = np.asarray(fvals, dtype=complex)
    return bool(np.all(f.real > BRANCH_MARGIN))


def classify(combo: KernelCombo, epsilon: float = 1.0) -> ClassTag:
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    ok = branch_ok(eval_vector(combo))
    real_w = combo.real_nodes
    in_lambda = ok and real_w and bool(np.all(np.abs(combo.points) < epsilon))
    in_gamma = real_w and combo.real_coeffs
    if in_lambda:
        kind = LAMBDA
    elif in_gamma:
        kind = GAMMA
    else:
        kind = OUTSIDE
    return ClassTag(kind, epsilon if in_lambda else None, ok, in_lambda,
                    in_gamma)


# ---------------------------------------------------------------------------
# Generic evaluator: D~(c, A) with a caller-supplied logarithm of A.
# ---------------------------------------------------------------------------

def _log_values(f: np.ndarray, mode: str) -> np.ndarray:
    """Logarithm of ``f`` under one of three conventions.

    ``principal``: requires ``Re f > BRANCH_MARGIN``.  ``upper``: principal
    log, with points on the negative axis taken as limits from above.
    """
    if mode == "principal":
        if not branch_ok(f):
            raise BranchError(f"values leave the right half-plane: {f}")
        return np.log(f)
    if mode == "upper":
        ang = np.where((f.imag == 0) & (f.real < 0), np.pi, np.angle(f))
        with np.errstate(divide="ignore"):
            return np.log(np.abs(f)) + 1j * ang
    raise ValueError(mode)


def _flogf_sum(c: np.ndarray, f: np.ndarray, mode: str, zero_tol) -> float:
    """``sum_i Re(c_i conj(f_i Log f_i))`` with ``0 Log 0 = 0``.

    ``zero_tol`` (scalar or per-entry) decides which ``f_i`` count as zero.
    """
    zero = np.abs(f) <= zero_tol
    # vanishing entries are masked before the branch test
    fz = np.where(zero, 1.0, f)
    logs = _log_values(fz, mode)
    terms = np.real(c * np.conj(fz * logs))
    return float(np.sum(np.where(zero, 0.0, terms)))


def _hermitian_real(c: np.ndarray, M: np.ndarray) -> float:
    """``Re(c M c^*)``; the Hermitian pairing makes the form real."""
    return float(np.real(c @ M @ np.conj(c)))


#: Relative size below which a cancelling sum is treated as an exact zero.
ZERO_RTOL = 1e-13


def _d_tilde_core(c, A, logA, mode="principal") -> float:
    c = np.asarray(c, dtype=complex)
    A = np.asarray(A, dtype=complex)
    f = c @ A
    # rounding scales of f_j = sum_i c_i a_ij and N = sum c_i a_ij conj(c_j)
    f_scale = np.abs(c) @ np.abs(A)
    n_scale = float(f_scale @ np.abs(c))
    n = _hermitian_real(c, A)
    if n < -1e-10 * n_scale:
        raise DegenerateError(f"N = {n} is negative; matrix not PSD")
    if n <= ZERO_RTOL * len(c) * n_scale:
        n = 0.0
    first = 2.0 * _flogf_sum(c, f, mode, ZERO_RTOL * len(c) * f_scale)
    second = _hermitian_real(c, A * logA)
    return first - second - xlogx(n)


# ---------------------------------------------------------------------------
# D_alpha variants
# ---------------------------------------------------------------------------

def _gram_log(combo: KernelCombo) -> tuple[np.ndarray, np.ndarray]:
    """Gram entries and the continuous-branch ``Log a_ij = -alpha Log(1 - w̄_i w_j)``."""
    W = gram_of(combo).entries
    L = log_one_minus(combo.points)
    logA = -combo.alpha * L
    # exact Hermitian symmetry
    logA = np.triu(logA) + np.conj(np.triu(logA, 1)).T
    return W, logA


def d_alpha_lambda(combo: KernelCombo) -> float:
    """``D_alpha(c, w)`` with principal logarithms; needs every ``f_i`` in H."""
    W, logA = _gram_log(combo)
    f = combo.coeffs @ W
    if not branch_ok(f):
        raise BranchError("some f_i is not in the right half-plane")
    n = _hermitian_real(combo.coeffs, W)
    if n <= 0:
        raise DegenerateError("N_alpha vanishes")
    return _d_tilde_core(combo.coeffs, W, logA, mode="principal")


def d_alpha_gamma(combo: KernelCombo) -> float:
    """``D_alpha`` for real coefficients and real nodes, using ``Log|f_i|``."""
    if not (combo.real_nodes and combo.real_coeffs):
        raise ClassError("Gamma variant needs real coefficients and nodes")
    c = combo.coeffs.real
    w = combo.points.real
    W = (1.0 - np.outer(w, w)) ** (-combo.alpha)
    W = np.triu(W) + np.triu(W, 1).T
    f = c @ W
    first = 2.0 * float(np.sum(c * np.sign(f) * xlogx_array(np.abs(f))))
    log_terms = combo.alpha * np.log(1.0 - np.outer(w, w))
    second = float(c @ (W * log_terms) @ c)
    n = max(float(c @ W @ c), 0.0)
    return first + second - xlogx(n)


def d_alpha(combo: KernelCombo) -> float:
    """Dispatch: Lambda formula when branch-valid, else the Gamma formula."""
    f = eval_vector(combo)
    if branch_ok(f):
        return d_alpha_lambda(combo)
    if combo.real_nodes and combo.real_coeffs:
        return d_alpha_gamma(combo)
    raise BranchError("instance is neither branch-valid nor in Gamma")


def d_hat_alpha(fvals, points, alpha: float) -> float:
    """``D_alpha`` expressed through the node values ``f``: ``c = f W^{-1}``."""
    f = np.asarray(fvals, dtype=complex)
    gram = build_gram(points, alpha)
    c = solve_coefficients(f, gram)
    if branch_ok(f):
        return d_alpha_lambda(KernelCombo(alpha, gram.points, c))
    if np.all(f.imag == 0) and np.all(gram.points.imag == 0):
        return d_alpha_gamma(KernelCombo(alpha, gram.points, c.real))
    raise BranchError("f must lie in H^k, or be real with real nodes")


def derivative_report(combo: KernelCombo, epsilon: float = 1.0) -> DerivativeReport:
    cls = classify(combo, epsilon)
    if cls.branch_ok:
        d = d_alpha_lambda(combo)
    elif cls.in_gamma:
        d = d_alpha_gamma(combo)
    else:
        raise BranchError("D_alpha needs branch-valid values or a Gamma instance")
    a = combo.alpha
    n_alpha = float(np.real(combo.coeffs @ gram_of(combo).entries
                            @ np.conj(combo.coeffs)))
    if n_alpha <= 0:
        raise DegenerateError("N_alpha vanishes")
    n_f = n_alpha ** (1.0 / (2 * a))
    dn = n_f ** (1 - 2 * a) * d / (2 * a * a)
    dnpow = (d + n_alpha * math.log(n_alpha)) / a
    return DerivativeReport(n_alpha, n_f, d, dn, dnpow, cls)


# ---------------------------------------------------------------------------
# B matrix, D~ and block augmentation
# ---------------------------------------------------------------------------

def b_matrix(combo: KernelCombo) -> BMatrix:
    """``B_ij = conj(Log f_i) + Log f_j - Log(a_ij N)``."""
    W, logA = _gram_log(combo)
    f = combo.coeffs @ W
    if not branch_ok(f):
        raise BranchError("some f_i is not in the right half-plane")
    n = _hermitian_real(combo.coeffs, W)
    if n <= 0:
        raise DegenerateError("N_alpha vanishes")
    lf = np.log(f)
    B = np.conj(lf)[:, None] + lf[None, :] - logA - math.log(n)
    return BMatrix(B)


def hadamard_form(combo: KernelCombo, B: BMatrix) -> float:
    """``c (W o B) c^*``, which reproduces ``D_alpha``."""
    W = gram_of(combo).entries
    return _hermitian_real(combo.coeffs, W * B.entries)


def _principal_log_matrix(A: np.ndarray) -> np.ndarray:
    """Entrywise principal log; zero entries get 0 (they carry weight 0)."""
    zero = A == 0
    if np.any((A.imag == 0) & (A.real < 0)):
        raise BranchError("matrix entry on the negative real axis")
    return np.where(zero, 0.0, np.log(np.where(zero, 1.0, A)))


def d_tilde(c, A) -> float:
    """``D~(c, A)`` for a Hermitian PSD ``A``.

    ``f = cA`` must lie in H entrywise; entries of ``f`` that vanish (for
    instance when ``cA = 0``) contribute nothing.
    """
    c = np.asarray(c, dtype=complex)
    A = np.asarray(A, dtype=complex)
    if A.shape != (c.size, c.size):
        raise DomainError("shape mismatch between c and A")
    return _d_tilde_core(c, A, _principal_log_matrix(A), mode="principal")


def augment(c, A) -> tuple[np.ndarray, np.ndarray]:
    """Block matrix ``[[cAc^*, f], [f^*, A]]`` and ``(-1, c)``; annihilates."""
    c = np.asarray(c, dtype=complex)
    A = np.asarray(A, dtype=complex)
    f = c @ A
    n = _hermitian_real(c, A)
    k = c.size
    At = np.empty((k + 1, k + 1), dtype=complex)
    At[0, 0] = n
    At[0, 1:] = f
    At[1:, 0] = np.conj(f)
    At[1:, 1:] = A
    ct = np.concatenate([[-1.0 + 0j], c])
    return ct, At


def question7_value(c, A) -> float:
    """``-sum c_i conj(c_j) a_ij Log a_ij``, the value of ``D~`` when ``cA = 0``."""
    c = np.asarray(c, dtype=complex)
    A = np.asarray(A, dtype=complex)
    return -_hermitian_real(c, A * _principal_log_matrix(A))


def jensen_bound(x, combo_or_c, A=None) -> float:
    """``sum_ij x_i x_j a_ij Log(|f_i f_j| / (a_ij N))``; at most 0.

    Returns ``-inf`` when some ``f_i`` with ``x_i > 0`` vanishes.
    """
    if isinstance(combo_or_c, KernelCombo):
        c = combo_or_c.coeffs
        A = gram_of(combo_or_c).entries
    else:
        c = np.asarray(combo_or_c, dtype=complex)
    A = np.asarray(A, dtype=complex)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("x must be nonnegative")
    if np.any(A.imag != 0) or np.any(A.real <= 0):
        raise DomainError("entries of A must be real and positive")
    a = A.real
    if not np.any(x > 0):
        return 0.0
    f = np.abs(c @ A)
    n = _hermitian_real(c, A)
    active = x > 0
    if n <= 0 or np.any(f[active] == 0):
        return -math.inf
    xa, fa, aa = x[active], f[active], a[np.ix_(active, active)]
    logs = np.log(fa)[:, None] + np.log(fa)[None, :] - np.log(aa) - math.log(n)
    return float(xa @ (aa * logs) @ xa)
