"""Independent quadrature oracle for the disc integrals.

Every area integral is written as ``(1/pi) int_D g(z) (1-|z|^2)^sigma dm(z)``
(so ``dmu = (1-|z|^2)^-2 dm/pi`` is absorbed into ``sigma``).  In polar form
with ``u = r^2`` this is ``(1/2pi) int dtheta int_0^1 g (1-u)^sigma du``:

* the angular mean is a uniform trapezoidal rule (spectral for integrands
  that are real-analytic on the closed disc);
* the radial integral is Gauss-Jacobi with the weight ``(1-u)^sigma`` folded
  into the rule;
* a factor ``Log(1-|z|^2)`` is not left in the integrand (Gauss-Jacobi only
  converges algebraically on it).  Callers pass it separately as ``g_log``
  and it is integrated with a Gauss rule for the weight
  ``(1-u)^sigma log(1-u)``, built from exact moments by the Chebyshev
  algorithm in extended precision.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import mpmath
import numpy as np
from scipy.special import roots_jacobi

from .errors import DomainError, InconclusiveError, NonConvergenceError
from .derivative import _flogf_sum
from .gram import KernelCombo, eval_vector, gram_of, quadratic_form
from .kernel_core import kernel_matrix, log_one_minus

Integrand = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadratureConfig:
    radial_nodes: int = 96
    angular_nodes: int = 256
    max_refinements: int = 5
    rel_tol: float = 1e-9

    def __post_init__(self):
        if self.radial_nodes < 8:
            raise DomainError("radial_nodes must be at least 8")
        if self.angular_nodes < 16 or self.angular_nodes % 2:
            raise DomainError("angular_nodes must be even and at least 16")
        if self.max_refinements < 0:
            raise DomainError("max_refinements must be nonnegative")

    def refined(self, level: int) -> tuple[int, int]:
        """Node counts at refinement ``level``; level -1 is the half-size check rule."""
        if level < 0:
            return self.radial_nodes // 2, self.angular_nodes // 2
        return self.radial_nodes << level, self.angular_nodes << level


DEFAULT_CONFIG = QuadratureConfig()

_rule_lock = threading.Lock()


@lru_cache(maxsize=None)
def _jacobi_rule(n: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0,1] for ``int h(u) (1-u)^sigma du``."""
    x, w = roots_jacobi(n, sigma, 0.0)
    u = (x + 1.0) / 2.0
    return u, w * 2.0 ** (-sigma - 1.0)


@lru_cache(maxsize=None)
def _log_jacobi_rule(n: int, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0,1] for ``int h(u) (1-u)^sigma log(1-u) du``.

    In ``v = 1-u`` the weight ``v^sigma (-log v)`` has moments
    ``1/(sigma+m+1)^2``.  Ordinary moments lose about 1.5 digits per node on
    [0,1], hence the working precision.
    """
    with mpmath.workdps(int(1.6 * n) + 40):
        s = mpmath.mpf(sigma)
        mom = [1 / (s + m + 1) ** 2 for m in range(2 * n)]
        a, b = _chebyshev_algorithm(mom, n)
        diag = np.array([float(x) for x in a])
        off = np.array([float(mpmath.sqrt(x)) for x in b[1:]])
        b0 = float(b[0])
    jac = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    v, vecs = np.linalg.eigh(jac)
    weights = b0 * vecs[0] ** 2
    # sign flip: the rule integrates -log v, callers want log(1-u)
    return 1.0 - v, -weights


def _chebyshev_algorithm(mom, n):
    """Recurrence coefficients of the monic orthogonal polynomials (Gautschi)."""
    a = [mpmath.mpf(0)] * n
    b = [mpmath.mpf(0)] * n
    prev = [mpmath.mpf(0)] * (2 * n)
    cur = list(mom)
    a[0] = mom[1] / mom[0]
    b[0] = mom[0]
    for k in range(1, n):
        nxt = [mpmath.mpf(0)] * (2 * n)
        for l in range(k, 2 * n - k):
            nxt[l] = cur[l + 1] - a[k - 1] * cur[l] - b[k - 1] * prev[l]
        a[k] = nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1]
        b[k] = nxt[k] / cur[k - 1]
        prev, cur = cur, nxt
    return a, b


def _rules(n: int, sigma: float, with_log: bool):
    with _rule_lock:
        jac = _jacobi_rule(n, float(sigma))
        lg = _log_jacobi_rule(n, float(sigma)) if with_log else None
    return jac, lg


def _angular_mean(g: Integrand, u: np.ndarray, m: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(m) / m
    z = np.sqrt(u)[:, None] * np.exp(1j * theta)[None, :]
    vals = np.asarray(g(z))
    if vals.shape != z.shape:
        vals = np.broadcast_to(vals, z.shape)
    return vals.mean(axis=1), np.abs(vals).mean(axis=1)


def _single_pass(g, g_log, sigma, n, m):
    jac, lg = _rules(n, sigma, g_log is not None)
    total = 0.0
    scale = 0.0
    if g is not None:
        mean, amean = _angular_mean(g, jac[0], m)
        total = total + np.dot(jac[1], mean)
        scale += float(np.dot(jac[1], amean))
    if g_log is not None:
        mean, amean = _angular_mean(g_log, lg[0], m)
        total = total + np.dot(lg[1], mean)
        scale += float(np.dot(np.abs(lg[1]), amean))
    return complex(total), scale


def weighted_disc_integral(g: Optional[Integrand], sigma: float,
                           config: QuadratureConfig = DEFAULT_CONFIG,
                           g_log: Optional[Integrand] = None):
    """``(1/pi) int_D [g + g_log Log(1-|z|^2)] (1-|z|^2)^sigma dm``.

    Integrands take an array of points and return values of the same shape.
    The configured rule is compared with a half-size rule first, then node
    counts double until two successive estimates agree to ``rel_tol``
    relative to the integral of ``|g| + |g_log log(1-|z|^2)|``; the finer
    estimate is returned (a float when it is real to that tolerance).
    """
    if not sigma > -1:
        raise DomainError(f"sigma must exceed -1, got {sigma}")
    if g is None and g_log is None:
        return 0.0
    prev = None
    for level in range(-1, config.max_refinements + 1):
        n, m = config.refined(level)
        est, scale = _single_pass(g, g_log, sigma, n, m)
        if prev is not None and abs(est - prev) <= config.rel_tol * max(scale, 1e-300):
            if abs(est.imag) <= config.rel_tol * max(scale, 1e-300):
                return est.real
            return est
        prev = est
    raise NonConvergenceError(
        f"disc integral did not converge after {config.max_refinements} "
        f"refinements (last change {abs(est - prev) if prev is not None else math.nan:.3g})")


# ---------------------------------------------------------------------------
# Norms and the pieces of the derivative
# ---------------------------------------------------------------------------

def _fa(combo: KernelCombo) -> Integrand:
    return combo.__call__


def _require_alpha_above_one(alpha: float):
    if not alpha > 1:
        raise DomainError(f"Bergman norms need alpha > 1, got {alpha}")


def bergman_norm_sq_quad(combo: KernelCombo,
                         config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``int |F|^2 (alpha-1)(1-|z|^2)^alpha dmu`` for ``F = f^alpha``."""
    a = combo.alpha
    _require_alpha_above_one(a)
    F = _fa(combo)
    return weighted_disc_integral(lambda z: (a - 1) * np.abs(F(z)) ** 2,
                                  a - 2, config)


def bergman_power_norm(combo: KernelCombo, alpha_prime: float,
                       config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``N_f(alpha')^(2 alpha')`` for the fixed ``f = (combo)^(1/alpha)``.

    Only ``|f|`` enters, so no branch of the root is needed.
    """
    _require_alpha_above_one(alpha_prime)
    F = _fa(combo)
    p = alpha_prime / combo.alpha
    return weighted_disc_integral(
        lambda z: (alpha_prime - 1) * np.abs(F(z)) ** (2 * p),
        alpha_prime - 2, config)


def _ii_integrand(combo: KernelCombo) -> Integrand:
    F = _fa(combo)
    a = combo.alpha

    def g(z):
        m2 = np.abs(F(z)) ** 2
        return m2 * np.log(m2) / a
    return g


def _check_zero_free(combo, config):
    if not zero_free_check(combo, config=config):
        raise DomainError("combo has zeros in the closed disc")


def II_quad(combo: KernelCombo, config: QuadratureConfig = DEFAULT_CONFIG,
            check: bool = True) -> float:
    """``(1/alpha) int |F|^2 (1-|z|^2)^alpha Log|F|^2 dmu``."""
    _require_alpha_above_one(combo.alpha)
    if check:
        _check_zero_free(combo, config)
    return weighted_disc_integral(_ii_integrand(combo), combo.alpha - 2, config)


def III_quad(combo: KernelCombo,
             config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """``int |F|^2 (1-|z|^2)^alpha Log(1-|z|^2) dmu``."""
    _require_alpha_above_one(combo.alpha)
    F = _fa(combo)
    return weighted_disc_integral(None, combo.alpha - 2, config,
                                  g_log=lambda z: np.abs(F(z)) ** 2)


def I_f_quad(combo: KernelCombo, config: QuadratureConfig = DEFAULT_CONFIG,
             check: bool = True) -> float:
    """``int |f|^2alpha (1-|z|^2)^alpha Log(|f|^2 (1-|z|^2)) dmu``."""
    _require_alpha_above_one(combo.alpha)
    if check:
        _check_zero_free(combo, config)
    F = _fa(combo)
    return weighted_disc_integral(_ii_integrand(combo), combo.alpha - 2, config,
                                  g_log=lambda z: np.abs(F(z)) ** 2)


# Closed forms (the "oracle targets"), corrected sign convention.

def _pair(w_i, w_j, alpha):
    w_i, w_j = complex(w_i), complex(w_j)
    a = complex(kernel_matrix([w_i], alpha, [w_j])[0, 0])
    lg = complex(log_one_minus([w_i, w_j])[0, 1])
    lj = math.log(1.0 - abs(w_j) ** 2)
    return a, lg, lj


def III_ij_closed(w_i, w_j, alpha: float) -> complex:
    a, lg, _ = _pair(w_i, w_j, alpha)
    return -a / (alpha - 1) ** 2 + a * lg / (alpha - 1)


def IV_ij_closed(w_i, w_j, alpha: float) -> complex:
    a, _, lj = _pair(w_i, w_j, alpha)
    return -a / (alpha - 1) ** 2 - a * lj / (alpha - 1)


def V_ij_closed(w_i, w_j, alpha: float) -> complex:
    a, lg, lj = _pair(w_i, w_j, alpha)
    return a * (lg + lj) / (alpha - 1)


def VI_ij_closed(w_i, w_j, alpha: float) -> complex:
    a, _, lj = _pair(w_i, w_j, alpha)
    return -a * lj / (alpha - 1)


def III_ij_quad(w_i, w_j, alpha: float,
                config: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Direct quadrature of ``int K_i conj(K_j) (1-|z|^2)^alpha Log(1-|z|^2) dmu``."""
    w_i, w_j = complex(w_i), complex(w_j)

    def g(z):
        return ((1 - np.conj(w_i) * z) ** -alpha
                * np.conj((1 - np.conj(w_j) * z) ** -alpha))
    return complex(weighted_disc_integral(None, alpha - 2, config, g_log=g))


def V_ij_quad(w_i, w_j, alpha: float,
              config: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """Direct quadrature of the ``Log|1 - conj(z) w_j|^2`` moment."""
    w_i, w_j = complex(w_i), complex(w_j)

    def g(z):
        kk = ((1 - np.conj(w_i) * z) ** -alpha
              * np.conj((1 - np.conj(w_j) * z) ** -alpha))
        return kk * np.log(np.abs(1 - np.conj(z) * w_j) ** 2)
    return complex(weighted_disc_integral(g, alpha - 2, config))


def closed_II(combo: KernelCombo) -> float:
    """``(1/(alpha(alpha-1))) sum c_i conj(c_j) a_ij (conj(Log f_i) + Log f_j)``."""
    f = eval_vector(combo)
    s = 2.0 * _flogf_sum(combo.coeffs, f, "principal", 0.0)
    a = combo.alpha
    return s / (a * (a - 1))


def closed_III(combo: KernelCombo) -> float:
    a = combo.alpha
    n = quadratic_form(combo)
    c = combo.coeffs
    W = gram_of(combo).entries
    T = float(np.real(c @ (W * log_one_minus(combo.points)) @ np.conj(c)))
    return -n / (a - 1) ** 2 + T / (a - 1)


def closed_I_f(combo: KernelCombo) -> float:
    """``I_f(alpha)`` assembled from the closed forms (``+alpha Log`` sign)."""
    return closed_II(combo) + closed_III(combo)


# ---------------------------------------------------------------------------
# Hardy norm, Herglotz integral, argument principle
# ---------------------------------------------------------------------------

def hardy_norm_sq(combo: KernelCombo) -> float:
    """Closed-form ``||F||_{H^2}^2`` for an ``alpha = 1`` combination."""
    if combo.alpha != 1:
        raise DomainError("hardy_norm_sq expects a combo at alpha = 1")
    return quadratic_form(combo)


def _circle_mean(sampler, r, m):
    theta = 2.0 * np.pi * np.arange(m) / m
    return float(np.mean(np.abs(sampler(r * np.exp(1j * theta))) ** 2))


def hardy_norm_circle(sampler: Integrand,
                      config: QuadratureConfig = DEFAULT_CONFIG,
                      step: float = 1e-5) -> float:
    """``||f||_{H^2}^2`` from circle means at radii ``1-2h`` and ``1-h``.

    The two trapezoidal means are combined by one Richardson step toward
    ``r = 1``.
    """
    prev = None
    for level in range(config.max_refinements + 1):
        m = config.angular_nodes << level
        m1 = _circle_mean(sampler, 1 - 2 * step, m)
        m2 = _circle_mean(sampler, 1 - step, m)
        est = 2 * m2 - m1
        if prev is not None and abs(est - prev) <= config.rel_tol * abs(est):
            return est
        prev = est
    raise NonConvergenceError("circle means did not converge")


def herglotz_log(modulus_sampler: Integrand, z,
                 config: QuadratureConfig = DEFAULT_CONFIG) -> complex:
    """``(1/2pi) int (e^it + z)/(e^it - z) Log|f(e^it)| dt``.

    ``modulus_sampler`` is evaluated on points of the unit circle; only the
    modulus of its output is used.  For ``f`` zero-free on the closed disc
    with ``f(0) > 0`` this is ``Log f(z)``.
    """
    z = complex(z)
    if not abs(z) < 1:
        raise DomainError("z must lie in the open disc")
    prev = None
    for level in range(config.max_refinements + 1):
        m = config.angular_nodes << level
        e = np.exp(2j * np.pi * np.arange(m) / m)
        mod = np.abs(np.asarray(modulus_sampler(e)))
        if np.any(mod <= 0):
            raise DomainError("boundary modulus vanishes at a sample")
        est = complex(np.mean((e + z) / (e - z) * np.log(mod)))
        if prev is not None and abs(est - prev) <= config.rel_tol * (1 + abs(est)):
            return est
        prev = est
    raise NonConvergenceError("Herglotz integral did not converge")


def winding_number(sampler: Integrand, r: float,
                   config: QuadratureConfig = DEFAULT_CONFIG) -> tuple[int, float]:
    """Winding number about 0 of ``sampler`` along ``|z| = r``, and min modulus.

    Raises :class:`InconclusiveError` if consecutive samples still differ in
    argument by more than pi/2 after all refinements.
    """
    for level in range(config.max_refinements + 1):
        m = config.angular_nodes << level
        vals = np.asarray(sampler(r * np.exp(2j * np.pi * np.arange(m) / m)))
        mods = np.abs(vals)
        if np.any(mods == 0):
            raise DomainError("exact zero on the test circle")
        steps = np.angle(np.roll(vals, -1) / vals)
        if np.max(np.abs(steps)) <= np.pi / 2:
            return int(round(np.sum(steps) / (2 * np.pi))), float(mods.min())
    raise InconclusiveError("argument increments too coarse to count zeros")


def zero_free_check(combo: KernelCombo, r: float = 1 - 1e-6,
                    config: QuadratureConfig = DEFAULT_CONFIG) -> bool:
    """Argument-principle test that ``F`` has no zeros in ``|z| < r``."""
    if not 0 < r < 1:
        raise DomainError("test radius must lie in (0, 1)")
    wn, min_mod = winding_number(combo, r, config)
    return wn == 0 and min_mod > 1e-9
