"""Power-series side of the integer-exponent norm identity.

For a polynomial ``f = sum a_n z^n`` with ``a_0 = 1`` and an integer
``alpha >= 2``,

    ||f||_{H^2}^{2 alpha} - ||f||_{A_alpha^{2 alpha}}^{2 alpha}
        = 1/2 sum_N C(N+alpha-1, N)^{-1} sum_{k,l=1}^{N} C(alpha,k) C(alpha,l)
              sum |a_{n_1}...a_{n_k} - a_{m_1}...a_{m_l}|^2,

the innermost sum running over compositions ``(n_i)`` and ``(m_j)`` of ``N``.
Both sides are finite sums for polynomials.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.special import binom, comb

from .errors import DomainError
from .kernel_core import as_disc_point

#: Largest admissible truncation order of :func:`rhs_sum`.
MAX_ORDER = 18


@dataclass(frozen=True)
class PolySeries:
    """Taylor coefficients ``(a_0, ..., a_d)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        a = np.array(np.atleast_1d(self.coeffs), dtype=complex)
        if a.ndim != 1 or a.size == 0:
            raise DomainError("need at least the constant coefficient")
        if not np.all(np.isfinite(a)):
            raise DomainError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "coeffs", a)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        # np.polyval wants the leading coefficient first
        return np.polyval(self.coeffs[::-1], z)

    def power(self, n: int) -> "PolySeries":
        out = np.array([1.0 + 0j])
        for _ in range(n):
            out = np.convolve(out, self.coeffs)
        return PolySeries(out)


def _check_normalized(f: PolySeries):
    if f.coeffs[0] != 1:
        raise DomainError("the identity is stated for a_0 = 1")


def _check_integer_alpha(alpha) -> int:
    if int(alpha) != alpha or alpha < 2:
        raise DomainError(f"alpha must be an integer >= 2, got {alpha}")
    return int(alpha)


def _gbinom(n: int, alpha: float) -> float:
    """``C(n+alpha-1, n) = prod_{j=1}^{n} (alpha+j-1)/j``."""
    return float(binom(n + alpha - 1, n))


def kernel_taylor(w, alpha: float, degree: int) -> PolySeries:
    """Degree-``degree`` truncation of ``(1 - conj(w) z)^(-alpha)``."""
    if degree < 0:
        raise DomainError("degree must be nonnegative")
    wb = as_disc_point(w).conjugate()
    n = np.arange(degree + 1)
    return PolySeries(binom(n + alpha - 1, n) * wb ** n)


def monomial_bergman_norm_sq(N: int, alpha: float) -> float:
    """``||z^N||^2`` in ``A_alpha^2``, i.e. ``1 / C(N+alpha-1, N)``."""
    if N < 0:
        raise DomainError("N must be nonnegative")
    return 1.0 / _gbinom(N, alpha)


def hardy_norm_sq(f: PolySeries) -> float:
    return float(np.sum(np.abs(f.coeffs) ** 2))


def bergman_norm_sq(f: PolySeries, alpha: float) -> float:
    n = np.arange(len(f.coeffs))
    return float(np.sum(np.abs(f.coeffs) ** 2 / binom(n + alpha - 1, n)))


def lhs_difference(f: PolySeries, alpha: int) -> float:
    """``||f||_{H^2}^{2 alpha} - ||f^alpha||_{A_alpha^2}^2``."""
    _check_normalized(f)
    a = _check_integer_alpha(alpha)
    return hardy_norm_sq(f) ** a - bergman_norm_sq(f.power(a), a)


def compositions(N: int, k: int) -> Iterator[tuple[int, ...]]:
    """Ordered ``k``-tuples of positive integers summing to ``N``."""
    if not 1 <= k <= N:
        raise DomainError(f"need 1 <= k <= N, got N={N}, k={k}")
    for cuts in itertools.combinations(range(1, N), k - 1):
        bounds = (0,) + cuts + (N,)
        yield tuple(bounds[i + 1] - bounds[i] for i in range(k))


def _composition_products(a: np.ndarray, N: int, k: int) -> np.ndarray:
    """``a_{n_1} ... a_{n_k}`` over all compositions of ``N`` into ``k`` parts."""
    d = len(a) - 1
    out = []
    for comp in compositions(N, k):
        if max(comp) > d:
            out.append(0j)
        else:
            out.append(complex(np.prod(a[list(comp)])))
    return np.array(out, dtype=complex)


def rhs_sum(f: PolySeries, alpha: int, N_max: int) -> float:
    """Right-hand side of the identity truncated at ``N <= N_max``.

    Binomials ``C(alpha, k)`` vanish for ``k > alpha``, so only ``k, l <=
    alpha`` contribute.  For product lists ``P`` and ``Q`` the pair sum
    ``sum |p - q|^2`` is expanded as
    ``|Q| sum|p|^2 + |P| sum|q|^2 - 2 Re(sum p conj(sum q))``.
    """
    _check_normalized(f)
    a_int = _check_integer_alpha(alpha)
    if N_max < 1:
        raise DomainError("N_max must be at least 1")
    if N_max > MAX_ORDER:
        raise DomainError(f"N_max = {N_max} exceeds the enumeration guard {MAX_ORDER}")
    a = f.coeffs
    total = 0.0
    for N in range(1, N_max + 1):
        kmax = min(N, a_int)
        stats = []
        for k in range(1, kmax + 1):
            p = _composition_products(a, N, k)
            stats.append((comb(a_int, k, exact=True), len(p),
                          float(np.sum(np.abs(p) ** 2)), complex(np.sum(p))))
        inner = 0.0
        for bk, nk, sk, tk in stats:
            for bl, nl, sl, tl in stats:
                pair = nl * sk + nk * sl - 2.0 * (tk * tl.conjugate()).real
                inner += bk * bl * pair
        total += 0.5 * inner / _gbinom(N, a_int)
    return total


def identity_gap(f: PolySeries, alpha: int) -> float:
    """``lhs - rhs`` with the exact truncation order ``alpha * degree``."""
    n_max = max(1, _check_integer_alpha(alpha) * f.degree)
    return lhs_difference(f, alpha) - rhs_sum(f, alpha, n_max)
