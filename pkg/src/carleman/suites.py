"""Cross-validation suites: closed forms against independent oracles.

Every suite returns a :class:`SuiteResult` with the largest observed error
and the tolerance it was judged against.  The ``verify`` command runs them
by name; a ``tolerance`` override tightens or loosens every comparison of a
suite at once.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from .derivative import (b_matrix, d_alpha, d_alpha_lambda, derivative_report,
                         hadamard_form)
from .gram import KernelCombo, quadratic_form
from .homotopy import mobius_reduce
from .kernel_core import xlogx
from .quadrature import (DEFAULT_CONFIG, II_quad, III_quad, I_f_quad,
                         QuadratureConfig, bergman_norm_sq_quad,
                         bergman_power_norm, closed_I_f, closed_II, closed_III,
                         weighted_disc_integral)
from .series import PolySeries, lhs_difference, rhs_sum


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_error: float
    tolerance: float
    cases: int
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Instance generators
# ---------------------------------------------------------------------------

def random_zero_free_combo(rng: np.random.Generator, alpha: float,
                           k_max: int = 3, node_radius: float = 0.7,
                           complex_coeffs: bool = False,
                           max_tries: int = 10_000) -> KernelCombo:
    """Real-node combo whose values on the closed disc lie in H.

    ``Re F`` is harmonic, so ``Re F > 0`` on the unit circle gives
    ``F(closed disc)`` in H: ``F`` is zero-free and the principal ``Log F``
    is a global holomorphic logarithm.
    """
    theta = np.exp(2j * np.pi * np.arange(2048) / 2048)
    for _ in range(max_tries):
        k = int(rng.integers(1, k_max + 1))
        w = np.sort(rng.uniform(-node_radius, node_radius, k))
        c = np.empty(k, dtype=complex)
        c[0] = 1.0
        if k > 1:
            scale = rng.uniform(0.05, 0.5)
            c[1:] = scale * rng.uniform(-1, 1, k - 1)
            if complex_coeffs:
                c[1:] += 1j * scale * rng.uniform(-1, 1, k - 1)
        combo = KernelCombo(alpha, w, c)
        if np.min(combo(theta).real) > 1e-3:
            return combo
    raise RuntimeError("could not draw a zero-free instance")


def remark_instance(alpha: float = 2.0) -> KernelCombo:
    """``c = (1, 1)``, ``w = (0, w_2)`` with ``(1 - w_2^2)^(-alpha) = 1.1``."""
    w2 = math.sqrt(1.0 - 1.1 ** (-1.0 / alpha))
    return KernelCombo(alpha, [0.0, w2], [1.0, 1.0])


def _rel(a: float, b: float, floor: float = 0.0) -> float:
    return abs(a - b) / max(abs(b), floor, 1e-300)


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

FLATNESS_ALPHAS = (1.1, 1.5, 2.0, 3.0, 5.0)
FLATNESS_POINTS = (0.0, 0.3, 0.9, 0.5j, -0.7 + 0.1j)


def suite_flatness(tolerance: Optional[float] = None, **_) -> SuiteResult:
    """Single kernels: ``dN_f/dalpha`` vanishes identically."""
    tol = 1e-10 if tolerance is None else tolerance
    errs = [abs(derivative_report(KernelCombo(a, [w], [1.0])).dN_dalpha)
            for a in FLATNESS_ALPHAS for w in FLATNESS_POINTS]
    return SuiteResult("flatness", max(errs) <= tol, max(errs), tol, len(errs))


RADIAL_ALPHAS = (1.25, 1.5, 2.0, 3.5, 5.0)


def suite_radial_moments(tolerance: Optional[float] = None,
                         config: QuadratureConfig = DEFAULT_CONFIG, **_) -> SuiteResult:
    """``int (1-|z|^2)^(alpha-2) dm/pi`` and its log moment."""
    tol = 1e-8 if tolerance is None else tolerance
    errs = []
    for a in RADIAL_ALPHAS:
        m0 = weighted_disc_integral(lambda z: np.ones(z.shape), a - 2, config)
        m1 = weighted_disc_integral(None, a - 2, config,
                                    g_log=lambda z: np.ones(z.shape))
        errs.append(_rel(m0, 1.0 / (a - 1)))
        errs.append(_rel(m1, -1.0 / (a - 1) ** 2))
    return SuiteResult("radial_moments", max(errs) <= tol, max(errs), tol, len(errs))


def suite_oracle_equivalence(tolerance: Optional[float] = None, samples: int = 50,
                             seed: int = 0,
                             config: QuadratureConfig = DEFAULT_CONFIG, **_) -> SuiteResult:
    """Closed-form ``I_f``, ``II``, ``III`` and ``N`` against quadrature."""
    tol_i, tol_parts, tol_n = (1e-6, 1e-8, 1e-8) if tolerance is None else (tolerance,) * 3
    rng = np.random.default_rng([seed, 3])
    e_i = e_parts = e_n = 0.0
    for _ in range(samples):
        combo = random_zero_free_combo(rng, float(rng.uniform(1.2, 4.0)))
        i_q = I_f_quad(combo, config)
        ii_q = II_quad(combo, config, check=False)
        iii_q = III_quad(combo, config)
        n_q = bergman_norm_sq_quad(combo, config)
        e_i = max(e_i, _rel(closed_I_f(combo), i_q))
        e_parts = max(e_parts, abs(i_q - ii_q - iii_q) / (1 + abs(i_q)),
                      _rel(closed_II(combo), ii_q, 1.0),
                      _rel(closed_III(combo), iii_q, 1.0))
        e_n = max(e_n, _rel(n_q, quadratic_form(combo)))
    passed = e_i <= tol_i and e_parts <= tol_parts and e_n <= tol_n
    return SuiteResult("oracle_equivalence", passed, max(e_i / tol_i, e_parts / tol_parts,
                                                          e_n / tol_n) * tol_i,
                       tol_i, samples,
                       details={"I_f_rel": e_i, "II_III_rel": e_parts, "N_rel": e_n,
                                "tolerances": [tol_i, tol_parts, tol_n]})


def finite_difference_errors(combo: KernelCombo, h: float = 1e-3,
                             config: QuadratureConfig = DEFAULT_CONFIG) -> tuple[float, float]:
    """Relative errors of ``dN_dalpha`` and ``dNpow_dalpha`` vs central differences.

    ``N^{2 alpha}`` is ``bergman_power_norm``; ``N_f`` is its ``1/(2 alpha)``
    power.  ``dN_dalpha`` is measured relative to ``max(|dN|, 1e-3 N_f)``: the
    truncation error of the difference quotient scales with ``N_f``, and a
    derivative that is nearly zero cannot be resolved more finely than that.
    """
    a = combo.alpha
    rep = derivative_report(combo)
    p_plus = bergman_power_norm(combo, a + h, config)
    p_minus = bergman_power_norm(combo, a - h, config)
    fd_pow = (p_plus - p_minus) / (2 * h)
    fd_n = (p_plus ** (1 / (2 * (a + h))) - p_minus ** (1 / (2 * (a - h)))) / (2 * h)
    e_pow = _rel(fd_pow, rep.dNpow_dalpha)
    e_n = abs(fd_n - rep.dN_dalpha) / max(abs(rep.dN_dalpha), 1e-3 * rep.n_f)
    return e_n, e_pow


def suite_gradient(tolerance: Optional[float] = None, samples: int = 20, seed: int = 0,
                   config: QuadratureConfig = DEFAULT_CONFIG, **_) -> SuiteResult:
    tol = 1e-4 if tolerance is None else tolerance
    rng = np.random.default_rng([seed, 4])
    worst = 0.0
    for _ in range(samples):
        combo = random_zero_free_combo(rng, float(rng.uniform(1.3, 4.0)),
                                       complex_coeffs=True)
        worst = max(worst, *finite_difference_errors(combo, config=config))
    return SuiteResult("gradient", worst <= tol, worst, tol, samples)


def suite_mobius(tolerance: Optional[float] = None, samples: int = 200, seed: int = 0,
                 **_) -> SuiteResult:
    tol = 1e-8 if tolerance is None else tolerance
    rng = np.random.default_rng([seed, 8])
    worst = 0.0
    done = 0
    while done < samples:
        k = int(rng.integers(2, 6))
        w = np.sort(rng.uniform(-0.9, 0.9, k))
        c = rng.uniform(-2, 2, k) + 1j * rng.uniform(-2, 2, k) * (rng.random() < 0.5)
        combo = KernelCombo(float(rng.uniform(0.2, 5.0)), w, c)
        try:
            d0 = d_alpha(combo)
        except ArithmeticError:
            continue
        except ValueError:
            continue
        d1 = d_alpha(mobius_reduce(combo))
        worst = max(worst, abs(d0 - d1) / (1 + abs(d0)))
        done += 1
    return SuiteResult("mobius", worst <= tol, worst, tol, samples)


def suite_hadamard(tolerance: Optional[float] = None, samples: int = 200, seed: int = 0,
                   **_) -> SuiteResult:
    """``c (W o B) c^* = D_alpha`` on branch-valid instances."""
    tol = 1e-10 if tolerance is None else tolerance
    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    for _ in range(samples):
        combo = random_zero_free_combo(rng, float(rng.uniform(0.5, 5.0)),
                                       k_max=4, complex_coeffs=True)
        d = d_alpha_lambda(combo)
        worst = max(worst, abs(hadamard_form(combo, b_matrix(combo)) - d) / (1 + abs(d)))
    return SuiteResult("hadamard", worst <= tol, worst, tol, samples)


def suite_series_identity(tolerance: Optional[float] = None, samples: int = 20,
                          seed: int = 0, **_) -> SuiteResult:
    tol = 1e-10 if tolerance is None else tolerance
    rng = np.random.default_rng([seed, 10])
    worst = 0.0
    cases = 0
    for alpha in (2, 3):
        for _ in range(samples):
            deg = int(rng.integers(1, 5))
            a = np.concatenate([[1.0], 0.5 * (rng.normal(size=deg)
                                              + 1j * rng.normal(size=deg))])
            f = PolySeries(a)
            worst = max(worst, abs(lhs_difference(f, alpha) - rhs_sum(f, alpha, alpha * deg)))
            cases += 1
    hand = PolySeries([1.0, 0.5])
    hand_err = max(abs(lhs_difference(hand, 2) - 1 / 24), abs(rhs_sum(hand, 2, 2) - 1 / 24))
    passed = worst <= tol and hand_err <= min(tol, 1e-14)
    return SuiteResult("series_identity", passed, max(worst, hand_err), tol, cases + 1,
                       details={"random_max": worst, "hand_case": hand_err})


def suite_counterexample(tolerance: Optional[float] = None, **_) -> SuiteResult:
    """Indefinite-B instance: ``-B`` indefinite while ``D`` stays negative."""
    tol = 1e-5 if tolerance is None else tolerance
    combo = remark_instance(2.0)
    eig = np.linalg.eigvalsh(-b_matrix(combo).entries)
    d = d_alpha_lambda(combo)
    err = abs(d - (-1.163e-3))
    passed = eig[0] <= -1e-4 and err <= tol and d <= 0
    return SuiteResult("counterexample", bool(passed), err, tol, 1,
                       details={"min_eig_minus_B": float(eig[0]), "d_alpha": d})


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "flatness": suite_flatness,
    "radial_moments": suite_radial_moments,
    "oracle_equivalence": suite_oracle_equivalence,
    "gradient": suite_gradient,
    "mobius": suite_mobius,
    "hadamard": suite_hadamard,
    "series_identity": suite_series_identity,
    "counterexample": suite_counterexample,
}


def run_suite(name: str, **options) -> SuiteResult:
    start = time.perf_counter()
    result = SUITES[name](**options)
    result.seconds = time.perf_counter() - start
    return result
