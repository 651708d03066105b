"""Seeded random scans of the sign of ``D`` over instance families.

Each sample ``i`` draws from its own generator ``default_rng([seed, i])``, so
results do not depend on the order (or the process) in which samples are
evaluated.  Targets:

``Theorem31``   nonnegative ``c``, real ``w`` (proved: ``D <= 0``)
``Theorem32``   real ``w``, ``c_2..c_k`` real of one sign, ``c_1`` complex, branch-valid
``Theorem34``   ``k = 2`` in ``Lambda`` or ``Gamma``
``Conjecture4`` ``Lambda_alpha``: real ``w``, complex ``c`` with ``f = cW`` in H^k
``Conjecture6`` ``f`` drawn directly from H^k, real ``w``, ``D^_alpha(f, w)``
``Question7``   low-rank PSD ``A`` with ``Re a_ij >= 0`` and ``cA = 0``
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .derivative import (branch_ok, d_alpha_gamma, d_alpha_lambda, d_hat_alpha,
                         question7_value)
from .errors import CarlemanError, DomainError
from .gram import (KernelCombo, build_gram, eval_vector, projection_norm_sq,
                   quadratic_form, solve_coefficients)

TARGETS = ("Conjecture4", "Conjecture6", "Question7",
           "Theorem31", "Theorem32", "Theorem34")
NODE_DISTRIBUTIONS = ("uniform_real", "uniform_disc")
COEFF_KINDS = ("complex_ball", "nonneg", "real")

#: Values above this count as positive (i.e. as a violation of ``D <= 0``).
POSITIVE_TOL = 1e-10

#: Rejection-sampling budget per sample for class-constrained targets.
MAX_REJECTIONS = 10_000

#: Number of largest values kept in a scan result.
TOP_ROWS = 100

_DEFAULT_COEFFS = {
    "Theorem31": ("nonneg", 2.0),
    "Theorem32": ("real", 2.0),
    "Theorem34": ("complex_ball", 2.0),
    "Conjecture4": ("complex_ball", 2.0),
    "Conjecture6": ("complex_ball", 2.0),
    "Question7": ("complex_ball", 1.0),
}


@dataclass(frozen=True)
class ScanSpec:
    target: str
    samples: int = 1000
    k_range: tuple[int, int] = (1, 5)
    alpha_range: tuple[float, float] = (0.1, 6.0)
    seed: int = 0
    node_distribution: str = "uniform_real"
    node_radius: float = 0.9
    coeff_distribution: Optional[str] = None
    coeff_radius: Optional[float] = None

    def __post_init__(self):
        if self.target not in TARGETS:
            raise DomainError(f"unknown target {self.target!r}; choose from {TARGETS}")
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        klo, khi = (int(v) for v in self.k_range)
        if not 1 <= klo <= khi:
            raise DomainError(f"bad k range {self.k_range}")
        alo, ahi = (float(v) for v in self.alpha_range)
        if not 0 < alo <= ahi:
            raise DomainError(f"bad alpha range {self.alpha_range}")
        if self.node_distribution not in NODE_DISTRIBUTIONS:
            raise DomainError(f"unknown node distribution {self.node_distribution!r}")
        if not 0 < self.node_radius < 1:
            raise DomainError("node_radius must lie in (0, 1)")
        kind, radius = _DEFAULT_COEFFS[self.target]
        if self.coeff_distribution is None:
            object.__setattr__(self, "coeff_distribution", kind)
        if self.coeff_radius is None:
            object.__setattr__(self, "coeff_radius", radius)
        if self.coeff_distribution not in COEFF_KINDS:
            raise DomainError(f"unknown coefficient distribution {self.coeff_distribution!r}")
        if not self.coeff_radius > 0:
            raise DomainError("coeff_radius must be positive")
        object.__setattr__(self, "k_range", (klo, khi))
        object.__setattr__(self, "alpha_range", (alo, ahi))
        self._check_compatible()

    def _check_compatible(self):
        t, nd, cd = self.target, self.node_distribution, self.coeff_distribution
        if t != "Question7" and nd != "uniform_real":
            raise DomainError(f"{t} needs real nodes (uniform_real)")
        if t == "Theorem31" and cd != "nonneg":
            raise DomainError("Theorem31 needs nonnegative coefficients")
        if t == "Theorem32" and cd == "complex_ball":
            raise DomainError("Theorem32 needs real c_2..c_k (nonneg or real)")
        if t == "Theorem34" and self.k_range != (2, 2):
            object.__setattr__(self, "k_range", (2, 2))
        if t == "Question7":
            if self.k_range[1] < 2:
                raise DomainError("Question7 needs k >= 2 for a nontrivial null space")
            object.__setattr__(self, "k_range", (max(2, self.k_range[0]), self.k_range[1]))


@dataclass(frozen=True)
class ScanRecord:
    """One evaluated sample; ``d``/``n`` are ``None`` when evaluation failed."""

    index: int
    alpha: float
    k: int
    d: Optional[float]
    n: Optional[float]
    branch_ok: bool
    flags: str
    c: tuple
    w: tuple
    tol: float = POSITIVE_TOL

    @property
    def positive(self) -> bool:
        return self.d is not None and self.d > self.tol


@dataclass
class ScanResult:
    spec: ScanSpec
    records: list[ScanRecord]
    rejections: int = 0
    failures: int = field(init=False)
    positive: list[ScanRecord] = field(init=False)

    def __post_init__(self):
        self.failures = sum(r.d is None for r in self.records)
        self.positive = [r for r in self.records if r.positive]

    @property
    def positive_count(self) -> int:
        return len(self.positive)

    @property
    def max_d(self) -> Optional[float]:
        vals = [r.d for r in self.records if r.d is not None]
        return max(vals) if vals else None

    def top(self, n: int = TOP_ROWS) -> list[ScanRecord]:
        valid = [r for r in self.records if r.d is not None]
        return sorted(valid, key=lambda r: (-r.d, r.index))[:n]

    def summary(self) -> dict:
        return {
            "target": self.spec.target,
            "samples": self.spec.samples,
            "seed": self.spec.seed,
            "positive_count": self.positive_count,
            "failed_evaluations": self.failures,
            "rejections": self.rejections,
            "max_d": self.max_d,
        }


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _ball(rng, radius, size):
    """Uniform samples from the complex disc of the given radius."""
    r = radius * np.sqrt(rng.random(size))
    return r * np.exp(2j * np.pi * rng.random(size))


def _coeffs(rng, kind, radius, k):
    if kind == "complex_ball":
        return _ball(rng, radius, k)
    if kind == "nonneg":
        return radius * rng.random(k) + 0j
    return radius * rng.uniform(-1, 1, k) + 0j


def _real_nodes(rng, radius, k):
    return np.sort(rng.uniform(-radius, radius, k))


def _draw(spec: ScanSpec, index: int):
    """Sample ``index``: returns ``(alpha, c, w, extra, rejections)``."""
    rng = np.random.default_rng([spec.seed, index])
    alpha = float(rng.uniform(*spec.alpha_range))
    k = int(rng.integers(spec.k_range[0], spec.k_range[1] + 1))
    kind, rad = spec.coeff_distribution, spec.coeff_radius
    t = spec.target
    if t == "Theorem31":
        return alpha, _coeffs(rng, "nonneg", rad, k), _real_nodes(rng, spec.node_radius, k), None, 0
    if t == "Question7":
        return (alpha, *_draw_question7(rng, k, rad), 0)
    if t == "Conjecture6":
        w = _real_nodes(rng, spec.node_radius, k)
        f = rad * rng.random(k) + 1j * rad * rng.uniform(-1, 1, k)
        return alpha, None, w, f, 0
    # class-constrained targets: rejection until f = cW lies in H^k
    gamma = t == "Theorem34" and rng.random() < 0.5
    for attempt in range(MAX_REJECTIONS):
        w = _real_nodes(rng, spec.node_radius, k)
        if t == "Theorem32":
            c = _coeffs(rng, kind, rad, k)
            c[1:] = np.abs(c[1:]) * (1 if rng.random() < 0.5 else -1)
            c[0] = _ball(rng, rad, 1)[0]
        elif gamma:
            c = _coeffs(rng, "real", rad, k)
            return alpha, c, w, "gamma", attempt
        else:
            c = _coeffs(rng, kind, rad, k)
        f = c @ ((1.0 - np.outer(w, w)) ** (-alpha))
        if branch_ok(f):
            return alpha, c, w, "lambda", attempt
    return alpha, None, None, None, MAX_REJECTIONS


def _draw_question7(rng, k, radius):
    """PSD ``A = V V^*`` of rank ``< k`` with ``|arg v| < pi/4`` and ``c`` in its kernel."""
    r = int(rng.integers(1, k))
    mod = rng.uniform(0.1, 1.0, (k, r))
    V = mod * np.exp(1j * rng.uniform(-np.pi / 4, np.pi / 4, (k, r)))
    A = V @ V.conj().T
    A = 0.5 * (A + A.conj().T)
    # cA = 0  <=>  A^T c^T = 0
    basis = scipy.linalg.null_space(A.T, rcond=1e-10)
    coef = _ball(rng, radius, basis.shape[1])
    c = basis @ coef
    return c, None, A


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _rounding_tol(c, A) -> float:
    """Positivity threshold: ``POSITIVE_TOL`` or the rounding level of ``D``.

    ``D`` is a sum of terms of size ``|c_i||c_j||a_ij|(1 + |Log a_ij| + ...)``;
    when those are large, an absolute 1e-10 is below double-precision noise.
    """
    mag = np.abs(c)[:, None] * np.abs(A) * np.abs(c)[None, :]
    with np.errstate(divide="ignore"):
        logs = np.abs(np.log(np.where(np.abs(A) > 0, np.abs(A), 1.0)))
    scale = float(np.sum(mag * (1.0 + logs)))
    scale *= 1.0 + abs(math.log(max(float(np.sum(mag)), 1e-300)))
    return max(POSITIVE_TOL, 64 * np.finfo(float).eps * scale)


def _tup(x):
    return tuple(complex(v) for v in np.ravel(x)) if x is not None else ()


def evaluate_sample(spec: ScanSpec, index: int) -> tuple[ScanRecord, int]:
    alpha, c, w, extra, rejected = _draw(spec, index)
    t = spec.target
    if t == "Question7":
        A = extra
        k = len(c)
        try:
            d = question7_value(c, A)
            n = max(float(np.real(c @ A @ np.conj(c))), 0.0)
            return ScanRecord(index, alpha, k, d, n, True, "", _tup(c),
                              _tup(A), _rounding_tol(c, A)), 0
        except (CarlemanError, ArithmeticError) as exc:
            return ScanRecord(index, alpha, k, None, None, False,
                              type(exc).__name__, _tup(c), _tup(A)), 0
    if t == "Conjecture6":
        f = extra
        k = len(f)
        try:
            gram = build_gram(w, alpha)
            d = d_hat_alpha(f, w, alpha)
            n = projection_norm_sq(f, gram)
            cc = solve_coefficients(f, gram)
            return ScanRecord(index, alpha, k, d, n, True, "", _tup(cc), _tup(w),
                              _rounding_tol(cc, gram.entries)), 0
        except (CarlemanError, ArithmeticError) as exc:
            return ScanRecord(index, alpha, k, None, None, branch_ok(f),
                              type(exc).__name__, _tup(f), _tup(w)), 0
    if c is None:
        k = spec.k_range[0]
        return ScanRecord(index, alpha, k, None, None, False, "rejection_budget",
                          (), ()), rejected
    combo = KernelCombo(alpha, w, c)
    ok = branch_ok(eval_vector(combo))
    try:
        if ok and extra != "gamma":
            d = d_alpha_lambda(combo)
            flag = ""
        else:
            d = d_alpha_gamma(combo)
            flag = "gamma"
        n = quadratic_form(combo)
        A = build_gram(w, alpha).entries
        return ScanRecord(index, alpha, combo.k, d, n, ok, flag, _tup(c), _tup(w),
                          _rounding_tol(combo.coeffs, A)), rejected
    except (CarlemanError, ArithmeticError) as exc:
        return ScanRecord(index, alpha, combo.k, None, None, ok,
                          type(exc).__name__, _tup(c), _tup(w)), rejected


def _chunk(args):
    spec, lo, hi = args
    return [evaluate_sample(spec, i) for i in range(lo, hi)]


def run_scan(spec: ScanSpec, jobs: int = 1) -> ScanResult:
    """Evaluate all samples; output order is by sample index for any ``jobs``."""
    n = spec.samples
    if jobs <= 1:
        out = [evaluate_sample(spec, i) for i in range(n)]
    else:
        size = max(1, -(-n // (4 * jobs)))
        chunks = [(spec, lo, min(lo + size, n)) for lo in range(0, n, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            out = [pair for part in pool.map(_chunk, chunks) for pair in part]
    records = [r for r, _ in out]
    return ScanResult(spec, records, rejections=sum(rej for _, rej in out))
