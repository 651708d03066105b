"""Monotone interpolation paths and instance normalizations.

* ``path_A``: deform the exponent ``t`` from 0 to ``alpha`` in the Gram
  matrix of an instance whose first node is 0; the trace is nonincreasing
  when ``c_2, ..., c_k`` are real of one sign, starting from ``D_0 = 0``.
* ``path_B``: for two nodes, slide ``a_11`` to ``a_12^2 / a_22`` (a rank-one
  Gram matrix); the trace is nondecreasing and ends at 0.
* ``two_kernel_norm_path``: projection norms ``N_beta`` of ``F^beta`` for a
  two-kernel ``F^alpha``, nonincreasing on ``[1, alpha]``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .derivative import _d_tilde_core, branch_ok, d_hat_alpha
from .errors import BranchError, DomainError, ZeroOnSegmentError
from .gram import KernelCombo, build_gram, eval_vector, projection_norm_sq
from .kernel_core import as_disc_point

PATH_A = "PathA"
PATH_B = "PathB"
NORM_PATH = "NormPath"

DEFAULT_SAMPLES = 201


@dataclass(frozen=True)
class PathTrace:
    parameter_grid: np.ndarray
    values: np.ndarray
    kind: str
    monotone_nonincreasing: bool
    monotone_nondecreasing: bool
    slack: float

    @property
    def endpoint_values(self) -> tuple[float, float]:
        return float(self.values[0]), float(self.values[-1])


def _default_slack(values: np.ndarray) -> float:
    return 1e-9 * (1.0 + float(np.max(np.abs(values))))


def make_trace(grid, values, kind: str, slack: float | None = None) -> PathTrace:
    grid = np.asarray(grid, dtype=float)
    values = np.asarray(values, dtype=float)
    if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
        raise DomainError("parameter grid must be strictly increasing")
    if not np.all(np.isfinite(values)):
        raise ArithmeticError("path values must be finite")
    if slack is None:
        slack = _default_slack(values)
    steps = np.diff(values)
    return PathTrace(grid, values, kind,
                     bool(np.all(steps <= slack)),
                     bool(np.all(steps >= -slack)),
                     float(slack))


def refine_until_stable(evaluate: Callable[[np.ndarray], PathTrace],
                        lo: float, hi: float, samples: int = DEFAULT_SAMPLES,
                        max_doublings: int = 4) -> PathTrace:
    """Double the grid until the monotonicity verdict repeats across two refinements."""
    verdicts = []
    trace = None
    n = samples
    for _ in range(max_doublings + 1):
        trace = evaluate(np.linspace(lo, hi, n))
        verdicts.append((trace.monotone_nonincreasing, trace.monotone_nondecreasing))
        if len(verdicts) >= 3 and verdicts[-1] == verdicts[-2] == verdicts[-3]:
            break
        n = 2 * n - 1
    return trace


# ---------------------------------------------------------------------------
# Moebius reduction
# ---------------------------------------------------------------------------

def _sorted_real(combo: KernelCombo) -> np.ndarray:
    if not combo.real_nodes:
        raise DomainError("nodes must be real")
    w = combo.points.real
    if np.any(np.diff(w) < 0):
        raise DomainError("nodes must be sorted ascending")
    return w


def mobius_reduce(combo: KernelCombo) -> KernelCombo:
    """Move the first node to 0: ``z_i = -phi_{w_1}(w_i)``, rescaled coefficients.

    ``d_i = c_i (1 + z_i w_1)^alpha / (1 - w_1^2)^(alpha/2)
    = c_i (1 - w_1^2)^(alpha/2) / (1 - w_1 w_i)^alpha``, which is the image
    of ``F`` under the unitary ``F -> (F o phi_{w_1})(-z) k_{w_1}(-z)`` of
    ``A_alpha^2``.  ``D_alpha`` is unchanged; node values are rescaled by
    positive factors, so branches are preserved.
    """
    w = _sorted_real(combo)
    a = combo.alpha
    w1 = w[0]
    z = (w - w1) / (1.0 - w1 * w)
    z[0] = 0.0
    d = combo.coeffs * (1.0 + z * w1) ** a / (1.0 - w1 * w1) ** (a / 2)
    return KernelCombo(a, z, d)


# ---------------------------------------------------------------------------
# Path A: exponent homotopy
# ---------------------------------------------------------------------------

def _path_a_setup(combo: KernelCombo):
    w = _sorted_real(combo)
    if w[0] != 0.0:
        raise DomainError("path A needs w_1 = 0; apply mobius_reduce first")
    c = combo.coeffs
    # D is invariant under c -> conj(c) for real nodes; this puts every
    # f_{i,t} in the closed upper half-plane (their imaginary part is Im c_1)
    if c[0].imag < 0:
        c = np.conj(c)
    return w, c


def path_a_value(combo: KernelCombo, t: float) -> float:
    """``D_t`` for the Gram exponent ``t`` in ``[0, alpha]``."""
    w, c = _path_a_setup(combo)
    return _path_a_eval(w, c, t)


def _path_a_eval(w, c, t):
    L = np.log(1.0 - np.outer(w, w))
    A = np.exp(-t * L)
    return _d_tilde_core(c, A.astype(complex), -t * L.astype(complex), mode="upper")


def path_A(combo: KernelCombo, t_grid: Sequence[float] | None = None,
           slack: float | None = None) -> PathTrace:
    w, c = _path_a_setup(combo)
    if t_grid is None:
        t_grid = np.linspace(0.0, combo.alpha, DEFAULT_SAMPLES)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(t_grid > combo.alpha):
        raise DomainError("t grid must lie in [0, alpha]")
    vals = [_path_a_eval(w, c, t) for t in t_grid]
    return make_trace(t_grid, vals, PATH_A, slack)


# ---------------------------------------------------------------------------
# Path B: rank-one interpolation of a_11 (two nodes)
# ---------------------------------------------------------------------------

def _path_b_setup(combo: KernelCombo):
    if combo.k != 2:
        raise DomainError("path B is defined for two nodes")
    if not combo.real_nodes:
        raise DomainError("path B needs real nodes")
    f = eval_vector(combo)
    if not (branch_ok(f) or combo.real_coeffs):
        raise DomainError("instance is in neither Lambda nor Gamma")
    w = combo.points.real
    W = (1.0 - np.outer(w, w)) ** (-combo.alpha)
    W = np.triu(W) + np.triu(W, 1).T
    mode = "principal" if branch_ok(f) else "upper"
    return W, combo.coeffs, mode


def _path_b_eval(W, c, mode, t):
    A = W.copy()
    A[0, 0] = (1 - t) * W[0, 0] + t * W[0, 1] ** 2 / W[1, 1]
    return _d_tilde_core(c, A.astype(complex), np.log(A).astype(complex), mode)


def path_b_value(combo: KernelCombo, t: float) -> float:
    W, c, mode = _path_b_setup(combo)
    return _path_b_eval(W, c, mode, t)


def path_B(combo: KernelCombo, t_grid: Sequence[float] | None = None,
           slack: float | None = None) -> PathTrace:
    W, c, mode = _path_b_setup(combo)
    if t_grid is None:
        t_grid = np.linspace(0.0, 1.0, DEFAULT_SAMPLES)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(t_grid > 1):
        raise DomainError("t grid must lie in [0, 1]")
    vals = [_path_b_eval(W, c, mode, t) for t in t_grid]
    return make_trace(t_grid, vals, PATH_B, slack)


# ---------------------------------------------------------------------------
# Two-kernel norm path
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormalizedTwoKernel:
    """``F^alpha`` rewritten as ``a + b K_{w',alpha}`` with ``w' >= 0``.

    ``combo`` has nodes ``(0, w')`` (a single node 0 when ``w' = 0``) and its
    node values lie in the right half-plane.  ``theta`` is the rotation
    making ``e^{i theta} phi_{w_1}(w_2) >= 0``; ``theta1`` is the argument
    divided out of ``F^alpha`` to bring its segment image into H.  None of the
    three steps changes the projection norms along the path.
    """

    combo: KernelCombo
    theta: float
    theta1: float


def _segment_hits_zero(a: complex, b: complex, smax: float) -> bool:
    """Does ``{a + b s : 1 <= s <= smax}`` contain 0?"""
    if b == 0:
        return a == 0
    s = -a / b
    return abs(s.imag) <= 1e-14 * abs(s) and 1 - 1e-14 <= s.real <= smax * (1 + 1e-14)


def normalize_two_kernel(combo: KernelCombo) -> NormalizedTwoKernel:
    if combo.k != 2:
        raise DomainError("normalize_two_kernel expects two kernels")
    alpha = combo.alpha
    w1, w2 = (complex(p) for p in combo.points)
    c1, c2 = (complex(x) for x in combo.coeffs)
    # G = F o phi_{w1} * k_{w1,1}: constant term plus one kernel
    rho = 1.0 - abs(w1) ** 2
    a = c1 / rho ** (alpha / 2)
    b = c2 * rho ** (alpha / 2) / (1.0 - w2.conjugate() * w1) ** alpha
    wv = (w1 - w2) / (1.0 - w1.conjugate() * w2)
    theta = -cmath.phase(wv) if wv != 0 else 0.0
    wp = abs(wv)
    as_disc_point(wp)
    smax = (1.0 - wp * wp) ** (-alpha)
    if _segment_hits_zero(a, b, smax):
        raise ZeroOnSegmentError("F^alpha vanishes on the segment image")
    p, q = a + b, a + b * smax
    th_a = cmath.phase(p)
    th_b = th_a + cmath.phase(q / p)
    theta1 = 0.5 * (th_a + th_b)
    rot = cmath.exp(-1j * theta1)
    if wp == 0.0:
        out = KernelCombo(alpha, [0.0], [rot * (a + b)])
    else:
        out = KernelCombo(alpha, [0.0, wp], [rot * a, rot * b])
    if not branch_ok(eval_vector(out)):
        raise BranchError("normalized node values left the right half-plane")
    return NormalizedTwoKernel(out, theta, theta1)


def norm_path_value(normalized: NormalizedTwoKernel, beta: float) -> float:
    """``N_beta = (F^beta(w) W_beta^{-1} F^beta(w)^*)^(1/beta)``."""
    combo = normalized.combo
    fa = eval_vector(combo)
    fb = np.exp((beta / combo.alpha) * np.log(fa))
    gram = build_gram(combo.points, beta)
    return projection_norm_sq(fb, gram) ** (1.0 / beta)


def norm_path_slope(normalized: NormalizedTwoKernel, beta: float) -> float:
    """``(1/beta^2) N_beta^(1-beta) D^_beta(F^beta(w), w)``."""
    combo = normalized.combo
    fa = eval_vector(combo)
    fb = np.exp((beta / combo.alpha) * np.log(fa))
    nb = norm_path_value(normalized, beta)
    return nb ** (1 - beta) * d_hat_alpha(fb, combo.points, beta) / beta ** 2


def two_kernel_norm_path(normalized: NormalizedTwoKernel,
                         beta_grid: Sequence[float] | None = None,
                         slack: float | None = None) -> PathTrace:
    alpha = normalized.combo.alpha
    if beta_grid is None:
        beta_grid = np.linspace(1.0, alpha, DEFAULT_SAMPLES)
    beta_grid = np.asarray(beta_grid, dtype=float)
    if np.any(beta_grid < 1) or np.any(beta_grid > alpha):
        raise DomainError("beta grid must lie in [1, alpha]")
    vals = [norm_path_value(normalized, b) for b in beta_grid]
    return make_trace(beta_grid, vals, NORM_PATH, slack)
