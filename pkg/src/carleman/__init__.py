"""Derivatives of weighted Bergman norms along kernel combinations.

Closed forms for ``dN_f/dalpha`` on finite combinations of reproducing
kernels ``(1 - conj(w) z)^(-alpha)``, an independent quadrature oracle,
monotone homotopy paths, the integer-exponent series identity and a
scanning/sweeping command-line front end.
"""

from .errors import (BranchError, CarlemanError, ClassError, DegenerateError,
                     DomainError, InconclusiveError, NonConvergenceError,
                     SingularGramError, ZeroOnSegmentError)
from .gram import (GramMatrix, KernelCombo, build_gram, eval_vector, gram_of,
                   projection_norm_sq, quadratic_form, solve_coefficients)
from .derivative import (BMatrix, ClassTag, DerivativeReport, augment, b_matrix,
                         branch_ok, classify, d_alpha, d_alpha_gamma,
                         d_alpha_lambda, d_hat_alpha, d_tilde, derivative_report,
                         hadamard_form, jensen_bound, question7_value)
from .homotopy import (NormalizedTwoKernel, PathTrace, mobius_reduce,
                       normalize_two_kernel, path_A, path_B, two_kernel_norm_path)
from .quadrature import QuadratureConfig, weighted_disc_integral
from .series import PolySeries, compositions, lhs_difference, rhs_sum

__version__ = "0.1.0"
