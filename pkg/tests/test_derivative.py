import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carleman.derivative import (augment, b_matrix, branch_ok, classify, d_alpha,
                                 d_alpha_gamma, d_alpha_lambda, d_hat_alpha, d_tilde,
                                 derivative_report, hadamard_form, jensen_bound,
                                 question7_value)
from carleman.errors import BranchError, ClassError, DomainError
from carleman.gram import KernelCombo, eval_vector, gram_of
from carleman.suites import random_zero_free_combo, remark_instance


def mp_d_alpha(alpha, w, c, dps=50):
    """Independent high-precision evaluation of D (principal logs)."""
    with mp.workdps(dps):
        a = mp.mpf(alpha)
        w = [mp.mpc(x) for x in w]
        c = [mp.mpc(x) for x in c]
        k = len(w)
        A = [[(1 - mp.conj(w[i]) * w[j]) ** (-a) for j in range(k)] for i in range(k)]
        f = [sum(c[i] * A[i][j] for i in range(k)) for j in range(k)]
        N = mp.re(sum(c[i] * mp.conj(c[j]) * A[i][j] for i in range(k) for j in range(k)))
        S = 2 * mp.re(sum(c[i] * mp.conj(f[i] * mp.log(f[i])) for i in range(k)))
        T = mp.re(sum(c[i] * mp.conj(c[j]) * A[i][j] * mp.log(1 - mp.conj(w[i]) * w[j])
                      for i in range(k) for j in range(k)))
        return float(S + a * T - N * mp.log(N))


class TestClassify:
    def test_examples(self):
        tag = classify(KernelCombo(2.0, [0.0], [1.0]), 0.5)
        assert tag.kind == "LambdaEps" and tag.branch_ok and tag.epsilon == 0.5
        tag = classify(KernelCombo(2.0, [0.1, 0.2], [1.0, -2.0]))
        assert tag.kind == "Gamma" and not tag.branch_ok
        tag = classify(KernelCombo(2.0, [0.0], [1j]))
        assert tag.kind == "Outside" and not tag.in_gamma

    def test_epsilon_restricts_nodes(self):
        assert classify(KernelCombo(2.0, [0.6], [1.0]), 0.5).kind == "Gamma"

    def test_bad_epsilon(self):
        with pytest.raises(DomainError):
            classify(KernelCombo(2.0, [0.0], [1.0]), 0.0)

    def test_branch_margin(self):
        assert not branch_ok([1e-13 + 1j])
        assert branch_ok([1e-6 - 5j])


class TestDAlpha:
    @settings(max_examples=60, deadline=None)
    @given(st.floats(0.05, 8), st.floats(0, 0.95), st.floats(0, 6.28),
           st.floats(0.1, 3), st.floats(-1.5, 1.5))
    def test_single_kernel_is_flat(self, alpha, r, t, mod, arg):
        combo = KernelCombo(alpha, [r * np.exp(1j * t)], [mod * np.exp(1j * arg)])
        d = d_alpha_lambda(combo)
        n = derivative_report(combo).n_alpha
        assert abs(d) <= 1e-10 * (1 + n * (1 + abs(math.log(n))))

    def test_matches_high_precision_oracle(self, rng):
        for _ in range(30):
            combo = random_zero_free_combo(rng, float(rng.uniform(0.3, 5)), k_max=4,
                                           complex_coeffs=True)
            ref = mp_d_alpha(combo.alpha, combo.points, combo.coeffs)
            assert d_alpha_lambda(combo) == pytest.approx(ref, rel=1e-9, abs=1e-12)

    def test_complex_nodes_oracle(self):
        combo = KernelCombo(2.2, [0.1 + 0.2j, -0.3j], [1.0, 0.2 - 0.1j])
        assert d_alpha_lambda(combo) == pytest.approx(
            mp_d_alpha(2.2, combo.points, combo.coeffs), rel=1e-10)

    def test_remark_instance(self):
        combo = remark_instance(2.0)
        assert combo.points[1].real == pytest.approx(0.21572531, abs=1e-8)
        np.testing.assert_allclose(eval_vector(combo), [2.0, 2.1], rtol=1e-14)
        assert d_alpha_lambda(combo) == pytest.approx(-1.163e-3, abs=1e-5)

    @pytest.mark.parametrize("c", [(1.0, 0.0), (0.0, 2.0 + 1j)])
    def test_thm34_zero_coefficient(self, c):
        assert abs(d_alpha(KernelCombo(2.5, [0.1, 0.6], c))) <= 1e-10

    def test_equal_nodes_gamma(self):
        assert abs(d_alpha_gamma(KernelCombo(3.0, [0.4, 0.4], [1.0, -2.5]))) <= 1e-10

    def test_gamma_with_zero_value(self):
        # f_2 = 0 exactly: c_1 a_12 + c_2 a_22 = 0
        w = [0.0, 0.5]
        a22 = 0.75 ** -2
        combo = KernelCombo(2.0, w, [-a22, 1.0])
        assert eval_vector(combo)[1] == 0
        assert math.isfinite(d_alpha_gamma(combo))

    def test_gamma_lambda_agree_on_positive_values(self, rng):
        for _ in range(50):
            w = np.sort(rng.uniform(-0.9, 0.9, 3))
            c = rng.uniform(0.01, 2, 3)
            combo = KernelCombo(float(rng.uniform(0.2, 5)), w, c)
            assert d_alpha_gamma(combo) == pytest.approx(d_alpha_lambda(combo),
                                                         rel=1e-12, abs=1e-12)

    def test_gamma_requires_real(self):
        with pytest.raises(ClassError):
            d_alpha_gamma(KernelCombo(2.0, [0.1], [1j]))

    def test_lambda_requires_branch(self):
        with pytest.raises(BranchError):
            d_alpha_lambda(KernelCombo(2.0, [0.1, 0.2], [1.0, -3.0]))
        with pytest.raises(BranchError):
            d_alpha(KernelCombo(2.0, [0.1j, 0.2], [1.0, -3.0]))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 5), st.floats(0.01, 6), st.integers(0, 2 ** 32))
    def test_thm31_nonneg_real(self, k, alpha, seed):
        rng = np.random.default_rng(seed)
        combo = KernelCombo(alpha, rng.uniform(-0.9, 0.9, k), rng.uniform(0, 2, k))
        assert d_alpha(combo) <= 1e-10


class TestDHat:
    def test_round_trip(self, rng):
        combo = random_zero_free_combo(rng, 2.5, k_max=3, complex_coeffs=True)
        if combo.k < 2:
            combo = KernelCombo(2.5, [-0.3, 0.4], [1.0, 0.2j])
        assert d_hat_alpha(eval_vector(combo), combo.points, 2.5) == pytest.approx(
            d_alpha_lambda(combo), rel=1e-9, abs=1e-12)

    def test_single_node(self):
        assert abs(d_hat_alpha([2 - 1j], [0.3], 1.7)) <= 1e-12

    def test_real_gamma_round_trip(self, rng):
        w = np.array([-0.5, 0.1, 0.6])
        c = np.array([1.0, -2.0, 0.7])
        combo = KernelCombo(2.0, w, c)
        f = eval_vector(combo).real
        assert d_hat_alpha(f, w, 2.0) == pytest.approx(d_alpha_gamma(combo), rel=1e-9)

    def test_rejects_complex_off_branch(self):
        with pytest.raises(BranchError):
            d_hat_alpha([1.0, -1 + 1j], [0.1, 0.2], 2.0)


class TestDerivativeReport:
    @pytest.mark.parametrize("w", [0.0, 0.3, 0.5j, -0.7 + 0.1j])
    def test_single_kernel_sign_pin(self, w):
        # N^{2 alpha} = (1-|w|^2)^(-alpha): derivative -log(1-|w|^2) (1-|w|^2)^(-alpha)
        alpha = 2.7
        rep = derivative_report(KernelCombo(alpha, [w], [1.0]))
        rho = 1 - abs(w) ** 2
        assert rep.dNpow_dalpha == pytest.approx(-math.log(rho) * rho ** -alpha, abs=1e-12)
        assert abs(rep.dN_dalpha) <= 1e-12

    def test_invariants(self, rng):
        combo = random_zero_free_combo(rng, 3.3, complex_coeffs=True)
        rep = derivative_report(combo)
        a = combo.alpha
        assert rep.n_f ** (2 * a) == pytest.approx(rep.n_alpha, rel=1e-12)
        assert rep.dN_dalpha == pytest.approx(
            rep.n_f ** (1 - 2 * a) * rep.d_alpha / (2 * a * a), rel=1e-12)

    def test_remark_instance_decreasing(self):
        assert derivative_report(remark_instance()).dN_dalpha < 0

    def test_three_positive_kernels(self):
        assert derivative_report(KernelCombo(2.0, [0, 0.3, 0.6], [1, 1, 1])).dN_dalpha <= 0


class TestBMatrix:
    def test_indefinite_instance_entries(self):
        B = b_matrix(remark_instance(2.0)).entries
        expect = np.log([[4 / 4.1, 4.2 / 4.1], [4.2 / 4.1, 4.41 / 4.51]])
        np.testing.assert_allclose(B.real, expect, atol=1e-14)
        np.testing.assert_allclose(B.imag, 0, atol=1e-15)

    def test_minus_b_indefinite(self):
        eig = np.linalg.eigvalsh(-b_matrix(remark_instance(2.0)).entries)
        assert eig[0] == pytest.approx(-5.667e-4, rel=1e-3)
        assert eig[1] > 0

    def test_single_kernel_zero(self):
        assert np.abs(b_matrix(KernelCombo(2.0, [0.4], [1.5])).entries).max() <= 1e-14

    def test_hadamard_identity(self, rng):
        for _ in range(50):
            combo = random_zero_free_combo(rng, float(rng.uniform(0.3, 5)), k_max=4,
                                           complex_coeffs=True)
            d = d_alpha_lambda(combo)
            assert abs(hadamard_form(combo, b_matrix(combo)) - d) <= 1e-10 * (1 + abs(d))

    def test_hermitian(self):
        B = b_matrix(KernelCombo(2.0, [0.1 + 0.1j, -0.4], [1.0, 0.3j])).entries
        np.testing.assert_allclose(B, B.conj().T, atol=1e-14)


class TestDTilde:
    def test_equals_d_alpha_for_gram(self, rng):
        combo = random_zero_free_combo(rng, 2.0, k_max=3, complex_coeffs=True)
        assert d_tilde(combo.coeffs, gram_of(combo).entries) == pytest.approx(
            d_alpha_lambda(combo), rel=1e-12, abs=1e-12)

    def test_rank_one_is_zero(self):
        v = np.array([1.0, 0.8 + 0.3j, 1.2 - 0.2j])
        A = np.outer(v, v.conj())
        c = np.array([0.5, 0.2, 0.1 + 0.1j])
        assert abs(d_tilde(c, A)) <= 1e-12

    def test_augment_hand_case(self):
        ct, At = augment([1.0], [[1.0]])
        np.testing.assert_array_equal(At, [[1, 1], [1, 1]])
        np.testing.assert_array_equal(ct, [-1, 1])
        np.testing.assert_array_equal(ct @ At, [0, 0])

    def test_augment_properties(self, rng):
        for _ in range(100):
            combo = random_zero_free_combo(rng, float(rng.uniform(0.3, 4)), k_max=3,
                                           complex_coeffs=True)
            c, A = combo.coeffs, gram_of(combo).entries
            ct, At = augment(c, A)
            assert np.linalg.eigvalsh(At)[0] >= -1e-10 * np.abs(At).max()
            np.testing.assert_allclose(ct @ At, 0, atol=1e-10 * np.abs(At).max())
            d1 = d_tilde(c, A)
            assert d_tilde(ct, At) == pytest.approx(d1, abs=1e-10 * (1 + abs(d1)))
            assert question7_value(ct, At) == pytest.approx(d1, abs=1e-10 * (1 + abs(d1)))


class TestQuestion7:
    def test_all_ones(self):
        assert question7_value([1, -1], np.ones((2, 2))) == 0

    def test_integer_instance_is_positive(self):
        # A = V V^T is PSD with positive entries and cA = 0, yet the value is > 0
        V = np.array([[3, 1], [1, 3], [3, 2], [2, 3]], dtype=float)
        A = V @ V.T
        c = np.array([1.0, -1.0, -2.0, 2.0])
        np.testing.assert_array_equal(c @ A, 0)
        with mp.workdps(40):
            ref = -sum(c[i] * c[j] * A[i, j] * mp.log(A[i, j])
                       for i in range(4) for j in range(4))
        assert question7_value(c, A) == pytest.approx(float(ref), rel=1e-12)
        assert float(ref) == pytest.approx(0.0603314125527679, rel=1e-13)


class TestJensen:
    def test_zero_vector(self):
        assert jensen_bound([0, 0], KernelCombo(2.0, [0.1, 0.5], [1, 2])) == 0

    def test_single_kernel(self):
        assert abs(jensen_bound([1.0], KernelCombo(2.0, [0.3], [2.0]))) <= 1e-14

    def test_vanishing_value(self):
        combo = KernelCombo(2.0, [0.0, 0.5], [-(0.75 ** -2), 1.0])
        assert jensen_bound([0.0, 1.0], combo) == -math.inf

    def test_rejects_complex_entries(self):
        with pytest.raises(DomainError):
            jensen_bound([1.0], KernelCombo(2.0, [0.3j, 0.1], [1.0, 1.0]))

    @settings(max_examples=500, deadline=None)
    @given(st.integers(1, 5), st.floats(0.1, 6), st.integers(0, 2 ** 32))
    def test_nonpositive(self, k, alpha, seed):
        rng = np.random.default_rng(seed)
        combo = KernelCombo(alpha, rng.uniform(-0.9, 0.9, k),
                            rng.normal(size=k) + 1j * rng.normal(size=k))
        val = jensen_bound(rng.uniform(0, 2, k), combo)
        assert val <= 1e-10 * (1 + float(np.abs(gram_of(combo).entries).sum()))
