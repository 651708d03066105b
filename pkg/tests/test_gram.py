import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from carleman.errors import DomainError, SingularGramError
from carleman.gram import (KernelCombo, build_gram, eval_vector, gram_of,
                           projection_norm_sq, quadratic_form, solve_coefficients)
from carleman.kernel_core import kernel_eval


def _random_combo(rng, k, alpha, radius=0.8):
    w = radius * np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))
    c = rng.normal(size=k) + 1j * rng.normal(size=k)
    return KernelCombo(alpha, w, c)


class TestKernelCombo:
    def test_validation(self):
        with pytest.raises(DomainError):
            KernelCombo(0.0, [0.1], [1.0])
        with pytest.raises(DomainError):
            KernelCombo(2.0, [0.1, 0.2], [1.0])
        with pytest.raises(DomainError):
            KernelCombo(2.0, [1.0], [1.0])
        with pytest.raises(DomainError):
            KernelCombo(2.0, [0.1], [np.inf])

    def test_immutable_arrays(self):
        combo = KernelCombo(2.0, [0.1, 0.2], [1.0, 2.0])
        with pytest.raises(ValueError):
            combo.coeffs[0] = 5

    def test_flags(self):
        assert KernelCombo(2.0, [0.1, -0.3], [1.0, -2.0]).real_coeffs
        assert not KernelCombo(2.0, [0.1j], [1.0]).real_nodes

    def test_call_matches_kernel_sum(self, rng):
        combo = _random_combo(rng, 3, 2.3)
        z = 0.2 - 0.5j
        expect = sum(c * kernel_eval(w, 2.3, z) for c, w in zip(combo.coeffs, combo.points))
        assert combo(z) == pytest.approx(expect, rel=1e-13)
        assert combo(np.array([z, z])).shape == (2,)


class TestGram:
    def test_entries_hermitian_and_oracle(self, rng):
        pts = [0.3, -0.2 + 0.4j, 0.7j]
        g = build_gram(pts, 1.6)
        assert np.array_equal(g.entries, g.entries.conj().T)
        with mp.workdps(30):
            for i, a in enumerate(pts):
                for j, b in enumerate(pts):
                    ref = (1 - mp.conj(mp.mpc(a)) * mp.mpc(b)) ** (-mp.mpf(1.6))
                    assert abs(g.entries[i, j] - complex(ref)) <= 1e-14 * abs(complex(ref))

    def test_psd_and_diagnostics(self):
        g = build_gram([0.0, 0.5, -0.5], 2.0)
        assert g.psd and g.invertible
        assert g.min_eigenvalue > 0 and g.min_pivot > 0

    def test_duplicate_nodes_not_invertible(self):
        g = build_gram([0.3, 0.3], 2.0)
        assert not g.invertible
        with pytest.raises(SingularGramError):
            solve_coefficients([1.0, 1.0], g)

    def test_bad_alpha(self):
        with pytest.raises(DomainError):
            build_gram([0.1], -1.0)


class TestQuadraticForm:
    def test_single_kernel(self):
        assert quadratic_form(KernelCombo(3.0, [0.5], [1.0])) == pytest.approx(0.75 ** -3)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 5), st.floats(0.2, 6), st.integers(0, 10_000))
    def test_nonnegative_and_matches_values(self, k, alpha, seed):
        combo = _random_combo(np.random.default_rng(seed), k, alpha)
        n = quadratic_form(combo)
        assert n >= 0
        # N = sum_i c_i conj(f_i): reproducing property
        f = eval_vector(combo)
        assert n == pytest.approx(float(np.real(combo.coeffs @ np.conj(f))), rel=1e-9, abs=1e-12)

    def test_gram_mismatch(self):
        combo = KernelCombo(2.0, [0.1], [1.0])
        with pytest.raises(DomainError):
            quadratic_form(combo, build_gram([0.1], 3.0))

    def test_eval_vector_is_function_values(self, rng):
        combo = _random_combo(rng, 4, 1.3)
        np.testing.assert_allclose(eval_vector(combo), combo(combo.points), rtol=1e-12)


class TestSolve:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(1, 4), st.floats(0.5, 4), st.integers(0, 10_000))
    def test_round_trip(self, k, alpha, seed):
        combo = _random_combo(np.random.default_rng(seed), k, alpha, radius=0.6)
        g = gram_of(combo)
        if not g.invertible:
            return
        c = solve_coefficients(eval_vector(combo), g)
        np.testing.assert_allclose(c, combo.coeffs, rtol=1e-6, atol=1e-8)

    def test_projection_norm_equals_quadratic_form(self, rng):
        combo = _random_combo(rng, 3, 2.0, radius=0.6)
        assert projection_norm_sq(eval_vector(combo), gram_of(combo)) == pytest.approx(
            quadratic_form(combo), rel=1e-10)

    def test_shape_check(self):
        with pytest.raises(DomainError):
            solve_coefficients([1.0], build_gram([0.1, 0.2], 2.0))
