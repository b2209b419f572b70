import math

import numpy as np
import pytest

from lcmspectra import (
    InvalidRegime,
    SpectralParams,
    build_toeplitz,
    entry_matrix,
    gram_via_formula,
    hadamard_factor,
    rescaled_singular_values,
    schatten_diff,
    zeta_real,
)
from lcmspectra.toeplitz import _trace_power_even


class TestBuildToeplitz:
    def test_divisibility_pattern(self):
        T = build_toeplitz(6, 0.25).values
        assert T[3, 1] == pytest.approx(2.0**-0.25, rel=1e-15)  # entry (4, 2)
        assert T[2, 1] == 0.0  # entry (3, 2)
        assert np.allclose(np.diag(T), 1.0)

    def test_first_column(self):
        T = build_toeplitz(8, 0.7).values
        n = np.arange(1, 9, dtype=float)
        assert np.allclose(T[:, 0], n**-0.7, rtol=1e-15)


class TestGram:
    def test_convolution_entry(self):
        # oracle: direct divisor sum over r <= 4 with 2 | r and 4 | r
        sigma = 0.25
        oracle = math.fsum(
            (r / 2) ** -sigma * (r / 4) ** -sigma
            for r in range(1, 5)
            if r % 2 == 0 and r % 4 == 0
        )
        G = gram_via_formula(4, sigma).values
        assert G[1, 3] == pytest.approx(oracle, rel=1e-14)
        assert G[1, 3] == pytest.approx(2.0**-0.25, rel=1e-14)

    def test_zero_beyond_lcm_range(self):
        G = gram_via_formula(4, 0.25).values
        assert G[2, 3] == 0.0  # [3, 4] = 12 > 4

    def test_last_diagonal_is_one(self):
        N = 7
        G = gram_via_formula(N, 0.25).values
        assert G[N - 1, N - 1] == pytest.approx(1.0, rel=1e-15)  # F(1) = 1

    @pytest.mark.parametrize("N", [16, 64, 256])
    @pytest.mark.parametrize("sigma", [-0.5, 0.0, 0.25, 0.4])
    def test_matches_direct_product(self, N, sigma):
        G = gram_via_formula(N, sigma).values
        T = build_toeplitz(N, sigma).values
        direct = T.T @ T
        scale = np.abs(direct) + np.abs(direct).max() * 1e-3
        assert np.max(np.abs(G - direct) / scale) < 1e-10

    def test_eigenvalues_match_direct_product(self):
        N, sigma = 128, 0.25
        w1 = np.linalg.eigvalsh(gram_via_formula(N, sigma).values)
        T = build_toeplitz(N, sigma).values
        w2 = np.linalg.eigvalsh(T.T @ T)
        assert np.max(np.abs(w1 - w2)) < 1e-10 * max(1.0, w2.max())


class TestRescaled:
    def test_one_by_one(self):
        assert rescaled_singular_values(1, 0.25).tolist() == [0.5]

    def test_rejects_sigma_half(self):
        with pytest.raises(InvalidRegime):
            rescaled_singular_values(8, 0.5)

    def test_nonnegative_and_bounded(self):
        sigma, N = 0.25, 64
        vals = rescaled_singular_values(N, sigma)
        assert np.all(vals >= 0.0)
        rho = 1 - 2 * sigma
        frob_sq = float(np.sum(build_toeplitz(N, sigma).values ** 2))
        assert vals[0] <= rho * N ** (-rho) * frob_sq + 1e-12


class TestHadamard:
    def test_corner_is_one(self):
        H = hadamard_factor(100, 8, 0.25).values
        assert H[0, 0] == pytest.approx(1.0, rel=1e-15)

    def test_zero_beyond_n(self):
        H = hadamard_factor(10, 8, 0.25).values
        assert H[6, 7] == 0.0  # [7, 8] = 56 > 10

    @pytest.mark.parametrize("sigma", [0.0, 0.25])
    def test_entrywise_convergence_to_one(self, sigma):
        devs = [
            np.abs(hadamard_factor(N, 10, sigma).values - 1.0).max()
            for N in (100, 1000, 10_000)
        ]
        assert devs[0] > devs[1] > devs[2]
        assert devs[-1] < 0.1

    def test_uniform_bound_stable_under_doubling(self):
        for sigma in (0.0, 0.25):
            c1 = np.abs(hadamard_factor(10_000, 128, sigma).values).max()
            c2 = np.abs(hadamard_factor(20_000, 128, sigma).values).max()
            assert c2 <= 1.1 * c1
            assert c1 <= 1.1 * c2
            assert c1 < 10.0


class TestSigmaAboveOne:
    def test_gram_recovers_zeta_factorisation(self):
        # at sigma = 2 the Gram matrix approximates zeta(4) E(2, 4)
        N = 512
        G = gram_via_formula(N, 2.0).values
        z4 = zeta_real(4.0)
        assert abs(G[0, 0] - z4) < 1e-3 * z4  # F(N) vs zeta(4), 0.1%
        top_gram = np.linalg.eigvalsh(G)[-1]
        section = np.linalg.eigvalsh(entry_matrix(SpectralParams(2.0, 4.0), N))[-1]
        assert abs(top_gram - z4 * section) < 0.02 * z4 * section


class TestSchatten:
    def test_q2_is_frobenius(self):
        N, M, sigma = 32, 48, 0.0
        E = entry_matrix(SpectralParams(sigma, 1.0), M)
        G = hadamard_factor(N, M, sigma).values
        oracle = math.sqrt(float(np.sum((E * (G - 1.0)) ** 2)))
        assert schatten_diff(N, M, 2, sigma) == pytest.approx(oracle, rel=1e-13)

    def test_trace_power_matches_eigen_oracle(self):
        rng = np.random.RandomState(3)
        D = rng.standard_normal((20, 20))
        D = (D + D.T) / 2
        w = np.linalg.eigvalsh(D)
        for q in (2, 4, 6):
            assert _trace_power_even(D, q) == pytest.approx(
                float(np.sum(w**q)), rel=1e-11
            )

    def test_zero_distortion_gives_zero(self):
        assert _trace_power_even(np.zeros((5, 5)), 4) == 0.0

    def test_decreases_with_n(self):
        v16 = schatten_diff(16, 128, 2, 0.0)
        v512 = schatten_diff(512, 128, 2, 0.0)
        assert v512 < v16

    def test_rejects_odd_or_small_exponent(self):
        with pytest.raises(InvalidRegime):
            schatten_diff(16, 32, 3, 0.0)
        with pytest.raises(InvalidRegime):
            schatten_diff(16, 32, 2, 0.3)  # q*rho = 0.8 <= 1
