import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from sigmdn.errors import InvalidInputError
from sigmdn.metrics import (
    DensityGrid,
    density_on,
    huberized_relative_error,
    kde,
    kde_support,
    kl_divergence,
    mixture_range,
    silverman_bandwidth,
)

# (p_model, p_mc, expected) worked by hand from |a - b| / (0.00125 b + 0.00125).
HAND_PAIRS = [
    (1.0, 1.0, 0.0),
    (0.00125, 0.0, 1.0),
    (1.01, 1.00, 4.0),
    (0.0, 0.0, 0.0),
    (0.0025, 0.0, 2.0),
    (0.0, 0.00125, 0.00125 / 0.0012515625),
    (0.5, 0.4, 0.1 / 0.00175),
    (0.4, 0.5, 0.1 / 0.001875),
    (0.2, 0.21, 0.01 / 0.0015125),
    (0.05, 0.06, 0.01 / 0.001325),
    (0.1001, 0.1, 0.0001 / 0.001375),
    (0.3, 0.0, 0.3 / 0.00125),
    (2.0, 1.0, 1.0 / 0.0025),
    (1.0, 2.0, 1.0 / 0.00375),
    (0.12345, 0.12, 0.00345 / 0.00140),
    (0.07, 0.07, 0.0),
    (0.0, 0.08, 0.08 / 0.00135),
    (0.15, 0.16, 0.01 / 0.00145),
    (0.9, 0.8, 0.1 / 0.00225),
    (0.003, 0.001, 0.002 / 0.00125125),
]


def gaussian_grid(mean, std, lo=-20.0, hi=20.0, n=20_001):
    dx = (hi - lo) / (n - 1)
    x = lo + dx * np.arange(n)
    return DensityGrid(lo, dx, norm.pdf(x, mean, std))


class TestDensityGrid:
    def test_rejects_nonpositive_spacing(self):
        with pytest.raises(InvalidInputError):
            DensityGrid(0.0, 0.0, np.ones(3))

    def test_points_and_mass(self):
        g = DensityGrid(1.0, 0.5, np.ones(5))
        np.testing.assert_allclose(g.points, [1, 1.5, 2, 2.5, 3])
        assert g.mass() == pytest.approx(2.0)


class TestKde:
    def test_standard_normal(self):
        x = np.random.default_rng(0).normal(size=1_000_000)
        est = kde(x)
        assert np.max(np.abs(est.values - norm.pdf(est.points))) < 0.01

    def test_shift_equivariance(self):
        x = np.random.default_rng(1).normal(size=2000)
        a, b = kde(x), kde(x + 0.37)
        assert b.x0 == pytest.approx(a.x0 + 0.37, abs=1e-12)
        assert b.dx == pytest.approx(a.dx, rel=1e-12)
        np.testing.assert_allclose(b.values, a.values, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_unit_mass(self, seed):
        g = np.random.default_rng(seed)
        x = np.concatenate([g.normal(size=500), g.standard_t(3, size=500) * 0.1 + 2])
        assert 0.99 <= kde(x).mass() <= 1.01

    def test_permutation_invariant(self):
        x = np.random.default_rng(2).normal(size=3000)
        a, b = kde(x), kde(np.random.default_rng(3).permutation(x))
        assert np.array_equal(a.values, b.values)

    def test_default_grid(self):
        x = np.random.default_rng(4).normal(size=500)
        h = silverman_bandwidth(x)
        est = kde(x)
        assert est.values.size == 512
        assert est.x0 == pytest.approx(x.min() - 4 * h)
        assert est.points[-1] == pytest.approx(x.max() + 4 * h)

    def test_silverman_rule(self):
        x = np.random.default_rng(5).normal(size=400)
        q75, q25 = np.percentile(x, [75, 25])
        expect = 0.9 * min(x.std(ddof=1), (q75 - q25) / 1.34) * 400 ** (-0.2)
        assert silverman_bandwidth(x) == pytest.approx(expect, rel=1e-14)

    def test_rejections(self):
        with pytest.raises(InvalidInputError):
            kde(np.ones(100))
        with pytest.raises(InvalidInputError):
            kde(np.arange(29.0))

    def test_support_covers_mixture(self):
        x = np.random.default_rng(6).normal(size=100)
        rng = mixture_range([0.0, 1.0], [0.1, 2.0])
        assert rng == (-19.0, 21.0)
        x0, dx, n = kde_support(x, extra=rng)
        assert x0 == -19.0 and x0 + dx * (n - 1) == pytest.approx(21.0)


class TestKl:
    def test_identical(self):
        g = gaussian_grid(0.0, 1.0)
        assert kl_divergence(g, g) == 0.0

    @pytest.mark.parametrize("m", [0.3, 1.0, 2.0])
    def test_gaussian_means(self, m):
        kl = kl_divergence(gaussian_grid(0.0, 1.0), gaussian_grid(m, 1.0))
        assert kl == pytest.approx(m * m / 2, rel=0.02)

    @pytest.mark.parametrize("s1,s2,m", [(1.0, 2.0, 0.5), (0.5, 0.3, -0.2)])
    def test_gaussian_variances(self, s1, s2, m):
        exact = math.log(s2 / s1) + (s1**2 + m**2) / (2 * s2**2) - 0.5
        assert kl_divergence(gaussian_grid(0.0, s1), gaussian_grid(m, s2)) == pytest.approx(exact, rel=0.02)

    def test_nonnegative_after_renormalization(self):
        g = np.random.default_rng(7)
        for _ in range(100):
            n = int(g.integers(16, 300))
            p, q = g.random(n), g.random(n)
            p[g.random(n) < 0.1] = 0.0
            dx = float(g.uniform(0.01, 1.0))
            p, q = p / (p.sum() * dx), q / (q.sum() * dx)
            # Riemann-sum normalization makes the discrete sum a true KL.
            assert kl_divergence(DensityGrid(0.0, dx, p), DensityGrid(0.0, dx, q)) >= -1e-10

    def test_zero_q_is_floored(self):
        p = DensityGrid(0.0, 1.0, np.array([0.5, 0.5]))
        q = DensityGrid(0.0, 1.0, np.array([1.0, 0.0]))
        assert math.isfinite(kl_divergence(p, q))

    def test_zero_p_terms_vanish(self):
        p = DensityGrid(0.0, 1.0, np.array([1.0, 0.0]))
        q = DensityGrid(0.0, 1.0, np.array([0.5, 0.5]))
        assert kl_divergence(p, q) == pytest.approx(math.log(2))

    def test_grid_mismatch(self):
        with pytest.raises(InvalidInputError):
            kl_divergence(DensityGrid(0.0, 1.0, np.ones(3)), DensityGrid(0.0, 0.5, np.ones(3)))

    def test_density_on(self):
        g = density_on(DensityGrid(-1.0, 0.5, np.zeros(5)), norm.pdf)
        np.testing.assert_allclose(g.values, norm.pdf([-1, -0.5, 0, 0.5, 1]))


class TestHuberizedError:
    @pytest.mark.parametrize("p_model,p_mc,expected", HAND_PAIRS)
    def test_hand_values(self, p_model, p_mc, expected):
        assert abs(huberized_relative_error(p_model, p_mc) - expected) <= 1e-12 * max(1.0, expected)

    def test_negative_benchmark(self):
        with pytest.raises(InvalidInputError):
            huberized_relative_error(0.1, -0.01)

    @settings(max_examples=200)
    @given(a=st.floats(0, 10), b=st.floats(0, 10))
    def test_zero_iff_equal(self, a, b):
        e = huberized_relative_error(a, b)
        assert e >= 0
        assert (e == 0) == (a == b)

    @settings(max_examples=100)
    @given(a=st.floats(0, 10), b=st.floats(0, 10))
    def test_continuity(self, a, b):
        eps = 1e-9
        d1 = abs(huberized_relative_error(a + eps, b) - huberized_relative_error(a, b))
        d2 = abs(huberized_relative_error(a, b + eps) - huberized_relative_error(a, b))
        # Lipschitz constants on [0, 10]^2: 1/c in p_model, (1 + 10)/c in p_mc.
        assert d1 <= eps / 0.00125 * (1 + 1e-6) + 1e-9
        assert d2 <= 11 * eps / 0.00125 * (1 + 1e-6) + 1e-9
