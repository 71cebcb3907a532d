import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigmdn import rng as streams
from sigmdn.errors import InvalidInputError
from sigmdn.mdn.network import MixtureParams
from sigmdn.pricing import (
    CALL,
    CLOSED_FORM,
    DEFAULT_MATURITIES,
    DEFAULT_STRIKES,
    MONTE_CARLO,
    PUT,
    QUADRATURE,
    OptionSpec,
    discount_factor,
    lognormal_price,
    mc_price,
    mixture_european_price,
    mixture_forward,
    quadrature_price,
)
from sigmdn.stochastic import CholeskyFactor, GbmScenarioTV, RatePath, log_basket_return, simulate_terminal_prices, time_grid

DT = 1 / 252


def const_path(v, T=1.0):
    n, h = time_grid(T, DT)
    return RatePath(h, np.full(n + 1, float(v)))


def random_mixture(g, d=10):
    return MixtureParams(g.dirichlet(np.ones(d)), g.uniform(-0.3, 0.3, d), g.uniform(0.02, 0.4, d))


def sample_mixture(mix, n, g):
    comp = g.choice(len(mix.pi), size=n, p=mix.pi)
    return g.normal(mix.mu[comp], mix.delta[comp])


mixtures = st.integers(0, 2**32 - 1).map(lambda s: random_mixture(np.random.default_rng(s), d=1 + s % 6))


class TestOptionSpec:
    @pytest.mark.parametrize("K", [0.0, -1.0, math.inf, math.nan])
    def test_rejects_bad_strike(self, K):
        with pytest.raises(InvalidInputError):
            OptionSpec(CALL, K, 1.0)

    def test_rejects_kind_and_maturity(self):
        with pytest.raises(InvalidInputError):
            OptionSpec("digital", 1.0, 1.0)
        with pytest.raises(InvalidInputError):
            OptionSpec(PUT, 1.0, 0.0)

    def test_payoff(self):
        y = np.log([0.5, 1.0, 2.0])
        np.testing.assert_allclose(OptionSpec(CALL, 1.0, 1.0).payoff(y), [0, 0, 1.0])
        np.testing.assert_allclose(OptionSpec(PUT, 1.0, 1.0).payoff(y), [0.5, 0, 0])

    def test_default_grid(self):
        assert len(DEFAULT_STRIKES) == 21
        assert DEFAULT_STRIKES[0] == 0.8 and DEFAULT_STRIKES[-1] == 1.2 and DEFAULT_STRIKES[10] == 1.0
        assert DEFAULT_MATURITIES == (0.25, 0.5, 0.75, 1.0)


class TestDiscount:
    def test_constant_rate(self):
        assert discount_factor(const_path(0.05)) == pytest.approx(math.exp(-0.05), rel=1e-14)

    def test_zero_rate(self):
        assert discount_factor(const_path(0.0)) == 1.0

    def test_linear_ramp(self):
        n, h = time_grid(1.0, DT)
        r = RatePath(h, np.linspace(0.0, 0.1, n + 1))
        assert abs(discount_factor(r) - math.exp(-0.05)) < 1e-6

    def test_truncates_to_maturity(self):
        assert discount_factor(const_path(0.04), 0.5) == pytest.approx(math.exp(-0.02), rel=1e-12)

    def test_horizon_mismatch(self):
        with pytest.raises(InvalidInputError):
            discount_factor(const_path(0.04, 0.5), 1.0)


class TestClosedForm:
    def test_point_mass(self):
        mix = MixtureParams(np.ones(1), np.zeros(1), np.array([1e-4]))
        q = mixture_european_price(mix, OptionSpec(CALL, 0.8, 1.0), 0.95)
        assert q.method == CLOSED_FORM
        assert q.price == pytest.approx(0.95 * 0.2, rel=1e-6)

    def test_quadrature_oracle(self):
        g = np.random.default_rng(0)
        worst = 0.0
        for _ in range(100):
            mix, K = random_mixture(g), g.uniform(0.5, 1.5)
            for kind in (CALL, PUT):
                spec = OptionSpec(kind, K, 1.0)
                a = mixture_european_price(mix, spec, 0.97).price
                b = quadrature_price(mix, spec, 0.97)
                assert b.method == QUADRATURE
                worst = max(worst, abs(a - b.price) / abs(b.price))
        assert worst < 1e-8

    def test_put_call_parity(self):
        g = np.random.default_rng(1)
        for _ in range(100):
            mix, K, D = random_mixture(g), g.uniform(0.5, 1.5), g.uniform(0.8, 1.0)
            c = mixture_european_price(mix, OptionSpec(CALL, K, 1.0), D).price
            p = mixture_european_price(mix, OptionSpec(PUT, K, 1.0), D).price
            assert abs((c - p) - D * (mixture_forward(mix) - K)) < 1e-10

    def test_symmetric_pair_about_strike(self):
        K, a, d, D = 1.1, 0.07, 0.15, 0.96
        mix = MixtureParams(np.array([0.5, 0.5]), np.log(K) + np.array([-a, a]), np.array([d, d]))
        c = mixture_european_price(mix, OptionSpec(CALL, K, 1.0), D).price
        p = mixture_european_price(mix, OptionSpec(PUT, K, 1.0), D).price
        assert c - p == pytest.approx(D * K * (math.exp(d * d / 2) * math.cosh(a) - 1), rel=1e-12)

    def test_single_component_is_lognormal(self):
        spec = OptionSpec(CALL, 1.0, 1.0)
        mix = MixtureParams(np.ones(1), np.array([0.01]), np.array([0.2]))
        assert lognormal_price(spec, 0.01, 0.2, 0.9) == mixture_european_price(mix, spec, 0.9).price

    @settings(max_examples=60, deadline=None)
    @given(mix=mixtures, D=st.floats(0.5, 1.0))
    def test_monotone_in_strike(self, mix, D):
        ks = np.linspace(0.5, 1.5, 41)
        calls = [mixture_european_price(mix, OptionSpec(CALL, k, 1.0), D).price for k in ks]
        puts = [mixture_european_price(mix, OptionSpec(PUT, k, 1.0), D).price for k in ks]
        assert np.all(np.diff(calls) <= 1e-15)
        assert np.all(np.diff(puts) >= -1e-15)

    @settings(max_examples=60, deadline=None)
    @given(mix=mixtures, K=st.floats(0.5, 1.5), D=st.floats(0.5, 1.0))
    def test_bounds(self, mix, K, D):
        c = mixture_european_price(mix, OptionSpec(CALL, K, 1.0), D).price
        p = mixture_european_price(mix, OptionSpec(PUT, K, 1.0), D).price
        assert 0 <= c <= D * mixture_forward(mix) * (1 + 1e-14)
        assert 0 <= p <= D * K * (1 + 1e-14)


class TestQuadrature:
    def test_resolution_floor(self):
        mix = MixtureParams(np.ones(1), np.zeros(1), np.ones(1) * 0.1)
        with pytest.raises(InvalidInputError):
            quadrature_price(mix, OptionSpec(CALL, 1.0, 1.0), 1.0, resolution=15)

    def test_strike_outside_window(self):
        mix = MixtureParams(np.ones(1), np.zeros(1), np.ones(1) * 0.01)
        spec = OptionSpec(CALL, 0.5, 1.0)
        assert quadrature_price(mix, spec, 1.0).price == pytest.approx(
            mixture_european_price(mix, spec, 1.0).price, rel=1e-10
        )


class TestMonteCarlo:
    def test_at_the_money_point_mass(self):
        y = np.zeros(10)
        assert mc_price(y, OptionSpec(CALL, 1.0, 1.0), 0.9).price == 0.0
        assert mc_price(y, OptionSpec(PUT, 1.0, 1.0), 0.9).price == 0.0

    def test_needs_two_samples(self):
        with pytest.raises(InvalidInputError):
            mc_price([0.1], OptionSpec(CALL, 1.0, 1.0), 1.0)

    def test_stderr(self):
        y = np.log([1.0, 1.2, 1.4])
        q = mc_price(y, OptionSpec(CALL, 1.0, 1.0), 0.5)
        assert q.method == MONTE_CARLO
        assert q.price == pytest.approx(0.5 * 0.2)
        assert q.stderr == pytest.approx(0.5 * 0.2 / math.sqrt(3))

    def test_single_asset_black_scholes(self):
        r, q, sig = 0.05, 0.02, 0.2
        scen = GbmScenarioTV(const_path(r), [const_path(q)], [const_path(sig)], CholeskyFactor(np.eye(1)), 1.0)
        y = log_basket_return(simulate_terminal_prices(scen, 100_000, streams.stream(31)), [1.0])
        D = discount_factor(scen.r)
        for K in (0.8, 0.9, 1.0, 1.05, 1.1, 1.2):
            for kind in (CALL, PUT):
                spec = OptionSpec(kind, K, 1.0)
                mc = mc_price(y, spec, D)
                exact = lognormal_price(spec, r - q - 0.5 * sig**2, sig, D)
                assert abs(mc.price - exact) < 3 * mc.stderr

    def test_mixture_self_consistency(self):
        g = np.random.default_rng(32)
        mix = random_mixture(g, d=4)
        y = sample_mixture(mix, 100_000, g)
        for K in (0.8, 1.0, 1.2):
            for kind in (CALL, PUT):
                spec = OptionSpec(kind, K, 1.0)
                mc = mc_price(y, spec, 0.95)
                assert abs(mc.price - mixture_european_price(mix, spec, 0.95).price) < 3 * mc.stderr

    def test_parity_within_stderr(self):
        g = np.random.default_rng(33)
        mix = random_mixture(g, d=3)
        y = sample_mixture(mix, 100_000, g)
        c = mc_price(y, OptionSpec(CALL, 1.0, 1.0), 1.0)
        p = mc_price(y, OptionSpec(PUT, 1.0, 1.0), 1.0)
        fwd = np.exp(y)
        se = fwd.std(ddof=1) / math.sqrt(y.size)
        assert abs((c.price - p.price) - (mixture_forward(mix) - 1.0)) < 3 * se
