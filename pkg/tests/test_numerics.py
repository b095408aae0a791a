"""Tests for the numerical kernels.

The Bessel values are checked against independent truncated-series oracles
defined in this file (and scipy as a second opinion), not against the
implementation itself.
"""

import math

import numpy as np
import pytest
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from starcf.errors import NumericalError
from starcf.numerics import (
    RngStream,
    bessel_i_ratio,
    bessel_i2_ratio,
    bessel_j0,
    hermitian_sqrt,
    sample_kronecker_gaussian,
    sinc,
)


def series_j0(x, terms=60):
    """Oracle: raw power series of the order-zero Bessel function.

    Only trustworthy for |x| up to roughly 15 in double precision, which
    covers the zeros used below.
    """
    q = -0.25 * x * x
    term = 1.0
    total = 1.0
    for k in range(1, terms):
        term *= q / (k * k)
        total += term
    return total


def series_i_ratio(kappa, terms=80):
    """Oracle: power-series ratio I1(kappa)/I0(kappa)."""
    q = 0.25 * kappa * kappa
    t0 = 1.0
    i0 = 1.0
    t1 = 0.5 * kappa
    i1 = t1
    for k in range(1, terms):
        t0 *= q / (k * k)
        i0 += t0
        t1 *= q / (k * (k + 1))
        i1 += t1
    return i1 / i0


def bisect_first_zero(f, lo, hi, tol=1e-12):
    assert f(lo) > 0 > f(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestBesselJ0:
    def test_value_at_zero(self):
        assert bessel_j0(0.0) == 1.0

    def test_first_zero_matches_series_oracle_bisection(self):
        # Frozen from the oracle: first positive zero of J0.
        z1 = bisect_first_zero(series_j0, 2.0, 3.0)
        assert z1 == pytest.approx(2.404826, abs=1e-5)
        assert bessel_j0(z1) == pytest.approx(0.0, abs=1e-10)

    def test_first_three_zeros(self):
        for z in (2.404825557695773, 5.520078110286311, 8.653727912911013):
            assert abs(bessel_j0(z)) < 1e-10

    def test_matches_series_oracle_below_twelve(self):
        x = np.linspace(0.0, 12.0, 977)
        got = bessel_j0(x)
        want = np.array([series_j0(v) for v in x])
        assert np.max(np.abs(got - want)) < 1e-12

    def test_matches_scipy_up_to_thousand(self):
        x = np.linspace(0.0, 1000.0, 20011)
        err = np.abs(bessel_j0(x) - scipy.special.j0(x))
        assert np.max(err) < 1e-10

    def test_even_symmetry(self):
        x = np.linspace(0.1, 40.0, 101)
        assert np.allclose(bessel_j0(-x), bessel_j0(x), rtol=0, atol=0)

    @given(st.floats(min_value=0.0, max_value=1000.0))
    @settings(max_examples=200, deadline=None)
    def test_bounded_by_one(self, x):
        assert abs(bessel_j0(x)) <= 1.0 + 1e-12


class TestBesselIRatio:
    def test_at_zero(self):
        assert bessel_i_ratio(0.0) == 0.0

    def test_kappa_one_matches_series_oracle(self):
        # Frozen from the oracle: I1(1)/I0(1).
        want = series_i_ratio(1.0)
        assert want == pytest.approx(0.446399, abs=1e-5)
        assert bessel_i_ratio(1.0) == pytest.approx(want, abs=1e-12)

    def test_matches_series_oracle_moderate_range(self):
        for kappa in (0.01, 0.1, 0.5, 2.0, 5.0, 20.0, 60.0):
            assert bessel_i_ratio(kappa) == pytest.approx(
                series_i_ratio(kappa, terms=400), rel=1e-12
            )

    def test_matches_scipy_wide_range(self):
        for kappa in (1e-3, 0.3, 1.0, 7.0, 90.0, 150.0, 400.0, 2e4):
            want = scipy.special.i1e(kappa) / scipy.special.i0e(kappa)
            assert bessel_i_ratio(kappa) == pytest.approx(want, rel=1e-9)

    def test_limits_and_monotonicity(self):
        grid = np.linspace(0.0, 300.0, 301)
        vals = np.array([bessel_i_ratio(k) for k in grid])
        assert np.all(vals >= 0.0) and np.all(vals < 1.0)
        assert np.all(np.diff(vals) > 0)
        assert bessel_i_ratio(1e6) == pytest.approx(1.0, abs=1e-5)


class TestBesselI2Ratio:
    def test_at_zero(self):
        assert bessel_i2_ratio(0.0) == 0.0

    def test_kappa_one_frozen(self):
        # Frozen: I2(1)/I0(1).
        assert bessel_i2_ratio(1.0) == pytest.approx(0.1072200682, abs=1e-9)

    def test_matches_scipy_wide_range(self):
        for kappa in (1e-3, 0.3, 1.0, 2.5, 7.0, 90.0, 150.0, 400.0, 2e4):
            want = scipy.special.ive(2, kappa) / scipy.special.i0e(kappa)
            assert bessel_i2_ratio(kappa) == pytest.approx(want, rel=1e-9)

    def test_small_kappa_quadratic(self):
        # Leading behaviour kappa^2 / 8.
        for kappa in (1e-4, 1e-3, 1e-2):
            assert bessel_i2_ratio(kappa) == pytest.approx(
                kappa * kappa / 8.0, rel=1e-3
            )

    def test_below_first_ratio(self):
        for kappa in (0.2, 1.0, 5.0, 50.0, 500.0):
            assert 0.0 < bessel_i2_ratio(kappa) < bessel_i_ratio(kappa)


class TestSinc:
    def test_at_zero(self):
        assert sinc(0.0) == 1.0

    def test_normalized_definition(self):
        # sin(pi a) / (pi a), zeros at the integers.
        assert sinc(0.5) == pytest.approx(2.0 / math.pi, rel=1e-14)
        for n in (1, 2, 3, 7):
            assert abs(sinc(float(n))) < 1e-15


class TestHermitianSqrt:
    def rand_psd(self, n, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        return a @ a.conj().T / n

    def test_square_reconstructs(self):
        m = self.rand_psd(6, 1)
        s = hermitian_sqrt(m)
        assert np.allclose(s @ s, m, atol=1e-11)
        assert np.allclose(s, s.conj().T, atol=1e-12)

    def test_clamps_tiny_negative_eigenvalues(self):
        rng = np.random.default_rng(2)
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        m = (q * np.array([1.0, 0.5, 0.1, -5e-10])) @ q.conj().T
        m = 0.5 * (m + m.conj().T)
        s = hermitian_sqrt(m)
        ev = np.linalg.eigvalsh(s)
        assert np.all(ev >= 0.0)

    def test_rejects_significant_negative_eigenvalue(self):
        m = np.diag([1.0, -1e-6])
        with pytest.raises(NumericalError):
            hermitian_sqrt(m)

    def test_rejects_non_hermitian(self):
        m = np.array([[1.0, 2.0], [0.0, 1.0]], dtype=complex)
        with pytest.raises(NumericalError):
            hermitian_sqrt(m)

    def test_diagonal_case(self):
        m = np.diag([4.0, 9.0, 0.0])
        s = hermitian_sqrt(m)
        assert np.allclose(s, np.diag([2.0, 3.0, 0.0]), atol=1e-14)


class TestKroneckerSampling:
    def test_sample_covariance_matches_kronecker_product(self):
        # Oracle: empirical covariance of vec(X) over many draws.
        r_rx = np.array([[1.0, 0.6], [0.6, 1.0]], dtype=complex)
        r_tx = np.array([[1.0, 0.3 - 0.2j], [0.3 + 0.2j, 1.0]])
        rng = RngStream(123, 0).generator()
        draws = 100_000
        vecs = np.empty((draws, 4), dtype=complex)
        for i in range(draws):
            x = sample_kronecker_gaussian(r_rx, r_tx, rng)
            vecs[i] = x.T.reshape(-1)  # column-stacking vectorization
        emp = vecs[:, :, None] * vecs[:, None, :].conj()
        emp = emp.mean(axis=0)
        want = np.kron(r_tx.T, r_rx)
        err = np.linalg.norm(emp - want) / np.linalg.norm(want)
        assert err < 0.02
        assert np.abs(vecs.mean(axis=0)).max() < 0.02

    def test_shapes_and_unit_variance(self):
        rng = RngStream(5, 0).generator()
        x = sample_kronecker_gaussian(np.eye(3), np.eye(7), rng)
        assert x.shape == (3, 7)
        many = np.stack(
            [sample_kronecker_gaussian(np.eye(2), np.eye(2), rng) for _ in range(4000)]
        )
        assert np.var(many) == pytest.approx(1.0, rel=0.1)


class TestRngStream:
    def test_same_seed_same_draws(self):
        a = RngStream(77, 3).generator().normal(size=16)
        b = RngStream(77, 3).generator().normal(size=16)
        assert np.array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(77, 3).generator().normal(size=16)
        b = RngStream(77, 4).generator().normal(size=16)
        assert not np.array_equal(a, b)

    def test_child_streams_deterministic_and_distinct(self):
        s = RngStream(9)
        a1 = s.child(0).generator().normal(size=8)
        a2 = s.child(0).generator().normal(size=8)
        b = s.child(1).generator().normal(size=8)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)

    def test_nested_children_independent_of_sibling_order(self):
        s = RngStream(9)
        x = s.child(2).child(5).generator().normal(size=4)
        y = RngStream(9).child(2).child(5).generator().normal(size=4)
        assert np.array_equal(x, y)
