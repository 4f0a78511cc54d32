import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import tone
from sparsetfd.csr import adjoint_op, build_mask, select_measurements
from sparsetfd.errors import InvalidArgument
from sparsetfd.robust import (
    TrimPolicy,
    discard_mask,
    lstat_denoise,
    robust_initial_estimate,
    robust_initial_transform,
    trimmed_sum,
)
from sparsetfd.signals import Signal
from sparsetfd.tfd import AmbiguityMatrix, ambiguity, ambiguity_to_tf, tf_to_ambiguity


def rand_amb(N, seed):
    rng = np.random.default_rng(seed)
    return AmbiguityMatrix(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))


def outside_guard(rng, N, count, radius=2, region=None):
    c = N // 2
    ok = np.ones((N, N), bool)
    ok[c - radius:c + radius + 1, c - radius:c + radius + 1] = False
    if region is not None:
        ok &= region
    flat = rng.choice(np.flatnonzero(ok), count, replace=False)
    return np.unravel_index(flat, (N, N))


class TestPolicy:
    @pytest.mark.parametrize("P,Q", [(-0.1, 0), (0, 1.0), (0.6, 0.4)])
    def test_invalid(self, P, Q):
        with pytest.raises(InvalidArgument):
            TrimPolicy(P, Q)

    def test_counts(self):
        assert TrimPolicy(0.0, 0.005).counts(8100) == (0, 40)
        assert TrimPolicy(0.1, 0.2).counts(10) == (1, 2)


class TestDenoise:
    def test_identity(self):
        a = rand_amb(16, 0)
        np.testing.assert_array_equal(lstat_denoise(a, TrimPolicy()).values, a.values)

    def test_counts_and_guard(self):
        a = rand_amb(32, 1)
        a.values[16, 16] = 1e6
        drop = discard_mask(a, TrimPolicy(0.01, 0.02))
        assert drop.sum() == round(0.01 * 1024) + round(0.02 * 1024)
        assert not drop[14:19, 14:19].any()

    def test_guard_off_removes_origin(self):
        a = rand_amb(16, 2)
        a.values[8, 8] = 1e6
        drop = discard_mask(a, TrimPolicy(0, 0.01, guard_origin=False))
        assert drop[8, 8]

    def test_impulses_removed_on_tone(self):
        N = 90
        a = ambiguity(Signal(tone(N, 7 / N)))
        rng = np.random.default_rng(4)
        cells = outside_guard(rng, N, 10)
        noisy = a.values.copy()
        noisy[cells] += 5 * abs(a.origin) * np.exp(2j * np.pi * rng.random(10))
        out = lstat_denoise(a.replace(values=noisy), TrimPolicy(0, 0.005))
        assert not out.values[cells].any()
        assert out.origin == a.origin
        assert (out.values != noisy).sum() <= 40

    @given(st.integers(0, 10_000), st.floats(0, 0.3), st.floats(0, 0.3))
    def test_never_grows(self, seed, P, Q):
        a = rand_amb(8, seed)
        out = lstat_denoise(a, TrimPolicy(P, Q))
        assert np.all(np.abs(out.values) <= np.abs(a.values))

    @given(st.integers(0, 10_000), st.floats(0.01, 0.5))
    def test_idempotent_low_trim(self, seed, P):
        a = rand_amb(8, seed)
        pol = TrimPolicy(P, 0.0)
        once = lstat_denoise(a, pol)
        np.testing.assert_array_equal(lstat_denoise(once, pol).values, once.values)

    def test_impulses_outside_mask_leave_measurements_clean(self):
        N = 32
        clean = rand_amb(N, 5)
        mask = build_mask(N, 9)
        rng = np.random.default_rng(6)
        cells = outside_guard(rng, N, 10, region=~mask.as_bool())
        noisy = clean.values.copy()
        noisy[cells] += 100.0
        pol = TrimPolicy(0, 10 / N ** 2)
        denoised = lstat_denoise(clean.replace(values=noisy), pol)
        a = select_measurements(denoised, mask, 0.5, 1)
        b = select_measurements(clean, mask, 0.5, 1)
        np.testing.assert_array_equal(a.values, b.values)


class TestTrimmedSum:
    def test_plain_sum(self):
        z = np.array([1 + 2j, -3 + 0.5j, 4 - 1j])
        assert trimmed_sum(z, TrimPolicy()) == pytest.approx(z.sum())

    def test_partwise(self):
        z = np.array([1 + 9j, 2 + 1j, 3 + 2j, 100 + 3j])
        out = trimmed_sum(z, TrimPolicy(0.25, 0.25))
        assert out == pytest.approx(2 * ((2 + 3) + 1j * (2 + 3)))

    def test_literal_bounds(self):
        z = np.arange(10.0) + 0j
        out = trimmed_sum(z, TrimPolicy(0.2, 0.5), literal_bounds=True)
        assert out == pytest.approx(sum(range(2, 6)))

    def test_axis(self):
        z = np.arange(12.0).reshape(3, 4)
        np.testing.assert_allclose(trimmed_sum(z, TrimPolicy(), axis=0), z.sum(axis=0))


class TestInitialTransform:
    def test_untrimmed_is_inverse_transform(self):
        a = rand_amb(16, 7)
        ref = 16 * ambiguity_to_tf(a.values)
        for target in [(0, 0), (3, 11), (15, 8)]:
            got = robust_initial_transform(a, TrimPolicy(), target)
            assert abs(got - ref[target]) <= 1e-9 * abs(ref[target])

    def test_zero_plane(self):
        assert robust_initial_transform(AmbiguityMatrix(np.zeros((8, 8))),
                                        TrimPolicy(0.1, 0.1), (2, 3)) == 0

    def test_target_range(self):
        with pytest.raises(InvalidArgument):
            robust_initial_transform(rand_amb(8, 0), TrimPolicy(), (8, 0))

    def test_resists_impulses(self):
        N = 90
        target = (20, 33)
        sigma = np.zeros((N, N), complex)
        sigma[target] = 1.0
        clean = tf_to_ambiguity(sigma)
        clean_value = robust_initial_transform(AmbiguityMatrix(clean), TrimPolicy(), target)
        assert clean_value == pytest.approx(N)
        rng = np.random.default_rng(8)
        cells = outside_guard(rng, N, 5)
        c = N // 2
        theta, tau = cells[0] - c, cells[1] - c
        # impulses whose modulated terms point into the first quadrant
        demod = np.exp(-2j * np.pi * (theta * target[0] - tau * target[1]) / N)
        noisy = clean.copy()
        noisy[cells] += 40 * np.exp(1j * np.pi / 4) * demod
        plain = robust_initial_transform(AmbiguityMatrix(noisy), TrimPolicy(), target)
        trimmed = robust_initial_transform(AmbiguityMatrix(noisy), TrimPolicy(0, 0.02), target)
        assert abs(plain - clean_value) > 0.5 * abs(clean_value)
        assert abs(trimmed - clean_value) < 0.1 * abs(clean_value)

    def test_estimate_untrimmed_is_adjoint(self):
        a = rand_amb(16, 9)
        meas = select_measurements(a, build_mask(16, 7), 0.6, 2)
        est = robust_initial_estimate(meas, TrimPolicy(), chunk=50)
        np.testing.assert_allclose(est.values, adjoint_op(meas.values, meas.idx, 16).values,
                                   atol=1e-10)

    def test_estimate_matches_pointwise(self):
        a = rand_amb(8, 10)
        meas = select_measurements(a, None, 1.0)
        pol = TrimPolicy(0.05, 0.1)
        est = robust_initial_estimate(meas, pol)
        for target in [(0, 0), (5, 2)]:
            assert est.values[target] == pytest.approx(
                robust_initial_transform(a, pol, target) / 8)
