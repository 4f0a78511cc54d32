import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_signal, tone
from sparsetfd.ctd import (
    CTDWindow,
    ambiguity_complex,
    ambiguity_real,
    combine_ambiguity,
    complex_lag_factor,
    ctd_direct,
    ctd_from_ambiguity,
    ctd_via_ambiguity,
    kernel_filter,
    moment,
)
from sparsetfd.errors import InvalidArgument, NumericError, NumericWarning
from sparsetfd.experiments import evaluate
from sparsetfd.ifest import IFTruth
from sparsetfd.signals import Signal, gen_fm_signal, two_component_spec
from sparsetfd.tfd import (
    AmbiguityKind,
    AmbiguityMatrix,
    ambiguity,
    centered_bins,
    cohen,
    gaussian_kernel,
    ones_kernel,
    tf_to_ambiguity,
    wigner,
)

W0 = 2 * np.pi * 8 / 64


@pytest.fixture(scope="module")
def bench():
    specs = two_component_spec()
    x = gen_fm_signal(specs, 90)
    return x, IFTruth.from_specs(specs, x)


def periodic_fm(N=256, depth=3.0):
    n = np.arange(N)
    phase = depth * np.cos(2 * np.pi * n / N)
    ifreq = -depth * 2 * np.pi / N * np.sin(2 * np.pi * n / N)
    return Signal(np.exp(1j * phase)), ifreq


def _random_amb(N, seed, kind):
    rng = np.random.default_rng(seed)
    return AmbiguityMatrix(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)), kind)


class TestMoment:
    def test_tone_closed_form(self):
        m = moment(Signal(tone(64, 8 / 64)), 4)
        k = centered_bins(64)
        expected = np.exp(1j * W0 * k)[None, :]
        assert np.abs(np.angle(m.values / expected)).max() < 1e-6
        np.testing.assert_allclose(np.abs(m.values), 1.0, atol=1e-6)

    @pytest.mark.parametrize("order", [2, 4])
    def test_constant_signal(self, order):
        m = moment(Signal(np.ones(32)), order)
        np.testing.assert_allclose(m.values, 1.0, atol=1e-12)

    def test_order2_is_wigner(self):
        x = Signal(random_signal(64, 1))
        via_moment = ctd_direct(x, 2)
        np.testing.assert_allclose(via_moment.values, wigner(x).values, atol=1e-8)

    def test_unsupported_order(self):
        with pytest.raises(InvalidArgument):
            moment(Signal(np.ones(16)), 3)

    def test_zero_signal_short_circuits(self):
        m = moment(Signal(np.zeros(16)), 4)
        assert not m.values.any() and not m.branch_mask.any()

    def test_branch_flags_raise_warning(self):
        # this tone sits exactly on the cut at one time in eight
        with pytest.warns(NumericWarning):
            m = moment(Signal(tone(64, 8 / 64)), 4)
        assert m.flag_density == pytest.approx(0.125)

    def test_values_finite_and_mask_shape(self, bench):
        m = moment(bench[0], 4)
        assert np.all(np.isfinite(m.values))
        assert m.branch_mask.shape == m.values.shape

    def test_unit_modulus_magnitude_is_complex_lag_factor(self):
        x, _ = periodic_fm(64)
        m = moment(x, 4)
        factor, _ = complex_lag_factor(x)
        np.testing.assert_allclose(np.abs(m.values), np.abs(factor), rtol=1e-6)

    def test_phase_residual_slope(self):
        """Fourth-order moment phase error shrinks like lag**5; the plain
        real-lag product only like lag**3."""
        x, ifreq = periodic_fm()
        N = x.N
        c = N // 2
        rows = np.arange(0, N, 7)
        ks = np.array([2, 3, 4, 6, 8, 12])
        R4 = moment(x, 4).values
        R2 = moment(x, 2).values

        def slope(R, lag_per_k):
            res = [np.sqrt(np.mean(np.angle(
                R[rows, c + k] * np.exp(-1j * ifreq[rows] * lag_per_k * k)) ** 2)) for k in ks]
            return np.polyfit(np.log(ks), np.log(res), 1)[0]

        assert slope(R4, 1.0) >= 4.5
        assert slope(R2, 2.0) < 3.5


class TestCtdDirect:
    def test_tone_axis(self):
        tf = ctd_direct(Signal(tone(64, 8 / 64)))
        assert np.all(np.argmax(np.abs(tf.values), axis=1) == 8)
        assert tf.freq_axis[8] == pytest.approx(8 / 64)

    def test_zero(self):
        assert not ctd_direct(Signal(np.zeros(16))).values.any()

    def test_lag_window(self):
        x = Signal(tone(32, 4 / 32))
        w = np.zeros(32)
        w[16] = 1.0
        tf = ctd_direct(x, 4, lag_window=w)
        np.testing.assert_allclose(np.abs(tf.values), 1.0, atol=1e-9)

    def test_beats_wigner_on_benchmark(self, bench):
        x, truth = bench
        ctd = evaluate(ctd_direct(x), truth, 2)
        wd = evaluate(wigner(x), truth, 2)
        assert all(c < w for c, w in zip(ctd.mse, wd.mse))

    def test_beats_cohen_on_benchmark(self, bench):
        x, truth = bench
        ctd = evaluate(ctd_direct(x), truth, 2)
        for delta in (120, 80, 20):
            co = evaluate(cohen(x, gaussian_kernel(90, delta)), truth, 2)
            assert all(c < w for c, w in zip(ctd.mse, co.mse))


class TestAmbiguityFunctions:
    def test_order2_real_is_plain(self):
        x = Signal(random_signal(32, 2))
        np.testing.assert_allclose(ambiguity_real(x, 2).values, ambiguity(x).values, atol=1e-8)
        assert ambiguity_real(x, 2).kind is AmbiguityKind.REAL_TIME

    @pytest.mark.parametrize("order", [2, 4])
    def test_origin_is_energy(self, order, bench):
        x = bench[0]
        assert ambiguity_real(x, order).origin == pytest.approx(x.energy, abs=1e-9)

    def test_tone_on_zero_doppler_row(self):
        a = ambiguity_real(Signal(tone(64, 5 / 64)), 4).values
        off = np.sum(np.abs(np.delete(a, 32, axis=0)) ** 2)
        assert off < 1e-6 * np.sum(np.abs(a) ** 2)

    def test_constant_complex_ambiguity(self):
        a = ambiguity_complex(Signal(np.ones(16))).values
        np.testing.assert_allclose(a[8], 16, atol=1e-12)
        np.testing.assert_allclose(np.delete(a, 8, axis=0), 0, atol=1e-12)

    def test_tone_complex_lag_factor_closed_form(self):
        k = centered_bins(64)
        factor, _ = complex_lag_factor(Signal(tone(64, 8 / 64)))
        np.testing.assert_allclose(factor, np.broadcast_to(np.exp(0.5j * W0 * k), factor.shape),
                                   atol=1e-9)

    def test_literal_imag_part_switch(self):
        x = Signal(tone(32, 4 / 32))
        a = ambiguity_complex(x, literal_imag_part=True)
        k = centered_bins(32)
        expected = 32 * np.sin(2 * np.pi * 4 / 32 * k)
        np.testing.assert_allclose(a.values[16], expected, atol=1e-8)

    def test_complex_needs_order_four(self):
        with pytest.raises(InvalidArgument):
            ambiguity_complex(Signal(np.ones(16)), 2)


class TestKernelFilter:
    def test_identity(self):
        a = _random_amb(16, 0, AmbiguityKind.REAL_TIME)
        np.testing.assert_array_equal(kernel_filter(a, ones_kernel(16)).values, a.values)

    def test_shrinks_and_keeps_origin(self):
        a = _random_amb(32, 1, AmbiguityKind.COMPLEX_TIME)
        out = kernel_filter(a, gaussian_kernel(32, 20))
        assert np.all(np.abs(out.values) <= np.abs(a.values))
        assert out.origin == a.origin
        assert out.kind is AmbiguityKind.COMPLEX_TIME

    def test_mismatch(self):
        with pytest.raises(InvalidArgument):
            kernel_filter(_random_amb(16, 0, "PLAIN"), ones_kernel(8))


def collapsed(ar, act):
    N = ar.shape[0]
    c = N // 2
    out = np.zeros((N, N), complex)
    for j, tau in enumerate(centered_bins(N)):
        if tau % 2:
            continue
        h = tau // 2 + c
        for i in range(N):
            out[i, j] = sum(ar[i1, h] * act[(i - i1 + c) % N, h] for i1 in range(N))
    return out


class TestCombine:
    def test_window_shapes(self):
        assert CTDWindow.make(16, "rect", 5).values.sum() == 5
        assert CTDWindow.make(16).values.sum() == 16
        assert CTDWindow.make(16, "delta").values.sum() == 1
        h = CTDWindow.make(16, "hann", 7).values
        np.testing.assert_allclose(h, h[::-1][np.r_[-1, 0:15]])
        with pytest.raises(InvalidArgument):
            CTDWindow.make(16, "rect", 4)
        with pytest.raises(InvalidArgument):
            CTDWindow.make(16, "gauss", 5)

    def test_full_width_lag_response_is_delta(self):
        w = CTDWindow.make(16).lag_response()
        expected = np.zeros(16)
        expected[8] = 1
        np.testing.assert_allclose(w, expected, atol=1e-12)

    @given(st.integers(0, 10_000))
    def test_full_window_collapse(self, seed):
        ar = _random_amb(16, seed, AmbiguityKind.REAL_TIME)
        act = _random_amb(16, seed + 1, AmbiguityKind.COMPLEX_TIME)
        out = combine_ambiguity(ar, act, CTDWindow.make(16))
        np.testing.assert_allclose(out.values, collapsed(ar.values, act.values), atol=1e-8)
        assert out.kind is AmbiguityKind.COMBINED

    def test_zero_doppler_impulse_row(self):
        ar = _random_amb(16, 3, AmbiguityKind.REAL_TIME)
        unit = np.zeros((16, 16), complex)
        unit[8, :] = 1.0
        out = combine_ambiguity(ar, AmbiguityMatrix(unit, AmbiguityKind.COMPLEX_TIME)).values
        taus = centered_bins(16)
        for j, tau in enumerate(taus):
            if tau % 2 == 0:
                np.testing.assert_allclose(out[:, j], ar.values[:, tau // 2 + 8], atol=1e-10)
            else:
                np.testing.assert_allclose(out[:, j], 0, atol=1e-10)

    def test_convolution_theorem(self):
        N = 8
        rng = np.random.default_rng(4)
        r1 = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        r2 = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))

        def doppler_dft(r):
            return np.fft.fftshift(np.fft.fft(r, axis=0), axes=0)

        ar = AmbiguityMatrix(doppler_dft(r1), AmbiguityKind.REAL_TIME)
        act = AmbiguityMatrix(doppler_dft(r2), AmbiguityKind.COMPLEX_TIME)
        out = combine_ambiguity(ar, act).values
        for j, tau in enumerate(centered_bins(N)):
            if tau % 2 == 0:
                h = tau // 2 + N // 2
                np.testing.assert_allclose(out[:, j], N * doppler_dft(r1[:, h] * r2[:, h]),
                                           atol=1e-8)

    def test_kind_checks(self):
        a = _random_amb(8, 0, AmbiguityKind.PLAIN)
        b = _random_amb(8, 0, AmbiguityKind.COMPLEX_TIME)
        with pytest.raises(InvalidArgument):
            combine_ambiguity(a, b)


class TestCtdFromAmbiguity:
    def test_round_trip(self):
        x, _ = periodic_fm(64)
        tf = ctd_direct(x)
        back = ctd_from_ambiguity(AmbiguityMatrix(tf_to_ambiguity(tf.values)))
        np.testing.assert_allclose(back.values, tf.values, atol=1e-8)

    def test_zero(self):
        out = ctd_from_ambiguity(AmbiguityMatrix(np.zeros((16, 16))), take_real=True)
        assert not out.values.any()

    def test_residue_guard(self, bench):
        a = AmbiguityMatrix(tf_to_ambiguity(ctd_direct(bench[0]).values))
        with pytest.raises(NumericError):
            ctd_from_ambiguity(a, take_real=True)

    def test_tone_via_ambiguity(self):
        tf = ctd_via_ambiguity(Signal(tone(64, 8 / 64)))
        assert np.all(np.argmax(np.abs(tf.values), axis=1) == 8)

    def test_cross_path_agreement(self, bench):
        x, _ = bench
        direct = np.argmax(np.abs(ctd_direct(x).values), axis=1)
        via = ctd_via_ambiguity(x, gaussian_kernel(90, 120), CTDWindow.make(90, "hann"))
        other = np.argmax(np.abs(via.values), axis=1)
        d = np.abs((direct - other + 45) % 90 - 45)[9:81]
        assert np.mean(d <= 1) >= 0.9
