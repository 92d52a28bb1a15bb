import math

import numpy as np
import pytest

from xplab.besov import (
    NyquistError,
    SampledField,
    besov_breakdown,
    besov_norm_estimate,
    bandlimit_check,
    lp_piece,
    make_window,
    sample_field,
)
from xplab.counterexample import build_instance, eta, triangular_coeffs
from xplab.sampling import default_piece_range, sample_eta_1d, sample_instance, sample_phi_2d


@pytest.fixture(scope="module")
def window():
    return make_window()


class TestWindow:
    def test_endpoint_values(self, window):
        assert window(0.5) == 0.0
        assert window(1.0) == pytest.approx(1.0, abs=1e-15)
        assert window(2.0) == pytest.approx(0.0, abs=1e-15)
        assert window(3.0) == 0.0
        assert window(0.1) == 0.0

    def test_two_scale_identity(self, window):
        s = np.linspace(1.0, 2.0, 1000)
        assert np.abs(window(s) + window(s / 2.0) - 1.0).max() < 1e-10

    def test_spot_pair(self, window):
        assert window(1.3) + window(0.65) == pytest.approx(1.0, abs=1e-12)

    def test_partition_of_unity(self, window):
        s = np.logspace(-3, 3, 2000)
        total = sum(window(s / 2.0**n) for n in range(-20, 21))
        assert np.abs(total - 1.0).max() < 1e-9

    def test_nonnegative_and_bounded(self, window):
        s = np.linspace(0.0, 3.0, 4000)
        vals = window(s)
        assert np.all(vals >= 0.0)
        assert np.all(vals <= 1.0 + 1e-15)

    def test_profile_monotone(self, window):
        t = np.linspace(0.5, 1.0, 200)
        h = window.h(t)
        assert np.all(np.diff(h) >= -1e-15)


class TestSampledField:
    def test_axis_and_frequencies(self):
        f = SampledField((-1.0,), (0.5,), np.zeros(8))
        assert np.allclose(f.axis(0), -1.0 + 0.5 * np.arange(8))
        assert f.nyquist() == pytest.approx(2.0 * math.pi)

    def test_rejects_bad_rank(self):
        with pytest.raises(ValueError):
            SampledField((0.0,), (1.0, 1.0), np.zeros((4, 4)))

    def test_pow2_required_for_transforms(self, window):
        f = SampledField((0.0,), (0.1,), np.zeros(12))
        with pytest.raises(ValueError, match="power-of-two"):
            lp_piece(f, 0, window)


class TestLpPiece:
    def test_constant_field_has_no_pieces(self, window):
        f = sample_field(lambda x: 0.0 * x + 3.7, (-16 * math.pi,), (math.pi / 8,), (256,))
        for n in range(-6, 3):
            assert np.abs(lp_piece(f, n, window).samples).max() < 1e-12

    def test_pure_sine_survives_only_at_unit_scale(self, window):
        f = sample_field(np.sin, (-32 * math.pi,), (math.pi / 16,), (1024,))
        assert np.abs(lp_piece(f, 0, window).samples - f.samples).max() < 1e-10
        for n in (-2, -1, 1, 2, 3):
            assert np.abs(lp_piece(f, n, window).samples).max() < 1e-12

    def test_band_limited_reconstruction(self, window):
        f = sample_eta_1d(extent=64 * math.pi, points=2**13)
        total = np.zeros_like(f.samples, dtype=complex)
        for n in range(-20, 6):
            total += lp_piece(f, n, window).samples
        mean = f.samples.mean()
        assert np.abs(total - (f.samples - mean)).max() < 1e-6

    def test_piece_spectrum_confined_to_annulus(self, window):
        f = sample_eta_1d(extent=32 * math.pi, points=2**12)
        n = -1
        piece = lp_piece(f, n, window)
        spec = np.abs(np.fft.fft(piece.samples))
        xi = np.abs(piece.freq_axis(0))
        outside = (xi < 2.0 ** (n - 1)) | (xi > 2.0 ** (n + 1))
        assert spec[outside].max() < 1e-12 * spec.max()

    def test_nyquist_guard_names_band(self, window):
        f = sample_field(np.sin, (-8 * math.pi,), (math.pi / 2,), (32,))
        with pytest.raises(NyquistError, match=r"\[2, 8\]"):
            lp_piece(f, 2, window)


class TestBesovEstimate:
    def test_zero_field(self, window):
        f = SampledField((0.0,), (0.5,), np.zeros(64))
        assert besov_norm_estimate(f, window, -10, 1) == 0.0

    def test_eta_upper_pieces_negligible(self, window):
        f = sample_eta_1d(extent=64 * math.pi, points=2**14)
        breakdown = besov_breakdown(f, window, -20, 5)
        assert 0.2 < breakdown.total < 1.0
        for n in range(2, 6):
            assert breakdown.piece_sup[n] < 1e-8

    def test_tail_bound_reported(self, window):
        f = sample_eta_1d(extent=32 * math.pi, points=2**12)
        breakdown = besov_breakdown(f, window, -5, 3)
        assert breakdown.tail_bound == pytest.approx(2.0**-5 * breakdown.sup_abs)
        assert breakdown.total >= sum(
            2.0**n * s for n, s in breakdown.piece_sup.items())

    def test_scaling_covariance(self, window):
        base = sample_eta_1d(extent=64 * math.pi, points=2**13)
        ref = besov_norm_estimate(base, window, -14, 5)
        for eps in (0.5, 0.25):
            scaled = SampledField(
                (eps * base.starts[0],), (eps * base.steps[0],), eps * base.samples)
            got = besov_norm_estimate(scaled, window, -14, 5)
            assert abs(got - ref) / ref < 0.02

    def test_range_validation(self, window):
        f = sample_eta_1d(extent=8 * math.pi, points=256)
        with pytest.raises(ValueError):
            besov_norm_estimate(f, window, 3, -3)


class TestBandlimit:
    def test_slow_sine_inside(self):
        f = sample_field(lambda x: np.sin(x / 2.0), (-32 * math.pi,), (math.pi / 16,), (1024,))
        assert bandlimit_check(f, 1.0) < 1e-20

    def test_eta_inside_unit_band(self):
        f = sample_eta_1d(extent=64 * math.pi, points=2**14)
        assert bandlimit_check(f, 1.0) < 1e-6

    def test_fast_sine_outside(self):
        f = sample_field(lambda x: np.sin(4.0 * x), (-32 * math.pi,), (math.pi / 16,), (1024,))
        assert bandlimit_check(f, 1.0) > 0.999

    def test_rejects_bad_sigma(self):
        f = sample_eta_1d(extent=8 * math.pi, points=256)
        with pytest.raises(ValueError):
            bandlimit_check(f, 0.0)


@pytest.fixture(scope="module")
def small_instance_field():
    inst = build_instance(3)
    return sample_instance(inst, step=math.pi / 4, margin=4 * math.pi, yspan=8 * math.pi)


class TestSeparable:

    def test_matches_dense_pipeline(self, window, small_instance_field):
        sep = small_instance_field
        dense = sep.dense()
        lo, hi = default_piece_range(sep, -8, 5)
        got = besov_breakdown(sep, window, lo, hi)
        want = besov_breakdown(dense, window, lo, hi)
        assert got.sup_abs == pytest.approx(want.sup_abs, rel=1e-12)
        for n in range(lo, hi + 1):
            assert got.piece_sup[n] == pytest.approx(want.piece_sup[n], abs=1e-12)
        assert got.total == pytest.approx(want.total, rel=1e-10)

    def test_bandlimit_matches_dense(self, small_instance_field):
        sep = small_instance_field
        dense = sep.dense()
        sigma = math.sqrt(3.0)
        assert bandlimit_check(sep, sigma) == pytest.approx(
            bandlimit_check(dense, sigma), abs=1e-12)
        assert bandlimit_check(sep, sigma) < 1e-9

    def test_instance_band_limited(self, small_instance_field):
        # each axis carries the unit band; the 3-D radius is sqrt(3)
        assert bandlimit_check(small_instance_field, math.sqrt(3.0)) < 1e-9

    def test_phi_2d_band_limited(self):
        f = sample_phi_2d(triangular_coeffs(4))
        assert bandlimit_check(f, math.sqrt(2.0)) < 1e-9

    def test_estimates_stable_across_small_sizes(self, window):
        totals = []
        for n in (4, 8):
            f3 = sample_instance(build_instance(n))
            lo, hi = default_piece_range(f3, -10, 5)
            totals.append(besov_breakdown(f3, window, lo, hi).total)
        spread = (max(totals) - min(totals)) / min(totals)
        assert spread < 0.10
