import numpy as np
import pytest
from hypothesis import given, strategies as st

from melostyle import (
    CentsTrack,
    PeakSet,
    PitchHistogram,
    UndefinedFeatureError,
    build_histogram,
    ed,
    fold_deviation,
    mipd,
    mpd,
    pick_peaks,
    tonic_distance,
    wpd,
)


def cents_track(values, tonic=220.0):
    return CentsTrack(cents=np.asarray(values, dtype=float), tonic_hz=tonic)


def folded_hist(counts):
    return PitchHistogram(
        counts=np.asarray(counts, dtype=float), bin_width=8.0, origin=0.0, folded=True
    )


def peaks(*pairs):
    locations, heights = zip(*pairs)
    return PeakSet(locations=np.array(locations), heights=np.array(heights))


def brute_force_fold(value):
    """Independent fold-to-[0,50] via explicit distance to the nearest grid
    multiple of 100 cents."""
    return min(abs(value - 100.0 * round(value / 100.0)), 50.0)


class TestBuildHistogram:
    def test_single_value_single_bin(self):
        hist = build_histogram(cents_track(np.zeros(500)), folded=True)
        assert hist.counts.sum() == 500
        assert np.count_nonzero(hist.counts) == 1

    def test_fold_wraps_octave(self):
        c = np.tile([0.0, 1203.0], 50)
        hist = build_histogram(cents_track(c), folded=True)
        # 1203 mod 1200 = 3: same 8-cent bin as 0.
        assert hist.counts[0] == 100
        assert np.count_nonzero(hist.counts) == 1

    def test_unfolded_keeps_octaves_apart(self):
        c = np.tile([0.0, 1203.0], 50)
        hist = build_histogram(cents_track(c), folded=False)
        assert np.count_nonzero(hist.counts) == 2

    def test_counts_sum_to_voiced_frames(self):
        rng = np.random.default_rng(1)
        c = np.where(rng.uniform(size=400) < 0.3, np.nan, rng.uniform(-500, 1900, 400))
        hist = build_histogram(cents_track(c), folded=True)
        assert hist.counts.sum() == np.count_nonzero(~np.isnan(c))

    def test_all_unvoiced_undefined(self):
        with pytest.raises(UndefinedFeatureError):
            build_histogram(cents_track(np.full(5, np.nan)), folded=True)

    def test_folded_bin_count(self):
        hist = build_histogram(cents_track(np.zeros(10)), folded=True, bin_width=8.0)
        assert len(hist) == 150


class TestPickPeaks:
    def test_single_clean_bump(self):
        centers = folded_hist(np.zeros(150)).centers
        d = np.minimum(np.abs(centers - 702), 1200 - np.abs(centers - 702))
        hist = folded_hist(100 * np.exp(-0.5 * (d / 20.0) ** 2))
        result = pick_peaks(hist)
        assert len(result) == 1
        assert abs(result.locations[0] - 702) <= 8.0

    def test_two_bumps_with_noise(self):
        rng = np.random.default_rng(7)
        centers = folded_hist(np.zeros(150)).centers
        counts = np.zeros(150)
        for c in (0.0, 500.0):
            d = np.minimum(np.abs(centers - c), 1200 - np.abs(centers - c))
            counts += np.exp(-0.5 * (d / 15.0) ** 2)
        counts += rng.uniform(0, 0.02 * counts.max(), 150)
        result = pick_peaks(folded_hist(counts * 50))
        assert len(result) == 2

    def test_uniform_histogram_no_peaks(self):
        assert len(pick_peaks(folded_hist(np.full(150, 33.0)))) == 0

    def test_refined_height_is_raw_count(self):
        centers = folded_hist(np.zeros(150)).centers
        d = np.abs(centers - 400)
        counts = 100 * np.exp(-0.5 * (d / 20.0) ** 2)
        hist = folded_hist(counts)
        result = pick_peaks(hist)
        idx = int(np.argmin(np.abs(centers - result.locations[0])))
        assert result.heights[0] == counts[idx]

    def test_matches_true_modes_oracle(self):
        # Well-separated bumps, 10:1 SNR: detected peaks must coincide with
        # the argmax bins of the noiseless components.
        rng = np.random.default_rng(123)
        centers = folded_hist(np.zeros(150)).centers
        truth = [150.0, 600.0, 1000.0]
        clean = np.zeros(150)
        for c in truth:
            d = np.minimum(np.abs(centers - c), 1200 - np.abs(centers - c))
            clean += rng.uniform(0.7, 1.0) * np.exp(-0.5 * (d / 15.0) ** 2)
        noisy = clean * 100 + rng.uniform(0, 10.0, 150)
        result = pick_peaks(folded_hist(noisy))
        assert len(result) == 3
        for loc, c in zip(result.locations, truth):
            assert abs(loc - c) <= 8.0

    def test_unfolded_histogram_supported(self):
        hist = PitchHistogram(
            counts=np.concatenate([np.zeros(20), [5, 40, 90, 35, 8], np.zeros(20)]),
            bin_width=8.0,
            origin=-1000.0,
            folded=False,
        )
        result = pick_peaks(hist)
        assert len(result) == 1
        assert result.locations[0] == hist.centers[22]


class TestTonicDistance:
    def test_mass_near_tonic(self):
        rng = np.random.default_rng(0)
        c = rng.normal(0.0, 15.0, 2000)
        hist = build_histogram(cents_track(c), folded=False)
        assert abs(tonic_distance(hist)) <= 20.0

    def test_mass_near_fifth(self):
        rng = np.random.default_rng(0)
        c = rng.normal(700.0, 15.0, 2000)
        hist = build_histogram(cents_track(c), folded=False)
        assert abs(tonic_distance(hist) - 700.0) <= 20.0

    def test_exact_negative_location(self):
        hist = build_histogram(cents_track(np.full(100, -300.0)), folded=False)
        assert tonic_distance(hist) == -300.0

    def test_folded_rejected(self):
        hist = build_histogram(cents_track(np.zeros(10)), folded=True)
        with pytest.raises(ValueError):
            tonic_distance(hist)


class TestFoldDeviation:
    def test_semitone_plus_ten(self):
        assert fold_deviation(110.0) == 10.0

    def test_pair_distance_folds_to_twenty(self):
        assert fold_deviation(abs(110.0 - 290.0)) == 20.0

    def test_on_grid(self):
        assert fold_deviation(700.0) == 0.0

    @given(st.floats(min_value=0.0, max_value=10000.0))
    def test_range_and_period(self, value):
        d = fold_deviation(value)
        assert 0.0 <= d <= 50.0
        assert fold_deviation(value + 100.0) == pytest.approx(d, abs=1e-9)

    @given(st.floats(min_value=0.0, max_value=10000.0))
    def test_matches_nearest_grid_distance(self, value):
        assert fold_deviation(value) == pytest.approx(brute_force_fold(value), abs=1e-9)


class TestMicrotonality:
    def test_mipd_worked_example(self):
        assert mipd(peaks((110.0, 5.0), (290.0, 3.0))) == 20.0

    def test_mipd_grid_interval(self):
        assert mipd(peaks((0.0, 5.0), (700.0, 3.0))) == 0.0

    def test_mipd_single_peak(self):
        assert mipd(peaks((110.0, 5.0))) == 0.0

    def test_mpd_values(self):
        assert mpd(peaks((0.0, 1.0), (498.0, 1.0), (702.0, 1.0))) == 2.0
        assert mpd(peaks((0.0, 1.0), (145.0, 1.0))) == 45.0
        assert mpd(peaks((0.0, 1.0), (400.0, 1.0))) == 0.0

    def test_mpd_empty(self):
        assert mpd(PeakSet(locations=np.array([]), heights=np.array([]))) == 0.0

    def test_wpd_single(self):
        assert wpd(peaks((330.0, 4.0))) == pytest.approx(30.0)

    def test_wpd_equal_heights(self):
        assert wpd(peaks((0.0, 7.0), (140.0, 7.0))) == pytest.approx(20.0)

    def test_wpd_on_grid(self):
        assert wpd(peaks((0.0, 2.0), (500.0, 9.0))) == 0.0

    def test_wpd_empty_undefined(self):
        with pytest.raises(UndefinedFeatureError):
            wpd(PeakSet(locations=np.array([]), heights=np.array([])))

    def test_grid_shift_invariance(self):
        rng = np.random.default_rng(4)
        locations = np.sort(rng.uniform(0, 1100, 5))
        heights = rng.uniform(1, 10, 5)
        ps = PeakSet(locations=locations, heights=heights)
        shifted = PeakSet(locations=locations + 100.0, heights=heights)
        assert mipd(shifted) == pytest.approx(mipd(ps))
        assert mpd(shifted) == pytest.approx(mpd(ps))


class TestEquitemperedDensity:
    def test_all_on_grid(self):
        c = np.repeat([0.0, 200.0, 700.0], 100)
        hist = build_histogram(cents_track(c), folded=True)
        assert ed(hist) == 1.0

    def test_uniform_about_forty_percent(self):
        hist = folded_hist(np.ones(150))
        assert ed(hist, dev=20.0) == pytest.approx(0.4, abs=8.0 / 100.0)

    def test_half_grid_offsets_zero(self):
        c = np.repeat([50.0, 150.0, 650.0], 50)
        hist = build_histogram(cents_track(c), folded=True)
        assert ed(hist) == 0.0

    def test_scale_invariance(self):
        rng = np.random.default_rng(8)
        counts = rng.uniform(0, 10, 150)
        assert ed(folded_hist(counts)) == pytest.approx(ed(folded_hist(counts * 12.5)))

    def test_dev_validated(self):
        hist = folded_hist(np.ones(150))
        with pytest.raises(ValueError):
            ed(hist, dev=60.0)

    def test_unfolded_rejected(self):
        hist = build_histogram(cents_track(np.zeros(10)), folded=False)
        with pytest.raises(ValueError):
            ed(hist)
