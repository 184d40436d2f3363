import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spectrashift import (
    Corpus,
    CorpusSpectralSummary,
    FrequencyBand,
    band_iou,
    spectral_overlap,
    summarize_corpus,
)
from spectrashift.errors import (
    IncompatibleSummariesError,
    InsufficientDataError,
    InvalidInputError,
)
from spectrashift.overlap import (
    histogram_overlap,
    overlap_svg,
    summary_document,
    summary_from_document,
)
from spectrashift.spectral import TimeSeries

from conftest import tone_series


def summary_with(band, counts, unit="normalized", f_nyquist=0.5):
    return CorpusSpectralSummary(
        band=band,
        counts=np.asarray(counts, dtype=np.int64),
        n_series=int(np.sum(counts)),
        top_k=5,
        unit=unit,
        f_nyquist=f_nyquist,
    )


class TestSummarizeCorpus:
    def test_identical_tones_land_in_one_bin(self):
        corpus = Corpus(series=[tone_series(64, [(8, 1.0)]) for _ in range(6)], name="t")
        summary = summarize_corpus(corpus, top_k=1, bins=64)
        masses = summary.masses
        bin_of_peak = int(0.125 / (0.5 / 64))
        assert masses[bin_of_peak] == pytest.approx(1.0)
        assert summary.n_series == 6

    def test_two_tone_corpus_matches_pooled_counts(self):
        series = [tone_series(64, [(4, 1.0)]) for _ in range(3)]
        series += [tone_series(64, [(24, 1.0)]) for _ in range(5)]
        corpus = Corpus(series=series, name="t")
        summary = summarize_corpus(corpus, top_k=1, bins=32)
        # 4/64 -> bin 4/64 / (0.5/32) = 4; 24/64 -> bin 24
        assert summary.counts[4] == 3
        assert summary.counts[24] == 5
        assert summary.counts.sum() == 8

    def test_all_degenerate_corpus_is_an_error(self):
        corpus = Corpus(series=[TimeSeries(np.full(16, 2.0)) for _ in range(3)], name="flat")
        with pytest.raises(InsufficientDataError):
            summarize_corpus(corpus)

    def test_bad_bin_count(self, small_corpus):
        with pytest.raises(InvalidInputError):
            summarize_corpus(small_corpus, bins=0)


class TestBandIoU:
    def test_self_is_exactly_one(self):
        band = FrequencyBand(0.1, 0.3)
        assert band_iou(band, band) == 1.0

    def test_disjoint_is_zero(self):
        assert band_iou(FrequencyBand(0.0, 0.1), FrequencyBand(0.2, 0.3)) == 0.0

    def test_touching_bands_have_zero_overlap(self):
        assert band_iou(FrequencyBand(0.0, 0.1), FrequencyBand(0.1, 0.2)) == 0.0

    def test_interval_arithmetic_fixture(self):
        iou = band_iou(FrequencyBand(0.0, 10.0), FrequencyBand(5.0, 15.0))
        assert abs(iou - 1.0 / 3.0) <= 1e-12


class TestSpectralOverlap:
    def test_self_overlap_is_exactly_one(self):
        summary = summary_with(FrequencyBand(0.1, 0.3), [0, 3, 5, 1])
        report = spectral_overlap(summary, summary)
        assert report.band_iou == 1.0
        assert report.histogram_overlap == 1.0
        assert report.verdict == "high"

    def test_disjoint_everything_is_zero(self):
        a = summary_with(FrequencyBand(0.1, 0.2), [4, 0, 0, 0])
        b = summary_with(FrequencyBand(0.3, 0.4), [0, 0, 0, 7])
        report = spectral_overlap(a, b)
        assert report.band_iou == 0.0
        assert report.histogram_overlap == 0.0
        assert report.verdict == "low"

    def test_moderate_verdict_band(self):
        a = summary_with(FrequencyBand(0.1, 0.3), [3, 1, 0, 0])
        b = summary_with(FrequencyBand(0.1, 0.3), [0, 1, 3, 0])
        report = spectral_overlap(a, b)
        # min masses: 0 + 1/4 + 0 + 0 = 0.25
        assert report.histogram_overlap == 0.25
        assert report.verdict == "moderate"

    def test_unit_mismatch(self):
        a = summary_with(FrequencyBand(0.1, 0.3), [1, 1])
        b = summary_with(FrequencyBand(0.1, 0.3), [1, 1], unit="hz", f_nyquist=100.0)
        with pytest.raises(IncompatibleSummariesError):
            spectral_overlap(a, b)

    def test_binning_mismatch(self):
        a = summary_with(FrequencyBand(0.1, 0.3), [1, 1])
        b = summary_with(FrequencyBand(0.1, 0.3), [1, 1, 1])
        with pytest.raises(IncompatibleSummariesError):
            spectral_overlap(a, b)

    def test_symmetry_exact(self):
        rng = np.random.default_rng(9)
        a = summary_with(FrequencyBand(0.05, 0.2), rng.integers(0, 10, size=16) + [1] * 16)
        b = summary_with(FrequencyBand(0.1, 0.4), rng.integers(0, 10, size=16) + [1] * 16)
        ab = spectral_overlap(a, b)
        ba = spectral_overlap(b, a)
        assert ab.band_iou == ba.band_iou
        assert ab.histogram_overlap == ba.histogram_overlap

    @given(
        counts_a=st.lists(st.integers(min_value=0, max_value=50), min_size=8, max_size=8),
        counts_b=st.lists(st.integers(min_value=0, max_value=50), min_size=8, max_size=8),
        bounds=st.tuples(
            st.floats(min_value=0.0, max_value=0.4),
            st.floats(min_value=0.01, max_value=0.1),
            st.floats(min_value=0.0, max_value=0.4),
            st.floats(min_value=0.01, max_value=0.1),
        ),
    )
    @settings(max_examples=60, deadline=None)
    def test_scores_bounded(self, counts_a, counts_b, bounds):
        if sum(counts_a) == 0 or sum(counts_b) == 0:
            return
        la, wa, lb, wb = bounds
        a = summary_with(FrequencyBand(la, la + wa), counts_a)
        b = summary_with(FrequencyBand(lb, lb + wb), counts_b)
        report = spectral_overlap(a, b)
        assert 0.0 <= report.band_iou <= 1.0
        assert 0.0 <= report.histogram_overlap <= 1.0

    @given(
        shift_small=st.floats(min_value=0.0, max_value=0.2),
        extra=st.floats(min_value=0.0, max_value=0.2),
    )
    @settings(max_examples=50, deadline=None)
    def test_band_iou_monotone_under_shift_away(self, shift_small, extra):
        base = FrequencyBand(0.1, 0.2)
        near = base.shifted(shift_small)
        far = base.shifted(shift_small + extra)
        assert band_iou(base, far) <= band_iou(base, near) + 1e-15


class TestHistogramOverlapExactness:
    def test_count_arithmetic_is_exact(self):
        # 3 bins of 1/3 each: the count-based form must still give exactly 1.0
        summary = summary_with(FrequencyBand(0.1, 0.2), [1, 1, 1])
        assert histogram_overlap(summary, summary) == 1.0

    def test_known_fraction(self):
        a = summary_with(FrequencyBand(0.1, 0.2), [2, 2, 0])
        b = summary_with(FrequencyBand(0.1, 0.2), [1, 1, 2])
        # min(2/4,1/4) + min(2/4,1/4) + 0 = 1/2
        assert histogram_overlap(a, b) == 0.5


class TestSummaryDocument:
    def test_round_trip(self, small_corpus):
        summary = summarize_corpus(small_corpus, top_k=2, bins=32)
        doc = summary_document(summary)
        assert doc["version"] == 1
        parsed = summary_from_document(doc)
        assert parsed.band.low == summary.band.low
        assert parsed.band.high == summary.band.high
        assert np.array_equal(parsed.counts, summary.counts)
        assert parsed.unit == summary.unit
        report = spectral_overlap(summary, parsed)
        assert report.histogram_overlap == 1.0

    def test_malformed_document(self):
        with pytest.raises(InvalidInputError):
            summary_from_document({"version": 1, "unit": "normalized"})


def test_overlap_svg_is_valid_xml(small_corpus):
    summary = summarize_corpus(small_corpus, bins=32)
    svg = overlap_svg(summary, summary, "left", "right")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert "left" in svg and "right" in svg
