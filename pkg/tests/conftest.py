import numpy as np
import pytest

from spectrashift import Corpus, TimeSeries


def brute_force_spectrum(values: np.ndarray) -> np.ndarray:
    """O(L^2) one-sided amplitude spectrum straight from the DFT definition.

    Independent oracle for the FFT-backed implementation: no fft calls.
    """
    values = np.asarray(values, dtype=np.float64)
    length = values.size
    n = np.arange(length)
    mags = np.empty(length // 2 + 1)
    for b in range(length // 2 + 1):
        angle = 2.0 * np.pi * b * n / length
        re = float(np.sum(values * np.cos(angle)))
        im = float(-np.sum(values * np.sin(angle)))
        mag = np.hypot(re, im) / length
        if b != 0 and not (length % 2 == 0 and b == length // 2):
            mag *= 2.0
        mags[b] = mag
    return mags


def sinusoid(length: int, freq: float, amp: float = 1.0, phase: float = 0.0) -> np.ndarray:
    t = np.arange(length)
    return amp * np.sin(2.0 * np.pi * freq * t + phase)


def tone_series(length: int, bins_amps, phase: float = 0.0) -> TimeSeries:
    """Sum of on-bin sinusoids given (bin, amplitude) pairs."""
    values = np.zeros(length)
    for b, amp in bins_amps:
        values += sinusoid(length, b / length, amp, phase)
    return TimeSeries(values)


@pytest.fixture
def two_tone_series() -> TimeSeries:
    values = sinusoid(128, 5 / 128, 0.7) + sinusoid(128, 20 / 128, 0.3)
    return TimeSeries(values)


@pytest.fixture
def small_corpus() -> Corpus:
    rng = np.random.default_rng(1234)
    series = []
    for _ in range(12):
        b = int(rng.integers(6, 20))
        series.append(tone_series(128, [(b, 1.0)], phase=float(rng.uniform(0, 2 * np.pi))))
    return Corpus(series=series, name="tones")
