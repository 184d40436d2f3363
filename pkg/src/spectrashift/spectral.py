"""Discrete Fourier analysis: one-sided spectra, dominant peaks, corpus bands.

Frequencies are carried internally as normalized cycles per sample in
(0, 0.5]; Hz show up only at I/O boundaries when a sample rate is known.
Magnitudes are calibrated so a unit-amplitude sinusoid on a DFT bin reads
as amplitude 1.0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, InvalidInputError

NYQUIST = 0.5
MIN_LENGTH = 4

# Bins this far (relative) below the strongest one are treated as numeric
# zero, so transform round-off never surfaces as a spurious peak.
_REL_FLOOR = 1e-12

WINDOWS = ("rect", "hann")


@dataclass(frozen=True)
class TimeSeries:
    """Fixed-length, single-channel real sequence.

    ``sample_rate`` is optional metadata (samples per second); when absent
    all frequencies attached to the series are normalized cycles/sample.
    """

    values: np.ndarray
    sample_rate: float | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise InvalidInputError(f"series must be 1-D, got shape {values.shape}")
        if values.size < MIN_LENGTH:
            raise InvalidInputError(
                f"series needs at least {MIN_LENGTH} values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("series contains non-finite values")
        if self.sample_rate is not None and not self.sample_rate > 0:
            raise InvalidInputError(f"sample_rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, "values", values)

    @property
    def length(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.length


@dataclass(frozen=True)
class SpectralComponent:
    """One dominant component: normalized frequency in (0, 0.5] and amplitude."""

    frequency: float
    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "amplitude", float(self.amplitude))
        if not (0.0 < self.frequency <= NYQUIST):
            raise InvalidInputError(
                f"frequency must lie in (0, {NYQUIST}], got {self.frequency}"
            )
        if not (np.isfinite(self.amplitude) and self.amplitude >= 0.0):
            raise InvalidInputError(f"amplitude must be finite and >= 0, got {self.amplitude}")


@dataclass(frozen=True)
class SpectralProfile:
    """Top peaks of one series, strongest first (frequency breaks ties).

    An empty component tuple flags a degenerate (constant or silent) series;
    that is a value, not an error.
    """

    components: tuple[SpectralComponent, ...]
    top_k: int
    source_length: int

    def __post_init__(self):
        if self.top_k < 1:
            raise InvalidInputError(f"top_k must be >= 1, got {self.top_k}")
        if len(self.components) > self.top_k:
            raise InvalidInputError("profile holds more components than top_k")
        for prev, nxt in zip(self.components, self.components[1:]):
            if nxt.amplitude > prev.amplitude:
                raise InvalidInputError("components must be ordered by descending amplitude")
            if nxt.amplitude == prev.amplitude and nxt.frequency < prev.frequency:
                raise InvalidInputError("amplitude ties must be ordered by ascending frequency")

    @property
    def is_degenerate(self) -> bool:
        return not self.components

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency for c in self.components], dtype=np.float64)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for c in self.components], dtype=np.float64)


@dataclass(frozen=True)
class FrequencyBand:
    """Closed frequency interval [low, high], low < high."""

    low: float
    high: float

    def __post_init__(self):
        object.__setattr__(self, "low", float(self.low))
        object.__setattr__(self, "high", float(self.high))
        if not (np.isfinite(self.low) and np.isfinite(self.high)):
            raise InvalidInputError("band bounds must be finite")
        if not 0.0 <= self.low < self.high:
            raise InvalidInputError(
                f"band requires 0 <= low < high, got [{self.low}, {self.high}]"
            )

    @property
    def width(self) -> float:
        return self.high - self.low

    def shifted(self, delta: float) -> "FrequencyBand":
        return FrequencyBand(self.low + delta, self.high + delta)

    def contains(self, frequency: float) -> bool:
        return self.low <= frequency <= self.high


def _window(length: int, window: str) -> np.ndarray | None:
    if window == "rect":
        return None
    if window == "hann":
        return np.hanning(length)
    raise InvalidInputError(f"unknown window {window!r}; expected one of {WINDOWS}")


def one_sided_magnitudes(values: np.ndarray, window: str = "rect") -> np.ndarray:
    """Amplitude spectrum over bins 0..floor(L/2).

    Bin b holds 2*|X_b|/L for interior bins and |X_b|/L at DC and (for even
    L) Nyquist, so an on-bin unit sinusoid reads as 1.0 and the DC bin reads
    as the mean. Accepts a (L,) series or an (N, L) batch; returns matching
    shape with the last axis replaced by floor(L/2)+1 bins.
    """
    values = np.asarray(values, dtype=np.float64)
    length = values.shape[-1]
    win = _window(length, window)
    if win is not None:
        # rescale so an on-bin sinusoid still reads close to its amplitude
        values = values * win * (length / win.sum())
    mags = np.abs(np.fft.rfft(values, axis=-1)) / length
    mags[..., 1:] *= 2.0
    if length % 2 == 0:
        mags[..., -1] /= 2.0
    return mags


def power_spectrum(series: TimeSeries, window: str = "rect"):
    """Return (frequencies, magnitudes) over bins 0..floor(L/2).

    Frequencies are b/L, scaled by the sample rate when the series has one.
    """
    mags = one_sided_magnitudes(series.values, window)
    rate = series.sample_rate if series.sample_rate is not None else 1.0
    freqs = np.arange(mags.size, dtype=np.float64) * (rate / series.length)
    return freqs, mags


def extract_dominant(series: TimeSeries, top_k: int = 5, window: str = "rect") -> SpectralProfile:
    """Pick the top_k strongest local spectral peaks (DC excluded).

    A bin qualifies only if its magnitude is >= both immediate neighbors,
    which keeps leakage shoulders of a single tone from counting as
    separate frequencies. Constant or silent series yield an empty,
    degenerate profile.
    """
    if top_k < 1:
        raise InvalidInputError(f"top_k must be >= 1, got {top_k}")
    length = series.length
    if np.ptp(series.values) == 0.0:
        return SpectralProfile((), top_k, length)

    mags = one_sided_magnitudes(series.values, window)
    interior = mags[1:]
    peak_ceiling = interior.max()
    if not peak_ceiling > 0.0:
        return SpectralProfile((), top_k, length)

    left = mags[:-1]
    right = np.concatenate([mags[2:], [-np.inf]])
    is_peak = (interior >= left) & (interior >= right)
    is_peak &= interior > peak_ceiling * _REL_FLOOR
    bins = np.flatnonzero(is_peak) + 1
    if bins.size == 0:
        return SpectralProfile((), top_k, length)

    amps = interior[bins - 1]
    order = np.lexsort((bins, -amps))[:top_k]
    components = tuple(
        SpectralComponent(frequency=bins[i] / length, amplitude=float(amps[i])) for i in order
    )
    return SpectralProfile(components, top_k, length)


def estimate_band(
    profiles,
    mode: str = "quantile",
    quantiles: tuple[float, float] = (0.05, 0.95),
) -> FrequencyBand:
    """Pool dominant frequencies across profiles into one band.

    ``minmax`` takes the extremes; ``quantile`` takes interpolated empirical
    quantiles (robust to outliers, the default). A collapsed band is widened
    by one DFT-bin width of the coarsest contributing transform.
    """
    usable = [p for p in profiles if not p.is_degenerate]
    if not usable:
        raise InsufficientDataError("need at least one non-degenerate spectral profile")
    freqs = np.concatenate([p.frequencies for p in usable])

    if mode == "minmax":
        low, high = float(freqs.min()), float(freqs.max())
    elif mode == "quantile":
        q_lo, q_hi = quantiles
        if not (0.0 <= q_lo < q_hi <= 1.0):
            raise InvalidInputError(f"need 0 <= q_lo < q_hi <= 1, got ({q_lo}, {q_hi})")
        low, high = (float(q) for q in np.quantile(freqs, [q_lo, q_hi]))
    else:
        raise InvalidInputError(f"unknown band mode {mode!r}; expected 'minmax' or 'quantile'")

    if low == high:
        width = 1.0 / min(p.source_length for p in usable)
        low = max(0.0, low - width / 2.0)
        high = min(NYQUIST, high + width / 2.0)
    return FrequencyBand(low, high)


def band_document(band: FrequencyBand) -> dict:
    return {"low": band.low, "high": band.high}


def spectral_document(
    components,
    band: FrequencyBand,
    top_k: int,
    sample_rate: float | None = None,
) -> dict:
    """Serialize components plus band to the versioned profile schema.

    With a sample rate the document is written in Hz and carries the rate so
    it can be mapped back to normalized units on load.
    """
    scale = 1.0 if sample_rate is None else float(sample_rate)
    doc = {
        "version": 1,
        "unit": "normalized" if sample_rate is None else "hz",
        "top_k": int(top_k),
        "components": [
            {"f": c.frequency * scale, "a": c.amplitude} for c in components
        ],
        "band": {"low": band.low * scale, "high": band.high * scale},
    }
    if sample_rate is not None:
        doc["sample_rate"] = float(sample_rate)
    return doc


def band_from_document(doc: dict) -> FrequencyBand:
    """Read a band from a profile document, converting Hz back to normalized."""
    try:
        unit = doc["unit"]
        band = doc["band"]
        low, high = float(band["low"]), float(band["high"])
    except (KeyError, TypeError) as exc:
        raise InvalidInputError(f"profile document is missing {exc}") from exc
    if unit == "hz":
        rate = doc.get("sample_rate")
        if not rate or rate <= 0:
            raise InvalidInputError("hz profile document lacks a positive sample_rate")
        low, high = low / rate, high / rate
    elif unit != "normalized":
        raise InvalidInputError(f"unknown frequency unit {unit!r}")
    return FrequencyBand(low, high)
