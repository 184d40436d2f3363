"""Synthetic seen/unseen probe datasets with frequency-derived labels.

Each sample is a sum of sinusoids whose frequencies come from either the
source band (seen) or that band shifted up by delta (unseen); the shift is
large enough that the two intervals never overlap. The regression target
is the sum of the sampled frequencies, z-scored with train-split
statistics; classification labels are either band membership or a
median split of the raw target within each variant.

All randomness flows through per-sample Philox streams keyed by
(seed, variant, sample index), so generation is reproducible under any
thread count or evaluation order.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .dataio import (
    SPLIT_NAMES,
    LabelStats,
    ProbeDataset,
    ProbeSample,
    SplitSpec,
    split_indices,
)
from .errors import (
    DegenerateThresholdError,
    InfeasibleShiftError,
    InvalidInputError,
    ZeroVarianceError,
)
from .parallel import parallel_map
from .rng import (
    TAG_DELTA,
    TAG_SAMPLE_SEEN,
    TAG_SAMPLE_UNSEEN,
    TAG_SPLIT_SEEN,
    TAG_SPLIT_UNSEEN,
    substream,
)
from .spectral import NYQUIST, FrequencyBand

VARIANTS = ("seen", "unseen")
CLASSIFICATION_MODES = ("band-membership", "median-bin")

_SAMPLE_TAGS = {"seen": TAG_SAMPLE_SEEN, "unseen": TAG_SAMPLE_UNSEEN}
_SPLIT_TAGS = {"seen": TAG_SPLIT_SEEN, "unseen": TAG_SPLIT_UNSEEN}

# Minimum bin gap in snapped mode: adjacent bins would leave the weaker
# tone shadowed by its neighbor and never recoverable as a local peak.
_SNAP_MIN_GAP = 2


@dataclass(frozen=True)
class ProbeConfig:
    """Everything that determines a generated seen/unseen pair."""

    band: FrequencyBand
    n_samples: int
    length: int = 512
    sinusoids: int = 5
    amplitude_range: tuple[float, float] = (0.5, 1.5)
    noise_sigma: float = 0.05
    delta: float | None = None
    f_max: float = NYQUIST
    seed: int = 0
    split: SplitSpec = SplitSpec()
    classification_mode: str = "band-membership"
    snap_to_bins: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise InvalidInputError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.length < 4:
            raise InvalidInputError(f"length must be >= 4, got {self.length}")
        if self.sinusoids < 1:
            raise InvalidInputError(f"sinusoids must be >= 1, got {self.sinusoids}")
        a_min, a_max = self.amplitude_range
        if not (0.0 < a_min <= a_max):
            raise InvalidInputError(f"need 0 < a_min <= a_max, got {self.amplitude_range}")
        if self.noise_sigma < 0:
            raise InvalidInputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not (0.0 < self.f_max <= NYQUIST):
            raise InvalidInputError(f"f_max must lie in (0, {NYQUIST}], got {self.f_max}")
        if self.band.high > self.f_max:
            raise InvalidInputError(
                f"band top {self.band.high} exceeds f_max {self.f_max}"
            )
        if self.classification_mode not in CLASSIFICATION_MODES:
            raise InvalidInputError(
                f"unknown classification mode {self.classification_mode!r}"
            )

    def to_json(self) -> dict:
        return {
            "band": {"low": self.band.low, "high": self.band.high},
            "n_samples": self.n_samples,
            "length": self.length,
            "sinusoids": self.sinusoids,
            "amplitude_range": list(self.amplitude_range),
            "noise_sigma": self.noise_sigma,
            "delta": self.delta,
            "f_max": self.f_max,
            "seed": self.seed,
            "split": {
                "train_frac": self.split.train_frac,
                "val_frac": self.split.val_frac,
                "test_frac": self.split.test_frac,
            },
            "classification_mode": self.classification_mode,
            "snap_to_bins": self.snap_to_bins,
        }

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def sample_delta(band: FrequencyBand, f_max: float, rng: np.random.Generator) -> float:
    """Draw delta uniformly from [band width, f_max - band.high].

    The lower bound makes the shifted interval disjoint from the source
    band; the upper bound keeps it inside (0, f_max].
    """
    headroom = f_max - band.high
    if headroom < band.width:
        raise InfeasibleShiftError(
            f"cannot shift band [{band.low}, {band.high}] within f_max={f_max}: "
            f"headroom {headroom:.6g} is short of the band width {band.width:.6g} "
            f"by {band.width - headroom:.6g}",
            deficit=band.width - headroom,
        )
    return float(rng.uniform(band.width, headroom))


def validate_delta(band: FrequencyBand, f_max: float, delta: float) -> None:
    """Check an explicit delta against the same feasibility window."""
    if delta < band.width:
        raise InfeasibleShiftError(
            f"delta {delta} < band width {band.width:.6g}: shifted band would overlap "
            f"the source band (short by {band.width - delta:.6g})",
            deficit=band.width - delta,
        )
    headroom = f_max - band.high
    if delta > headroom:
        raise InfeasibleShiftError(
            f"delta {delta} exceeds headroom {headroom:.6g} below f_max={f_max} "
            f"by {delta - headroom:.6g}",
            deficit=delta - headroom,
        )


def _variant_band(config: ProbeConfig, variant: str, delta: float) -> FrequencyBand:
    if variant == "seen":
        return config.band
    if variant == "unseen":
        return config.band.shifted(delta)
    raise InvalidInputError(f"unknown variant {variant!r}")


def _snapped_bins(
    band: FrequencyBand, length: int, m: int, rng: np.random.Generator
) -> np.ndarray:
    lo_bin = max(1, math.ceil(band.low * length))
    hi_bin = math.floor(band.high * length)
    available = np.arange(lo_bin, hi_bin + 1)
    if available.size < (m - 1) * _SNAP_MIN_GAP + 1:
        raise InvalidInputError(
            f"band [{band.low}, {band.high}] holds only {available.size} bins at "
            f"L={length}; cannot place {m} tones {_SNAP_MIN_GAP} bins apart"
        )
    while True:
        bins = np.sort(rng.choice(available, size=m, replace=False))
        if m == 1 or np.diff(bins).min() >= _SNAP_MIN_GAP:
            return bins


def generate_sample(
    config: ProbeConfig, variant: str, delta: float, index: int
) -> ProbeSample:
    """Generate sample ``index`` of one variant.

    Draw order within the per-sample stream is fixed (frequencies, phases,
    amplitudes, then noise), which is what the determinism contract hangs on.
    """
    band = _variant_band(config, variant, delta)
    rng = substream(config.seed, _SAMPLE_TAGS[variant], index)
    m = config.sinusoids

    if config.snap_to_bins:
        freqs = _snapped_bins(band, config.length, m, rng) / config.length
    else:
        freqs = rng.uniform(band.low, band.high, size=m)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=m)
    a_min, a_max = config.amplitude_range
    amps = rng.uniform(a_min, a_max, size=m)

    t = np.arange(config.length, dtype=np.float64)
    values = (amps[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * t + phases[:, None])).sum(
        axis=0
    )
    if config.noise_sigma > 0:
        values = values + rng.normal(0.0, config.noise_sigma, size=config.length)

    return ProbeSample(
        values=values,
        freqs=freqs,
        phases=phases,
        amps=amps,
        y_raw=float(np.sum(freqs)),
        variant=variant,
    )


def _generate_many(config: ProbeConfig, variant: str, delta: float) -> list[ProbeSample]:
    indices = list(range(config.n_samples))
    return parallel_map(lambda i: generate_sample(config, variant, delta, i), indices)


def make_regression_labels(
    train: list[ProbeSample], val: list[ProbeSample], test: list[ProbeSample]
) -> LabelStats:
    """z-score y_raw on all splits using train-split statistics (population std)."""
    if not train:
        raise InvalidInputError("train split is empty")
    y = np.array([s.y_raw for s in train], dtype=np.float64)
    sigma = float(np.std(y))
    if sigma == 0.0:
        raise ZeroVarianceError("train labels are constant; cannot z-score")
    mu = float(np.mean(y))
    for sample in (*train, *val, *test):
        sample.y_norm = (sample.y_raw - mu) / sigma
    return LabelStats(mu_y=mu, sigma_y=sigma)


def make_classification_labels(
    mode: str, seen: ProbeDataset, unseen: ProbeDataset
) -> dict[str, float | None]:
    """Attach binary labels to both datasets; returns per-variant thresholds.

    band-membership: 0 for seen samples, 1 for unseen samples.
    median-bin: within each variant, threshold at the median train y_raw and
    label 1 iff y_raw exceeds it (continuous targets keep this near-balanced).
    """
    if mode == "band-membership":
        for dataset, bit in ((seen, 0), (unseen, 1)):
            for sample in dataset.all_samples():
                sample.class_label = bit
        return {"seen": None, "unseen": None}
    if mode != "median-bin":
        raise InvalidInputError(f"unknown classification mode {mode!r}")

    thresholds: dict[str, float | None] = {}
    for dataset in (seen, unseen):
        train_y = np.array([s.y_raw for s in dataset.splits["train"]], dtype=np.float64)
        if np.unique(train_y).size < 2:
            raise DegenerateThresholdError(
                f"{dataset.variant}: median binning needs >= 2 distinct train labels"
            )
        threshold = float(np.median(train_y))
        for sample in dataset.all_samples():
            sample.class_label = int(sample.y_raw > threshold)
        thresholds[dataset.variant] = threshold
    return thresholds


def generate_probe_pair(config: ProbeConfig) -> tuple[ProbeDataset, ProbeDataset]:
    """Build the (seen, unseen) dataset pair for one config.

    Resolves delta (drawing it when absent), generates and splits both
    variants, applies both labelings, and stamps each dataset with the
    manifest metadata needed to reproduce it.
    """
    if config.delta is not None:
        validate_delta(config.band, config.f_max, config.delta)
        delta = float(config.delta)
    else:
        delta = sample_delta(config.band, config.f_max, substream(config.seed, TAG_DELTA))

    bands = {v: _variant_band(config, v, delta) for v in VARIANTS}
    datasets: dict[str, ProbeDataset] = {}
    for variant in VARIANTS:
        samples = _generate_many(config, variant, delta)
        rng = substream(config.seed, _SPLIT_TAGS[variant])
        parts = split_indices(config.n_samples, config.split, rng)
        splits = {
            name: [samples[i] for i in idx] for name, idx in zip(SPLIT_NAMES, parts)
        }
        stats = make_regression_labels(*(splits[name] for name in SPLIT_NAMES))
        metadata = {
            "seed": config.seed,
            "delta": delta,
            "band_seen": {"low": bands["seen"].low, "high": bands["seen"].high},
            "band_unseen": {"low": bands["unseen"].low, "high": bands["unseen"].high},
            "label_stats": {"mu_y": stats.mu_y, "sigma_y": stats.sigma_y},
            "classification_mode": config.classification_mode,
            "class_threshold": None,
            "config_hash": config.config_hash(),
            "config": config.to_json(),
        }
        datasets[variant] = ProbeDataset(variant=variant, splits=splits, metadata=metadata)

    thresholds = make_classification_labels(
        config.classification_mode, datasets["seen"], datasets["unseen"]
    )
    for variant in VARIANTS:
        datasets[variant].metadata["class_threshold"] = thresholds[variant]
    return datasets["seen"], datasets["unseen"]


def with_seed(config: ProbeConfig, seed: int) -> ProbeConfig:
    return replace(config, seed=seed)
