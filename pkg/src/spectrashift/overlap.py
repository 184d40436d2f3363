"""Spectral overlap between corpora: band IoU and histogram overlap.

A corpus is summarized by the band of its pooled dominant frequencies and
a fixed-bin histogram of them. Two summaries are compared with an interval
IoU and the bounded overlap coefficient sum(min(p_i, q_i)); both scores
live in [0, 1] and equal 1 exactly on self-comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataio import Corpus
from .errors import IncompatibleSummariesError, InsufficientDataError, InvalidInputError
from .spectral import NYQUIST, FrequencyBand, SpectralComponent, extract_dominant, estimate_band

DEFAULT_BINS = 64

# Reporting sugar only; the scores are the contract, the verdict is a
# heuristic reading of the histogram overlap.
VERDICT_HIGH = 0.5
VERDICT_LOW = 0.2


@dataclass(frozen=True)
class CorpusSpectralSummary:
    """Pooled dominant-frequency summary of one corpus.

    Histogram counts are kept as integers over equal-width bins spanning
    (0, f_nyquist]; ``masses`` exposes the normalized view.
    """

    band: FrequencyBand
    counts: np.ndarray
    n_series: int
    top_k: int
    unit: str = "normalized"
    f_nyquist: float = NYQUIST
    components: tuple[SpectralComponent, ...] = ()

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.ndim != 1 or counts.size < 1:
            raise InvalidInputError("histogram counts must be a non-empty 1-D array")
        if (counts < 0).any():
            raise InvalidInputError("histogram counts must be non-negative")
        if counts.sum() == 0:
            raise InvalidInputError("histogram must contain at least one observation")
        object.__setattr__(self, "counts", counts)

    @property
    def bins(self) -> int:
        return int(self.counts.size)

    @property
    def masses(self) -> np.ndarray:
        return self.counts / self.counts.sum()

    @property
    def bin_edges(self) -> np.ndarray:
        return np.linspace(0.0, self.f_nyquist, self.bins + 1)


@dataclass(frozen=True)
class OverlapReport:
    band_iou: float
    histogram_overlap: float
    verdict: str

    def to_json(self) -> dict:
        return {
            "version": 1,
            "band_iou": self.band_iou,
            "histogram_overlap": self.histogram_overlap,
            "verdict": self.verdict,
            "verdict_note": "heuristic reading of histogram_overlap: "
            f"high >= {VERDICT_HIGH}, low < {VERDICT_LOW}, moderate otherwise",
        }


def summarize_corpus(
    corpus: Corpus,
    top_k: int = 5,
    bins: int = DEFAULT_BINS,
    band_mode: str = "quantile",
    quantiles: tuple[float, float] = (0.05, 0.95),
) -> CorpusSpectralSummary:
    """Extract per-series dominant peaks, pool them, and summarize.

    Degenerate (constant) series contribute nothing; if every series is
    degenerate there is nothing to summarize and that is an error.
    """
    if bins < 1:
        raise InvalidInputError(f"bins must be >= 1, got {bins}")
    profiles = [extract_dominant(s, top_k=top_k) for s in corpus.series]
    usable = [p for p in profiles if not p.is_degenerate]
    if not usable:
        raise InsufficientDataError(
            f"corpus {corpus.name!r}: every series is spectrally degenerate"
        )
    band = estimate_band(usable, mode=band_mode, quantiles=quantiles)

    freqs = np.concatenate([p.frequencies for p in usable])
    amps = np.concatenate([p.amplitudes for p in usable])
    counts, _ = np.histogram(freqs, bins=bins, range=(0.0, NYQUIST))

    order = np.lexsort((freqs, -amps))[:top_k]
    pooled = tuple(SpectralComponent(float(freqs[i]), float(amps[i])) for i in order)
    return CorpusSpectralSummary(
        band=band,
        counts=counts,
        n_series=len(corpus),
        top_k=top_k,
        components=pooled,
    )


def band_iou(a: FrequencyBand, b: FrequencyBand) -> float:
    """Interval intersection-over-union; 1.0 for identical bands."""
    inter = min(a.high, b.high) - max(a.low, b.low)
    if inter <= 0.0:
        return 0.0
    union = a.width + b.width - inter
    return inter / union


def histogram_overlap(a: CorpusSpectralSummary, b: CorpusSpectralSummary) -> float:
    """sum(min(p_i, q_i)) computed exactly over integer counts.

    Working on counts with the common denominator total_a * total_b keeps
    the self-overlap at exactly 1.0 and the score symmetric.
    """
    total_a = int(a.counts.sum())
    total_b = int(b.counts.sum())
    numerator = sum(
        min(int(ca) * total_b, int(cb) * total_a) for ca, cb in zip(a.counts, b.counts)
    )
    return numerator / (total_a * total_b)


def spectral_overlap(a: CorpusSpectralSummary, b: CorpusSpectralSummary) -> OverlapReport:
    """Compare two summaries built with the same unit and binning."""
    if a.unit != b.unit:
        raise IncompatibleSummariesError(f"unit mismatch: {a.unit!r} vs {b.unit!r}")
    if a.bins != b.bins or a.f_nyquist != b.f_nyquist:
        raise IncompatibleSummariesError(
            f"binning mismatch: {a.bins} bins over (0, {a.f_nyquist}] vs "
            f"{b.bins} bins over (0, {b.f_nyquist}]"
        )
    iou = band_iou(a.band, b.band)
    hist = histogram_overlap(a, b)
    if hist >= VERDICT_HIGH:
        verdict = "high"
    elif hist < VERDICT_LOW:
        verdict = "low"
    else:
        verdict = "moderate"
    return OverlapReport(band_iou=iou, histogram_overlap=hist, verdict=verdict)


def summary_document(summary: CorpusSpectralSummary) -> dict:
    doc = {
        "version": 1,
        "unit": summary.unit,
        "top_k": summary.top_k,
        "components": [
            {"f": c.frequency, "a": c.amplitude} for c in summary.components
        ],
        "band": {"low": summary.band.low, "high": summary.band.high},
        "histogram": {
            "bins": summary.bins,
            "range": [0.0, summary.f_nyquist],
            "counts": [int(c) for c in summary.counts],
        },
        "n_series": summary.n_series,
    }
    return doc


def summary_from_document(doc: dict) -> CorpusSpectralSummary:
    try:
        hist = doc["histogram"]
        band = doc["band"]
        summary = CorpusSpectralSummary(
            band=FrequencyBand(float(band["low"]), float(band["high"])),
            counts=np.array(hist["counts"], dtype=np.int64),
            n_series=int(doc.get("n_series", 0)),
            top_k=int(doc["top_k"]),
            unit=doc["unit"],
            f_nyquist=float(hist["range"][1]),
            components=tuple(
                SpectralComponent(float(c["f"]), float(c["a"]))
                for c in doc.get("components", [])
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"malformed corpus summary document: {exc}") from exc
    if doc.get("version") != 1:
        raise InvalidInputError(f"unsupported summary version {doc.get('version')!r}")
    return summary


def _svg_bars(masses, edges, panel_top, panel_h, x0, plot_w, color):
    peak = max(float(masses.max()), 1e-12)
    span = edges[-1] - edges[0]
    parts = []
    for i, mass in enumerate(masses):
        if mass <= 0:
            continue
        x = x0 + plot_w * (edges[i] - edges[0]) / span
        w = plot_w * (edges[i + 1] - edges[i]) / span
        h = panel_h * float(mass) / peak
        parts.append(
            f'<rect x="{x:.2f}" y="{panel_top + panel_h - h:.2f}" '
            f'width="{w:.2f}" height="{h:.2f}" fill="{color}"/>'
        )
    return parts


def overlap_svg(
    a: CorpusSpectralSummary,
    b: CorpusSpectralSummary,
    label_a: str = "corpus A",
    label_b: str = "corpus B",
) -> str:
    """Two-panel dominant-frequency histogram comparison as standalone SVG."""
    width, panel_h, margin, gap = 640, 150, 45, 40
    plot_w = width - 2 * margin
    height = 2 * panel_h + gap + 2 * margin
    colors = ("#3566a5", "#c2572b")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    for idx, (summary, label, color) in enumerate(
        ((a, label_a, colors[0]), (b, label_b, colors[1]))
    ):
        top = margin + idx * (panel_h + gap)
        edges = summary.bin_edges
        parts.extend(_svg_bars(summary.masses, edges, top, panel_h, margin, plot_w, color))
        span = edges[-1] - edges[0]
        band_x = margin + plot_w * (summary.band.low - edges[0]) / span
        band_w = plot_w * summary.band.width / span
        parts.append(
            f'<rect x="{band_x:.2f}" y="{top:.2f}" width="{band_w:.2f}" '
            f'height="{panel_h}" fill="{color}" fill-opacity="0.12"/>'
        )
        parts.append(
            f'<line x1="{margin}" y1="{top + panel_h}" x2="{margin + plot_w}" '
            f'y2="{top + panel_h}" stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{margin}" y="{top - 8}" font-family="monospace" font-size="13" '
            f'fill="#111">{label} (n={summary.n_series}, '
            f'band [{summary.band.low:.4g}, {summary.band.high:.4g}])</text>'
        )
        for tick in np.linspace(edges[0], edges[-1], 6):
            tx = margin + plot_w * (tick - edges[0]) / span
            parts.append(
                f'<line x1="{tx:.2f}" y1="{top + panel_h}" x2="{tx:.2f}" '
                f'y2="{top + panel_h + 4}" stroke="#333" stroke-width="1"/>'
            )
            parts.append(
                f'<text x="{tx:.2f}" y="{top + panel_h + 16}" font-family="monospace" '
                f'font-size="10" fill="#333" text-anchor="middle">{tick:.3g}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
