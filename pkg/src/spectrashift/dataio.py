"""Corpus ingestion, deterministic splits, and probe-dataset persistence.

Generated datasets are NDJSON (one sample per line) plus a manifest.json
with everything needed to regenerate them bit-identically. Floats are
written as shortest round-trip decimals, so save -> load is exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    CorpusFormatError,
    InvalidInputError,
    LengthMismatchError,
    TooSmallCorpusError,
)
from .rng import TAG_CORPUS_SPLIT, substream
from .spectral import TimeSeries

CORPUS_FORMATS = ("csv-rows", "ucr-tsv", "ndjson")
ORIGINS = ("real", "generated-seen", "generated-unseen")
SPLIT_NAMES = ("train", "val", "test")
DATASET_FORMAT_VERSION = 1
VARIANTS = ("seen", "unseen")


@dataclass
class Corpus:
    """A named collection of equal-length series, with optional class labels."""

    series: list[TimeSeries]
    name: str = ""
    origin: str = "real"
    labels: list[str] | None = None

    def __post_init__(self):
        if not self.series:
            raise InvalidInputError("corpus must contain at least one series")
        if self.origin not in ORIGINS:
            raise InvalidInputError(f"unknown corpus origin {self.origin!r}")
        lengths = {s.length for s in self.series}
        if len(lengths) != 1:
            raise InvalidInputError(f"corpus mixes series lengths {sorted(lengths)}")
        if self.labels is not None and len(self.labels) != len(self.series):
            raise InvalidInputError("labels must align 1:1 with series")

    @property
    def length(self) -> int:
        return self.series[0].length

    def __len__(self) -> int:
        return len(self.series)

    def values_matrix(self) -> np.ndarray:
        return np.stack([s.values for s in self.series])


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test fractions; each positive, summing to 1."""

    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15

    def __post_init__(self):
        for name, frac in zip(SPLIT_NAMES, self.as_tuple()):
            if not frac > 0.0:
                raise InvalidInputError(f"{name} fraction must be > 0, got {frac}")
        if abs(sum(self.as_tuple()) - 1.0) > 1e-12:
            raise InvalidInputError(f"fractions must sum to 1, got {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train_frac, self.val_frac, self.test_frac)

    def sizes(self, n: int) -> tuple[int, int, int]:
        """Floor-based sizes: floor(n*train), floor(n*val), remainder to test."""
        n_train = int(np.floor(n * self.train_frac))
        n_val = int(np.floor(n * self.val_frac))
        n_test = n - n_train - n_val
        return n_train, n_val, n_test


def _to_float(token: str, line_no: int, column: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise CorpusFormatError(
            f"line {line_no}, column {column}: not a number: {token!r}",
            line=line_no,
            column=column,
        ) from None


def _numbered_nonblank(text: str):
    for line_no, line in enumerate(text.splitlines(), start=1):
        if line.strip():
            yield line_no, line


def load_corpus(
    path,
    format: str,
    name: str | None = None,
    sample_rate: float | None = None,
) -> Corpus:
    """Load a corpus file.

    csv-rows: one comma-separated series per line.
    ucr-tsv:  first whitespace-separated field is a class label (kept as
              metadata), the rest are values.
    ndjson:   one JSON object per line with a "values" array and an
              optional "label".
    """
    if format not in CORPUS_FORMATS:
        raise InvalidInputError(f"unknown corpus format {format!r}; expected {CORPUS_FORMATS}")
    path = Path(path)
    text = path.read_text(encoding="utf-8")

    rows: list[tuple[int, list[float]]] = []
    labels: list[str] = []
    has_labels = format == "ucr-tsv"

    for line_no, line in _numbered_nonblank(text):
        if format == "csv-rows":
            tokens = [tok.strip() for tok in line.split(",")]
            values = [_to_float(tok, line_no, col) for col, tok in enumerate(tokens, start=1)]
        elif format == "ucr-tsv":
            tokens = line.split()
            if len(tokens) < 2:
                raise CorpusFormatError(
                    f"line {line_no}: ucr-tsv needs a label plus values", line=line_no
                )
            labels.append(tokens[0])
            values = [_to_float(tok, line_no, col) for col, tok in enumerate(tokens[1:], start=2)]
        else:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(
                    f"line {line_no}, column {exc.colno}: invalid JSON: {exc.msg}",
                    line=line_no,
                    column=exc.colno,
                ) from None
            if not isinstance(obj, dict) or "values" not in obj:
                raise CorpusFormatError(
                    f"line {line_no}: ndjson object needs a 'values' field", line=line_no
                )
            values = [float(v) for v in obj["values"]]
            if "label" in obj:
                labels.append(str(obj["label"]))
                has_labels = True
        rows.append((line_no, values))

    if not rows:
        raise CorpusFormatError(f"{path}: no series found")

    ref_len = len(rows[0][1])
    offenders = [(line_no, len(values)) for line_no, values in rows if len(values) != ref_len]
    if offenders:
        where = ", ".join(f"line {ln} has {m}" for ln, m in offenders)
        raise LengthMismatchError(
            f"{path}: expected {ref_len} values per series but {where}",
            lines=[ln for ln, _ in offenders],
        )

    series = [TimeSeries(np.array(values), sample_rate=sample_rate) for _, values in rows]
    return Corpus(
        series=series,
        name=name if name is not None else path.stem,
        origin="real",
        labels=labels if has_labels and len(labels) == len(series) else None,
    )


def split_indices(n: int, spec: SplitSpec, rng: np.random.Generator):
    """Shuffle 0..n-1 with rng and slice it into (train, val, test) indices."""
    sizes = spec.sizes(n)
    if min(sizes) < 1:
        raise TooSmallCorpusError(
            f"{n} items cannot fill splits {spec.as_tuple()}: sizes would be {sizes}"
        )
    perm = rng.permutation(n)
    n_train, n_val, _ = sizes
    return perm[:n_train], perm[n_train : n_train + n_val], perm[n_train + n_val :]


def split_corpus(corpus: Corpus, spec: SplitSpec, seed: int):
    """Deterministic (seed-keyed) partition of a corpus into three corpora."""
    rng = substream(seed, TAG_CORPUS_SPLIT)
    parts = split_indices(len(corpus), spec, rng)
    out = []
    for part_name, idx in zip(SPLIT_NAMES, parts):
        out.append(
            Corpus(
                series=[corpus.series[i] for i in idx],
                name=f"{corpus.name}/{part_name}" if corpus.name else part_name,
                origin=corpus.origin,
                labels=[corpus.labels[i] for i in idx] if corpus.labels is not None else None,
            )
        )
    return tuple(out)


@dataclass
class ProbeSample:
    """One synthetic series plus its generation metadata and labels."""

    values: np.ndarray
    freqs: np.ndarray
    phases: np.ndarray
    amps: np.ndarray
    y_raw: float
    variant: str
    y_norm: float | None = None
    class_label: int | None = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        self.values = np.asarray(self.values, dtype=np.float64)
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.phases = np.asarray(self.phases, dtype=np.float64)
        self.amps = np.asarray(self.amps, dtype=np.float64)
        if not np.isfinite(self.y_raw):
            raise InvalidInputError("y_raw must be finite")


@dataclass(frozen=True)
class LabelStats:
    """Train-split z-score statistics."""

    mu_y: float
    sigma_y: float

    def __post_init__(self):
        if not self.sigma_y > 0:
            raise InvalidInputError(f"sigma_y must be positive, got {self.sigma_y}")


@dataclass
class ProbeDataset:
    """Generated splits for one variant plus the manifest metadata."""

    variant: str
    splits: dict[str, list[ProbeSample]] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidInputError(f"unknown variant {self.variant!r}")
        missing = [k for k in SPLIT_NAMES if k not in self.splits]
        if missing:
            raise InvalidInputError(f"dataset is missing splits {missing}")

    def all_samples(self):
        for split in SPLIT_NAMES:
            yield from self.splits[split]

    @property
    def length(self) -> int:
        return int(self.splits["train"][0].values.size)

    def counts(self) -> dict[str, int]:
        return {k: len(self.splits[k]) for k in SPLIT_NAMES}


def _sample_record(sample: ProbeSample) -> dict:
    return {
        "values": sample.values.tolist(),
        "y_raw": sample.y_raw,
        "y_norm": sample.y_norm,
        "class_label": sample.class_label,
        "freqs": sample.freqs.tolist(),
        "phases": sample.phases.tolist(),
        "amps": sample.amps.tolist(),
        "variant": sample.variant,
    }


def _sample_from_record(rec: dict) -> ProbeSample:
    return ProbeSample(
        values=np.array(rec["values"], dtype=np.float64),
        freqs=np.array(rec["freqs"], dtype=np.float64),
        phases=np.array(rec["phases"], dtype=np.float64),
        amps=np.array(rec["amps"], dtype=np.float64),
        y_raw=float(rec["y_raw"]),
        variant=rec["variant"],
        y_norm=None if rec.get("y_norm") is None else float(rec["y_norm"]),
        class_label=None if rec.get("class_label") is None else int(rec["class_label"]),
    )


def save_probe_dataset(dataset: ProbeDataset, out_dir) -> Path:
    """Write train/val/test NDJSON plus manifest.json; returns the manifest path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for split in SPLIT_NAMES:
        path = out_dir / f"{split}.ndjson"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for sample in dataset.splits[split]:
                fh.write(json.dumps(_sample_record(sample), separators=(",", ":")))
                fh.write("\n")
    manifest = dict(dataset.metadata)
    manifest["version"] = DATASET_FORMAT_VERSION
    manifest["variant"] = dataset.variant
    manifest["counts"] = dataset.counts()
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(manifest, sort_keys=True, indent=2))
        fh.write("\n")
    return manifest_path


def load_probe_dataset(in_dir) -> ProbeDataset:
    in_dir = Path(in_dir)
    manifest_path = in_dir / "manifest.json"
    if not manifest_path.exists():
        raise InvalidInputError(f"{in_dir} has no manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("version") != DATASET_FORMAT_VERSION:
        raise InvalidInputError(
            f"unsupported dataset format version {manifest.get('version')!r}"
        )
    splits: dict[str, list[ProbeSample]] = {}
    for split in SPLIT_NAMES:
        path = in_dir / f"{split}.ndjson"
        if not path.exists():
            raise InvalidInputError(f"{in_dir} is missing {split}.ndjson")
        samples = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    samples.append(_sample_from_record(json.loads(line)))
        splits[split] = samples
    metadata = {k: v for k, v in manifest.items() if k not in ("version", "variant", "counts")}
    return ProbeDataset(variant=manifest["variant"], splits=splits, metadata=metadata)
