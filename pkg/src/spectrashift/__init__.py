"""spectrashift: audit frozen time-series encoders under spectral shift.

Pipeline: extract dominant-frequency bands from a corpus, generate paired
seen/unseen synthetic probes with frequency-derived labels, quantify
spectral overlap, and linear-probe frozen encoders on both variants.
"""

__version__ = "0.1.0"

from .dataio import (
    Corpus,
    LabelStats,
    ProbeDataset,
    ProbeSample,
    SplitSpec,
    load_corpus,
    load_probe_dataset,
    save_probe_dataset,
    split_corpus,
)
from .encoders import (
    BandlimitedEncoder,
    ExternalEncoder,
    RandomProjectionEncoder,
    SpectralEncoder,
    make_encoder,
)
from .overlap import (
    CorpusSpectralSummary,
    OverlapReport,
    band_iou,
    spectral_overlap,
    summarize_corpus,
)
from .probegen import (
    ProbeConfig,
    generate_probe_pair,
    generate_sample,
    make_classification_labels,
    make_regression_labels,
    sample_delta,
)
from .probing import (
    EvalReport,
    ExperimentReport,
    LinearHead,
    TrainConfig,
    evaluate_head,
    roc_auc,
    run_probe_experiment,
    train_head,
)
from .spectral import (
    FrequencyBand,
    SpectralComponent,
    SpectralProfile,
    TimeSeries,
    estimate_band,
    extract_dominant,
    power_spectrum,
)
from .bridge import BridgeClient, BridgeEndpoint

__all__ = [
    "__version__",
    "BandlimitedEncoder",
    "BridgeClient",
    "BridgeEndpoint",
    "Corpus",
    "CorpusSpectralSummary",
    "EvalReport",
    "ExperimentReport",
    "ExternalEncoder",
    "FrequencyBand",
    "LabelStats",
    "LinearHead",
    "OverlapReport",
    "ProbeConfig",
    "ProbeDataset",
    "ProbeSample",
    "RandomProjectionEncoder",
    "SpectralComponent",
    "SpectralEncoder",
    "SpectralProfile",
    "SplitSpec",
    "TimeSeries",
    "TrainConfig",
    "band_iou",
    "estimate_band",
    "evaluate_head",
    "extract_dominant",
    "generate_probe_pair",
    "generate_sample",
    "load_corpus",
    "load_probe_dataset",
    "make_classification_labels",
    "make_encoder",
    "make_regression_labels",
    "power_spectrum",
    "roc_auc",
    "run_probe_experiment",
    "sample_delta",
    "save_probe_dataset",
    "spectral_overlap",
    "split_corpus",
    "summarize_corpus",
    "train_head",
]
