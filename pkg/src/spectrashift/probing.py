"""Linear probing of frozen encoders.

A linear head (plus logistic link for classification) is trained on
embeddings with adaptive-moment updates; the checkpoint with the best
validation selection metric is what gets evaluated on the test split.
Embeddings are standardized per dimension with train-split statistics
before any training.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace

import numpy as np

from .dataio import SPLIT_NAMES, ProbeDataset
from .errors import DivergenceError, InvalidInputError, UndefinedAUCError
from .rng import TAG_HEAD_TRAIN, TAG_RUN_SEED, substream, derive_seed

TASKS = ("regression", "classification")

_ADAM_BETA1 = 0.9
_ADAM_BETA2 = 0.999
_ADAM_EPS = 1e-8


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 64
    loss: str = "mse"
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InvalidInputError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise InvalidInputError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise InvalidInputError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.loss not in ("mse", "bce"):
            raise InvalidInputError(f"loss must be 'mse' or 'bce', got {self.loss!r}")


@dataclass
class LinearHead:
    weights: np.ndarray
    bias: float

    def scores(self, x: np.ndarray) -> np.ndarray:
        """Raw linear output; callers apply the logistic link when needed."""
        return x @ self.weights + self.bias


@dataclass
class EvalReport:
    """Test metrics for one trained head, from the best-validation checkpoint."""

    task: str
    variant: str
    best_epoch: int
    config_hash: str
    mse: float | None = None
    mae: float | None = None
    accuracy: float | None = None
    auc: float | None = None

    def metrics(self) -> dict[str, float]:
        keys = ("mse", "mae") if self.task == "regression" else ("accuracy", "auc")
        return {k: getattr(self, k) for k in keys}


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bce_loss(z: np.ndarray, y: np.ndarray) -> float:
    # log(1 + e^z) - y*z, stable for any sign of z
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def mean_squared_error(pred: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean((pred - y) ** 2))


def mean_absolute_error(pred: np.ndarray, y: np.ndarray) -> float:
    return float(np.mean(np.abs(pred - y)))


def roc_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-statistic AUC; tied score pairs count one half.

    Equals the brute-force mean over all positive/negative pairs exactly.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    n = scores.size
    n_pos = int(labels.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError(
            f"AUC needs both classes; got {n_pos} positives and {n_neg} negatives"
        )
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j < n and scores[order[j]] == scores[order[i]]:
            j += 1
        # average rank of the tie group spanning 1-based ranks i+1..j
        ranks[order[i:j]] = (i + 1 + j) / 2.0
        i = j
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def standardization(train_x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and std from the train split; zero stds become 1."""
    mu = train_x.mean(axis=0)
    sigma = train_x.std(axis=0)
    sigma = np.where(sigma > 0, sigma, 1.0)
    return mu, sigma


def _selection_metric(w, b, x, y, loss: str) -> float:
    z = x @ w + b
    if loss == "mse":
        return mean_squared_error(z, y)
    return _bce_loss(z, y)


def train_head(
    train_x: np.ndarray,
    train_y: np.ndarray,
    val_x: np.ndarray,
    val_y: np.ndarray,
    config: TrainConfig,
) -> tuple[LinearHead, int]:
    """Train for exactly config.epochs; return the best-validation checkpoint.

    Mini-batches are drawn from a fresh full shuffle every epoch; updates
    are adaptive-moment with the standard (0.9, 0.999, 1e-8) constants.
    """
    train_x = np.asarray(train_x, dtype=np.float64)
    train_y = np.asarray(train_y, dtype=np.float64)
    val_x = np.asarray(val_x, dtype=np.float64)
    val_y = np.asarray(val_y, dtype=np.float64)
    if train_x.ndim != 2 or train_x.shape[0] != train_y.size:
        raise InvalidInputError("train embeddings and labels are misaligned")
    if val_x.shape[1] != train_x.shape[1]:
        raise InvalidInputError("val embedding dim differs from train")
    if not (np.all(np.isfinite(train_y)) and np.all(np.isfinite(val_y))):
        raise InvalidInputError("labels must be finite")

    n, dim = train_x.shape
    rng = substream(config.seed, TAG_HEAD_TRAIN)
    w = np.zeros(dim)
    b = 0.0
    m_w = np.zeros(dim)
    v_w = np.zeros(dim)
    m_b = v_b = 0.0
    step = 0

    best_metric = np.inf
    best_state = (w.copy(), b)
    best_epoch = 0

    for epoch in range(1, config.epochs + 1):
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            xb, yb = train_x[idx], train_y[idx]
            z = xb @ w + b
            if config.loss == "mse":
                grad_scale = 2.0 / idx.size
                residual = z - yb
            else:
                grad_scale = 1.0 / idx.size
                residual = _sigmoid(z) - yb
            g_w = grad_scale * (xb.T @ residual)
            g_b = grad_scale * float(residual.sum())

            step += 1
            m_w = _ADAM_BETA1 * m_w + (1 - _ADAM_BETA1) * g_w
            v_w = _ADAM_BETA2 * v_w + (1 - _ADAM_BETA2) * g_w**2
            m_b = _ADAM_BETA1 * m_b + (1 - _ADAM_BETA1) * g_b
            v_b = _ADAM_BETA2 * v_b + (1 - _ADAM_BETA2) * g_b**2
            bias1 = 1 - _ADAM_BETA1**step
            bias2 = 1 - _ADAM_BETA2**step
            w = w - config.learning_rate * (m_w / bias1) / (np.sqrt(v_w / bias2) + _ADAM_EPS)
            b = b - config.learning_rate * (m_b / bias1) / (np.sqrt(v_b / bias2) + _ADAM_EPS)

        metric = _selection_metric(w, b, val_x, val_y, config.loss)
        if not (np.isfinite(metric) and np.all(np.isfinite(w)) and np.isfinite(b)):
            raise DivergenceError(f"non-finite loss at epoch {epoch}", epoch=epoch)
        if metric < best_metric:
            best_metric = metric
            best_state = (w.copy(), float(b))
            best_epoch = epoch

    return LinearHead(weights=best_state[0], bias=best_state[1]), best_epoch


def evaluate_head(
    head: LinearHead, test_x: np.ndarray, test_y: np.ndarray, task: str
) -> dict[str, float]:
    if task not in TASKS:
        raise InvalidInputError(f"unknown task {task!r}")
    z = head.scores(np.asarray(test_x, dtype=np.float64))
    y = np.asarray(test_y, dtype=np.float64)
    if task == "regression":
        return {"mse": mean_squared_error(z, y), "mae": mean_absolute_error(z, y)}
    scores = _sigmoid(z)
    accuracy = float(np.mean((scores > 0.5).astype(np.float64) == y))
    return {"accuracy": accuracy, "auc": roc_auc(scores, y)}


def _split_arrays(dataset: ProbeDataset, task: str):
    xs, ys = {}, {}
    for split in SPLIT_NAMES:
        samples = dataset.splits[split]
        xs[split] = np.stack([s.values for s in samples])
        if task == "regression":
            if any(s.y_norm is None for s in samples):
                raise InvalidInputError(f"{dataset.variant}/{split}: y_norm missing")
            ys[split] = np.array([s.y_norm for s in samples], dtype=np.float64)
        else:
            if any(s.class_label is None for s in samples):
                raise InvalidInputError(f"{dataset.variant}/{split}: class_label missing")
            ys[split] = np.array([s.class_label for s in samples], dtype=np.float64)
    return xs, ys


@dataclass
class ExperimentReport:
    """Paired seen/unseen evaluations over repeated training seeds."""

    task: str
    repeats: int
    encoder_id: str
    selection_metric: str
    config_hash: str
    runs: dict[str, list[EvalReport]]

    def metric_names(self) -> tuple[str, ...]:
        return ("mse", "mae") if self.task == "regression" else ("accuracy", "auc")

    def summary(self, variant: str, metric: str) -> tuple[float, float]:
        values = np.array([getattr(r, metric) for r in self.runs[variant]], dtype=np.float64)
        return float(values.mean()), float(values.std())

    def deltas(self) -> dict[str, float]:
        return {
            metric: self.summary("seen", metric)[0] - self.summary("unseen", metric)[0]
            for metric in self.metric_names()
        }

    def to_json(self) -> dict:
        doc = {
            "version": 1,
            "task": self.task,
            "repeats": self.repeats,
            "encoder": self.encoder_id,
            "selection_metric": self.selection_metric,
            "config_hash": self.config_hash,
            "variants": {},
            "deltas_seen_minus_unseen": self.deltas(),
        }
        for variant, reports in self.runs.items():
            entry = {"best_epochs": [r.best_epoch for r in reports]}
            for metric in self.metric_names():
                mean, std = self.summary(variant, metric)
                entry[metric] = {
                    "mean": mean,
                    "std": std,
                    "runs": [getattr(r, metric) for r in reports],
                }
            doc["variants"][variant] = entry
        return doc

    def render_table(self) -> str:
        """Plain-text table: one row per metric, Seen/Unseen mean ± std."""
        labels = {
            "mse": "Test MSE",
            "mae": "Test MAE",
            "accuracy": "Test Accuracy",
            "auc": "Test AUC",
        }
        rows = [f"{'Metric':<14}{'Seen':>20}{'Unseen':>20}{'Delta':>12}"]
        for metric in self.metric_names():
            cells = []
            for variant in ("seen", "unseen"):
                mean, std = self.summary(variant, metric)
                cells.append(f"{mean:.3f} ± {std:.3f}")
            delta = self.deltas()[metric]
            rows.append(
                f"{labels[metric]:<14}{cells[0]:>20}{cells[1]:>20}{delta:>+12.3f}"
            )
        header = (
            f"task={self.task} repeats={self.repeats} encoder={self.encoder_id} "
            f"selection={self.selection_metric}"
        )
        return "\n".join([header, *rows])


def _experiment_hash(task, encoder_id, train_config, repeats, seen, unseen) -> str:
    payload = {
        "task": task,
        "encoder": encoder_id,
        "repeats": repeats,
        "train": {
            "learning_rate": train_config.learning_rate,
            "epochs": train_config.epochs,
            "batch_size": train_config.batch_size,
            "loss": train_config.loss,
            "seed": train_config.seed,
        },
        "datasets": [
            seen.metadata.get("config_hash"),
            unseen.metadata.get("config_hash"),
        ],
    }
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def run_probe_experiment(
    seen: ProbeDataset,
    unseen: ProbeDataset,
    encoder,
    task: str,
    train_config: TrainConfig,
    repeats: int = 3,
) -> ExperimentReport:
    """Train an independent head per variant and repeat seed; aggregate.

    Embeddings are computed once per variant (the encoder is frozen) and
    standardized with train statistics. For classification the selection
    metric falls back to validation loss, the nearest equivalent of
    validation MSE.
    """
    if task not in TASKS:
        raise InvalidInputError(f"unknown task {task!r}")
    if repeats < 1:
        raise InvalidInputError(f"repeats must be >= 1, got {repeats}")
    if seen.length != unseen.length:
        raise InvalidInputError(
            f"variants disagree on length: {seen.length} vs {unseen.length}"
        )
    loss = "mse" if task == "regression" else "bce"
    train_config = replace(train_config, loss=loss)
    config_hash = _experiment_hash(task, encoder.id, train_config, repeats, seen, unseen)

    runs: dict[str, list[EvalReport]] = {"seen": [], "unseen": []}
    for variant_idx, (slot, dataset) in enumerate((("seen", seen), ("unseen", unseen))):
        xs, ys = _split_arrays(dataset, task)
        emb = {split: encoder.embed_batch(xs[split]) for split in SPLIT_NAMES}
        for split, matrix in emb.items():
            if not np.all(np.isfinite(matrix)):
                raise InvalidInputError(
                    f"{slot}/{split}: encoder produced non-finite embeddings"
                )
        mu, sigma = standardization(emb["train"])
        emb = {split: (matrix - mu) / sigma for split, matrix in emb.items()}

        for r in range(repeats):
            run_seed = derive_seed(
                train_config.seed, TAG_RUN_SEED, (variant_idx << 32) | r
            )
            head, best_epoch = train_head(
                emb["train"],
                ys["train"],
                emb["val"],
                ys["val"],
                replace(train_config, seed=run_seed),
            )
            metrics = evaluate_head(head, emb["test"], ys["test"], task)
            runs[slot].append(
                EvalReport(
                    task=task,
                    variant=slot,
                    best_epoch=best_epoch,
                    config_hash=config_hash,
                    **metrics,
                )
            )

    return ExperimentReport(
        task=task,
        repeats=repeats,
        encoder_id=encoder.id,
        selection_metric="val_mse" if task == "regression" else "val_loss",
        config_hash=config_hash,
        runs=runs,
    )
