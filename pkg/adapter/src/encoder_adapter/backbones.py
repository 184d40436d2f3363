"""Frozen backbones served over the protocol.

``echo`` is the stdlib-only protocol fixture (embedding = first D input
values, zero padded). ``random-patch`` is a deterministic, randomly
initialized patch transformer in torch: not pretrained, but it exercises
the full real-model path (patch embedding, transformer encoder, pooled
representation, frozen weights). ``moment:<model-id>`` loads a pretrained
backbone through the momentfm package when that is installed.

Every backbone verifies its advertised width with a dummy forward pass at
startup and never creates gradient state.
"""

from __future__ import annotations

from dataclasses import dataclass

POOLINGS = ("mean", "last", "cls")


class ModelLoadError(Exception):
    """The requested backbone cannot be constructed."""


@dataclass(frozen=True)
class AdapterConfig:
    model_id: str
    device: str = "cpu"
    max_length: int = 4096
    batch_limit: int = 256
    pooling: str = "mean"

    def __post_init__(self):
        if self.max_length < 1:
            raise ModelLoadError(f"max_length must be >= 1, got {self.max_length}")
        if self.batch_limit < 1:
            raise ModelLoadError(f"batch_limit must be >= 1, got {self.batch_limit}")
        if self.pooling not in POOLINGS:
            raise ModelLoadError(f"pooling must be one of {POOLINGS}, got {self.pooling!r}")


class EchoBackbone:
    """Embedding = the first ``dim`` input values, zero padded."""

    def __init__(self, dim: int, max_length: int = 1 << 20):
        if dim < 1:
            raise ModelLoadError(f"echo dim must be >= 1, got {dim}")
        self.dim = dim
        self.max_length = max_length

    def embed(self, rows: list[list[float]]) -> list[list[float]]:
        return [(row + [0.0] * self.dim)[: self.dim] for row in rows]


def _parse_kv_options(body: str) -> dict[str, int]:
    options: dict[str, int] = {}
    if not body:
        return options
    for item in body.split(","):
        key, _, value = item.partition("=")
        try:
            options[key.strip()] = int(value)
        except ValueError:
            raise ModelLoadError(f"bad model option {item!r}; expected key=int") from None
    return options


class PatchTransformerBackbone:
    """Seeded random-init patch transformer; frozen, inference only."""

    DEFAULTS = {"dim": 256, "patch": 16, "layers": 2, "heads": 4, "seed": 0}

    def __init__(self, config: AdapterConfig, options: dict[str, int]):
        try:
            import torch
            from torch import nn
        except ImportError:
            raise ModelLoadError(
                "random-patch backbone needs torch; install the [models] extra"
            ) from None
        self._torch = torch

        params = dict(self.DEFAULTS)
        unknown = set(options) - set(params)
        if unknown:
            raise ModelLoadError(f"unknown random-patch options {sorted(unknown)}")
        params.update(options)
        self.patch = params["patch"]
        self.dim = params["dim"]
        self.pooling = config.pooling
        self.max_length = config.max_length

        torch.manual_seed(params["seed"])
        self._patch_embed = nn.Linear(self.patch, self.dim)
        layer = nn.TransformerEncoderLayer(
            d_model=self.dim,
            nhead=params["heads"],
            dim_feedforward=4 * self.dim,
            batch_first=True,
        )
        self._encoder = nn.TransformerEncoder(layer, num_layers=params["layers"])
        self._cls = nn.Parameter(torch.randn(1, 1, self.dim) * 0.02)
        device = torch.device(config.device)
        for module in (self._patch_embed, self._encoder):
            module.to(device)
            module.eval()
            module.requires_grad_(False)
        self._cls = self._cls.to(device).requires_grad_(False)
        self._device = device

    def embed(self, rows: list[list[float]]) -> list[list[float]]:
        torch = self._torch
        out: list[list[float]] = []
        with torch.inference_mode():
            for row in rows:
                padded_len = max(self.patch, -(-len(row) // self.patch) * self.patch)
                x = torch.zeros(1, padded_len, device=self._device, dtype=torch.float32)
                x[0, : len(row)] = torch.tensor(row, dtype=torch.float32)
                patches = x.view(1, -1, self.patch)
                tokens = self._patch_embed(patches)
                tokens = torch.cat([self._cls.clone(), tokens], dim=1)
                encoded = self._encoder(tokens)
                if self.pooling == "cls":
                    pooled = encoded[0, 0]
                elif self.pooling == "last":
                    pooled = encoded[0, -1]
                else:
                    pooled = encoded[0, 1:].mean(dim=0)
                out.append([float(v) for v in pooled.cpu().tolist()])
        return out


class MomentBackbone:
    """Pretrained MOMENT-family backbone via the momentfm package."""

    def __init__(self, config: AdapterConfig, model_name: str):
        try:
            import torch
            from momentfm import MOMENTPipeline
        except ImportError as exc:
            raise ModelLoadError(
                f"moment backbone unavailable: {exc}; install momentfm and torch"
            ) from None
        self._torch = torch
        self.pooling = config.pooling
        self.max_length = config.max_length
        try:
            self._model = MOMENTPipeline.from_pretrained(
                model_name, model_kwargs={"task_name": "embedding"}
            )
            self._model.init()
        except Exception as exc:  # anything the hub/model stack throws is fatal here
            raise ModelLoadError(f"cannot load {model_name!r}: {exc}") from exc
        self._model.to(torch.device(config.device))
        self._model.eval()
        for p in self._model.parameters():
            p.requires_grad_(False)
        self._device = torch.device(config.device)
        self.dim = int(self._model.config.d_model)

    def embed(self, rows: list[list[float]]) -> list[list[float]]:
        torch = self._torch
        out: list[list[float]] = []
        with torch.inference_mode():
            for row in rows:
                x = torch.tensor(row, dtype=torch.float32, device=self._device)
                x = x.view(1, 1, -1)
                result = self._model(x_enc=x)
                emb = result.embeddings
                out.append([float(v) for v in emb.reshape(-1).cpu().tolist()])
        return out


def load_backbone(config: AdapterConfig):
    """Build the backbone named by config.model_id and verify its width."""
    model_id = config.model_id
    if model_id.startswith("random-patch"):
        _, _, body = model_id.partition(":")
        backbone = PatchTransformerBackbone(config, _parse_kv_options(body))
    elif model_id.startswith("moment:"):
        backbone = MomentBackbone(config, model_id.split(":", 1)[1])
    else:
        raise ModelLoadError(
            f"unknown model id {model_id!r}; expected 'random-patch[:k=v,...]' "
            f"or 'moment:<name>'"
        )

    # the advertised dim must match a real forward pass
    probe = backbone.embed([[0.0] * min(64, config.max_length)])
    actual = len(probe[0])
    if actual != backbone.dim:
        raise ModelLoadError(
            f"backbone advertises dim {backbone.dim} but produced {actual}"
        )
    return backbone
