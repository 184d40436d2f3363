"""Frozen series-to-vector encoders.

Builtins cover the audit cases: the full magnitude spectrum, a
band-limited spectrum (zeroed outside a configured band), and a seeded
Gaussian random projection. External models plug in over the bridge
protocol. None of them carries mutable state, so embeddings are
call-order independent.
"""

from __future__ import annotations

import shlex

import numpy as np

from .bridge import BridgeClient, BridgeEndpoint
from .errors import InvalidInputError
from .rng import TAG_RANDOM_PROJECTION, substream
from .spectral import TimeSeries, FrequencyBand, one_sided_magnitudes


class SpectralEncoder:
    """Nonzero-bin magnitude spectrum; dim = floor(L/2)."""

    def __init__(self, length: int):
        if length < 4:
            raise InvalidInputError(f"encoder length must be >= 4, got {length}")
        self.length = length
        self.dim = length // 2
        self.id = f"spectral(L={length})"

    def embed_batch(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if values.shape[1] != self.length:
            raise InvalidInputError(
                f"{self.id} expects length {self.length}, got {values.shape[1]}"
            )
        return one_sided_magnitudes(values)[:, 1 : self.dim + 1]

    def embed(self, series: TimeSeries) -> np.ndarray:
        return self.embed_batch(series.values[None, :])[0]


class BandlimitedEncoder(SpectralEncoder):
    """Magnitude spectrum with every bin outside the band zeroed."""

    def __init__(self, length: int, band: FrequencyBand):
        super().__init__(length)
        self.band = band
        bin_freqs = np.arange(1, self.dim + 1) / length
        self._mask = (bin_freqs >= band.low) & (bin_freqs <= band.high)
        self.id = f"bandlimited(L={length}, [{band.low:.6g}, {band.high:.6g}])"

    def embed_batch(self, values: np.ndarray) -> np.ndarray:
        return super().embed_batch(values) * self._mask


class RandomProjectionEncoder:
    """Fixed seeded Gaussian projection to 128 dimensions."""

    DIM = 128

    def __init__(self, length: int, seed: int = 0):
        if length < 1:
            raise InvalidInputError(f"encoder length must be >= 1, got {length}")
        self.length = length
        self.dim = self.DIM
        self.seed = seed
        rng = substream(seed, TAG_RANDOM_PROJECTION)
        self._matrix = rng.standard_normal((length, self.DIM)) / np.sqrt(length)
        self.id = f"randproj(L={length}, seed={seed})"

    def embed_batch(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if values.shape[1] != self.length:
            raise InvalidInputError(
                f"{self.id} expects length {self.length}, got {values.shape[1]}"
            )
        return values @ self._matrix

    def embed(self, series: TimeSeries) -> np.ndarray:
        return self.embed_batch(series.values[None, :])[0]


class ExternalEncoder:
    """Bridge-backed external model; owns one connection for its lifetime."""

    def __init__(self, endpoint: BridgeEndpoint, wire_batch: int = 64):
        self._client = BridgeClient(endpoint)
        self._client.connect()
        self.dim = self._client.dim
        self.max_length = self._client.max_length
        self.wire_batch = wire_batch
        self.id = f"external({endpoint.describe()})"

    def embed_batch(self, values: np.ndarray) -> np.ndarray:
        values = np.atleast_2d(np.asarray(values, dtype=np.float64))
        if values.shape[1] > self.max_length:
            raise InvalidInputError(
                f"series length {values.shape[1]} exceeds adapter max_length "
                f"{self.max_length}"
            )
        chunks = [
            self._client.embed_batch(values[start : start + self.wire_batch])
            for start in range(0, len(values), self.wire_batch)
        ]
        if not chunks:
            return np.empty((0, self.dim))
        return np.vstack(chunks)

    def embed(self, series: TimeSeries) -> np.ndarray:
        return self.embed_batch(series.values[None, :])[0]

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def make_encoder(spec: str, length: int, bridge_timeout_ms: int = 30000):
    """Build an encoder from its CLI spec string.

    spectral | bandlimited:LOW,HIGH | randproj[:SEED] | external:CMD...
    """
    if spec == "spectral":
        return SpectralEncoder(length)
    if spec.startswith("bandlimited:"):
        body = spec.split(":", 1)[1]
        try:
            low, high = (float(tok) for tok in body.split(","))
        except ValueError:
            raise InvalidInputError(
                f"bandlimited spec needs LOW,HIGH — got {body!r}"
            ) from None
        return BandlimitedEncoder(length, FrequencyBand(low, high))
    if spec == "randproj":
        return RandomProjectionEncoder(length)
    if spec.startswith("randproj:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise InvalidInputError(f"randproj seed must be an integer in {spec!r}") from None
        return RandomProjectionEncoder(length, seed=seed)
    if spec.startswith("external:"):
        command = spec.split(":", 1)[1]
        if not command.strip():
            raise InvalidInputError("external encoder spec needs a command")
        endpoint = BridgeEndpoint.stdio(shlex.split(command), timeout_ms=bridge_timeout_ms)
        return ExternalEncoder(endpoint)
    raise InvalidInputError(f"unknown encoder spec {spec!r}")
