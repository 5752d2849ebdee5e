"""Model-backend wire protocol: domain types, payload codecs, and the client interface.

Endpoints (JSON over HTTP, field names fixed):
    POST /v1/tokenize   {text}                          -> {token_ids, offsets}
    POST /v1/embed      {token_ids}                     -> {rows, cols, values}
    POST /v1/forward    {rows, cols, values, max_steps} -> {steps, vocab, values, produced_token_ids}
    POST /v1/next_token {prompt}                        -> {probs}
    POST /v1/generate   {prompt, max_steps}             -> {text}
    GET  /v1/info                                       -> {vocab_size, embed_dim, model_name}

Embedding and distribution matrices travel as flat row-major float lists.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

PROB_ROW_TOL = 1e-6


@dataclass(frozen=True)
class TokenizedText:
    """A text with its token ids and per-token [start, end) character spans."""

    text: str
    token_ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.token_ids) != len(self.offsets):
            raise InputError("token_ids and offsets length mismatch")
        prev_end = 0
        for start, end in self.offsets:
            if not (0 <= start < end <= len(self.text)):
                raise InputError(f"offset ({start}, {end}) outside text bounds")
            if start < prev_end:
                raise InputError("offsets overlap or are out of order")
            prev_end = end

    def __len__(self) -> int:
        return len(self.token_ids)

    def to_payload(self) -> dict:
        return {
            "token_ids": list(self.token_ids),
            "offsets": [[s, e] for s, e in self.offsets],
        }

    @classmethod
    def from_payload(cls, text: str, payload: dict) -> "TokenizedText":
        return cls(
            text=text,
            token_ids=tuple(int(i) for i in payload["token_ids"]),
            offsets=tuple((int(s), int(e)) for s, e in payload["offsets"]),
        )


@dataclass(frozen=True)
class EmbeddingMatrix:
    """T x d matrix of input embeddings, one row per token."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InputError("embedding matrix must be 2-D with at least one row")
        if not np.all(np.isfinite(arr)):
            raise InputError("embedding matrix contains non-finite values")
        object.__setattr__(self, "values", arr)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def to_payload(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "values": [float(x) for x in self.values.reshape(-1)],
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "EmbeddingMatrix":
        rows, cols = int(payload["rows"]), int(payload["cols"])
        values = np.asarray(payload["values"], dtype=np.float64)
        if values.size != rows * cols:
            raise InputError("embedding payload size mismatch")
        return cls(values=values.reshape(rows, cols))


@dataclass(frozen=True)
class StepDistributions:
    """Per-generation-step probability rows over the vocabulary (G x V)."""

    values: np.ndarray
    produced_token_ids: tuple[int, ...]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InputError("step distributions must be 2-D with G >= 1")
        if np.any(arr < 0):
            raise InputError("probability rows must be nonnegative")
        sums = arr.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > PROB_ROW_TOL):
            raise InputError("probability rows must sum to 1")
        if len(self.produced_token_ids) != arr.shape[0]:
            raise InputError("produced_token_ids must match step count")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "produced_token_ids", tuple(int(i) for i in self.produced_token_ids))

    @property
    def steps(self) -> int:
        return self.values.shape[0]

    @property
    def vocab(self) -> int:
        return self.values.shape[1]

    def to_payload(self) -> dict:
        return {
            "steps": self.steps,
            "vocab": self.vocab,
            "values": [float(x) for x in self.values.reshape(-1)],
            "produced_token_ids": list(self.produced_token_ids),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "StepDistributions":
        steps, vocab = int(payload["steps"]), int(payload["vocab"])
        values = np.asarray(payload["values"], dtype=np.float64)
        if values.size != steps * vocab:
            raise InputError("distribution payload size mismatch")
        return cls(
            values=values.reshape(steps, vocab),
            produced_token_ids=tuple(payload["produced_token_ids"]),
        )


@dataclass
class BackendConfig:
    """Connection and toy-model settings.

    endpoint "in-process" runs the seeded toy model directly; any http(s) URI
    goes through the wire client. seed and script_path only affect the toy
    model.
    """

    endpoint: str = "in-process"
    vocab_size: int = 64
    embed_dim: int = 32
    max_steps: int = 32
    request_timeout: float = 10.0
    seed: int = 0
    script_path: str | None = None

    def __post_init__(self):
        if self.vocab_size < 4:
            raise InputError("vocab_size must be >= 4 (eos, Yes, No, plus one more)")
        if self.embed_dim < 1:
            raise InputError("embed_dim must be positive")
        if self.max_steps < 1:
            raise InputError("max_steps must be >= 1")
        if self.request_timeout <= 0:
            raise InputError("request_timeout must be positive")
        if self.seed < 0:
            raise InputError("seed must be nonnegative")


@dataclass(frozen=True)
class BackendInfo:
    vocab_size: int
    embed_dim: int
    model_name: str

    def to_payload(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "embed_dim": self.embed_dim,
            "model_name": self.model_name,
        }


class Backend(abc.ABC):
    """Client interface every model backend implements.

    Implementations are stateless per request and safe for concurrent use.
    """

    @abc.abstractmethod
    def info(self) -> BackendInfo: ...

    @abc.abstractmethod
    def tokenize(self, text: str) -> TokenizedText: ...

    @abc.abstractmethod
    def embed(self, token_ids) -> EmbeddingMatrix: ...

    @abc.abstractmethod
    def forward_distributions(self, embeddings: EmbeddingMatrix, max_steps: int) -> StepDistributions: ...

    @abc.abstractmethod
    def next_token_distribution(self, prompt: str) -> np.ndarray: ...

    @abc.abstractmethod
    def generate(self, prompt: str, max_steps: int) -> str: ...
