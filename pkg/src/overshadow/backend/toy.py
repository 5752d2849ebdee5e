"""Seeded deterministic toy model implementing the backend protocol in-process.

The model is intentionally tiny: a seeded embedding table (uniform in
[-0.1, 0.1]) and one seeded linear layer mapping the mean input embedding to
vocabulary logits, softmaxed. Greedy decoding appends the argmax token's
table embedding to the input state, so perturbing input rows shifts every
subsequent step distribution continuously.

An optional script table, keyed by exact prompt string, overrides
next_token_distribution (forced Yes/No mass) and generate (canned text) for
end-to-end fixtures.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import InputError
from .protocol import (
    Backend,
    BackendConfig,
    BackendInfo,
    EmbeddingMatrix,
    StepDistributions,
    TokenizedText,
)

EOS_ID = 0
YES_ID = 1
NO_ID = 2
_RESERVED = 3

# Gain of the logit layer; chosen so that sigma≈0.1 keyphrase noise moves the
# pooled output distribution measurably without saturating it.
LOGIT_SCALE = 8.0

_WORD = re.compile(r"\S+")


def _fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


class ToyTokenizer:
    """Whitespace tokenizer over a fixed-size vocabulary.

    Ids 0..2 are reserved for "<eos>", "Yes", "No"; id i >= 3 has canonical
    surface "w{i}". Known surfaces map back to their id (case-insensitive);
    anything else hashes into the non-reserved range, so arbitrary words can
    never alias the reserved tokens.
    """

    def __init__(self, vocab_size: int):
        if vocab_size < 4:
            raise InputError("vocab_size must be >= 4")
        self.vocab_size = vocab_size
        self._surfaces = ["<eos>", "Yes", "No"] + [f"w{i}" for i in range(_RESERVED, vocab_size)]
        self._lookup = {s.lower(): i for i, s in enumerate(self._surfaces)}

    def token_id(self, word: str) -> int:
        key = word.lower()
        known = self._lookup.get(key)
        if known is not None:
            return known
        return _RESERVED + _fnv1a64(key.encode("utf-8")) % (self.vocab_size - _RESERVED)

    def surface(self, token_id: int) -> str:
        if not 0 <= token_id < self.vocab_size:
            raise InputError(f"token id {token_id} out of range")
        return self._surfaces[token_id]

    def tokenize(self, text: str) -> TokenizedText:
        if not text.strip():
            raise InputError("cannot tokenize empty text")
        ids, offsets = [], []
        for m in _WORD.finditer(text):
            ids.append(self.token_id(m.group()))
            offsets.append((m.start(), m.end()))
        return TokenizedText(text=text, token_ids=tuple(ids), offsets=tuple(offsets))

    def detokenize(self, token_ids) -> str:
        return " ".join(self.surface(i) for i in token_ids if i != EOS_ID)


@dataclass
class ScriptTable:
    """Canned responses keyed by exact prompt string.

    generate: prompt -> verbatim completion.
    yes_prob: prompt -> p; next_token_distribution returns mass p on the Yes
    id and 1-p on the No id.
    """

    generate: dict[str, str] = field(default_factory=dict)
    yes_prob: dict[str, float] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str | Path) -> "ScriptTable":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        return cls(
            generate=dict(raw.get("generate", {})),
            yes_prob={k: float(v) for k, v in raw.get("yes_prob", {}).items()},
        )

    def save(self, path: str | Path) -> None:
        from ..ioutil import atomic_write_text, canonical_json

        atomic_write_text(path, canonical_json({"generate": self.generate, "yes_prob": self.yes_prob}))


class ToyBackend(Backend):
    """In-process toy model. Parameters are immutable after construction."""

    def __init__(self, config: BackendConfig, script: ScriptTable | None = None):
        self.config = config
        self.tokenizer = ToyTokenizer(config.vocab_size)
        if script is None and config.script_path:
            script = ScriptTable.load(config.script_path)
        self.script = script or ScriptTable()
        rng = np.random.default_rng(config.seed)
        # Draw order is part of the model definition: table first, then head.
        self.table = rng.uniform(-0.1, 0.1, size=(config.vocab_size, config.embed_dim))
        self.head = rng.normal(0.0, LOGIT_SCALE, size=(config.vocab_size, config.embed_dim))
        self.table.setflags(write=False)
        self.head.setflags(write=False)

    # -- protocol ---------------------------------------------------------

    def info(self) -> BackendInfo:
        return BackendInfo(
            vocab_size=self.config.vocab_size,
            embed_dim=self.config.embed_dim,
            model_name=f"toy-mean-linear-s{self.config.seed}",
        )

    def tokenize(self, text: str) -> TokenizedText:
        return self.tokenizer.tokenize(text)

    def embed(self, token_ids) -> EmbeddingMatrix:
        ids = [int(i) for i in token_ids]
        if not ids:
            raise InputError("token_ids must be non-empty")
        for i in ids:
            if not 0 <= i < self.config.vocab_size:
                raise InputError(f"token id {i} out of range")
        return EmbeddingMatrix(values=self.table[ids].copy())

    def forward_distributions(self, embeddings: EmbeddingMatrix, max_steps: int) -> StepDistributions:
        if max_steps < 1:
            raise InputError("max_steps must be >= 1")
        if embeddings.cols != self.config.embed_dim:
            raise InputError(
                f"embedding dim {embeddings.cols} does not match backend dim {self.config.embed_dim}"
            )
        state = list(embeddings.values)
        rows, produced = [], []
        for _ in range(max_steps):
            probs = self._step_probs(np.mean(state, axis=0))
            tok = int(np.argmax(probs))
            rows.append(probs)
            produced.append(tok)
            if tok == EOS_ID:
                break
            state.append(self.table[tok])
        return StepDistributions(values=np.array(rows), produced_token_ids=tuple(produced))

    def next_token_distribution(self, prompt: str) -> np.ndarray:
        if not prompt.strip():
            raise InputError("prompt must be non-empty")
        scripted = self.script.yes_prob.get(prompt)
        if scripted is not None:
            probs = np.zeros(self.config.vocab_size)
            probs[YES_ID] = scripted
            probs[NO_ID] = 1.0 - scripted
            return probs
        dist = self.forward_distributions(self.embed(self.tokenize(prompt).token_ids), 1)
        return dist.values[0]

    def generate(self, prompt: str, max_steps: int) -> str:
        if not prompt.strip():
            raise InputError("prompt must be non-empty")
        scripted = self.script.generate.get(prompt)
        if scripted is not None:
            return scripted
        dist = self.forward_distributions(self.embed(self.tokenize(prompt).token_ids), max_steps)
        return self.tokenizer.detokenize(dist.produced_token_ids)

    # -- internals --------------------------------------------------------

    def _step_probs(self, mean_embedding: np.ndarray) -> np.ndarray:
        logits = self.head @ mean_embedding
        shifted = np.exp(logits - logits.max())
        return shifted / shifted.sum()


def dispatch(backend: ToyBackend, method: str, path: str, payload: dict | None) -> dict:
    """Route one protocol request to the toy model; shared by the HTTP server
    and the in-process conformance checks."""
    if method == "GET" and path == "/v1/info":
        return backend.info().to_payload()
    if method != "POST":
        raise InputError(f"unsupported route {method} {path}")
    payload = payload or {}
    if path == "/v1/tokenize":
        return backend.tokenize(str(payload["text"])).to_payload()
    if path == "/v1/embed":
        return backend.embed(payload["token_ids"]).to_payload()
    if path == "/v1/forward":
        emb = EmbeddingMatrix.from_payload(payload)
        return backend.forward_distributions(emb, int(payload["max_steps"])).to_payload()
    if path == "/v1/next_token":
        probs = backend.next_token_distribution(str(payload["prompt"]))
        return {"probs": [float(p) for p in probs]}
    if path == "/v1/generate":
        return {"text": backend.generate(str(payload["prompt"]), int(payload["max_steps"]))}
    raise InputError(f"unsupported route {method} {path}")
