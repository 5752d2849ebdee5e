"""Model backends: wire protocol, toy model, HTTP client/server."""

from .http import BackendServer, HttpBackend
from .protocol import (
    Backend,
    BackendConfig,
    BackendInfo,
    EmbeddingMatrix,
    StepDistributions,
    TokenizedText,
)
from .toy import EOS_ID, NO_ID, YES_ID, ScriptTable, ToyBackend, ToyTokenizer, dispatch


def make_backend(config: BackendConfig) -> Backend:
    """Instantiate the backend described by the config."""
    if config.endpoint == "in-process":
        return ToyBackend(config)
    return HttpBackend(config)


__all__ = [
    "Backend",
    "BackendConfig",
    "BackendInfo",
    "BackendServer",
    "EmbeddingMatrix",
    "EOS_ID",
    "HttpBackend",
    "NO_ID",
    "ScriptTable",
    "StepDistributions",
    "TokenizedText",
    "ToyBackend",
    "ToyTokenizer",
    "YES_ID",
    "dispatch",
    "make_backend",
]
