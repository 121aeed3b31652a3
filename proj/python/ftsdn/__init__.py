"""Python bindings for the replicated SDN controller simulator."""

from ._ftsdn import (
    ScenarioError,
    TraceError,
    check,
    decode_ack,
    encode_ack,
    metrics,
    run,
    sweep,
)

__all__ = [
    "ScenarioError",
    "TraceError",
    "check",
    "decode_ack",
    "encode_ack",
    "metrics",
    "run",
    "sweep",
]
