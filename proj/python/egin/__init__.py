"""Joint query-item graph embedding and CTR prediction."""

from ._egin import (
    Config,
    ConfigError,
    ContractViolation,
    Error,
    IoError,
    Model,
    NumericError,
    ParseError,
    Sample,
    UndefinedMetric,
    ablate,
    auc,
    build_edges,
    cosine_sim,
    dnn_baseline_auc,
    generate,
    generate_to,
    load_model,
    parse_sample,
    read_samples,
    relaimpr,
    train,
    write_samples,
)

__all__ = [
    "Config",
    "ConfigError",
    "ContractViolation",
    "Error",
    "IoError",
    "Model",
    "NumericError",
    "ParseError",
    "Sample",
    "UndefinedMetric",
    "ablate",
    "auc",
    "build_edges",
    "cosine_sim",
    "dnn_baseline_auc",
    "generate",
    "generate_to",
    "load_model",
    "parse_sample",
    "read_samples",
    "relaimpr",
    "train",
    "write_samples",
]
