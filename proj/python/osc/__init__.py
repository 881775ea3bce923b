"""Activation catalog, property scans, XOR certificates, CIFAR-10 I/O and a small CNN engine."""

from ._osc import *  # noqa: F401,F403
from ._osc import (
    Activation,
    ConfigError,
    CorruptRecordError,
    DomainError,
    FormatError,
    KinkError,
    OscError,
    ParseError,
    ShapeError,
)

__all__ = [
    "Activation",
    "ConfigError",
    "CorruptRecordError",
    "DomainError",
    "FormatError",
    "KinkError",
    "OscError",
    "ParseError",
    "ShapeError",
    "activations",
    "certify",
    "decode_record",
    "derivative",
    "descriptor",
    "encode_record",
    "evaluate",
    "grid_search_certificate",
    "gradient_check",
    "load_cifar10",
    "Model",
    "parse_records",
    "property_report_json",
    "softmax_cross_entropy",
    "solve_xor",
    "synthetic_check_image",
    "train_single_neuron",
    "zero_crossings",
]
