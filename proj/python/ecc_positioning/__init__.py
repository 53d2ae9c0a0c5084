# SPDX-License-Identifier: Apache-2.0
"""Python access to the positioning library's codec, preprocessing and metrics."""

from ._core import (
    ConfigError,
    MessageError,
    Quantizer,
    calibrate_step,
    compute_mask,
    cosine_loss,
    decode_message,
    encode_message,
    error_cdf,
    gain_indicator,
    lmmse_estimate,
    lmmse_mse,
    nearest_rank,
    normalize_config,
    payload_ratio,
    preprocess,
    select_ref_antenna,
    wmse_weights,
)

__all__ = [
    "ConfigError",
    "MessageError",
    "Quantizer",
    "calibrate_step",
    "compute_mask",
    "cosine_loss",
    "decode_message",
    "encode_message",
    "error_cdf",
    "gain_indicator",
    "lmmse_estimate",
    "lmmse_mse",
    "nearest_rank",
    "normalize_config",
    "payload_ratio",
    "preprocess",
    "select_ref_antenna",
    "wmse_weights",
]
