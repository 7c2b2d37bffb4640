"""Usability-preserving multi-bit watermarking for numeric tabular datasets.

Embeds an imperceptible watermark into low-importance feature columns with
perturbation rates chosen by constrained swarm optimization, and decodes it
with a per-bit threshold decoder plus majority voting; resilient to
insertion, deletion and alteration attacks.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .attacks import AttackSpec, ResilienceReport, apply_attack, resilience_sweep
from .codec import (CreationResult, Watermark, create_watermark_params, embed,
                    fitness, generate_bits)
from .decoder import (DecodedWatermark, DecoderParams, VoteTally, decode,
                      decoder_threshold, default_correction, detect_bit,
                      majority_vote)
from .errors import (ConfigError, DataError, DecodeError, TabmarkError,
                     UndecodableBitError)
from .keyfile import ChangeMatrix, WatermarkKey, load_key, save_key
from .metrics import (ClassificationStats, GaussianNaiveBayes, bit_correlation,
                      classification_stats, jensen_shannon, kl_divergence)
from .pipeline import EncodeOptions, EncodeResult, encode
from .pso import SwarmConfig, SwarmResult, optimize
from .ranking import (BinningSpec, CandidateSet, CpVector,
                      classification_potential, entropy, information_gain,
                      median_cp, rate_bounds, select_candidates)
from .store import (ColumnStats, ConstraintReport, Dataset,
                    UsabilityConstraints, column_stats, load_dataset,
                    save_dataset, validate_constraints)
from .synth import make_table

__version__ = "0.1.0"

__all__ = [
    "AttackSpec", "BinningSpec", "CandidateSet", "ChangeMatrix",
    "ClassificationStats", "ColumnStats", "ConfigError", "ConstraintReport",
    "CpVector", "CreationResult", "DataError", "Dataset", "DecodeError",
    "DecodedWatermark", "DecoderParams", "EncodeOptions", "EncodeResult",
    "GaussianNaiveBayes", "KERNEL_BACKEND", "ResilienceReport", "SwarmConfig",
    "SwarmResult", "TabmarkError", "UndecodableBitError",
    "UsabilityConstraints", "VoteTally", "Watermark", "WatermarkKey",
    "apply_attack", "bit_correlation", "classification_potential",
    "classification_stats", "column_stats", "create_watermark_params",
    "decode", "decoder_threshold", "default_correction", "detect_bit",
    "embed", "encode", "entropy", "fitness", "generate_bits",
    "information_gain", "jensen_shannon", "kl_divergence", "load_dataset",
    "load_key", "majority_vote", "make_table", "median_cp", "optimize",
    "rate_bounds", "resilience_sweep", "save_dataset", "save_key",
    "select_candidates", "validate_constraints",
]
