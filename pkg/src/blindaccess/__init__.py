"""Blind deconvolution / demixing for secure uncoordinated multi-user access.

A hierarchical hard thresholding pursuit solver over a lifted cyclic
convolution model, plus an end-to-end simulation of a two-phase access
scheme where channel reciprocity supplies per-user encryption keys.
"""

from .coding import (
    cipher_bit_length,
    decode_message,
    draw_message_and_signal,
    encode_message,
    message_bit_length,
    message_space_size,
)
from .experiments import CSV_HEADER, SweepGrid, SweepRecord, emit_csv, read_csv, sweep
from .hierarchy import (
    HierSupport,
    SparsityProfile,
    hier_threshold,
    project,
    support_equal,
    support_of,
    top_s,
)
from .measurement import (
    MeasurementOperator,
    ModelDims,
    draw_codebooks,
    load_codebooks,
    save_codebooks,
)
from .protocol import (
    KeyQuantizer,
    PlantedInstance,
    ProtocolConfig,
    ProtocolOutcome,
    ReciprocalChannelPair,
    UserInstance,
    decrypt,
    derive_key,
    draw_channel,
    encrypt,
    expand_key,
    make_instance,
    reciprocal_pair,
    run_protocol,
    synthesize_uplink,
)
from .signals import (
    circular_convolve,
    cyclic_shift,
    rank_one_factor,
    rate,
    truncated_circulant,
    zero_pad,
)
from .solver import (
    SolverConfig,
    SolverResult,
    SuccessReport,
    evaluate_success,
    hihtp,
    recover_factors,
    restricted_least_squares,
)

__version__ = "0.1.0"

__all__ = [
    "CSV_HEADER",
    "HierSupport",
    "KeyQuantizer",
    "MeasurementOperator",
    "ModelDims",
    "PlantedInstance",
    "ProtocolConfig",
    "ProtocolOutcome",
    "ReciprocalChannelPair",
    "SolverConfig",
    "SolverResult",
    "SparsityProfile",
    "SuccessReport",
    "SweepGrid",
    "SweepRecord",
    "UserInstance",
    "cipher_bit_length",
    "circular_convolve",
    "cyclic_shift",
    "decode_message",
    "decrypt",
    "derive_key",
    "draw_channel",
    "draw_codebooks",
    "draw_message_and_signal",
    "emit_csv",
    "encode_message",
    "encrypt",
    "evaluate_success",
    "expand_key",
    "hier_threshold",
    "hihtp",
    "load_codebooks",
    "make_instance",
    "message_bit_length",
    "message_space_size",
    "project",
    "rank_one_factor",
    "rate",
    "read_csv",
    "reciprocal_pair",
    "recover_factors",
    "restricted_least_squares",
    "run_protocol",
    "save_codebooks",
    "support_equal",
    "support_of",
    "sweep",
    "synthesize_uplink",
    "top_s",
    "truncated_circulant",
    "zero_pad",
]
