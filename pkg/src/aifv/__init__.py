"""Binary AIFV-m codes: construction, validation, coding and redundancy analysis."""

from .analysis import f, f3, f4, loop_analysis, simulate, worst_case_curves
from .codec import CodedContainer, DecodeError, StreamDecoder, decode, encode, measure_delay, pack, unpack
from .construct import (
    best_code,
    brute_force_optimal,
    build_aifv2,
    build_aifv3,
    build_aifv4,
    build_aifvm,
    huffman_code,
    random_code,
    to_base,
)
from .core import SourceDistribution, binary_entropy, entropy
from .huffman import build_huffman, check_sibling_property, entropy_decomposition, gallager_bound, sibling_sequence
from .markov import average_code_length, redundancy, redundancy_report, stationary, transition_matrix
from .tree import AifvCode, codeword_table, validate_tree, verify_zero_run

__all__ = [
    "AifvCode", "CodedContainer", "DecodeError", "SourceDistribution", "StreamDecoder",
    "average_code_length", "best_code", "binary_entropy", "brute_force_optimal", "build_aifv2",
    "build_aifv3", "build_aifv4", "build_aifvm", "build_huffman", "check_sibling_property",
    "codeword_table", "decode", "encode", "entropy", "entropy_decomposition", "f", "f3", "f4",
    "gallager_bound", "huffman_code", "loop_analysis", "measure_delay", "pack", "random_code",
    "redundancy", "redundancy_report", "sibling_sequence", "simulate", "stationary", "to_base",
    "transition_matrix", "unpack", "validate_tree", "verify_zero_run", "worst_case_curves",
]
