"""Perfectly secure steganography over i.i.d. and subset covertext sources."""

__version__ = "0.1.0"

from .core import (
    BINARY,
    Alphabet,
    BudgetExceeded,
    ContractViolation,
    EncodeResult,
    FixedBits,
    IIDSource,
    SecretExhausted,
    SecretProvider,
    SeededBits,
    StegoCodec,
    StegoError,
    SubsetSource,
    enumerate_strings,
    load_source,
    parse_source,
    shannon_entropy,
    string_mass,
    subset_entropy,
)
from .pair_codec import PairCodec
from .block_codec import BlockCodec
from .verifier import SecurityReport, monte_carlo_check, verify_perfect_security

__all__ = [
    "BINARY", "Alphabet", "BudgetExceeded", "ContractViolation", "EncodeResult", "FixedBits",
    "IIDSource", "SecretExhausted", "SecretProvider", "SeededBits", "StegoCodec", "StegoError",
    "SubsetSource", "enumerate_strings", "load_source", "parse_source", "shannon_entropy",
    "string_mass", "subset_entropy", "PairCodec", "BlockCodec", "SecurityReport",
    "monte_carlo_check", "verify_perfect_security",
]
