from .builder import C0, C1, CircuitBuilder
from .core import (AND, INV, XOR, BooleanCircuit, CircuitBundle, CircuitError, Gate,
                   InputWidthMismatch, ParseError, ValidationError, bits_to_int, eval_int,
                   eval_plain, int_to_bits, parse_circuit, serialize_circuit)
from .library import build_toy_cipher_circuit
from .spn import spn_encrypt

__all__ = [
    "AND", "INV", "XOR", "C0", "C1", "BooleanCircuit", "CircuitBuilder", "CircuitBundle",
    "CircuitError", "Gate", "InputWidthMismatch", "ParseError", "ValidationError",
    "bits_to_int", "build_toy_cipher_circuit", "eval_int", "eval_plain", "int_to_bits",
    "parse_circuit", "serialize_circuit", "spn_encrypt",
]
