"""Shor's algorithm built end to end: reversible arithmetic, gate-level
circuits, OpenQASM 2.0 output, sparse simulation and classical
post-processing, with brute-force checks of the supporting number theory."""

from .errors import (
    IrreversibleError,
    ParameterError,
    QasmError,
    ResourceError,
    ShorError,
    TranslationError,
    TypingError,
)
from .gateir import Gate, GateCircuit, ShorParams, gate_count, gate_count_bound, shor_circuit
from .rcir import BitRegister, Ctrl, Not, Seq, Skip, Swap, eval_rcir, reverse, well_typed

__version__ = "0.1.0"
