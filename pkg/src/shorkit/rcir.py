"""Classical reversible circuit IR.

A circuit is one of five immutable node types::

    Skip | Not(target) | Ctrl(control, body) | Swap(i, j) | Seq(first, second)

Bit ``i`` of a register has weight ``2**i`` (little-endian), so a register of
width ``w`` is interchangeable with an integer in ``[0, 2**w)``.  Builders in
this package always go through :func:`seq`, which produces balanced binary
``Seq`` trees so the recursive helpers below stay shallow even for circuits
with tens of thousands of leaves.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import TypingError


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Not:
    target: int


@dataclass(frozen=True)
class Ctrl:
    control: int
    body: "RevCircuit"


@dataclass(frozen=True)
class Swap:
    i: int
    j: int


@dataclass(frozen=True)
class Seq:
    first: "RevCircuit"
    second: "RevCircuit"


RevCircuit = Union[Skip, Not, Ctrl, Swap, Seq]

SKIP = Skip()


def seq(*parts: RevCircuit) -> RevCircuit:
    """Sequence ``parts`` left to right as a balanced tree of binary ``Seq``.

    ``Skip`` parts are dropped; an empty sequence is ``Skip``.
    """
    items = [p for p in parts if not isinstance(p, Skip)]
    if not items:
        return SKIP

    def build(lo, hi):
        if hi - lo == 1:
            return items[lo]
        mid = (lo + hi) // 2
        return Seq(build(lo, mid), build(mid, hi))

    return build(0, len(items))


def ctrl(control: int, body: RevCircuit) -> RevCircuit:
    if isinstance(body, Skip):
        return SKIP
    return Ctrl(control, body)


@dataclass(frozen=True)
class BitRegister:
    width: int
    bits: tuple

    def __post_init__(self):
        if len(self.bits) != self.width:
            raise ValueError(f"expected {self.width} bits, got {len(self.bits)}")

    @classmethod
    def from_int(cls, value: int, width: int) -> "BitRegister":
        if not 0 <= value < (1 << width):
            raise ValueError(f"{value} does not fit in {width} bits")
        return cls(width, tuple(bool(value >> i & 1) for i in range(width)))

    @classmethod
    def zeros(cls, width: int) -> "BitRegister":
        return cls(width, (False,) * width)

    @property
    def value(self) -> int:
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def field(self, start: int, length: int) -> int:
        """Integer stored in bits ``[start, start + length)``."""
        return (self.value >> start) & ((1 << length) - 1)

    def __int__(self):
        return self.value


# A flattened leaf: (controls, op, operands).  op is "X" (one operand) or
# "SWAP" (two operands).
Leaf = tuple


def leaves(c: RevCircuit) -> Iterator[Leaf]:
    """Yield the primitive leaves of ``c`` in execution order."""
    stack = [(c, ())]
    while stack:
        node, controls = stack.pop()
        if isinstance(node, Seq):
            stack.append((node.second, controls))
            stack.append((node.first, controls))
        elif isinstance(node, Ctrl):
            stack.append((node.body, controls + (node.control,)))
        elif isinstance(node, Not):
            yield controls, "X", (node.target,)
        elif isinstance(node, Swap):
            yield controls, "SWAP", (node.i, node.j)
        elif isinstance(node, Skip):
            continue
        else:
            raise TypeError(f"not a reversible circuit node: {node!r}")


def _typing_problem(c: RevCircuit, width: int):
    for controls, op, operands in leaves(c):
        for idx in controls + operands:
            if not isinstance(idx, (int, np.integer)) or idx < 0:
                return f"bit index {idx!r} is not a natural number"
            if idx >= width:
                return f"bit index {idx} out of range for width {width}"
        if op == "SWAP" and operands[0] == operands[1]:
            return f"swap of bit {operands[0]} with itself"
        clash = set(controls) & set(operands)
        if clash:
            return f"control bit {min(clash)} is also a target of its body"
    return None


def well_typed(c: RevCircuit, width: int) -> bool:
    return _typing_problem(c, width) is None


def check_well_typed(c: RevCircuit, width: int) -> None:
    problem = _typing_problem(c, width)
    if problem is not None:
        raise TypingError(problem)


def reverse(c: RevCircuit) -> RevCircuit:
    if isinstance(c, Seq):
        return Seq(reverse(c.second), reverse(c.first))
    if isinstance(c, Ctrl):
        return Ctrl(c.control, reverse(c.body))
    return c


def primitive_count(c: RevCircuit) -> int:
    return sum(1 for _ in leaves(c))


def depth_profile(c: RevCircuit) -> Counter:
    """Count leaves by ``(op, number of enclosing controls)``."""
    return Counter((op, len(controls)) for controls, op, _ in leaves(c))


def max_control_depth(c: RevCircuit) -> int:
    return max((len(controls) for controls, _, _ in leaves(c)), default=0)


def compile_ops(c: RevCircuit) -> list:
    """Lower ``c`` to ``(control_mask, flip_mask, swap_a, swap_b)`` tuples.

    For X leaves ``swap_a`` is 0; for swaps ``flip_mask`` is 0.
    """
    ops = []
    for controls, op, operands in leaves(c):
        cmask = 0
        for q in controls:
            cmask |= 1 << q
        if op == "X":
            ops.append((cmask, 1 << operands[0], 0, 0))
        else:
            ops.append((cmask, 0, operands[0], operands[1]))
    return ops


def run_ops(ops: Sequence[tuple], value: int) -> int:
    for cmask, flip, i, j in ops:
        if value & cmask != cmask:
            continue
        if flip:
            value ^= flip
        elif (value >> i ^ value >> j) & 1:
            value ^= (1 << i) | (1 << j)
    return value


def eval_int(c: RevCircuit, value: int, width: int) -> int:
    """Evaluate ``c`` on a register given as an integer."""
    check_well_typed(c, width)
    if not 0 <= value < (1 << width):
        raise TypingError(f"register value {value} does not fit in {width} bits")
    return run_ops(compile_ops(c), value)


def eval_rcir(c: RevCircuit, s: BitRegister) -> BitRegister:
    return BitRegister.from_int(eval_int(c, s.value, s.width), s.width)


def eval_many(c: RevCircuit, values, width: int) -> np.ndarray:
    """Vectorised :func:`eval_int` over an array of register values."""
    check_well_typed(c, width)
    dtype = np.uint64 if width <= 64 else object
    v = np.array(values, dtype=dtype)
    one = dtype(1) if dtype is np.uint64 else 1
    for cmask, flip, i, j in compile_ops(c):
        cm = dtype(cmask) if dtype is np.uint64 else cmask
        sel = (v & cm) == cm
        if flip:
            fl = dtype(flip) if dtype is np.uint64 else flip
            v = np.where(sel, v ^ fl, v)
        else:
            ii = dtype(i) if dtype is np.uint64 else i
            jj = dtype(j) if dtype is np.uint64 else j
            differ = ((v >> ii) ^ (v >> jj)) & one
            both = (one << ii) | (one << jj)
            v = np.where(sel & (differ == one), v ^ both, v)
    return v


def pretty(c: RevCircuit) -> str:
    """Debug listing: one construct per line, indented by nesting depth."""
    lines = []

    def walk(node, depth):
        pad = "  " * depth
        if isinstance(node, Seq):
            walk(node.first, depth)
            walk(node.second, depth)
        elif isinstance(node, Ctrl):
            lines.append(f"{pad}ctrl {node.control}")
            walk(node.body, depth + 1)
        elif isinstance(node, Not):
            lines.append(f"{pad}X {node.target}")
        elif isinstance(node, Swap):
            lines.append(f"{pad}swap {node.i} {node.j}")
        else:
            lines.append(f"{pad}skip")

    walk(c, 0)
    return "\n".join(lines)


def random_circuit(rng, width: int, size: int, max_depth: int = 3) -> RevCircuit:
    """Random well-typed circuit with ``size`` leaves on ``width`` bits.

    ``rng`` is a ``numpy.random.Generator``.  Needs ``width > max_depth + 1``
    so a swap always has two free bits.
    """
    if width < max_depth + 2:
        raise ValueError("width too small for the requested control depth")

    def build(n_leaves, controls):
        if n_leaves > 1:
            k = int(rng.integers(1, n_leaves))
            return Seq(build(k, controls), build(n_leaves - k, controls))
        free = [b for b in range(width) if b not in controls]
        if len(controls) < max_depth and len(free) > 2 and rng.random() < 0.35:
            c = int(rng.choice(free))
            return Ctrl(c, build(1, controls | {c}))
        if rng.random() < 0.6:
            return Not(int(rng.choice(free)))
        i, j = rng.choice(free, size=2, replace=False)
        return Swap(int(i), int(j))

    if size == 0:
        return SKIP
    return build(size, frozenset())
