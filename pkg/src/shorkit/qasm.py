"""OpenQASM 2.0 emission and a parser for the emitted subset."""

from __future__ import annotations

import math
import re
from itertools import combinations
from typing import Iterable, Sequence

from .errors import QasmError
from .gateir import GATE_ARITY, Gate, GateCircuit

HEADER = ('OPENQASM 2.0;', 'include "qelib1.inc";')
_NAMES = {k: k.lower() for k in GATE_ARITY}
_KINDS = {v: k for k, v in _NAMES.items()}

# denominators tried when printing an angle as a multiple of pi
_PI_DENOMINATORS = tuple(range(1, 65)) + tuple(1 << k for k in range(7, 41))


def format_angle(x: float) -> str:
    """``pi``-rational form when it parses back to the identical float,
    otherwise a 17-significant-digit decimal."""
    x = float(x)
    if x == 0.0:
        return "0"
    for q in _PI_DENOMINATORS:
        p = round(x * q / math.pi)
        if p == 0 or abs(p) > 1 << 20:
            continue
        if p * math.pi / q == x:
            sign = "-" if p < 0 else ""
            num = "pi" if abs(p) == 1 else f"{abs(p)}*pi"
            return f"{sign}{num}" if q == 1 else f"{sign}{num}/{q}"
    return f"{x:.17g}"


def multicontrol_x(num_controls: int) -> GateCircuit:
    """C^kX on qubits ``0..k`` (target ``k``) using only h, cx and u1.

    The target is conjugated by H; the all-ones phase on k+1 qubits is a
    signed sum of parity phases, each realised with a CX ladder and one U1.
    """
    k = num_controls + 1
    gates = [Gate("H", (k - 1,))]
    scale = math.pi / (1 << (k - 1))
    for size in range(1, k + 1):
        sign = 1 if size % 2 else -1
        for subset in combinations(range(k), size):
            *rest, last = subset
            ladder = [Gate("CX", (q, last)) for q in rest]
            gates += ladder
            gates.append(Gate("U1", (last,), (sign * scale,)))
            gates += ladder[::-1]
    gates.append(Gate("H", (k - 1,)))
    return GateCircuit(k, tuple(gates))


def _gate_line(g: Gate, reg: str = "q", names: Sequence[str] | None = None) -> str:
    name = _NAMES[g.kind]
    if g.angles:
        name += "(" + ",".join(format_angle(t) for t in g.angles) + ")"
    if names is None:
        args = ",".join(f"{reg}[{i}]" for i in g.qubits)
    else:
        args = ",".join(names[i] for i in g.qubits)
    return f"{name} {args};"


def multicontrol_definitions() -> list:
    lines = []
    for kind, k in (("C3X", 3), ("C4X", 4)):
        formals = [f"a{i}" for i in range(k + 1)]
        body = [_gate_line(g, names=formals) for g in multicontrol_x(k)]
        lines.append(f"gate {kind.lower()} {','.join(formals)} {{")
        lines.extend("  " + b for b in body)
        lines.append("}")
    return lines


def emit(
    c: GateCircuit,
    measured_qubits: Iterable[int] = (),
    define_multicontrol: bool = False,
) -> str:
    """Serialise ``c``; ``measured_qubits[j]`` is measured into ``c[j]``."""
    measured = [int(q) for q in measured_qubits]
    if any(not 0 <= q < c.num_qubits for q in measured):
        raise QasmError("measured qubit outside the quantum register")
    lines = list(HEADER)
    if define_multicontrol:
        lines += multicontrol_definitions()
    lines.append(f"qreg q[{c.num_qubits}];")
    lines.append(f"creg c[{max(1, len(measured))}];")
    for g in c.gates:
        if g.kind not in _NAMES:
            raise QasmError(f"gate kind {g.kind} has no OpenQASM form")
        lines.append(_gate_line(g))
    lines += [f"measure q[{q}] -> c[{j}];" for j, q in enumerate(measured)]
    return "\n".join(lines) + "\n"


def shor_measured_qubits(m: int) -> list:
    """Measurement order that makes the classical register read the QPE
    outcome (c[0] is its least significant bit)."""
    return list(range(m - 1, -1, -1))


# --- parser -----------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<real>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<arrow>->)
  | (?P<sym>[;,\[\](){}+\-*/^])
    """,
    re.VERBOSE,
)


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind, self.text, self.line, self.col = kind, text, line, col

    def __repr__(self):
        return f"{self.text!r}@{self.line}:{self.col}"


def tokenize(text: str) -> list:
    toks, pos, line, col = [], 0, 1, 1
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise QasmError(f"unexpected character {text[pos]!r}", line, col)
        kind, val = mt.lastgroup, mt.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                toks.append(_Tok(kind, val, line, col))
            col += len(val)
        pos = mt.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.qreg = None  # (name, size)
        self.creg = None
        self.gates = []
        self.measures = {}
        self.versioned = False

    # token helpers
    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text=None, kind=None):
        t = self.next()
        if (text is not None and t.text != text) or (kind is not None and t.kind != kind):
            want = repr(text) if text is not None else kind
            shown = repr(t.text) if t.kind != "eof" else "end of input"
            line, col = t.line, t.col
            if text == ";" and self.i >= 2:
                # a missing terminator belongs right after the previous token
                prev = self.toks[self.i - 2]
                line, col = prev.line, prev.col + len(prev.text)
            raise QasmError(f"expected {want}, found {shown}", line, col)
        return t

    # expressions over reals and pi
    def expr(self):
        v = self.term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            r = self.term()
            v = v + r if op == "+" else v - r
        return v

    def term(self):
        v = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.next().text
            r = self.unary()
            if op == "*":
                v = v * r
            else:
                if r == 0:
                    t = self.toks[self.i - 1]
                    raise QasmError("division by zero in angle", t.line, t.col)
                v = v / r
        return v

    def unary(self):
        if self.peek().text == "-":
            self.next()
            return -self.unary()
        if self.peek().text == "+":
            self.next()
            return self.unary()
        return self.atom()

    def atom(self):
        t = self.next()
        if t.kind == "real":
            return float(t.text)
        if t.kind == "id" and t.text == "pi":
            return math.pi
        if t.text == "(":
            v = self.expr()
            self.expect(")")
            return v
        raise QasmError(f"bad angle expression at {t.text!r}", t.line, t.col)

    def index(self, reg):
        name = self.expect(kind="id")
        if reg is None or name.text != reg[0]:
            raise QasmError(f"unknown register {name.text!r}", name.line, name.col)
        self.expect("[")
        t = self.expect(kind="real")
        if not t.text.isdigit():
            raise QasmError("register index must be an integer", t.line, t.col)
        k = int(t.text)
        if k >= reg[1]:
            raise QasmError(f"index {k} out of range for {reg[0]}[{reg[1]}]", t.line, t.col)
        self.expect("]")
        return k

    def declaration(self, which):
        t = self.toks[self.i - 1]
        name = self.expect(kind="id").text
        self.expect("[")
        size = self.expect(kind="real")
        if not size.text.isdigit():
            raise QasmError("register size must be an integer", size.line, size.col)
        self.expect("]")
        self.expect(";")
        for reg in (self.qreg, self.creg):
            if reg is not None and reg[0] == name:
                raise QasmError(f"register {name!r} redeclared", t.line, t.col)
        if getattr(self, which) is not None:
            raise QasmError(f"only one {which} is supported", t.line, t.col)
        setattr(self, which, (name, int(size.text)))

    def skip_definition(self):
        t = self.toks[self.i - 1]
        name = self.expect(kind="id")
        if name.text not in ("c3x", "c4x"):
            raise QasmError(f"user-defined gate {name.text!r} not supported", t.line, t.col)
        while self.peek().text != "{":
            if self.peek().kind == "eof":
                raise QasmError("unterminated gate definition", t.line, t.col)
            self.next()
        depth = 0
        while True:
            tok = self.next()
            if tok.kind == "eof":
                raise QasmError("unterminated gate definition", t.line, t.col)
            depth += tok.text == "{"
            depth -= tok.text == "}"
            if depth == 0:
                return

    def statement(self):
        t = self.next()
        if t.kind != "id":
            raise QasmError(f"unexpected {t.text!r}", t.line, t.col)
        word = t.text
        if (word == "OPENQASM") == self.versioned:
            msg = "duplicate OPENQASM header" if self.versioned else "document must start with OPENQASM 2.0;"
            raise QasmError(msg, t.line, t.col)
        if word == "OPENQASM":
            self.versioned = True
            v = self.expect(kind="real")
            if v.text not in ("2.0", "2"):
                raise QasmError(f"unsupported version {v.text}", v.line, v.col)
            self.expect(";")
        elif word == "include":
            self.expect(kind="string")
            self.expect(";")
        elif word == "qreg":
            self.declaration("qreg")
        elif word == "creg":
            self.declaration("creg")
        elif word == "gate":
            self.skip_definition()
        elif word == "measure":
            q = self.index(self.qreg)
            self.expect("->")
            c = self.index(self.creg)
            self.expect(";")
            if c in self.measures:
                raise QasmError(f"classical bit c[{c}] measured twice", t.line, t.col)
            self.measures[c] = q
        elif word in _KINDS:
            kind = _KINDS[word]
            nq, na = GATE_ARITY[kind]
            angles = []
            if self.peek().text == "(":
                self.next()
                if self.peek().text != ")":
                    angles.append(self.expr())
                    while self.peek().text == ",":
                        self.next()
                        angles.append(self.expr())
                self.expect(")")
            if len(angles) != na:
                raise QasmError(f"{word} takes {na} parameters, got {len(angles)}", t.line, t.col)
            qubits = [self.index(self.qreg)]
            while self.peek().text == ",":
                self.next()
                qubits.append(self.index(self.qreg))
            self.expect(";")
            if len(qubits) != nq or len(set(qubits)) != nq:
                raise QasmError(f"{word} needs {nq} distinct qubits", t.line, t.col)
            self.gates.append(Gate(kind, tuple(qubits), tuple(angles)))
        else:
            raise QasmError(f"unknown gate or statement {word!r}", t.line, t.col)

    def run(self):
        while self.peek().kind != "eof":
            self.statement()
        return self.finish()

    def finish(self):
        if self.qreg is None:
            t = self.peek()
            raise QasmError("no quantum register declared", t.line, t.col)
        clbits = sorted(self.measures)
        if clbits != list(range(len(clbits))):
            raise QasmError("measurements must fill c[0..M-1] contiguously")
        measured = tuple(self.measures[j] for j in clbits)
        return GateCircuit(self.qreg[1], tuple(self.gates)), measured


_SIMPLE_GATE = re.compile(
    r"\s*([a-z][a-z0-9]*)(?:\(([^()]*)\))?\s+(\w+)\[(\d+)\]((?:\s*,\s*\w+\[\d+\])*)\s*;\s*$"
)
_MORE_ARGS = re.compile(r"(\w+)\[(\d+)\]")


def _fast_gates(lines, start, qreg, angle_cache):
    """Parse plain one-line gate statements; stop at the first other line.

    Returns the gates and the index of the first line not handled here.
    """
    gates = []
    name, size = qreg
    seen = angle_cache.setdefault(None, {})  # line text -> Gate
    i = start
    for i in range(start, len(lines)):
        hit = seen.get(lines[i])
        if hit is not None:
            gates.append(hit)
            continue
        mt = _SIMPLE_GATE.match(lines[i])
        if not mt or mt.group(1) not in _KINDS:
            return gates, i
        kind = _KINDS[mt.group(1)]
        nq, na = GATE_ARITY[kind]
        regs = [(mt.group(3), mt.group(4))] + _MORE_ARGS.findall(mt.group(5))
        if any(r != name for r, _ in regs):
            return gates, i
        qubits = tuple(int(k) for _, k in regs)
        if len(qubits) != nq or len(set(qubits)) != nq or max(qubits) >= size:
            return gates, i
        params = mt.group(2)
        if params is None:
            angles = ()
        else:
            angles = angle_cache.get(params)
            if angles is None:
                angles = _angles(params)
                if angles is None:
                    return gates, i
                angle_cache[params] = angles
        if len(angles) != na:
            return gates, i
        g = Gate(kind, qubits, angles)
        seen[lines[i]] = g
        gates.append(g)
    else:
        return gates, len(lines)


def _angles(params: str):
    try:
        p = _Parser(params)
        vals = [p.expr()]
        while p.peek().text == ",":
            p.next()
            vals.append(p.expr())
        if p.peek().kind != "eof":
            return None
        return tuple(vals)
    except QasmError:
        return None


def parse(text: str) -> tuple:
    """Inverse of :func:`emit`: ``(GateCircuit, measured qubits by clbit)``.

    Declarations go through the full tokenizer; long runs of one-line gate
    statements take a regex fast path, falling back to the tokenizer (and its
    error positions) on anything unusual.
    """
    lines = text.split("\n")
    p = _Parser("")
    p.toks = []
    angle_cache: dict = {}
    i = 0
    while i < len(lines):
        if p.qreg is not None:
            gates, j = _fast_gates(lines, i, p.qreg, angle_cache)
            p.gates.extend(gates)
            i = j
            if i >= len(lines):
                break
        # hand the rest of this statement to the tokenizer, one line at a time
        # while it is incomplete
        j = i + 1
        chunk = lines[i]
        while True:
            try:
                toks = tokenize(chunk)
                _balanced_statement(toks)
                break
            except _Incomplete:
                if j >= len(lines):
                    break
                chunk += "\n" + lines[j]
                j += 1
        for t in toks:
            t.line += i
        p.toks, p.i = toks, 0
        while p.peek().kind != "eof":
            p.statement()
        i = j
    return p.finish()


class _Incomplete(Exception):
    pass


def _balanced_statement(toks):
    """Raise _Incomplete unless the tokens end at a statement boundary."""
    depth = 0
    last = None
    for t in toks:
        if t.kind == "eof":
            break
        depth += t.text == "{"
        depth -= t.text == "}"
        last = t
    if last is None:
        return
    if depth > 0 or last.text not in (";", "}"):
        raise _Incomplete
