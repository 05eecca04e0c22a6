"""Quantum gate IR over the OpenQASM 2.0 gate set, plus the Shor circuit.

Qubit ``q`` of a ``K``-qubit circuit is bit ``K-1-q`` of a basis-state index
(qubit 0 is the most significant).  A reversible circuit on bits ``0..w-1``
translates to a gate circuit on qubits ``0..w-1`` with bit ``i`` carried by
qubit ``i``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable

from .errors import ParameterError, TranslationError
from .numtheory import gcd
from .rcir import Ctrl, Not, RevCircuit, Swap, leaves
from .revarith import imm, imm_count, modulus_width

# kind -> (number of qubits, number of angles)
GATE_ARITY = {
    "X": (1, 0),
    "H": (1, 0),
    "U1": (1, 1),
    "U2": (1, 2),
    "U3": (1, 3),
    "CU1": (2, 1),
    "SWAP": (2, 0),
    "CSWAP": (3, 0),
    "CX": (2, 0),
    "CCX": (3, 0),
    "C3X": (4, 0),
    "C4X": (5, 0),
}

# X family indexed by number of controls
X_FAMILY = ("X", "CX", "CCX", "C3X", "C4X")
PERMUTATION_KINDS = frozenset(X_FAMILY) | {"SWAP", "CSWAP"}


@dataclass(frozen=True, slots=True)
class Gate:
    kind: str
    qubits: tuple
    angles: tuple = ()

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ParameterError(f"unknown gate kind {self.kind!r}")
        nq, na = GATE_ARITY[self.kind]
        if len(self.qubits) != nq:
            raise ParameterError(f"{self.kind} takes {nq} qubits, got {self.qubits}")
        if len(self.angles) != na:
            raise ParameterError(f"{self.kind} takes {na} angles, got {self.angles}")
        if len(set(self.qubits)) != nq:
            raise ParameterError(f"{self.kind} qubits must be distinct, got {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ParameterError(f"negative qubit index in {self.qubits}")

    def __str__(self):
        args = ",".join(f"{t:g}" for t in self.angles)
        head = f"{self.kind}({args})" if self.angles else self.kind
        return f"{head} " + " ".join(map(str, self.qubits))


_new = object.__new__
_set = object.__setattr__


def _raw(kind: str, qubits: tuple, angles: tuple = ()) -> Gate:
    # derived from already-validated gates, so the checks are skipped
    g = _new(Gate)
    _set(g, "kind", kind)
    _set(g, "qubits", qubits)
    _set(g, "angles", angles)
    return g


def gate(kind: str, *qubits: int, angles: Iterable[float] = ()) -> Gate:
    return Gate(kind, tuple(int(q) for q in qubits), tuple(float(t) for t in angles))


def x_gate(controls: tuple, target: int) -> Gate:
    if len(controls) >= len(X_FAMILY):
        raise TranslationError(
            f"{len(controls)} controls exceed the C4X limit", offending=(controls, target)
        )
    return Gate(X_FAMILY[len(controls)], tuple(controls) + (target,))


@dataclass(frozen=True)
class GateCircuit:
    num_qubits: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise ParameterError(
                    f"gate {g} uses a qubit outside a {self.num_qubits}-qubit circuit"
                )

    @classmethod
    def _trusted(cls, num_qubits: int, gates: tuple) -> "GateCircuit":
        c = _new(cls)
        _set(c, "num_qubits", num_qubits)
        _set(c, "gates", gates)
        return c

    def __len__(self):
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def then(self, other: "GateCircuit") -> "GateCircuit":
        width = max(self.num_qubits, other.num_qubits)
        return GateCircuit._trusted(width, self.gates + other.gates)

    def widen(self, num_qubits: int) -> "GateCircuit":
        if num_qubits < self.num_qubits:
            raise ParameterError("cannot shrink a circuit")
        return GateCircuit._trusted(num_qubits, self.gates)

    def kinds(self) -> set:
        return {g.kind for g in self.gates}

    def is_classical(self) -> bool:
        return all(g.kind in PERMUTATION_KINDS for g in self.gates)


def structurally_equal(c1: GateCircuit, c2: GateCircuit, tol: float = 1e-12) -> bool:
    """Same width, kinds and qubits gate by gate; angles equal within ``tol``."""
    if c1.num_qubits != c2.num_qubits or len(c1) != len(c2):
        return False
    for g1, g2 in zip(c1.gates, c2.gates):
        if g1.kind != g2.kind or g1.qubits != g2.qubits:
            return False
        if any(abs(t1 - t2) > tol for t1, t2 in zip(g1.angles, g2.angles)):
            return False
    return True


def gate_count(c: GateCircuit) -> int:
    return len(c.gates)


def gate_count_bound(n: int, m: int) -> int:
    """Certified gate-count polynomial for one Shor iteration."""
    return (212 * n * n + 975 * n + 1031) * m + 4 * m + m * m


# --- RCIR translation -------------------------------------------------------


def _leaf_circuit(controls, op, operands) -> RevCircuit:
    body = Not(operands[0]) if op == "X" else Swap(*operands)
    for q in reversed(controls):
        body = Ctrl(q, body)
    return body


def translate_leaf(controls: tuple, op: str, operands: tuple) -> list:
    try:
        if op == "X":
            return [x_gate(controls, operands[0])]
        i, j = operands
        if not controls:
            return [Gate("SWAP", (i, j))]
        if len(controls) == 1:
            return [Gate("CSWAP", (controls[0], i, j))]
        # controlled swap as CX(j,i); C^{k+1}X(controls, i -> j); CX(j,i)
        return [Gate("CX", (j, i)), x_gate(controls + (i,), j), Gate("CX", (j, i))]
    except TranslationError as exc:
        raise TranslationError(
            f"control depth {len(controls)} on {op} is beyond the gate set",
            offending=_leaf_circuit(controls, op, operands),
        ) from exc


def translate_rcir(c: RevCircuit, width: int) -> GateCircuit:
    """Map each reversible leaf to the matching (multi-)controlled gate."""
    from .rcir import check_well_typed

    check_well_typed(c, width)
    out = []
    for controls, op, operands in leaves(c):
        out.extend(translate_leaf(controls, op, operands))
    return GateCircuit(width, tuple(out))


# --- structural combinators ---------------------------------------------------


def npar(k: int, kind: str = "H") -> GateCircuit:
    if GATE_ARITY.get(kind) != (1, 0):
        raise ParameterError(f"npar needs an angle-free one-qubit gate, got {kind!r}")
    return GateCircuit(k, tuple(Gate(kind, (q,)) for q in range(k)))


def qft(k: int) -> GateCircuit:
    """k-qubit Fourier transform with the final qubit-reversal swaps."""
    gates = []
    for i in range(k):
        gates.append(Gate("H", (i,)))
        for j in range(i + 1, k):
            gates.append(Gate("CU1", (j, i), (math.pi / 2 ** (j - i),)))
    for i in range(k // 2):
        gates.append(Gate("SWAP", (i, k - 1 - i)))
    return GateCircuit(k, tuple(gates))


def invert_gate(g: Gate) -> Gate:
    if g.kind in ("U1", "CU1"):
        return Gate(g.kind, g.qubits, (-g.angles[0],))
    if g.kind == "U2":
        phi, lam = g.angles
        return Gate("U2", g.qubits, (math.pi - lam, math.pi - phi))
    if g.kind == "U3":
        theta, phi, lam = g.angles
        return Gate("U3", g.qubits, (-theta, -lam, -phi))
    return g


def invert(c: GateCircuit) -> GateCircuit:
    return GateCircuit._trusted(c.num_qubits, tuple(invert_gate(g) for g in reversed(c.gates)))


def map_qubits(offset: int, c: GateCircuit) -> GateCircuit:
    if offset < 0:
        raise ParameterError("qubit offset must be non-negative")
    gates = tuple(
        _raw(g.kind, tuple(q + offset for q in g.qubits), g.angles) for g in c.gates
    )
    return GateCircuit._trusted(c.num_qubits + offset, gates)


_ADD_CONTROL = {k: X_FAMILY[i + 1] for i, k in enumerate(X_FAMILY[:-1])}
_ADD_CONTROL["SWAP"] = "CSWAP"
_ADD_CONTROL["U1"] = "CU1"


def control_gate(q: int, g: Gate) -> list:
    k = g.kind
    if k in _ADD_CONTROL:
        return [_raw(_ADD_CONTROL[k], (q,) + g.qubits, g.angles)]
    if k == "CSWAP":
        c, i, j = g.qubits
        return [_raw("CX", (j, i)), _raw("C3X", (q, c, i, j)), _raw("CX", (j, i))]
    if k == "C4X":
        raise TranslationError(f"cannot add a control to {g}", offending=g)
    raise TranslationError(f"no controlled form of {k} in the gate set", offending=g)


def control(q: int, c: GateCircuit) -> GateCircuit:
    out = []
    for g in c.gates:
        if q in g.qubits:
            raise ParameterError(f"control qubit {q} is used by {g}")
        k = g.kind
        if k in _ADD_CONTROL:
            out.append(_raw(_ADD_CONTROL[k], (q,) + g.qubits, g.angles))
        else:
            out.extend(control_gate(q, g))
    return GateCircuit._trusted(max(c.num_qubits, q + 1), tuple(out))


def controlled_powers(f: Callable[[int], GateCircuit], k: int, kmax: int) -> GateCircuit:
    """Qubit ``kmax-1-i`` controls ``f(i)`` for ``i < k``."""
    gates = []
    width = kmax
    for i in range(k):
        part = control(kmax - 1 - i, f(i))
        gates.extend(part.gates)
        width = max(width, part.num_qubits)
    return GateCircuit._trusted(width, tuple(gates))


def qpe(k: int, n: int, f: Callable[[int], GateCircuit]) -> GateCircuit:
    """Phase estimation with a k-qubit control register on qubits ``0..k-1``.

    ``f(i)`` acts on ``n`` qubits and should implement ``U**(2**i)``.
    """
    shifted = lambda i: map_qubits(k, f(i).widen(n))  # noqa: E731
    body = controlled_powers(shifted, k, k)
    return npar(k, "H").widen(k + n).then(body.widen(k + n)).then(invert(qft(k)).widen(k + n))


# --- Shor ---------------------------------------------------------------------


@dataclass(frozen=True)
class ShorParams:
    a: int
    N: int

    @property
    def n(self) -> int:
        return modulus_width(self.N)

    @property
    def m(self) -> int:
        return (2 * self.N * self.N).bit_length() - 1

    @property
    def s(self) -> int:
        return 3 * self.n + 11

    @property
    def total_qubits(self) -> int:
        return self.m + self.n + self.s

    @property
    def work_offset(self) -> int:
        """First qubit of the work register (its least significant bit)."""
        return self.m

    def multipliers(self) -> list:
        return [pow(self.a, 1 << i, self.N) for i in range(self.m)]


def shor_params(a: int, N: int) -> ShorParams:
    if N < 3:
        raise ParameterError(f"N must be at least 3, got {N}")
    if not 1 < a < N:
        raise ParameterError(f"a must satisfy 1 < a < N, got a={a}, N={N}")
    if gcd(a, N) != 1:
        raise ParameterError(f"gcd({a}, {N}) = {gcd(a, N)} != 1")
    return ShorParams(a, N)


@lru_cache(maxsize=128)
def imm_gates(multiplier: int, N: int) -> GateCircuit:
    """Translated IMM(multiplier, N) on the n + s qubits of the work space."""
    n = modulus_width(N)
    return translate_rcir(imm(multiplier, N), n + 3 * n + 11)


def shor_circuit(a: int, N: int) -> tuple:
    """Order-finding circuit for ``a`` mod ``N`` and its parameters.

    The work register starts as the basis state 1 (one X on its least
    significant qubit), then QPE runs over the IMM family ``a**(2**i) mod N``.
    """
    p = shor_params(a, N)
    mults = p.multipliers()
    body = qpe(p.m, p.n + p.s, lambda i: imm_gates(mults[i], N))
    init = GateCircuit(p.total_qubits, (Gate("X", (p.work_offset,)),))
    return init.then(body), p


def qft_gate_count(k: int) -> int:
    return k + k * (k - 1) // 2 + k // 2


def shor_gate_count(a: int, N: int) -> int:
    """Gate count of :func:`shor_circuit` without building it.

    Every IMM leaf becomes exactly one gate, also after adding the QPE
    control (IMM never puts a swap under a control).
    """
    p = shor_params(a, N)
    body = sum(imm_count(b, N) for b in p.multipliers())
    return 1 + p.m + body + qft_gate_count(p.m)
