"""Sparse statevector simulation.

A state stores only the basis indices with nonzero amplitude, as a sorted
array of ``uint64`` keys and a parallel ``complex128`` array.  Qubit ``q`` of
a ``K``-qubit state is bit ``K-1-q`` of the key.  Permutation gates relabel
keys; branching gates (H, U2, U3) split every key in two and merge duplicates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import ParameterError, ResourceError
from .gateir import Gate, GateCircuit

MAX_QUBITS = 64
DEFAULT_PRUNE = 1e-12
DEFAULT_SUPPORT_CAP = 1 << 26

_ONE = np.uint64(1)


def one_qubit_matrix(g: Gate) -> np.ndarray:
    if g.kind == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if g.kind == "U2":
        phi, lam = g.angles
        return u3_matrix(math.pi / 2, phi, lam)
    if g.kind == "U3":
        return u3_matrix(*g.angles)
    raise ParameterError(f"{g.kind} is not a branching one-qubit gate")


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


def qubit_bit(num_qubits: int, q: int) -> np.uint64:
    return _ONE << np.uint64(num_qubits - 1 - q)


def register_key(value: int, offset: int, width: int, num_qubits: int) -> int:
    """Basis key with a little-endian register on qubits ``offset..offset+width-1``."""
    if value >> width:
        raise ParameterError(f"{value} does not fit in {width} qubits")
    key = 0
    for i in range(width):
        if value >> i & 1:
            key |= 1 << (num_qubits - 1 - (offset + i))
    return key


def register_keys(values, offset: int, width: int, num_qubits: int) -> np.ndarray:
    """Vectorized :func:`register_key` over an array of register values."""
    v = np.asarray(values, dtype=np.uint64)
    if np.any(v >> np.uint64(width)):
        raise ParameterError(f"values do not fit in {width} qubits")
    out = np.zeros(v.shape, dtype=np.uint64)
    for i in range(width):
        out |= ((v >> np.uint64(i)) & _ONE) << np.uint64(num_qubits - 1 - (offset + i))
    return out


def register_value(key, offset: int, width: int, num_qubits: int):
    """Inverse of :func:`register_key`; works elementwise on arrays."""
    if isinstance(key, np.ndarray):
        key = key.astype(np.uint64)
        out = np.zeros(key.shape, dtype=np.uint64)
        for i in range(width):
            bit = (key >> np.uint64(num_qubits - 1 - (offset + i))) & _ONE
            out |= bit << np.uint64(i)
        return out
    return sum(((key >> (num_qubits - 1 - (offset + i))) & 1) << i for i in range(width))


def _control_mask(num_qubits: int, qubits) -> np.uint64:
    mask = np.uint64(0)
    for q in qubits:
        mask |= qubit_bit(num_qubits, q)
    return mask


def permute_keys(keys: np.ndarray, g: Gate, num_qubits: int) -> np.ndarray:
    """Image of basis keys under a permutation gate."""
    k = g.kind
    if k in ("SWAP", "CSWAP"):
        *ctl, i, j = g.qubits
        bi, bj = qubit_bit(num_qubits, i), qubit_bit(num_qubits, j)
        differ = ((keys & bi) != 0) != ((keys & bj) != 0)
        if ctl:
            cm = _control_mask(num_qubits, ctl)
            differ &= (keys & cm) == cm
        return np.where(differ, keys ^ (bi | bj), keys)
    *ctl, t = g.qubits
    bt = qubit_bit(num_qubits, t)
    if not ctl:
        return keys ^ bt
    cm = _control_mask(num_qubits, ctl)
    return np.where((keys & cm) == cm, keys ^ bt, keys)


def permute_basis(c: GateCircuit, keys) -> np.ndarray:
    """Run a classical (permutation-only) circuit on many basis keys at once."""
    if not c.is_classical():
        raise ParameterError("circuit contains non-permutation gates")
    if c.num_qubits > MAX_QUBITS:
        raise ResourceError(f"{c.num_qubits} qubits exceed the {MAX_QUBITS}-qubit key width")
    out = np.asarray(keys, dtype=np.uint64).copy()
    for g in c.gates:
        out = permute_keys(out, g, c.num_qubits)
    return out


@dataclass
class SparseState:
    num_qubits: int
    keys: np.ndarray
    amps: np.ndarray
    prune_threshold: float = DEFAULT_PRUNE
    support_cap: int = DEFAULT_SUPPORT_CAP
    peak_support: int = field(default=0)

    def __post_init__(self):
        if not 0 < self.num_qubits <= MAX_QUBITS:
            raise ResourceError(
                f"{self.num_qubits} qubits outside the supported range 1..{MAX_QUBITS}"
            )
        self.keys = np.asarray(self.keys, dtype=np.uint64)
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        self.peak_support = max(self.peak_support, len(self.keys))

    @classmethod
    def basis(cls, num_qubits: int, index: int = 0, **kw) -> "SparseState":
        if not 0 <= index < (1 << num_qubits):
            raise ParameterError(f"basis index {index} out of range")
        return cls(num_qubits, np.array([index], dtype=np.uint64), np.array([1.0 + 0j]), **kw)

    @classmethod
    def from_mapping(cls, num_qubits: int, amplitudes: Mapping[int, complex], **kw):
        keys = np.array(sorted(amplitudes), dtype=np.uint64)
        amps = np.array([amplitudes[int(k)] for k in keys], dtype=np.complex128)
        return cls(num_qubits, keys, amps, **kw)

    def copy(self) -> "SparseState":
        return SparseState(
            self.num_qubits, self.keys.copy(), self.amps.copy(),
            self.prune_threshold, self.support_cap, self.peak_support,
        )

    def __len__(self):
        return len(self.keys)

    def as_dict(self) -> dict:
        return {int(k): complex(a) for k, a in zip(self.keys, self.amps)}

    def amplitude(self, index: int) -> complex:
        pos = np.searchsorted(self.keys, np.uint64(index))
        if pos < len(self.keys) and self.keys[pos] == index:
            return complex(self.amps[pos])
        return 0j

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amps) ** 2)))

    def inner(self, other: "SparseState") -> complex:
        """<self|other>."""
        common, i, j = np.intersect1d(self.keys, other.keys, assume_unique=True, return_indices=True)
        return complex(np.sum(np.conj(self.amps[i]) * other.amps[j]))

    def to_dense(self) -> np.ndarray:
        if self.num_qubits > 24:
            raise ResourceError("dense export limited to 24 qubits")
        v = np.zeros(1 << self.num_qubits, dtype=complex)
        v[self.keys.astype(np.int64)] = self.amps
        return v

    # -- gate application ------------------------------------------------

    def _sort(self):
        order = np.argsort(self.keys, kind="stable")
        self.keys = self.keys[order]
        self.amps = self.amps[order]

    def _prune(self):
        keep = np.abs(self.amps) >= self.prune_threshold
        if not keep.all():
            self.keys = self.keys[keep]
            self.amps = self.amps[keep]
            nrm = self.norm()
            if nrm > 0:
                self.amps /= nrm

    def apply(self, g: Gate) -> "SparseState":
        if max(g.qubits) >= self.num_qubits:
            raise ParameterError(f"gate {g} outside a {self.num_qubits}-qubit state")
        K = self.num_qubits
        if g.kind == "U1":
            sel = (self.keys & qubit_bit(K, g.qubits[0])) != 0
            self.amps = np.where(sel, self.amps * np.exp(1j * g.angles[0]), self.amps)
        elif g.kind == "CU1":
            cm = _control_mask(K, g.qubits)
            sel = (self.keys & cm) == cm
            self.amps = np.where(sel, self.amps * np.exp(1j * g.angles[0]), self.amps)
        elif g.kind in ("H", "U2", "U3"):
            self._branch(one_qubit_matrix(g), g.qubits[0])
        else:
            self.keys = permute_keys(self.keys, g, K)
            self._sort()
        return self

    def _branch(self, M: np.ndarray, q: int):
        bt = qubit_bit(self.num_qubits, q)
        bit = ((self.keys & bt) != 0).astype(np.int64)
        base = self.keys & ~bt
        keys = np.concatenate([base, base | bt])
        amps = np.concatenate([M[0, bit] * self.amps, M[1, bit] * self.amps])
        uniq, inv = np.unique(keys, return_inverse=True)
        merged = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(merged, inv, amps)
        if len(uniq) > self.support_cap:
            raise ResourceError(
                f"support {len(uniq)} exceeds cap {self.support_cap}; "
                "use the analytic distribution instead",
                peak_support=len(uniq),
            )
        self.keys, self.amps = uniq, merged
        self.peak_support = max(self.peak_support, len(uniq))
        self._prune()

    def run(self, c: GateCircuit) -> "SparseState":
        if c.num_qubits > self.num_qubits:
            raise ParameterError("circuit is wider than the state")
        pending = []
        for g in c.gates:
            if g.kind in ("H", "U2", "U3", "U1", "CU1"):
                self._flush(pending)
                self.apply(g)
            else:
                pending.append(g)
        self._flush(pending)
        return self

    def _flush(self, pending: list):
        # consecutive permutation gates only relabel keys; sort once at the end
        if pending:
            for g in pending:
                self.keys = permute_keys(self.keys, g, self.num_qubits)
            self._sort()
            pending.clear()


def apply_gate(state: SparseState, g: Gate) -> SparseState:
    return state.apply(g)


def run_circuit(c: GateCircuit, initial: int = 0, support_cap: int = DEFAULT_SUPPORT_CAP) -> SparseState:
    state = SparseState.basis(c.num_qubits, initial, support_cap=support_cap)
    return state.run(c)


# --- measurement -------------------------------------------------------------


class Distribution(Mapping):
    """Outcome -> probability over a sorted outcome array."""

    def __init__(self, outcomes, probs, width: int | None = None):
        outcomes = np.asarray(outcomes, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        order = np.argsort(outcomes)
        self.outcomes = outcomes[order]
        self.probs = probs[order]
        self.width = width
        if np.any(self.probs < 0):
            raise ParameterError("negative probability")

    @classmethod
    def from_dense(cls, probs, width: int | None = None, drop_zeros: bool = True):
        probs = np.asarray(probs, dtype=float)
        idx = np.flatnonzero(probs) if drop_zeros else np.arange(len(probs))
        return cls(idx, probs[idx], width)

    def __getitem__(self, u):
        pos = np.searchsorted(self.outcomes, u)
        if pos < len(self.outcomes) and self.outcomes[pos] == u:
            return float(self.probs[pos])
        raise KeyError(u)

    def __iter__(self):
        return (int(u) for u in self.outcomes)

    def __len__(self):
        return len(self.outcomes)

    def prob(self, u: int) -> float:
        return self.get(u, 0.0)

    def total(self) -> float:
        return float(self.probs.sum())

    def support(self, tol: float = 0.0) -> set:
        return {int(u) for u, p in zip(self.outcomes, self.probs) if p > tol}

    def dense(self, size: int) -> np.ndarray:
        out = np.zeros(size)
        out[self.outcomes] = self.probs
        return out


def tv_distance(d1: Distribution, d2: Distribution) -> float:
    keys = np.union1d(d1.outcomes, d2.outcomes)
    p = np.array([d1.prob(int(u)) for u in keys])
    q = np.array([d2.prob(int(u)) for u in keys])
    return 0.5 * float(np.abs(p - q).sum())


def output_distribution(state: SparseState, qubit_range: tuple | range) -> Distribution:
    """Marginal over qubits ``lo..hi-1``; qubit ``lo`` is the outcome's top bit."""
    if isinstance(qubit_range, range):
        lo, hi = qubit_range.start, qubit_range.stop
    else:
        lo, hi = qubit_range
    K = state.num_qubits
    if not 0 <= lo <= hi <= K:
        raise ParameterError(f"qubit range {lo}..{hi} outside {K} qubits")
    width = hi - lo
    mask = np.uint64((1 << width) - 1) if width < 64 else np.uint64(-1 % (1 << 64))
    vals = ((state.keys >> np.uint64(K - hi)) & mask).astype(np.int64)
    w = np.abs(state.amps) ** 2
    uniq, inv = np.unique(vals, return_inverse=True)
    probs = np.bincount(inv, weights=w, minlength=len(uniq))
    return Distribution(uniq, probs, width)


def sample(dist: Distribution, shots: int, seed: int | None = None, rng=None) -> dict:
    """Multinomial outcome counts; deterministic for a given seed."""
    if shots < 1:
        raise ParameterError("shots must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(seed)
    p = dist.probs / dist.probs.sum()
    counts = rng.multinomial(shots, p)
    return {int(u): int(c) for u, c in zip(dist.outcomes, counts) if c}


def draw(dist: Distribution, rng: np.random.Generator) -> int:
    p = dist.probs / dist.probs.sum()
    return int(dist.outcomes[rng.choice(len(p), p=p)])


# --- eigenstates of modular multiplication -----------------------------------


def make_eigenstate(
    a: int, r: int, N: int, j: int, n: int, num_qubits: int | None = None, offset: int = 0
) -> SparseState:
    """(1/sqrt r) sum_l exp(-2 pi i j l / r) |a**l mod N> on an n-qubit register."""
    if N >> n:
        raise ParameterError(f"N={N} does not fit in {n} qubits")
    K = num_qubits if num_qubits is not None else offset + n
    amps = {}
    x = 1
    for l in range(r):
        key = register_key(x, offset, n, K)
        amps[key] = amps.get(key, 0) + np.exp(-2j * math.pi * j * l / r) / math.sqrt(r)
        x = x * a % N
    return SparseState.from_mapping(K, amps)


def shor_distribution(a: int, N: int, support_cap: int = DEFAULT_SUPPORT_CAP) -> Distribution:
    """Exact QPE outcome distribution of the simulated Shor circuit."""
    from .gateir import shor_circuit, shor_params

    p = shor_params(a, N)
    if p.total_qubits > MAX_QUBITS:
        raise ResourceError(
            f"order finding for N={N} needs {p.total_qubits} qubits; the simulator holds {MAX_QUBITS}",
            peak_support=0,
        )
    c, p = shor_circuit(a, N)
    state = run_circuit(c, 0, support_cap=support_cap)
    return output_distribution(state, (0, p.m))
