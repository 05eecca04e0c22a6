"""Circuit-level self-checks run by ``shorkit verify``."""

from __future__ import annotations

import math

import numpy as np

from .analysis import SweepReport
from .gateir import Gate, GateCircuit, imm_gates, qpe, translate_rcir
from .numtheory import gcd, multiplicative_order
from .rcir import eval_many, random_circuit
from .revarith import ArithLayout, imm, modulus_width
from .sim import (
    SparseState,
    make_eigenstate,
    output_distribution,
    permute_basis,
    register_key,
    register_keys,
    register_value,
)


def _basis_keys(values, width):
    """Register values on bits 0..width-1 as basis keys of a width-qubit state."""
    return register_keys(values, 0, width, width)


def imm_table(multiplier: int, N: int) -> tuple:
    """Run the translated IMM on every basis input x < N.

    Returns (images, restored): the work-register value of each output key and
    whether every other qubit came back to zero.
    """
    n = modulus_width(N)
    K = ArithLayout(n).total_bits
    xs = np.arange(N, dtype=np.uint64)
    out = permute_basis(imm_gates(multiplier, N), register_keys(xs, 0, n, K))
    images = register_value(out, 0, n, K)
    restored = out == register_keys(images, 0, n, K)
    return images, restored


def check_imm(limit: int) -> SweepReport:
    """Translated IMM on every basis input x < N agrees with a*x mod N and
    with the boolean semantics, ancillas restored."""
    rep = SweepReport("imm_oracle", limit)
    for N in range(2, limit + 1):
        K = ArithLayout(modulus_width(N)).total_bits
        xs = np.arange(N, dtype=np.uint64)
        for a in range(1, N):
            if gcd(a, N) != 1:
                continue
            images, restored = imm_table(a, N)
            want = (xs * np.uint64(a)) % np.uint64(N)
            classical = eval_many(imm(a, N), xs, K)
            bad = (images != want) | ~restored | (classical != want)
            for x in np.flatnonzero(bad)[:3]:
                rep.fail((a, N, int(x)))
            rep.violations += max(0, int(bad.sum()) - 3)
            rep.checked += N
    return rep


def check_translation(count: int, seed: int) -> SweepReport:
    rep = SweepReport("rcir_translation", count)
    rng = np.random.default_rng(seed)
    for _ in range(count):
        width = int(rng.integers(5, 11))
        c = random_circuit(rng, width, int(rng.integers(1, 40)), max_depth=3)
        values = np.arange(1 << width, dtype=np.uint64)
        classical = eval_many(c, values, width)
        quantum = permute_basis(translate_rcir(c, width), _basis_keys(values, width))
        bad = np.flatnonzero(quantum != _basis_keys(classical, width))
        for i in bad[:1]:
            rep.fail((width, int(values[i])))
        rep.checked += 1
    return rep


def check_qpe_phases(max_bits: int = 6) -> SweepReport:
    """QPE of U1(2 pi theta) on |1> returns 2**k theta exactly for k-bit theta."""
    rep = SweepReport("qpe_phase", max_bits)
    for k in range(1, max_bits + 1):
        for j in range(1 << k):
            theta = j / (1 << k)
            f = lambda i: GateCircuit(1, (Gate("U1", (0,), (2 * math.pi * theta * (1 << i),)),))  # noqa: E731
            c = qpe(k, 1, f)
            state = SparseState.basis(k + 1, 1).run(c)
            dist = output_distribution(state, (0, k))
            if abs(dist.prob(j) - 1) > 1e-9:
                rep.fail((k, j, dist.prob(j)))
            rep.checked += 1
    return rep


def _eigenstate(a: int, r: int, N: int, j: int, n: int, K: int) -> SparseState:
    return make_eigenstate(a, r, N, j, n, num_qubits=K)


def check_eigenpairs(limit: int, powers: int | None = None) -> SweepReport:
    """IMM(a**(2**k)) maps psi_j (x) |0> to exp(2 pi i j 2**k / r) psi_j, and
    (1/sqrt r) sum_j psi_j is the basis state |1>.

    ``powers`` defaults to every k used by the order-finding circuit for N.
    """
    rep = SweepReport("imm_eigenpair", limit)
    for N in range(3, limit + 1):
        n = modulus_width(N)
        K = ArithLayout(n).total_bits
        ks = range(powers if powers is not None else 2 * n)
        tables: dict = {}
        for a in range(2, N):
            if gcd(a, N) != 1:
                continue
            r = multiplicative_order(a, N)
            psis = [_eigenstate(a, r, N, j, n, K) for j in range(r)]
            total: dict = {}
            for psi in psis:
                for key, amp in psi.as_dict().items():
                    total[key] = total.get(key, 0) + amp / math.sqrt(r)
            one = register_key(1, 0, n, K)
            err = max(abs(v - (1 if key == one else 0)) for key, v in total.items())
            if one not in total or err > 1e-8:
                rep.fail((a, N, "sum", err))
            rep.checked += 1
            for k in ks:
                c = pow(a, 1 << k, N)
                if c not in tables:
                    tables[c] = imm_table(c, N)
                images, restored = tables[c]
                if not restored.all():
                    rep.fail((a, N, k, "ancilla"))
                    continue
                for j, psi in enumerate(psis):
                    d = psi.as_dict()
                    moved = {}
                    for key, amp in d.items():
                        x = register_value(key, 0, n, K)
                        moved[register_key(int(images[x]), 0, n, K)] = amp
                    out = SparseState.from_mapping(K, moved)
                    phase = np.exp(2j * math.pi * j * (1 << k) / r)
                    err = abs(psi.inner(out) - phase)
                    if err > 1e-8:
                        rep.fail((a, N, k, j, err))
                    rep.checked += 1
    return rep


def circuit_suites(imm_limit: int = 16, random_circuits: int = 200, seed: int = 0) -> list:
    return [
        check_imm(imm_limit),
        check_translation(random_circuits, seed),
        check_qpe_phases(),
        check_eigenpairs(min(imm_limit, 16), powers=4),
    ]


__all__ = [
    "check_eigenpairs",
    "check_imm",
    "check_qpe_phases",
    "check_translation",
    "circuit_suites",
    "imm_table",
]
