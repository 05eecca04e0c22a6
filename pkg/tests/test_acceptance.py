"""Acceptance criteria, one test each, at full scope and stated tolerances.

Each test records a one-line verdict that the conftest prints in the
terminal summary.
"""

import contextlib
import io
import math
import re
import time

import numpy as np
import pytest

import dense
from shorkit import analysis
from shorkit.cli import main
from shorkit.gateir import (
    GATE_ARITY,
    Gate,
    GateCircuit,
    gate,
    gate_count,
    gate_count_bound,
    qft,
    qpe,
    shor_circuit,
    shor_gate_count,
    shor_params,
    structurally_equal,
)
from shorkit.numtheory import gcd, of_post, qpe_precision
from shorkit.qasm import emit, parse, shor_measured_qubits
from shorkit.sim import sample, shor_distribution
from shorkit.verify import check_eigenpairs, check_imm

pytestmark = pytest.mark.slow


@contextlib.contextmanager
def criterion(log, number, title):
    """Record PASS only if the block finishes without an assertion failure."""
    detail = {}
    t0 = time.perf_counter()
    try:
        yield detail
    except BaseException:
        log.append(f"[FAIL] criterion {number}: {title} {detail.get('msg', '')}".rstrip())
        raise
    secs = time.perf_counter() - t0
    log.append(f"[PASS] criterion {number}: {title} {detail.get('msg', '')} ({secs:.1f}s)")


def valid_pairs(limit):
    for N in range(3, limit + 1):
        for a in range(2, N):
            if gcd(a, N) == 1:
                yield a, N


def test_c01_qubit_counts(acceptance_log):
    with criterion(acceptance_log, 1, "qubit counts") as d:
        t0 = time.perf_counter()
        c, _ = shor_circuit(3, 7)
        assert c.num_qubits == 29
        for a in range(2, 15):
            if gcd(a, 15) == 1:
                assert shor_circuit(a, 15)[0].num_qubits == 35
        secs = time.perf_counter() - t0
        assert secs < 1.0, secs
        d["msg"] = "(3,7) -> 29, (a,15) -> 35"


def test_c02_gate_count_bound(acceptance_log):
    with criterion(acceptance_log, 2, "gate-count bound N <= 255") as d:
        violations, pairs = [], 0
        for a, N in valid_pairs(255):
            p = shor_params(a, N)
            if shor_gate_count(a, N) > gate_count_bound(p.n, p.m):
                violations.append((a, N))
            pairs += 1
        # the structural count must equal the materialized one
        for a, N in valid_pairs(24):
            assert gate_count(shor_circuit(a, N)[0]) == shor_gate_count(a, N), (a, N)
        assert not violations, violations[:10]
        ratio = shor_gate_count(3, 7) / 11000
        d["msg"] = f"{pairs} pairs, 0 violations; (3,7) count {shor_gate_count(3, 7)} = {ratio:.2f}x of ~11k"
        print(f"informational: (3,7) gate count ratio to ~11k is {ratio:.3f} (window 0.3-3)")


def test_c03_order_finding_distribution(acceptance_log):
    with criterion(acceptance_log, 3, "order-finding success (3,7)") as d:
        analytic = analysis.of_success_prob(3, 7)
        dist = shor_distribution(3, 7)
        m = qpe_precision(7)
        counts = sample(dist, 100_000, seed=2024)
        hits = sum(k for u, k in counts.items() if of_post(3, 7, u, m) == 6)
        empirical = hits / 100_000
        d["msg"] = f"analytic {analytic:.4%}, simulated {empirical:.4%}"
        assert abs(analytic - 0.2840) <= 0.015
        assert abs(empirical - 0.2840) <= 0.015


def test_c04_factoring_success(acceptance_log):
    with criterion(acceptance_log, 4, "factoring success N=15") as d:
        value = analysis.factor_success_prob(15)
        support = shor_distribution(7, 15).support(1e-12)
        d["msg"] = f"{value:.4%}, support {sorted(support)}"
        assert abs(value - 0.4377) <= 0.015
        assert support == {0, 64, 128, 192}


def test_c05_certified_bounds(acceptance_log):
    with criterion(acceptance_log, 5, "certified bounds N <= 1024") as d:
        reports = analysis.certified_bound_reports(1024)
        bad = [r for r in reports if not r.satisfied]
        ratio = min(r.empirical_value / r.certified_bound for r in reports)
        d["msg"] = f"{len(reports)} reports, min ratio {ratio:.0f}x"
        assert reports and not bad, bad[:5]


def test_c06_imm_oracle(acceptance_log):
    with criterion(acceptance_log, 6, "IMM oracle N <= 64") as d:
        rep = check_imm(64)
        d["msg"] = f"{rep.checked} basis inputs, {rep.violations} violations"
        assert rep.satisfied, rep.counterexamples


def test_c07_eigenpairs(acceptance_log):
    with criterion(acceptance_log, 7, "eigenpairs and sum of eigenstates N <= 32") as d:
        rep = check_eigenpairs(32)
        d["msg"] = f"{rep.checked} checks, {rep.violations} violations"
        assert rep.satisfied, rep.counterexamples


def test_c08_lemma_sweeps(acceptance_log):
    with criterion(acceptance_log, 8, "lemma sweeps") as d:
        limits = analysis.SweepLimits(prime_power=2048, cfe=512, totient=100_000, reduction=1000)
        reports = analysis.verify_lemma_sweeps(limits)
        d["msg"] = ", ".join(f"{r.name} {r.checked}" for r in reports)
        failed = [(r.name, r.counterexamples[:3]) for r in reports if not r.satisfied]
        assert not failed, failed


def _textbook_qpe(U, k):
    d = U.shape[0]
    M = 1 << k
    ctrl = np.zeros((M * d, M * d), dtype=complex)
    P = np.eye(d, dtype=complex)
    for c in range(M):
        ctrl[c * d:(c + 1) * d, c * d:(c + 1) * d] = P
        P = U @ P
    H1 = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    Hk = np.ones((1, 1))
    for _ in range(k):
        Hk = np.kron(Hk, H1)
    return np.kron(dense.dft(k).conj().T, np.eye(d)) @ ctrl @ np.kron(Hk, np.eye(d))


def test_c09_qft_qpe_dense(acceptance_log):
    with criterion(acceptance_log, 9, "QFT/QPE vs dense matrices <= 8 qubits") as d:
        worst = 0.0
        for k in range(1, 9):
            worst = max(worst, np.max(np.abs(dense.unitary(qft(k)) - dense.dft(k))))
        rng = np.random.default_rng(9)
        for n in (1, 2, 3):
            base = GateCircuit(
                n,
                tuple(gate("U1", q, angles=[float(rng.uniform(-np.pi, np.pi))]) for q in range(n))
                + ((gate("CX", 0, 1),) if n > 1 else ())
                + ((gate("SWAP", 1, 2), gate("CCX", 0, 2, 1)) if n > 2 else ()),
            )
            U = dense.unitary(base)
            for k in range(1, 9 - n):
                c = qpe(k, n, lambda i: GateCircuit(n, base.gates * (1 << i)))
                worst = max(worst, np.max(np.abs(dense.unitary(c) - _textbook_qpe(U, k))))
        d["msg"] = f"max entry error {worst:.1e}"
        assert worst <= 1e-9


def _random_circuit(rng):
    width = int(rng.integers(5, 11))
    kinds = sorted(GATE_ARITY)
    gates = []
    for _ in range(int(rng.integers(0, 61))):
        kind = kinds[int(rng.integers(len(kinds)))]
        nq, na = GATE_ARITY[kind]
        qs = tuple(int(q) for q in rng.permutation(width)[:nq])
        gates.append(Gate(kind, qs, tuple(float(rng.normal(0, 4)) for _ in range(na))))
    return GateCircuit(width, tuple(gates))


def test_c10_qasm_roundtrip(acceptance_log):
    with criterion(acceptance_log, 10, "QASM round-trip") as d:
        circuits = gates = 0
        for a, N in valid_pairs(64):
            c, p = shor_circuit(a, N)
            measured = shor_measured_qubits(p.m)
            text = emit(c, measured)
            back, got = parse(text)
            assert structurally_equal(back, c), (a, N)
            assert list(got) == measured, (a, N)
            assert emit(back, got) == text, (a, N)
            assert gate_count(c) == shor_gate_count(a, N), (a, N)
            circuits += 1
            gates += len(c)
        # byte determinism across independent builds
        for a, N in [(3, 7), (2, 33), (5, 64 - 1)]:
            c, p = shor_circuit(a, N)
            first = emit(c, shor_measured_qubits(p.m), define_multicontrol=True)
            again = emit(shor_circuit(a, N)[0], shor_measured_qubits(p.m), define_multicontrol=True)
            assert first.encode() == again.encode()
            back, got = parse(first)
            assert structurally_equal(back, c)
        rng = np.random.default_rng(10)
        for _ in range(1000):
            c = _random_circuit(rng)
            text = emit(c)
            back, _ = parse(text)
            assert structurally_equal(back, c)
            assert emit(back) == text
        d["msg"] = f"{circuits} Shor circuits ({gates} gates) + 1000 random"


def _cli_factor(N, niter, seed):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["factor", str(N), "--niter", str(niter), "--seed", str(seed)])
    out = buf.getvalue()
    m = re.search(r"factor: (\d+)", out)
    return code, int(m.group(1)) if m else None


def test_c11_end_to_end(acceptance_log):
    with criterion(acceptance_log, 11, "end-to-end factoring") as d:
        code, f = _cli_factor(15, 30, 1234)
        assert code == 0 and f in (3, 5)
        runs = 1000
        parts = []
        for N in (15, 21):
            for t in (1, 2, 3):
                failures = 0
                for seed in range(runs):
                    code, f = _cli_factor(N, t, seed)
                    if f is None:
                        failures += 1
                    else:
                        assert N % f == 0 and 1 < f < N
                bound = analysis.failure_bound(N, t)
                slack = 3 * math.sqrt(bound * (1 - bound) / runs)
                rate = failures / runs
                parts.append(f"N={N} t={t}: {rate:.3f} <= {bound:.4f}+{slack:.4f}")
                assert rate <= bound + slack, parts[-1]
                # sharper check: the exact per-trial failure of the pipeline
                est = analysis.factor_success_uniform(N)
                assert est.exact
                exact = (1 - est.value) ** t
                assert abs(rate - exact) <= 3 * math.sqrt(exact * (1 - exact) / runs) + 1e-9, (N, t, rate, exact)
        d["msg"] = "; ".join(parts)
