"""Analytic QPE distributions, success probabilities, certified bounds and
brute-force sweeps over the number-theoretic facts the algorithm relies on.

Order-finding success depends on ``(a, N)`` only through ``r = ord(a, N)``
and the precision ``m``: outcome ``u`` recovers the order iff ``r`` is one of
the convergent denominators of ``u / 2**m``.  Everything below is cached on
``(r, m)``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional

import numpy as np

from .numtheory import (
    cf_ite,
    cfe,
    euler_phi,
    factor_from_order,
    factorize,
    gcd,
    is_prime,
    multiplicative_order,
    order_brute,
    preprocess,
    qpe_precision,
    two_adic,
)
from .sim import Distribution

BETA = 4 * math.exp(-2) / math.pi**2

# outcomes are enumerated exhaustively up to this precision; above it only
# the windows that can contain the order are examined
FULL_ENUM_MAX_M = 16
ANALYTIC_MAX_M = 26


# --- closed-form QPE distribution ---------------------------------------------


def _class_sizes(r: int, m: int):
    C, rem = divmod(1 << m, r)
    return C, rem


def qpe_probs(r: int, m: int, u) -> np.ndarray:
    """P[out = u] for a period-r eigenstate mixture, vectorised over u.

    Residue class k < r of v < 2**m has c_k elements; each contributes
    |sum_t exp(2 pi i u r t / 2**m)|**2 over t < c_k.
    """
    u = np.asarray(u, dtype=np.int64)
    M = np.int64(1 << m)
    C, rem = _class_sizes(r, m)
    ur = (u * r) % M
    theta = ur / float(M)
    s_theta = np.sin(np.pi * theta) ** 2
    zero = ur == 0
    safe = np.where(zero, 1.0, s_theta)

    def g2(c):
        val = np.sin(np.pi * c * theta) ** 2 / safe
        # exact zeros where the geometric sum wraps a whole number of turns
        val = np.where((u * r * c) % M == 0, 0.0, val)
        return np.where(zero, float(c) ** 2, val)

    total = rem * g2(C + 1) + (r - rem) * g2(C)
    return total / float(M) ** 2


def qpe_probs_direct(r: int, m: int) -> np.ndarray:
    """Same distribution by explicit summation over every v < 2**m."""
    M = 1 << m
    v = np.arange(M)
    out = np.zeros(M)
    for u in range(M):
        phases = np.exp(2j * np.pi * u * v / M)
        sums = np.bincount(v % r, weights=phases.real, minlength=r) + 1j * np.bincount(
            v % r, weights=phases.imag, minlength=r
        )
        out[u] = np.sum(np.abs(sums) ** 2) / M**2
    return out


def qpe_distribution_analytic(a: int, N: int, m: Optional[int] = None) -> Distribution:
    m = qpe_precision(N) if m is None else m
    if m > ANALYTIC_MAX_M:
        from .errors import ResourceError

        raise ResourceError(f"dense analytic distribution limited to m <= {ANALYTIC_MAX_M}")
    r = multiplicative_order(a, N)
    return Distribution.from_dense(_dense_probs(r, m), width=m)


@lru_cache(maxsize=64)
def _dense_probs(r: int, m: int) -> np.ndarray:
    p = qpe_probs(r, m, np.arange(1 << m))
    p.setflags(write=False)
    return p


# --- vectorised continued fractions -----------------------------------------


def cfe_denominators(a, b, steps: int) -> np.ndarray:
    """Matrix of cfe(k, a_i, b_i) for k < steps (rows follow a)."""
    a = np.array(a, dtype=np.int64, copy=True)
    b = np.broadcast_to(np.asarray(b, dtype=np.int64), a.shape).copy()
    q1 = np.ones_like(a)
    q2 = np.zeros_like(a)
    out = np.empty(a.shape + (steps,), dtype=np.int64)
    for k in range(steps):
        act = a != 0
        safe = np.where(act, a, 1)
        c, d = np.divmod(b, safe)
        q1, q2 = np.where(act, c * q1 + q2, q1), np.where(act, q1, q2)
        a, b = np.where(act, d, a), np.where(act, a, b)
        out[..., k] = q1
    return out


def first_multiple_denominator(u, m: int, r: int) -> np.ndarray:
    """What of_post returns for outcomes u: the first convergent denominator
    of u / 2**m divisible by r, or 0 when none appears."""
    D = cfe_denominators(u, 1 << m, 2 * m + 2)
    hit = D % r == 0
    idx = np.argmax(hit, axis=-1)
    q = np.take_along_axis(D, idx[..., None], axis=-1)[..., 0]
    return np.where(hit.any(axis=-1), q, 0)


# --- success probabilities --------------------------------------------------


@dataclass(frozen=True)
class OutcomeTable:
    """Probability mass of QPE outcomes grouped by the of_post result."""

    r: int
    m: int
    mass_by_q: dict
    exact: bool  # False: only windows around k/r were examined

    @property
    def of_success(self) -> float:
        return self.mass_by_q.get(self.r, 0.0)


def _window_outcomes(r: int, m: int) -> np.ndarray:
    """All u with |u r - k 2**m| * r < 2**m for some k coprime to r.

    Any outcome whose expansion has r as a denominator lies in one of these
    windows, since convergents p/q satisfy |x - p/q| < 1/q**2.
    """
    M = 1 << m
    half = M // (r * r) + 1
    chunks = []
    for k in range(0, r + 1):
        if gcd(k, r) != 1:
            continue
        centre = (k * M) // r
        lo, hi = max(0, centre - half - 1), min(M - 1, centre + half + 1)
        if lo > hi:
            continue
        u = np.arange(lo, hi + 1, dtype=np.int64)
        keep = np.abs(u * r - k * M) * r < M
        chunks.append(u[keep])
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.unique(np.concatenate(chunks))


@lru_cache(maxsize=None)
def outcome_table(r: int, m: int, exhaustive: Optional[bool] = None) -> OutcomeTable:
    exhaustive = m <= FULL_ENUM_MAX_M if exhaustive is None else exhaustive
    u = np.arange(1 << m, dtype=np.int64) if exhaustive else _window_outcomes(r, m)
    p = qpe_probs(r, m, u)
    q = first_multiple_denominator(u, m, r)
    mass = {}
    for qv in np.unique(q):
        if qv:
            mass[int(qv)] = float(p[q == qv].sum())
    return OutcomeTable(r, m, mass, exhaustive)


def of_success_for_order(r: int, m: int) -> float:
    return outcome_table(r, m).of_success


def of_success_prob(a: int, N: int) -> float:
    """Probability that one QPE run plus of_post recovers ord(a, N)."""
    return of_success_for_order(multiplicative_order(a, N), qpe_precision(N))


def of_success_from_distribution(dist: Distribution, a: int, N: int, m: int) -> float:
    """Direct route: push every outcome through of_post."""
    from .numtheory import of_post

    r = order_brute(a, N)
    return float(sum(p for u, p in dist.items() if of_post(a, N, u, m) == r))


def coprime_factor_success(a: int, N: int) -> tuple:
    """(probability that the quantum branch for ``a`` yields a factor, exact?)."""
    r = multiplicative_order(a, N)
    tab = outcome_table(r, qpe_precision(N))
    total = sum(w for q, w in tab.mass_by_q.items() if factor_from_order(a, N, q) is not None)
    return total, tab.exact


@dataclass(frozen=True)
class SuccessEstimate:
    value: float
    exact: bool  # False: value is a lower bound


def factor_success(N: int) -> SuccessEstimate:
    """Mean factoring success of one trial over coprime 1 < a < N."""
    vals, exact = [], True
    for a in range(2, N):
        if gcd(a, N) == 1:
            v, ex = coprime_factor_success(a, N)
            vals.append(v)
            exact &= ex
    if not vals:
        return SuccessEstimate(float("nan"), exact)
    return SuccessEstimate(float(np.mean(vals)), exact)


def factor_success_prob(N: int) -> float:
    return factor_success(N).value


def factor_success_uniform(N: int) -> SuccessEstimate:
    """Success of one trial with a uniform on [1, N), gcd shortcut included."""
    total, exact = 0.0, True
    for a in range(1, N):
        if gcd(a, N) > 1:
            total += 1.0
        else:
            v, ex = coprime_factor_success(a, N)
            total += v
            exact &= ex
    return SuccessEstimate(total / (N - 1), exact)


# --- certified bounds -------------------------------------------------------


def _log2_floor(N: int) -> int:
    return N.bit_length() - 1


def certified_of_bound(N: int) -> float:
    return BETA / _log2_floor(N) ** 4


def certified_factor_bound(N: int) -> float:
    return certified_of_bound(N) / 2


def failure_bound(N: int, niter: int) -> float:
    return (1 - certified_factor_bound(N)) ** niter


def order_bound(r: int) -> float:
    """(4 / pi**2) * phi(r) / r."""
    return 4 / math.pi**2 * euler_phi(r) / r


@dataclass
class BoundReport:
    input: object
    empirical_value: float
    certified_bound: float
    kind: str = "probability"  # or "gate_count"
    note: str = ""

    @property
    def satisfied(self) -> bool:
        if self.kind == "gate_count":
            return self.empirical_value <= self.certified_bound
        return self.empirical_value >= self.certified_bound


def odd_composite_non_prime_power(limit: int, start: int = 3) -> list:
    return [N for N in range(start, limit + 1) if preprocess(N).kind == "composite_odd"]


def certified_bound_reports(limit: int = 1024, start: int = 3) -> list:
    """Per N: the weakest OF success over a, and the factoring success."""
    reports = []
    for N in odd_composite_non_prime_power(limit, start):
        m = qpe_precision(N)
        worst, worst_a = 2.0, None
        for a in range(2, N):
            if gcd(a, N) == 1:
                v = of_success_for_order(multiplicative_order(a, N), m)
                if v < worst:
                    worst, worst_a = v, a
        reports.append(BoundReport(("OF", N, worst_a), worst, certified_of_bound(N)))
        est = factor_success(N)
        note = "" if est.exact else "lower bound"
        reports.append(BoundReport(("FAC", N), est.value, certified_factor_bound(N), note=note))
    return reports


# --- lemma sweeps -------------------------------------------------------------


@dataclass
class SweepReport:
    name: str
    limit: int
    checked: int = 0
    violations: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def satisfied(self) -> bool:
        return self.violations == 0

    def fail(self, example, keep: int = 20):
        self.violations += 1
        if len(self.counterexamples) < keep:
            self.counterexamples.append(example)


def odd_prime_powers(limit: int) -> list:
    out = []
    for p in range(3, limit + 1, 2):
        if is_prime(p):
            pk, k = p, 1
            while pk <= limit:
                out.append((p, k, pk))
                pk *= p
                k += 1
    return sorted(out, key=lambda t: t[2])


def _units(n: int) -> np.ndarray:
    x = np.arange(1, n, dtype=np.int64)
    return x[np.gcd(x, n) == 1]


def _orders_mod(n: int, xs: np.ndarray) -> np.ndarray:
    return np.array([multiplicative_order(int(x), n) for x in xs], dtype=np.int64)


def _vec_pow(base: np.ndarray, e: int, n: int) -> np.ndarray:
    result = np.ones_like(base)
    b = base % n
    while e:
        if e & 1:
            result = result * b % n
        b = b * b % n
        e >>= 1
    return result


def sweep_euler_criterion(limit: int = 2048) -> SweepReport:
    """Residues raise to 1 and non-residues to -1 at phi/2, and the 2-adic
    order of ord(x) is below d(phi) exactly for residues."""
    rep = SweepReport("euler_criterion", limit)
    for p, k, pk in odd_prime_powers(limit):
        units = _units(pk)
        phi = len(units)
        qr = np.zeros(pk, dtype=bool)
        qr[units * units % pk] = True
        powed = _vec_pow(units, phi // 2, pk)
        expect = np.where(qr[units], 1, pk - 1)
        for x in units[powed != expect]:
            rep.fail((p, k, int(x), "criterion"))
        d_phi = two_adic(phi)
        d_ord = np.array([two_adic(int(o)) for o in _orders_mod(pk, units)])
        bad = np.where(qr[units], d_ord >= d_phi, d_ord != d_phi)
        for x in units[bad]:
            rep.fail((p, k, int(x), "2-adic order"))
        rep.checked += phi
    return rep


def sweep_qr_count(limit: int = 2048) -> SweepReport:
    """Exactly half of the units mod p**k are quadratic residues."""
    rep = SweepReport("qr_count", limit)
    for p, k, pk in odd_prime_powers(limit):
        units = _units(pk)
        residues = np.unique(units * units % pk)
        if 2 * len(residues) != len(units):
            rep.fail((p, k, len(residues), len(units)))
        rep.checked += 1
    return rep


def sweep_two_to_one(limit: int = 2048) -> SweepReport:
    """x -> x**2 mod p**k is exactly two-to-one on the units."""
    rep = SweepReport("two_to_one", limit)
    for p, k, pk in odd_prime_powers(limit):
        units = _units(pk)
        counts = np.bincount(units * units % pk, minlength=pk)
        hit = counts[counts > 0]
        if not np.all(hit == 2) or 2 * len(hit) != len(units):
            rep.fail((p, k))
        rep.checked += 1
    return rep


def _splits(N: int):
    """All ways to write N = p**k * q with p an odd prime, gcd(p, q) = 1, q > 2."""
    for p, k in factorize(N).items():
        q = N // p**k
        if p > 2 and q > 2:
            yield p, k, q


def sweep_d_reduction(limit: int = 1000) -> SweepReport:
    """At least half of Z*_N split N through a**floor(ord/2) +- 1, for every
    odd N = p**k * q."""
    rep = SweepReport("d_reduction", limit)
    for N in range(3, limit + 1, 2):
        if not any(True for _ in _splits(N)):
            continue
        units = _units(N)
        good = sum(
            1 for a in units if factor_from_order(int(a), N, multiplicative_order(int(a), N))
        )
        if len(units) > 2 * good:
            rep.fail((N, good, len(units)))
        rep.checked += 1
    return rep


def sweep_d_neq(limit: int = 1000) -> SweepReport:
    """Different 2-adic orders mod p and q force a**floor(r/2) != +-1 mod pq;
    then a**floor(r/2) is a nontrivial square root of 1 and splits N."""
    rep = SweepReport("d_neq", limit)
    for N in range(15, limit + 1, 2):
        splits = [
            (p, N // p)
            for p in range(3, math.isqrt(N) + 1, 2)
            if N % p == 0 and gcd(p, N // p) == 1 and N // p > 2
        ]
        if not splits:
            continue
        units = _units(N)
        for a in map(int, units):
            r = multiplicative_order(a, N)
            h = pow(a, r // 2, N)
            for p, q in splits:
                if two_adic(multiplicative_order(a % p, p)) == two_adic(
                    multiplicative_order(a % q, q)
                ):
                    continue
                rep.checked += 1
                if h in (1, N - 1):
                    rep.fail((N, p, q, a, "a^(r/2) = +-1"))
                elif h * h % N != 1 or factor_from_order(a, N, r) is None:
                    rep.fail((N, p, q, a, "no split"))
    return rep


def sweep_sqr1_not_pm1(limit: int = 1000) -> SweepReport:
    """Every square root of 1 other than +-1 gives a nontrivial gcd."""
    rep = SweepReport("sqr1_not_pm1", limit)
    for N in range(3, limit + 1):
        x = np.arange(2, N - 1, dtype=np.int64)
        for v in map(int, x[x * x % N == 1]):
            g1, g2 = gcd(v - 1, N), gcd(v + 1, N)
            if not (1 < g1 < N or 1 < g2 < N):
                rep.fail((N, v))
            rep.checked += 1
    return rep


def totients(limit: int) -> np.ndarray:
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return phi


def sweep_totient_lb(limit: int = 100_000) -> SweepReport:
    """phi(n) / n >= exp(-2) / floor(log2 n)**4 for 2 <= n <= limit."""
    rep = SweepReport("totient_lb", limit)
    n = np.arange(2, limit + 1, dtype=np.int64)
    phi = totients(limit)[2:]
    lg = np.floor(np.log2(n)).astype(np.int64)
    # guard float log2 at exact powers of two
    lg = np.where((np.int64(1) << (lg + 1)) <= n, lg + 1, lg)
    lg = np.where((np.int64(1) << lg) > n, lg - 1, lg)
    lhs = phi / n
    rhs = math.exp(-2) / lg.astype(float) ** 4
    for i in np.flatnonzero(lhs < rhs):
        rep.fail((int(n[i]), float(lhs[i]), float(rhs[i])))
    rep.checked = len(n)
    return rep


CfeFn = Callable[[int, int, int], int]


def _cfe_table(b: int, steps: int, cfe_fn: Optional[CfeFn]) -> np.ndarray:
    if cfe_fn is None:
        return cfe_denominators(np.arange(b), b, steps)
    return np.array([[cfe_fn(s, a, b) for s in range(steps)] for a in range(b)], dtype=np.int64)


def sweep_legendre_cfe(limit: int = 512, cfe_fn: Optional[CfeFn] = None) -> SweepReport:
    """Every p/q (p >= 1, gcd(p, q) = 1) with |a/b - p/q| < 1/(2 q**2) shows up
    as cfe(s, a, b) = q for some s <= 2 floor(log2 b) + 1."""
    rep = SweepReport("legendre_cfe", limit)
    for b in range(2, limit + 1):
        steps = 2 * (b.bit_length() - 1) + 2
        D = _cfe_table(b, steps, cfe_fn)
        a = np.arange(b, dtype=np.int64)[:, None]
        q = np.arange(1, b + 1, dtype=np.int64)[None, :]
        # the only candidate numerator is the nearest integer to a q / b
        p = (2 * a * q + b) // (2 * b)
        close = 2 * q * np.abs(a * q - p * b) < b
        cand = close & (p >= 1) & (np.gcd(p, q) == 1)
        member = np.zeros((b, b + 2), dtype=bool)
        rows = np.repeat(np.arange(b), steps)
        cols = np.clip(D.ravel(), 0, b + 1)
        member[rows, cols] = True
        missing = cand & ~member[:, 1 : b + 1]
        for ai, qi in zip(*np.nonzero(missing)):
            rep.fail((int(ai), b, int(p[ai, qi]), int(qi) + 1))
        rep.checked += int(cand.sum())
    return rep


def sweep_cfe_monotone(limit: int = 512, cfe_fn: Optional[CfeFn] = None) -> SweepReport:
    """cfe(k, a, b) is non-decreasing in k and equals b / gcd(a, b) by
    k = 2 floor(log2 b) + 1."""
    rep = SweepReport("cfe_monotone", limit)
    for b in range(1, limit + 1):
        steps = 2 * (b.bit_length() - 1) + 2
        D = _cfe_table(b, steps, cfe_fn)
        target = b // np.gcd(np.arange(b), b)
        bad = np.any(np.diff(D, axis=1) < 0, axis=1) | (D[:, -1] != target)
        for a in np.flatnonzero(bad):
            rep.fail((int(a), b))
        rep.checked += b
    return rep


def faulty_cfe(k: int, a: int, b: int) -> int:
    """Deliberately broken CFE (one level too deep) for harness self-tests."""
    return cf_ite(k + 2, a, b, 0, 1, 1, 0)[1]


@dataclass(frozen=True)
class SweepLimits:
    prime_power: int = 2048
    cfe: int = 512
    totient: int = 100_000
    reduction: int = 1000


def verify_lemma_sweeps(limits: SweepLimits = SweepLimits(), cfe_fn: Optional[CfeFn] = None) -> list:
    return [
        sweep_euler_criterion(limits.prime_power),
        sweep_qr_count(limits.prime_power),
        sweep_two_to_one(limits.prime_power),
        sweep_d_reduction(limits.reduction),
        sweep_d_neq(limits.reduction),
        sweep_sqr1_not_pm1(limits.reduction),
        sweep_totient_lb(limits.totient),
        sweep_legendre_cfe(limits.cfe, cfe_fn),
        sweep_cfe_monotone(limits.cfe, cfe_fn),
    ]


# --- statistics table ---------------------------------------------------------

STATS_COLUMNS = [
    "bits",
    "of_pairs",
    "of_min",
    "of_max",
    "of_mean",
    "of_bound",
    "fac_inputs",
    "fac_min",
    "fac_max",
    "fac_mean",
    "fac_bound",
    "fac_exact",
    "gates_min",
    "gates_max",
    "gates_mean",
    "gate_bound_min_slack",
]


def stats_row(bits: int) -> dict:
    from .gateir import gate_count_bound, shor_gate_count

    lo, hi = max(3, 1 << (bits - 1)), (1 << bits) - 1
    of_vals, gates, slack = [], [], []
    for N in range(lo, hi + 1):
        m, n = qpe_precision(N), N.bit_length()
        bound = gate_count_bound(n, m)
        for a in range(2, N):
            if gcd(a, N) != 1:
                continue
            of_vals.append(of_success_for_order(multiplicative_order(a, N), m))
            g = shor_gate_count(a, N)
            gates.append(g)
            slack.append(bound - g)
    fac = [factor_success(N) for N in odd_composite_non_prime_power(hi, lo)]
    fac_vals = [f.value for f in fac]

    def agg(v, fn):
        return fn(v) if v else float("nan")

    return {
        "bits": bits,
        "of_pairs": len(of_vals),
        "of_min": agg(of_vals, min),
        "of_max": agg(of_vals, max),
        "of_mean": agg(of_vals, np.mean),
        "of_bound": BETA / (bits - 1) ** 4,
        "fac_inputs": len(fac_vals),
        "fac_min": agg(fac_vals, min),
        "fac_max": agg(fac_vals, max),
        "fac_mean": agg(fac_vals, np.mean),
        "fac_bound": BETA / (2 * (bits - 1) ** 4),
        "fac_exact": all(f.exact for f in fac),
        "gates_min": agg(gates, min),
        "gates_max": agg(gates, max),
        "gates_mean": agg(gates, np.mean),
        "gate_bound_min_slack": agg(slack, min),
    }


def emit_stats(bits_range: Iterable[int]) -> str:
    """Comma-separated per-size statistics with a header line."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=STATS_COLUMNS, lineterminator="\n")
    w.writeheader()
    for bits in bits_range:
        if not 2 <= bits <= 16:
            from .errors import ParameterError

            raise ParameterError(f"input size {bits} bits outside 2..16")
        row = stats_row(bits)
        w.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()
