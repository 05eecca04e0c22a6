"""Classical number theory and the hybrid factoring driver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Protocol

import numpy as np

from .errors import ParameterError

gcd = math.gcd


def modexp(a: int, e: int, N: int) -> int:
    if N < 1:
        raise ParameterError("modulus must be positive")
    return pow(a, e, N)


def modinv(a: int, N: int) -> int:
    if gcd(a, N) != 1:
        raise ParameterError(f"{a} has no inverse modulo {N}")
    return pow(a, -1, N)


def order_brute(a: int, N: int) -> int:
    """Least r >= 1 with a**r = 1 (mod N), by repeated multiplication."""
    if N < 2 or gcd(a, N) != 1:
        raise ParameterError(f"order undefined for a={a}, N={N}")
    x, r = a % N, 1
    while x != 1:
        x = x * a % N
        r += 1
    return r


def factorize(n: int) -> dict:
    """Prime factorisation by trial division (fine for 64-bit desk inputs)."""
    if n < 1:
        raise ParameterError("factorize needs n >= 1")
    out = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result = result // p * (p - 1)
    return result


def carmichael_lambda(n: int) -> int:
    lam = 1
    for p, k in factorize(n).items():
        if p == 2 and k >= 3:
            part = 1 << (k - 2)
        else:
            part = (p - 1) * p ** (k - 1)
        lam = lam * part // gcd(lam, part)
    return lam


@lru_cache(maxsize=4096)
def _lambda_factors(N: int):
    lam = carmichael_lambda(N)
    return lam, tuple(factorize(lam))


def multiplicative_order(a: int, N: int) -> int:
    """Fast order via the Carmichael function; agrees with :func:`order_brute`."""
    if N < 2 or gcd(a, N) != 1:
        raise ParameterError(f"order undefined for a={a}, N={N}")
    if N == 2:
        return 1
    r, primes = _lambda_factors(N)
    for p in primes:
        while r % p == 0 and pow(a, r // p, N) == 1:
            r //= p
    return r


def two_adic(d: int) -> int:
    """Largest i with 2**i dividing d (d > 0)."""
    if d <= 0:
        raise ParameterError("two_adic needs a positive argument")
    return (d & -d).bit_length() - 1


_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers 64-bit inputs)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for w in _MR_WITNESSES:
        x = pow(w, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def integer_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) computed exactly."""
    if n < 0 or k < 1:
        raise ParameterError("integer_root needs n >= 0, k >= 1")
    if n < 2 or k == 1:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


@dataclass(frozen=True)
class Classification:
    kind: str  # "even" | "prime" | "prime_power" | "composite_odd"
    factor: Optional[int] = None
    base: Optional[int] = None
    exponent: Optional[int] = None


def prime_power(N: int) -> Optional[tuple]:
    """(p, k) with N = p**k, k >= 2 and p prime, or None."""
    for k in range(N.bit_length(), 1, -1):
        p = integer_root(N, k)
        if p > 1 and p**k == N and is_prime(p):
            return p, k
    return None


def preprocess(N: int) -> Classification:
    if N < 2:
        raise ParameterError(f"N must be at least 2, got {N}")
    if N % 2 == 0:
        return Classification("even", factor=2)
    if is_prime(N):
        return Classification("prime")
    pk = prime_power(N)
    if pk is not None:
        return Classification("prime_power", factor=pk[0], base=pk[0], exponent=pk[1])
    return Classification("composite_odd")


# --- continued fractions and order recovery ---------------------------------


def cf_ite(k: int, a: int, b: int, p1: int, q1: int, p2: int, q2: int) -> tuple:
    """Continued-fraction accumulator; returns the (p, q) pair reached."""
    while k > 0 and a != 0:
        c, d = divmod(b, a)
        a, b, p1, q1, p2, q2 = d, a, c * p1 + p2, c * q1 + q2, p1, q1
        k -= 1
    return p1, q1


def cfe(k: int, a: int, b: int) -> int:
    """Denominator of the k-th level convergent of a/b."""
    if b <= 0:
        raise ParameterError("cfe needs b > 0")
    return cf_ite(k + 1, a, b, 0, 1, 1, 0)[1]


def cfe_convergent(k: int, a: int, b: int) -> tuple:
    """(p, q) of the k-th level convergent of a/b."""
    return cf_ite(k + 1, a, b, 0, 1, 1, 0)


def of_post(a: int, N: int, out: int, m: int) -> Optional[int]:
    """Recover an order candidate from a QPE outcome on m bits.

    Scans k = 0..2m+1 and returns the first convergent denominator q >= 1 of
    out / 2**m with a**q = 1 (mod N), or None.
    """
    if not 0 <= out < (1 << m):
        raise ParameterError(f"outcome {out} is not an {m}-bit value")
    for k in range(2 * m + 2):
        q = cfe(k, out, 1 << m)
        if q >= 1 and pow(a, q, N) == 1:
            return q
    return None


def factor_from_order(a: int, N: int, r: int) -> Optional[int]:
    if r < 1:
        raise ParameterError("order must be positive")
    h = pow(a, r // 2, N)
    for cand in (gcd((h - 1) % N, N), gcd((h + 1) % N, N)):
        if 1 < cand < N:
            return cand
    return None


# --- hybrid driver -----------------------------------------------------------


class OutcomeBackend(Protocol):
    """Source of QPE measurement outcomes for (a, N) on m bits."""

    def sample_outcome(self, a: int, N: int, m: int, rng: np.random.Generator) -> int: ...


@dataclass
class Trial:
    a: int
    outcome: Optional[int]
    order: Optional[int]
    factor: Optional[int]
    note: str


def qpe_precision(N: int) -> int:
    return (2 * N * N).bit_length() - 1


def shor_trial(N: int, rng: np.random.Generator, backend: OutcomeBackend) -> Trial:
    a = int(rng.integers(1, N))
    g = gcd(a, N)
    if g > 1:
        return Trial(a, None, None, g, "gcd")
    m = qpe_precision(N)
    if a == 1:
        # IMM(1) is the identity, so every phase is 0
        out = 0
    else:
        out = int(backend.sample_outcome(a, N, m, rng))
    r = of_post(a, N, out, m)
    if r is None:
        return Trial(a, out, None, None, "order not recovered")
    f = factor_from_order(a, N, r)
    return Trial(a, out, r, f, "factor" if f else "trivial split")


def shor_body(N: int, rng: np.random.Generator, backend: OutcomeBackend) -> Optional[int]:
    return shor_trial(N, rng, backend).factor


def end_to_end(
    N: int,
    niter: int,
    rng: np.random.Generator,
    backend: OutcomeBackend,
    log: Optional[list] = None,
) -> Optional[int]:
    """Up to ``niter`` trials; the first nontrivial factor wins."""
    for _ in range(niter):
        t = shor_trial(N, rng, backend)
        if log is not None:
            log.append(t)
        if t.factor is not None:
            return t.factor
    return None


def factor(
    N: int,
    niter: int,
    rng: np.random.Generator,
    backend: OutcomeBackend,
    log: Optional[list] = None,
) -> tuple:
    """Full pipeline including classical pre-processing.

    Returns ``(factor or None, classification)``; primes yield ``None``.
    """
    cls = preprocess(N)
    if cls.kind in ("even", "prime_power"):
        return cls.factor, cls
    if cls.kind == "prime":
        return None, cls
    return end_to_end(N, niter, rng, backend, log), cls
