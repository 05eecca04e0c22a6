"""Reversible arithmetic built on the RCIR: Cuccaro adders up to the in-place
modular multiplier.

Register conventions: every arithmetic register is a list of bit indices,
least significant first.  The modular circuits run on the flat layout
described by :class:`ArithLayout`; all of them need one carry bit and one
comparison flag, both zero on entry and on exit (except where noted).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd

from .errors import IrreversibleError, ParameterError
from .rcir import SKIP, Not, RevCircuit, Swap, ctrl, primitive_count, reverse, seq


def modulus_width(N: int) -> int:
    """``floor(log2(2N))``, the width of the multiplier's work register."""
    return N.bit_length()


@dataclass(frozen=True)
class ArithLayout:
    """Bit map for the modular circuits at work-register width ``n``.

    Internal registers are ``n + 1`` bits wide so that sums and doublings of
    residues never overflow.  The low ``n`` bits of ``x`` are the work
    register; everything from bit ``n`` up is ancilla.
    """

    n: int

    @property
    def width(self) -> int:
        return self.n + 1

    @property
    def x(self) -> list:
        return list(range(0, self.width))

    @property
    def y(self) -> list:
        return list(range(self.width, 2 * self.width))

    @property
    def modulus(self) -> list:
        return list(range(2 * self.width, 3 * self.width))

    @property
    def carry(self) -> int:
        return 3 * self.width

    @property
    def flag(self) -> int:
        return 3 * self.width + 1

    @property
    def garbage(self) -> list:
        start = 3 * self.width + 2
        return list(range(start, start + self.n))

    @property
    def ancilla_budget(self) -> int:
        return 3 * self.n + 11

    @property
    def total_bits(self) -> int:
        return self.n + self.ancilla_budget

    @property
    def used_bits(self) -> int:
        return self.garbage[-1] + 1 if self.n else 3 * self.width + 2


# --- Cuccaro building blocks -------------------------------------------------


def maj(a: int, b: int, c: int) -> RevCircuit:
    """a <- a^c, b <- b^c, c <- majority(a, b, c)."""
    if len({a, b, c}) != 3:
        raise ParameterError(f"MAJ needs three distinct bits, got {(a, b, c)}")
    return seq(ctrl(c, Not(b)), ctrl(c, Not(a)), ctrl(a, ctrl(b, Not(c))))


def uma(a: int, b: int, c: int) -> RevCircuit:
    # inverse companion of maj: restores a and c, leaves the sum bit in b
    if len({a, b, c}) != 3:
        raise ParameterError(f"UMA needs three distinct bits, got {(a, b, c)}")
    return seq(ctrl(a, ctrl(b, Not(c))), ctrl(c, Not(a)), ctrl(a, Not(b)))


def _maj_chain(carry, xs, ys):
    parts = [maj(carry, ys[0], xs[0])]
    for i in range(1, len(xs)):
        parts.append(maj(xs[i - 1], ys[i], xs[i]))
    return parts


def _uma_chain(carry, xs, ys):
    parts = []
    for i in range(len(xs) - 1, 0, -1):
        parts.append(uma(xs[i - 1], ys[i], xs[i]))
    parts.append(uma(carry, ys[0], xs[0]))
    return parts


def rca(carry: int, xs, ys) -> RevCircuit:
    """ys <- (xs + ys + carry) mod 2**w; carry and xs unchanged."""
    if len(xs) != len(ys) or not xs:
        raise ParameterError("RCA registers must have equal, positive width")
    return seq(*_maj_chain(carry, xs, ys), *_uma_chain(carry, xs, ys))


def sub(carry: int, xs, ys) -> RevCircuit:
    """ys <- (ys - xs) mod 2**w for a zero carry bit."""
    return reverse(rca(carry, xs, ys))


def cmp(carry: int, flag: int, xs, ys) -> RevCircuit:
    """flag ^= [x >= y]; carry must be 0 and is restored.

    Computes the carry out of ``x + ~y + 1`` into the top bit of ``xs``,
    copies it to ``flag`` and runs the majority chain backwards.
    """
    if len(xs) != len(ys) or not xs:
        raise ParameterError("CMP registers must have equal, positive width")
    negate = seq(*(Not(b) for b in ys), Not(carry))
    chain = seq(*_maj_chain(carry, xs, ys))
    return seq(negate, chain, ctrl(xs[-1], Not(flag)), reverse(chain), negate)


def swp(xs, ys) -> RevCircuit:
    if len(xs) != len(ys):
        raise ParameterError("SWP registers must have equal width")
    return seq(*(Swap(a, b) for a, b in zip(xs, ys)))


def sft(xs) -> RevCircuit:
    """xs <- 2 * xs, valid while the top bit is 0."""
    return seq(*(Swap(xs[i], xs[i + 1]) for i in range(len(xs) - 2, -1, -1)))


def load_constant(value: int, bits) -> RevCircuit:
    """XOR a classical constant into a register."""
    if value >> len(bits):
        raise ParameterError(f"{value} does not fit in {len(bits)} bits")
    return seq(*(Not(b) for i, b in enumerate(bits) if value >> i & 1))


# --- modular circuits --------------------------------------------------------


@lru_cache(maxsize=None)
def mod_add(layout: ArithLayout) -> RevCircuit:
    """[0][0][N][x][y] -> [0][0][N][x][(x + y) mod N] for x, y < N."""
    L = layout
    return seq(
        rca(L.carry, L.x, L.y),
        cmp(L.carry, L.flag, L.y, L.modulus),
        ctrl(L.flag, sub(L.carry, L.modulus, L.y)),
        # flag now holds [x + y >= N] == not [y' >= x]
        cmp(L.carry, L.flag, L.y, L.x),
        Not(L.flag),
    )


@lru_cache(maxsize=None)
def mod_sft(layout: ArithLayout) -> RevCircuit:
    """[0][0][N][x] -> [0][N <= 2x][N][2x mod N] for x < N; flag left dirty."""
    L = layout
    return seq(
        sft(L.x),
        cmp(L.carry, L.flag, L.x, L.modulus),
        ctrl(L.flag, sub(L.carry, L.modulus, L.x)),
    )


def _check_multiplier(a: int, N: int) -> None:
    if N < 2:
        raise ParameterError(f"modulus must be at least 2, got {N}")
    if not 0 < a < N:
        raise ParameterError(f"multiplier must satisfy 0 < a < N, got a={a}, N={N}")
    if gcd(a, N) != 1:
        raise IrreversibleError(f"gcd({a}, {N}) != 1: multiplication is irreversible")


def _mm_plan(a: int, N: int):
    """Block sequence for MM(a, N): ('load'|'add'|'shift'|'unshift', index)."""
    top = a.bit_length()
    plan = [("load", 0)]
    for i in range(top):
        if a >> i & 1:
            plan.append(("add", i))
        if i < top - 1:
            plan.append(("shift", i))
    plan.extend(("unshift", i) for i in range(top - 2, -1, -1))
    plan.append(("load", 0))
    return plan


def mm(a: int, N: int, layout: ArithLayout | None = None) -> RevCircuit:
    """[x][0][0]_s -> [x][a*x mod N][0]_s, summing shifted copies of x.

    Each modular doubling leaves its comparison flag dirty; the flag is parked
    in a fresh garbage bit and every doubling is undone once the sum is built.
    """
    _check_multiplier(a, N)
    L = layout or ArithLayout(modulus_width(N))
    if N >> L.n:
        raise ParameterError(f"N={N} does not fit the {L.n}-bit layout")
    parts = []
    for kind, i in _mm_plan(a, N):
        if kind == "load":
            parts.append(load_constant(N, L.modulus))
        elif kind == "add":
            parts.append(mod_add(L))
        elif kind == "shift":
            parts.append(seq(mod_sft(L), Swap(L.flag, L.garbage[i])))
        else:
            parts.append(seq(Swap(L.flag, L.garbage[i]), reverse(mod_sft(L))))
    return seq(*parts)


@lru_cache(maxsize=4096)
def imm(a: int, N: int, layout: ArithLayout | None = None) -> RevCircuit:
    """In-place modular multiplier: [x]_n [0]_s -> [a*x mod N]_n [0]_s."""
    _check_multiplier(a, N)
    L = layout or ArithLayout(modulus_width(N))
    a_inv = pow(a, -1, N)
    return seq(mm(a, N, L), swp(L.x, L.y), reverse(mm(a_inv, N, L)))


# --- structural counts (no circuit materialisation) --------------------------


@lru_cache(maxsize=None)
def _block_counts(layout: ArithLayout) -> dict:
    shift = primitive_count(mod_sft(layout)) + 1
    return {"add": primitive_count(mod_add(layout)), "shift": shift, "unshift": shift}


def mm_count(a: int, N: int, layout: ArithLayout | None = None) -> int:
    """Leaf count of :func:`mm` computed from its block plan."""
    _check_multiplier(a, N)
    L = layout or ArithLayout(modulus_width(N))
    counts = _block_counts(L)
    total = 0
    for kind, _ in _mm_plan(a, N):
        total += N.bit_count() if kind == "load" else counts[kind]
    return total


@lru_cache(maxsize=None)
def imm_count(a: int, N: int) -> int:
    """Leaf count of :func:`imm` (equals its translated gate count)."""
    L = ArithLayout(modulus_width(N))
    return mm_count(a, N, L) + L.width + mm_count(pow(a, -1, N), N, L)


__all__ = [
    "ArithLayout",
    "SKIP",
    "cmp",
    "imm",
    "imm_count",
    "load_constant",
    "maj",
    "mm",
    "mm_count",
    "mod_add",
    "mod_sft",
    "modulus_width",
    "rca",
    "sft",
    "sub",
    "swp",
    "uma",
]
