import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shorkit.errors import IrreversibleError, ParameterError
from shorkit.rcir import BitRegister, eval_int, eval_many, max_control_depth, primitive_count, well_typed
from shorkit.revarith import (
    ArithLayout,
    cmp,
    imm,
    imm_count,
    maj,
    mm,
    mm_count,
    mod_add,
    mod_sft,
    modulus_width,
    rca,
    sft,
    sub,
    swp,
)


def pack(fields):
    """fields: list of (value, bit positions) -> integer state."""
    v = 0
    for value, pos in fields:
        for i, b in enumerate(pos):
            if value >> i & 1:
                v |= 1 << b
    return v


def read(state, pos):
    return sum(((state >> b) & 1) << i for i, b in enumerate(pos))


@pytest.mark.parametrize("inp,out", [((0, 0, 0), (0, 0, 0)), ((1, 1, 1), (0, 0, 1)), ((1, 0, 1), (0, 1, 1))])
def test_maj_table(inp, out):
    v = eval_int(maj(0, 1, 2), pack([(b, [i]) for i, b in enumerate(inp)]), 3)
    assert tuple((v >> i) & 1 for i in range(3)) == out


W = 4
XS, YS, CARRY, FLAG = list(range(0, W)), list(range(W, 2 * W)), 2 * W, 2 * W + 1
WIDTH = 2 * W + 2


@pytest.mark.parametrize("c,x,y,want", [(0, 0, 0, 0), (0, 3, 5, 8), (1, 3, 4, 8)])
def test_rca_examples(c, x, y, want):
    s = pack([(x, XS), (y, YS), (c, [CARRY])])
    out = eval_int(rca(CARRY, XS, YS), s, WIDTH)
    assert read(out, YS) == want and read(out, XS) == x and read(out, [CARRY]) == c


def test_rca_sub_exhaustive():
    c_add, c_sub = rca(CARRY, XS, YS), sub(CARRY, XS, YS)
    for x, y in itertools.product(range(1 << W), repeat=2):
        s = pack([(x, XS), (y, YS)])
        out = eval_int(c_add, s, WIDTH)
        assert read(out, YS) == (x + y) % (1 << W) and read(out, XS) == x
        out = eval_int(c_sub, s, WIDTH)
        assert read(out, YS) == (y - x) % (1 << W) and read(out, XS) == x


def test_cmp_exhaustive():
    # the comparison needs a spare top bit, as in the modular circuits
    c = cmp(CARRY, FLAG, XS, YS)
    for x, y in itertools.product(range(1 << (W - 1)), repeat=2):
        out = eval_int(c, pack([(x, XS), (y, YS)]), WIDTH)
        assert read(out, [FLAG]) == int(x >= y)
        assert read(out, XS) == x and read(out, YS) == y and read(out, [CARRY]) == 0


def test_sub_self_and_cmp_example():
    out = eval_int(sub(CARRY, XS, YS), pack([(3, XS), (3, YS)]), WIDTH)
    assert read(out, YS) == 0
    out = eval_int(cmp(CARRY, FLAG, XS, YS), pack([(5, XS), (3, YS)]), WIDTH)
    assert read(out, [FLAG]) == 1 and read(out, XS) == 5 and read(out, YS) == 3


def test_sft_and_swp():
    assert read(eval_int(sft(XS), pack([(5, XS)]), WIDTH), XS) == 10
    out = eval_int(swp(XS, YS), pack([(5, XS), (9, YS)]), WIDTH)
    assert read(out, XS) == 9 and read(out, YS) == 5


L7 = ArithLayout(modulus_width(7))


def _modular_state(L, N, x, y=0):
    return pack([(x, L.x), (y, L.y), (N, L.modulus)])


@pytest.mark.parametrize("x,y,want", [(0, 5, 5), (5, 4, 2), (3, 3, 6)])
def test_mod_add_examples(x, y, want):
    out = eval_int(mod_add(L7), _modular_state(L7, 7, x, y), L7.total_bits)
    assert read(out, L7.y) == want and read(out, L7.x) == x
    assert read(out, [L7.flag, L7.carry]) == 0


@pytest.mark.parametrize("x,flag,want", [(0, 0, 0), (5, 1, 3), (2, 0, 4)])
def test_mod_sft_examples(x, flag, want):
    out = eval_int(mod_sft(L7), _modular_state(L7, 7, x), L7.total_bits)
    assert read(out, L7.x) == want and read(out, [L7.flag]) == flag


@pytest.mark.parametrize("N", [3, 5, 7, 11, 13])
def test_mod_add_exhaustive(N):
    L = ArithLayout(modulus_width(N))
    c = mod_add(L)
    for x, y in itertools.product(range(N), repeat=2):
        out = eval_int(c, _modular_state(L, N, x, y), L.total_bits)
        assert out == _modular_state(L, N, x, (x + y) % N)


@pytest.mark.parametrize("a,N,x,want", [(1, 7, 6, 6), (3, 7, 4, 5), (5, 6, 5, 1)])
def test_mm_examples(a, N, x, want):
    L = ArithLayout(modulus_width(N))
    out = eval_int(mm(a, N), pack([(x, L.x)]), L.total_bits)
    assert out == pack([(x, L.x), (want, L.y)])


@pytest.mark.parametrize("a,N,x,want", [(1, 7, 3, 3), (3, 7, 2, 6), (4, 15, 7, 13)])
def test_imm_examples(a, N, x, want):
    L = ArithLayout(modulus_width(N))
    assert eval_int(imm(a, N), x, L.total_bits) == want


@pytest.mark.parametrize("N", range(2, 34))
def test_imm_exhaustive_small(N):
    L = ArithLayout(modulus_width(N))
    xs = np.arange(N, dtype=np.uint64)
    for a in range(1, N):
        if np.gcd(a, N) != 1:
            continue
        c = imm(a, N)
        assert well_typed(c, L.total_bits)
        assert np.array_equal(eval_many(c, xs, L.total_bits), xs * a % N)


def test_imm_rejects_bad_multiplier():
    with pytest.raises(IrreversibleError):
        imm(4, 8)
    with pytest.raises(ParameterError):
        imm(0, 7)
    with pytest.raises(ParameterError):
        mm(9, 7)


def test_layout_registers_disjoint():
    for n in range(1, 12):
        L = ArithLayout(n)
        regs = [L.x, L.y, L.modulus, [L.carry], [L.flag], L.garbage]
        flat = [b for r in regs for b in r]
        assert len(flat) == len(set(flat))
        assert L.used_bits <= L.total_bits == 4 * n + 11


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 200).flatmap(lambda N: st.tuples(st.integers(1, N - 1), st.just(N))))
def test_structural_counts(aN):
    a, N = aN
    if np.gcd(a, N) != 1:
        return
    assert imm_count(a, N) == primitive_count(imm(a, N))
    assert mm_count(a, N) == primitive_count(mm(a, N))


def test_imm_control_depth():
    assert max_control_depth(imm(3, 7)) == 3
    assert primitive_count(imm(3, 7)) == 870
