import itertools

import pytest

import oracles
from ptacl.trilogic import (
    BINARY_TABLES,
    UNARY_TABLES,
    BinaryOp,
    TriValue,
    UnaryOp,
    apply_binary,
    apply_unary,
    leq,
)

V = {"1": TriValue.ONE, "0": TriValue.ZERO, "b": TriValue.BOT}
ALL = list(V.values())

# golden values; rows and columns in the order 1, 0, bot
GOLDEN_BINARY = {
    BinaryOp.WEAK_AND: ["1 0 b", "0 0 b", "b b b"],
    BinaryOp.WEAK_OR: ["1 1 b", "1 0 b", "b b b"],
    BinaryOp.STRONG_AND: ["1 0 b", "0 0 0", "b 0 b"],
    BinaryOp.STRONG_OR: ["1 1 1", "1 0 b", "1 b b"],
}
GOLDEN_UNARY = {UnaryOp.NEG: "0 1 b", UnaryOp.OPT: "1 0 0"}
ORDER = "1 0 b".split()


@pytest.mark.parametrize("op", list(BinaryOp))
def test_binary_golden(op):
    for row, left in zip(GOLDEN_BINARY[op], ORDER):
        for cell, right in zip(row.split(), ORDER):
            assert apply_binary(op, V[left], V[right]) is V[cell], (op, left, right)


@pytest.mark.parametrize("op", list(UnaryOp))
def test_unary_golden(op):
    for cell, x in zip(GOLDEN_UNARY[op].split(), ORDER):
        assert apply_unary(op, V[x]) is V[cell]


def test_tables_are_complete():
    assert sum(len(t) for t in BINARY_TABLES.values()) == 36
    assert sum(len(t) for t in UNARY_TABLES.values()) == 6


FORMULAS = {
    BinaryOp.WEAK_AND: oracles.weak_and,
    BinaryOp.WEAK_OR: oracles.weak_or,
    BinaryOp.STRONG_AND: oracles.strong_and,
    BinaryOp.STRONG_OR: oracles.strong_or,
}
NAME = {v: k for k, v in V.items()}


@pytest.mark.parametrize("op", list(BinaryOp))
def test_binary_matches_closed_forms(op):
    for a, b in itertools.product(ALL, ALL):
        assert NAME[apply_binary(op, a, b)] == FORMULAS[op](NAME[a], NAME[b])


@pytest.mark.parametrize("a,b", list(itertools.product(ALL, ALL)))
def test_de_morgan(a, b):
    n = lambda x: apply_unary(UnaryOp.NEG, x)  # noqa: E731
    assert apply_binary(BinaryOp.STRONG_AND, a, b) is n(apply_binary(BinaryOp.STRONG_OR, n(a), n(b)))
    assert apply_binary(BinaryOp.WEAK_AND, a, b) is n(apply_binary(BinaryOp.WEAK_OR, n(a), n(b)))


def test_commutative():
    for op in BinaryOp:
        for a, b in itertools.product(ALL, ALL):
            assert apply_binary(op, a, b) is apply_binary(op, b, a)


def test_information_order():
    assert leq(TriValue.BOT, TriValue.ZERO) and leq(TriValue.ZERO, TriValue.ONE)
    assert not leq(TriValue.ONE, TriValue.BOT)


def test_weak_ops_and_opt_are_monotone_in_information_order():
    for op in (BinaryOp.WEAK_AND, BinaryOp.WEAK_OR):
        for a, a2, b, b2 in itertools.product(ALL, repeat=4):
            if leq(a, a2) and leq(b, b2):
                assert leq(apply_binary(op, a, b), apply_binary(op, a2, b2))
    for a, a2 in itertools.product(ALL, ALL):
        if leq(a, a2):
            assert leq(apply_unary(UnaryOp.OPT, a), apply_unary(UnaryOp.OPT, a2))


def test_negation_breaks_monotonicity():
    assert leq(TriValue.ZERO, TriValue.ONE)
    assert not leq(apply_unary(UnaryOp.NEG, TriValue.ZERO), apply_unary(UnaryOp.NEG, TriValue.ONE))


def test_rendering():
    assert [str(v) for v in (TriValue.ONE, TriValue.ZERO, TriValue.BOT)] == ["1", "0", "⊥"]
