"""Three-valued logic over {1, 0, ⊥}.

The same carrier serves both for target results (match / no-match /
indeterminate) and, through :mod:`ptacl.evaluator`, for policy decisions.
Operators are plain table lookups.
"""

from __future__ import annotations

import enum


class TriValue(enum.IntEnum):
    """A truth value. Integer codes follow the information order ⊥ < 0 < 1."""

    BOT = 0
    ZERO = 1
    ONE = 2

    def __str__(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {TriValue.ONE: "1", TriValue.ZERO: "0", TriValue.BOT: "⊥"}


class BinaryOp(enum.Enum):
    WEAK_AND = "⊓"
    WEAK_OR = "⊔"
    STRONG_AND = "⊓~"
    STRONG_OR = "⊔~"


class UnaryOp(enum.Enum):
    NEG = "¬"
    OPT = "∼"


ONE, ZERO, BOT = TriValue.ONE, TriValue.ZERO, TriValue.BOT

# Rows are the left operand, columns the right operand, both in the order 1, 0, ⊥.
_ORDER = (ONE, ZERO, BOT)


def _table(rows):
    return {
        (a, b): rows[i][j]
        for i, a in enumerate(_ORDER)
        for j, b in enumerate(_ORDER)
    }


BINARY_TABLES: dict[BinaryOp, dict[tuple[TriValue, TriValue], TriValue]] = {
    BinaryOp.WEAK_AND: _table([
        (ONE, ZERO, BOT),
        (ZERO, ZERO, BOT),
        (BOT, BOT, BOT),
    ]),
    BinaryOp.WEAK_OR: _table([
        (ONE, ONE, BOT),
        (ONE, ZERO, BOT),
        (BOT, BOT, BOT),
    ]),
    BinaryOp.STRONG_AND: _table([
        (ONE, ZERO, BOT),
        (ZERO, ZERO, ZERO),
        (BOT, ZERO, BOT),
    ]),
    BinaryOp.STRONG_OR: _table([
        (ONE, ONE, ONE),
        (ONE, ZERO, BOT),
        (ONE, BOT, BOT),
    ]),
}

UNARY_TABLES: dict[UnaryOp, dict[TriValue, TriValue]] = {
    UnaryOp.NEG: {ONE: ZERO, ZERO: ONE, BOT: BOT},
    UnaryOp.OPT: {ONE: ONE, ZERO: ZERO, BOT: ZERO},
}


def apply_binary(op: BinaryOp, a: TriValue, b: TriValue) -> TriValue:
    return BINARY_TABLES[op][a, b]


def apply_unary(op: UnaryOp, a: TriValue) -> TriValue:
    return UNARY_TABLES[op][a]


def leq(a: TriValue, b: TriValue) -> bool:
    """Information order: reflexive closure of ⊥ ≺ 0 ≺ 1."""
    return a <= b


def weak_and(a: TriValue, b: TriValue) -> TriValue:
    return BINARY_TABLES[BinaryOp.WEAK_AND][a, b]


def neg(a: TriValue) -> TriValue:
    return UNARY_TABLES[UnaryOp.NEG][a]


def opt(a: TriValue) -> TriValue:
    return UNARY_TABLES[UnaryOp.OPT][a]
