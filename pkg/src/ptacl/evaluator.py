"""Target and policy semantics.

:func:`eval_target` and :func:`eval_policy` are the reference semantics:
plain structural recursion over one request. :func:`eval_lattice` computes
the same decision sets for many requests at once, each request given as a
bitmask over a fixed list of pairs; the resistance search and the
certificate checker use it to evaluate whole normal-form lattices.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import (
    Decision,
    DecisionSet,
    PAnd,
    PAtom,
    PDbd,
    Pair,
    PNot,
    Policy,
    PTar,
    Request,
    TAnd,
    TAtom,
    Target,
    TNot,
    TOpt,
)
from .trilogic import BOT, ONE, ZERO, TriValue, neg, opt, weak_and

ALLOW, DENY, NOTAPP = Decision.ALLOW, Decision.DENY, Decision.NOTAPP

# Decision-level operators, one equation per line.


def decision_not(d: Decision) -> Decision:
    return {ALLOW: DENY, DENY: ALLOW, NOTAPP: NOTAPP}[d]


def decision_dbd(d: Decision) -> Decision:
    # dbd DENY = DENY ; dbd ALLOW = ALLOW ; dbd BOT = DENY
    return DENY if d is NOTAPP else d


def decision_and(a: Decision, b: Decision) -> Decision:
    # strongand is commutative: strongand ALLOW d = d ; strongand DENY d = DENY ; strongand d d = d
    if a is ALLOW:
        return b
    if b is ALLOW:
        return a
    if a is DENY or b is DENY:
        return DENY
    return a


def _lift1(fn) -> list[int]:
    table = [0] * 8
    for mask in range(1, 8):
        out = 0
        for d in DecisionSet(mask):
            out |= fn(d)
        table[mask] = int(out)
    return table


def _lift2(fn) -> list[list[int]]:
    table = [[0] * 8 for _ in range(8)]
    for m1 in range(1, 8):
        for m2 in range(1, 8):
            out = 0
            for d1 in DecisionSet(m1):
                for d2 in DecisionSet(m2):
                    out |= fn(d1, d2)
            table[m1][m2] = int(out)
    return table


# Point-wise liftings to decision sets, indexed by decision-set bitmask.
SET_NOT = _lift1(decision_not)
SET_DBD = _lift1(decision_dbd)
SET_AND = _lift2(decision_and)


def eval_target(t: Target, q: Request) -> TriValue:
    if isinstance(t, TAtom):
        if not q.has_attribute(t.name):
            return BOT
        return ONE if t.value in q.values(t.name) else ZERO
    if isinstance(t, TNot):
        return neg(eval_target(t.target, q))
    if isinstance(t, TOpt):
        return opt(eval_target(t.target, q))
    if isinstance(t, TAnd):
        return weak_and(eval_target(t.left, q), eval_target(t.right, q))
    raise TypeError(f"cannot evaluate unresolved or unknown target {t!r}")


def _eval_mask(p: Policy, q: Request) -> int:
    if isinstance(p, PAtom):
        return int(p.decision)
    if isinstance(p, PNot):
        return SET_NOT[_eval_mask(p.policy, q)]
    if isinstance(p, PDbd):
        return SET_DBD[_eval_mask(p.policy, q)]
    if isinstance(p, PAnd):
        return SET_AND[_eval_mask(p.left, q)][_eval_mask(p.right, q)]
    if isinstance(p, PTar):
        t = eval_target(p.target, q)
        if t is ONE:
            return _eval_mask(p.policy, q)
        if t is ZERO:
            return int(NOTAPP)
        return int(NOTAPP) | _eval_mask(p.policy, q)
    raise TypeError(f"cannot evaluate unresolved or unknown policy {p!r}")


def eval_policy(p: Policy, q: Request) -> DecisionSet:
    return DecisionSet(_eval_mask(p, q))


# -- batch evaluation over request bitmasks ----------------------------------

_NP_WEAK_AND = np.array([[weak_and(TriValue(a), TriValue(b)) for b in range(3)] for a in range(3)], dtype=np.uint8)
_NP_NEG = np.array([neg(TriValue(a)) for a in range(3)], dtype=np.uint8)
_NP_OPT = np.array([opt(TriValue(a)) for a in range(3)], dtype=np.uint8)
_NP_SET_NOT = np.array(SET_NOT, dtype=np.uint8)
_NP_SET_DBD = np.array(SET_DBD, dtype=np.uint8)
_NP_SET_AND = np.array(SET_AND, dtype=np.uint8)


class _Lattice:
    def __init__(self, basis: Sequence[Pair], masks: np.ndarray):
        self.index = {pair: i for i, pair in enumerate(basis)}
        self.attr_bits: dict[str, int] = {}
        for i, (n, _) in enumerate(basis):
            self.attr_bits[n] = self.attr_bits.get(n, 0) | (1 << i)
        self.masks = masks.astype(np.int64, copy=False)

    def target(self, t: Target) -> np.ndarray:
        if isinstance(t, TAtom):
            bits = self.attr_bits.get(t.name, 0)
            present = (self.masks & bits) != 0
            out = np.where(present, np.uint8(ZERO), np.uint8(BOT))
            i = self.index.get((t.name, t.value))
            if i is not None:
                out[(self.masks >> i) & 1 == 1] = ONE
            return out
        if isinstance(t, TNot):
            return _NP_NEG[self.target(t.target)]
        if isinstance(t, TOpt):
            return _NP_OPT[self.target(t.target)]
        if isinstance(t, TAnd):
            return _NP_WEAK_AND[self.target(t.left), self.target(t.right)]
        raise TypeError(f"cannot evaluate unresolved or unknown target {t!r}")

    def policy(self, p: Policy) -> np.ndarray:
        if isinstance(p, PAtom):
            return np.full(self.masks.shape, int(p.decision), dtype=np.uint8)
        if isinstance(p, PNot):
            return _NP_SET_NOT[self.policy(p.policy)]
        if isinstance(p, PDbd):
            return _NP_SET_DBD[self.policy(p.policy)]
        if isinstance(p, PAnd):
            return _NP_SET_AND[self.policy(p.left), self.policy(p.right)]
        if isinstance(p, PTar):
            t = self.target(p.target)
            body = self.policy(p.policy)
            return np.where(t == ONE, body, np.where(t == ZERO, np.uint8(NOTAPP), body | np.uint8(NOTAPP)))
        raise TypeError(f"cannot evaluate unresolved or unknown policy {p!r}")


def eval_lattice(p: Policy, basis: Sequence[Pair], masks: np.ndarray) -> np.ndarray:
    """Evaluate ``p`` on every request encoded in ``masks``.

    Bit ``i`` of a mask selects ``basis[i]``. Returns a ``uint8`` array of
    decision-set bitmasks (see :class:`~ptacl.model.DecisionSet`).
    """
    if len(basis) > 62:
        raise ValueError("at most 62 pairs fit in a request bitmask")
    return _Lattice(basis, np.asarray(masks)).policy(p)


def request_of_mask(basis: Sequence[Pair], mask: int) -> Request:
    return Request(frozenset(pair for i, pair in enumerate(basis) if mask >> i & 1))
