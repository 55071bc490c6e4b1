"""Fresh values, request normal forms and the normal-form request lattice.

Pairs over attributes the policy never mentions are dropped when
normalizing: no target can observe them, so evaluation is unchanged and the
lattice stays as small as possible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .model import Pair, Policy, PolicyError, Request, atomic_targets

DEFAULT_LATTICE_CAP = 24
FRESH_BASE = "new_value"


class UnknownAttribute(PolicyError):
    pass


class SearchSpaceTooLarge(Exception):
    def __init__(self, pairs: int, cap: int):
        super().__init__(f"normal-form lattice has 2^{pairs} requests, above the cap of 2^{cap}")
        self.pairs = pairs
        self.cap = cap


@dataclass(frozen=True)
class NormalFormContext:
    policy: Policy
    atoms: frozenset[Pair]
    fresh: dict[str, str]

    @classmethod
    def of(cls, p: Policy) -> "NormalFormContext":
        atoms = atomic_targets(p)
        fresh = {}
        for name in sorted({n for n, _ in atoms}):
            fresh[name] = _fresh(atoms, name)
        return cls(p, atoms, fresh)

    @cached_property
    def basis(self) -> tuple[Pair, ...]:
        """The maximal request as a sorted tuple; bit ``i`` of a lattice mask selects ``basis[i]``."""
        return tuple(sorted(self.atoms | {(n, v) for n, v in self.fresh.items()}))


def _fresh(atoms: frozenset[Pair], name: str) -> str:
    candidate, i = FRESH_BASE, 0
    while (name, candidate) in atoms:
        i += 1
        candidate = f"{FRESH_BASE}_{i}"
    return candidate


def _context(ctx_or_policy) -> NormalFormContext:
    if isinstance(ctx_or_policy, NormalFormContext):
        return ctx_or_policy
    return NormalFormContext.of(ctx_or_policy)


def fresh_value(ctx_or_policy, name: str) -> str:
    ctx = _context(ctx_or_policy)
    try:
        return ctx.fresh[name]
    except KeyError:
        raise UnknownAttribute(f"attribute {name!r} does not occur in the policy") from None


def normalize(ctx_or_policy, q: Request) -> Request:
    ctx = _context(ctx_or_policy)
    out = set()
    for pair in q.pairs:
        if pair in ctx.atoms:
            out.add(pair)
        elif pair[0] in ctx.fresh:
            out.add((pair[0], ctx.fresh[pair[0]]))
    return Request(frozenset(out))


def max_request(ctx_or_policy) -> Request:
    return Request(frozenset(_context(ctx_or_policy).basis))


def lattice_size(ctx_or_policy) -> int:
    return 2 ** len(_context(ctx_or_policy).basis)


def check_cap(ctx: NormalFormContext, cap: int) -> None:
    if len(ctx.basis) > cap:
        raise SearchSpaceTooLarge(len(ctx.basis), cap)


def enumerate_nf(ctx_or_policy, cap: int = DEFAULT_LATTICE_CAP) -> Iterator[Request]:
    """Every subset of the maximal request, smallest first, then lexicographically.

    The cap is checked eagerly, before the first request is produced.
    """
    ctx = _context(ctx_or_policy)
    check_cap(ctx, cap)
    return _subsets(ctx.basis)


def _subsets(basis: tuple[Pair, ...]) -> Iterator[Request]:
    for k in range(len(basis) + 1):
        for combo in itertools.combinations(basis, k):
            yield Request(frozenset(combo))
