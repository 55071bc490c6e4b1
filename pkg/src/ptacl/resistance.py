"""Deciding resistance to attribute-hiding attacks.

A policy is resistant when no sub-request of a request that is not allowed
evaluates to exactly ``{ALLOW}``. It suffices to look at normal-form
requests and at one-pair removals, so :func:`find_counterexamples` evaluates
each point of the normal-form lattice once and compares it with its direct
sub-requests. :func:`naive_oracle` checks every subset pair instead and is
only meant as an independent test oracle.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .evaluator import eval_lattice, eval_policy, request_of_mask
from .model import ALLOW_ONLY, Decision, DecisionSet, Pair, Policy, Request
from .normal_form import DEFAULT_LATTICE_CAP, NormalFormContext, check_cap, enumerate_nf

NAIVE_LATTICE_CAP = 12
_CHUNK_BITS = 16
_ALLOW = np.uint8(Decision.ALLOW)


@dataclass(frozen=True)
class Violation:
    """A pair of requests ``smaller ⊆ larger`` where hiding information gains access."""

    smaller: Request
    larger: Request
    eval_smaller: DecisionSet
    eval_larger: DecisionSet

    def __post_init__(self):
        if not self.smaller <= self.larger:
            raise ValueError("the smaller request must be a subset of the larger one")
        if not self.eval_smaller.is_allow or self.eval_larger.is_allow:
            raise ValueError("a violation needs {ALLOW} on the smaller request only")

    @classmethod
    def build(cls, p: Policy, smaller: Request, larger: Request) -> "Violation":
        return cls(smaller, larger, eval_policy(p, smaller), eval_policy(p, larger))


@dataclass(frozen=True)
class CounterExample(Violation):
    removed: Pair = ("", "")

    def __post_init__(self):
        super().__post_init__()
        if self.larger - self.smaller != Request.of(self.removed) or self.removed in self.smaller:
            raise ValueError("a counter-example removes exactly one pair")

    @classmethod
    def build(cls, p: Policy, larger: Request, removed: Pair) -> "CounterExample":
        smaller = larger.without(removed)
        return cls(smaller, larger, eval_policy(p, smaller), eval_policy(p, larger), removed)


@dataclass(frozen=True)
class Resistant:
    checked_requests: int

    resistant = True


@dataclass(frozen=True)
class NotResistant:
    examples: tuple[Violation, ...]

    resistant = False

    def __post_init__(self):
        if not self.examples:
            raise ValueError("NotResistant needs at least one example")


ResistanceVerdict = Resistant | NotResistant


@dataclass
class SearchReport:
    """Raw outcome of a lattice search; counter-examples are kept as (mask, bit) pairs."""

    policy: Policy
    basis: tuple[Pair, ...]
    evaluations: int
    hits: list[tuple[int, int]] = field(default_factory=list)

    @property
    def lattice_size(self) -> int:
        return 1 << len(self.basis)

    @property
    def count(self) -> int:
        return len(self.hits)

    def counterexamples(self, limit: int | None = None) -> list[CounterExample]:
        hits = self.hits if limit is None else self.hits[:limit]
        return [
            CounterExample.build(self.policy, request_of_mask(self.basis, mask), self.basis[bit])
            for mask, bit in hits
        ]


def _eval_chunk(args) -> np.ndarray:
    p, basis, lo, hi = args
    return eval_lattice(p, basis, np.arange(lo, hi, dtype=np.int64))


def evaluate_lattice(p: Policy, basis: Sequence[Pair], jobs: int = 1) -> np.ndarray:
    """Decision-set codes for every mask over ``basis``, split into prefix chunks."""
    k = len(basis)
    step = 1 << min(k, _CHUNK_BITS)
    chunks = [(p, tuple(basis), lo, lo + step) for lo in range(0, 1 << k, step)]
    if jobs > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_eval_chunk, chunks))
    else:
        parts = [_eval_chunk(c) for c in chunks]
    return np.concatenate(parts)


def _canonical_key(k: int):
    def key(hit: tuple[int, int]):
        mask, bit = hit
        # same-size subsets compare lexicographically on their sorted pairs,
        # which is descending order of the bit-reversed mask
        rev = int(format(mask, f"0{k}b")[::-1], 2) if k else 0
        return bin(mask).count("1"), -rev, bit

    return key


def search(
    p: Policy,
    limit: int | None = None,
    cap: int = DEFAULT_LATTICE_CAP,
    jobs: int = 1,
) -> SearchReport:
    ctx = NormalFormContext.of(p)
    check_cap(ctx, cap)
    basis = ctx.basis
    k = len(basis)
    codes = evaluate_lattice(p, basis, jobs)
    masks = np.arange(1 << k, dtype=np.int64)
    hits: list[tuple[int, int]] = []
    for bit in range(k):
        with_bit = masks[(masks >> bit) & 1 == 1]
        bad = (codes[with_bit] != _ALLOW) & (codes[with_bit ^ (1 << bit)] == _ALLOW)
        hits.extend((int(m), bit) for m in with_bit[bad])
    hits.sort(key=_canonical_key(k))
    if limit is not None:
        del hits[limit:]
    return SearchReport(p, basis, evaluations=1 << k, hits=hits)


def find_counterexamples(
    p: Policy, limit: int | None = None, cap: int = DEFAULT_LATTICE_CAP, jobs: int = 1
) -> list[CounterExample]:
    return search(p, limit, cap, jobs).counterexamples()


def is_resistant(p: Policy, cap: int = DEFAULT_LATTICE_CAP, jobs: int = 1, limit: int | None = None) -> ResistanceVerdict:
    report = search(p, limit, cap, jobs)
    if report.hits:
        return NotResistant(tuple(report.counterexamples()))
    return Resistant(report.lattice_size)


def naive_oracle(p: Policy, cap: int = NAIVE_LATTICE_CAP, limit: int | None = None) -> ResistanceVerdict:
    """Check the definition directly on every pair ``q' ⊆ q`` of normal-form requests."""
    requests = list(enumerate_nf(p, cap))
    basis = max(requests, key=len) if requests else Request()
    index = {pair: i for i, pair in enumerate(sorted(basis.pairs))}
    results: dict[int, DecisionSet] = {}
    for q in requests:
        results[sum(1 << index[pair] for pair in q.pairs)] = eval_policy(p, q)
    found: list[Violation] = []
    by_mask = {sum(1 << index[pair] for pair in q.pairs): q for q in requests}
    for mask, q in by_mask.items():
        if results[mask] == ALLOW_ONLY:
            continue
        sub = mask
        while True:
            if results[sub] == ALLOW_ONLY:
                found.append(Violation(by_mask[sub], q, results[sub], results[mask]))
                if limit is not None and len(found) >= limit:
                    return NotResistant(tuple(found))
            if sub == 0:
                break
            sub = (sub - 1) & mask
    if found:
        return NotResistant(tuple(found))
    return Resistant(len(requests))
