"""Seeded random policies from the family P<m,n,k,l,r> and the benchmark harness.

Each policy draws from its own ``random.Random`` stream keyed by the seed and
the policy index, so generating a prefix, a single policy, or the whole family
in parallel all give the same terms.
"""

from __future__ import annotations

import io
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .lang import render_policy
from .model import (
    Decision,
    PAnd,
    PAtom,
    PDbd,
    PNot,
    Policy,
    PolicyEnv,
    PTar,
    TAnd,
    TAtom,
    Target,
    TNot,
    TOpt,
    atomic_targets,
    attributes,
    size,
)
from .normal_form import DEFAULT_LATTICE_CAP, SearchSpaceTooLarge
from .prover import prove_resistant
from .resistance import search

POLICY_CONSTRUCTORS = ("Patom", "Pnot", "Pdbd", "Pand", "Ptar")
TARGET_CONSTRUCTORS = ("Tatom", "Tnot", "Topt", "Tand")


@dataclass(frozen=True)
class GenParams:
    max_height: int
    max_width: int
    attrs: int
    values: int
    count: int
    seed: int = 0

    def __post_init__(self):
        for name in ("max_height", "max_width", "attrs", "values", "count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def vocabulary(self) -> tuple[tuple[str, str], ...]:
        return tuple((f"a{i}", f"v{j}") for i in range(1, self.attrs + 1) for j in range(1, self.values + 1))


class _Generator:
    def __init__(self, params: GenParams, index: int, policy_ops: Sequence[str], target_ops: Sequence[str]):
        self.rng = random.Random(f"{params.seed}/{index}")
        self.params = params
        self.vocab = params.vocabulary()
        self.policy_ops = [c for c in POLICY_CONSTRUCTORS if c in policy_ops]
        self.target_ops = [c for c in TARGET_CONSTRUCTORS if c in target_ops]

    def policy(self, height: int) -> Policy:
        choice = "Patom" if height <= 1 else self.rng.choice(self.policy_ops)
        if choice == "Patom":
            return PAtom(self.rng.choice((Decision.ALLOW, Decision.DENY)))
        if choice == "Pnot":
            return PNot(self.policy(height - 1))
        if choice == "Pdbd":
            return PDbd(self.policy(height - 1))
        if choice == "Pand":
            return PAnd(self.policy(height - 1), self.policy(height - 1))
        return PTar(self.target(self.params.max_width, self.params.max_width), self.policy(height - 1))

    def target(self, width: int, height: int) -> Target:
        eligible = [c for c in self.target_ops if c == "Tatom" or (height > 1 and (c != "Tand" or width > 1))]
        choice = self.rng.choice(eligible)
        if choice == "Tatom":
            return TAtom(*self.rng.choice(self.vocab))
        if choice == "Tnot":
            return TNot(self.target(width, height - 1))
        if choice == "Topt":
            return TOpt(self.target(width, height - 1))
        left = self.rng.randint(1, width - 1)
        return TAnd(self.target(left, height - 1), self.target(width - left, height - 1))


def generate_one(
    params: GenParams,
    index: int,
    policy_ops: Iterable[str] = POLICY_CONSTRUCTORS,
    target_ops: Iterable[str] = TARGET_CONSTRUCTORS,
) -> Policy:
    """Policy number ``index`` of the family.

    ``Patom`` and ``Tatom`` are always available; the other constructors are
    drawn uniformly from ``policy_ops`` and ``target_ops``.
    """
    policy_ops = set(policy_ops) | {"Patom"}
    target_ops = set(target_ops) | {"Tatom"}
    return _Generator(params, index, tuple(policy_ops), tuple(target_ops)).policy(params.max_height)


def generate(
    params: GenParams,
    policy_ops: Iterable[str] = POLICY_CONSTRUCTORS,
    target_ops: Iterable[str] = TARGET_CONSTRUCTORS,
) -> list[Policy]:
    policy_ops, target_ops = tuple(policy_ops), tuple(target_ops)
    return [generate_one(params, i, policy_ops, target_ops) for i in range(1, params.count + 1)]


def policy_name(index: int) -> str:
    return f"p{index}"


def to_env(policies: Sequence[Policy]) -> PolicyEnv:
    env = PolicyEnv()
    for i, p in enumerate(policies, start=1):
        env.define_policy(policy_name(i), p)
    return env


def render_family(params: GenParams, policies: Sequence[Policy]) -> str:
    head = (
        f"# P<{params.max_height},{params.max_width},{params.attrs},{params.values},{params.count}>"
        f" seed={params.seed}\n"
    )
    body = "".join(f"{policy_name(i)} : {render_policy(p)}\n" for i, p in enumerate(policies, start=1))
    return head + body


# -- benchmark ---------------------------------------------------------------

CSV_HEADER = "index,size,atoms,attrs,resistant,ce_count,search_us,proved,proof_us"


@dataclass(frozen=True)
class BenchRecord:
    index: int
    size: int
    atoms: int
    attrs: int
    resistant: bool | None  # None when the lattice exceeded the cap
    ce_count: int | None
    search_us: int | None
    proved: bool | None  # only meaningful for resistant policies
    proof_us: int | None

    def csv_row(self) -> str:
        def cell(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "1" if v else "0"
            return str(v)

        resistant = "cap" if self.resistant is None else cell(self.resistant)
        fields = [self.index, self.size, self.atoms, self.attrs]
        rest = [self.ce_count, self.search_us, self.proved, self.proof_us]
        return ",".join([*map(cell, fields), resistant, *map(cell, rest)])


@dataclass(frozen=True)
class BenchSummary:
    policies: int
    resistant: int
    proved: int
    capped: int

    @property
    def resistant_ratio(self) -> float:
        checked = self.policies - self.capped
        return self.resistant / checked if checked else 0.0

    @property
    def proof_ratio(self) -> float:
        return self.proved / self.resistant if self.resistant else 0.0

    def comment(self) -> str:
        return (
            f"# policies={self.policies} resistant={self.resistant} resistant_ratio={self.resistant_ratio:.4f}"
            f" proved={self.proved} proof_ratio={self.proof_ratio:.4f} capped={self.capped}"
        )


def _micros(start: float) -> int:
    return int((time.perf_counter() - start) * 1e6)


def bench_one(p: Policy, index: int, allow_exhaustive: bool = False, timing: bool = True,
              cap: int = DEFAULT_LATTICE_CAP) -> BenchRecord:
    base = dict(index=index, size=size(p), atoms=len(atomic_targets(p)), attrs=len(attributes(p)))
    start = time.perf_counter()
    try:
        report = search(p, cap=cap)
    except SearchSpaceTooLarge:
        return BenchRecord(**base, resistant=None, ce_count=None, search_us=None, proved=None, proof_us=None)
    search_us = _micros(start) if timing else None
    resistant = not report.hits
    proved, proof_us = None, None
    if resistant:
        start = time.perf_counter()
        proved = prove_resistant(p, allow_exhaustive, cap) is not None
        proof_us = _micros(start) if timing else None
    return BenchRecord(**base, resistant=resistant, ce_count=report.count, search_us=search_us,
                       proved=proved, proof_us=proof_us)


def _bench_task(args) -> BenchRecord:
    return bench_one(*args)


def run_bench(params: GenParams, allow_exhaustive: bool = False, jobs: int = 1, timing: bool = True,
              cap: int = DEFAULT_LATTICE_CAP) -> tuple[list[BenchRecord], BenchSummary]:
    tasks = [(p, i, allow_exhaustive, timing, cap) for i, p in enumerate(generate(params), start=1)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_bench_task, tasks, chunksize=8))
    else:
        records = [_bench_task(t) for t in tasks]
    summary = BenchSummary(
        policies=len(records),
        resistant=sum(1 for r in records if r.resistant),
        proved=sum(1 for r in records if r.proved),
        capped=sum(1 for r in records if r.resistant is None),
    )
    return records, summary


def render_csv(records: Sequence[BenchRecord], summary: BenchSummary) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for r in records:
        out.write(r.csv_row() + "\n")
    out.write(summary.comment() + "\n")
    return out.getvalue()
