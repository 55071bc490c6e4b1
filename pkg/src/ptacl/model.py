"""Abstract syntax for PTaCL targets and policies, requests and decision sets.

Trees are immutable. ``TRef``/``PRef`` nodes only appear in the raw
definitions of a :class:`PolicyEnv`; every analysis below expects resolved,
reference-free trees.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, Union


class PolicyError(Exception):
    """Base class for errors about policy definitions."""


class UnknownIdentifier(PolicyError):
    pass


class CyclicDefinition(PolicyError):
    pass


class DuplicateDefinition(PolicyError):
    pass


# -- decisions ---------------------------------------------------------------


class Decision(enum.IntFlag):
    """Policy decisions, encoded as bits so a set of them fits in one int."""

    ALLOW = 1
    DENY = 2
    NOTAPP = 4

    @property
    def label(self) -> str:
        return _DECISION_LABELS[self]


_DECISION_LABELS = {Decision.ALLOW: "ALLOW", Decision.DENY: "DENY", Decision.NOTAPP: "BOT"}
DECISIONS = (Decision.ALLOW, Decision.DENY, Decision.NOTAPP)


@dataclass(frozen=True, slots=True)
class DecisionSet:
    """A nonempty set of decisions, stored as a bitmask of :class:`Decision`."""

    mask: int

    def __post_init__(self):
        if not 1 <= self.mask <= 7:
            raise ValueError(f"a decision set must be a nonempty subset of 3 decisions, got mask {self.mask}")

    @classmethod
    def of(cls, *decisions: Decision) -> "DecisionSet":
        mask = 0
        for d in decisions:
            mask |= int(d)
        return cls(mask)

    def __iter__(self) -> Iterator[Decision]:
        return (d for d in DECISIONS if self.mask & d)

    def __contains__(self, d: Decision) -> bool:
        return bool(self.mask & d)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    @property
    def is_allow(self) -> bool:
        return self.mask == Decision.ALLOW

    def __str__(self) -> str:
        return "{" + ", ".join(d.label for d in self) + "}"


ALLOW_ONLY = DecisionSet.of(Decision.ALLOW)
ALL_DECISION_SETS = tuple(DecisionSet(m) for m in range(1, 8))


# -- requests ----------------------------------------------------------------

Pair = tuple[str, str]


@dataclass(frozen=True)
class Request:
    """A finite set of attribute name-value pairs.

    Iteration is canonical: sorted by name, then value.
    """

    pairs: frozenset[Pair] = frozenset()
    _values: dict[str, frozenset[str]] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if not isinstance(self.pairs, frozenset):
            object.__setattr__(self, "pairs", frozenset(self.pairs))
        values: dict[str, set[str]] = {}
        for n, v in self.pairs:
            values.setdefault(n, set()).add(v)
        object.__setattr__(self, "_values", {n: frozenset(vs) for n, vs in values.items()})

    @classmethod
    def of(cls, *pairs: Pair) -> "Request":
        return cls(frozenset(pairs))

    def __iter__(self) -> Iterator[Pair]:
        return iter(sorted(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair: Pair) -> bool:
        return pair in self.pairs

    def __le__(self, other: "Request") -> bool:
        return self.pairs <= other.pairs

    def __lt__(self, other: "Request") -> bool:
        return self.pairs < other.pairs

    def __or__(self, other: "Request") -> "Request":
        return Request(self.pairs | other.pairs)

    def __sub__(self, other: "Request") -> "Request":
        return Request(self.pairs - other.pairs)

    def without(self, pair: Pair) -> "Request":
        return Request(self.pairs - {pair})

    def has_attribute(self, name: str) -> bool:
        return name in self._values

    def values(self, name: str) -> frozenset[str]:
        return self._values.get(name, frozenset())

    def names(self) -> frozenset[str]:
        return frozenset(self._values)

    def sort_key(self) -> tuple[int, tuple[Pair, ...]]:
        """Size-then-lexicographic order used for every enumeration."""
        return len(self.pairs), tuple(sorted(self.pairs))


# -- targets -----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TAtom:
    name: str
    value: str


@dataclass(frozen=True, slots=True)
class TNot:
    target: "Target"


@dataclass(frozen=True, slots=True)
class TOpt:
    target: "Target"


@dataclass(frozen=True, slots=True)
class TAnd:
    left: "Target"
    right: "Target"


@dataclass(frozen=True, slots=True)
class TRef:
    id: str


Target = Union[TAtom, TNot, TOpt, TAnd, TRef]


# -- policies ----------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class PAtom:
    decision: Decision


@dataclass(frozen=True, slots=True)
class PNot:
    policy: "Policy"


@dataclass(frozen=True, slots=True)
class PDbd:
    policy: "Policy"


@dataclass(frozen=True, slots=True)
class PAnd:
    left: "Policy"
    right: "Policy"


@dataclass(frozen=True, slots=True)
class PTar:
    target: Target
    policy: "Policy"


@dataclass(frozen=True, slots=True)
class PRef:
    id: str


Policy = Union[PAtom, PNot, PDbd, PAnd, PTar, PRef]

ALLOW = PAtom(Decision.ALLOW)
DENY = PAtom(Decision.DENY)
NOTAPP = PAtom(Decision.NOTAPP)

TARGET_TYPES = (TAtom, TNot, TOpt, TAnd, TRef)
POLICY_TYPES = (PAtom, PNot, PDbd, PAnd, PTar, PRef)


def children(node) -> tuple:
    """Direct subterms, targets before policies for ``PTar``."""
    if isinstance(node, (TAtom, PAtom, TRef, PRef)):
        return ()
    if isinstance(node, (TNot, TOpt)):
        return (node.target,)
    if isinstance(node, (PNot, PDbd)):
        return (node.policy,)
    if isinstance(node, (TAnd, PAnd)):
        return (node.left, node.right)
    if isinstance(node, PTar):
        return (node.target, node.policy)
    raise TypeError(f"not a PTaCL node: {node!r}")


def walk(node) -> Iterator:
    """Pre-order traversal over policy and target nodes."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(children(n)))


# -- environments ------------------------------------------------------------


@dataclass
class PolicyEnv:
    """Named target and policy definitions, in definition order.

    Definitions are stored raw (they may contain references to earlier
    definitions); use :meth:`resolve` for reference-free trees.
    """

    targets: dict[str, Target] = field(default_factory=dict)
    policies: dict[str, Policy] = field(default_factory=dict)
    order: list[str] = field(default_factory=list)

    def define_target(self, name: str, target: Target) -> None:
        self._check_new(name)
        self._check_refs(target)
        self.targets[name] = target
        self.order.append(name)

    def define_policy(self, name: str, policy: Policy) -> None:
        self._check_new(name)
        self._check_refs(policy)
        self.policies[name] = policy
        self.order.append(name)

    def _check_new(self, name: str) -> None:
        if name in self.targets or name in self.policies:
            raise DuplicateDefinition(f"{name!r} is already defined")

    def _check_refs(self, node) -> None:
        for n in walk(node):
            if isinstance(n, TRef) and n.id not in self.targets:
                raise UnknownIdentifier(f"unknown target {n.id!r}")
            if isinstance(n, PRef) and n.id not in self.policies:
                raise UnknownIdentifier(f"unknown policy {n.id!r}")

    def is_target(self, name: str) -> bool:
        return name in self.targets

    def definitions(self) -> Iterator[tuple[str, Target | Policy]]:
        for name in self.order:
            yield name, self.targets[name] if name in self.targets else self.policies[name]

    def resolve(self, name: str) -> Policy:
        if name not in self.policies:
            raise UnknownIdentifier(f"no policy named {name!r}")
        return _Resolver(self).policy(PRef(name))

    def resolve_target(self, name: str) -> Target:
        if name not in self.targets:
            raise UnknownIdentifier(f"no target named {name!r}")
        return _Resolver(self).target(TRef(name))

    def inline(self, node):
        """Resolve every reference inside an arbitrary raw tree."""
        return _Resolver(self).node(node)


class _Resolver:
    def __init__(self, env: PolicyEnv):
        self.env = env
        self.done: dict[str, object] = {}
        self.active: set[str] = set()

    def _deref(self, name: str, table: dict, kind: str, visit):
        if name in self.done:
            return self.done[name]
        if name not in table:
            raise UnknownIdentifier(f"unknown {kind} {name!r}")
        if name in self.active:
            raise CyclicDefinition(f"{kind} {name!r} is defined in terms of itself")
        self.active.add(name)
        result = visit(table[name])
        self.active.discard(name)
        self.done[name] = result
        return result

    def node(self, n):
        return self.target(n) if isinstance(n, TARGET_TYPES) else self.policy(n)

    def target(self, t: Target) -> Target:
        if isinstance(t, TRef):
            return self._deref(t.id, self.env.targets, "target", self.target)
        if isinstance(t, TAtom):
            return t
        if isinstance(t, TNot):
            return TNot(self.target(t.target))
        if isinstance(t, TOpt):
            return TOpt(self.target(t.target))
        if isinstance(t, TAnd):
            return TAnd(self.target(t.left), self.target(t.right))
        raise TypeError(f"not a target: {t!r}")

    def policy(self, p: Policy) -> Policy:
        if isinstance(p, PRef):
            return self._deref(p.id, self.env.policies, "policy", self.policy)
        if isinstance(p, PAtom):
            return p
        if isinstance(p, PNot):
            return PNot(self.policy(p.policy))
        if isinstance(p, PDbd):
            return PDbd(self.policy(p.policy))
        if isinstance(p, PAnd):
            return PAnd(self.policy(p.left), self.policy(p.right))
        if isinstance(p, PTar):
            return PTar(self.target(p.target), self.policy(p.policy))
        if isinstance(p, TARGET_TYPES):
            raise UnknownIdentifier("a target cannot be used as a policy")
        raise TypeError(f"not a policy: {p!r}")


# -- structural analyses -----------------------------------------------------


def atomic_targets(p) -> frozenset[Pair]:
    """The set A(p) of atomic targets (name, value) occurring anywhere in ``p``."""
    return frozenset((n.name, n.value) for n in walk(p) if isinstance(n, TAtom))


def attributes(p) -> frozenset[str]:
    return frozenset(n for n, _ in atomic_targets(p))


def size(p: Policy) -> int:
    """Number of policy constructors; target constructors are not counted."""
    return sum(1 for n in walk(p) if isinstance(n, (PAtom, PNot, PDbd, PAnd, PTar)))


def height(p: Policy) -> int:
    """Policy constructor height; an atomic policy has height 1 and targets do not count."""
    if isinstance(p, PAtom):
        return 1
    if isinstance(p, (PNot, PDbd)):
        return 1 + height(p.policy)
    if isinstance(p, PAnd):
        return 1 + max(height(p.left), height(p.right))
    if isinstance(p, PTar):
        return 1 + height(p.policy)
    raise TypeError(f"not a resolved policy: {p!r}")


def target_width(t: Target) -> int:
    return sum(1 for n in walk(t) if isinstance(n, TAtom))


def targets_of(p: Policy) -> Iterator[Target]:
    """Top-level targets guarding each ``PTar`` node of ``p``."""
    for n in walk(p):
        if isinstance(n, PTar):
            yield n.target


@dataclass(frozen=True)
class StructuralFlags:
    well_formed: bool
    without_pnot: bool
    without_pdbd: bool
    without_ptar: bool
    targets_without_tnot: bool


def structural_flags(p) -> StructuralFlags:
    kinds = {type(n) for n in walk(p)}
    well_formed = not any(isinstance(n, PAtom) and n.decision is Decision.NOTAPP for n in walk(p))
    return StructuralFlags(
        well_formed=well_formed,
        without_pnot=PNot not in kinds,
        without_pdbd=PDbd not in kinds,
        without_ptar=PTar not in kinds,
        targets_without_tnot=TNot not in kinds,
    )


# -- named sub-term table ----------------------------------------------------


@dataclass(frozen=True)
class Subterm:
    ident: str
    node: Target | Policy
    children: tuple[str, ...]

    @property
    def is_target(self) -> bool:
        return isinstance(self.node, TARGET_TYPES)


class SubtermTable:
    """Every sub-policy and sub-target of one policy, each under a stable name.

    A subterm written as a reference keeps the name of its definition;
    anonymous subterms are named ``<parent>.<position>`` (positions start at
    1, a ``Ptar`` has its target at 1 and its body at 2). Entries are kept in
    post-order, so children always precede their parents.
    """

    def __init__(self, root: str):
        self.root = root
        self.entries: dict[str, Subterm] = {}

    @classmethod
    def from_env(cls, env: PolicyEnv, name: str) -> "SubtermTable":
        if name not in env.policies:
            raise UnknownIdentifier(f"no policy named {name!r}")
        table = cls(name)
        resolver = _Resolver(env)

        def visit(raw, ident: str) -> str:
            if isinstance(raw, (TRef, PRef)):
                if raw.id not in table.entries:
                    visit(env.targets[raw.id] if isinstance(raw, TRef) else env.policies[raw.id], raw.id)
                return raw.id
            kids = tuple(visit(c, f"{ident}.{i}") for i, c in enumerate(children(raw), 1))
            node = resolver.node(raw)
            table.entries[ident] = Subterm(ident, node, kids)
            return ident

        visit(env.policies[name], name)
        return table

    @classmethod
    def from_policy(cls, policy: Policy, name: str = "p") -> "SubtermTable":
        env = PolicyEnv()
        env.define_policy(name, policy)
        return cls.from_env(env, name)

    def __getitem__(self, ident: str) -> Subterm:
        return self.entries[ident]

    def __contains__(self, ident: str) -> bool:
        return ident in self.entries

    def __iter__(self) -> Iterator[Subterm]:
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)
