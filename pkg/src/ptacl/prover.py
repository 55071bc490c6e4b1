"""Structural proof search for resistance.

Saturation over the subterm table: obligations are discharged bottom-up,
each by the first applicable rule in a fixed priority order, until nothing
changes. Only rules that follow from the policy's syntax are used, unless
``allow_exhaustive`` lets a remaining resistance goal be closed by a clean
normal-form search.
"""

from __future__ import annotations

from typing import Callable

from .model import (
    Decision,
    PAnd,
    PAtom,
    PDbd,
    PNot,
    Policy,
    PolicyEnv,
    PTar,
    Subterm,
    SubtermTable,
    TAnd,
    TAtom,
    TOpt,
    structural_flags,
)
from .normal_form import DEFAULT_LATTICE_CAP
from .prooftree import Goal, Obligation, ProofTree, Rule
from .resistance import search

O = Obligation

_POLICY_GOALS = (
    O.WELL_FORMED,
    O.WITHOUT_NOT,
    O.WITHOUT_DBD,
    O.NO_TARGET,
    O.WM_POLICY,
    O.CANNOT_ALLOW,
    O.CANNOT_DENY,
    O.RESISTANT,
)


class Prover:
    def __init__(self, table: SubtermTable):
        self.table = table
        self.proofs: dict[Goal, ProofTree] = {}
        self.rounds = 0
        self._rules: dict[Obligation, Callable[[Subterm], ProofTree | None]] = {
            O.WELL_FORMED: self._well_formed,
            O.WITHOUT_NOT: self._without_not,
            O.WITHOUT_DBD: self._without_dbd,
            O.NO_TARGET: self._no_target,
            O.WM_POLICY: self._wm_policy,
            O.WM_TARGET: self._wm_target,
            O.CANNOT_ALLOW: self._cannot_allow,
            O.CANNOT_DENY: self._cannot_deny,
            O.RESISTANT: self._resistant,
        }

    def proof(self, kind: Obligation, ident: str) -> ProofTree | None:
        return self.proofs.get(Goal(kind, ident))

    def saturate(self) -> None:
        changed = True
        while changed:
            changed = False
            self.rounds += 1
            for entry in self.table:
                for kind in (O.WM_TARGET,) if entry.is_target else _POLICY_GOALS:
                    goal = Goal(kind, entry.ident)
                    if goal in self.proofs:
                        continue
                    tree = self._rules[kind](entry)
                    if tree is not None:
                        self.proofs[goal] = tree
                        changed = True

    def _from(self, entry: Subterm, kind: Obligation, rule: Rule, *needs: tuple[Obligation, str]) -> ProofTree | None:
        premises = []
        for need_kind, ident in needs:
            sub = self.proof(need_kind, ident)
            if sub is None:
                return None
            premises.append(sub)
        return ProofTree(Goal(kind, entry.ident), rule, tuple(premises))

    # syntactic scans

    def _well_formed(self, e: Subterm):
        return self._from(e, O.WELL_FORMED, Rule.WF_BRUTE_FORCE) if structural_flags(e.node).well_formed else None

    def _without_not(self, e: Subterm):
        return self._from(e, O.WITHOUT_NOT, Rule.WN_BRUTE_FORCE) if structural_flags(e.node).without_pnot else None

    def _without_dbd(self, e: Subterm):
        return self._from(e, O.WITHOUT_DBD, Rule.WD_BRUTE_FORCE) if structural_flags(e.node).without_pdbd else None

    def _no_target(self, e: Subterm):
        if structural_flags(e.node).without_ptar:
            return self._from(e, O.NO_TARGET, Rule.NO_TARGET_BRUTE_FORCE)
        return None

    # weak monotonicity

    def _wm_target(self, e: Subterm):
        t, k = e.node, O.WM_TARGET
        if isinstance(t, TAtom):
            return self._from(e, k, Rule.WM_TATOM)
        if isinstance(t, TOpt):
            return self._from(e, k, Rule.WM_TOPT, (k, e.children[0]))
        if isinstance(t, TAnd):
            return self._from(e, k, Rule.WM_TAND, (k, e.children[0]), (k, e.children[1]))
        return None

    def _wm_policy(self, e: Subterm):
        p, k = e.node, O.WM_POLICY
        if isinstance(p, PAtom):
            return self._from(e, k, Rule.WM_PATOM)
        if isinstance(p, PNot):
            return self._from(e, k, Rule.WM_PNOT, (k, e.children[0]))
        if isinstance(p, PDbd):
            return self._from(e, k, Rule.WM_PDBD, (k, e.children[0]))
        if isinstance(p, PAnd):
            return self._from(e, k, Rule.WM_PAND, (k, e.children[0]), (k, e.children[1]))
        if isinstance(p, PTar):
            return self._from(e, k, Rule.WM_PTAR, (O.WM_TARGET, e.children[0]), (k, e.children[1]))
        return None

    # cannot-return facts

    def _cannot_allow(self, e: Subterm):
        p, k = e.node, O.CANNOT_ALLOW
        if isinstance(p, PAtom):
            if p.decision is Decision.DENY:
                return self._from(e, k, Rule.CRA_PATOM_ZERO)
            if p.decision is Decision.NOTAPP:
                return self._from(e, k, Rule.CRA_PATOM_BOT)
            return None
        if isinstance(p, PTar):
            return self._from(e, k, Rule.CRA_PTAR, (k, e.children[1]))
        if isinstance(p, PDbd):
            return self._from(e, k, Rule.CRA_PDBD, (k, e.children[0]))
        if isinstance(p, PAnd):
            return self._from(e, k, Rule.CRA_PAND_L, (k, e.children[0])) or self._from(
                e, k, Rule.CRA_PAND_R, (k, e.children[1])
            )
        if isinstance(p, PNot):
            return self._from(e, k, Rule.CRA_PNOT, (O.CANNOT_DENY, e.children[0]))
        return None

    def _cannot_deny(self, e: Subterm):
        p, k = e.node, O.CANNOT_DENY
        if isinstance(p, PAtom):
            if p.decision is Decision.ALLOW:
                return self._from(e, k, Rule.CRD_PATOM_ONE)
            if p.decision is Decision.NOTAPP:
                return self._from(e, k, Rule.CRD_PATOM_BOT)
            return None
        if isinstance(p, PTar):
            return self._from(e, k, Rule.CRD_PTAR, (k, e.children[1]))
        if isinstance(p, PNot):
            return self._from(e, k, Rule.CRD_PNOT, (O.CANNOT_ALLOW, e.children[0]))
        return None

    # resistance

    def _resistant(self, e: Subterm):
        k, i = O.RESISTANT, e.ident
        tree = (
            self._from(e, k, Rule.RES_NO_TARGET, (O.NO_TARGET, i))
            or self._from(e, k, Rule.RES_CRA, (O.CANNOT_ALLOW, i))
            or self._from(e, k, Rule.RES_WF_WM_WN, (O.WELL_FORMED, i), (O.WITHOUT_NOT, i), (O.WM_POLICY, i))
            or self._from(e, k, Rule.RES_WF_WM_WD, (O.WELL_FORMED, i), (O.WITHOUT_DBD, i), (O.WM_POLICY, i))
        )
        if tree is None and isinstance(e.node, PDbd):
            tree = self._from(e, k, Rule.RES_PDBD, (k, e.children[0]))
        if tree is None and isinstance(e.node, PAnd):
            tree = self._from(e, k, Rule.RES_PAND, (k, e.children[0]), (k, e.children[1]))
        return tree

    def close_exhaustively(self, ident: str, cap: int, _failed: set[str] | None = None) -> ProofTree | None:
        """Discharge a resistance goal, falling back to a normal-form search where structure fails."""
        failed = set() if _failed is None else _failed
        goal = Goal(O.RESISTANT, ident)
        if goal in self.proofs:
            return self.proofs[goal]
        if ident in failed:
            return None
        e = self.table[ident]
        tree = None
        if isinstance(e.node, PDbd):
            sub = self.close_exhaustively(e.children[0], cap, failed)
            if sub is not None:
                tree = ProofTree(goal, Rule.RES_PDBD, (sub,))
        elif isinstance(e.node, PAnd):
            left = self.close_exhaustively(e.children[0], cap, failed)
            right = self.close_exhaustively(e.children[1], cap, failed) if left is not None else None
            if left is not None and right is not None:
                tree = ProofTree(goal, Rule.RES_PAND, (left, right))
        if tree is None:
            report = search(e.node, limit=1, cap=cap)
            if not report.hits:
                tree = ProofTree(goal, Rule.RES_EXHAUSTIVE, lattice=report.lattice_size)
        if tree is None:
            failed.add(ident)
        else:
            self.proofs[goal] = tree
        return tree


def prove_table(
    table: SubtermTable, allow_exhaustive: bool = False, cap: int = DEFAULT_LATTICE_CAP
) -> ProofTree | None:
    prover = Prover(table)
    prover.saturate()
    tree = prover.proof(O.RESISTANT, table.root)
    if tree is None and allow_exhaustive:
        tree = prover.close_exhaustively(table.root, cap)
    return tree


def prove_resistant(
    p: Policy, allow_exhaustive: bool = False, cap: int = DEFAULT_LATTICE_CAP, name: str = "p"
) -> ProofTree | None:
    return prove_table(SubtermTable.from_policy(p, name), allow_exhaustive, cap)


def prove_in_env(
    env: PolicyEnv, name: str, allow_exhaustive: bool = False, cap: int = DEFAULT_LATTICE_CAP
) -> ProofTree | None:
    return prove_table(SubtermTable.from_env(env, name), allow_exhaustive, cap)


def _node_proof(p: Policy, kind: Obligation) -> ProofTree | None:
    prover = Prover(SubtermTable.from_policy(p))
    prover.saturate()
    return prover.proof(kind, prover.table.root)


def prove_weak_monotonic(p: Policy) -> ProofTree | None:
    return _node_proof(p, O.WM_POLICY)


def derive_cannot_return(p: Policy) -> tuple[ProofTree | None, ProofTree | None]:
    prover = Prover(SubtermTable.from_policy(p))
    prover.saturate()
    root = prover.table.root
    return prover.proof(O.CANNOT_ALLOW, root), prover.proof(O.CANNOT_DENY, root)
