"""Proof obligations, rule names and proof trees.

Obligations name a subterm by its identifier in a
:class:`~ptacl.model.SubtermTable`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator


class Obligation(enum.Enum):
    RESISTANT = "isResistant"
    WELL_FORMED = "isWF"
    WITHOUT_NOT = "isWN"
    WITHOUT_DBD = "isWD"
    NO_TARGET = "isNoTarget"
    WM_POLICY = "isWM"
    WM_TARGET = "isWMT"
    CANNOT_ALLOW = "isCRA"
    CANNOT_DENY = "isCRD"


class Rule(enum.Enum):
    RES_WF_WM_WN = "ResWFWMWN"
    RES_WF_WM_WD = "ResWFWMWD"
    RES_CRA = "ResCRA"
    RES_NO_TARGET = "ResNoTarget"
    RES_PDBD = "ResPdbd"
    RES_PAND = "ResPand"
    RES_EXHAUSTIVE = "ResExhaustive"
    WF_BRUTE_FORCE = "WFBruteForce"
    WN_BRUTE_FORCE = "WNBruteForce"
    WD_BRUTE_FORCE = "WDBruteForce"
    NO_TARGET_BRUTE_FORCE = "NoTargetBruteForce"
    WM_PATOM = "WMPAtom"
    WM_PNOT = "WMPnot"
    WM_PDBD = "WMPdbd"
    WM_PAND = "WMPand"
    WM_PTAR = "WMPtar"
    WM_TATOM = "WMTAtom"
    WM_TOPT = "WMTOpt"
    WM_TAND = "WMTAnd"
    CRA_PATOM_ZERO = "CRA-PatomZero"
    CRA_PATOM_BOT = "CRA-PatomBot"
    CRA_PTAR = "CRA-Ptar"
    CRA_PDBD = "CRA-Pdbd"
    CRA_PAND_L = "CRA-PandL"
    CRA_PAND_R = "CRA-PandR"
    CRA_PNOT = "CRA-PnotOfCRD"
    CRD_PATOM_ONE = "CRD-PatomOne"
    CRD_PATOM_BOT = "CRD-PatomBot"
    CRD_PTAR = "CRD-Ptar"
    CRD_PNOT = "CRD-PnotOfCRA"


@dataclass(frozen=True)
class Goal:
    kind: Obligation
    ident: str

    def __str__(self) -> str:
        return f"{self.kind.value}({self.ident})"


@dataclass(frozen=True)
class ProofTree:
    goal: Goal
    rule: Rule
    premises: tuple["ProofTree", ...] = ()
    lattice: int | None = None  # only for ResExhaustive: requests checked

    def walk(self) -> Iterator["ProofTree"]:
        yield self
        for p in self.premises:
            yield from p.walk()

    @property
    def structural(self) -> bool:
        """True when no step relies on an exhaustive lattice check."""
        return all(node.rule is not Rule.RES_EXHAUSTIVE for node in self.walk())

    def __len__(self) -> int:
        return sum(1 for _ in self.walk())
