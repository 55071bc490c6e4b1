"""Resistance certificates: text format, independent checking, readable proofs.

A certificate is a nested s-expression::

    (certificate
      (version "0.1.0")
      (policy p2)
      (digest 5f0e1d3a9b7c2e41)
      (proof
        (isResistant p2 ResWFWMWN
          (isWF p2 WFBruteForce)
          ...)))

The digest is 64-bit FNV-1a over the canonical rendering of the whole
document. :func:`check` re-derives every step from the policy definitions
with its own rule table; it relies on the evaluator and the normal-form
lattice but never on the proof search.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import __version__
from .evaluator import eval_lattice
from .lang import quote, render_document
from .model import (
    Decision,
    PAnd,
    PAtom,
    PDbd,
    PNot,
    PolicyEnv,
    PTar,
    Subterm,
    SubtermTable,
    TAnd,
    TAtom,
    TOpt,
    structural_flags,
)
from .normal_form import NormalFormContext
from .prooftree import Goal, Obligation, ProofTree, Rule

O = Obligation

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def document_digest(env: PolicyEnv) -> str:
    return format(fnv1a64(render_document(env).encode("utf-8")), "016x")


@dataclass(frozen=True)
class Certificate:
    policy_id: str
    document_digest: str
    proof: ProofTree
    tool_version: str = __version__

    @classmethod
    def issue(cls, env: PolicyEnv, policy_id: str, proof: ProofTree) -> "Certificate":
        return cls(policy_id, document_digest(env), proof)


class MalformedCertificate(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


# -- encoding ----------------------------------------------------------------


def _encode_node(node: ProofTree, depth: int, out: list[str]) -> None:
    head = f"{'  ' * depth}({node.goal.kind.value} {node.goal.ident} {node.rule.value}"
    if node.lattice is not None:
        head += f" (lattice {node.lattice})"
    if not node.premises:
        out.append(head + ")")
        return
    out.append(head)
    for p in node.premises:
        _encode_node(p, depth + 1, out)
    out[-1] += ")"


def encode(cert: Certificate) -> str:
    lines = [
        "(certificate",
        f"  (version {quote(cert.tool_version)})",
        f"  (policy {cert.policy_id})",
        f"  (digest {cert.document_digest})",
        "  (proof",
    ]
    _encode_node(cert.proof, 2, lines)
    lines[-1] += "))"
    return "\n".join(lines) + "\n"


# -- decoding ----------------------------------------------------------------

_SEXP_TOKEN = re.compile(r'\s+|(?P<open>\()|(?P<close>\))|(?P<string>"(?:[^"\\]|\\.)*")|(?P<atom>[^\s()"]+)')


@dataclass
class _Sexp:
    items: list
    line: int
    column: int


@dataclass
class _Atom:
    text: str
    line: int
    column: int
    quoted: bool = False


def _read_sexp(text: str) -> _Sexp:
    stack: list[_Sexp] = []
    top: _Sexp | None = None
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _SEXP_TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise MalformedCertificate(f"unexpected character {text[pos]!r}", line, col)
        if m.lastgroup == "open":
            node = _Sexp([], line, col)
            if stack:
                stack[-1].items.append(node)
            elif top is not None:
                raise MalformedCertificate("trailing data after the certificate", line, col)
            else:
                top = node
            stack.append(node)
        elif m.lastgroup == "close":
            if not stack:
                raise MalformedCertificate("unbalanced ')'", line, col)
            stack.pop()
        elif m.lastgroup in ("string", "atom"):
            if not stack:
                raise MalformedCertificate("data outside the certificate", line, col)
            quoted = m.lastgroup == "string"
            value = re.sub(r"\\(.)", r"\1", m.group()[1:-1]) if quoted else m.group()
            stack[-1].items.append(_Atom(value, line, col, quoted))
        chunk = m.group()
        if "\n" in chunk:
            line += chunk.count("\n")
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    if stack:
        raise MalformedCertificate("unbalanced '(' at end of input", stack[-1].line, stack[-1].column)
    if top is None:
        raise MalformedCertificate("empty certificate", line, pos - line_start + 1)
    return top


_OBLIGATIONS = {o.value: o for o in Obligation}
_RULES = {r.value: r for r in Rule}


def _atom(x, what: str, at) -> str:
    if not isinstance(x, _Atom) or x.quoted:
        line, col = (x.line, x.column) if x is not None else (at.line, at.column)
        raise MalformedCertificate(f"expected {what}", line, col)
    return x.text


def _decode_node(s) -> ProofTree:
    if not isinstance(s, _Sexp) or len(s.items) < 3:
        line, col = (s.line, s.column)
        raise MalformedCertificate("a proof node needs an obligation, a subterm name and a rule", line, col)
    kind_text = _atom(s.items[0], "an obligation name", s)
    if kind_text not in _OBLIGATIONS:
        raise MalformedCertificate(f"unknown obligation {kind_text!r}", s.items[0].line, s.items[0].column)
    ident = _atom(s.items[1], "a subterm name", s)
    rule_text = _atom(s.items[2], "a rule name", s)
    if rule_text not in _RULES:
        raise MalformedCertificate(f"unknown rule {rule_text!r}", s.items[2].line, s.items[2].column)
    rest = s.items[3:]
    lattice = None
    if rest and isinstance(rest[0], _Sexp) and rest[0].items and getattr(rest[0].items[0], "text", None) == "lattice":
        field = rest.pop(0)
        if len(field.items) != 2 or not re.fullmatch(r"[0-9]+", getattr(field.items[1], "text", "")):
            raise MalformedCertificate("expected (lattice N)", field.line, field.column)
        lattice = int(field.items[1].text)
    premises = tuple(_decode_node(c) for c in rest)
    return ProofTree(Goal(_OBLIGATIONS[kind_text], ident), _RULES[rule_text], premises, lattice)


def decode(text: str) -> Certificate:
    top = _read_sexp(text)
    if not top.items or getattr(top.items[0], "text", None) != "certificate":
        raise MalformedCertificate("expected (certificate ...)", top.line, top.column)
    fields: dict[str, _Sexp] = {}
    for item in top.items[1:]:
        if not isinstance(item, _Sexp) or not item.items or not isinstance(item.items[0], _Atom):
            raise MalformedCertificate("expected a (field value) entry", item.line, item.column)
        name = item.items[0].text
        if name in fields:
            raise MalformedCertificate(f"duplicate field {name!r}", item.line, item.column)
        if len(item.items) != 2:
            raise MalformedCertificate(f"field {name!r} takes exactly one value", item.line, item.column)
        fields[name] = item
    for required in ("version", "policy", "digest", "proof"):
        if required not in fields:
            raise MalformedCertificate(f"missing field {required!r}", top.line, top.column)
    unknown = set(fields) - {"version", "policy", "digest", "proof"}
    if unknown:
        f = fields[sorted(unknown)[0]]
        raise MalformedCertificate(f"unknown field {f.items[0].text!r}", f.line, f.column)
    version = fields["version"].items[1]
    if not isinstance(version, _Atom) or not version.quoted:
        raise MalformedCertificate("version must be a string", fields["version"].line, fields["version"].column)
    policy = _atom(fields["policy"].items[1], "a policy name", fields["policy"])
    digest = _atom(fields["digest"].items[1], "a 16-digit hex digest", fields["digest"])
    if not re.fullmatch(r"[0-9a-f]{16}", digest):
        raise MalformedCertificate("digest must be 16 lowercase hex digits", fields["digest"].line, fields["digest"].column)
    proof = _decode_node(fields["proof"].items[1])
    return Certificate(policy, digest, proof, version.text)


# -- checking ----------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    valid: bool
    reason: str = ""
    path: str = ""

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return "VALID"
        return f"INVALID: {self.reason}" + (f" (at {self.path})" if self.path else "")


@dataclass(frozen=True)
class _RuleSpec:
    concludes: Obligation
    shape: Callable[[object], bool]
    premises: Callable[[Subterm], list[tuple[Obligation, str]]]


def _is(*types):
    return lambda node: isinstance(node, types)


def _atom_of(decision):
    return lambda node: isinstance(node, PAtom) and node.decision is decision


def _flag(name):
    return lambda node: not isinstance(node, (TAtom, TOpt, TAnd)) and getattr(structural_flags(node), name)


_any_policy = _is(PAtom, PNot, PDbd, PAnd, PTar)


def _none(e):
    return []


def _same(*kinds):
    return lambda e: [(k, e.ident) for k in kinds]


def _child(kind, i):
    return lambda e: [(kind, e.children[i])]


def _both(kind_a, kind_b):
    return lambda e: [(kind_a, e.children[0]), (kind_b, e.children[1])]


_CHECK_RULES: dict[Rule, _RuleSpec] = {
    Rule.RES_WF_WM_WN: _RuleSpec(O.RESISTANT, _any_policy, _same(O.WELL_FORMED, O.WITHOUT_NOT, O.WM_POLICY)),
    Rule.RES_WF_WM_WD: _RuleSpec(O.RESISTANT, _any_policy, _same(O.WELL_FORMED, O.WITHOUT_DBD, O.WM_POLICY)),
    Rule.RES_CRA: _RuleSpec(O.RESISTANT, _any_policy, _same(O.CANNOT_ALLOW)),
    Rule.RES_NO_TARGET: _RuleSpec(O.RESISTANT, _any_policy, _same(O.NO_TARGET)),
    Rule.RES_PDBD: _RuleSpec(O.RESISTANT, _is(PDbd), _child(O.RESISTANT, 0)),
    Rule.RES_PAND: _RuleSpec(O.RESISTANT, _is(PAnd), _both(O.RESISTANT, O.RESISTANT)),
    Rule.RES_EXHAUSTIVE: _RuleSpec(O.RESISTANT, _any_policy, _none),
    Rule.WF_BRUTE_FORCE: _RuleSpec(O.WELL_FORMED, _flag("well_formed"), _none),
    Rule.WN_BRUTE_FORCE: _RuleSpec(O.WITHOUT_NOT, _flag("without_pnot"), _none),
    Rule.WD_BRUTE_FORCE: _RuleSpec(O.WITHOUT_DBD, _flag("without_pdbd"), _none),
    Rule.NO_TARGET_BRUTE_FORCE: _RuleSpec(O.NO_TARGET, _flag("without_ptar"), _none),
    Rule.WM_PATOM: _RuleSpec(O.WM_POLICY, _is(PAtom), _none),
    Rule.WM_PNOT: _RuleSpec(O.WM_POLICY, _is(PNot), _child(O.WM_POLICY, 0)),
    Rule.WM_PDBD: _RuleSpec(O.WM_POLICY, _is(PDbd), _child(O.WM_POLICY, 0)),
    Rule.WM_PAND: _RuleSpec(O.WM_POLICY, _is(PAnd), _both(O.WM_POLICY, O.WM_POLICY)),
    Rule.WM_PTAR: _RuleSpec(O.WM_POLICY, _is(PTar), _both(O.WM_TARGET, O.WM_POLICY)),
    Rule.WM_TATOM: _RuleSpec(O.WM_TARGET, _is(TAtom), _none),
    Rule.WM_TOPT: _RuleSpec(O.WM_TARGET, _is(TOpt), _child(O.WM_TARGET, 0)),
    Rule.WM_TAND: _RuleSpec(O.WM_TARGET, _is(TAnd), _both(O.WM_TARGET, O.WM_TARGET)),
    Rule.CRA_PATOM_ZERO: _RuleSpec(O.CANNOT_ALLOW, _atom_of(Decision.DENY), _none),
    Rule.CRA_PATOM_BOT: _RuleSpec(O.CANNOT_ALLOW, _atom_of(Decision.NOTAPP), _none),
    Rule.CRA_PTAR: _RuleSpec(O.CANNOT_ALLOW, _is(PTar), _child(O.CANNOT_ALLOW, 1)),
    Rule.CRA_PDBD: _RuleSpec(O.CANNOT_ALLOW, _is(PDbd), _child(O.CANNOT_ALLOW, 0)),
    Rule.CRA_PAND_L: _RuleSpec(O.CANNOT_ALLOW, _is(PAnd), _child(O.CANNOT_ALLOW, 0)),
    Rule.CRA_PAND_R: _RuleSpec(O.CANNOT_ALLOW, _is(PAnd), _child(O.CANNOT_ALLOW, 1)),
    Rule.CRA_PNOT: _RuleSpec(O.CANNOT_ALLOW, _is(PNot), _child(O.CANNOT_DENY, 0)),
    Rule.CRD_PATOM_ONE: _RuleSpec(O.CANNOT_DENY, _atom_of(Decision.ALLOW), _none),
    Rule.CRD_PATOM_BOT: _RuleSpec(O.CANNOT_DENY, _atom_of(Decision.NOTAPP), _none),
    Rule.CRD_PTAR: _RuleSpec(O.CANNOT_DENY, _is(PTar), _child(O.CANNOT_DENY, 1)),
    Rule.CRD_PNOT: _RuleSpec(O.CANNOT_DENY, _is(PNot), _child(O.CANNOT_ALLOW, 0)),
}


class _Invalid(Exception):
    def __init__(self, reason: str, path: str):
        super().__init__(reason)
        self.reason = reason
        self.path = path


def _lattice_is_clean(node) -> tuple[bool, int]:
    """Recheck that no one-pair removal in the normal-form lattice turns a refusal into {ALLOW}."""
    basis = NormalFormContext.of(node).basis
    k = len(basis)
    masks = np.arange(1 << k, dtype=np.int64)
    allowed = eval_lattice(node, basis, masks) == int(Decision.ALLOW)
    for bit in range(k):
        has = (masks >> bit) & 1 == 1
        if np.any(~allowed[has] & allowed[masks[has] ^ (1 << bit)]):
            return False, 1 << k
    return True, 1 << k


def _check_node(tree: ProofTree, table: SubtermTable, path: str, lattice_cap: int) -> None:
    ident = tree.goal.ident
    here = f"{path}/{tree.rule.value}({ident})" if path else f"{tree.rule.value}({ident})"
    sig = _CHECK_RULES.get(tree.rule)
    if sig is None:
        raise _Invalid(f"unknown rule {tree.rule.value}", here)
    if tree.goal.kind is not sig.concludes:
        raise _Invalid(f"{tree.rule.value} concludes {sig.concludes.value}, not {tree.goal.kind.value}", here)
    if ident not in table:
        raise _Invalid(f"no subterm named {ident!r}", here)
    entry = table[ident]
    if not sig.shape(entry.node):
        raise _Invalid(f"{tree.rule.value} does not apply to {ident}", here)
    expected = sig.premises(entry)
    if len(tree.premises) != len(expected):
        plural = "premise" if len(expected) == 1 else "premises"
        raise _Invalid(f"{tree.rule.value} expects {len(expected)} {plural}", here)
    for premise, (kind, sub) in zip(tree.premises, expected):
        if premise.goal != Goal(kind, sub):
            raise _Invalid(f"{tree.rule.value} needs {kind.value}({sub}), got {premise.goal}", here)
    if tree.rule is Rule.RES_EXHAUSTIVE:
        if tree.lattice is None:
            raise _Invalid("ResExhaustive must record its lattice size", here)
        k = len(NormalFormContext.of(entry.node).basis)
        if k > lattice_cap:
            raise _Invalid(f"lattice of 2^{k} requests exceeds the checking cap", here)
        clean, size = _lattice_is_clean(entry.node)
        if size != tree.lattice:
            raise _Invalid(f"lattice size is {size}, certificate records {tree.lattice}", here)
        if not clean:
            raise _Invalid(f"{ident} has a counter-example in its normal-form lattice", here)
    elif tree.lattice is not None:
        raise _Invalid(f"{tree.rule.value} takes no lattice size", here)
    for premise in tree.premises:
        _check_node(premise, table, here, lattice_cap)


def check(cert: Certificate, env: PolicyEnv, lattice_cap: int = 24) -> CheckResult:
    if document_digest(env) != cert.document_digest:
        return CheckResult(False, "digest mismatch")
    if cert.policy_id not in env.policies:
        return CheckResult(False, f"no policy named {cert.policy_id!r} in the document")
    root = Goal(O.RESISTANT, cert.policy_id)
    if cert.proof.goal != root:
        return CheckResult(False, f"proof concludes {cert.proof.goal}, expected {root}")
    table = SubtermTable.from_env(env, cert.policy_id)
    try:
        _check_node(cert.proof, table, "", lattice_cap)
    except _Invalid as e:
        return CheckResult(False, e.reason, e.path)
    return CheckResult(True)


# -- human-readable proofs ---------------------------------------------------

_PROSE: dict[Rule, str] = {
    Rule.RES_WF_WM_WN: "{x} is resistant, since it is well-formed, weakly-monotonic and without-not",
    Rule.RES_WF_WM_WD: "{x} is resistant, since it is well-formed, weakly-monotonic and without-dbd",
    Rule.RES_CRA: "{x} is resistant, since it cannot return allow",
    Rule.RES_NO_TARGET: "{x} is resistant, since it has no target and so evaluates identically for any request",
    Rule.RES_PDBD: "{x} is resistant, since it is the deny-by-default of the resistant policy {a}",
    Rule.RES_PAND: "{x} is resistant, since it is the conjunction of the resistant policies {a} and {b}",
    Rule.RES_EXHAUSTIVE: "{x} is resistant, as checked on all {n} requests in normal form",
    Rule.WF_BRUTE_FORCE: "{x} is well-formed, which is checked by brute-force",
    Rule.WN_BRUTE_FORCE: "{x} is without the Pnot operator, which is checked by brute-force",
    Rule.WD_BRUTE_FORCE: "{x} is without the Pdbd operator, which is checked by brute-force",
    Rule.NO_TARGET_BRUTE_FORCE: "{x} has no target, which is checked by brute-force",
    Rule.WM_PATOM: "{x} is weakly-monotonic, since it is atomic",
    Rule.WM_PNOT: "{x} is weakly-monotonic, since it is the negation of the weakly-monotonic policy {a}",
    Rule.WM_PDBD: "{x} is weakly-monotonic, since it is the deny-by-default of the weakly-monotonic policy {a}",
    Rule.WM_PAND: "{x} is weakly-monotonic, since it is the conjunction of the weakly-monotonic policies {a} and {b}",
    Rule.WM_PTAR: (
        "{x} is weakly-monotonic, since it is the composition of the weakly-monotonic target {a}"
        " and of the weakly-monotonic policy {b}"
    ),
    Rule.WM_TATOM: "{x} is weakly-monotonic, since it is atomic",
    Rule.WM_TOPT: "{x} is weakly-monotonic, since it is the optional form of the weakly-monotonic target {a}",
    Rule.WM_TAND: "{x} is weakly-monotonic, since it is the conjunction of the weakly-monotonic targets {a} and {b}",
    Rule.CRA_PATOM_ZERO: "{x} cannot return allow, since it is the atomic deny policy",
    Rule.CRA_PATOM_BOT: "{x} cannot return allow, since it is the atomic not-applicable policy",
    Rule.CRA_PTAR: "{x} cannot return allow, since its body {a} cannot return allow",
    Rule.CRA_PDBD: "{x} cannot return allow, since it is the deny-by-default of {a}, which cannot return allow",
    Rule.CRA_PAND_L: "{x} cannot return allow, since its left operand {a} cannot return allow",
    Rule.CRA_PAND_R: "{x} cannot return allow, since its right operand {a} cannot return allow",
    Rule.CRA_PNOT: "{x} cannot return allow, since it is the negation of {a}, which cannot return deny",
    Rule.CRD_PATOM_ONE: "{x} cannot return deny, since it is the atomic allow policy",
    Rule.CRD_PATOM_BOT: "{x} cannot return deny, since it is the atomic not-applicable policy",
    Rule.CRD_PTAR: "{x} cannot return deny, since its body {a} cannot return deny",
    Rule.CRD_PNOT: "{x} cannot return deny, since it is the negation of {a}, which cannot return allow",
}


def _render_node(tree: ProofTree, depth: int, out: list[str]) -> None:
    ids = [p.goal.ident for p in tree.premises] + ["", ""]
    line = _PROSE[tree.rule].format(x=tree.goal.ident, a=ids[0], b=ids[1], n=tree.lattice)
    out.append("  " * depth + line)
    if tree.rule is Rule.RES_NO_TARGET:
        # the brute-force scan is already stated on this line
        return
    for p in tree.premises:
        _render_node(p, depth + 1, out)


def render_human(cert: Certificate, env: PolicyEnv | None = None) -> str:
    out: list[str] = []
    _render_node(cert.proof, 0, out)
    return "\n".join(out) + "\n"
