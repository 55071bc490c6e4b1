"""Reading and writing policy documents and request literals.

A document is a sequence of definitions::

    # comments run to the end of the line
    t1 :: (Tatom "nat" "AT")
    p1 : Pnot (Pdbd (Pnot (Ptar t1 (Patom Zero))))

``::`` defines a target, ``:`` a policy. Compound operands are always
parenthesized and a bare identifier refers to an earlier definition, so
definitions may span lines freely. Requests are written as
``{("nat", "FR"), ("nat", "AT")}``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .model import (
    Decision,
    DecisionSet,
    PAnd,
    PAtom,
    PDbd,
    PNot,
    Policy,
    PolicyEnv,
    PRef,
    PTar,
    Request,
    TAnd,
    TAtom,
    Target,
    TNot,
    TOpt,
    TRef,
)


class ErrorKind(enum.Enum):
    LEXICAL = "lexical error"
    SYNTAX = "syntax error"
    UNKNOWN_IDENTIFIER = "unknown identifier"
    DUPLICATE_DEFINITION = "duplicate definition"
    CYCLIC_DEFINITION = "cyclic definition"


class SourceError(Exception):
    def __init__(self, kind: ErrorKind, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {kind.value}: {message}")
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message


_DECISION_WORDS = {"One": Decision.ALLOW, "Zero": Decision.DENY, "Bot": Decision.NOTAPP}
_DECISION_NAMES = {d: w for w, d in _DECISION_WORDS.items()}
_TARGET_WORDS = {"Tatom", "Tnot", "Topt", "Tand"}
_POLICY_WORDS = {"Patom", "Pnot", "Pdbd", "Pand", "Ptar"}
KEYWORDS = _TARGET_WORDS | _POLICY_WORDS | set(_DECISION_WORDS)

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\["\\])*")
  | (?P<dcolon>::)
  | (?P<punct>[:(){},])
  | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str  # "string", "word", a punctuation symbol, or "eof"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            if text[pos] == '"':
                raise SourceError(ErrorKind.LEXICAL, line, col, "unterminated or malformed string literal")
            raise SourceError(ErrorKind.LEXICAL, line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        chunk = m.group()
        if kind == "string":
            value = re.sub(r"\\(.)", r"\1", chunk[1:-1])
            tokens.append(_Token("string", value, line, col))
        elif kind == "word":
            tokens.append(_Token("word", chunk, line, col))
        elif kind in ("dcolon", "punct"):
            tokens.append(_Token(chunk, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0
        self.refs: list[tuple[TRef | PRef, _Token]] = []

    @property
    def tok(self) -> _Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: _Token | None = None, kind=ErrorKind.SYNTAX) -> SourceError:
        tok = tok or self.tok
        return SourceError(kind, tok.line, tok.column, message)

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        if self.tok.kind != kind:
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            raise self.error(f"expected {what}, found {found}")
        return self.advance()

    def ident(self, what: str) -> _Token:
        tok = self.expect("word", what)
        if tok.text in KEYWORDS:
            raise self.error(f"expected {what}, found keyword {tok.text!r}", tok)
        return tok

    # targets

    def t_operand(self) -> Target:
        if self.tok.kind == "(":
            self.advance()
            t = self.t_expr()
            self.expect(")", "')'")
            return t
        if self.tok.kind == "word" and self.tok.text not in KEYWORDS:
            tok = self.advance()
            ref = TRef(tok.text)
            self.refs.append((ref, tok))
            return ref
        raise self.error("expected a target name or a parenthesized target")

    def t_expr(self) -> Target:
        tok = self.expect("word", "a target constructor")
        if tok.text == "Tatom":
            name = self.expect("string", "an attribute name string").text
            value = self.expect("string", "an attribute value string").text
            return TAtom(name, value)
        if tok.text == "Tnot":
            return TNot(self.t_operand())
        if tok.text == "Topt":
            return TOpt(self.t_operand())
        if tok.text == "Tand":
            return TAnd(self.t_operand(), self.t_operand())
        raise self.error(f"expected Tatom, Tnot, Topt or Tand, found {tok.text!r}", tok)

    # policies

    def p_operand(self) -> Policy:
        if self.tok.kind == "(":
            self.advance()
            p = self.p_expr()
            self.expect(")", "')'")
            return p
        if self.tok.kind == "word" and self.tok.text not in KEYWORDS:
            tok = self.advance()
            ref = PRef(tok.text)
            self.refs.append((ref, tok))
            return ref
        raise self.error("expected a policy name or a parenthesized policy")

    def p_expr(self) -> Policy:
        tok = self.expect("word", "a policy constructor")
        if tok.text == "Patom":
            dec = self.expect("word", "One, Zero or Bot")
            if dec.text not in _DECISION_WORDS:
                raise self.error(f"expected One, Zero or Bot, found {dec.text!r}", dec)
            return PAtom(_DECISION_WORDS[dec.text])
        if tok.text == "Pnot":
            return PNot(self.p_operand())
        if tok.text == "Pdbd":
            return PDbd(self.p_operand())
        if tok.text == "Pand":
            return PAnd(self.p_operand(), self.p_operand())
        if tok.text == "Ptar":
            return PTar(self.t_operand(), self.p_operand())
        raise self.error(f"expected Patom, Pnot, Pdbd, Pand or Ptar, found {tok.text!r}", tok)

    # documents

    def document(self) -> PolicyEnv:
        env = PolicyEnv()
        while self.tok.kind != "eof":
            name_tok = self.ident("a definition name")
            if self.tok.kind == "::":
                self.advance()
                self.refs = []
                node = self.t_operand()
                is_target = True
            elif self.tok.kind == ":":
                self.advance()
                self.refs = []
                node = self.p_expr()
                is_target = False
            else:
                raise self.error("expected '::' (target) or ':' (policy) after the definition name")
            self.check_refs(env, name_tok.text)
            if name_tok.text in env.targets or name_tok.text in env.policies:
                raise self.error(f"{name_tok.text!r} is already defined", name_tok, ErrorKind.DUPLICATE_DEFINITION)
            if is_target:
                env.define_target(name_tok.text, node)
            else:
                env.define_policy(name_tok.text, node)
        return env

    def check_refs(self, env: PolicyEnv, defining: str) -> None:
        for ref, tok in self.refs:
            wanted, other, kind = (
                (env.targets, env.policies, "target") if isinstance(ref, TRef) else (env.policies, env.targets, "policy")
            )
            if ref.id in wanted:
                continue
            if ref.id == defining:
                raise self.error(f"{ref.id!r} refers to itself", tok, ErrorKind.CYCLIC_DEFINITION)
            if ref.id in other:
                raise self.error(f"{ref.id!r} is not a {kind}", tok, ErrorKind.UNKNOWN_IDENTIFIER)
            raise self.error(
                f"unknown {kind} {ref.id!r} (definitions must precede their use)", tok, ErrorKind.UNKNOWN_IDENTIFIER
            )

    def request(self) -> Request:
        self.expect("{", "'{'")
        pairs = []
        if self.tok.kind != "}":
            while True:
                self.expect("(", "'('")
                name = self.expect("string", "an attribute name string").text
                self.expect(",", "','")
                value = self.expect("string", "an attribute value string").text
                self.expect(")", "')'")
                pairs.append((name, value))
                if self.tok.kind != ",":
                    break
                self.advance()
        self.expect("}", "'}'")
        self.expect("eof", "end of request")
        return Request(frozenset(pairs))


def parse_document(text: str) -> PolicyEnv:
    return _Parser(text).document()


def parse_request(text: str) -> Request:
    return _Parser(text).request()


def parse_policy(text: str, env: PolicyEnv | None = None) -> Policy:
    """Parse a single policy expression, resolving names against ``env``."""
    parser = _Parser(text)
    parser.refs = []
    p = parser.p_expr()
    parser.expect("eof", "end of policy")
    env = env or PolicyEnv()
    parser.check_refs(env, "")
    return env.inline(p)


# -- rendering ---------------------------------------------------------------


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _t_operand(t: Target) -> str:
    return t.id if isinstance(t, TRef) else f"({render_target(t)})"


def _p_operand(p: Policy) -> str:
    return p.id if isinstance(p, PRef) else f"({render_policy(p)})"


def render_target(t: Target) -> str:
    if isinstance(t, TAtom):
        return f"Tatom {quote(t.name)} {quote(t.value)}"
    if isinstance(t, TNot):
        return f"Tnot {_t_operand(t.target)}"
    if isinstance(t, TOpt):
        return f"Topt {_t_operand(t.target)}"
    if isinstance(t, TAnd):
        return f"Tand {_t_operand(t.left)} {_t_operand(t.right)}"
    if isinstance(t, TRef):
        return t.id
    raise TypeError(f"not a target: {t!r}")


def render_policy(p: Policy) -> str:
    if isinstance(p, PAtom):
        return f"Patom {_DECISION_NAMES[p.decision]}"
    if isinstance(p, PNot):
        return f"Pnot {_p_operand(p.policy)}"
    if isinstance(p, PDbd):
        return f"Pdbd {_p_operand(p.policy)}"
    if isinstance(p, PAnd):
        return f"Pand {_p_operand(p.left)} {_p_operand(p.right)}"
    if isinstance(p, PTar):
        return f"Ptar {_t_operand(p.target)} {_p_operand(p.policy)}"
    if isinstance(p, PRef):
        return p.id
    raise TypeError(f"not a policy: {p!r}")


def render_document(env: PolicyEnv) -> str:
    """Canonical text of an environment: one definition per line, in order."""
    lines = []
    for name, node in env.definitions():
        if env.is_target(name):
            lines.append(f"{name} :: {_t_operand(node)}")
        else:
            lines.append(f"{name} : {render_policy(node)}")
    return "".join(line + "\n" for line in lines)


def render_decisions(d: DecisionSet) -> str:
    return str(d)


def render_request(q: Request) -> str:
    return "{" + ", ".join(f"({quote(n)},{quote(v)})" for n, v in q) + "}"
