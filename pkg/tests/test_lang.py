import pytest
from hypothesis import given

from conftest import RUNNING_EXAMPLE
from strategies import policies, requests
from ptacl.lang import (
    ErrorKind,
    SourceError,
    parse_document,
    parse_policy,
    parse_request,
    render_document,
    render_policy,
    render_request,
)
from ptacl.model import ALLOW, DENY, NOTAPP, PolicyEnv, PDbd, PNot, PTar, Request, TAtom, TOpt


def test_running_example_parses(env):
    assert list(env.targets) == ["t1", "t2"]
    assert list(env.policies) == ["p1", "p2"]
    assert env.resolve("p2") == PDbd(PTar(TAtom("nat", "FR"), ALLOW))
    assert env.resolve("p1") == PNot(PDbd(PNot(PTar(TAtom("nat", "AT"), DENY))))


def test_canonical_round_trip(env):
    text = render_document(env)
    assert text == RUNNING_EXAMPLE
    assert render_document(parse_document(text)) == text


def test_definitions_may_span_lines_and_carry_comments():
    env = parse_document('# header\nt :: (Topt\n  (Tatom "a" "1"))  # trailing\np :\n  Ptar t\n  (Patom Bot)\n')
    assert env.resolve("p") == PTar(TOpt(TAtom("a", "1")), NOTAPP)


def test_string_escapes():
    env = parse_document(r't :: (Tatom "na\"me" "v\\1")' + "\np : Ptar t (Patom One)\n")
    assert env.resolve_target("t") == TAtom('na"me', "v\\1")
    assert parse_document(render_document(env)).resolve("p") == env.resolve("p")


@pytest.mark.parametrize(
    "text,kind,line,col",
    [
        ("p : Patom Maybe", ErrorKind.SYNTAX, 1, 11),
        ("p : Pand (Patom One)", ErrorKind.SYNTAX, 1, 21),
        ("p : Pand p (Patom One)", ErrorKind.CYCLIC_DEFINITION, 1, 10),
        ("p : Pnot q", ErrorKind.UNKNOWN_IDENTIFIER, 1, 10),
        ("t :: (Tatom \"a\" \"1\")\np : Pnot t", ErrorKind.UNKNOWN_IDENTIFIER, 2, 10),
        ("p : Patom One\np : Patom Zero", ErrorKind.DUPLICATE_DEFINITION, 2, 1),
        ("p : Patom One\np :: (Tatom \"a\" \"1\")", ErrorKind.DUPLICATE_DEFINITION, 2, 1),
        ("p : Patom One $", ErrorKind.LEXICAL, 1, 15),
        ('t :: (Tatom "a', ErrorKind.LEXICAL, 1, 13),
        ("Pnot : Patom One", ErrorKind.SYNTAX, 1, 1),
        ("p = Patom One", ErrorKind.LEXICAL, 1, 3),
    ],
)
def test_errors_carry_kind_and_position(text, kind, line, col):
    with pytest.raises(SourceError) as info:
        parse_document(text)
    assert (info.value.kind, info.value.line, info.value.column) == (kind, line, col)
    assert str(info.value).startswith(f"{line}:{col}: {kind.value}")


def test_forward_reference_is_unknown():
    with pytest.raises(SourceError) as info:
        parse_document("p : Pnot q\nq : Patom One")
    assert info.value.kind is ErrorKind.UNKNOWN_IDENTIFIER


def test_requests():
    assert parse_request("{}") == Request()
    q = parse_request('{("nat", "FR"), ("nat","AT")}')
    assert q == Request.of(("nat", "FR"), ("nat", "AT"))
    assert render_request(q) == '{("nat","AT"), ("nat","FR")}'
    with pytest.raises(SourceError):
        parse_request('{("nat")}')


def test_parse_policy_against_env(env):
    assert parse_policy("Pand p1 (Patom Zero)", env) == parse_policy(
        'Pand (Pnot (Pdbd (Pnot (Ptar (Tatom "nat" "AT") (Patom Zero))))) (Patom Zero)'
    )


@given(policies())
def test_policy_render_round_trip(p):
    env = PolicyEnv()
    env.define_policy("p", p)
    assert parse_document(render_document(env)).resolve("p") == p
    assert parse_policy(render_policy(p)) == p


@given(requests)
def test_request_render_round_trip(q):
    assert parse_request(render_request(q)) == q
