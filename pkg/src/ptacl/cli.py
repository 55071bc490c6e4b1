"""The ``ptacl`` command.

Exit codes: 0 when the property holds, 1 when it fails, 2 for usage or input
errors, 3 when the normal-form lattice exceeds ``--max-lattice``.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .certificate import Certificate, MalformedCertificate, check, decode, encode, render_human
from .evaluator import eval_policy
from .gen import GenParams, generate, render_csv, render_family, run_bench
from .lang import SourceError, parse_document, parse_request, render_decisions, render_request
from .model import PolicyEnv, PolicyError
from .normal_form import DEFAULT_LATTICE_CAP, SearchSpaceTooLarge
from .prover import prove_in_env
from .resistance import search

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class _UsageError(Exception):
    pass


def _load(path: str) -> PolicyEnv:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_document(text)
    except SourceError as e:
        raise _UsageError(f"{path}:{e}") from None


def _policy(env: PolicyEnv, name: str):
    if name not in env.policies:
        raise _UsageError(f"no policy named {name!r}")
    return env.resolve(name)


def cmd_eval(args) -> int:
    env = _load(args.file)
    p = _policy(env, args.policy)
    try:
        q = parse_request(args.request)
    except SourceError as e:
        raise _UsageError(f"request: {e}") from None
    print(render_decisions(eval_policy(p, q)))
    return EXIT_OK


def cmd_check(args) -> int:
    p = _policy(_load(args.file), args.policy)
    report = search(p, limit=1 if args.first else None, cap=args.max_lattice, jobs=args.jobs)
    if not report.hits:
        print(f"RESISTANT ({report.lattice_size} requests checked)")
        return EXIT_OK
    for n, ce in enumerate(report.counterexamples(), start=1):
        print(f"Counter-example #{n}")
        print(f"  {render_request(ce.smaller)} -> {render_decisions(ce.eval_smaller)}")
        print(f"  {render_request(ce.larger)} -> {render_decisions(ce.eval_larger)}")
    return EXIT_FAIL


def cmd_prove(args) -> int:
    env = _load(args.file)
    _policy(env, args.policy)
    tree = prove_in_env(env, args.policy, args.allow_exhaustive, args.max_lattice)
    if tree is None:
        print("NO STRUCTURAL PROOF FOUND" if not args.allow_exhaustive else "NO PROOF FOUND")
        return EXIT_FAIL
    cert = Certificate.issue(env, args.policy, tree)
    out = Path(args.out or f"{args.policy}.cert")
    out.write_text(encode(cert), encoding="utf-8")
    sys.stdout.write(render_human(cert, env))
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        text = Path(args.cert).read_text(encoding="utf-8")
    except OSError as e:
        raise _UsageError(f"cannot read {args.cert}: {e.strerror}") from None
    try:
        cert = decode(text)
    except MalformedCertificate as e:
        raise _UsageError(f"{args.cert}:{e}") from None
    result = check(cert, _load(args.file), args.max_lattice)
    print(result)
    return EXIT_OK if result.valid else EXIT_FAIL


def _params(args) -> GenParams:
    try:
        return GenParams(args.height, args.width, args.attrs, args.vals, args.count, args.seed)
    except ValueError as e:
        raise _UsageError(str(e)) from None


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_gen(args) -> int:
    params = _params(args)
    _emit(render_family(params, generate(params)), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    params = _params(args)
    records, summary = run_bench(params, args.allow_exhaustive, args.jobs, not args.no_timing, args.max_lattice)
    _emit(render_csv(records, summary), args.csv)
    if args.csv not in (None, "-"):
        print(summary.comment())
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ptacl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def lattice_flag(p):
        p.add_argument("--max-lattice", type=_positive, default=DEFAULT_LATTICE_CAP, metavar="N",
                       help="refuse lattices with more than 2^N requests (default %(default)s)")

    p = sub.add_parser("eval", help="evaluate a policy on a request")
    p.add_argument("file")
    p.add_argument("policy")
    p.add_argument("request", help='e.g. \'{("nat","FR")}\'')
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("check", help="search for attribute-hiding counter-examples")
    p.add_argument("file")
    p.add_argument("policy")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", dest="first", action="store_false", help="report every counter-example (default)")
    mode.add_argument("--first", dest="first", action="store_true", help="stop at the first counter-example")
    lattice_flag(p)
    p.add_argument("--jobs", type=_positive, default=1)
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("prove", help="build a resistance certificate")
    p.add_argument("file")
    p.add_argument("policy")
    p.add_argument("--allow-exhaustive", action="store_true", help="close failing goals by lattice search")
    p.add_argument("--out", help="certificate path (default <policy>.cert)")
    lattice_flag(p)
    p.set_defaults(run=cmd_prove)

    p = sub.add_parser("verify", help="check a certificate against a policy document")
    p.add_argument("cert")
    p.add_argument("file")
    lattice_flag(p)
    p.set_defaults(run=cmd_verify)

    for name, run, helptext in (
        ("gen", cmd_gen, "write a random policy family as one document"),
        ("bench", cmd_bench, "check and prove a random policy family, writing CSV"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--height", type=_positive, required=True)
        p.add_argument("--width", type=_positive, required=True)
        p.add_argument("--attrs", type=_positive, required=True)
        p.add_argument("--vals", type=_positive, required=True)
        p.add_argument("--count", type=_positive, required=True)
        p.add_argument("--seed", type=int, default=0)
        p.set_defaults(run=run)
    gen_p, bench_p = sub.choices["gen"], sub.choices["bench"]
    gen_p.add_argument("--out", help="output file (default stdout)")
    bench_p.add_argument("--csv", help="CSV output file (default stdout)")
    bench_p.add_argument("--jobs", type=_positive, default=1)
    bench_p.add_argument("--allow-exhaustive", action="store_true")
    bench_p.add_argument("--no-timing", action="store_true", help="leave timing columns empty")
    lattice_flag(bench_p)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.run(args)
    except _UsageError as e:
        print(f"ptacl: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SearchSpaceTooLarge as e:
        print(f"ptacl: {e}", file=sys.stderr)
        return EXIT_CAP
    except PolicyError as e:
        print(f"ptacl: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
