import subprocess
import sys

import pytest

from conftest import GOLDEN, RUNNING_EXAMPLE
from ptacl.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "policy,request_text,expected",
    [
        ("p1", "{}", "{ALLOW, DENY}"),
        ("p2", '{("nat","FR")}', "{ALLOW}"),
        ("p1", '{("nat","AT"),("nat","FR")}', "{DENY}"),
    ],
)
def test_eval(capsys, example_file, policy, request_text, expected):
    assert run(capsys, "eval", example_file, policy, request_text) == (0, expected + "\n", "")


def test_eval_bad_request(capsys, example_file):
    code, _, err = run(capsys, "eval", example_file, "p1", "{(nat)}")
    assert code == 2 and "request" in err


def test_check_p1(capsys, example_file):
    code, out, _ = run(capsys, "check", example_file, "p1")
    assert code == 1 and out == (GOLDEN / "p1.check.txt").read_text()
    assert run(capsys, "check", example_file, "p1", "--first")[1] == out


def test_check_p2(capsys, example_file):
    assert run(capsys, "check", example_file, "p2") == (0, "RESISTANT (4 requests checked)\n", "")


def test_check_unknown_policy(capsys, example_file):
    code, _, err = run(capsys, "check", example_file, "nope")
    assert code == 2 and "nope" in err


def test_check_cap(capsys, example_file):
    assert run(capsys, "check", example_file, "p2", "--max-lattice", "1")[0] == 3


def test_parse_error_exit(capsys, tmp_path):
    bad = tmp_path / "bad.ptacl"
    bad.write_text("p : Pand (Patom One)\n")
    code, _, err = run(capsys, "check", bad, "p")
    assert code == 2 and "syntax error" in err


def test_missing_file(capsys, tmp_path):
    assert run(capsys, "check", tmp_path / "none.ptacl", "p")[0] == 2


def test_prove_and_verify(capsys, example_file, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run(capsys, "prove", example_file, "p2")
    assert code == 0 and out == (GOLDEN / "p2.proof.txt").read_text()
    cert = tmp_path / "p2.cert"
    assert cert.read_text() == (GOLDEN / "p2.cert").read_text()
    assert run(capsys, "verify", cert, example_file) == (0, "VALID\n", "")

    tampered = tmp_path / "bad.cert"
    tampered.write_text(cert.read_text().replace("WNBruteForce", "WDBruteForce"))
    code, out, _ = run(capsys, "verify", tampered, example_file)
    assert code == 1 and out.startswith("INVALID: ")

    edited = tmp_path / "edited.ptacl"
    edited.write_text(RUNNING_EXAMPLE.replace('"FR"', '"AT"'))
    assert run(capsys, "verify", cert, edited) == (1, "INVALID: digest mismatch\n", "")

    garbage = tmp_path / "garbage.cert"
    garbage.write_text("(certificate)")
    assert run(capsys, "verify", garbage, example_file)[0] == 2


def test_prove_p1_fails(capsys, example_file, tmp_path):
    out_path = tmp_path / "p1.cert"
    code, out, _ = run(capsys, "prove", example_file, "p1", "--out", out_path)
    assert code == 1 and out == "NO STRUCTURAL PROOF FOUND\n" and not out_path.exists()
    assert run(capsys, "prove", example_file, "p1", "--allow-exhaustive", "--out", out_path)[0] == 1


def test_prove_atom(capsys, tmp_path):
    doc = tmp_path / "a.ptacl"
    doc.write_text("a : Patom One\n")
    code, out, _ = run(capsys, "prove", doc, "a", "--out", tmp_path / "a.cert")
    assert code == 0 and "ResNoTarget" in (tmp_path / "a.cert").read_text()
    assert out.count("\n") == 1


def test_prove_cap(capsys, tmp_path):
    doc = tmp_path / "d.ptacl"
    doc.write_text('d : Pdbd (Ptar (Tnot (Tnot (Tatom "a" "1"))) (Patom One))\n')
    args = ("prove", doc, "d", "--allow-exhaustive", "--out", tmp_path / "d.cert")
    assert run(capsys, *args, "--max-lattice", "1")[0] == 3
    assert run(capsys, *args)[0] == 0


FAMILY = ("--height", 4, "--width", 4, "--attrs", 4, "--vals", 4, "--count", 300, "--seed", 7)


def test_gen(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", *FAMILY)
    assert code == 0
    assert sum(1 for line in out.splitlines() if line and not line.startswith("#")) == 300
    assert run(capsys, "gen", *FAMILY)[1] == out
    run(capsys, "gen", *FAMILY, "--out", tmp_path / "f.ptacl")
    assert (tmp_path / "f.ptacl").read_text() == out


def test_bench(capsys, tmp_path):
    csv = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", *FAMILY, "--csv", csv)
    lines = csv.read_text().splitlines()
    assert code == 0 and len(lines) == 302 and out.startswith("# policies=300")


def test_bad_flags(capsys):
    with pytest.raises(SystemExit) as info:
        main(["gen", "--height", "0", "--width", "1", "--attrs", "1", "--vals", "1", "--count", "1"])
    assert info.value.code == 2


def test_module_entry_point(example_file):
    proc = subprocess.run([sys.executable, "-m", "ptacl", "check", str(example_file), "p2"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "RESISTANT (4 requests checked)\n"
