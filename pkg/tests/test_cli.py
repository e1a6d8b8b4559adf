import io

import pytest

from flp.cli import EXIT_OK, EXIT_PARSE, EXIT_SUITE, EXIT_VALIDATION, main


def flp(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_run_prints_the_answer():
    assert flp("run", "--program", "delete3", "--query", "d(a, [a, b], Z)") == (EXIT_OK, "yes {Z -> [b]}\n")


def test_run_accepts_corpus_prefix_and_files(tmp_path):
    src = tmp_path / "nat.flp"
    src.write_text("n(0).\nn(s(X)) :- n(X).\n")
    assert flp("run", "--program", str(src), "--query", "n(s(s(0)))") == (EXIT_OK, "yes {}\n")
    assert flp("run", "--program", "corpus:loop.flp", "--query", "\\+ X = 0")[1] == "fail\n"


def test_run_results_for_each_outcome():
    assert flp("run", "--query", "\\+ X = 0", "--semantics", "conservative")[1] == "flounder\n"
    assert flp("run", "--program", "loop", "--query", "loop(a)", "--fuel", "50")[1] == "unknown (fuel exhausted)\n"
    code, out = flp("run", "--program", "loop", "--query", "loop(a)", "--semantics", "pessimistic", "--auto-complete")
    assert (code, out) == (EXIT_OK, "diverge\n")


def test_run_trace():
    code, out = flp("run", "--program", "delete3", "--query", "d(a, [a], Z)", "--trace")
    lines = out.splitlines()
    assert code == EXIT_OK
    assert lines[0].startswith("[Pred] {}: d(a, [a], Z)")
    assert lines[1].startswith("  [Using/nocut/fail]")
    assert lines[-1] == "yes {Z -> []}"


def test_completed_semantics_need_completion():
    code, _ = flp("run", "--program", "delete3", "--query", "d(a, [], Z)", "--semantics", "conservative")
    assert code == EXIT_VALIDATION
    args = ("run", "--program", "delete3", "--query", "d(a, [], Z)", "--semantics", "conservative", "--auto-complete")
    assert flp(*args) == (EXIT_OK, "yes {Z -> []}\n")


def test_complete(tmp_path):
    code, out = flp("complete", "--program", "cut_pqr")
    assert code == EXIT_OK
    assert out.splitlines()[1] == "q(X1) :- X1 = c ; X1 = d."
    target = tmp_path / "out.flp"
    assert flp("complete", "--program", "cut_pqr", "--out", str(target)) == (EXIT_OK, "")
    assert target.read_text() == out


def test_dfnf_chain():
    code, out = flp("dfnf", "--formula", "if([X], X = 0, (p(X) ; q(X)))")
    assert code == EXIT_OK
    assert out.splitlines() == [
        "if([X], X = 0, (p(X) ; q(X)))",
        "  --R5 at root--> exists(X, (X = 0, (p(X) ; q(X))))",
        "  --R2 at 0--> exists(X, ((X = 0, p(X)) ; (X = 0, q(X))))",
        "  --R3 at root--> exists(X, (X = 0, p(X))) ; exists(X, (X = 0, q(X)))",
        "normal form: exists(X, (X = 0, p(X))) ; exists(X, (X = 0, q(X)))",
    ]


def test_quiet_prints_only_the_normal_form():
    assert flp("--quiet", "dfnf", "--formula", "(p ; q), r") == (EXIT_OK, "normal form: (p, r) ; (q, r)\n")


def test_denote():
    code, out = flp("denote", "--program", "delete3", "--goal", "exists(Z, d(a, [], Z))")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "T"
    assert lines[1].startswith("witness: exists(Z, (([] = [], Z = [])")
    assert lines[2].startswith("explored: ")
    assert flp("denote", "--program", "p0p1", "--goal", "p(0)", "--unfold-depth", "2")[1].splitlines()[0] == "U"


def test_check_exit_codes():
    code, out = flp("check", "--suite", "witness", "--cases", "10")
    assert code == EXIT_OK and "0 failed" in out
    code, out = flp("check", "--suite", "dfnf", "--cases", "40", "--seed", "0")
    assert code == EXIT_SUITE
    assert "potential depth never increases" in out


@pytest.mark.parametrize(
    "argv, code",
    [
        (("run", "--query", "p("), EXIT_PARSE),
        (("run", "--query", "p, !"), EXIT_VALIDATION),
        (("run", "--program", "delete3", "--query", "d(a, Z)"), EXIT_VALIDATION),
        (("run", "--program", "no_such_program", "--query", "p"), EXIT_VALIDATION),
        (("dfnf", "--formula", "(p ; "), EXIT_PARSE),
    ],
)
def test_error_exit_codes(argv, code, capsys):
    assert flp(*argv)[0] == code
    assert capsys.readouterr().err


def test_help_documents_the_grammar(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    assert "dialect:" in text and "'exists('" in text
    for command in ("run", "complete", "dfnf", "denote", "check"):
        assert command in text


def test_unknown_semantics_is_a_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["run", "--query", "p", "--semantics", "eager"])
    assert exc.value.code == 2
