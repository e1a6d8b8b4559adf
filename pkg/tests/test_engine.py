import pytest

from flp import corpus, oracle
from flp.completion import complete
from flp.engine import (
    Body,
    Diverge,
    Fail,
    Flounder,
    FuelExhausted,
    Goal,
    Judgement,
    SemanticsMode,
    Success,
    Using,
    apply_stack,
    format_trace,
    run,
    run_counted,
    run_stack,
    stack_free_vars,
    trace,
)
from flp.kernel import Call, Fn, Program, Substitution, Var, is_ground, mklist, term_depth
from flp.syntax import ValidationError, parse_goal, parse_program, parse_term

M = SemanticsMode
FUEL = 10_000
DELETE = corpus.load("delete3")


CASES = [(p, g) for _, p, g in oracle.witness_cases(seed=7, cases=40)]


def test_mode_parsing_and_fragments():
    assert M.parse("conservative") is M.CONSERVATIVE
    assert M.parse("LIBERAL_COMPLETED") is M.LIBERAL_COMPLETED
    assert M.PESSIMISTIC.conservative_choice and not M.LIBERAL_GENERAL.conservative_choice
    assert not M.LIBERAL_GENERAL.needs_completed
    with pytest.raises(ValueError):
        M.parse("eager")


def test_delete_answers():
    r = run(M.LIBERAL_GENERAL, DELETE, parse_goal("d(a, [a, b, a], Z)"), FUEL)
    assert r == Success(Substitution({"Z": parse_term("[b]")}))


def test_completed_program_gives_the_same_first_answer():
    g = parse_goal("d(a, [b, a, c], Z)")
    general = run(M.LIBERAL_GENERAL, DELETE, g, FUEL)
    completed = run(M.LIBERAL_COMPLETED, complete(DELETE), g, FUEL)
    assert general == completed == Success(Substitution({"Z": parse_term("[b, c]")}))


def test_fuel_exhaustion_and_exact_budget():
    g = parse_goal("d(a, [a, b, a], Z)")
    r, used = run_counted(M.LIBERAL_GENERAL, DELETE, g, FUEL)
    assert isinstance(r, Success)
    assert run(M.LIBERAL_GENERAL, DELETE, g, used) == r
    assert run(M.LIBERAL_GENERAL, DELETE, g, used - 1) is FuelExhausted


@pytest.mark.parametrize("index", range(40))
def test_fuel_monotonicity(index):
    p, g = CASES[index]
    r, used = run_counted(M.LIBERAL_GENERAL, p, g, 2000)
    if r is FuelExhausted:
        return
    assert run(M.LIBERAL_GENERAL, p, g, used + 500) == r
    assert run(M.LIBERAL_GENERAL, p, g, used) == r


@pytest.mark.parametrize("index", range(40))
def test_runs_are_deterministic(index):
    p, g = CASES[index]
    assert run(M.LIBERAL_GENERAL, p, g, 2000) == run(M.LIBERAL_GENERAL, p, g, 2000)


@pytest.mark.parametrize("index", range(40))
def test_debug_invariants_hold(index):
    p, g = CASES[index]
    c = complete(p)
    for mode in (M.LIBERAL_COMPLETED, M.CONSERVATIVE):
        assert run(mode, c, g, 2000, debug=True) == run(mode, c, g, 2000)


def test_conservative_flounders_on_open_negation():
    assert run(M.CONSERVATIVE, None, parse_goal("\\+ X = a"), FUEL) is Flounder
    assert run(M.CONSERVATIVE, None, parse_goal("X = b, \\+ X = a"), FUEL) == Success(
        Substitution({"X": Fn("b")})
    )


def test_pessimistic_diverges_on_a_predicate_call():
    loop = complete(corpus.load("loop"))
    assert run(M.PESSIMISTIC, loop, parse_goal("loop(a)"), FUEL) is Diverge
    assert run(M.PESSIMISTIC, None, parse_goal("exists(X, X = f(X))"), FUEL) is Fail


def test_completed_modes_reject_general_programs():
    for mode in (M.LIBERAL_COMPLETED, M.CONSERVATIVE, M.PESSIMISTIC):
        with pytest.raises(ValidationError):
            run(mode, DELETE, parse_goal("d(a, [], Z)"), FUEL)


def test_goal_arity_mismatch_is_rejected():
    with pytest.raises(ValidationError):
        run(M.LIBERAL_GENERAL, DELETE, parse_goal("d(a, Z)"), FUEL)


def test_undefined_predicate_fails_in_general_mode():
    assert run(M.LIBERAL_GENERAL, Program(), parse_goal("nope(a)"), FUEL) is Fail


def test_answer_mentions_only_goal_variables():
    r = run(M.LIBERAL_GENERAL, DELETE, parse_goal("d(a, [b], Z)"), FUEL)
    assert set(r.answer) == {"Z"}


def test_if_commits_to_first_solution():
    p = parse_program("c(1). c(2).")
    r = run(M.LIBERAL_GENERAL, p, parse_goal("if([Y], c(Y), X = Y)"), FUEL)
    assert r == Success(Substitution({"X": Fn("1")}))


def test_run_stack_with_initial_substitution():
    # the stack is already instantiated by the judgement's substitution
    j = Judgement(Substitution({"W": Fn("b")}), (Goal(parse_goal("d(a, [a, c], Z)")),), DELETE)
    r = run_stack(M.LIBERAL_GENERAL, j, FUEL)
    assert isinstance(r, Success)
    assert r.answer["Z"] == parse_term("[c]") and r.answer["W"] == Fn("b")
    assert run_stack(M.LIBERAL_GENERAL, Judgement(Substitution(), (), DELETE), FUEL) == Success(Substitution())


def test_stack_helpers():
    stack = (Goal(parse_goal("p(X)")), Using("d", (Var("Y"),), ()), Body((parse_goal("q(Z)"),)))
    assert set(stack_free_vars(stack)) == {"X", "Y", "Z"}
    out = apply_stack(Substitution({"Y": Fn("a")}), stack)
    assert out[1].args == (Fn("a"),)


def test_trace_structure_and_rendering():
    t = trace(M.LIBERAL_GENERAL, DELETE, parse_goal("d(a, [a], Z)"), FUEL)
    assert t.root.rule == "Pred"
    assert t.steps > 0
    text = format_trace(t.root)
    assert text.splitlines()[0].startswith("[Pred]")
    assert "Unif/fail" in text


def test_long_lists():
    long = mklist([Fn("a")] * 3000)
    r = run(M.LIBERAL_GENERAL, DELETE, Call("d", (Fn("a"), long, Var("Z"))), 100_000)
    assert r == Success(Substitution({"Z": Fn("nil")}))


def test_ground_answers_for_ground_deep_calls():
    p = parse_program("n(0). n(s(X)) :- n(X).")
    t = parse_term("0")
    for _ in range(400):
        t = Fn("s", (t,))
    r = run(M.LIBERAL_GENERAL, p, Call("n", (t,)), 100_000)
    assert r == Success(Substitution())
    assert is_ground(t) and term_depth(t) == 401
