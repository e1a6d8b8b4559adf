import pytest

from flp import abstraction as ab
from flp import corpus, oracle
from flp.abstraction import F, T, U
from flp.completion import complete, is_completed_form
from flp.dfnf import is_o
from flp.engine import SemanticsMode
from flp.kernel import Program, free_vars, term_depth, formula_terms
from flp.syntax import parse_goal

M = SemanticsMode


@pytest.mark.parametrize("seed", range(5))
def test_generation_is_deterministic(seed):
    cfg = oracle.GenConfig(seed)
    p = oracle.gen_program(cfg)
    assert oracle.gen_program(oracle.GenConfig(seed)) == p
    assert oracle.gen_goal(cfg, p) == oracle.gen_goal(oracle.GenConfig(seed), p)
    assert oracle.gen_closed_formula(cfg) == oracle.gen_closed_formula(oracle.GenConfig(seed))


@pytest.mark.parametrize("seed", range(50))
def test_generated_programs_respect_the_config(seed):
    cfg = oracle.GenConfig(seed)
    p = oracle.gen_program(cfg)
    counts = {}
    for c in p.clauses:
        counts[c.pred] = counts.get(c.pred, 0) + 1
        assert len(c.args) <= cfg.max_arity
    assert len(counts) <= cfg.n_preds
    assert set(p.predicates()) <= set(p.defined())


@pytest.mark.parametrize("seed", range(50))
def test_closed_and_ground_formulas(seed):
    cfg = oracle.GenConfig(seed)
    assert free_vars(oracle.gen_closed_formula(cfg)) == ()
    f = oracle.gen_ground_o_formula(cfg)
    assert free_vars(f) == () and is_o(f)
    assert max((term_depth(t) for t in formula_terms(f)), default=1) <= cfg.max_term_depth + 1


def test_witness_check_flags_liberal_negation():
    v = oracle.check_witness(Program(), parse_goal("\\+ X = 0, X = 1"), 1000, mode=M.LIBERAL_COMPLETED)
    assert v.status == "violation" and not v.ok
    assert v.counterexample == parse_goal("\\+ 1 = 0, 1 = 1")
    assert oracle.check_witness(Program(), parse_goal("\\+ X = 0, X = 1"), 1000).status == "skipped"


def test_witness_check_accepts_sound_results():
    p = complete(corpus.load("delete3"))
    assert oracle.check_witness(p, parse_goal("d(a, [a, b], Z)"), 1000).status == "ok"
    assert oracle.check_witness(p, parse_goal("d(a, [a, b], [])"), 1000).status == "ok"


def test_instances_respect_the_limit():
    bound = ab.UniverseBound.of({"f": 1}, 2)
    assert len(list(oracle.instances(parse_goal("X = Y"), bound))) == 16
    with pytest.raises(RuntimeError):
        list(oracle.instances(parse_goal("p(X, Y, Z)"), bound, limit=10))


def test_brute_unfolding_never_contradicts_itself():
    p = complete(corpus.load("p0p1"))
    table = oracle.brute_unfold_pessimistic(p, parse_goal("p(1) ; p(0)"), 3)
    values = set(table.values())
    assert T in values and F not in values
    assert ab.max_k(values) is T
    loop = oracle.brute_unfold_pessimistic(p, parse_goal("p(0)"), 3)
    assert set(loop.values()) == {U}


def test_report_bookkeeping():
    rep = oracle.SuiteReport("demo")
    rep.record("ok")
    rep.record("skipped")
    rep.record("violation", lambda: "first")
    rep.record("violation", lambda: "second")
    assert (rep.cases, rep.passed, rep.skipped, rep.failed) == (4, 1, 1, 2)
    assert not rep.ok
    assert rep.summary().startswith("demo: 1 passed, 2 failed, 1 skipped of 4")
    assert "first counterexample: first" in rep.summary()


@pytest.mark.parametrize("name", sorted(oracle.SUITES))
def test_every_suite_runs_on_a_few_cases(name):
    reports = oracle.SUITES[name](3, 10)
    assert reports
    for rep in reports:
        assert rep.cases == rep.passed + rep.failed + rep.skipped
        # the potential-depth report is known to fail; see test_r1_can_raise_potential_depth
        if not rep.name.startswith("potential depth"):
            assert rep.ok, rep.summary()


def test_completion_suite_programs_are_completed():
    for _, p, _ in oracle.witness_cases(seed=1, cases=10):
        assert is_completed_form(complete(p))[0]
