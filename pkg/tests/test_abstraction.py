import itertools

import pytest

from flp import abstraction as ab
from flp import corpus, oracle
from flp.abstraction import F, T, U
from flp.completion import complete
from flp.kernel import Fn, term_depth
from flp.syntax import parse_goal

VALUES = [T, F, U]
P0P1 = complete(corpus.load("p0p1"))


def test_max_k():
    assert ab.max_k([U, T]) is T
    assert ab.max_k([F, U, F]) is F
    assert ab.max_k([U]) is U
    with pytest.raises(ab.Contradiction):
        ab.max_k([T, F])
    with pytest.raises(ValueError):
        ab.max_k([])


def test_max_t():
    assert ab.max_t([F, U]) is U
    assert ab.max_t([F, T, U]) is T
    assert ab.max_t([F]) is F


def test_orders():
    for a, b in itertools.product(VALUES, repeat=2):
        assert ab.leq_k(a, b) == (a == b or a is U)
    assert ab.leq_t(F, U) and ab.leq_t(U, T) and not ab.leq_t(T, U)


def test_universe_counts():
    assert ab.UniverseBound.of({}, 1).size() == 2
    assert ab.UniverseBound.of({"f": 1}, 2).size() == 4
    assert ab.UniverseBound.of({"f": 1}, 3).size() == 6
    assert ab.UniverseBound.of({"g": 2}, 2).size() == 6


def test_universe_is_shallower_first():
    bound = ab.UniverseBound.of({"f": 1, "a": 0}, 3)
    terms = list(ab.enumerate_ground(bound))
    depths = [term_depth(t) for t in terms]
    assert depths == sorted(depths)
    assert len(set(terms)) == len(terms)
    assert bound.contains(Fn("f", (Fn("a"),)))
    assert not bound.contains(Fn("h", (Fn("a"),)))


def test_valuation_basics():
    bound = ab.UniverseBound.of({"f": 1}, 2)
    cases = {
        "0 = 0": T,
        "0 = 1": F,
        "p": U,
        "\\+ p": U,
        "0 = 1, p": F,
        "p, 0 = 1": U,
        "0 = 0 ; p": T,
        "p ; 0 = 0": U,
        "exists(X, X = f(0))": T,
        "exists(X, X = f(f(0)))": F,
        "exists(X, (\\+ X = 0, \\+ X = 1))": T,
    }
    for text, expected in cases.items():
        assert ab.valuate(parse_goal(text), bound) is expected, text


def test_valuation_rejects_open_or_non_o_formulas():
    bound = ab.UniverseBound.of({}, 1)
    with pytest.raises(ValueError):
        ab.valuate(parse_goal("X = 0"), bound)
    with pytest.raises(ValueError):
        ab.valuate(parse_goal("(0 = 0 ; 0 = 1), 0 = 0"), bound)


@pytest.mark.parametrize("seed", range(80))
def test_equation_solving_matches_enumeration(seed):
    f = oracle.gen_ground_o_formula(oracle.GenConfig(seed))
    bound = ab.UniverseBound.for_goal(f, max_depth=2)
    assert ab.valuate(f, bound) == ab.valuate_naive(f, bound)


@pytest.mark.parametrize("seed", range(40))
def test_valuation_matches_pessimistic_outcome(seed):
    f = oracle.gen_ground_o_formula(oracle.GenConfig(seed))
    bound = ab.UniverseBound.for_goal(f)
    assert ab.valuate(f, bound) == ab.pessimistic_outcome(f)


def test_floundering_is_outside_the_characterised_class():
    with pytest.raises(ab.OutsideCharacterizedClass):
        ab.pessimistic_outcome(parse_goal("exists(X, \\+ X = 0)"))


def test_unfolding():
    g = parse_goal("p(1), p(0)")
    left, right = ab.unfold_once(P0P1, g)
    assert left.right == parse_goal("p(0)")
    assert right.left == parse_goal("p(1)")
    both = ab.unfold_all(P0P1, g)
    assert ab.has_calls(ab.unfold_all(P0P1, parse_goal("p(1)")))
    assert not ab.has_calls(parse_goal("0 = 0"))
    assert both.left == left.left and both.right == right.right


def test_denotation_of_a_looping_program():
    assert ab.denote(P0P1, parse_goal("p(1)"), 3).value is T
    assert ab.denote(P0P1, parse_goal("p(a)"), 3).value is F
    d = ab.denote(P0P1, parse_goal("p(0)"), 3)
    assert d.value is U and d.status is ab.DenoteStatus.UNKNOWN
    assert d.values == [U, U, U, U]
    # the left disjunct loops before the right one is reached
    assert ab.denote(P0P1, parse_goal("exists(X, p(X))"), 3).value is U


def test_exhaustive_denotation_is_consistent():
    d = ab.denote(P0P1, parse_goal("p(1)"), 3, exhaustive=True)
    assert d.value is T and d.rounds == 1
    assert F not in d.values
