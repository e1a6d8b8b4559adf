from hypothesis import given
from hypothesis import strategies as st

from flp.kernel import (
    CUT,
    And,
    Call,
    Clause,
    Eq,
    Exists,
    Fn,
    If,
    NameSupply,
    Program,
    Substitution,
    Var,
    alpha_equiv,
    answers_equivalent,
    apply,
    compose,
    deep_recursion,
    free_vars,
    is_ground,
    mklist,
    occurs,
    specializes,
    term_depth,
    term_vars,
    unify,
)
from strategies import formulas, terms

X, Y, Z = Var("X"), Var("Y"), Var("Z")
a, zero = Fn("a"), Fn("0")


def f(*args):
    return Fn("f", args)


def test_substitution_drops_identity_bindings():
    s = Substitution({"X": X, "Y": a})
    assert dict(s) == {"Y": a}
    assert s.term(f(X, Y)) == f(X, a)


def test_term_helpers():
    t = Fn("g", (X, f(Y, X)))
    assert list(term_vars(t)) == ["X", "Y"]
    assert term_depth(t) == 3 and term_depth(a) == 1
    assert occurs("Y", t) and not occurs("Z", t)
    assert is_ground(f(a)) and not is_ground(f(X))
    assert mklist([a, zero]) == Fn("cons", (a, Fn("cons", (zero, Fn("nil")))))


def test_unify_occurs_check():
    assert unify(X, f(X)) is None
    assert unify(f(X, Y), f(Y, f(X))) is None


def test_unify_clash():
    assert unify(f(a), f(zero)) is None
    assert unify(f(a), Fn("g", (a,))) is None


@given(terms, terms)
def test_unifier_is_idempotent_and_unifies(s, t):
    sigma = unify(s, t)
    if sigma is not None:
        assert sigma.term(s) == sigma.term(t)
        assert sigma.is_idempotent()


@given(terms, terms)
def test_unify_is_most_general(s, t):
    # any ground unifier built from an instance factors through the mgu
    sigma = unify(s, t)
    if sigma is None:
        assert unify(t, s) is None
        return
    other = unify(t, s)
    assert other is not None
    names = set(term_vars(s)) | set(term_vars(t))
    assert answers_equivalent(sigma, other, names)


@given(terms, terms, terms)
def test_compose_applies_outer_then_inner(s, t, u):
    outer = unify(s, t)
    if outer is None:
        return
    inner = unify(outer.term(u), outer.term(s))
    if inner is None:
        return
    both = compose(outer, inner)
    assert both.term(u) == inner.term(outer.term(u))


def test_specializes():
    general = Substitution({"X": f(Y)})
    special = Substitution({"X": f(a), "Y": a})
    assert specializes(special, general)
    assert not specializes(general, special)
    assert answers_equivalent(Substitution({"X": Var("A")}), Substitution({"X": Var("B")}), ["X"])
    assert not answers_equivalent(Substitution({"X": a}), Substitution({"X": zero}), ["X"])


def test_apply_avoids_capture():
    g = Exists("X", Call("p", (X, Y)))
    out = apply(Substitution({"Y": X}), g)
    assert isinstance(out, Exists) and out.var != "X"
    assert free_vars(out) == ("X",)
    assert alpha_equiv(out, Exists("V", Call("p", (Var("V"), X))))


def test_apply_respects_if_binders():
    g = If(("X",), Eq(X, Y), Eq(Y, X))
    out = apply(Substitution({"X": a, "Y": zero}), g)
    assert out == If(("X",), Eq(X, zero), Eq(zero, X))


@given(formulas)
def test_alpha_equiv_is_reflexive_and_invariant_under_renaming(g):
    assert alpha_equiv(g, g)
    renamed = apply(Substitution({v: Var(v + "_r") for v in free_vars(g)}), g)
    if free_vars(g):
        assert not alpha_equiv(g, renamed) or g == renamed
    assert set(free_vars(renamed)) == {v + "_r" for v in free_vars(g)}


def test_alpha_equiv_bound_names_only():
    assert alpha_equiv(Exists("X", Call("p", (X,))), Exists("Y", Call("p", (Y,))))
    assert not alpha_equiv(Call("p", (X,)), Call("p", (Y,)))
    assert not alpha_equiv(Exists("X", Call("p", (X, Y))), Exists("Y", Call("p", (Y, Y))))


def test_name_supply_avoids_reserved_names():
    supply = NameSupply({"X#1", "X"})
    names = {supply.fresh_var("X") for _ in range(5)}
    assert len(names) == 5 and "X#1" not in names
    assert all("#" in n for n in names)


def test_program_views():
    p = Program((Clause("p", (X,), (Call("q", (X,)), CUT, Eq(X, a))),))
    assert p.defined() == {"p": 1}
    assert p.predicates() == {"p": 1, "q": 1}
    assert p.clauses[0].has_cut
    assert {"0", "1", "a"} <= set(p.signature())


def test_deep_terms_survive():
    deep = a

    for _ in range(30_000):
        deep = f(deep)
    assert term_depth(deep) == 30_001
    assert occurs("X", f(deep, X))
    sigma = unify(f(X), f(deep))
    assert sigma is not None and sigma["X"] is deep

    @deep_recursion
    def same(s, t):
        return s == t

    other = a
    for _ in range(30_000):
        other = f(other)
    assert same(deep, other)


@given(st.lists(st.sampled_from(["X", "Y"]), min_size=1, max_size=3))
def test_free_vars_order(names):
    g = And(Call("p", tuple(Var(n) for n in names)), Eq(Z, Z))
    assert free_vars(g) == tuple(dict.fromkeys(names + ["Z"]))
