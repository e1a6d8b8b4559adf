"""Truth values, the valuation of ground outer-disjunction formulas, unfoldings
and the bounded approximation of a program's denotation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional

from .dfnf import dfnf, is_o
from .engine import Diverge, Fail, Flounder, SemanticsMode, Success, run
from .kernel import (
    And,
    Call,
    Eq,
    Exists,
    Fn,
    Formula,
    If,
    Not,
    Or,
    Program,
    Substitution,
    Term,
    Var,
    apply,
    exists_many,
    formula_signature,
    formula_terms,
    free_vars,
    term_depth,
    term_vars,
    unify,
)


class TruthValue(enum.Enum):
    T = "T"
    F = "F"
    U = "U"

    def __str__(self) -> str:
        return self.value


T, F, U = TruthValue.T, TruthValue.F, TruthValue.U

_ALETHIC = {F: 0, U: 1, T: 2}


class Contradiction(RuntimeError):
    """Both T and F were observed where the theory says at most one can be."""


def leq_k(a: TruthValue, b: TruthValue) -> bool:
    return a == b or a is U


def leq_t(a: TruthValue, b: TruthValue) -> bool:
    return _ALETHIC[a] <= _ALETHIC[b]


def max_k(values: Iterable[TruthValue]) -> TruthValue:
    s = set(values)
    if not s:
        raise ValueError("max_k of an empty set")
    if T in s and F in s:
        raise Contradiction("max_k is undefined on a set containing both T and F")
    return T if T in s else F if F in s else U


def max_t(values: Iterable[TruthValue]) -> TruthValue:
    s = set(values)
    if not s:
        raise ValueError("max_t of an empty set")
    return max(s, key=_ALETHIC.__getitem__)


# ---------------------------------------------------------------------------
# Bounded universe of ground terms


@dataclass(frozen=True)
class UniverseBound:
    signature: tuple[tuple[str, int], ...]
    max_depth: int

    def __post_init__(self):
        sig = dict(self.signature)
        sig.setdefault("0", 0)
        sig.setdefault("1", 0)
        object.__setattr__(self, "signature", tuple(sig.items()))

    @classmethod
    def of(cls, signature: dict[str, int], max_depth: int) -> "UniverseBound":
        return cls(tuple(signature.items()), max_depth)

    @classmethod
    def for_goal(
        cls, f: Formula, program: Optional[Program] = None, slack: int = 2, max_depth: Optional[int] = None
    ) -> "UniverseBound":
        sig = dict(program.signature()) if program is not None else {"0": 0, "1": 0}
        for name, arity in formula_signature(f).items():
            sig.setdefault(name, arity)
        if max_depth is None:
            deepest = max((term_depth(t) for t in formula_terms(f)), default=1)
            max_depth = deepest + slack
        return cls.of(sig, max_depth)

    def contains(self, t: Term) -> bool:
        return _fits(t, dict(self.signature)) and term_depth(t) <= self.max_depth

    def size(self) -> int:
        return len(universe(self))


def _fits(t: Term, sig: dict) -> bool:
    if isinstance(t, Var):
        return False
    return sig.get(t.name) == len(t.args) and all(_fits(a, sig) for a in t.args)


def enumerate_ground(bound: UniverseBound) -> Iterator[Term]:
    """Ground terms of depth <= max_depth, shallower first, in signature order."""
    if bound.max_depth < 1:
        raise ValueError("max_depth must be at least 1")
    yield from universe(bound)


@lru_cache(maxsize=64)
def universe(bound: UniverseBound) -> tuple[Term, ...]:
    consts = [Fn(n) for n, a in bound.signature if a == 0]
    functors = [(n, a) for n, a in bound.signature if a > 0]
    layers: list[list[Term]] = [consts]  # layers[d-1] = terms of depth exactly d
    for d in range(2, bound.max_depth + 1):
        below = [t for layer in layers for t in layer]
        prev = set(layers[-1])
        layer = []
        for name, arity in functors:
            for args in itertools.product(below, repeat=arity):
                if any(a in prev for a in args):
                    layer.append(Fn(name, args))
        layers.append(layer)
    return tuple(t for layer in layers for t in layer)


# ---------------------------------------------------------------------------
# The valuation


def valuate(f: Formula, bound: UniverseBound) -> TruthValue:
    """v(f) with existentials ranging over the bounded universe."""
    if free_vars(f):
        raise ValueError("valuate needs a ground formula")
    if not is_o(f):
        raise ValueError("valuate needs an outer-disjunction formula")
    return _Valuator(bound).v(f)


class _Valuator:
    def __init__(self, bound: UniverseBound):
        self.bound = bound
        self.terms = universe(bound)
        self.members = frozenset(self.terms)

    def v(self, f: Formula) -> TruthValue:
        match f:
            case Eq(s, t):
                return T if s == t else F
            case Call():
                return U
            case And(b, c):
                vb = self.v(b)
                return self.v(c) if vb is T else vb
            case Or(b, c):
                vb = self.v(b)
                return self.v(c) if vb is F else vb
            case Not(b):
                vb = self.v(b)
                return F if vb is T else T if vb is F else U
            case Exists():
                xs = []
                while isinstance(f, Exists):
                    xs.append(f.var)
                    f = f.body
                return self.exists(tuple(xs), f)
            case If():
                raise ValueError("if formulas are not outer-disjunction")
        raise TypeError(f)

    # v(exists x1..xk B) is max_t over all k-tuples of ground instances.
    # B is split into its conjuncts; an instance takes the value of the
    # first conjunct that is not T.  Equations are solved by unification
    # instead of enumeration, which is exact because every tuple violating
    # the equation has value F.
    def exists(self, xs: tuple[str, ...], body: Formula) -> TruthValue:
        # an outer binder shadowed by an inner one of the same name is vacuous
        return self._solve(set(xs), _flatten_and(body), 0)

    def _solve(self, open_vars: set, conjuncts: list[Formula], i: int) -> TruthValue:
        while i < len(conjuncts):
            c = conjuncts[i]
            mine = [v for v in free_vars(c) if v in open_vars]
            if not mine:
                val = self.v(c)
                if val is not T:
                    return val
                i += 1
                continue
            if isinstance(c, Call):
                return U
            if isinstance(c, Eq):
                return self._solve_eq(open_vars, conjuncts, i, c)
            return self._branch(open_vars, conjuncts, i, mine[0])
        return T

    def _solve_eq(self, open_vars, conjuncts, i, c: Eq) -> TruthValue:
        sigma = unify(c.lhs, c.rhs)
        if sigma is None:
            return F
        if not sigma:
            return self._solve(open_vars, conjuncts, i + 1)
        params = sorted({v for t in sigma.values() for v in term_vars(t)} & open_vars - sigma.keys())
        seen = {F}  # some tuple violates the equation
        for values in itertools.product(self.terms, repeat=len(params)):
            pick = Substitution(dict(zip(params, values)))
            inst = {x: pick.term(t) for x, t in sigma.items()}
            if not all(t in self.members for t in inst.values()):
                continue
            sub = Substitution({**inst, **pick})
            rest = [apply(sub, d) for d in conjuncts[i + 1:]]
            val = self._solve(open_vars - sub.keys(), rest, 0)
            if val is T:
                return T
            seen.add(val)
        return max_t(seen)

    def _branch(self, open_vars, conjuncts, i, x: str) -> TruthValue:
        seen = set()
        for t in self.terms:
            sub = Substitution({x: t})
            rest = [apply(sub, d) for d in conjuncts[i:]]
            val = self._solve(open_vars - {x}, rest, 0)
            if val is T:
                return T
            seen.add(val)
        return max_t(seen)


def _flatten_and(f: Formula) -> list[Formula]:
    out: list[Formula] = []
    todo = [f]
    while todo:
        g = todo.pop()
        if isinstance(g, And):
            todo.append(g.right)
            todo.append(g.left)
        else:
            out.append(g)
    return out


def valuate_naive(f: Formula, bound: UniverseBound) -> TruthValue:
    """The seven clauses read literally, enumerating every existential; slow."""
    terms = universe(bound)

    def v(g: Formula) -> TruthValue:
        match g:
            case Eq(s, t):
                return T if s == t else F
            case Call():
                return U
            case And(b, c):
                vb = v(b)
                return v(c) if vb is T else vb
            case Or(b, c):
                vb = v(b)
                return v(c) if vb is F else vb
            case Not(b):
                vb = v(b)
                return F if vb is T else T if vb is F else U
            case Exists(x, b):
                return max_t(v(apply(Substitution({x: t}), b)) for t in terms)
        raise ValueError(f"not an outer-disjunction formula: {g!r}")

    return v(f)


# ---------------------------------------------------------------------------
# Pessimistic outcome


class OutsideCharacterizedClass(ValueError):
    """The goal floundered, which the three-valued characterisation excludes."""


PESSIMISTIC_FUEL = 1_000_000


def close(f: Formula) -> Formula:
    return exists_many(free_vars(f), f)


def pessimistic_outcome(f: Formula, fuel: int = PESSIMISTIC_FUEL) -> TruthValue:
    r = run(SemanticsMode.PESSIMISTIC, Program(), close(f), fuel)
    if isinstance(r, Success):
        return T
    if r is Fail:
        return F
    if r is Diverge:
        return U
    if r is Flounder:
        raise OutsideCharacterizedClass("flounders under pessimistic semantics; goal outside characterized class")
    raise RuntimeError(f"pessimistic run did not finish within {fuel} steps")


# ---------------------------------------------------------------------------
# Unfoldings


def _definitions(p: Program) -> dict:
    return {c.pred: c for c in p.clauses}


def _unfold_call(defs: dict, call: Call) -> Optional[Formula]:
    c = defs.get(call.pred)
    if c is None:
        return None
    bind = Substitution({v.name: t for v, t in zip(c.args, call.args)})
    return apply(bind, c.body[0])


def _unfold_each(defs: dict, f: Formula) -> list[Formula]:
    """Every 1-unfolding of ``f``, leftmost call occurrence first."""
    match f:
        case Call():
            g = _unfold_call(defs, f)
            return [] if g is None else [g]
        case Eq():
            return []
        case And(b, c):
            return [And(x, c) for x in _unfold_each(defs, b)] + [And(b, x) for x in _unfold_each(defs, c)]
        case Or(b, c):
            return [Or(x, c) for x in _unfold_each(defs, b)] + [Or(b, x) for x in _unfold_each(defs, c)]
        case Not(b):
            return [Not(x) for x in _unfold_each(defs, b)]
        case Exists(x, b):
            return [Exists(x, y) for y in _unfold_each(defs, b)]
        case If(xs, b, c):
            return [If(xs, y, c) for y in _unfold_each(defs, b)] + [If(xs, b, y) for y in _unfold_each(defs, c)]
    raise TypeError(f)


def unfold_once(p: Program, f: Formula) -> list[Formula]:
    """The distinct 1-P-unfoldings of ``f``, in leftmost-call-first order."""
    out: list[Formula] = []
    for g in _unfold_each(_definitions(p), f):
        if g not in out:
            out.append(g)
    return out


def unfold_all(p: Program, f: Formula) -> Formula:
    """Unfold every call occurrence of ``f`` simultaneously (one round)."""
    defs = _definitions(p)

    def go(g: Formula) -> Formula:
        match g:
            case Call():
                h = _unfold_call(defs, g)
                return g if h is None else h
            case Eq():
                return g
            case And(b, c):
                return And(go(b), go(c))
            case Or(b, c):
                return Or(go(b), go(c))
            case Not(b):
                return Not(go(b))
            case Exists(x, b):
                return Exists(x, go(b))
            case If(xs, b, c):
                return If(xs, go(b), go(c))
        raise TypeError(g)

    return go(f)


def has_calls(f: Formula) -> bool:
    match f:
        case Call():
            return True
        case Eq():
            return False
        case And(b, c) | Or(b, c) | If(_, b, c):
            return has_calls(b) or has_calls(c)
        case Not(b) | Exists(_, b):
            return has_calls(b)
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Denotation


class DenoteStatus(enum.Enum):
    EXACT_T = "exact-T"
    EXACT_F = "exact-F"
    UNKNOWN = "unknown-at-depth"


@dataclass
class Denotation:
    value: TruthValue
    status: DenoteStatus
    witness: Optional[Formula] = None
    rounds: int = 0
    explored: int = 0
    values: list = field(default_factory=list)


def default_bound(p: Program, g: Formula, term_depth: Optional[int] = None) -> UniverseBound:
    return UniverseBound.for_goal(g, p, max_depth=term_depth)


def denote(
    p: Program,
    g: Formula,
    unfold_depth: int,
    bound: Optional[UniverseBound] = None,
    *,
    exhaustive: bool = False,
    size_ceiling: int = 200_000,
) -> Denotation:
    """Approximate v_P(g) from the unfoldings reachable in ``unfold_depth`` rounds.

    Round k is the goal with every call occurrence unfolded k times.  A
    defined value, once reached, is kept by every further unfolding, so each
    round subsumes all unfoldings with at most k nested expansions.
    """
    from .kernel import formula_size

    g = close(g)
    bound = bound or default_bound(p, g)
    values: list[TruthValue] = []
    found: Optional[tuple[TruthValue, Formula, int]] = None
    cur = g
    explored = 0
    for k in range(unfold_depth + 1):
        if k:
            if not has_calls(cur):
                break
            cur = unfold_all(p, cur)
        if formula_size(cur) > size_ceiling:
            raise RuntimeError(f"unfolding exceeds the size ceiling at round {k}")
        val = valuate(dfnf(cur), bound)
        explored += 1
        values.append(val)
        if val is not U and found is None:
            found = (val, cur, k)
            if not exhaustive:
                break
    max_k(values)  # raises Contradiction if both T and F occurred
    if found is None:
        return Denotation(U, DenoteStatus.UNKNOWN, None, unfold_depth, explored, values)
    val, witness, k = found
    status = DenoteStatus.EXACT_T if val is T else DenoteStatus.EXACT_F
    return Denotation(val, status, witness, k, explored, values)
