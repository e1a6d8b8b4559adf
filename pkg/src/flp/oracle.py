"""Seeded generators and brute-force checkers behind the property suites."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import abstraction as ab
from .completion import complete, complete_with_snapshots, is_completed_form, rewrite_ceiling
from .dfnf import classify, dfnf, FormulaClass, potential_depth, random_strategy, rewrite_chain, rewrite_step
from .engine import (
    Fail,
    Flounder,
    FuelExhausted,
    SemanticsMode,
    Success,
    run,
)
from .kernel import (
    CUT,
    And,
    Call,
    Clause,
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
    alpha_equiv,
    answers_equivalent,
    apply,
    formula_size,
    free_vars,
    program_alpha_equiv,
)
from .syntax import parse_program, print_program

M = SemanticsMode

# ---------------------------------------------------------------------------
# Configuration


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    max_clauses: int = 3
    max_body_len: int = 3
    max_term_depth: int = 2
    max_formula_depth: int = 3
    mode_safe: bool = True
    n_preds: int = 4
    max_arity: int = 2
    cut_prob: float = 0.35
    neg_prob: float = 0.2
    recursion_prob: float = 0.15
    constants: tuple[str, ...] = ("0", "1", "a")
    functors: tuple[tuple[str, int], ...] = (("f", 1),)

    def __post_init__(self):
        for name in ("max_clauses", "max_body_len", "max_term_depth", "max_formula_depth", "n_preds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1")

    def rng(self, salt: int = 0) -> random.Random:
        return random.Random(self.seed * 1_000_003 + salt)

    def signature(self) -> dict[str, int]:
        sig = {c: 0 for c in self.constants}
        sig.update(dict(self.functors))
        return sig


# ---------------------------------------------------------------------------
# Terms


def _gen_term(cfg: GenConfig, rng: random.Random, vars_: list[str], depth: int, var_prob: float = 0.5) -> Term:
    if vars_ and rng.random() < var_prob:
        return Var(rng.choice(vars_))
    if depth <= 1 or rng.random() < 0.55:
        return Fn(rng.choice(cfg.constants))
    name, arity = rng.choice(cfg.functors)
    return Fn(name, tuple(_gen_term(cfg, rng, vars_, depth - 1, var_prob) for _ in range(arity)))


def _ground(cfg: GenConfig, rng: random.Random, depth: int) -> Term:
    return _gen_term(cfg, rng, [], depth, 0.0)


# ---------------------------------------------------------------------------
# Programs


@dataclass(frozen=True)
class _PredInfo:
    name: str
    arity: int
    pure: bool
    recursive: bool = False


def _pred_table(cfg: GenConfig, rng: random.Random) -> list[_PredInfo]:
    preds = []
    n_pure = max(1, cfg.n_preds // 2)
    for i in range(cfg.n_preds):
        arity = rng.choice([a for a in (1, 1, 2, 0) if a <= cfg.max_arity])
        recursive = arity >= 1 and rng.random() < cfg.recursion_prob
        preds.append(_PredInfo(f"p{i}", arity, i < n_pure, recursive))
    return preds


def _gen_literal(cfg, rng, pred: _PredInfo, callees: list[_PredInfo], vars_: list[str], head_vars: list[str]):
    roll = rng.random()
    if callees and roll < 0.5:
        q = rng.choice(callees)
        pool = head_vars if (not q.pure and head_vars) else vars_
        return Call(q.name, _call_args(cfg, rng, q, pool))
    if not pred.pure and roll < 0.5 + cfg.neg_prob and head_vars:
        inner = Eq(Var(rng.choice(head_vars)), _gen_term(cfg, rng, head_vars, 2, 0.2))
        return Not(inner)
    if roll < 0.9:
        return Eq(Var(rng.choice(vars_)), _gen_term(cfg, rng, vars_, cfg.max_term_depth, 0.3))
    left = Eq(Var(rng.choice(vars_)), _ground(cfg, rng, 2))
    right = Eq(Var(rng.choice(vars_)), _ground(cfg, rng, 2))
    return Or(left, right)


def _call_args(cfg, rng, q: _PredInfo, pool: list[str]) -> tuple[Term, ...]:
    """Arguments for a call to ``q``; a recursive predicate gets a ground first
    argument so its structural recursion terminates."""
    args = [_gen_term(cfg, rng, pool, 2, 0.7) for _ in range(q.arity)]
    if q.recursive:
        args[0] = _ground(cfg, rng, cfg.max_term_depth + 1)
    return tuple(args)


def _gen_clause(cfg, rng, pred: _PredInfo, callees: list[_PredInfo]) -> Clause:
    pool = ["X", "Y", "Z"][: max(1, pred.arity + 1)]
    args = tuple(_gen_term(cfg, rng, pool, cfg.max_term_depth, 0.6) for _ in range(pred.arity))
    head_vars = sorted({v.name for a in args for v in _term_var_objs(a)})
    body: list = []
    for _ in range(rng.randint(0, cfg.max_body_len)):
        if not pred.pure and body and rng.random() < cfg.cut_prob and body[-1] is not CUT:
            body.append(CUT)
        body.append(_gen_literal(cfg, rng, pred, callees, pool, head_vars))
    if not pred.pure and rng.random() < cfg.cut_prob / 2:
        body.insert(0, CUT) if rng.random() < 0.3 else body.append(CUT)
    return Clause(pred.name, args, tuple(body))


def _term_var_objs(t: Term):
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from _term_var_objs(a)


def _recursive_clause(cfg, rng, pred: _PredInfo) -> Clause:
    rest = tuple(Var(f"Y{i}") for i in range(1, pred.arity))
    name, arity = rng.choice(cfg.functors)
    inner = Var("X")
    head_arg = Fn(name, (inner,) + tuple(Fn(cfg.constants[0]) for _ in range(arity - 1)))
    return Clause(pred.name, (head_arg,) + rest, (Call(pred.name, (inner,) + rest),))


def gen_program(cfg: GenConfig) -> Program:
    """A general program over predicates p0..p(n-1); each calls only lower-numbered
    predicates, apart from occasional structurally decreasing self-recursion.  The
    lower half are pure (no cut, no negation) and call only pure predicates."""
    rng = cfg.rng(1)
    preds = _pred_table(cfg, rng)
    clauses: list[Clause] = []
    for i, pred in enumerate(preds):
        callees = [q for q in preds[:i] if q.pure or not pred.pure]
        n = rng.randint(1, cfg.max_clauses)
        own = [_gen_clause(cfg, rng, pred, callees) for _ in range(n)]
        if pred.recursive:
            own.insert(rng.randint(0, len(own)), _recursive_clause(cfg, rng, pred))
        clauses.extend(own)
    return Program(tuple(clauses))


def _pred_infos(p: Program) -> list[_PredInfo]:
    out = []
    impure = set()
    for c in p.clauses:
        for e in c.body:
            if e is CUT or any(isinstance(g, (Not, If)) for g in _subs(e)):
                impure.add(c.pred)
    changed = True
    calls: dict[str, set] = {}
    for c in p.clauses:
        for e in c.body:
            if e is not CUT:
                calls.setdefault(c.pred, set()).update(g.pred for g in _subs(e) if isinstance(g, Call))
    while changed:
        changed = False
        for pred, callees in calls.items():
            if pred not in impure and callees & impure:
                impure.add(pred)
                changed = True
    for name, arity in p.predicates().items():
        out.append(_PredInfo(name, arity, name not in impure, name in calls.get(name, ())))
    return out


def _subs(f: Formula):
    from .kernel import subformulas

    return subformulas(f)


# ---------------------------------------------------------------------------
# Goals


class _GoalGen:
    def __init__(self, cfg: GenConfig, rng: random.Random, preds: list[_PredInfo], free: list[str]):
        self.cfg = cfg
        self.rng = rng
        self.preds = preds
        self.free = free
        self.counter = itertools.count()

    def fresh(self) -> str:
        return f"V{next(self.counter)}"

    def term(self, pool: list[str], var_prob: float = 0.5) -> Term:
        return _gen_term(self.cfg, self.rng, pool, self.cfg.max_term_depth, var_prob)

    def closed_cond(self, pool: list[str], depth: int) -> Formula:
        """A formula whose free variables are all in ``pool``."""
        rng = self.rng
        if pool and rng.random() < 0.6:
            x = rng.choice(pool)
            return Eq(Var(x), _ground(self.cfg, rng, 2))
        if self.preds and rng.random() < 0.5:
            q = rng.choice(self.preds)
            return Call(q.name, _call_args(self.cfg, rng, q, pool))
        return Eq(_ground(self.cfg, rng, 2), _ground(self.cfg, rng, 2))

    def literal(self, grounded: set, depth: int) -> tuple[Formula, set]:
        cfg, rng = self.cfg, self.rng
        roll = rng.random()
        loose = list(self.free)
        safe = sorted(grounded)
        if roll < 0.4 and self.preds:
            q = rng.choice(self.preds)
            pool = loose if (q.pure or not cfg.mode_safe) else safe
            return Call(q.name, _call_args(cfg, rng, q, pool)), grounded
        if roll < 0.6:
            x = rng.choice(loose)
            t = _ground(cfg, rng, cfg.max_term_depth) if rng.random() < 0.6 else self.term(loose, 0.3)
            bound_now = set(free_vars(Eq(t, t))) <= grounded
            return Eq(Var(x), t), (grounded | {x}) if bound_now else grounded
        if roll < 0.72:
            pool = safe if cfg.mode_safe else loose
            return Not(self.closed_cond(pool, depth - 1)), grounded
        if roll < 0.82 and depth > 1:
            a, ga = self.literal(grounded, depth - 1)
            b, gb = self.literal(grounded, depth - 1)
            return Or(a, b), ga & gb
        if roll < 0.92:
            z = self.fresh()
            bind = Eq(Var(z), _ground(cfg, rng, cfg.max_term_depth))
            inner_pool = (safe if cfg.mode_safe else loose) + [z]
            body = And(bind, Not(self.closed_cond(inner_pool, depth - 1))) if rng.random() < 0.5 else bind
            if rng.random() < 0.5 and self.free:
                body = And(body, Eq(Var(rng.choice(self.free)), Var(z)))
            return Exists(z, body), grounded
        z = self.fresh()
        pool = (safe if cfg.mode_safe else loose) + [z]
        cond = And(Eq(Var(z), _ground(cfg, rng, 2)), self.closed_cond(pool, depth - 1)) if rng.random() < 0.5 else self.closed_cond(pool, depth - 1)
        if rng.random() < 0.5:
            cond = Or(cond, Eq(Var(z), _ground(cfg, rng, 2)))
        then, g2 = self.literal(grounded, depth - 1)
        if rng.random() < 0.5 and self.free:
            then = And(Eq(Var(rng.choice(self.free)), Var(z)), then)
        return If((z,), cond, then), g2


def gen_goal(cfg: GenConfig, p: Program, salt: int = 0) -> Formula:
    """A goal with one or two free variables over the predicates of ``p``."""
    rng = cfg.rng(2 + 7919 * salt)
    free = ["X"] if rng.random() < 0.6 else ["X", "Y"]
    gen = _GoalGen(cfg, rng, _pred_infos(p), free)
    grounded: set = set()
    parts = []
    for _ in range(rng.randint(1, 3)):
        lit, grounded = gen.literal(grounded, cfg.max_formula_depth)
        parts.append(lit)
    goal = parts[0]
    for lit in parts[1:]:
        goal = And(goal, lit)
    missing = [x for x in free if x not in free_vars(goal)]
    for x in missing:
        pure = [q for q in gen.preds if q.pure and q.arity >= 1 and not q.recursive]
        if pure and rng.random() < 0.7:
            q = rng.choice(pure)
            args = (Var(x),) + tuple(gen.term(free, 0.5) for _ in range(q.arity - 1))
            goal = And(Call(q.name, args), goal)
        else:
            goal = And(goal, Eq(Var(x), gen.term(free, 0.2)))
    return goal


# ---------------------------------------------------------------------------
# Closed formulas for the rewriting and valuation suites


def gen_closed_formula(cfg: GenConfig, salt: int = 0, allow_if: bool = True) -> Formula:
    """A closed formula with calls, negations, disjunctions, existentials and ifs.
    Every existential variable is pinned by an equation before any negation or
    if-condition can see it, so pessimistic runs rarely flounder."""
    rng = cfg.rng(3 + 104729 * salt)
    counter = itertools.count()
    preds = [("q", 0), ("r", 1), ("s", 1)]

    def term(scope: list[str]) -> Term:
        return _gen_term(cfg, rng, scope, cfg.max_term_depth, 0.4)

    def atom(scope: list[str]) -> Formula:
        if rng.random() < 0.35:
            name, arity = rng.choice(preds)
            return Call(name, tuple(term(scope) for _ in range(arity)))
        return Eq(term(scope), term(scope))

    def go(depth: int, scope: list[str]) -> Formula:
        if depth <= 1:
            return atom(scope)
        roll = rng.random()
        if roll < 0.25:
            return And(go(depth - 1, scope), go(depth - 1, scope))
        if roll < 0.45:
            return Or(go(depth - 1, scope), go(depth - 1, scope))
        if roll < 0.58:
            return Not(go(depth - 1, scope))
        if roll < 0.78 or not allow_if:
            z = f"Z{next(counter)}"
            bind = Eq(Var(z), _ground(cfg, rng, cfg.max_term_depth))
            return Exists(z, And(bind, go(depth - 1, scope + [z])))
        z = f"Z{next(counter)}"
        cond = And(Eq(Var(z), _ground(cfg, rng, cfg.max_term_depth)), go(depth - 2, scope + [z])) if depth > 2 else Eq(Var(z), _ground(cfg, rng, 2))
        if rng.random() < 0.4:
            cond = Or(cond, Eq(Var(z), _ground(cfg, rng, 2)))
        return If((z,), cond, go(depth - 1, scope + [z]))

    return go(rng.randint(2, cfg.max_formula_depth + 1), [])


def gen_ground_o_formula(cfg: GenConfig, salt: int = 0) -> Formula:
    """A closed outer-disjunction formula.  Existential witnesses are pinned by
    equations whose ground side has depth <= max_term_depth."""
    rng = cfg.rng(4 + 15485863 * salt)
    counter = itertools.count()
    preds = [("q", 0), ("r", 1)]

    def term(scope: list[str], depth: int) -> Term:
        return _gen_term(cfg, rng, scope, depth, 0.4)

    def atom(scope: list[str]) -> Formula:
        if rng.random() < 0.25:
            name, arity = rng.choice(preds)
            return Call(name, tuple(term(scope, 2) for _ in range(arity)))
        return Eq(term(scope, cfg.max_term_depth), term(scope, cfg.max_term_depth))

    def binder(scope: list[str]) -> tuple[str, Formula]:
        z = f"Z{next(counter)}"
        roll = rng.random()
        if roll < 0.6:
            bind = Eq(Var(z), _ground(cfg, rng, cfg.max_term_depth))
        elif roll < 0.8:
            name, arity = rng.choice(cfg.functors)
            wrapped = Fn(name, (Var(z),) + tuple(Fn("0") for _ in range(arity - 1)))
            bind = Eq(wrapped, _ground(cfg, rng, cfg.max_term_depth))
        else:
            bind = Eq(_ground(cfg, rng, cfg.max_term_depth), Var(z))
        return z, bind

    def n(depth: int, scope: list[str]) -> Formula:
        if depth <= 1:
            return atom(scope)
        roll = rng.random()
        if roll < 0.35:
            return And(n(depth - 1, scope), n(depth - 1, scope))
        if roll < 0.6:
            return Not(o(depth - 1, scope))
        if roll < 0.75:
            z = f"Z{next(counter)}"
            return Exists(z, n(depth - 1, scope))  # vacuous binder
        z, bind = binder(scope)
        return Exists(z, And(bind, n(depth - 1, scope + [z])))

    def o(depth: int, scope: list[str]) -> Formula:
        if depth > 1 and rng.random() < 0.35:
            return Or(o(depth - 1, scope), o(depth - 1, scope))
        return n(depth, scope)

    f = o(rng.randint(2, cfg.max_formula_depth + 1), [])
    assert classify(f) is not FormulaClass.NEITHER and not free_vars(f)
    return f


# ---------------------------------------------------------------------------
# Witness properties


@dataclass
class Verdict:
    status: str  # "ok" | "skipped" | "violation"
    reason: str = ""
    result: object = None
    counterexample: Optional[Formula] = None

    @property
    def ok(self) -> bool:
        return self.status != "violation"


def _ground_with_zero(f: Formula) -> Formula:
    return apply(Substitution({v: Fn("0") for v in free_vars(f)}), f)


def instances(g: Formula, bound: ab.UniverseBound, limit: int = 20_000):
    """Every grounding of the free variables of ``g`` over the bounded universe."""
    xs = free_vars(g)
    terms = ab.universe(bound)
    if len(terms) ** len(xs) > limit:
        raise RuntimeError(f"{len(terms) ** len(xs)} instances exceed the limit {limit}")
    for values in itertools.product(terms, repeat=len(xs)):
        sub = Substitution(dict(zip(xs, values)))
        yield sub, apply(sub, g)


def check_witness(
    p: Program,
    g: Formula,
    fuel: int,
    bound: Optional[ab.UniverseBound] = None,
    mode: SemanticsMode = M.CONSERVATIVE,
    slack: int = 2,
) -> Verdict:
    """Check both witness properties for one (program, goal) pair."""
    bound = bound or ab.UniverseBound.for_goal(g, p, max_depth=3)
    r = run(mode, p, g, fuel)
    if isinstance(r, Success):
        inst = _ground_with_zero(apply(r.answer, g))
        r2 = run(mode, p, inst, slack * fuel)
        if isinstance(r2, Success):
            return Verdict("ok", "success witnessed", r)
        return Verdict("violation", f"success without succeeding instance ({r2.kind})", r, inst)
    if r is Fail:
        for _, inst in instances(g, bound):
            r2 = run(mode, p, inst, slack * fuel)
            if r2 is not Fail:
                return Verdict("violation", f"failure but an instance gives {r2.kind}", r, inst)
        return Verdict("ok", "all instances fail", r)
    return Verdict("skipped", r.kind, r)


# ---------------------------------------------------------------------------
# Unfolding oracle


def brute_unfold_pessimistic(p: Program, g: Formula, k: int, ceiling: int = 5000) -> dict:
    """Pessimistic outcome of every unfolding reachable by at most ``k`` single unfoldings."""
    g = ab.close(g)
    table: dict = {g: ab.pessimistic_outcome(g)}
    frontier = [g]
    for _ in range(k):
        nxt = []
        for f in frontier:
            for h in ab.unfold_once(p, f):
                if h not in table:
                    table[h] = ab.pessimistic_outcome(h)
                    nxt.append(h)
                    if len(table) > ceiling:
                        raise RuntimeError(f"more than {ceiling} unfoldings")
        frontier = nxt
    return table


# ---------------------------------------------------------------------------
# Suites


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    first_counterexample: Optional[str] = None
    notes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def record(self, verdict: str, detail: Callable[[], str] = lambda: "") -> None:
        self.cases += 1
        if verdict == "ok":
            self.passed += 1
        elif verdict == "skipped":
            self.skipped += 1
        else:
            self.failed += 1
            if self.first_counterexample is None:
                self.first_counterexample = detail()

    def summary(self) -> str:
        head = f"{self.name}: {self.passed} passed, {self.failed} failed, {self.skipped} skipped of {self.cases}"
        if self.first_counterexample:
            head += f"\n  first counterexample: {self.first_counterexample}"
        return head


def witness_cases(seed: int, cases: int):
    for i in range(cases):
        cfg = GenConfig(seed=seed * 100_003 + i)
        p = gen_program(cfg)
        g = gen_goal(cfg, p)
        yield i, p, g


def witness_suite(
    seed: int = 0,
    cases: int = 1000,
    fuel: int = 10_000,
    term_depth: int = 3,
    mode: SemanticsMode = M.CONSERVATIVE,
) -> SuiteReport:
    from .syntax import print_formula

    rep = SuiteReport(f"witness[{mode.value}]")
    for i, p, g in witness_cases(seed, cases):
        acc = complete(p)
        bound = ab.UniverseBound.for_goal(g, acc, max_depth=term_depth)
        v = check_witness(acc, g, fuel, bound, mode)
        rep.record(
            v.status,
            lambda: f"case {i}: {print_formula(g)} -> {v.reason}; instance {print_formula(v.counterexample) if v.counterexample else '-'}",
        )
    return rep


def _same_answer(a, b, goal: Formula) -> bool:
    if isinstance(a, Success) and isinstance(b, Success):
        return answers_equivalent(a.answer, b.answer, free_vars(goal))
    return a is b


def _describe(i, p, g, a, b) -> str:
    from .syntax import print_formula

    return f"case {i}: goal {print_formula(g)}; {a!r} vs {b!r}\n{print_program(p)}"


def equivalence_suites(seed: int = 0, cases: int = 500, fuel: int = 10_000, slack: int = 4) -> list[SuiteReport]:
    general_vs_completed = SuiteReport("liberal-general vs liberal-completed")
    preservation = SuiteReport("completion result preservation")
    cons_to_lib = SuiteReport("conservative -> liberal correspondence")
    lib_to_cons = SuiteReport("liberal -> conservative correspondence")
    for i in range(cases):
        cfg = GenConfig(seed=seed * 100_003 + i, mode_safe=False)
        p = gen_program(cfg)
        g = gen_goal(cfg, p)
        acc = complete(p)

        # (a) completed-form programs under both liberal semantics
        lc = run(M.LIBERAL_COMPLETED, acc, g, fuel)
        lg = run(M.LIBERAL_GENERAL, acc, g, slack * fuel)
        if lc is FuelExhausted or lg is FuelExhausted:
            general_vs_completed.record("skipped")
        else:
            general_vs_completed.record("ok" if _same_answer(lc, lg, g) else "violation", lambda: _describe(i, acc, g, lc, lg))

        # (b) completion preserves results
        before = run(M.LIBERAL_GENERAL, p, g, fuel)
        after = run(M.LIBERAL_GENERAL, acc, g, slack * fuel)
        if before is FuelExhausted or after is FuelExhausted:
            preservation.record("skipped")
        else:
            preservation.record("ok" if _same_answer(before, after, g) else "violation", lambda: _describe(i, p, g, before, after))

        # (c) conservative versus liberal completed
        cons = run(M.CONSERVATIVE, acc, g, fuel)
        if isinstance(cons, Success) or cons is Fail:
            lib = run(M.LIBERAL_COMPLETED, acc, g, fuel)
            cons_to_lib.record("ok" if _same_answer(cons, lib, g) else "violation", lambda: _describe(i, acc, g, cons, lib))
        else:
            cons_to_lib.record("skipped")
        if isinstance(lc, Success) or lc is Fail:
            ok = cons is Flounder or _same_answer(cons, lc, g)
            if cons is FuelExhausted:
                lib_to_cons.record("skipped")
            else:
                lib_to_cons.record("ok" if ok else "violation", lambda: _describe(i, acc, g, lc, cons))
        else:
            lib_to_cons.record("skipped")
    return [general_vs_completed, preservation, cons_to_lib, lib_to_cons]


def _pess(f: Formula, fuel: int = 1_000_000):
    return run(M.PESSIMISTIC, Program(), f, fuel)


def dfnf_suites(seed: int = 0, cases: int = 500, strategies: int = 5) -> list[SuiteReport]:
    from .syntax import print_formula

    pd_rep = SuiteReport("potential depth never increases")
    nf_rep = SuiteReport(f"unique normal form over {strategies} random strategies")
    o_rep = SuiteReport("normal forms are outer-disjunction")
    pres_rep = SuiteReport("pessimistic result preserved by dfnf")
    for i in range(cases):
        cfg = GenConfig(seed=seed * 100_003 + i)
        f = gen_closed_formula(cfg)
        cur, bad = f, None
        while (step := rewrite_step(cur)) is not None:
            nxt, redex = step
            if bad is None and potential_depth(nxt) > potential_depth(cur):
                bad = f"{print_formula(cur)} --{redex.rule}--> {print_formula(nxt)}: pd {potential_depth(cur)} -> {potential_depth(nxt)}"
            cur = nxt
        pd_rep.record("ok" if bad is None else "violation", lambda: bad)
        nf = dfnf(f)
        rng = random.Random(seed * 31 + i)
        same = all(alpha_equiv(_nf_with(f, random_strategy(rng)), nf) for _ in range(strategies))
        same = same and alpha_equiv(cur, nf)
        nf_rep.record("ok" if same else "violation", lambda: print_formula(f))
        o_rep.record("ok" if classify(nf) is not FormulaClass.NEITHER else "violation", lambda: print_formula(nf))
        r1 = _pess(f)
        if r1 is Flounder:
            pres_rep.record("skipped")
            continue
        r2 = _pess(nf)
        pres_rep.record("ok" if _same_answer(r1, r2, f) else "violation", lambda: f"{print_formula(f)}: {r1!r} vs {r2!r}")
    return [pd_rep, nf_rep, o_rep, pres_rep]


def _nf_with(f: Formula, strategy) -> Formula:
    chain = rewrite_chain(f, strategy)
    return chain[-1][0] if chain else f


def raising_suite(seed: int = 0, cases: int = 500, term_depth: Optional[int] = None) -> SuiteReport:
    from .syntax import print_formula

    rep = SuiteReport("valuation equals pessimistic outcome")
    for i in range(cases):
        cfg = GenConfig(seed=seed * 100_003 + i)
        f = gen_ground_o_formula(cfg)
        bound = ab.UniverseBound.of(cfg.signature(), term_depth or cfg.max_term_depth + 1)
        v = ab.valuate(f, bound)
        try:
            o = ab.pessimistic_outcome(f)
        except ab.OutsideCharacterizedClass:
            rep.record("skipped")
            continue
        rep.record("ok" if v is o else "violation", lambda: f"{print_formula(f)}: v={v} outcome={o}")
    return rep


def denotation_suite(
    seed: int = 0, cases: int = 200, unfold_depth: int = 2, term_depth: int = 3, fuel: int = 10_000
) -> SuiteReport:
    """Conservative Success/Fail must never be contradicted by the denotation of
    the closed goal at any unfolding depth up to ``unfold_depth``."""
    from .syntax import print_formula

    rep = SuiteReport("denotation never contradicts conservative results")
    reached = 0
    for i, p, g in witness_cases(seed, cases):
        acc = complete(p)
        r = run(M.CONSERVATIVE, acc, g, fuel)
        if not (isinstance(r, Success) or r is Fail):
            rep.record("skipped")
            continue
        expected = ab.T if isinstance(r, Success) else ab.F
        bound = ab.UniverseBound.for_goal(g, acc, max_depth=term_depth)
        try:
            d = ab.denote(acc, g, unfold_depth, bound, exhaustive=True, size_ceiling=4000)
        except ab.Contradiction:
            rep.record("violation", lambda: f"case {i}: {print_formula(g)} denotes both T and F")
            continue
        except RuntimeError:
            rep.record("skipped")
            continue
        reached += d.value is expected
        ok = d.value in (expected, ab.U)
        rep.record("ok" if ok else "violation", lambda: f"case {i}: {print_formula(g)}: {r!r} but denotation {d.value}")
    rep.notes["defined and matching"] = reached
    return rep


def completion_suite(seed: int = 0, cases: int = 500) -> SuiteReport:
    rep = SuiteReport("completion formation and termination")
    for i in range(cases):
        cfg = GenConfig(seed=seed * 100_003 + i, mode_safe=False)
        p = gen_program(cfg)
        comp = complete_with_snapshots(p)
        ok, violations = is_completed_form(comp.program)
        within = comp.rewrites <= rewrite_ceiling(p)
        reparsed = parse_program(print_program(comp.program))
        round_trip = program_alpha_equiv(reparsed, comp.program)
        good = ok and within and round_trip
        rep.record("ok" if good else "violation", lambda: f"case {i}: formed={ok} within={within} round_trip={round_trip}\n{print_program(p)}")
    return rep


def pessimistic_bound_suite(seed: int = 0, cases: int = 500, factor: int = 4) -> SuiteReport:
    """Pessimistic runs finish within ``factor`` times the formula size.  Goals
    from both goal generators are used; flounder counts against mode-safe goals only."""
    from .engine import run_counted
    from .syntax import print_formula

    rep = SuiteReport(f"pessimistic runs finish within {factor} x size")
    worst = 0.0
    for i in range(cases):
        for safe in (True, False):
            cfg = GenConfig(seed=seed * 100_003 + i, mode_safe=safe)
            p = complete(gen_program(cfg))
            goals = [gen_goal(cfg, p)]
            if safe:
                goals += [gen_closed_formula(cfg), gen_ground_o_formula(cfg)]
            for g in goals:
                size = formula_size(g)
                r, used = run_counted(M.PESSIMISTIC, p, g, factor * size)
                bad = r is FuelExhausted or (safe and r is Flounder)
                if r is not FuelExhausted:
                    worst = max(worst, used / size)
                rep.record("violation" if bad else "ok", lambda: f"case {i}: {print_formula(g)} -> {r!r} (size {size})")
    rep.notes["worst steps per node"] = round(worst, 2)
    return rep


SUITES = {
    "witness": lambda seed, cases, **kw: [witness_suite(seed, cases, kw.get("fuel", 10_000), kw.get("term_depth", 3))],
    "equivalence": lambda seed, cases, **kw: equivalence_suites(seed, cases, kw.get("fuel", 10_000)),
    "dfnf": lambda seed, cases, **kw: dfnf_suites(seed, cases),
    "raising": lambda seed, cases, **kw: [
        raising_suite(seed, cases, kw.get("term_depth")),
        denotation_suite(seed, cases, kw.get("unfold_depth") or 2, kw.get("term_depth") or 3, kw.get("fuel", 10_000)),
    ],
    "completion": lambda seed, cases, **kw: [completion_suite(seed, cases)],
    "pessimistic": lambda seed, cases, **kw: [pessimistic_bound_suite(seed, cases)],
}
