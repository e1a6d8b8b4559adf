"""Structural operational semantics evaluator.

A run computes the unique result of a judgement ``theta: alpha => rho`` by
building its derivation bottom-up.  For two-premise rules the determined
premise is evaluated first and its result picks the rule.  The machine is
iterative: pending second premises live on an explicit frame stack, and
every rule application (one derivation node) costs one unit of fuel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Union

from .completion import is_completed_form
from .kernel import (
    CUT,
    And,
    BodyElement,
    Call,
    Clause,
    Eq,
    Exists,
    Formula,
    If,
    NameSupply,
    Not,
    Or,
    Program,
    Substitution,
    Term,
    Var,
    _apply_term,
    all_names,
    apply,
    deep_recursion,
    free_vars,
    term_vars,
    unify,
)
from .syntax import ValidationError, check_goal_against


class SemanticsMode(enum.Enum):
    LIBERAL_GENERAL = "liberal-general"
    LIBERAL_COMPLETED = "liberal-completed"
    CONSERVATIVE = "conservative"
    PESSIMISTIC = "pessimistic"

    @property
    def fragments(self) -> tuple[str, ...]:
        return _FRAGMENTS[self]

    @property
    def conservative_choice(self) -> bool:
        return "ConservativeChoice" in self.fragments

    @property
    def needs_completed(self) -> bool:
        return self is not SemanticsMode.LIBERAL_GENERAL

    @classmethod
    def parse(cls, text: str) -> "SemanticsMode":
        for m in cls:
            if m.value == text or m.name.lower() == text.lower().replace("-", "_"):
                return m
        raise ValueError(f"unknown semantics {text!r}")


_FRAGMENTS = {
    SemanticsMode.LIBERAL_GENERAL: ("Basic", "LiberalChoice", "GeneralPredicates"),
    SemanticsMode.LIBERAL_COMPLETED: ("Basic", "LiberalChoice", "CompletedPredicates"),
    SemanticsMode.CONSERVATIVE: ("Basic", "ConservativeChoice", "CompletedPredicates"),
    SemanticsMode.PESSIMISTIC: ("Basic", "ConservativeChoice", "PessimisticPredicates"),
}


# ---------------------------------------------------------------------------
# Goal stacks


@dataclass(frozen=True, slots=True)
class Goal:
    formula: Formula


@dataclass(frozen=True, slots=True)
class Using:
    pred: str
    args: tuple[Term, ...]
    remaining: tuple[Clause, ...]


@dataclass(frozen=True, slots=True)
class Body:
    elems: tuple[BodyElement, ...]


StackElement = Union[Goal, Using, Body]
Stack = tuple[StackElement, ...]


def element_free_vars(e: StackElement, acc: Optional[dict] = None) -> dict:
    acc = {} if acc is None else acc
    match e:
        case Goal(f):
            for v in free_vars(f):
                acc.setdefault(v)
        case Using(_, args, remaining):
            for a in args:
                term_vars(a, acc)
            for c in remaining:
                for v in c.variables():
                    acc.setdefault(v)
        case Body(elems):
            for x in elems:
                if x is not CUT:
                    for v in free_vars(x):
                        acc.setdefault(v)
    return acc


def stack_free_vars(stack: Iterable[StackElement]) -> dict:
    acc: dict = {}
    for e in stack:
        element_free_vars(e, acc)
    return acc


def _apply_elem(sub: Substitution, e: StackElement) -> StackElement:
    match e:
        case Goal(f):
            return Goal(apply(sub, f))
        case Using(pred, args, remaining):
            # remaining clauses are renamed apart, so sub cannot touch them
            return Using(pred, tuple(sub.term(a) for a in args), remaining)
        case Body(elems):
            return Body(tuple(x if x is CUT else apply(sub, x) for x in elems))
    raise TypeError(e)


def apply_stack(sub: Substitution, stack: Stack) -> Stack:
    if not sub:
        return stack
    return tuple(_apply_elem(sub, e) for e in stack)


@dataclass(frozen=True)
class Judgement:
    subst: Substitution
    stack: Stack
    program: Program = field(default_factory=Program)


# ---------------------------------------------------------------------------
# Results


@dataclass(frozen=True)
class Success:
    answer: Substitution

    kind = "success"


@dataclass(frozen=True)
class _Tag:
    kind: str

    def __repr__(self) -> str:
        return self.kind.capitalize()


Fail = _Tag("fail")
Flounder = _Tag("flounder")
Diverge = _Tag("diverge")
FuelExhausted = _Tag("fuel-exhausted")

CompResult = Union[Success, _Tag]


def is_success(r: CompResult) -> bool:
    return isinstance(r, Success)


def _aborts(r: CompResult) -> bool:
    return r is Flounder or r is Diverge or r is FuelExhausted


# ---------------------------------------------------------------------------
# Traces


@dataclass
class TraceNode:
    rule: str
    subst: Substitution
    stack: Stack
    result: Optional[CompResult] = None
    children: list["TraceNode"] = field(default_factory=list)

    def walk(self):
        todo = [self]
        while todo:
            n = todo.pop()
            yield n
            todo.extend(reversed(n.children))


@dataclass
class Trace:
    root: Optional[TraceNode]
    result: CompResult
    steps: int


class InvariantBreach(AssertionError):
    """An internal consistency check of the evaluator failed."""


# ---------------------------------------------------------------------------
# Continuation frames.  ``node`` is the derivation node whose second premise
# (if any) the frame will launch; ``segment`` holds nodes of the enclosing
# tail chain that are still waiting for their result.


@dataclass
class _Frame:
    kind: str
    theta: Optional["_Chain"]
    rest: Stack
    node: Optional[TraceNode]
    segment: list
    extra: object = None
    extra2: object = None


# ---------------------------------------------------------------------------
# Substitutions inside the machine are kept as a persistent chain of the
# unifiers in the order they were found.  The chain resolves to the rule's
# idempotent substitution; resolving lazily keeps each Unif step proportional
# to the goal stack rather than to the accumulated substitution.


class _Chain:
    __slots__ = ("parent", "bindings")

    def __init__(self, parent: Optional["_Chain"], bindings: Mapping[str, Term]):
        self.parent = parent
        self.bindings = bindings


def _chain_of(sub: Substitution) -> Optional[_Chain]:
    return _Chain(None, dict(sub)) if sub else None


def _flatten(chain: Optional[_Chain], stop: Optional[_Chain] = None) -> dict:
    """Bindings from ``chain`` back to ``stop``, oldest first."""
    nodes = []
    while chain is not stop and chain is not None:
        nodes.append(chain.bindings)
        chain = chain.parent
    tri: dict = {}
    for b in reversed(nodes):
        tri.update(b)
    return tri


def _resolve(tri: dict, names: Optional[Iterable[str]] = None) -> Substitution:
    """The idempotent substitution denoted by the triangular bindings ``tri``."""
    done: dict[str, Term] = {}
    memo: dict = {}
    for root in (tri if names is None else [n for n in names if n in tri]):
        if root in done:
            continue
        todo = [root]
        while todo:
            v = todo[-1]
            if v in done:
                todo.pop()
                continue
            pending = [w for w in term_vars(tri[v]) if w in tri and w not in done]
            if pending:
                todo.extend(pending)
                continue
            todo.pop()
            done[v] = _apply_term(done, tri[v], memo)
    return Substitution(done)


def _export(theta) -> Substitution:
    return theta if isinstance(theta, Substitution) else _resolve(_flatten(theta))


_ABORT_LABELS = {"disj": "Disj/nofail", "not": "Not/sub", "if": "If/sub"}


class _Machine:
    def __init__(
        self,
        mode: SemanticsMode,
        program: Program,
        fuel: int,
        names: NameSupply,
        tracing: bool = False,
        debug: bool = False,
    ):
        self.mode = mode
        self.program = program
        self.fuel = fuel
        self.used = 0
        self.names = names
        self.tracing = tracing
        self.debug = debug
        self._defs = {}
        self._last_shown: tuple = (None, None)
        for c in program.clauses:
            self._defs.setdefault(c.pred, []).append(c)

    # -- helpers -----------------------------------------------------------

    def rename_clause(self, c: Clause) -> Clause:
        ren = Substitution({v: Var(self.names.fresh_var(v)) for v in c.variables()})
        return Clause(
            c.pred,
            tuple(ren.term(a) for a in c.args),
            tuple(e if e is CUT else apply(ren, e) for e in c.body),
        )

    def rename_binders(self, xs: tuple[str, ...]) -> Substitution:
        return Substitution({x: Var(self.names.fresh_var(x)) for x in xs})

    def check_invariant(self, theta, stack: Stack) -> None:
        theta = _export(theta)
        clash = stack_free_vars(stack).keys() & theta.keys()
        if clash:
            raise InvariantBreach(f"stack mentions bound variables {sorted(clash)}")
        if not theta.is_idempotent():
            raise InvariantBreach("current substitution is not idempotent")

    # -- main loop -----------------------------------------------------

    def run(self, theta: Substitution, stack: Stack) -> tuple[CompResult, Optional[TraceNode]]:
        frames: list[_Frame] = []
        segment: list = []
        root: Optional[TraceNode] = None
        cur: Optional[tuple] = (theta, stack, None)
        result: Optional[CompResult] = None

        while True:
            if cur is not None:
                theta, stack, parent = cur
                cur = None
                if self.fuel <= 0:
                    result = FuelExhausted
                else:
                    self.fuel -= 1
                    self.used += 1
                    if self.debug:
                        self.check_invariant(theta, stack)
                    node = None
                    if self.tracing:
                        node = TraceNode("?", _export(theta), stack)
                        segment.append(node)
                        if parent is None:
                            root = node
                        else:
                            parent.children.append(node)
                    out = self.step(theta, stack, node, frames, segment)
                    if isinstance(out, tuple):
                        if out[0] == "push":
                            segment = []
                            cur = out[1]
                        else:
                            cur = out
                        continue
                    result = out

            # a result is available for the current segment
            assert result is not None
            if segment:
                shown = self._shown(result)
                for n in segment:
                    n.result = shown
            if _aborts(result):
                for fr in reversed(frames):
                    if fr.node is not None and fr.node.rule.endswith("?"):
                        fr.node.rule = _ABORT_LABELS.get(fr.kind, fr.node.rule[:-1] + "sub")
                    for n in fr.segment:
                        n.result = result
                return result, root
            if not frames:
                return self._shown(result), root
            fr = frames.pop()
            segment = fr.segment
            nxt = self.resume(fr, result)
            if isinstance(nxt, tuple):
                cur = nxt
                result = None
            else:
                result = nxt

    # -- one rule application ------------------------------------------

    def _shown(self, r: CompResult) -> CompResult:
        if isinstance(r, Success) and not isinstance(r.answer, Substitution):
            # one success travels up through many frames unchanged
            if self._last_shown[0] is not r:
                self._last_shown = (r, Success(_export(r.answer)))
            return self._last_shown[1]
        return r

    def _label(self, node: Optional[TraceNode], rule: str) -> None:
        if node is not None:
            node.rule = rule

    def step(self, theta, stack, node, frames, segment):
        if not stack:
            self._label(node, "Success")
            return Success(theta)
        top, rest = stack[0], stack[1:]
        match top:
            case Goal(f):
                return self.step_goal(f, theta, rest, node, frames, segment)
            case Using():
                return self.step_using(top, theta, rest, node, frames, segment)
            case Body(elems):
                return self.step_body(elems, theta, rest, node, frames, segment)
        raise InvariantBreach(f"bad stack element {top!r}")

    def step_goal(self, f, theta, rest, node, frames, segment):
        match f:
            case Eq(s, t):
                sigma = unify(s, t)
                if sigma is None:
                    self._label(node, "Unif/fail")
                    return Fail
                self._label(node, "Unif/succ")
                theta2 = _Chain(theta, sigma) if sigma else theta
                return (theta2, apply_stack(sigma, rest), node)
            case And(b, c):
                self._label(node, "Conj")
                return (theta, (Goal(b), Goal(c)) + rest, node)
            case Or(b, c):
                self._label(node, "Disj/?")
                frames.append(_Frame("disj", theta, rest, node, segment, c))
                return ("push", (theta, (Goal(b),) + rest, node))
            case Exists(x, b):
                self._label(node, "Exists")
                ren = self.rename_binders((x,))
                return (theta, (Goal(apply(ren, b)),) + rest, node)
            case Not(b):
                if self.mode.conservative_choice and free_vars(b):
                    self._label(node, "Not/flounder")
                    return Flounder
                self._label(node, "Not/?")
                frames.append(_Frame("not", theta, rest, node, segment))
                return ("push", (theta, (Goal(b),), node))
            case If(xs, b, c):
                if self.mode.conservative_choice and any(v not in xs for v in free_vars(b)):
                    self._label(node, "If/flounder")
                    return Flounder
                self._label(node, "If/?")
                ren = self.rename_binders(xs)
                frames.append(_Frame("if", theta, rest, node, segment, apply(ren, c)))
                return ("push", (theta, (Goal(apply(ren, b)),), node))
            case Call(pred, args):
                return self.step_call(pred, args, theta, rest, node)
        raise InvariantBreach(f"bad formula {f!r}")

    def step_call(self, pred, args, theta, rest, node):
        self._label(node, "Pred")
        match self.mode:
            case SemanticsMode.PESSIMISTIC:
                return Diverge
            case SemanticsMode.LIBERAL_GENERAL:
                clauses = tuple(self.rename_clause(c) for c in self._defs.get(pred, ()))
                return (theta, (Using(pred, args, clauses),) + rest, node)
            case _:
                defs = self._defs.get(pred)
                if not defs:
                    raise ValidationError(f"call to undefined predicate {pred}/{len(args)}")
                (c,) = defs
                bind = Substitution({v.name: t for v, t in zip(c.args, args)})
                return (theta, (Goal(apply(bind, c.body[0])),) + rest, node)

    def step_using(self, top: Using, theta, rest, node, frames, segment):
        if not top.remaining:
            self._label(node, "Using/empty")
            return Fail
        c, others = top.remaining[0], top.remaining[1:]
        eqs = tuple(Goal(Eq(s, t)) for s, t in zip(top.args, c.args))
        alt = Using(top.pred, top.args, others)
        if c.has_cut:
            i = c.body.index(CUT)
            eta1, eta2 = c.body[:i], c.body[i + 1:]
            self._label(node, "Using/cut/?")
            frames.append(_Frame("using-cut", theta, rest, node, segment, eta2, alt))
            return ("push", (theta, eqs + tuple(Goal(e) for e in eta1), node))
        self._label(node, "Using/nocut/?")
        frames.append(_Frame("using-nocut", theta, rest, node, segment, None, alt))
        return ("push", (theta, eqs + tuple(Goal(e) for e in c.body) + rest, node))

    def step_body(self, elems, theta, rest, node, frames, segment):
        if CUT in elems:
            i = elems.index(CUT)
            eta1, eta2 = elems[:i], elems[i + 1:]
            self._label(node, "Body/cut/?")
            frames.append(_Frame("body-cut", theta, rest, node, segment, eta2))
            return ("push", (theta, tuple(Goal(e) for e in eta1), node))
        self._label(node, "Body/nocut")
        return (theta, tuple(Goal(e) for e in elems) + rest, node)

    # -- second premises -----------------------------------------------

    def resume(self, fr: _Frame, r: CompResult):
        node = fr.node
        ok = isinstance(r, Success)
        match fr.kind:
            case "disj":
                if ok:
                    self._label(node, "Disj/nofail")
                    return r
                self._label(node, "Disj/fail")
                return (fr.theta, (Goal(fr.extra),) + fr.rest, node)
            case "not":
                if ok:
                    self._label(node, "Not/succ")
                    return Fail
                self._label(node, "Not/fail")
                return (fr.theta, fr.rest, node)
            case "if":
                if not ok:
                    self._label(node, "If/fail")
                    return Fail
                self._label(node, "If/succ")
                theta2 = r.answer
                delta = _delta(fr.theta, theta2)
                then = apply(delta, fr.extra)
                rest = fr.rest if self.mode.conservative_choice else apply_stack(delta, fr.rest)
                return (theta2, (Goal(then),) + rest, node)
            case "using-cut":
                if not ok:
                    self._label(node, "Using/cut/fail")
                    return (fr.theta, (fr.extra2,) + fr.rest, node)
                self._label(node, "Using/cut/succ")
                return self._after_cut(fr, r.answer)
            case "using-nocut":
                if ok:
                    self._label(node, "Using/nocut/succ")
                    return r
                self._label(node, "Using/nocut/fail")
                return (fr.theta, (fr.extra2,) + fr.rest, node)
            case "body-cut":
                if not ok:
                    self._label(node, "Body/cut/fail")
                    return Fail
                self._label(node, "Body/cut/succ")
                return self._after_cut(fr, r.answer)
        raise InvariantBreach(fr.kind)

    def _after_cut(self, fr: _Frame, theta2: Substitution):
        delta = _delta(fr.theta, theta2)
        body = _apply_elem(delta, Body(fr.extra))
        return (theta2, (body,) + apply_stack(delta, fr.rest), fr.node)


def _delta(theta: Optional[_Chain], theta2: Optional[_Chain]) -> Substitution:
    """The part of ``theta2`` beyond ``theta``; applying it equals applying ``theta2``
    to anything free of ``dom(theta)``.  ``theta2`` always extends ``theta``, and
    bindings found after ``theta`` never mention its domain."""
    return _resolve(_flatten(theta2, theta))


# ---------------------------------------------------------------------------
# Entry points


def _validate(mode: SemanticsMode, program: Program) -> None:
    if mode.needs_completed:
        ok, violations = is_completed_form(program)
        if not ok:
            v = violations[0]
            raise ValidationError(
                f"{mode.value} semantics requires completed form "
                f"(clause {v.clause}: {v.message})"
            )


def _goal_has_cut(goal) -> bool:
    return goal is CUT or not isinstance(goal, (Eq, Call, And, Or, Not, Exists, If))


def _names_for(program: Program, extra: Iterable[str]) -> NameSupply:
    return NameSupply(set(program.names()) | set(extra))


@deep_recursion
def run_stack(
    mode: SemanticsMode,
    judgement: Judgement,
    fuel: int,
    *,
    debug: bool = False,
    tracing: bool = False,
) -> CompResult:
    _validate(mode, judgement.program)
    names: set = set(judgement.subst.keys()) | judgement.subst.range_vars()
    names |= set(stack_free_vars(judgement.stack))
    for e in judgement.stack:
        if isinstance(e, Goal):
            all_names(e.formula, names)
    m = _Machine(mode, judgement.program, fuel, _names_for(judgement.program, names), tracing, debug)
    result, _ = m.run(_chain_of(judgement.subst), tuple(judgement.stack))
    return result


def _prepare(mode: SemanticsMode, program: Optional[Program], goal: Formula) -> Program:
    program = program if program is not None else Program()
    if _goal_has_cut(goal):
        raise ValidationError("cut not allowed in goals")
    check_goal_against(program, goal)
    _validate(mode, program)
    return program


def _restrict(r: CompResult, goal: Formula) -> CompResult:
    if isinstance(r, Success):
        return Success(r.answer.restrict(free_vars(goal)))
    return r


@deep_recursion
def trace(
    mode: SemanticsMode,
    program: Optional[Program],
    goal: Formula,
    fuel: int,
    *,
    debug: bool = False,
) -> Trace:
    """Run ``goal`` and keep the whole derivation tree."""
    program = _prepare(mode, program, goal)
    m = _Machine(mode, program, fuel, _names_for(program, all_names(goal)), True, debug)
    result, root = m.run(None, (Goal(goal),))
    return Trace(root, _restrict(result, goal), m.used)


@deep_recursion
def run(
    mode: SemanticsMode,
    program: Optional[Program],
    goal: Formula,
    fuel: int,
    *,
    debug: bool = False,
) -> CompResult:
    """The result of ``(): goal => rho`` under ``mode``, answer restricted to the goal's variables."""
    program = _prepare(mode, program, goal)
    m = _Machine(mode, program, fuel, _names_for(program, all_names(goal)), False, debug)
    result, _ = m.run(None, (Goal(goal),))
    return _restrict(result, goal)


@deep_recursion
def run_counted(
    mode: SemanticsMode, program: Optional[Program], goal: Formula, fuel: int
) -> tuple[CompResult, int]:
    """Like :func:`run`, also returning the number of rule applications used."""
    program = _prepare(mode, program, goal)
    m = _Machine(mode, program, fuel, _names_for(program, all_names(goal)))
    result, _ = m.run(None, (Goal(goal),))
    return _restrict(result, goal), m.used


def format_trace(node: TraceNode, indent: int = 0) -> str:
    """Render a derivation with the root first and premises indented below it."""
    from .syntax import print_formula, print_subst, print_term

    def elem_text(e: StackElement) -> str:
        match e:
            case Goal(f):
                return print_formula(f)
            case Using(pred, args, remaining):
                call = f"{pred}({', '.join(print_term(a) for a in args)})" if args else pred
                return f"{call} using({len(remaining)} clauses)"
            case Body(elems):
                return "body(" + ", ".join("!" if x is CUT else print_formula(x) for x in elems) + ")"
        return repr(e)

    def result_text(r) -> str:
        if isinstance(r, Success):
            return print_subst(r.answer)
        return r.kind if r is not None else "?"

    lines = []
    todo = [(node, indent)]
    while todo:
        n, d = todo.pop()
        stack = ", ".join(elem_text(e) for e in n.stack) or "eps"
        lines.append(f"{'  ' * d}[{n.rule}] {print_subst(n.subst)}: {stack} => {result_text(n.result)}")
        todo.extend((c, d + 1) for c in reversed(n.children))
    return "\n".join(lines)
