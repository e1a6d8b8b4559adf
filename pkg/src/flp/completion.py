"""Augmented Clark completion: rewrite any program into completed form.

The ten rewriting loops are applied literally, one clause at a time.  Every
loop picks the first offending clause in program order and the leftmost
offending position inside it, except the head-normalisation loop, which
works from the rightmost non-canonical parameter (that is the shape the
loop condition ``p(t1..tk, x(k+1)..xn)`` expects).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .kernel import (
    CUT,
    FALSE,
    TRUE,
    And,
    Call,
    Clause,
    Eq,
    Formula,
    If,
    NameSupply,
    Not,
    Or,
    Program,
    Substitution,
    Var,
    apply,
    exists_many,
    free_vars,
    term_vars,
)

STEPS = (2, 3, 4, 5, 6, 7, 8, 9, 10)


@dataclass(frozen=True)
class Violation:
    clause: int
    condition: int
    message: str


@dataclass
class CompletionRun:
    """The completed program plus per-step snapshots (step number -> program)."""

    program: Program
    snapshots: dict[int, Program] = field(default_factory=dict)
    rewrites: int = 0
    pool_prefix: str = "X"


def is_completed_form(p: Program) -> tuple[bool, list[Violation]]:
    violations: list[Violation] = []
    seen: dict[str, int] = {}
    for i, c in enumerate(p.clauses):
        params = [a.name for a in c.args if isinstance(a, Var)]
        if len(params) != len(c.args) or len(set(params)) != len(params):
            violations.append(Violation(i, 1, f"head parameters of {c.pred} are not distinct variables"))
        if c.pred in seen:
            violations.append(Violation(i, 2, f"{c.pred} already defined by clause {seen[c.pred]}"))
        else:
            seen[c.pred] = i
        if len(c.body) != 1 or c.body[0] is CUT:
            violations.append(Violation(i, 3, f"body of {c.pred} is not a single formula"))
        else:
            extra = [v for v in free_vars(c.body[0]) if v not in params]
            if extra:
                violations.append(
                    Violation(i, 4, f"body of {c.pred} has free variables {', '.join(extra)} not in the head")
                )
    return not violations, violations


def _choose_pool_prefix(p: Program) -> str:
    names = p.names()
    prefix = "X"
    while any(re.fullmatch(re.escape(prefix) + r"\d+", n) for n in names):
        prefix += "_"
    return prefix


def _body_free_vars(elems) -> list[str]:
    acc: dict = {}
    for e in elems:
        if e is not CUT:
            for v in free_vars(e):
                acc.setdefault(v)
    return list(acc)


def _subst_clause(c: Clause, sub: Substitution) -> Clause:
    args = tuple(sub.term(a) for a in c.args)
    body = tuple(e if e is CUT else apply(sub, e) for e in c.body)
    return Clause(c.pred, args, body)


class _Completer:
    def __init__(self, program: Program):
        self.prefix = _choose_pool_prefix(program)
        self.names = NameSupply(program.names())
        self.clauses: list[Clause] = list(program.clauses)
        self.rewrites = 0
        self.snapshots: dict[int, Program] = {}

    def x(self, i: int) -> str:
        return f"{self.prefix}{i}"

    def canonical(self, c: Clause) -> bool:
        return all(isinstance(a, Var) and a.name == self.x(i + 1) for i, a in enumerate(c.args))

    def snapshot(self, step: int) -> None:
        self.snapshots[step] = Program(tuple(self.clauses))

    def replace(self, i: int, c: Clause) -> None:
        self.clauses[i] = c
        self.rewrites += 1

    # step 0: undefined predicates get an explicit failing definition
    def define_missing(self) -> None:
        called = Program(tuple(self.clauses)).predicates()
        defined = {c.pred for c in self.clauses}
        for pred, arity in called.items():
            if pred not in defined:
                head = tuple(Var(self.x(i + 1)) for i in range(arity))
                self.clauses.append(Clause(pred, head, (FALSE,)))
                self.rewrites += 1

    def step2(self) -> None:
        while True:
            idx = next((i for i, c in enumerate(self.clauses) if not self.canonical(c)), None)
            if idx is None:
                return
            c = self.clauses[idx]
            n = len(c.args)
            k = max(i for i, a in enumerate(c.args) if not (isinstance(a, Var) and a.name == self.x(i + 1)))
            t = c.args[k]
            xk = self.x(k + 1)
            pool = {self.x(i + 1) for i in range(n)}
            if isinstance(t, Var) and t.name not in pool:
                self.replace(idx, _subst_clause(c, Substitution({t.name: Var(xk)})))
            else:
                args = c.args[:k] + (Var(xk),) + c.args[k + 1:]
                self.replace(idx, Clause(c.pred, args, (Eq(Var(xk), t),) + c.body))

    def step3(self) -> None:
        while True:
            found = None
            for i, c in enumerate(self.clauses):
                for j in range(len(c.body) - 1):
                    if c.body[j] is not CUT and c.body[j + 1] is not CUT:
                        found = (i, j)
                        break
                if found:
                    break
            if found is None:
                return
            i, j = found
            c = self.clauses[i]
            merged = And(c.body[j], c.body[j + 1])
            self.replace(i, Clause(c.pred, c.args, c.body[:j] + (merged,) + c.body[j + 2:]))

    def step4(self) -> None:
        for i, c in enumerate(self.clauses):
            if not c.body:
                self.replace(i, Clause(c.pred, c.args, (TRUE,)))

    def step5(self) -> None:
        for i, c in enumerate(self.clauses):
            body = list(c.body)
            j = 0
            changed = False
            while j < len(body) - 1:
                if body[j] is CUT and body[j + 1] is CUT:
                    del body[j + 1]
                    changed = True
                else:
                    j += 1
            if changed:
                self.replace(i, Clause(c.pred, c.args, tuple(body)))

    def step6(self) -> None:
        for i, c in enumerate(self.clauses):
            if c.body and c.body[0] is CUT:
                self.replace(i, Clause(c.pred, c.args, (TRUE,) + c.body))

    def step7(self) -> None:
        for i, c in enumerate(self.clauses):
            if c.body and c.body[-1] is CUT:
                self.replace(i, Clause(c.pred, c.args, c.body + (TRUE,)))

    def step8(self) -> None:
        while True:
            idx = next(
                (i for i, c in enumerate(self.clauses) if sum(e is CUT for e in c.body) >= 2), None
            )
            if idx is None:
                return
            c = self.clauses[idx]
            f, g = c.body[-3], c.body[-1]
            ys = _body_free_vars((f, g))
            q = self.names.fresh_pred("aux")
            rename = Substitution({y: Var(self.x(i + 1)) for i, y in enumerate(ys)})
            aux = Clause(
                q,
                tuple(Var(self.x(i + 1)) for i in range(len(ys))),
                (apply(rename, f), CUT, apply(rename, g)),
            )
            self.clauses.append(aux)
            call = Call(q, tuple(Var(y) for y in ys))
            self.replace(idx, Clause(c.pred, c.args, c.body[:-3] + (call,)))

    def _last_index(self) -> dict[str, int]:
        last: dict[str, int] = {}
        for i, c in enumerate(self.clauses):
            last[c.pred] = i
        return last

    def _closed_last(self, c: Clause) -> bool:
        if len(c.body) != 1:
            return False
        head = {a.name for a in c.args}
        return all(v in head for v in free_vars(c.body[0]))

    def step9(self) -> None:
        while True:
            todo = [i for i in self._last_index().values() if not self._closed_last(self.clauses[i])]
            if not todo:
                return
            i = min(todo)
            c = self.clauses[i]
            head = {a.name for a in c.args}
            if len(c.body) == 1:
                g = c.body[0]
                ys = [v for v in free_vars(g) if v not in head]
                body: Formula = exists_many(ys, g)
            else:
                f, _, g = c.body
                ys = [v for v in _body_free_vars((f, g)) if v not in head]
                body = If(tuple(ys), f, g)
            self.replace(i, Clause(c.pred, c.args, (body,)))

    def step10(self) -> None:
        while True:
            positions: dict[str, list[int]] = {}
            for i, c in enumerate(self.clauses):
                positions.setdefault(c.pred, []).append(i)
            multi = [idxs for idxs in positions.values() if len(idxs) > 1]
            if not multi:
                return
            idxs = min(multi, key=lambda ix: ix[0])
            i, j = idxs[-2], idxs[-1]
            c, last = self.clauses[i], self.clauses[j]
            head = {a.name for a in c.args}
            (h,) = last.body
            if len(c.body) == 1:
                g = c.body[0]
                ys = [v for v in free_vars(g) if v not in head]
                body: Formula = Or(exists_many(ys, g), h)
            else:
                f, _, g = c.body
                ys = [v for v in _body_free_vars((f, g)) if v not in head]
                body = Or(If(tuple(ys), f, g), And(Not(exists_many(ys, f)), h))
            self.clauses[i] = Clause(c.pred, c.args, (body,))
            del self.clauses[j]
            self.rewrites += 1

    def run(self) -> None:
        self.define_missing()
        for step in STEPS:
            getattr(self, f"step{step}")()
            self.snapshot(step)


def complete_with_snapshots(p: Program) -> CompletionRun:
    comp = _Completer(p)
    comp.run()
    return CompletionRun(Program(tuple(comp.clauses)), comp.snapshots, comp.rewrites, comp.prefix)


def complete(p: Program) -> Program:
    """acc(P): the completed form of ``p``."""
    return complete_with_snapshots(p).program


def rewrite_ceiling(p: Program) -> int:
    """Upper bound on the number of clause rewrites ``complete`` may perform."""
    total = 0
    for c in p.clauses:
        size = 1 + len(c.args) + len(c.body)
        for a in c.args:
            size += len(term_vars(a))
        total += 4 * size + 4
    return total + 4 * len(p.predicates())
