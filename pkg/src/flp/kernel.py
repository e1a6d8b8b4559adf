"""Terms, formulas, clauses, substitutions and unification.

Everything here is immutable.  Variables are identified by name; names
produced by :class:`NameSupply` carry a ``#n`` suffix so they can never
clash with names written by a user (the lexer accepts ``#`` only after
the first character, and the supply skips anything already reserved).
"""

from __future__ import annotations

import functools
import itertools
import re
import sys
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional, Union


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Fn:
    """A compound term; constants are 0-ary compounds."""

    name: str
    args: tuple["Term", ...] = ()
    # groundness, filled in lazily by is_ground
    _ground: Optional[bool] = field(default=None, init=False, repr=False, compare=False)

    @property
    def arity(self) -> int:
        return len(self.args)


Term = Union[Var, Fn]

ZERO = Fn("0")
ONE = Fn("1")
NIL = Fn("nil")


def cons(head: Term, tail: Term) -> Fn:
    return Fn("cons", (head, tail))


def mklist(items: Iterable[Term], tail: Term = NIL) -> Term:
    result = tail
    for item in reversed(list(items)):
        result = cons(item, result)
    return result


def term_vars(t: Term, acc: Optional[dict] = None) -> dict:
    """Variables of ``t`` in first-occurrence order (as dict keys)."""
    if acc is None:
        acc = {}
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var):
            acc.setdefault(cur.name)
        elif not cur._ground:
            stack.extend(reversed(cur.args))
    return acc


def is_ground(t: Term) -> bool:
    """Cached on each compound, so repeated calls on a shared term are O(1)."""
    if isinstance(t, Var):
        return False
    if t._ground is not None:
        return t._ground
    todo: list[tuple[Fn, bool]] = [(t, False)]
    while todo:
        u, expanded = todo.pop()
        if u._ground is not None:
            continue
        if expanded:
            flag = all(isinstance(a, Fn) and a._ground for a in u.args)
            object.__setattr__(u, "_ground", flag)
        else:
            todo.append((u, True))
            todo.extend((a, False) for a in u.args if isinstance(a, Fn) and a._ground is None)
    return t._ground


def term_depth(t: Term) -> int:
    """Constants and variables have depth 1."""
    best = 0
    todo = [(t, 1)]
    while todo:
        u, d = todo.pop()
        best = max(best, d)
        if isinstance(u, Fn):
            todo.extend((a, d + 1) for a in u.args)
    return best


def occurs(name: str, t: Term) -> bool:
    todo = [t]
    while todo:
        u = todo.pop()
        if isinstance(u, Var):
            if u.name == name:
                return True
        elif not u._ground:
            todo.extend(u.args)
    return False


# Very deep terms (from long runaway recursions) can exceed the interpreter's
# recursion limit in equality, hashing or printing.  Such calls are retried on
# a worker thread with a large stack and a raised limit.

_DEEP_STACK = 512 * 1024 * 1024
_DEEP_LIMIT = 400_000


def _run_deep(fn, args, kwargs):
    box: dict = {}

    def target():
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as exc:  # re-raised on the calling thread
            box["error"] = exc

    old_size = threading.stack_size()
    old_limit = sys.getrecursionlimit()
    threading.stack_size(_DEEP_STACK)
    sys.setrecursionlimit(max(old_limit, _DEEP_LIMIT))
    try:
        worker = threading.Thread(target=target)
        worker.start()
        worker.join()
    finally:
        threading.stack_size(old_size)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box["value"]


def deep_recursion(fn):
    """Retry ``fn`` on a big-stack thread if it hits the recursion limit."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except RecursionError:
            return _run_deep(fn, args, kwargs)

    return wrapper


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True, slots=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class Call:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Not:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True, slots=True)
class If:
    """``if[vars](cond, then)``: commit ``then`` to the first answer of ``cond``."""

    vars: tuple[str, ...]
    cond: "Formula"
    then: "Formula"


Formula = Union[Eq, Call, And, Or, Not, Exists, If]

TRUE = Eq(ZERO, ZERO)
FALSE = Eq(ZERO, ONE)


class _Cut:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "CUT"

    def __reduce__(self):
        return (_Cut, ())


CUT = _Cut()
BodyElement = Union[Formula, _Cut]


def exists_many(names: Iterable[str], body: Formula) -> Formula:
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


def conj(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; ``true`` for an empty sequence."""
    result: Optional[Formula] = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TRUE if result is None else result


def free_vars(f: Formula) -> tuple[str, ...]:
    """Free variables of ``f`` in first-occurrence order."""
    acc: dict = {}
    _free_vars(f, frozenset(), acc)
    return tuple(acc)


def _free_vars(f: Formula, bound: frozenset, acc: dict) -> None:
    match f:
        case Eq(lhs, rhs):
            for name in term_vars(rhs, term_vars(lhs)):
                if name not in bound:
                    acc.setdefault(name)
        case Call(_, args):
            found: dict = {}
            for a in args:
                term_vars(a, found)
            for name in found:
                if name not in bound:
                    acc.setdefault(name)
        case And(l, r) | Or(l, r):
            _free_vars(l, bound, acc)
            _free_vars(r, bound, acc)
        case Not(b):
            _free_vars(b, bound, acc)
        case Exists(x, b):
            _free_vars(b, bound | {x}, acc)
        case If(xs, b, c):
            inner = bound | set(xs)
            _free_vars(b, inner, acc)
            _free_vars(c, inner, acc)
        case _:
            raise TypeError(f"not a formula: {f!r}")


def all_names(f: Formula, acc: Optional[set] = None) -> set:
    """Every variable name occurring in ``f``, free or bound."""
    if acc is None:
        acc = set()
    match f:
        case Eq(lhs, rhs):
            acc.update(term_vars(rhs, term_vars(lhs)))
        case Call(_, args):
            for a in args:
                acc.update(term_vars(a))
        case And(l, r) | Or(l, r):
            all_names(l, acc)
            all_names(r, acc)
        case Not(b):
            all_names(b, acc)
        case Exists(x, b):
            acc.add(x)
            all_names(b, acc)
        case If(xs, b, c):
            acc.update(xs)
            all_names(b, acc)
            all_names(c, acc)
    return acc


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    match f:
        case And(l, r) | Or(l, r):
            yield from subformulas(l)
            yield from subformulas(r)
        case Not(b) | Exists(_, b):
            yield from subformulas(b)
        case If(_, b, c):
            yield from subformulas(b)
            yield from subformulas(c)


def formula_size(f: Formula) -> int:
    """Number of connective and atom nodes."""
    return sum(1 for _ in subformulas(f))


def formula_terms(f: Formula) -> Iterator[Term]:
    for g in subformulas(f):
        if isinstance(g, Eq):
            yield g.lhs
            yield g.rhs
        elif isinstance(g, Call):
            yield from g.args


# ---------------------------------------------------------------------------
# Clauses and programs


@dataclass(frozen=True, slots=True)
class Clause:
    pred: str
    args: tuple[Term, ...]
    body: tuple[BodyElement, ...] = ()

    @property
    def has_cut(self) -> bool:
        return any(e is CUT for e in self.body)

    def variables(self) -> tuple[str, ...]:
        acc: dict = {}
        for a in self.args:
            term_vars(a, acc)
        for e in self.body:
            if e is not CUT:
                for name in free_vars(e):
                    acc.setdefault(name)
        return tuple(acc)


@dataclass(frozen=True)
class Program:
    clauses: tuple[Clause, ...] = ()

    def clauses_for(self, pred: str) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if c.pred == pred)

    def defined(self) -> dict[str, int]:
        """Defined predicates with their arities, in definition order."""
        out: dict[str, int] = {}
        for c in self.clauses:
            out.setdefault(c.pred, len(c.args))
        return out

    def predicates(self) -> dict[str, int]:
        """Every predicate name used (defined or called) with its arity."""
        out = self.defined()
        for c in self.clauses:
            for e in c.body:
                if e is not CUT:
                    for g in subformulas(e):
                        if isinstance(g, Call):
                            out.setdefault(g.pred, len(g.args))
        return out

    def signature(self) -> dict[str, int]:
        """Function symbols with arities; always contains ``0`` and ``1``."""
        sig: dict[str, int] = {"0": 0, "1": 0}
        for c in self.clauses:
            terms = list(c.args)
            for e in c.body:
                if e is not CUT:
                    terms.extend(formula_terms(e))
            for t in terms:
                _collect_functors(t, sig)
        return sig

    def names(self) -> set:
        """All variable and predicate names, used to reserve fresh names."""
        acc = set(self.predicates())
        for c in self.clauses:
            for a in c.args:
                acc.update(term_vars(a))
            for e in c.body:
                if e is not CUT:
                    all_names(e, acc)
        return acc


def _collect_functors(t: Term, sig: dict) -> None:
    if isinstance(t, Fn):
        sig.setdefault(t.name, len(t.args))
        for a in t.args:
            _collect_functors(a, sig)


def formula_signature(f: Formula, sig: Optional[dict] = None) -> dict[str, int]:
    if sig is None:
        sig = {"0": 0, "1": 0}
    for t in formula_terms(f):
        _collect_functors(t, sig)
    return sig


# ---------------------------------------------------------------------------
# Fresh names

_SUFFIX = re.compile(r"#\d+$")


def base_name(name: str) -> str:
    return _SUFFIX.sub("", name)


class NameSupply:
    """Issues names of the form ``hint#n`` that were never issued before."""

    def __init__(self, reserved: Iterable[str] = ()):
        self._counter = itertools.count(1)
        self._lock = threading.Lock()
        self._reserved = set(reserved)

    def reserve(self, names: Iterable[str]) -> None:
        with self._lock:
            self._reserved.update(names)

    def _fresh(self, hint: str) -> str:
        base = base_name(hint)
        with self._lock:
            while True:
                name = f"{base}#{next(self._counter)}"
                if name not in self._reserved:
                    self._reserved.add(name)
                    return name

    def fresh_var(self, hint: str = "X") -> str:
        if not hint or not (hint[0].isupper() or hint[0] == "_"):
            hint = hint[:1].upper() + hint[1:] if hint else "X"
        return self._fresh(hint)

    def fresh_pred(self, hint: str = "aux") -> str:
        if not hint or not hint[0].islower():
            hint = "aux"
        return self._fresh(hint)


_session = NameSupply()


def fresh_var(hint: str = "X") -> str:
    """Session-global fresh variable name."""
    return _session.fresh_var(hint)


def fresh_pred(hint: str = "aux") -> str:
    """Session-global fresh predicate name."""
    return _session.fresh_pred(hint)


def reserve_names(names: Iterable[str]) -> None:
    """Mark names (e.g. those of a loaded program) as unavailable."""
    _session.reserve(names)


def local_rename(name: str, avoid: set) -> str:
    """A deterministic variant of ``name`` not in ``avoid``."""
    base = base_name(name)
    k = 1
    while f"{base}#{k}" in avoid:
        k += 1
    return f"{base}#{k}"


# ---------------------------------------------------------------------------
# Substitutions


class Substitution(Mapping[str, Term]):
    """A finite map from variable names to terms.  Identity bindings are dropped."""

    __slots__ = ("_map", "_hash")

    def __init__(self, bindings: Mapping[str, Term] | Iterable[tuple[str, Term]] = ()):
        items = bindings.items() if isinstance(bindings, Mapping) else bindings
        self._map = {k: v for k, v in items if not (isinstance(v, Var) and v.name == k)}
        self._hash = None

    def __getitem__(self, key: str) -> Term:
        return self._map[key]

    def __iter__(self):
        return iter(self._map)

    def __len__(self) -> int:
        return len(self._map)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, Substitution):
            return self._map == other._map
        return NotImplemented

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}:={v!r}" for k, v in self._map.items())
        return f"Substitution({{{inner}}})"

    def range_vars(self) -> set:
        acc: dict = {}
        for t in self._map.values():
            term_vars(t, acc)
        return set(acc)

    def is_idempotent(self) -> bool:
        return not (self.range_vars() & self._map.keys())

    def term(self, t: Term) -> Term:
        if not self._map:
            return t
        return _apply_term(self._map, t)

    def restrict(self, names: Iterable[str]) -> "Substitution":
        return Substitution((n, self._map[n]) for n in names if n in self._map)

    def without(self, names: Iterable[str]) -> "Substitution":
        drop = set(names)
        return Substitution((k, v) for k, v in self._map.items() if k not in drop)


EMPTY = Substitution()


def _apply_term(m: Mapping[str, Term], t: Term, memo: Optional[dict] = None) -> Term:
    """Iterative, and memoised on node identity so shared subterms are rebuilt once.
    Unchanged subterms are returned as the same object, which keeps sharing intact."""
    if isinstance(t, Var):
        return m.get(t.name, t)
    if is_ground(t):
        return t
    memo = {} if memo is None else memo
    todo: list[tuple[Term, bool]] = [(t, False)]
    while todo:
        u, expanded = todo.pop()
        key = id(u)
        if key in memo:
            continue
        if isinstance(u, Var):
            memo[key] = m.get(u.name, u)
        elif u._ground:
            memo[key] = u
        elif not expanded:
            todo.append((u, True))
            todo.extend((a, False) for a in u.args if id(a) not in memo)
        else:
            args = tuple(memo[id(a)] for a in u.args)
            same = all(x is y for x, y in zip(args, u.args))
            memo[key] = u if same else Fn(u.name, args)
    return memo[id(t)]


def apply(sub: Mapping[str, Term], f: Formula) -> Formula:
    """Capture-avoiding application of ``sub`` to the free variables of ``f``."""
    if not sub:
        return f
    m = sub._map if isinstance(sub, Substitution) else dict(sub)
    return _apply(m, f)


def _range_names(m: Mapping[str, Term], keys: Iterable[str]) -> set:
    acc: dict = {}
    for k in keys:
        if k in m:
            term_vars(m[k], acc)
    return set(acc)


def _apply(m: dict, f: Formula) -> Formula:
    match f:
        case Eq(lhs, rhs):
            return Eq(_apply_term(m, lhs), _apply_term(m, rhs))
        case Call(p, args):
            return Call(p, tuple(_apply_term(m, a) for a in args))
        case And(l, r):
            return And(_apply(m, l), _apply(m, r))
        case Or(l, r):
            return Or(_apply(m, l), _apply(m, r))
        case Not(b):
            return Not(_apply(m, b))
        case Exists(x, b):
            inner = {k: v for k, v in m.items() if k != x}
            if not inner:
                return f
            fv = free_vars(b)
            relevant = [k for k in fv if k in inner]
            if not relevant:
                return f
            rng = _range_names(inner, relevant)
            if x in rng:
                new = local_rename(x, rng | set(fv) | set(inner) | all_names(b))
                inner[x] = Var(new)
                return Exists(new, _apply(inner, b))
            return Exists(x, _apply(inner, b))
        case If(xs, b, c):
            inner = {k: v for k, v in m.items() if k not in xs}
            if not inner:
                return f
            fv = set(free_vars(b)) | set(free_vars(c))
            relevant = [k for k in fv if k in inner]
            if not relevant:
                return f
            rng = _range_names(inner, relevant)
            clash = [x for x in xs if x in rng]
            if clash:
                avoid = rng | fv | set(inner) | all_names(b) | all_names(c) | set(xs)
                new_xs = []
                for x in xs:
                    if x in rng:
                        new = local_rename(x, avoid)
                        avoid.add(new)
                        inner[x] = Var(new)
                        new_xs.append(new)
                    else:
                        new_xs.append(x)
                xs = tuple(new_xs)
            return If(xs, _apply(inner, b), _apply(inner, c))
    raise TypeError(f"not a formula: {f!r}")


def rename_bound(f: Formula, old: str, new: str) -> Formula:
    """Replace free occurrences of variable ``old`` by fresh variable ``new``.

    ``new`` must not occur anywhere in ``f``; no capture check is needed then.
    """
    return _apply({old: Var(new)}, f)


def compose(outer: Mapping[str, Term], inner: Mapping[str, Term]) -> Substitution:
    """The substitution applying ``outer`` then ``inner``."""
    memo: dict = {}
    out = {k: _apply_term(inner, v, memo) for k, v in outer.items()}
    for k, v in inner.items():
        if k not in out:
            out[k] = v
    return Substitution(out)


def unify(s: Term, t: Term) -> Optional[Substitution]:
    """Idempotent most general unifier with occurs check, or ``None``."""
    bindings: dict[str, Term] = {}
    work = [(s, t)]
    while work:
        a, b = work.pop()
        if isinstance(a, Var) and a.name in bindings:
            a = bindings[a.name]
        if isinstance(b, Var) and b.name in bindings:
            b = bindings[b.name]
        if a is b or a == b:
            continue
        if isinstance(b, Var) and not isinstance(a, Var):
            a, b = b, a
        if isinstance(a, Var):
            b = _apply_term(bindings, b) if bindings else b
            if isinstance(b, Var) and b.name == a.name:
                continue
            if occurs(a.name, b):
                return None
            single = {a.name: b}
            memo: dict = {}
            for k in bindings:
                bindings[k] = _apply_term(single, bindings[k], memo)
            bindings[a.name] = b
            continue
        if a.name != b.name or len(a.args) != len(b.args):
            return None
        work.extend(zip(a.args, b.args))
    return Substitution(bindings)


def unify_all(pairs: Iterable[tuple[Term, Term]]) -> Optional[Substitution]:
    sub = EMPTY
    for s, t in pairs:
        step = unify(sub.term(s), sub.term(t))
        if step is None:
            return None
        sub = compose(sub, step)
    return sub


def match_terms(pattern: Term, target: Term, env: dict) -> bool:
    """One-sided matching: extend ``env`` so that pattern·env ≡ target."""
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = env.get(p.name)
            if bound is None:
                env[p.name] = t
            elif bound != t:
                return False
            continue
        if isinstance(t, Var) or p.name != t.name or len(p.args) != len(t.args):
            return False
        stack.extend(zip(p.args, t.args))
    return True


def specializes(a: Mapping[str, Term], b: Mapping[str, Term]) -> bool:
    """True iff ``a`` is a specialization of ``b``.

    That is, some θ'' gives x·a ≡ x·b·θ'' for every x in dom(b).
    """
    env: dict = {}
    for x in b:
        target = a[x] if x in a else Var(x)
        if not match_terms(b[x], target, env):
            return False
    return True


def answers_equivalent(a: Mapping[str, Term], b: Mapping[str, Term], names: Iterable[str]) -> bool:
    """Mutual specialization of two answers, compared on ``names`` only."""
    names = list(names)
    full_a = {n: a.get(n, Var(n)) for n in names}
    full_b = {n: b.get(n, Var(n)) for n in names}
    return specializes(full_a, full_b) and specializes(full_b, full_a)


# ---------------------------------------------------------------------------
# Alpha-equivalence


def alpha_equiv(f: Formula, g: Formula) -> bool:
    """Structural equality up to consistent renaming of bound variables."""
    return _alpha(f, g, {}, {}, 0)


def _alpha_term(s: Term, t: Term, env_f: dict, env_g: dict) -> bool:
    if isinstance(s, Var) and isinstance(t, Var):
        ls, lt = env_f.get(s.name), env_g.get(t.name)
        if ls is None and lt is None:
            return s.name == t.name
        return ls == lt
    if isinstance(s, Fn) and isinstance(t, Fn):
        return (
            s.name == t.name
            and len(s.args) == len(t.args)
            and all(_alpha_term(a, b, env_f, env_g) for a, b in zip(s.args, t.args))
        )
    return False


def _alpha(f: Formula, g: Formula, env_f: dict, env_g: dict, level: int) -> bool:
    match f, g:
        case Eq(a, b), Eq(c, d):
            return _alpha_term(a, c, env_f, env_g) and _alpha_term(b, d, env_f, env_g)
        case Call(p, xs), Call(q, ys):
            return (
                p == q
                and len(xs) == len(ys)
                and all(_alpha_term(a, b, env_f, env_g) for a, b in zip(xs, ys))
            )
        case And(a, b), And(c, d):
            return _alpha(a, c, env_f, env_g, level) and _alpha(b, d, env_f, env_g, level)
        case Or(a, b), Or(c, d):
            return _alpha(a, c, env_f, env_g, level) and _alpha(b, d, env_f, env_g, level)
        case Not(a), Not(b):
            return _alpha(a, b, env_f, env_g, level)
        case Exists(x, a), Exists(y, b):
            return _alpha(a, b, {**env_f, x: level}, {**env_g, y: level}, level + 1)
        case If(xs, a, b), If(ys, c, d):
            if len(xs) != len(ys):
                return False
            ef = {**env_f, **{x: level + i for i, x in enumerate(xs)}}
            eg = {**env_g, **{y: level + i for i, y in enumerate(ys)}}
            nxt = level + len(xs)
            return _alpha(a, c, ef, eg, nxt) and _alpha(b, d, ef, eg, nxt)
    return False


def clause_alpha_equiv(c: Clause, d: Clause) -> bool:
    """Clauses equal up to a consistent renaming of all their variables."""
    if c.pred != d.pred or len(c.args) != len(d.args) or len(c.body) != len(d.body):
        return False
    cv, dv = c.variables(), d.variables()
    if len(cv) != len(dv):
        return False
    env_c = {v: i for i, v in enumerate(cv)}
    env_d = {v: i for i, v in enumerate(dv)}
    if not all(_alpha_term(a, b, env_c, env_d) for a, b in zip(c.args, d.args)):
        return False
    level = len(cv)
    for e, h in zip(c.body, d.body):
        if (e is CUT) != (h is CUT):
            return False
        if e is not CUT and not _alpha(e, h, env_c, env_d, level):
            return False
    return True


def program_alpha_equiv(p: Program, q: Program) -> bool:
    return len(p.clauses) == len(q.clauses) and all(
        clause_alpha_equiv(c, d) for c, d in zip(p.clauses, q.clauses)
    )
