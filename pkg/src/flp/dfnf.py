"""Depth-first normal form: the rewrite rules R1-R5, formula classes and depth metrics."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

from .kernel import And, Call, Eq, Exists, Formula, If, Not, Or, exists_many


class FormulaClass(enum.Enum):
    N = "negated-disjunction"
    O = "outer-disjunction"
    NEITHER = "neither"


def is_n(f: Formula) -> bool:
    match f:
        case Eq() | Call():
            return True
        case And(b, c):
            return is_n(b) and is_n(c)
        case Exists(_, b):
            return is_n(b)
        case Not(b):
            return is_o(b)
    return False


def is_o(f: Formula) -> bool:
    if isinstance(f, Or):
        return is_o(f.left) and is_o(f.right)
    return is_n(f)


def classify(f: Formula) -> FormulaClass:
    if is_n(f):
        return FormulaClass.N
    if is_o(f):
        return FormulaClass.O
    return FormulaClass.NEITHER


def depth(f: Formula) -> int:
    match f:
        case Eq() | Call():
            return 1
        case And(b, c) | Or(b, c):
            return max(depth(b), depth(c)) + 1
        case Not(b) | Exists(_, b):
            return depth(b) + 1
        case If(_, b, c):
            return max(depth(b), depth(c)) + 1
    raise TypeError(f)


def potential_depth(f: Formula) -> int:
    match f:
        case Eq() | Call():
            return 1
        case And(b, c) | Or(b, c):
            return max(potential_depth(b), potential_depth(c)) + 1
        case Not(b) | Exists(_, b):
            return potential_depth(b) + 1
        case If(xs, b, c):
            pb = potential_depth(b)
            return len(xs) + 2 * pb + max(pb, potential_depth(c))
    raise TypeError(f)


# ---------------------------------------------------------------------------
# Single rewrite steps

Path = tuple[int, ...]


@dataclass(frozen=True)
class Redex:
    path: Path
    rule: str


def _rule_at(f: Formula) -> Optional[str]:
    match f:
        case And(Or(), _):
            return "R1"
        case And(b, Or()) if is_n(b):
            return "R2"
        case Exists(_, Or()):
            return "R3"
        case If(_, Or(), _):
            return "R4"
        case If(_, b, _) if is_n(b):
            return "R5"
    return None


def _children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case And(b, c) | Or(b, c):
            return (b, c)
        case Not(b) | Exists(_, b):
            return (b,)
        case If(_, b, c):
            return (b, c)
    return ()


def _replace_child(f: Formula, i: int, g: Formula) -> Formula:
    match f:
        case And(b, c):
            return And(g, c) if i == 0 else And(b, g)
        case Or(b, c):
            return Or(g, c) if i == 0 else Or(b, g)
        case Not(_):
            return Not(g)
        case Exists(x, _):
            return Exists(x, g)
        case If(xs, b, c):
            return If(xs, g, c) if i == 0 else If(xs, b, g)
    raise TypeError(f)


def redexes(f: Formula) -> list[Redex]:
    """All redexes in pre-order, so the first one is outermost-leftmost."""
    out: list[Redex] = []
    todo: list[tuple[Formula, Path]] = [(f, ())]
    while todo:
        g, path = todo.pop()
        rule = _rule_at(g)
        if rule is not None:
            out.append(Redex(path, rule))
        kids = _children(g)
        for i in reversed(range(len(kids))):
            todo.append((kids[i], path + (i,)))
    return out


def _contract(f: Formula, rule: str) -> Formula:
    match rule, f:
        case "R1", And(Or(b1, b2), c):
            return Or(And(b1, c), And(b2, c))
        case "R2", And(b, Or(c1, c2)):
            return Or(And(b, c1), And(b, c2))
        case "R3", Exists(x, Or(b1, b2)):
            return Or(Exists(x, b1), Exists(x, b2))
        case "R4", If(xs, Or(b1, b2), c):
            return Or(If(xs, b1, c), And(Not(exists_many(xs, b1)), If(xs, b2, c)))
        case "R5", If(xs, b, c):
            return exists_many(xs, And(b, c))
    raise ValueError(f"{rule} does not apply")


def subterm_at(f: Formula, path: Path) -> Formula:
    for i in path:
        f = _children(f)[i]
    return f


def _rewrite_at(f: Formula, path: Path, rule: str) -> Formula:
    if not path:
        return _contract(f, rule)
    i = path[0]
    return _replace_child(f, i, _rewrite_at(_children(f)[i], path[1:], rule))


RedexChoice = Callable[[Sequence[Redex]], int]


def outermost_leftmost(candidates: Sequence[Redex]) -> int:
    return 0


def innermost_rightmost(candidates: Sequence[Redex]) -> int:
    # the last pre-order redex has no redex below it
    return len(candidates) - 1


def random_strategy(seed: Union[int, random.Random]) -> RedexChoice:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)

    def choose(candidates: Sequence[Redex]) -> int:
        return rng.randrange(len(candidates))

    return choose


def rewrite_step(
    f: Formula, strategy: RedexChoice = outermost_leftmost
) -> Optional[tuple[Formula, Redex]]:
    """One R1-R5 step at the redex picked by ``strategy``; ``None`` in normal form."""
    cands = redexes(f)
    if not cands:
        return None
    r = cands[strategy(cands)]
    return _rewrite_at(f, r.path, r.rule), r


def rewrite_chain(
    f: Formula, strategy: RedexChoice = outermost_leftmost, limit: int = 100_000
) -> list[tuple[Formula, Redex]]:
    """The whole rewrite sequence; each entry is (reduct, redex used)."""
    chain = []
    cur = f
    for _ in range(limit):
        nxt = rewrite_step(cur, strategy)
        if nxt is None:
            return chain
        chain.append(nxt)
        cur = nxt[0]
    raise RuntimeError(f"no normal form within {limit} rewrite steps")


def normalize(f: Formula, strategy: RedexChoice = outermost_leftmost, limit: int = 100_000) -> Formula:
    chain = rewrite_chain(f, strategy, limit)
    return chain[-1][0] if chain else f


# ---------------------------------------------------------------------------
# Bottom-up normaliser.  Each helper only performs R1-R5 contractions on
# arguments that are already normal, so by uniqueness of normal forms it
# agrees with any rewrite order.


def _and(b: Formula, c: Formula) -> Formula:
    if isinstance(b, Or):
        return Or(_and(b.left, c), _and(b.right, c))
    if isinstance(c, Or):
        return Or(_and(b, c.left), _and(b, c.right))
    return And(b, c)


def _ex(x: str, b: Formula) -> Formula:
    if isinstance(b, Or):
        return Or(_ex(x, b.left), _ex(x, b.right))
    return Exists(x, b)


def _ex_many(xs: Sequence[str], b: Formula) -> Formula:
    for x in reversed(xs):
        b = _ex(x, b)
    return b


def _if(xs: tuple[str, ...], b: Formula, c: Formula) -> Formula:
    if isinstance(b, Or):
        guard = Not(_ex_many(xs, b.left))
        return Or(_if(xs, b.left, c), _and(guard, _if(xs, b.right, c)))
    return _ex_many(xs, _and(b, c))


def dfnf(f: Formula) -> Formula:
    match f:
        case Eq() | Call():
            return f
        case Not(b):
            return Not(dfnf(b))
        case Or(b, c):
            return Or(dfnf(b), dfnf(c))
        case And(b, c):
            return _and(dfnf(b), dfnf(c))
        case Exists(x, b):
            return _ex(x, dfnf(b))
        case If(xs, b, c):
            return _if(xs, dfnf(b), dfnf(c))
    raise TypeError(f)
