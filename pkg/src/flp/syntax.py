"""Concrete syntax (``.flp``): tokenizer, recursive-descent parser, printer.

Grammar summary::

    program  ::= clause*
    clause   ::= head [":-" elem ("," elem)*] "."
    elem     ::= "!" | disj            % top-level comma separates body elements
    formula  ::= conj (";" conj)*      % inside parentheses and in goals
    conj     ::= unary ("," unary)*
    unary    ::= "\\+" unary | "(" formula ")" | "true" | "fail"
               | "exists(" Var "," arg ")" | "exists([" Var,... "]," arg ")"
               | "if([" Var,... "]," arg "," arg ")"
               | term "=" term | atom ["(" term,... ")"]
    term     ::= Var | atom ["(" term,... ")"] | "[]" | "[" term,... ["|" term] "]"

``;`` and ``,`` are right associative.  Lists desugar to ``nil``/``cons``,
``true`` to ``0=0`` and ``fail`` to ``0=1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .kernel import (
    CUT,
    FALSE,
    NIL,
    TRUE,
    And,
    BodyElement,
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
    cons,
    subformulas,
)


class FlpError(Exception):
    """Base for user-facing input errors; carries an optional position."""

    def __init__(self, message: str, line: Optional[int] = None, col: Optional[int] = None,
                 origin: str = "<input>"):
        self.message = message
        self.line = line
        self.col = col
        self.origin = origin
        where = f"{origin}:{line}:{col}: " if line is not None else f"{origin}: "
        super().__init__(where + message)


class ParseError(FlpError):
    pass


class ValidationError(FlpError):
    pass


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<stdin>"


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<naf>\\\+)
  | (?P<var>[A-Z_][A-Za-z0-9_#']*)
  | (?P<atom>[a-z][A-Za-z0-9_#']*|[0-9]+)
  | (?P<punct>[()\[\]|,;=.!])
    """,
    re.VERBOSE,
)


def tokenize(text: str, origin: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, origin)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(chunk if kind == "punct" else kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, origin: str, in_goal: bool):
        self.tokens = tokenize(text, origin)
        self.pos = 0
        self.origin = origin
        self.in_goal = in_goal
        self.anon = 0

    # -- token helpers -----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col, self.origin)

    def expect(self, kind: str) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        return self.advance()

    def cut_error(self, tok: Token) -> ValidationError:
        if self.in_goal:
            return ValidationError("cut not allowed in goals", tok.line, tok.col, self.origin)
        return ValidationError("cut not at top level", tok.line, tok.col, self.origin)

    # -- terms -------------------------------------------------------------

    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.advance()
            if tok.text == "_":
                self.anon += 1
                return Var(f"_#{self.anon}")
            return Var(tok.text)
        if tok.kind == "atom":
            self.advance()
            if self.tok.kind == "(":
                self.advance()
                args = self.term_list(")")
                self.expect(")")
                return Fn(tok.text, tuple(args))
            return Fn(tok.text)
        if tok.kind == "[":
            self.advance()
            if self.tok.kind == "]":
                self.advance()
                return NIL
            items = self.term_list("]")
            tail: Term = NIL
            if self.tok.kind == "|":
                self.advance()
                tail = self.term()
            self.expect("]")
            result = tail
            for item in reversed(items):
                result = cons(item, result)
            return result
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def term_list(self, closer: str) -> list[Term]:
        items = [self.term()]
        while self.tok.kind == ",":
            self.advance()
            items.append(self.term())
        return items

    def var_list(self) -> list[str]:
        self.expect("[")
        names: list[str] = []
        if self.tok.kind != "]":
            while True:
                tok = self.expect("var")
                if tok.text == "_":
                    raise self.error("anonymous variable cannot be bound", tok)
                if tok.text in names:
                    raise ValidationError(f"variable {tok.text} repeated in binder list",
                                          tok.line, tok.col, self.origin)
                names.append(tok.text)
                if self.tok.kind != ",":
                    break
                self.advance()
        self.expect("]")
        return names

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.conjunction()
        if self.tok.kind == ";":
            self.advance()
            return Or(left, self.formula())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        if self.tok.kind == ",":
            self.advance()
            return And(left, self.conjunction())
        return left

    def arg_formula(self) -> Formula:
        """A formula in argument position: commas need parentheses."""
        left = self.unary()
        if self.tok.kind == ";":
            self.advance()
            return Or(left, self.arg_formula())
        return left

    def unary(self) -> Formula:
        tok = self.tok
        if tok.kind == "!":
            raise self.cut_error(tok)
        if tok.kind == "naf":
            self.advance()
            return Not(self.unary())
        if tok.kind == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok.kind == "atom" and self.peek().kind != "=":
            if tok.text == "exists" and self.peek().kind == "(":
                return self.exists_form()
            if tok.text == "if" and self.peek().kind == "(":
                return self.if_form()
            if tok.text == "true" and self.peek().kind != "(":
                self.advance()
                return TRUE
            if tok.text in ("fail", "false") and self.peek().kind != "(":
                self.advance()
                return FALSE
        start = self.tok
        t = self.term()
        if self.tok.kind == "=":
            self.advance()
            return Eq(t, self.term())
        if isinstance(t, Var):
            raise self.error("a variable is not a formula", start)
        if t.name[0].isdigit():
            raise self.error("a number is not a predicate", start)
        return Call(t.name, t.args)

    def exists_form(self) -> Formula:
        self.advance()
        self.expect("(")
        if self.tok.kind == "[":
            names = self.var_list()
        else:
            tok = self.expect("var")
            if tok.text == "_":
                raise self.error("anonymous variable cannot be bound", tok)
            names = [tok.text]
        self.expect(",")
        body = self.arg_formula()
        self.expect(")")
        for name in reversed(names):
            body = Exists(name, body)
        return body

    def if_form(self) -> Formula:
        self.advance()
        self.expect("(")
        names = self.var_list()
        self.expect(",")
        cond = self.arg_formula()
        self.expect(",")
        then = self.arg_formula()
        self.expect(")")
        return If(tuple(names), cond, then)

    # -- clauses -----------------------------------------------------------

    def _bare_semicolon(self, start: int, end: int) -> Optional[Token]:
        """The first ';' outside parentheses in tokens[start:end], if any."""
        depth = 0
        for tok in self.tokens[start:end]:
            if tok.kind in ("(", "["):
                depth += 1
            elif tok.kind in (")", "]"):
                depth -= 1
            elif tok.kind == ";" and depth == 0:
                return tok
        return None

    def clause(self) -> Clause:
        self.anon = 0
        tok = self.tok
        if tok.kind != "atom" or tok.text[0].isdigit():
            raise self.error(f"expected a clause head, found {tok.text or 'end of input'!r}")
        head = self.term()
        assert isinstance(head, Fn)
        body: list[BodyElement] = []
        if self.tok.kind == "neck":
            self.advance()
            disj_at: Optional[Token] = None
            while True:
                if self.tok.kind == "!":
                    self.advance()
                    body.append(CUT)
                else:
                    start = self.pos
                    elem = self.arg_formula()
                    disj_at = disj_at or self._bare_semicolon(start, self.pos)
                    body.append(elem)
                if self.tok.kind != ",":
                    break
                self.advance()
            if disj_at is not None and len(body) > 1:
                raise self.error("mixed ',' and ';' at clause top level; add parentheses", disj_at)
        self.expect(".")
        return Clause(head.name, head.args, tuple(body))


def _check_arities(clauses: Sequence[Clause], origin: str) -> None:
    seen: dict[str, int] = {}

    def note(name: str, arity: int) -> None:
        if seen.setdefault(name, arity) != arity:
            raise ValidationError(
                f"predicate {name} used with arities {seen[name]} and {arity}", origin=origin
            )

    for c in clauses:
        note(c.pred, len(c.args))
        for e in c.body:
            if e is not CUT:
                for g in subformulas(e):
                    if isinstance(g, Call):
                        note(g.pred, len(g.args))


def parse_program(src: SourceProgram | str, origin: str = "<stdin>") -> Program:
    if isinstance(src, SourceProgram):
        text, origin = src.text, src.origin
    else:
        text = src
    p = _Parser(text, origin, in_goal=False)
    clauses = []
    while p.tok.kind != "eof":
        clauses.append(p.clause())
    _check_arities(clauses, origin)
    return Program(tuple(clauses))


def parse_goal(text: str, origin: str = "<query>") -> Formula:
    p = _Parser(text, origin, in_goal=True)
    f = p.formula()
    if p.tok.kind == ".":
        p.advance()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after goal")
    return f


def parse_term(text: str) -> Term:
    p = _Parser(text, "<term>", in_goal=True)
    t = p.term()
    p.expect("eof")
    return t


def check_goal_against(program: Program, goal: Formula) -> None:
    """Raise if the goal calls a program predicate at a different arity."""
    preds = program.predicates()
    for g in subformulas(goal):
        if isinstance(g, Call) and g.pred in preds and preds[g.pred] != len(g.args):
            raise ValidationError(
                f"predicate {g.pred} has arity {preds[g.pred]} in the program, {len(g.args)} in the goal"
            )


# ---------------------------------------------------------------------------
# Printer


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if t.name == "nil" and not t.args:
        return "[]"
    if t.name == "cons" and len(t.args) == 2:
        items = []
        cur: Term = t
        while isinstance(cur, Fn) and cur.name == "cons" and len(cur.args) == 2:
            items.append(print_term(cur.args[0]))
            cur = cur.args[1]
        inner = ", ".join(items)
        if cur == NIL:
            return f"[{inner}]"
        return f"[{inner} | {print_term(cur)}]"
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(print_term(a) for a in t.args)})"


def _unary_text(f: Formula) -> str:
    """Text for ``f`` in a position that needs a unary formula."""
    if isinstance(f, (And, Or)):
        return f"({print_formula(f)})"
    return print_formula(f)


def _arg_text(f: Formula) -> str:
    return _unary_text(f)


def print_formula(f: Formula) -> str:
    match f:
        case Eq(l, r):
            if f == TRUE:
                return "true"
            if f == FALSE:
                return "fail"
            return f"{print_term(l)} = {print_term(r)}"
        case Call(p, args):
            if not args:
                return p
            return f"{p}({', '.join(print_term(a) for a in args)})"
        case And(l, r):
            return f"{_unary_text(l)}, {_unary_text(r) if isinstance(r, Or) else print_formula(r)}"
        case Or(l, r):
            right = f"({print_formula(r)})" if isinstance(r, And) else print_formula(r)
            return f"{_unary_text(l)} ; {right}"
        case Not(b):
            return f"\\+ {_unary_text(b)}"
        case Exists(x, b):
            return f"exists({x}, {_arg_text(b)})"
        case If(xs, b, c):
            return f"if([{', '.join(xs)}], {_arg_text(b)}, {_arg_text(c)})"
    raise TypeError(f"not a formula: {f!r}")


def print_clause(c: Clause) -> str:
    head = c.pred if not c.args else f"{c.pred}({', '.join(print_term(a) for a in c.args)})"
    if not c.body:
        return f"{head}."
    elems = []
    for e in c.body:
        if e is CUT:
            elems.append("!")
        elif isinstance(e, And) or (isinstance(e, Or) and len(c.body) > 1):
            elems.append(f"({print_formula(e)})")
        else:
            elems.append(print_formula(e))
    return f"{head} :- {', '.join(elems)}."


def print_program(p: Program) -> str:
    return "".join(print_clause(c) + "\n" for c in p.clauses)


def print_subst(sub: Substitution, order: Optional[Iterable[str]] = None) -> str:
    names = list(order) if order is not None else list(sub)
    parts = [f"{n} -> {print_term(sub[n])}" for n in names if n in sub]
    return "{" + ", ".join(parts) + "}"


def print_ast(node) -> str:
    """Print a term, formula, clause or program."""
    if isinstance(node, Program):
        return print_program(node)
    if isinstance(node, Clause):
        return print_clause(node)
    if isinstance(node, (Var, Fn)):
        return print_term(node)
    return print_formula(node)
