"""The ``flp`` command line."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import abstraction as ab
from . import corpus, oracle
from .completion import complete
from .dfnf import dfnf, rewrite_chain
from .engine import (
    Diverge,
    Fail,
    Flounder,
    FuelExhausted,
    InvariantBreach,
    SemanticsMode,
    Success,
    format_trace,
    run,
    trace,
)
from .kernel import Program, free_vars
from .syntax import (
    FlpError,
    ParseError,
    SourceProgram,
    ValidationError,
    parse_goal,
    parse_program,
    print_formula,
    print_program,
    print_subst,
)

EXIT_OK = 0
EXIT_SUITE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_BREACH = 4

GRAMMAR = """\
dialect:
  program  ::= clause*
  clause   ::= head '.' | head ':-' body '.'
  head     ::= name | name '(' term {',' term} ')'
  body     ::= element {',' element} | goal
               elements are goals or the cut '!'; a top-level body may not
               mix ',' and ';' without parentheses
  goal     ::= goal ';' goal | goal ',' goal | '\\+' goal | '(' goal ')'
             | term '=' term | name ['(' term {',' term} ')']
             | 'exists(' vars ',' goal ')' | 'if(' '[' vars ']' ',' goal ',' goal ')'
             | 'true' | 'fail' | 'false'
  vars     ::= Var | '[' Var {',' Var} ']'
  term     ::= Var | '_' | name ['(' term {',' term} ')'] | number | list
  list     ::= '[' ']' | '[' term {',' term} ['|' term] ']'
  ',' binds tighter than ';'; both associate to the right.  Variables start
  with an upper-case letter or '_'.  Cut may appear only at the top level of
  a clause body, never inside a query.  Comments run from '%' to end of line.
"""


def _load_program(spec: str) -> Program:
    path = Path(spec)
    if path.exists():
        return parse_program(SourceProgram(path.read_text(), str(path)))
    name = spec[len("corpus:"):] if spec.startswith("corpus:") else spec
    name = name.removesuffix(".flp")
    if name in corpus.names():
        return corpus.load(name)
    raise FileNotFoundError(f"no program file or corpus entry named {spec!r}")


def _result_line(r, goal) -> str:
    if isinstance(r, Success):
        return f"yes {print_subst(r.answer, free_vars(goal))}"
    if r is Fail:
        return "fail"
    if r is Flounder:
        return "flounder"
    if r is Diverge:
        return "diverge"
    if r is FuelExhausted:
        return "unknown (fuel exhausted)"
    raise InvariantBreach(f"unexpected result {r!r}")


def cmd_run(args, out) -> int:
    program = _load_program(args.program) if args.program else Program()
    goal = parse_goal(args.query)
    mode = SemanticsMode.parse(args.semantics)
    if args.auto_complete and mode.needs_completed:
        program = complete(program)
    if args.trace:
        t = trace(mode, program, goal, args.fuel)
        if t.root is not None:
            out.write(format_trace(t.root) + "\n")
        result = t.result
    else:
        result = run(mode, program, goal, args.fuel)
    out.write(_result_line(result, goal) + "\n")
    return EXIT_OK


def cmd_complete(args, out) -> int:
    text = print_program(complete(_load_program(args.program)))
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        out.write(text + "\n")
    return EXIT_OK


def cmd_dfnf(args, out) -> int:
    f = parse_goal(args.formula)
    chain = rewrite_chain(f)
    if not args.quiet:
        out.write(print_formula(f) + "\n")
        for g, redex in chain:
            path = ".".join(map(str, redex.path)) or "root"
            out.write(f"  --{redex.rule} at {path}--> {print_formula(g)}\n")
    out.write(f"normal form: {print_formula(dfnf(f))}\n")
    return EXIT_OK


def cmd_denote(args, out) -> int:
    program = complete(_load_program(args.program))
    goal = parse_goal(args.goal)
    bound = ab.default_bound(program, ab.close(goal), args.term_depth)
    d = ab.denote(program, goal, args.unfold_depth, bound)
    out.write(f"{d.value}\n")
    if d.witness is not None:
        out.write(f"witness: {print_formula(d.witness)}\n")
    out.write(f"explored: {d.explored}\n")
    return EXIT_OK


def cmd_check(args, out) -> int:
    extra = {"fuel": args.fuel, "term_depth": args.term_depth, "unfold_depth": args.unfold_depth}
    extra = {k: v for k, v in extra.items() if v is not None}
    reports = oracle.SUITES[args.suite](args.seed, args.cases, **extra)
    for rep in reports:
        out.write(rep.summary() + "\n")
    return EXIT_OK if all(r.ok for r in reports) else EXIT_SUITE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flp",
        description="Evaluator for pure Prolog with firm cut, negation, existentials and if-then-else.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--seed", type=int, default=0, help="seed for generated cases")
    parser.add_argument("--quiet", action="store_true", help="print results only")
    sub = parser.add_subparsers(dest="command", required=True)
    program_help = "program file, or the name of a bundled corpus program"

    p = sub.add_parser("run", help="evaluate a query", epilog=GRAMMAR, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--program", help=program_help)
    p.add_argument("--query", required=True)
    p.add_argument("--semantics", default="liberal-general", choices=[m.value for m in SemanticsMode])
    p.add_argument("--fuel", type=int, default=10_000)
    p.add_argument("--trace", action="store_true", help="print the derivation tree")
    p.add_argument("--auto-complete", action="store_true", help="complete the program first if the semantics needs it")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("complete", help="print the completed form of a program")
    p.add_argument("--program", required=True, help=program_help)
    p.add_argument("--out")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("dfnf", help="print the rewrite chain and normal form of a formula")
    p.add_argument("--formula", required=True)
    p.set_defaults(func=cmd_dfnf)

    p = sub.add_parser("denote", help="approximate the three-valued denotation of a goal")
    p.add_argument("--program", required=True, help=program_help)
    p.add_argument("--goal", required=True)
    p.add_argument("--unfold-depth", type=int, default=1)
    p.add_argument("--term-depth", type=int, default=None)
    p.set_defaults(func=cmd_denote)

    p = sub.add_parser("check", help="run a generated property suite")
    p.add_argument("--suite", required=True, choices=sorted(oracle.SUITES))
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--fuel", type=int)
    p.add_argument("--term-depth", type=int)
    p.add_argument("--unfold-depth", type=int)
    p.add_argument("--seed", type=int, dest="sub_seed", default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if getattr(args, "sub_seed", None) is not None:
        args.seed = args.sub_seed
    try:
        return args.func(args, out)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, FileNotFoundError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FlpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InvariantBreach as exc:
        print(f"internal invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())
