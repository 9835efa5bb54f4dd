"""Command-line front-end: ``cyclecheck mc|sat|unwind|pg``.

Exit codes: 0 done (either verdict), 2 syntax or usage error, 3 invalid
model or game, 4 unknown atom, 5 budget or time limit exceeded. Timing
goes to stderr so that stdout is deterministic.
"""
from __future__ import annotations

import argparse
import sys
import time

from . import formula as fm
from . import unwind
from .buchi import Lasso
from .checker import UnknownAtom, model_check
from .kripke import (KripkeError, build_nonprompt_formula, build_parity_formula,
                     dump_kripke, load_game, load_kripke, project_parity_game)
from .oracle import BudgetExceeded
from .satsearch import DISCLAIMER, SearchBudget, TimeLimitExceeded, sat_search

EXIT_OK = 0
EXIT_SYNTAX = 2
EXIT_MODEL = 3
EXIT_ATOM = 4
EXIT_BUDGET = 5


def render_lasso(lasso: Lasso) -> str:
    prefix = " ".join(str(w) for w in lasso.prefix)
    loop = " ".join(str(w) for w in lasso.loop)
    lines = [f"prefix: {prefix}".rstrip(), f"loop: {loop}"]
    if lasso.anchor is not None:
        lines[1] += f" (anchor: {lasso.anchor})"
    return "\n".join(lines)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _verdict(truth: bool) -> str:
    return "TRUE" if truth else "FALSE"


def cmd_mc(args) -> int:
    k = load_kripke(_read(args.model))
    text = _read(args.formula_file) if args.formula_file else args.formula
    if text is None:
        raise _Usage("mc needs a formula or --formula-file")
    phi = fm.parse(text)
    verdict, table = model_check(k, phi, witness=args.witness, world=args.world)
    print(_verdict(verdict.truth))
    if args.witness:
        if verdict.witness is not None:
            print(render_lasso(verdict.witness))
        else:
            print("witness: none")
    if args.table:
        print(table.to_tsv(), end="")
    return EXIT_OK


def cmd_sat(args) -> int:
    phi = fm.parse(args.formula)
    budget = SearchBudget(args.max_states, args.max_atoms, args.time_limit)
    k = sat_search(phi, budget)
    if k is None:
        print(DISCLAIMER.format(n=args.max_states))
    else:
        n = len(k.worlds)
        print(f"model with {n} world{'s' if n != 1 else ''}")
        print(dump_kripke(k), end="")
    return EXIT_OK


def cmd_unwind(args) -> int:
    if args.depth < 1:
        raise _Usage("--depth must be at least 1")
    k = load_kripke(_read(args.model))
    t = unwind.unwind_bounded(k, args.depth)
    print(unwind.to_dot(t) if args.out == "dot" else unwind.to_text(t), end="")
    return EXIT_OK


def cmd_pg(args) -> int:
    game = load_game(_read(args.game))
    k = project_parity_game(game)
    n = game.max_priority
    if args.check == "par":
        phi = build_parity_formula(n)
    else:
        phi = build_nonprompt_formula(n, hold_globally=args.npmt_variant == "global")
    if args.show_formula:
        print(f"# {fm.to_text(phi)}")
    print(_verdict(model_check(k, phi)[0].truth))
    return EXIT_OK


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclecheck",
                                     description="Model checking for CTL* with cycle quantifiers.")
    sub = parser.add_subparsers(dest="command", required=True)

    mc = sub.add_parser("mc", help="model check a formula")
    mc.add_argument("model")
    mc.add_argument("formula", nargs="?")
    mc.add_argument("-f", "--formula-file")
    mc.add_argument("--witness", action="store_true", help="print a lasso witness")
    mc.add_argument("--table", action="store_true", help="print the labeling table as TSV")
    mc.add_argument("--world", help="evaluate at this world instead of the initial one")
    mc.set_defaults(run=cmd_mc)

    sat = sub.add_parser("sat", help="bounded search for a finite model")
    sat.add_argument("formula")
    sat.add_argument("--max-states", type=int, default=3)
    sat.add_argument("--max-atoms", type=int)
    sat.add_argument("--time-limit", type=float)
    sat.set_defaults(run=cmd_sat)

    un = sub.add_parser("unwind", help="export a bounded tree-like unwinding")
    un.add_argument("model")
    un.add_argument("--depth", type=int, required=True)
    un.add_argument("--out", choices=("dot", "text"), default="text")
    un.set_defaults(run=cmd_unwind)

    pg = sub.add_parser("pg", help="check a parity game under a positional strategy")
    pg.add_argument("game")
    pg.add_argument("--check", choices=("par", "npmt"), required=True)
    pg.add_argument("--npmt-variant", choices=("state", "global"), default="state",
                    help="left operand of the until: state-wise or globally quantified")
    pg.add_argument("--show-formula", action="store_true")
    pg.set_defaults(run=cmd_pg)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        code = args.run(args)
    except _Usage as exc:
        parser.error(str(exc))
    except fm.FormulaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_SYNTAX
    except UnknownAtom as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_ATOM
    except (KripkeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_MODEL
    except (BudgetExceeded, TimeLimitExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    elapsed = (time.perf_counter() - start) * 1000
    print(f"# {args.command} finished in {elapsed:.1f} ms (exit {code})", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
