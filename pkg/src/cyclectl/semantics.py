"""Direct evaluation of quantifier-free path formulas on ultimately periodic words.

A word is ``prefix · loop^ω`` with letters given as sets of atom names.
Nothing here goes through automata; the evaluators follow the recursive
clauses of the semantics, with least (``U``, ``F``) and greatest (``G``)
fixpoints computed around the loop.
"""
from __future__ import annotations

from typing import Sequence

from . import formula as fm
from .formula import Formula


def closure_order(psi: Formula) -> list[Formula]:
    """Distinct subformulas of ``psi``, children before parents."""
    seen: dict[Formula, None] = {}
    for g in fm.subformulas(psi):
        if g.op in fm.QUANTIFIERS:
            raise ValueError(f"quantified subformula {fm.to_text(g)} must be replaced by an atom")
        seen.setdefault(g, None)
    return list(seen)


def truth_table(psi: Formula, prefix: Sequence, loop: Sequence) -> dict[Formula, list[bool]]:
    """Truth of every subformula of ``psi`` at each position of the word.

    Positions run over ``prefix`` followed by one copy of ``loop``; the
    successor of the last position is the first loop position.
    """
    if not loop:
        raise ValueError("the loop of an ultimately periodic word must be nonempty")
    letters = list(prefix) + list(loop)
    n = len(letters)
    start = len(prefix)
    nxt = [i + 1 for i in range(n - 1)] + [start]
    val: dict[Formula, list[bool]] = {}
    for g in closure_order(psi):
        op = g.op
        if op == fm.ATOM:
            val[g] = [g.name in letter for letter in letters]
        elif op == fm.TRUE:
            val[g] = [True] * n
        elif op == fm.FALSE:
            val[g] = [False] * n
        elif op == fm.NOT:
            val[g] = [not x for x in val[g.args[0]]]
        elif op == fm.AND:
            a, b = (val[x] for x in g.args)
            val[g] = [x and y for x, y in zip(a, b)]
        elif op == fm.OR:
            a, b = (val[x] for x in g.args)
            val[g] = [x or y for x, y in zip(a, b)]
        elif op == fm.IMPLIES:
            a, b = (val[x] for x in g.args)
            val[g] = [(not x) or y for x, y in zip(a, b)]
        elif op == fm.NEXT:
            a = val[g.args[0]]
            val[g] = [a[nxt[i]] for i in range(n)]
        elif op in (fm.UNTIL, fm.FINALLY):
            if op == fm.UNTIL:
                a, b = (val[x] for x in g.args)
            else:
                a, b = [True] * n, val[g.args[0]]
            out = [False] * n
            # two backward sweeps reach the least fixpoint around the loop
            for _ in range(2):
                for i in range(n - 1, -1, -1):
                    out[i] = b[i] or (a[i] and out[nxt[i]])
            val[g] = out
        elif op == fm.GLOBALLY:
            a = val[g.args[0]]
            out = [True] * n
            for _ in range(2):
                for i in range(n - 1, -1, -1):
                    out[i] = a[i] and out[nxt[i]]
            val[g] = out
        else:
            raise AssertionError(op)
    return val


def holds(psi: Formula, prefix: Sequence, loop: Sequence) -> bool:
    """Whether ``prefix · loop^ω`` satisfies ``psi`` at position 0."""
    return truth_table(psi, prefix, loop)[psi][0]


def step_vector(order: Sequence[Formula], letter, following: tuple) -> tuple:
    """Truth vector at a position from its letter and the next position's vector.

    Exact on any position whose suffix is fixed: every clause of the
    semantics determines the current value from the current letter and the
    successor's values.
    """
    pos = {g: i for i, g in enumerate(order)}
    out: list[bool] = []
    for g in order:
        op = g.op
        if op == fm.ATOM:
            v = g.name in letter
        elif op == fm.TRUE:
            v = True
        elif op == fm.FALSE:
            v = False
        elif op == fm.NOT:
            v = not out[pos[g.args[0]]]
        elif op == fm.AND:
            v = out[pos[g.args[0]]] and out[pos[g.args[1]]]
        elif op == fm.OR:
            v = out[pos[g.args[0]]] or out[pos[g.args[1]]]
        elif op == fm.IMPLIES:
            v = (not out[pos[g.args[0]]]) or out[pos[g.args[1]]]
        elif op == fm.NEXT:
            v = following[pos[g.args[0]]]
        elif op == fm.UNTIL:
            v = out[pos[g.args[1]]] or (out[pos[g.args[0]]] and following[pos[g]])
        elif op == fm.FINALLY:
            v = out[pos[g.args[0]]] or following[pos[g]]
        elif op == fm.GLOBALLY:
            v = out[pos[g.args[0]]] and following[pos[g]]
        else:
            raise AssertionError(op)
        out.append(v)
    return tuple(out)
