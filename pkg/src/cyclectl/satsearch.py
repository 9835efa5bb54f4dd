"""Bounded search for finite models of a formula.

Structures are enumerated by world count. Within a size, worlds are
numbered in breadth-first order from the initial world (world 0), which
removes most isomorphic copies; the remaining copies are removed by a
canonical form where needed. A structure is encoded by the tuple of its
successor bitmasks followed by the label bitmask of each atom, and the
search returns the satisfying structure with the smallest encoding.

Formulas whose quantifiers have bodies of the shape ``s``, ``X s``,
``s U t``, ``F s`` or ``G s`` over state formulas are evaluated on whole
batches of structures at once with bitmask fixpoints. Other formulas are
checked one structure at a time. Every returned model is re-checked with
the automata-based checker.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from . import formula as fm
from .checker import model_check
from .formula import Formula
from .kripke import KripkeStructure

DISCLAIMER = ("no model with ≤ {n} worlds "
              "(logic lacks the finite-model property; this is not UNSAT)")


class TimeLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchBudget:
    max_worlds: int
    max_atoms: int | None = None
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_worlds < 1:
            raise ValueError("max_worlds must be at least 1")


# --------------------------------------------------------------------------
# enumeration

def _parent_sequences(n: int):
    """Breadth-first tree shapes: parent[j] < j, non-decreasing in j."""
    def rec(j, low, acc):
        if j == n:
            yield tuple(acc)
            return
        for p in range(low, j):
            yield from rec(j + 1, p, acc + [p])
    yield from rec(1, 0, [-1])


def _allowed_masks(n: int, parent: tuple, i: int) -> np.ndarray:
    """Successor masks of world ``i`` consistent with the breadth-first numbering."""
    forced = sum(1 << j for j in range(1, n) if parent[j] == i)
    free = [j for j in range(n) if not (forced >> j) & 1 and (j == 0 or i >= parent[j])]
    out = []
    for r in range(len(free) + 1):
        for combo in itertools.combinations(free, r):
            m = forced | sum(1 << j for j in combo)
            if m:
                out.append(m)
    return np.array(sorted(out), dtype=np.uint16)


def graphs(n: int) -> np.ndarray:
    """All breadth-first numbered left-total graphs on ``n`` worlds, sorted.

    Row ``r`` holds the successor bitmask of each world.
    """
    blocks = []
    for parent in _parent_sequences(n):
        options = [_allowed_masks(n, parent, i) for i in range(n)]
        grid = np.meshgrid(*options, indexing="ij")
        blocks.append(np.stack([g.ravel() for g in grid], axis=1))
    allg = np.concatenate(blocks)
    order = np.lexsort(allg.T[::-1])
    return allg[order]


def _canonical(succ: tuple, labels: tuple, n: int) -> tuple:
    best = None
    for rest in itertools.permutations(range(1, n)):
        perm = (0,) + rest
        inv = {old: new for new, old in enumerate(perm)}

        def remap(mask):
            return sum(1 << inv[j] for j in range(n) if (mask >> j) & 1)
        key = (tuple(remap(succ[old]) for old in perm), tuple(remap(m) for m in labels))
        if best is None or key < best:
            best = key
    return best


def to_kripke(n: int, succ, labels: dict) -> KripkeStructure:
    worlds = tuple(f"w{i}" for i in range(n))
    edges = frozenset((worlds[i], worlds[j]) for i in range(n) for j in range(n)
                      if (int(succ[i]) >> j) & 1)
    lab = {worlds[i]: frozenset(a for a, m in labels.items() if (int(m) >> i) & 1)
           for i in range(n)}
    return KripkeStructure(worlds, worlds[0], edges, lab, frozenset(labels))


# --------------------------------------------------------------------------
# batch evaluation

class Unsupported(Exception):
    """The formula is outside the batch-evaluable fragment."""


class BatchEvaluator:
    """Truth sets of state formulas, as world bitmasks, over many structures.

    ``succ`` has one row per structure and one successor mask per world;
    ``labels`` maps each atom to one label mask per structure.
    """

    def __init__(self, n: int, succ: np.ndarray, labels: dict):
        self.n = n
        self.succ = succ.astype(np.uint16)
        self.labels = labels
        self.full = np.uint16((1 << n) - 1)
        self.size = succ.shape[0]
        self._reach = None
        self._memo: dict = {}

    def _bit(self, mask, i):
        return (mask >> np.uint16(i)) & np.uint16(1)

    def _setbits(self, flags):
        out = np.zeros(self.size, dtype=np.uint16)
        for i, f in enumerate(flags):
            out |= f.astype(np.uint16) << np.uint16(i)
        return out

    def pre_exists(self, s):
        return self._setbits([(self.succ[:, i] & s) != 0 for i in range(self.n)])

    def pre_forall(self, s):
        miss = ~s & self.full
        return self._setbits([(self.succ[:, i] & miss) == 0 for i in range(self.n)])

    def post(self, s, succ=None):
        succ = self.succ if succ is None else succ
        out = np.zeros(self.size, dtype=np.uint16)
        for i in range(self.n):
            out |= np.where(self._bit(s, i) == 1, succ[:, i], np.uint16(0))
        return out

    def closure(self, succ):
        """Worlds reachable in one or more steps, per world."""
        reach = succ.copy()
        for j in range(self.n):
            rj = reach[:, j].copy()
            for i in range(self.n):
                reach[:, i] |= np.where(self._bit(reach[:, i], j) == 1, rj, np.uint16(0))
        return reach

    @property
    def reach(self):
        if self._reach is None:
            self._reach = self.closure(self.succ)
        return self._reach

    def cyclic(self, reach=None):
        reach = self.reach if reach is None else reach
        return self._setbits([self._bit(reach[:, i], i) == 1 for i in range(self.n)])

    def scc(self, w):
        """Worlds on some closed walk through ``w``; empty if ``w`` is on none."""
        r = self.reach
        return self._setbits([(self._bit(r[:, w], v) & self._bit(r[:, v], w)) == 1
                              for v in range(self.n)])

    def _fix(self, step, start):
        z = start
        for _ in range(self.n + 1):
            z = step(z)
        return z

    # -- formulas ---------------------------------------------------------

    def truth(self, f: Formula):
        if f in self._memo:
            return self._memo[f]
        op = f.op
        zero = np.zeros(self.size, dtype=np.uint16)
        if op == fm.ATOM:
            res = self.labels.get(f.name, zero).astype(np.uint16)
        elif op == fm.TRUE:
            res = zero + self.full
        elif op == fm.FALSE:
            res = zero
        elif op == fm.NOT:
            res = ~self.truth(f.args[0]) & self.full
        elif op == fm.AND:
            res = self.truth(f.args[0]) & self.truth(f.args[1])
        elif op == fm.OR:
            res = self.truth(f.args[0]) | self.truth(f.args[1])
        elif op == fm.IMPLIES:
            res = (~self.truth(f.args[0]) & self.full) | self.truth(f.args[1])
        elif op in (fm.EXISTS, fm.FORALL, fm.EXISTS_CYCLE, fm.FORALL_CYCLE):
            res = self._quantified(op, f.args[0])
        else:
            raise Unsupported(fm.to_text(f))
        self._memo[f] = res
        return res

    def _quantified(self, op, body: Formula):
        full = self.full
        if body.op == fm.NOT and not body.args[0].is_state:
            dual = {fm.EXISTS: fm.FORALL, fm.FORALL: fm.EXISTS,
                    fm.EXISTS_CYCLE: fm.FORALL_CYCLE, fm.FORALL_CYCLE: fm.EXISTS_CYCLE}
            return ~self._quantified(dual[op], body.args[0]) & full
        if body.is_state:
            s = self.truth(body)
            if op == fm.EXISTS_CYCLE:
                return s & self.cyclic()
            if op == fm.FORALL_CYCLE:
                return s | (~self.cyclic() & full)
            return s
        if op == fm.FORALL_CYCLE:
            flipped = {fm.NEXT: lambda a: fm.X(fm.Not(a)),
                       fm.FINALLY: lambda a: fm.G(fm.Not(a)),
                       fm.GLOBALLY: lambda a: fm.F(fm.Not(a))}
            if body.op not in flipped:
                raise Unsupported(fm.to_text(body))
            return ~self._quantified(fm.EXISTS_CYCLE, flipped[body.op](body.args[0])) & full
        args = [self._state(a) for a in body.args]
        if body.op == fm.FINALLY:
            body = fm.U(fm.Top, body.args[0])
            args = [np.zeros(self.size, np.uint16) + self.full] + args
        if op == fm.EXISTS_CYCLE:
            return self._exists_cycle(body.op, args)
        pre = self.pre_exists if op == fm.EXISTS else self.pre_forall
        if body.op == fm.NEXT:
            return pre(args[0])
        if body.op == fm.UNTIL:
            a, b = args
            return self._fix(lambda z: b | (a & pre(z)), np.zeros(self.size, np.uint16))
        if body.op == fm.GLOBALLY:
            (a,) = args
            return self._fix(lambda z: a & pre(z), a)
        raise Unsupported(fm.to_text(body))

    def _state(self, f: Formula):
        if not f.is_state:
            raise Unsupported(fm.to_text(f))
        return self.truth(f)

    def _exists_cycle(self, op, args):
        n = self.n
        flags = []
        if op == fm.GLOBALLY:
            (s,) = args
            sub = np.stack([np.where(self._bit(s, i) == 1, self.succ[:, i] & s, np.uint16(0))
                            for i in range(n)], axis=1)
            return s & self.cyclic(self.closure(sub))
        for w in range(n):
            comp = self.scc(w)
            on = comp != 0
            if op == fm.NEXT:
                (s,) = args
                back = comp | np.uint16(1 << w)
                flags.append((self.succ[:, w] & s & back & np.where(on, self.full, 0)) != 0)
            elif op == fm.UNTIL:
                a, b = args
                y = np.where(on, np.uint16(1 << w), np.uint16(0))
                for _ in range(n):
                    y = y | (self.post(y & a) & comp)
                flags.append((y & b & comp) != 0)
            else:
                raise Unsupported(op)
        return self._setbits(flags)


def batch_supported(phi: Formula) -> bool:
    ev = BatchEvaluator(1, np.ones((1, 1), dtype=np.uint16), {})
    try:
        ev.truth(phi)
    except Unsupported:
        return False
    return True


# --------------------------------------------------------------------------
# search

def _label_grid(n: int, count: int) -> np.ndarray:
    """All label assignments for ``count`` atoms, sorted; one column per atom."""
    if count == 0:
        return np.zeros((1, 0), dtype=np.uint16)
    vals = np.arange(1 << n, dtype=np.uint16)
    grid = np.meshgrid(*([vals] * count), indexing="ij")
    return np.stack([g.ravel() for g in grid], axis=1)


def _first_hit_batch(phi, n, gs, labs, names, deadline):
    chunk = max(1, 2_000_000 // max(1, len(labs)))
    for start in range(0, len(gs), chunk):
        if deadline is not None and time.monotonic() > deadline:
            raise TimeLimitExceeded(f"time limit exceeded at {n} worlds")
        g = gs[start:start + chunk]
        succ = np.repeat(g, len(labs), axis=0)
        lab = np.tile(labs, (len(g), 1))
        ev = BatchEvaluator(n, succ, {a: lab[:, i] for i, a in enumerate(names)})
        hits = np.nonzero(ev.truth(phi) & np.uint16(1))[0]
        if len(hits):
            r = int(hits[0])
            return tuple(int(x) for x in succ[r]), tuple(int(x) for x in lab[r])
    return None


def _first_hit_slow(phi, n, gs, labs, names, deadline):
    seen = set()
    for g in gs:
        for lab in labs:
            if deadline is not None and time.monotonic() > deadline:
                raise TimeLimitExceeded(f"time limit exceeded at {n} worlds")
            succ = tuple(int(x) for x in g)
            lab = tuple(int(x) for x in lab)
            key = _canonical(succ, lab, n)
            if key in seen:
                continue
            seen.add(key)
            k = to_kripke(n, succ, dict(zip(names, lab)))
            if model_check(k, phi)[0].truth:
                return succ, lab
    return None


def sat_search(phi: Formula, budget: SearchBudget) -> KripkeStructure | None:
    """Smallest model of ``phi`` with at most ``budget.max_worlds`` worlds, if any.

    ``None`` means no model within the bound, not unsatisfiability.
    """
    deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
    names = sorted(fm.atoms(phi))
    used = names if budget.max_atoms is None else names[:budget.max_atoms]
    fast = batch_supported(phi)
    find = _first_hit_batch if fast else _first_hit_slow
    for n in range(1, budget.max_worlds + 1):
        gs = graphs(n)
        labs = _label_grid(n, len(used))
        hit = find(phi, n, gs, labs, used, deadline)
        if hit is None:
            continue
        succ, lab = hit
        labels = dict(zip(used, lab))
        labels.update({a: 0 for a in names if a not in labels})
        k = to_kripke(n, succ, labels)
        if not model_check(k, phi)[0].truth:
            raise AssertionError("candidate model failed re-verification")
        return k
    return None
