"""Brute-force evaluator for Cycle-CTL* used as a test oracle.

Path quantifiers range over lassos ``u · v^ω``. Loops ``v`` are enumerated
explicitly as closed walks of bounded length. Prefixes are not enumerated:
the truth vector of a position follows from its letter and the vector of
the next position, so propagating loop vectors backwards along the edges
covers every prefix of any length. The oracle shares no code with the
automata pipeline.
"""
from __future__ import annotations

from collections import deque
from itertools import product as cartesian

from . import formula as fm
from . import semantics
from .formula import Formula
from .kripke import KripkeStructure, UnknownWorld


class BudgetExceeded(RuntimeError):
    """The loop enumeration would exceed the configured cap."""


DEFAULT_CAP = 250_000


def default_loop_bound(k: KripkeStructure) -> int:
    return 2 * len(k.worlds)


class _Stepper:
    def __init__(self, order: list[Formula]):
        pos = {g: i for i, g in enumerate(order)}
        self.code = []
        for g in order:
            args = tuple(pos[a] for a in g.args)
            self.code.append((g.op, g.name, args, pos[g]))

    def __call__(self, letter, following: tuple) -> tuple:
        out: list[bool] = []
        for op, name, args, me in self.code:
            if op == fm.ATOM:
                v = name in letter
            elif op == fm.TRUE:
                v = True
            elif op == fm.FALSE:
                v = False
            elif op == fm.NOT:
                v = not out[args[0]]
            elif op == fm.AND:
                v = out[args[0]] and out[args[1]]
            elif op == fm.OR:
                v = out[args[0]] or out[args[1]]
            elif op == fm.IMPLIES:
                v = (not out[args[0]]) or out[args[1]]
            elif op == fm.NEXT:
                v = following[args[0]]
            elif op == fm.UNTIL:
                v = out[args[1]] or (out[args[0]] and following[me])
            elif op == fm.FINALLY:
                v = out[args[0]] or following[me]
            elif op == fm.GLOBALLY:
                v = out[args[0]] and following[me]
            else:
                raise AssertionError(op)
            out.append(v)
        return tuple(out)


class Oracle:
    """Memoizing evaluator of state formulas at all worlds of ``k``."""

    def __init__(self, k: KripkeStructure, max_loop: int | None = None,
                 cap: int = DEFAULT_CAP, simple_segments: int = 2):
        self.k = k
        self.max_loop = default_loop_bound(k) if max_loop is None else max_loop
        self.cap = cap
        self.simple_segments = simple_segments
        self.memo: dict[Formula, dict] = {}
        self._loops: list[tuple] | None = None
        self.preds = {w: [] for w in k.worlds}
        for w in k.worlds:
            for v in k.successors(w):
                self.preds[v].append(w)

    # -- loops -----------------------------------------------------------

    def loops(self) -> list[tuple]:
        """Closed walks of length <= max_loop, each starting at its least world."""
        if self._loops is not None:
            return self._loops
        k = self.k
        out: list[tuple] = []
        for s in k.worlds:
            low = k.index(s)
            stack = [(s,)]
            while stack:
                walk = stack.pop()
                for v in k.successors(walk[-1]):
                    if v == s:
                        out.append(walk)
                        if len(out) > self.cap:
                            raise BudgetExceeded(
                                f"more than {self.cap} loops of length <= {self.max_loop}")
                    if len(walk) < self.max_loop and k.index(v) >= low:
                        stack.append(walk + (v,))
        self._loops = out
        return out

    # -- state formulas --------------------------------------------------

    def truth(self, phi: Formula) -> dict:
        if phi in self.memo:
            return self.memo[phi]
        k = self.k
        op = phi.op
        if op == fm.ATOM:
            res = {w: phi.name in k.labels[w] for w in k.worlds}
        elif op == fm.TRUE:
            res = dict.fromkeys(k.worlds, True)
        elif op == fm.FALSE:
            res = dict.fromkeys(k.worlds, False)
        elif op == fm.NOT:
            a = self.truth(phi.args[0])
            res = {w: not a[w] for w in k.worlds}
        elif op in (fm.AND, fm.OR, fm.IMPLIES):
            a, b = (self.truth(x) for x in phi.args)
            if op == fm.AND:
                res = {w: a[w] and b[w] for w in k.worlds}
            elif op == fm.OR:
                res = {w: a[w] or b[w] for w in k.worlds}
            else:
                res = {w: (not a[w]) or b[w] for w in k.worlds}
        elif op in fm.QUANTIFIERS:
            res = self._quantifier(phi)
        else:
            raise fm.FormulaCategoryError(f"{fm.to_text(phi)} is not a state formula")
        self.memo[phi] = res
        return res

    def _abstract(self, body: Formula):
        """Replace maximal quantified subformulas of ``body`` by fresh atoms."""
        mapping: dict[Formula, Formula] = {}
        extra = {w: set() for w in self.k.worlds}

        def visit(g: Formula):
            if g.op in fm.QUANTIFIERS:
                if g not in mapping:
                    name = f"_o{len(self.memo)}_{len(mapping)}"
                    mapping[g] = fm.Atom(name)
                    for w, v in self.truth(g).items():
                        if v:
                            extra[w].add(name)
                return
            for a in g.args:
                visit(a)

        visit(body)
        letters = {w: self.k.labels[w] | extra[w] for w in self.k.worlds}
        return fm.replace(body, mapping), letters

    def _quantifier(self, phi: Formula) -> dict:
        op = phi.op
        body, letters = self._abstract(phi.args[0])
        if op in (fm.FORALL, fm.FORALL_CYCLE):
            body = fm.Not(body)
        if op in (fm.EXISTS, fm.FORALL):
            found = self._exists(body, letters)
        elif op in (fm.EXISTS_CYCLE, fm.FORALL_CYCLE):
            found = self._exists_cycle(body, letters)
        else:
            found = {w: self._exists_simple(body, letters, w) for w in self.k.worlds}
        if op in (fm.FORALL, fm.FORALL_CYCLE):
            return {w: not v for w, v in found.items()}
        return found

    # -- path search -----------------------------------------------------

    def _loop_vectors(self, psi: Formula, letters, order) -> list:
        """Pairs ``(loop, vectors)``: the truth vector at each loop position."""
        out = []
        cache: dict = {}
        for loop in self.loops():
            word = tuple(letters[x] for x in loop)
            if word not in cache:
                table = semantics.truth_table(psi, [], word)
                cache[word] = [tuple(table[g][i] for g in order) for i in range(len(word))]
            out.append((loop, cache[word]))
        return out

    def _backward(self, seeds: set, letters, step) -> set:
        reached = set(seeds)
        queue = deque(seeds)
        while queue:
            y, vec = queue.popleft()
            for z in self.preds[y]:
                item = (z, step(letters[z], vec))
                if item not in reached:
                    reached.add(item)
                    queue.append(item)
        return reached

    def _exists(self, psi: Formula, letters) -> dict:
        order = semantics.closure_order(psi)
        top = order.index(psi)
        seeds = set()
        for loop, vecs in self._loop_vectors(psi, letters, order):
            seeds.update(zip(loop, vecs))
        reached = self._backward(seeds, letters, _Stepper(order))
        res = dict.fromkeys(self.k.worlds, False)
        for w, vec in reached:
            if vec[top]:
                res[w] = True
        return res

    def _exists_cycle(self, psi: Formula, letters) -> dict:
        order = semantics.closure_order(psi)
        top = order.index(psi)
        step = _Stepper(order)
        pairs = self._loop_vectors(psi, letters, order)
        res = {}
        for w in self.k.worlds:
            seeds = set()
            for loop, vecs in pairs:
                if w in loop:
                    seeds.update(zip(loop, vecs))
            if any(x == w and vec[top] for x, vec in seeds):
                res[w] = True
                continue
            reached = self._backward(seeds, letters, step)
            res[w] = any(x == w and vec[top] for x, vec in reached)
        return res

    def _exists_simple(self, psi: Formula, letters, w) -> bool:
        cycles = simple_cycles(self.k, w)
        n = self.simple_segments
        for pre_len in range(0, n + 1):
            for loop_len in range(1, n + 1):
                for pre in cartesian(cycles, repeat=pre_len):
                    for loop in cartesian(cycles, repeat=loop_len):
                        u = [letters[x] for c in pre for x in c]
                        v = [letters[x] for c in loop for x in c]
                        if semantics.holds(psi, u, v):
                            return True
        return False


def simple_cycles(k: KripkeStructure, w) -> list[tuple]:
    out = []
    stack = [(w,)]
    while stack:
        path = stack.pop()
        for v in k.successors(path[-1]):
            if v == w:
                out.append(path)
            elif v not in path:
                stack.append(path + (v,))
    return out


def brute_force_eval(k: KripkeStructure, phi: Formula, world=None,
                     max_loop: int | None = None, cap: int = DEFAULT_CAP) -> bool:
    """Evaluate ``phi`` at ``world`` (default: initial) by lasso enumeration.

    Complete for every path property whose witnesses include a lasso with
    loop length at most ``max_loop`` (default ``2 * |W|``); prefixes are
    unbounded. Raises BudgetExceeded past ``cap`` candidate loops.
    """
    w = k.initial if world is None else world
    if w not in k:
        raise UnknownWorld(w)
    return Oracle(k, max_loop, cap).truth(phi)[w]


def brute_force_all(k: KripkeStructure, phi: Formula, max_loop: int | None = None,
                    cap: int = DEFAULT_CAP) -> dict:
    return Oracle(k, max_loop, cap).truth(phi)
