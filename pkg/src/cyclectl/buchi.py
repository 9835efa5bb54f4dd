"""LTL to Büchi translation, Kripke products and lasso-producing emptiness checks.

Automaton states are truth assignments to the elementary subformulas (atoms,
``X`` and ``U`` nodes) of the desugared path formula. Reading a letter is only
possible from a state whose atom assignment equals the letter restricted to
the atoms the formula mentions.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from . import formula as fm
from .formula import Formula
from .kripke import KripkeStructure, UnknownWorld


class AutomatonSizeError(AssertionError):
    """A construction exceeded its proven size bound."""


@dataclass(frozen=True, eq=False)
class GNBA:
    """Generalized Büchi automaton over sets of atom names.

    ``guard[q]`` is the exact set of ``atoms`` that must hold in a letter read
    from ``q``; ``succ[q]`` lists the states reachable by any readable letter.
    """

    states: tuple
    initial: frozenset
    accepting: tuple
    atoms: frozenset
    guard: Mapping[Hashable, frozenset]
    succ: Mapping[Hashable, tuple]

    def step(self, q, letter: Iterable[str]) -> tuple:
        if self.atoms.intersection(letter) != self.guard[q]:
            return ()
        return self.succ[q]

    def transitions(self):
        """Yield ``(q, letter, q')`` with the letter restricted to ``atoms``."""
        for q in self.states:
            for r in self.succ[q]:
                yield q, self.guard[q], r


@dataclass(frozen=True, eq=False)
class NBA(GNBA):
    """Büchi automaton: a GNBA with exactly one accepting set."""

    @property
    def final(self) -> frozenset:
        return self.accepting[0]


class _Tableau:
    def __init__(self, psi: Formula):
        core = fm.desugar(psi)
        if any(g.op in fm.QUANTIFIERS for g in fm.subformulas(core)):
            raise ValueError("path formula still contains path quantifiers; "
                             "replace quantified subformulas by atoms first")
        self.core = core
        order: dict[Formula, None] = {}
        for g in fm.subformulas(core):
            order.setdefault(g, None)
        self.order = list(order)
        self.elementary = [g for g in self.order if g.op in (fm.ATOM, fm.NEXT, fm.UNTIL)]
        self.untils = [g for g in self.order if g.op == fm.UNTIL]
        self.nexts = [g for g in self.order if g.op == fm.NEXT]
        self.atom_nodes = [g for g in self.order if g.op == fm.ATOM]

    def evaluate(self, assignment: dict[Formula, bool]) -> dict[Formula, bool]:
        val = dict(assignment)
        for g in self.order:
            if g in val:
                continue
            if g.op == fm.TRUE:
                val[g] = True
            elif g.op == fm.NOT:
                val[g] = not val[g.args[0]]
            elif g.op == fm.AND:
                val[g] = val[g.args[0]] and val[g.args[1]]
            elif g.op == fm.OR:
                val[g] = val[g.args[0]] or val[g.args[1]]
            else:
                raise AssertionError(g.op)
        return val

    def consistent(self, val: dict[Formula, bool]) -> bool:
        for u in self.untils:
            a, b = u.args
            if val[b] and not val[u]:
                return False
            if val[u] and not val[b] and not val[a]:
                return False
        return True

    def linked(self, s: dict, t: dict) -> bool:
        for x in self.nexts:
            if s[x] != t[x.args[0]]:
                return False
        for u in self.untils:
            a, b = u.args
            if s[u] != (s[b] or (s[a] and t[u])):
                return False
        return True


def ltl_to_gnba(psi: Formula) -> GNBA:
    """Tableau construction with one accepting set per until subformula."""
    tab = _Tableau(psi)
    vals = []
    for bits in itertools.product((False, True), repeat=len(tab.elementary)):
        val = tab.evaluate(dict(zip(tab.elementary, bits)))
        if tab.consistent(val):
            vals.append(val)
    succ_all = {i: tuple(j for j, t in enumerate(vals) if tab.linked(s, t))
                for i, s in enumerate(vals)}
    initial = [i for i, v in enumerate(vals) if v[tab.core]]
    # keep only states reachable from an initial state
    seen = set(initial)
    queue = deque(initial)
    while queue:
        i = queue.popleft()
        for j in succ_all[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    states = tuple(sorted(seen))
    atoms = frozenset(g.name for g in tab.atom_nodes)
    guard = {i: frozenset(g.name for g in tab.atom_nodes if vals[i][g]) for i in states}
    succ = {i: succ_all[i] for i in states}
    if tab.untils:
        accepting = tuple(frozenset(i for i in states if not vals[i][u] or vals[i][u.args[1]])
                          for u in tab.untils)
    else:
        accepting = (frozenset(states),)
    return GNBA(states, frozenset(initial), accepting, atoms, guard, succ)


def nba_size_bound(psi: Formula) -> int:
    return 2 ** (fm.closure_size(psi) + 1)


def ltl_to_nba(psi: Formula) -> NBA:
    """Translate a quantifier-free path formula to a (degeneralized) NBA.

    Raises ValueError when ``psi`` still contains path quantifiers.
    """
    nba = degeneralize(ltl_to_gnba(psi))
    if len(nba.states) > nba_size_bound(psi):
        raise AutomatonSizeError(
            f"{len(nba.states)} states exceed 2^(|cl|+1) for {fm.to_text(psi)}")
    return nba


def _degeneralize_automaton(g: GNBA) -> NBA:
    m = len(g.accepting)
    if m == 1:
        return NBA(g.states, g.initial, g.accepting, g.atoms, g.guard, g.succ)
    states = tuple((q, i) for i in range(m) for q in g.states)
    succ = {}
    for q, i in states:
        j = (i + 1) % m if q in g.accepting[i] else i
        succ[(q, i)] = tuple((r, j) for r in g.succ[q])
    guard = {(q, i): g.guard[q] for q, i in states}
    initial = frozenset((q, 0) for q in g.initial)
    final = frozenset((q, 0) for q in g.accepting[0])
    if len(states) > m * len(g.states):
        raise AutomatonSizeError("degeneralization exceeded m * |Q|")
    return NBA(states, initial, (final,), g.atoms, guard, succ)


# --------------------------------------------------------------------------
# products

@dataclass(frozen=True, eq=False)
class ProductGraph:
    """Explicit graph with generalized Büchi acceptance.

    ``world`` maps each node to the Kripke world it projects to.
    """

    nodes: tuple
    succ: Mapping[Hashable, tuple]
    initial: tuple
    accepting: tuple
    world: Callable = field(default=lambda n: n[0])

    def __len__(self):
        return len(self.nodes)

    def is_accepting(self, node, i: int = 0) -> bool:
        return node in self.accepting[i]


def product(k: KripkeStructure, start, nba: GNBA, table=None) -> ProductGraph:
    """Reachable part of ``k`` (from ``start``) synchronized with ``nba``.

    ``table`` supplies extended labels through ``table.extended_label(w)``;
    without it the plain Kripke labels are read.
    """
    if start not in k:
        raise UnknownWorld(start)
    if table is None:
        letter = k.labels.__getitem__
    else:
        letter = table.extended_label
    return synchronize(start, k.successors, letter, nba)


def synchronize(start, successors: Callable, letter: Callable, nba: GNBA,
                world: Callable = lambda x: x) -> ProductGraph:
    """Product of an arbitrary rooted graph with ``nba``.

    Nodes are ``(vertex, q)``; ``letter(vertex)`` is the set of atoms read
    there and ``world(vertex)`` its Kripke world. Vertices may be dead ends.
    """
    letters: dict = {}
    init = tuple((start, q) for q in sorted(nba.initial))
    seen = set(init)
    order = list(init)
    succ = {}
    queue = deque(init)
    while queue:
        node = queue.popleft()
        x, q = node
        if x not in letters:
            letters[x] = letter(x)
        targets = nba.step(q, letters[x])
        out = []
        if targets:
            for v in successors(x):
                for r in targets:
                    nxt = (v, r)
                    out.append(nxt)
                    if nxt not in seen:
                        seen.add(nxt)
                        order.append(nxt)
                        queue.append(nxt)
        succ[node] = tuple(out)
    nodes = tuple(order)
    accepting = tuple(frozenset(n for n in nodes if n[1] in acc) for acc in nba.accepting)
    return ProductGraph(nodes, succ, init, accepting, lambda n: world(n[0]))


def add_anchor_condition(p: ProductGraph, anchor) -> ProductGraph:
    """Additionally require the run to visit ``anchor`` infinitely often."""
    anchored = frozenset(n for n in p.nodes if p.world(n) == anchor)
    return ProductGraph(p.nodes, p.succ, p.initial, p.accepting + (anchored,), p.world)


def degeneralize(g):
    """Reduce generalized acceptance to a single set with a round-robin counter."""
    if isinstance(g, GNBA):
        return _degeneralize_automaton(g)
    m = len(g.accepting)
    if m == 0:
        raise ValueError("at least one acceptance set is required")
    if m == 1:
        return g
    start = tuple((n, 0) for n in g.initial)
    seen = set(start)
    order = list(start)
    succ = {}
    queue = deque(start)
    while queue:
        node = queue.popleft()
        n, i = node
        j = (i + 1) % m if n in g.accepting[i] else i
        out = tuple((r, j) for r in g.succ[n])
        succ[node] = out
        for nxt in out:
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
                queue.append(nxt)
    if len(order) > m * len(g.nodes):
        raise AutomatonSizeError("degeneralization exceeded m * |nodes|")
    nodes = tuple(order)
    final = frozenset(node for node in nodes if node[1] == 0 and node[0] in g.accepting[0])
    inner = g.world
    return ProductGraph(nodes, succ, start, (final,), lambda node: inner(node[0]))


# --------------------------------------------------------------------------
# emptiness

@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic path ``prefix · loop^ω``."""

    prefix: tuple
    loop: tuple
    anchor: object = None

    def __post_init__(self):
        if not self.loop:
            raise ValueError("a lasso needs a nonempty loop")
        if self.anchor is not None:
            if self.anchor not in self.loop:
                raise ValueError("anchor must lie on the loop")
            if self.first != self.anchor:
                raise ValueError("anchor must be the first element of the path")

    @property
    def first(self):
        return self.prefix[0] if self.prefix else self.loop[0]

    def map(self, f: Callable) -> "Lasso":
        return Lasso(tuple(f(x) for x in self.prefix), tuple(f(x) for x in self.loop))

    def with_anchor(self, anchor) -> "Lasso":
        return Lasso(self.prefix, self.loop, anchor)

    def __len__(self):
        return len(self.prefix) + len(self.loop)

    def normalized(self) -> "Lasso":
        """Same infinite sequence with the shortest period and prefix."""
        loop = self.loop
        n = len(loop)
        for d in range(1, n + 1):
            if n % d == 0 and loop == loop[:d] * (n // d):
                loop = loop[:d]
                break
        prefix = self.prefix
        while prefix and prefix[-1] == loop[-1]:
            prefix = prefix[:-1]
            loop = loop[-1:] + loop[:-1]
        return Lasso(prefix, loop, self.anchor)

    def unroll(self, n: int) -> list:
        out = list(self.prefix)
        while len(out) < n:
            out.extend(self.loop)
        return out[:n]


def strongly_connected_components(nodes: Sequence, succ: Mapping) -> list[list]:
    """Iterative Tarjan; components come out in reverse topological order."""
    index: dict = {}
    low: dict = {}
    on_stack: set = set()
    stack: list = []
    comps: list[list] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ[root]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ[w])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                comps.append(comp)
    return comps


def _accepting_cores(p: ProductGraph) -> list:
    """Reachable accepting nodes lying on some cycle, in node order."""
    if len(p.accepting) != 1:
        raise ValueError("degeneralize the product first")
    final = p.accepting[0]
    if not final:
        return []
    reach, _ = _bfs(p.initial, p.succ)
    good = set()
    for comp in strongly_connected_components([n for n in p.nodes if n in reach], p.succ):
        if len(comp) == 1:
            v = comp[0]
            if v not in p.succ[v]:
                continue
        good.update(v for v in comp if v in final)
    return [n for n in p.nodes if n in good]


def is_empty(p: ProductGraph) -> bool:
    return not _accepting_cores(p)


def _bfs(sources: Iterable, succ: Mapping, target=None):
    parent: dict = {}
    dist: dict = {}
    queue = deque()
    for s in sources:
        if s not in dist:
            dist[s] = 0
            parent[s] = None
            queue.append(s)
    while queue:
        v = queue.popleft()
        if v == target:
            break
        for w in succ[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue.append(w)
    return dist, parent


def _path_to(parent: dict, v) -> list:
    out = []
    while v is not None:
        out.append(v)
        v = parent[v]
    return out[::-1]


def _shortest_cycle(p: ProductGraph, f) -> list | None:
    dist, parent = _bfs(p.succ[f], p.succ, target=f)
    if f not in dist:
        return None
    path = _path_to(parent, f)
    # path runs from a successor of f back to f; rotate so that f comes first
    return [f] + path[:-1]


def find_accepting_lasso(p: ProductGraph) -> Lasso | None:
    """Some accepting lasso of the single-acceptance graph ``p``, or None.

    The witness minimizes the length of (shortest prefix to an accepting
    node) + (shortest cycle through it), ties broken by node order; common
    tail elements of prefix and loop are then folded into the loop.
    """
    cores = _accepting_cores(p)
    if not cores:
        return None
    dist, parent = _bfs(p.initial, p.succ)
    order = {n: i for i, n in enumerate(p.nodes)}
    best = None
    for f in cores:
        if f not in dist:
            continue
        cycle = _shortest_cycle(p, f)
        key = (dist[f] + len(cycle), order[f])
        if best is None or key < best[0]:
            best = (key, f, cycle)
    _, f, cycle = best
    prefix = _path_to(parent, f)[:-1]
    loop = cycle
    while prefix and prefix[-1] == loop[-1]:
        loop = [prefix.pop()] + loop[:-1]
    return Lasso(tuple(prefix), tuple(loop))


def replay(p: ProductGraph, lasso: Lasso) -> bool:
    """Check that ``lasso`` is a run of ``p`` visiting acceptance inside the loop."""
    run = list(lasso.prefix) + list(lasso.loop)
    if run[0] not in p.initial:
        return False
    for a, b in zip(run, run[1:]):
        if b not in p.succ.get(a, ()):
            return False
    if lasso.loop[0] not in p.succ.get(lasso.loop[-1], ()):
        return False
    return all(any(n in acc for n in lasso.loop) for acc in p.accepting)


def is_path(k: KripkeStructure, lasso: Lasso) -> bool:
    """Whether ``lasso`` (over worlds) is a legal infinite path of ``k``."""
    run = list(lasso.prefix) + list(lasso.loop)
    if any(w not in k for w in run):
        return False
    for a, b in zip(run, run[1:]):
        if b not in k.successors(a):
            return False
    return lasso.loop[0] in k.successors(lasso.loop[-1])


def word_structure(prefix: Sequence[frozenset], loop: Sequence[frozenset]) -> KripkeStructure:
    """Encode an ultimately periodic word as a single-path Kripke structure."""
    letters = list(prefix) + list(loop)
    n = len(letters)
    edges = {(i, i + 1) for i in range(n - 1)}
    edges.add((n - 1, len(prefix)))
    return KripkeStructure(tuple(range(n)), 0, frozenset(edges),
                           {i: frozenset(l) for i, l in enumerate(letters)},
                           frozenset().union(*letters))


def accepts(nba: GNBA, prefix: Sequence[frozenset], loop: Sequence[frozenset]) -> bool:
    """Membership of the word ``prefix · loop^ω`` via product emptiness."""
    k = word_structure(prefix, loop)
    p = degeneralize(product(k, 0, nba))
    return not is_empty(p)
