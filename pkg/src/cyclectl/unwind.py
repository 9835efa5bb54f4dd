"""Bounded tree-like unwindings, trees with back edges and bisimulation checks.

A node of the unwinding is a tuple of ``(world, flag)`` letters with flag
``"new"`` or ``"cycle"``; the root is the empty tuple. The unwinding is
infinite, so everything here works on the prefix of nodes up to a depth.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Mapping

from .kripke import KripkeStructure, UnknownWorld

NEW = "new"
CYCLE = "cycle"
UP = "↑"
SHORT = {NEW: "n", CYCLE: "c"}


class BoundTooLarge(ValueError):
    """The loop bound exceeds the depth of the prefix."""


class CannotDuplicateInitial(ValueError):
    pass


@dataclass(frozen=True)
class TreeWithBackEdges:
    """A finite tree plus a partial back-edge map.

    ``children`` is the tree relation; ``back`` maps a node to the target of
    its single back edge. ``projection`` is set for unwindings and maps each
    node to the world it copies. ``depth`` bounds node length when the tree
    is a prefix of an unwinding; nodes shorter than it are interior.
    """

    root: object
    nodes: tuple
    children: Mapping
    back: Mapping
    labels: Mapping
    depth: int | None = None
    projection: Mapping | None = None

    def successors(self, n) -> tuple:
        out = tuple(self.children.get(n, ()))
        return out + (self.back[n],) if n in self.back else out

    def is_interior(self, n) -> bool:
        return self.depth is None or len(n) < self.depth

    def without_back_edge(self, n) -> "TreeWithBackEdges":
        back = {x: y for x, y in self.back.items() if x != n}
        return TreeWithBackEdges(self.root, self.nodes, self.children, back,
                                 self.labels, self.depth, self.projection)


def projection(k: KripkeStructure, node: tuple):
    return node[-1][0] if node else k.initial


def initial_cycle_state(node: tuple) -> tuple | None:
    """Parent of the closest ancestor-or-self whose last flag is new.

    Every node but the root has one, since the first letter is always new.
    """
    for i in range(len(node) - 1, -1, -1):
        if node[i][1] == NEW:
            return node[:i]
    return None


def unwind_bounded(k: KripkeStructure, depth: int) -> TreeWithBackEdges:
    """All unwinding nodes of length at most ``depth``.

    Nodes shorter than ``depth`` carry all their forward and back edges;
    nodes of length ``depth`` form the frontier and have no outgoing edges.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    root = ()
    nodes = [root]
    children: dict = {}
    back: dict = {}
    queue = deque([root])
    while queue:
        n = queue.popleft()
        if len(n) == depth:
            # frontier: retained but not expanded
            children[n] = ()
            continue
        here = projection(k, n)
        u = initial_cycle_state(n)
        target = projection(k, u) if u is not None else None
        kids = []
        for v in k.successors(here):
            kids.append(n + ((v, NEW),))
            if u is not None:
                if target != v:
                    kids.append(n + ((v, CYCLE),))
                else:
                    back[n] = u
        children[n] = tuple(kids)
        nodes.extend(kids)
        queue.extend(kids)
    labels = {n: k.labels[projection(k, n)] for n in nodes}
    pr = {n: projection(k, n) for n in nodes}
    return TreeWithBackEdges(root, tuple(nodes), children, back, labels, depth, pr)


# --------------------------------------------------------------------------
# validation

@dataclass
class ConditionResult:
    ok: bool
    counterexample: tuple | None = None
    detail: str = ""


@dataclass
class ValidationReport:
    conditions: dict = field(default_factory=dict)
    header: str = ("condition (iv) is checked only for pairs where both "
                   "back edges are defined")

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.conditions.values())

    def __str__(self) -> str:
        lines = [f"# {self.header}"]
        for name, r in self.conditions.items():
            status = "pass" if r.ok else f"FAIL {r.counterexample} {r.detail}".rstrip()
            lines.append(f"({name}) {status}")
        return "\n".join(lines)


def _parents(t: TreeWithBackEdges):
    parent: dict = {}
    clash = None
    for n in t.nodes:
        for c in t.children.get(n, ()):
            if c in parent and clash is None:
                clash = (parent[c], c)
            parent.setdefault(c, n)
    return parent, clash


def _is_ancestor(parent: dict, a, n) -> bool:
    """Whether ``a`` is a proper ancestor of ``n``."""
    while n in parent:
        n = parent[n]
        if n == a:
            return True
    return False


def validate_tree_with_back_edges(t: TreeWithBackEdges) -> ValidationReport:
    """Check the four structural conditions of a tree with back edges.

    A back edge may target the node itself (a self-loop); every other
    target must be a proper ancestor.
    """
    report = ValidationReport()
    known = set(t.nodes)
    parent, clash = _parents(t)

    res = ConditionResult(True)
    if t.root not in known:
        res = ConditionResult(False, (t.root,), "root is not a node")
    elif t.root in parent:
        res = ConditionResult(False, (parent[t.root], t.root), "root has a parent")
    elif clash is not None:
        res = ConditionResult(False, clash, "node has two parents")
    else:
        for n in t.nodes:
            for c in t.children.get(n, ()):
                if c not in known:
                    res = ConditionResult(False, (n, c), "child is not a node")
                    break
            if not res.ok:
                break
        if res.ok:
            seen = {t.root}
            queue = deque([t.root])
            while queue:
                for c in t.children.get(queue.popleft(), ()):
                    if c not in seen:
                        seen.add(c)
                        queue.append(c)
            missing = [n for n in t.nodes if n not in seen]
            if missing:
                res = ConditionResult(False, (t.root, missing[0]), "node unreachable from root")
    report.conditions["i"] = res

    res = ConditionResult(True)
    for n, m in t.back.items():
        if n not in known or m not in known:
            res = ConditionResult(False, (n, m), "back edge endpoint is not a node")
            break
    report.conditions["ii"] = res

    res = ConditionResult(True)
    for n, m in t.back.items():
        if m != n and not _is_ancestor(parent, m, n):
            res = ConditionResult(False, (n, m), "back edge target is not an ancestor")
            break
    report.conditions["iii"] = res

    res = ConditionResult(True)
    for w2, f2 in t.back.items():
        w1 = parent.get(w2)
        while w1 is not None and w1 != f2:
            if w1 in t.back and t.back[w1] != f2:
                res = ConditionResult(False, (w1, w2), "back edges cross")
                break
            w1 = parent.get(w1)
        if not res.ok:
            break
    report.conditions["iv"] = res
    return report


# --------------------------------------------------------------------------
# tree representation

@dataclass(frozen=True)
class LabeledTree:
    root: object
    nodes: tuple
    children: Mapping
    labels: Mapping


def tree_representation(t: TreeWithBackEdges) -> LabeledTree:
    """Drop back edges and record them, and the new flag, in the labels.

    Labels gain ``"new"`` when the node's last flag is new and ``"↑"`` when
    the node is the source of a back edge.
    """
    labels = {}
    for n in t.nodes:
        if NEW in t.labels[n] or UP in t.labels[n]:
            raise ValueError(f"atom name collides with a marker at node {n}")
        lab = set(t.labels[n])
        if n and n[-1][1] == NEW:
            lab.add(NEW)
        if n in t.back:
            lab.add(UP)
        labels[n] = frozenset(lab)
    return LabeledTree(t.root, t.nodes, dict(t.children), labels)


# --------------------------------------------------------------------------
# bisimulation

@dataclass
class BisimReport:
    failures: dict = field(default_factory=lambda: {c: [] for c in
                                                    ("1", "2a", "2b", "2c", "2d", "2e")})

    @property
    def ok(self) -> bool:
        return not any(self.failures.values())

    def __str__(self) -> str:
        return "\n".join(f"({c}) {'pass' if not f else f'FAIL {f[0]}'}"
                         for c, f in self.failures.items())


def simple_cycles(k: KripkeStructure, w, max_len: int | None = None) -> list[tuple]:
    """Simple cycles ``(w, x1, ..., xm)`` through ``w``."""
    out = []
    stack = [(w,)]
    while stack:
        path = stack.pop()
        for v in k.successors(path[-1]):
            if v == w:
                out.append(path)
            elif v not in path and (max_len is None or len(path) < max_len):
                stack.append(path + (v,))
    return sorted(out, key=lambda c: (len(c), [k.index(x) for x in c]))


def _lifts(t: TreeWithBackEdges, n, cycle: tuple) -> bool:
    m = len(cycle)
    pr = t.projection
    start = (n, 0)
    seen = {start}
    queue = deque([start])
    while queue:
        x, i = queue.popleft()
        j = (i + 1) % m
        for y in t.successors(x):
            if pr[y] != cycle[j]:
                continue
            if (y, j) == start:
                return True
            if (y, j) not in seen:
                seen.add((y, j))
                queue.append((y, j))
    return False


def _tree_cycles(t: TreeWithBackEdges, n, max_len: int) -> list[tuple]:
    out = []
    stack = [(n,)]
    while stack:
        path = stack.pop()
        for v in t.successors(path[-1]):
            if v == n:
                out.append(path)
            elif v not in path and len(path) < max_len:
                stack.append(path + (v,))
    return out


def check_projection_cycle_bisim(k: KripkeStructure, t: TreeWithBackEdges,
                                 loop_bound: int) -> BisimReport:
    """Check that ``node ↦ projection`` behaves as a cycle-bisimulation on the prefix.

    Edge clauses are checked on interior nodes. Cycle clauses are checked
    for simple cycles of length at most ``loop_bound`` from nodes deep
    enough in the prefix that such a cycle can be lifted inside it.
    """
    if t.projection is None:
        raise ValueError("tree carries no projection")
    if t.depth is not None and loop_bound > t.depth:
        raise BoundTooLarge(f"loop bound {loop_bound} exceeds depth {t.depth}")
    pr = t.projection
    rep = BisimReport()
    if pr[t.root] != k.initial:
        rep.failures["1"].append((t.root, k.initial))
    for n in t.nodes:
        if t.labels[n] != k.labels[pr[n]]:
            rep.failures["2a"].append((n, pr[n]))
        if not t.is_interior(n):
            continue
        here = pr[n]
        succ = set(k.successors(here))
        for m in t.successors(n):
            if pr[m] not in succ:
                rep.failures["2b"].append((n, m))
        lifted = {pr[m] for m in t.successors(n)}
        for v in k.successors(here):
            if v not in lifted:
                rep.failures["2c"].append((n, v))
        if t.depth is not None and len(n) + loop_bound >= t.depth:
            continue
        for cyc in simple_cycles(k, here, loop_bound):
            if not _lifts(t, n, cyc):
                rep.failures["2d"].append((n, cyc))
        for tc in _tree_cycles(t, n, loop_bound + 1):
            walk = [pr[x] for x in tc] + [here]
            if any(b not in k.successors(a) for a, b in zip(walk, walk[1:])):
                rep.failures["2e"].append((n, tc))
    return rep


def _labels_equal(k1, k2, a, b) -> bool:
    return k1.labels[a] == k2.labels[b]


def refine(k1: KripkeStructure, k2: KripkeStructure, rel: frozenset) -> frozenset:
    """One refinement step: keep pairs whose forth and back clauses hold in ``rel``."""
    keep = set()
    for a, b in rel:
        forth = all(any((x, y) in rel for y in k2.successors(b)) for x in k1.successors(a))
        back = all(any((x, y) in rel for x in k1.successors(a)) for y in k2.successors(b))
        if forth and back:
            keep.add((a, b))
    return frozenset(keep)


def find_standard_bisimulation(k1: KripkeStructure, k2: KripkeStructure) -> frozenset | None:
    """Largest bisimulation between ``k1`` and ``k2``, if it relates the initial worlds."""
    rel = frozenset((a, b) for a in k1.worlds for b in k2.worlds
                    if _labels_equal(k1, k2, a, b))
    while True:
        nxt = refine(k1, k2, rel)
        if nxt == rel:
            break
        rel = nxt
    return rel if (k1.initial, k2.initial) in rel else None


def duplicate_world(k: KripkeStructure, w, name: str | None = None) -> KripkeStructure:
    """Split ``w`` into two worlds with the same label, in-edges and out-edges."""
    if w not in k:
        raise UnknownWorld(w)
    if w == k.initial:
        raise CannotDuplicateInitial(f"cannot duplicate the initial world {w}")
    copy = name if name is not None else f"{w}'"
    while copy in k:
        copy += "'"
    edges = list(k.edges)
    for x, y in k.edges:
        if y == w:
            edges.append((copy if x == w else x, copy))
            if x == w:
                edges.append((w, copy))
        if x == w:
            edges.append((copy, y))
    labels = dict(k.labels)
    labels[copy] = k.labels[w]
    return KripkeStructure(tuple(k.worlds) + (copy,), k.initial, frozenset(edges),
                           labels, k.atoms)


# --------------------------------------------------------------------------
# export

def node_name(n: tuple) -> str:
    if not n:
        return "ε"
    return ".".join(f"{w}:{SHORT[flag]}" for w, flag in n)


def _caption(t: TreeWithBackEdges, n) -> str:
    if not n:
        world = t.projection[n] if t.projection else ""
        return f"ε ({world})" if world else "ε"
    w, flag = n[-1]
    return f"{w}:{SHORT[flag]}"


def to_dot(t: TreeWithBackEdges) -> str:
    ids = {n: f"n{i}" for i, n in enumerate(t.nodes)}
    lines = ["digraph unwinding {", "  node [shape=ellipse];"]
    for n in t.nodes:
        lab = ",".join(sorted(t.labels[n]))
        lines.append(f'  {ids[n]} [label="{_caption(t, n)}\\n{{{lab}}}"];')
    for n in t.nodes:
        for c in t.children.get(n, ()):
            lines.append(f"  {ids[n]} -> {ids[c]};")
    for n in t.nodes:
        if n in t.back:
            lines.append(f"  {ids[n]} -> {ids[t.back[n]]} [style=dashed];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_text(t: TreeWithBackEdges) -> str:
    """One line per node in depth-first order; back edges shown after ``=>``."""
    lines = []
    stack = [t.root]
    while stack:
        n = stack.pop()
        lab = ",".join(sorted(t.labels[n]))
        line = f"{'  ' * len(n)}{node_name(n)} [{lab}]"
        if n in t.back:
            line += f" => {node_name(t.back[n])}"
        lines.append(line)
        stack.extend(reversed(t.children.get(n, ())))
    return "\n".join(lines) + "\n"
