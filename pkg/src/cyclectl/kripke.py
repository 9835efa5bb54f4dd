"""Finite Kripke structures, their text format, and parity-game projection."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .formula import (A, ATOM_RE, E, EC, F, Formula, G, Implies, KEYWORDS, Not,
                      U, Atom, conjunction, disjunction)


class KripkeError(ValueError):
    """Base class for invalid models and games."""


class KripkeSyntaxError(KripkeError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class NotLeftTotal(KripkeError):
    def __init__(self, world):
        super().__init__(f"world {world!r} has no successor")
        self.world = world


class UnknownWorld(KripkeError):
    def __init__(self, world):
        super().__init__(f"unknown world {world!r}")
        self.world = world


class DuplicateWorld(KripkeError):
    def __init__(self, world):
        super().__init__(f"world {world!r} declared twice")
        self.world = world


class DuplicateInit(KripkeError):
    pass


class MissingInit(KripkeError):
    pass


class UnknownLabelAtom(KripkeError):
    def __init__(self, world, atom):
        super().__init__(f"world {world!r} carries atom {atom!r} outside the atom universe")
        self.world = world
        self.atom = atom


@dataclass(frozen=True, eq=False)
class KripkeStructure:
    """A finite Kripke structure with a left-total edge relation.

    ``worlds`` keeps declaration order, which is used for deterministic
    iteration only. ``atoms`` defaults to the union of all labels.
    """

    worlds: tuple
    initial: object
    edges: frozenset
    labels: Mapping[object, frozenset]
    atoms: frozenset = None
    _succ: dict = field(default=None, init=False, repr=False)
    _index: dict = field(default=None, init=False, repr=False)

    def __post_init__(self):
        worlds = tuple(self.worlds)
        if len(set(worlds)) != len(worlds):
            seen = set()
            for w in worlds:
                if w in seen:
                    raise DuplicateWorld(w)
                seen.add(w)
        index = {w: i for i, w in enumerate(worlds)}
        if self.initial not in index:
            raise UnknownWorld(self.initial)
        edges = frozenset(self.edges)
        for src, dst in edges:
            for x in (src, dst):
                if x not in index:
                    raise UnknownWorld(x)
        labels = {w: frozenset(self.labels.get(w, ())) for w in worlds}
        for w in self.labels:
            if w not in index:
                raise UnknownWorld(w)
        union = frozenset().union(*labels.values())
        atoms = union if self.atoms is None else frozenset(self.atoms)
        for w in worlds:
            extra = labels[w] - atoms
            if extra:
                raise UnknownLabelAtom(w, min(extra))
        succ = {w: [] for w in worlds}
        for src, dst in edges:
            succ[src].append(dst)
        for w in worlds:
            if not succ[w]:
                raise NotLeftTotal(w)
            succ[w] = tuple(sorted(succ[w], key=index.__getitem__))
        object.__setattr__(self, "worlds", worlds)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "_index", index)

    def successors(self, w) -> tuple:
        try:
            return self._succ[w]
        except KeyError:
            raise UnknownWorld(w) from None

    def index(self, w) -> int:
        try:
            return self._index[w]
        except KeyError:
            raise UnknownWorld(w) from None

    def __contains__(self, w) -> bool:
        return w in self._index

    def __len__(self) -> int:
        return len(self.worlds)

    def __eq__(self, other):
        if not isinstance(other, KripkeStructure):
            return NotImplemented
        return (self.worlds == other.worlds and self.initial == other.initial
                and self.edges == other.edges and self.labels == other.labels
                and self.atoms == other.atoms)

    def __hash__(self):
        return hash((self.worlds, self.initial, self.edges))

    def with_initial(self, w) -> "KripkeStructure":
        return KripkeStructure(self.worlds, w, self.edges, self.labels, self.atoms)

    def reachable(self, start=None) -> list:
        start = self.initial if start is None else start
        seen = {start}
        order = [start]
        queue = deque([start])
        while queue:
            w = queue.popleft()
            for v in self.successors(w):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    queue.append(v)
        return order


def make_kripke(edges: Iterable, labels: Mapping | None = None, initial=None,
                atoms: Iterable[str] | None = None) -> KripkeStructure:
    """Build a structure from an edge list; worlds appear in first-mention order."""
    edges = list(edges)
    labels = dict(labels or {})
    worlds: dict = {}
    if initial is not None:
        worlds[initial] = None
    for w in labels:
        worlds.setdefault(w, None)
    for src, dst in edges:
        worlds.setdefault(src, None)
        worlds.setdefault(dst, None)
    if initial is None:
        initial = next(iter(worlds))
    return KripkeStructure(tuple(worlds), initial, frozenset(edges), labels,
                           None if atoms is None else frozenset(atoms))


# --------------------------------------------------------------------------
# model file format

def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _check_id(token: str, lineno: int) -> str:
    if not ATOM_RE.match(token):
        raise KripkeSyntaxError(f"bad identifier {token!r}", lineno)
    return token


def load_kripke(text: str) -> KripkeStructure:
    """Parse the line-oriented model format::

        world <id> [<atom>,<atom>,...]
        init <id>
        edge <src> <dst>
    """
    worlds: list[str] = []
    labels: dict[str, frozenset] = {}
    edges: list[tuple[str, str]] = []
    initial = None
    for lineno, line in _lines(text):
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "world":
            name, _, label_text = rest.partition(" ")
            name = _check_id(name, lineno)
            label_text = label_text.strip()
            if not (label_text.startswith("[") and label_text.endswith("]")):
                raise KripkeSyntaxError("expected a bracketed label set", lineno)
            inner = label_text[1:-1].strip()
            atoms = [a.strip() for a in inner.split(",")] if inner else []
            for a in atoms:
                if not ATOM_RE.match(a) or a in KEYWORDS:
                    raise KripkeSyntaxError(f"bad atom {a!r}", lineno)
            if name in labels:
                raise DuplicateWorld(name)
            worlds.append(name)
            labels[name] = frozenset(atoms)
        elif keyword == "init":
            if initial is not None:
                raise DuplicateInit(f"line {lineno}: second init declaration")
            initial = _check_id(rest, lineno)
        elif keyword == "edge":
            parts = rest.split()
            if len(parts) != 2:
                raise KripkeSyntaxError("edge needs a source and a target", lineno)
            edges.append((_check_id(parts[0], lineno), _check_id(parts[1], lineno)))
        else:
            raise KripkeSyntaxError(f"unknown directive {keyword!r}", lineno)
    if initial is None:
        raise MissingInit("no init declaration")
    for w in [initial] + [x for e in edges for x in e]:
        if w not in labels:
            raise UnknownWorld(w)
    return KripkeStructure(tuple(worlds), initial, frozenset(edges), labels)


def dump_kripke(k: KripkeStructure) -> str:
    out = []
    for w in k.worlds:
        atoms = ",".join(sorted(k.labels[w]))
        out.append(f"world {w} [{atoms}]")
    out.append(f"init {k.initial}")
    for w in k.worlds:
        for v in k.successors(w):
            out.append(f"edge {w} {v}")
    return "\n".join(out) + "\n"


# --------------------------------------------------------------------------
# graph queries

def lies_on_cycle(k: KripkeStructure, w) -> bool:
    """Whether some nonempty edge path leads from ``w`` back to ``w``."""
    seen = set()
    queue = deque(k.successors(w))
    while queue:
        v = queue.popleft()
        if v == w:
            return True
        if v not in seen:
            seen.add(v)
            queue.extend(k.successors(v))
    return False


# --------------------------------------------------------------------------
# parity games

class GameError(KripkeError):
    pass


class StrategyNotOnEdge(GameError):
    def __init__(self, state, target=None):
        super().__init__(f"strategy at {state!r} moves to {target!r}, which is not a successor")
        self.state = state


class MissingStrategy(GameError):
    def __init__(self, state):
        super().__init__(f"Player 0 state {state!r} has no strategy move")
        self.state = state


@dataclass(frozen=True, eq=False)
class ParityGame:
    """Arena, priorities and a positional Player 0 strategy."""

    owner: Mapping[str, int]
    priority: Mapping[str, int]
    edges: frozenset
    initial: str
    strategy: Mapping[str, str]
    order: tuple = ()

    def __post_init__(self):
        states = self.order or tuple(self.owner)
        object.__setattr__(self, "order", tuple(states))
        if self.initial not in self.owner:
            raise UnknownWorld(self.initial)
        succ = {v: set() for v in states}
        for src, dst in self.edges:
            for x in (src, dst):
                if x not in self.owner:
                    raise UnknownWorld(x)
            succ[src].add(dst)
        for v in states:
            if not succ[v]:
                raise NotLeftTotal(v)
        for v, target in self.strategy.items():
            if v not in self.owner:
                raise UnknownWorld(v)
            if self.owner[v] != 0:
                raise GameError(f"strategy given for Player 1 state {v!r}")
            if target not in succ[v]:
                raise StrategyNotOnEdge(v, target)
        for v in states:
            if self.owner[v] == 0 and v not in self.strategy:
                raise MissingStrategy(v)
        used = set(self.priority.values())
        if used != set(range(max(used) + 1)):
            raise GameError("priorities must form an initial segment 0..n")

    @property
    def max_priority(self) -> int:
        return max(self.priority.values())


def load_game(text: str) -> ParityGame:
    """Parse ``state <id> <owner> <priority>``, ``edge``, ``init`` and ``strategy`` lines."""
    owner: dict[str, int] = {}
    priority: dict[str, int] = {}
    edges = []
    strategy: dict[str, str] = {}
    initial = None
    for lineno, line in _lines(text):
        parts = line.split()
        keyword = parts[0]
        if keyword == "state":
            if len(parts) != 4 or parts[2] not in ("0", "1") or not parts[3].isdigit():
                raise KripkeSyntaxError("expected: state <id> <0|1> <priority>", lineno)
            name = _check_id(parts[1], lineno)
            if name in owner:
                raise DuplicateWorld(name)
            owner[name] = int(parts[2])
            priority[name] = int(parts[3])
        elif keyword in ("edge", "strategy"):
            if len(parts) != 3:
                raise KripkeSyntaxError(f"{keyword} needs a source and a target", lineno)
            src, dst = _check_id(parts[1], lineno), _check_id(parts[2], lineno)
            if keyword == "edge":
                edges.append((src, dst))
            else:
                if src in strategy:
                    raise GameError(f"line {lineno}: second strategy move for {src!r}")
                strategy[src] = dst
        elif keyword == "init":
            if initial is not None:
                raise DuplicateInit(f"line {lineno}: second init declaration")
            if len(parts) != 2:
                raise KripkeSyntaxError("init needs one state", lineno)
            initial = _check_id(parts[1], lineno)
        else:
            raise KripkeSyntaxError(f"unknown directive {keyword!r}", lineno)
    if initial is None:
        raise MissingInit("no init declaration")
    if not owner:
        raise KripkeSyntaxError("no states declared", 1)
    return ParityGame(owner, priority, frozenset(edges), initial, strategy, tuple(owner))


def priority_atom(k: int) -> str:
    return f"p{k}"


def project_parity_game(game: ParityGame) -> KripkeStructure:
    """Restrict Player 0 to its strategy; label each state by its priority atom."""
    edges = {(v, game.strategy[v]) for v in game.order if game.owner[v] == 0}
    edges |= {(v, u) for v, u in game.edges if game.owner[v] == 1}
    labels = {v: frozenset({priority_atom(game.priority[v])}) for v in game.order}
    atoms = frozenset(priority_atom(k) for k in range(game.max_priority + 1))
    return KripkeStructure(game.order, game.initial, frozenset(edges), labels, atoms)


def build_parity_formula(n: int) -> Formula:
    """All plays satisfy max-even parity over priorities ``0..n``."""
    if n < 0:
        raise ValueError("maximum priority must be non-negative")
    disjuncts = []
    for k in range(0, n + 1, 2):
        parts = [G(F(Atom(priority_atom(k))))]
        parts += [F(G(Not(Atom(priority_atom(l))))) for l in range(k, n + 1) if l % 2 == 1]
        disjuncts.append(conjunction(parts))
    return A(disjunction(disjuncts))


def build_nonprompt_formula(n: int, hold_globally: bool = True) -> Formula:
    """Some play has a request whose response can be delayed unboundedly.

    For every even bound ``m <= n`` and odd request ``k < m`` the disjunct reads
    ``GF pk & G(pk -> (/\\ G !pl) U EC(/\\ G !pl))`` with ``l`` ranging over the
    even priorities in ``k..n``. Disjuncts with no odd request are dropped, so
    ``n <= 1`` gives ``false``.

    With ``hold_globally=False`` the left operand of the until is the
    state-wise ``/\\ !pl`` instead of ``/\\ G !pl``.
    """
    if n < 0:
        raise ValueError("maximum priority must be non-negative")
    outer = []
    for m in range(0, n + 1, 2):
        inner = []
        for k in range(1, m, 2):
            quiet = [l for l in range(k, n + 1) if l % 2 == 0]
            never = conjunction(G(Not(Atom(priority_atom(l)))) for l in quiet)
            if hold_globally:
                waiting = never
            else:
                waiting = conjunction(Not(Atom(priority_atom(l))) for l in quiet)
            req = Atom(priority_atom(k))
            inner.append(conjunction([G(F(req)), G(Implies(req, U(waiting, EC(never))))]))
        if inner:
            outer.append(E(disjunction(inner)))
    return disjunction(outer)
