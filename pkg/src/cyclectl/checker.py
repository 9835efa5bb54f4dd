"""Bottom-up Cycle-CTL* model checking with lasso witnesses."""
from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

from . import buchi
from . import formula as fm
from . import semantics
from .buchi import Lasso
from .formula import Formula
from .kripke import KripkeError, KripkeStructure, UnknownWorld


class UnknownAtom(KripkeError):
    def __init__(self, name: str):
        super().__init__(f"formula mentions atom {name!r}, which the model does not declare")
        self.name = name


def quantified_atom(eta: Formula) -> str:
    """Stable fresh atom name standing for a quantified subformula."""
    digest = hashlib.sha1(fm.to_text(eta).encode("utf-8")).hexdigest()[:12]
    return f"_q{digest}"


class LabelingTable:
    """Truth of each quantified subformula at each world.

    Entries are added in bottom-up order; ``extended_label`` returns the
    plain label of a world plus the fresh atoms of the quantified
    subformulas that hold there.
    """

    def __init__(self, k: KripkeStructure):
        self.k = k
        self.names: dict[Formula, str] = {}
        self.entries: dict[tuple[Formula, object], bool] = {}
        self._ext: dict = {}

    def add(self, eta: Formula, truth: dict) -> None:
        name = quantified_atom(eta)
        if name in self.k.atoms:
            raise ValueError(f"fresh atom {name} collides with a model atom")
        self.names[eta] = name
        for w in self.k.worlds:
            self.entries[(eta, w)] = truth[w]
        self._ext.clear()

    def __getitem__(self, key: tuple[Formula, object]) -> bool:
        return self.entries[key]

    def __contains__(self, eta: Formula) -> bool:
        return eta in self.names

    def formulas(self) -> list[Formula]:
        return list(self.names)

    def extended_label(self, w) -> frozenset:
        if w not in self._ext:
            extra = {name for eta, name in self.names.items() if self.entries[(eta, w)]}
            self._ext[w] = self.k.labels[w] | extra
        return self._ext[w]

    def abstract(self, psi: Formula) -> Formula:
        """Replace known quantified subformulas of ``psi`` by their atoms."""
        return fm.replace(psi, {eta: fm.Atom(n) for eta, n in self.names.items()})

    def complete_for(self, psi: Formula) -> bool:
        return all(eta in self.names for eta in fm.quantified_subformulas(psi)
                   if eta != psi)

    def to_tsv(self) -> str:
        lines = ["formula\tworld\tvalue"]
        for (eta, w), v in self.entries.items():
            lines.append(f"{fm.to_text(eta)}\t{w}\t{'true' if v else 'false'}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Verdict:
    truth: bool
    witness: Lasso | None = None

    def __bool__(self):
        return self.truth


@lru_cache(maxsize=4096)
def _nba(psi: Formula) -> buchi.NBA:
    return buchi.ltl_to_nba(psi)


def _check_path(psi_star: Formula) -> Formula:
    if any(g.op in fm.QUANTIFIERS for g in fm.subformulas(psi_star)):
        raise ValueError("labeling table lacks a nested quantified subformula")
    return psi_star


def _exists_product(k, w, psi_star, table, anchored: bool):
    p = buchi.product(k, w, _nba(psi_star), table)
    if anchored:
        p = buchi.add_anchor_condition(p, w)
    return buchi.degeneralize(p)


def _segment_graph(k: KripkeStructure, anchor):
    """Vertices ``(world, visited)`` where ``visited`` are the worlds since the last anchor visit."""
    def successors(vertex):
        w, visited = vertex
        out = []
        for v in k.successors(w):
            if v == anchor:
                out.append((v, frozenset()))
            elif v not in visited:
                out.append((v, visited | {v}))
        return out
    return (anchor, frozenset()), successors


def _exists_simple_product(k, w, psi_star, table):
    start, successors = _segment_graph(k, w)
    p = buchi.synchronize(start, successors, lambda x: table.extended_label(x[0]),
                          _nba(psi_star), world=lambda x: x[0])
    return buchi.degeneralize(buchi.add_anchor_condition(p, w))


def _witness(p, anchor=None) -> Lasso | None:
    lasso = buchi.find_accepting_lasso(p)
    if lasso is None:
        return None
    if not buchi.replay(p, lasso):
        raise AssertionError("accepting lasso failed to replay")
    worlds = lasso.map(p.world).normalized()
    return worlds.with_anchor(anchor) if anchor is not None else worlds


def check_exists(k: KripkeStructure, w, psi: Formula, table: LabelingTable,
                 witness: bool = False) -> Verdict:
    """E psi at ``w``: some path from ``w`` satisfies ``psi``."""
    if w not in k:
        raise UnknownWorld(w)
    p = _exists_product(k, w, _check_path(table.abstract(psi)), table, anchored=False)
    if not witness:
        return Verdict(not buchi.is_empty(p))
    lasso = _witness(p)
    return Verdict(lasso is not None, lasso)


def check_exists_cycle(k: KripkeStructure, w, psi: Formula, table: LabelingTable,
                       witness: bool = True) -> Verdict:
    """EC psi at ``w``: some path from ``w`` returning to ``w`` infinitely often satisfies ``psi``.

    The witness, when requested and the verdict is true, is anchored at ``w``.
    """
    if w not in k:
        raise UnknownWorld(w)
    p = _exists_product(k, w, _check_path(table.abstract(psi)), table, anchored=True)
    if not witness:
        return Verdict(not buchi.is_empty(p))
    lasso = _witness(p, anchor=w)
    return Verdict(lasso is not None, lasso)


def check_exists_simple_cycle(k: KripkeStructure, w, psi: Formula, table: LabelingTable,
                              witness: bool = False) -> Verdict:
    """ECs psi at ``w``: the cycle repeats no world between two visits of ``w``."""
    if w not in k:
        raise UnknownWorld(w)
    p = _exists_simple_product(k, w, _check_path(table.abstract(psi)), table)
    if not witness:
        return Verdict(not buchi.is_empty(p))
    lasso = _witness(p, anchor=w)
    return Verdict(lasso is not None, lasso)


def simple_cycles_through(k: KripkeStructure, w) -> list[tuple]:
    """Simple cycles ``(w, x1, ..., xm)`` ordered by length, then world order."""
    out = []

    def extend(path, on_path):
        for v in k.successors(path[-1]):
            if v == w:
                out.append(tuple(path))
            elif v not in on_path:
                on_path.add(v)
                path.append(v)
                extend(path, on_path)
                path.pop()
                on_path.discard(v)

    extend([w], {w})
    return sorted(out, key=lambda c: (len(c), [k.index(x) for x in c]))


def find_simple_lasso_witness(k: KripkeStructure, w, psi: Formula,
                              table: LabelingTable) -> Lasso | None:
    """A path ``(w x1 ... xm)^ω`` around a single simple cycle that satisfies ``psi``.

    Absence does not refute EC psi: a cycle may need to alternate between
    several simple loops.
    """
    if w not in k:
        raise UnknownWorld(w)
    psi_star = _check_path(table.abstract(psi))
    for cycle in simple_cycles_through(k, w):
        letters = [table.extended_label(x) for x in cycle]
        if semantics.holds(psi_star, [], letters):
            return Lasso((), cycle, w)
    return None


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("CYCLECHECK_THREADS", "1")))
    except ValueError:
        return 1


def _label_level(k, eta, table) -> dict:
    op = eta.op
    body = eta.args[0]
    if op in (fm.FORALL, fm.FORALL_CYCLE):
        body = fm.Not(body)
    psi_star = _check_path(table.abstract(body))
    nba = _nba(psi_star)

    def truth_at(w):
        if op == fm.SIMPLE_EXISTS_CYCLE:
            return not buchi.is_empty(_exists_simple_product(k, w, psi_star, table))
        p = buchi.product(k, w, nba, table)
        if op in (fm.EXISTS_CYCLE, fm.FORALL_CYCLE):
            p = buchi.add_anchor_condition(p, w)
        found = not buchi.is_empty(buchi.degeneralize(p))
        return found if op in (fm.EXISTS, fm.EXISTS_CYCLE, fm.SIMPLE_EXISTS_CYCLE) else not found

    threads = _threads()
    if threads > 1 and len(k.worlds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(truth_at, k.worlds))
    else:
        values = [truth_at(w) for w in k.worlds]
    return dict(zip(k.worlds, values))


def label(k: KripkeStructure, phi: Formula, table: LabelingTable | None = None) -> LabelingTable:
    """Fill the labeling table for every quantified subformula of ``phi``."""
    missing = fm.atoms(phi) - set(k.atoms)
    if missing:
        raise UnknownAtom(min(missing))
    table = LabelingTable(k) if table is None else table
    for eta in fm.quantified_subformulas(phi):
        if eta not in table:
            table.add(eta, _label_level(k, eta, table))
    return table


def state_truth(k: KripkeStructure, phi: Formula, w, table: LabelingTable) -> bool:
    """Evaluate a state formula at ``w`` once its quantified subformulas are labeled."""
    op = phi.op
    if op in fm.QUANTIFIERS:
        return table[(phi, w)]
    if op == fm.ATOM:
        return phi.name in k.labels[w]
    if op == fm.TRUE:
        return True
    if op == fm.FALSE:
        return False
    if op == fm.NOT:
        return not state_truth(k, phi.args[0], w, table)
    if op == fm.AND:
        return all(state_truth(k, a, w, table) for a in phi.args)
    if op == fm.OR:
        return any(state_truth(k, a, w, table) for a in phi.args)
    if op == fm.IMPLIES:
        a, b = phi.args
        return (not state_truth(k, a, w, table)) or state_truth(k, b, w, table)
    raise fm.FormulaCategoryError(f"{fm.to_text(phi)} is not a state formula")


def model_check(k: KripkeStructure, phi: Formula, witness: bool = False,
                world=None) -> tuple[Verdict, LabelingTable]:
    """Decide ``k, w |= phi`` (``w`` defaults to the initial world).

    With ``witness=True`` and ``phi`` rooted at an existential quantifier
    that holds, the verdict carries a lasso over worlds; for EC and ECs the
    lasso is anchored at ``w``.
    """
    if not phi.is_state:
        raise fm.FormulaCategoryError(f"{fm.to_text(phi)} is not a state formula")
    w = k.initial if world is None else world
    if w not in k:
        raise UnknownWorld(w)
    table = label(k, phi)
    truth = state_truth(k, phi, w, table)
    lasso = None
    if witness and truth and phi.op in (fm.EXISTS, fm.EXISTS_CYCLE, fm.SIMPLE_EXISTS_CYCLE):
        body = phi.args[0]
        if phi.op == fm.EXISTS:
            verdict = check_exists(k, w, body, table, witness=True)
        elif phi.op == fm.EXISTS_CYCLE:
            verdict = check_exists_cycle(k, w, body, table, witness=True)
        else:
            verdict = check_exists_simple_cycle(k, w, body, table, witness=True)
        lasso = verdict.witness
        if lasso is None or not validate_witness(k, body, lasso, table):
            raise AssertionError("witness extraction disagrees with the verdict")
    return Verdict(truth, lasso), table


def validate_witness(k: KripkeStructure, psi: Formula, lasso: Lasso,
                     table: LabelingTable) -> bool:
    """Replay ``lasso`` on ``k`` and evaluate ``psi`` on its extended-label word."""
    if not buchi.is_path(k, lasso):
        return False
    if lasso.anchor is not None and (lasso.anchor not in lasso.loop
                                     or lasso.first != lasso.anchor):
        return False
    psi_star = table.abstract(psi)
    return semantics.holds(psi_star, [table.extended_label(x) for x in lasso.prefix],
                           [table.extended_label(x) for x in lasso.loop])


def holds_everywhere(k: KripkeStructure, phi: Formula) -> dict:
    """Truth of ``phi`` at every world, sharing one labeling table."""
    table = label(k, phi)
    return {w: state_truth(k, phi, w, table) for w in k.worlds}


from .oracle import BudgetExceeded, brute_force_eval  # noqa: E402,F401
