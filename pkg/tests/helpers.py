"""Shared generators for structures and formulas."""
from __future__ import annotations

import random
from pathlib import Path

from hypothesis import strategies as st

from cyclectl import formula as fm
from cyclectl.kripke import KripkeStructure, load_kripke, load_game
from cyclectl.satsearch import _canonical, _label_grid, graphs, to_kripke

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_model(name: str) -> KripkeStructure:
    return load_kripke((CORPUS / name).read_text(encoding="utf-8"))


def corpus_game(name: str):
    return load_game((CORPUS / name).read_text(encoding="utf-8"))


def small_structures(max_worlds: int, atoms=("p",)) -> list[KripkeStructure]:
    """Every structure up to isomorphism, initial world fixed, all worlds reachable."""
    out = []
    for n in range(1, max_worlds + 1):
        seen = set()
        for g in graphs(n):
            for lab in _label_grid(n, len(atoms)):
                succ = tuple(int(x) for x in g)
                labels = tuple(int(x) for x in lab)
                key = _canonical(succ, labels, n)
                if key in seen:
                    continue
                seen.add(key)
                out.append(to_kripke(n, succ, dict(zip(atoms, labels))))
    return out


def random_kripke(rng: random.Random, n: int, atoms=("p", "q"), density: float = 0.35):
    worlds = [f"s{i}" for i in range(n)]
    edges = set()
    for a in worlds:
        for b in worlds:
            if rng.random() < density:
                edges.add((a, b))
        if not any(e[0] == a for e in edges):
            edges.add((a, rng.choice(worlds)))
    labels = {w: frozenset(x for x in atoms if rng.random() < 0.5) for w in worlds}
    return KripkeStructure(tuple(worlds), worlds[0], frozenset(edges), labels, frozenset(atoms))


QUANTS = (fm.E, fm.A, fm.EC, fm.AC)


def random_state(rng: random.Random, depth: int, atoms=("p", "q"), quants=QUANTS):
    if depth <= 0 or rng.random() < 0.2:
        return fm.Top if rng.random() < 0.1 else fm.Atom(rng.choice(atoms))
    r = rng.random()
    if r < 0.15:
        return fm.Not(random_state(rng, depth - 1, atoms, quants))
    if r < 0.3:
        op = rng.choice((fm.And, fm.Or))
        return op(random_state(rng, depth - 1, atoms, quants),
                  random_state(rng, depth - 1, atoms, quants))
    return rng.choice(quants)(random_path(rng, depth - 1, atoms, quants))


def random_path(rng: random.Random, depth: int, atoms=("p", "q"), quants=QUANTS):
    if depth <= 0:
        return fm.Atom(rng.choice(atoms))
    r = rng.random()
    sub = lambda: random_path(rng, depth - 1, atoms, quants)  # noqa: E731
    if r < 0.2:
        return random_state(rng, depth, atoms, quants)
    if r < 0.35:
        return fm.X(sub())
    if r < 0.5:
        return fm.U(sub(), sub())
    if r < 0.62:
        return fm.F(sub())
    if r < 0.74:
        return fm.G(sub())
    if r < 0.84:
        return fm.Not(sub())
    return rng.choice((fm.And, fm.Or))(sub(), sub())


atom_names = st.sampled_from(["p", "q", "r", "res1", "x_2"])


def path_formulas(max_leaves: int = 12):
    leaves = st.one_of(atom_names.map(fm.Atom), st.just(fm.Top), st.just(fm.Bottom))

    def extend(children):
        return st.one_of(
            children.map(fm.Not),
            children.map(fm.X), children.map(fm.F), children.map(fm.G),
            st.tuples(children, children).map(lambda t: fm.And(*t)),
            st.tuples(children, children).map(lambda t: fm.Or(*t)),
            st.tuples(children, children).map(lambda t: fm.Implies(*t)),
            st.tuples(children, children).map(lambda t: fm.U(*t)),
            children.map(fm.E), children.map(fm.A),
            children.map(fm.EC), children.map(fm.AC), children.map(fm.ECs),
        )
    return st.recursive(leaves, extend, max_leaves=max_leaves)


def state_formulas(max_leaves: int = 12):
    quant = st.sampled_from([fm.E, fm.A, fm.EC, fm.AC])
    return st.tuples(quant, path_formulas(max_leaves)).map(lambda t: t[0](t[1]))
