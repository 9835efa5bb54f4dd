import random

import numpy as np
import pytest

from cyclectl import formula as fm
from cyclectl.checker import holds_everywhere, model_check
from cyclectl.formula import parse
from cyclectl.satsearch import (BatchEvaluator, SearchBudget, TimeLimitExceeded,
                                _label_grid, batch_supported, graphs, sat_search,
                                to_kripke)

from .helpers import random_state


def test_ec_true_has_one_world_model():
    k = sat_search(parse("EC true"), SearchBudget(3))
    assert len(k.worlds) == 1
    assert k.successors(k.initial) == (k.initial,)


def test_never_cyclic_has_no_small_model():
    phi = parse("A G ! EC true")
    for bound in range(1, 6):
        assert sat_search(phi, SearchBudget(bound)) is None


def test_two_successors_with_different_labels():
    k = sat_search(parse("E X p & E X !p"), SearchBudget(3))
    assert len(k.worlds) == 2
    assert model_check(k, parse("E X p & E X !p"))[0].truth


def test_unsatisfiable_propositional():
    assert sat_search(parse("p & !p"), SearchBudget(2)) is None


def test_deterministic():
    phi = parse("E (p U (q & EC X p))")
    a = sat_search(phi, SearchBudget(3))
    b = sat_search(phi, SearchBudget(3))
    assert a == b and a is not None


def test_monotone_in_bound():
    phi = parse("E X E X ! p & p & A G (p -> A X ! p)")
    small = sat_search(phi, SearchBudget(1))
    large = sat_search(phi, SearchBudget(3))
    assert small is None
    assert large is not None and len(large.worlds) == 2


def test_slow_path():
    phi = parse("E (G F p & G F ! p) & AC (F p)")
    assert not batch_supported(phi)
    k = sat_search(phi, SearchBudget(3))
    assert k is not None and len(k.worlds) == 2
    assert model_check(k, phi)[0].truth


def test_slow_path_simple_cycles():
    phi = parse("ECs (F p & F q) & ! EC (G F (p & q))")
    k = sat_search(phi, SearchBudget(3))
    assert k is not None and model_check(k, phi)[0].truth


def test_time_limit():
    phi = parse("E (G F p & G F q & G F r) & ! AC F (p & q)")
    with pytest.raises(TimeLimitExceeded):
        sat_search(phi, SearchBudget(5, time_limit=0.0))


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget(0)


def test_graph_counts():
    # breadth-first numbered, left-total: one world has a single graph
    assert len(graphs(1)) == 1
    assert len(graphs(2)) > 1
    for g in graphs(3):
        assert all(int(m) != 0 for m in g)


def test_batch_matches_checker():
    rng = random.Random(21)
    n = 3
    gs = graphs(n)
    labs = _label_grid(n, 2)
    picks = [(gs[rng.randrange(len(gs))], labs[rng.randrange(len(labs))]) for _ in range(40)]
    succ = np.array([g for g, _ in picks], dtype=np.uint16)
    lab = np.array([l for _, l in picks], dtype=np.uint16)
    tried = 0
    while tried < 60:
        phi = random_state(rng, 2)
        if not batch_supported(phi):
            continue
        tried += 1
        got = BatchEvaluator(n, succ, {"p": lab[:, 0], "q": lab[:, 1]}).truth(phi)
        for row, (g, l) in enumerate(picks):
            k = to_kripke(n, tuple(int(x) for x in g), {"p": int(l[0]), "q": int(l[1])})
            want = holds_everywhere(k, phi)
            for i, w in enumerate(k.worlds):
                assert bool((int(got[row]) >> i) & 1) == want[w], fm.to_text(phi)
