import random

import pytest
from hypothesis import given, settings, strategies as st

from cyclectl.checker import holds_everywhere
from cyclectl.formula import parse
from cyclectl.kripke import UnknownWorld, make_kripke
from cyclectl.unwind import (CYCLE, NEW, UP, BoundTooLarge, CannotDuplicateInitial,
                             TreeWithBackEdges, check_projection_cycle_bisim,
                             duplicate_world, find_standard_bisimulation,
                             initial_cycle_state, refine, to_dot, to_text,
                             tree_representation, unwind_bounded,
                             validate_tree_with_back_edges)

from .helpers import corpus_model, random_kripke, small_structures


def test_selfloop_depth_two():
    t = unwind_bounded(corpus_model("selfloop.kr"), 2)
    a = (("a", NEW),)
    assert set(t.nodes) == {(), a, a + (("a", NEW),)}
    assert dict(t.back) == {a: ()}
    assert t.children[()] == (a,)


def test_initial_cycle_state():
    assert initial_cycle_state(()) is None
    assert initial_cycle_state((("a", NEW),)) == ()
    n = (("a", NEW), ("b", NEW), ("c", CYCLE))
    assert initial_cycle_state(n) == (("a", NEW),)


def test_root_has_no_cycle_children():
    for name in ["ring2.kr", "figure8.kr", "scheduler.kr"]:
        k = corpus_model(name)
        t = unwind_bounded(k, 4)
        assert all(flag == NEW for _, flag in (c[-1] for c in t.children[()]))
        for n in t.nodes:
            if t.is_interior(n):
                assert len(t.children[n]) <= 2 * len(k.successors(t.projection[n]))
            else:
                assert t.children[n] == ()


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        unwind_bounded(corpus_model("selfloop.kr"), 0)


def _tree(children, back, root="r"):
    nodes = tuple(children)
    labels = dict.fromkeys(nodes, frozenset())
    return TreeWithBackEdges(root, nodes, children, back, labels)


def test_back_edge_to_non_ancestor_fails():
    t = _tree({"r": ("a", "b"), "a": (), "b": ()}, {"a": "b"})
    rep = validate_tree_with_back_edges(t)
    assert rep.conditions["i"].ok and rep.conditions["ii"].ok
    assert not rep.conditions["iii"].ok
    assert rep.conditions["iii"].counterexample == ("a", "b")


def test_crossing_back_edges_fail():
    t = _tree({"r": ("a",), "a": ("b",), "b": ("c",), "c": ()}, {"b": "r", "c": "a"})
    rep = validate_tree_with_back_edges(t)
    assert rep.conditions["iii"].ok
    assert not rep.conditions["iv"].ok
    assert not rep.ok


def test_back_edges_inside_a_span_must_agree():
    children = {"r": ("a",), "a": ("b",), "b": ("c",), "c": ()}
    assert not validate_tree_with_back_edges(_tree(children, {"b": "a", "c": "r"})).ok
    assert validate_tree_with_back_edges(_tree(children, {"b": "r", "c": "r"})).ok
    assert validate_tree_with_back_edges(_tree(children, {"a": "r", "c": "b"})).ok


def test_two_parents_fail():
    t = _tree({"r": ("a", "b"), "a": ("c",), "b": ("c",), "c": ()}, {})
    assert not validate_tree_with_back_edges(t).conditions["i"].ok


def test_corpus_unwindings_are_valid():
    for name in ["selfloop.kr", "chain.kr", "ring2.kr", "ring3.kr", "figure8.kr", "scheduler.kr"]:
        assert validate_tree_with_back_edges(unwind_bounded(corpus_model(name), 5)).ok


def test_tree_representation_labels():
    t = unwind_bounded(corpus_model("selfloop.kr"), 2)
    lt = tree_representation(t)
    a = (("a", NEW),)
    assert lt.labels[()] == {"p"}
    assert lt.labels[a] == {"p", NEW, UP}
    assert lt.labels[a + (("a", NEW),)] == {"p", NEW}
    assert lt.children == t.children


def test_tree_representation_rejects_marker_atoms():
    k = make_kripke([("a", "a")], {"a": {"new"}}, "a")
    with pytest.raises(ValueError):
        tree_representation(unwind_bounded(k, 1))


@pytest.mark.parametrize("name,depth,bound", [("selfloop.kr", 4, 2), ("ring2.kr", 6, 3),
                                              ("figure8.kr", 6, 3)])
def test_projection_is_cycle_bisimulation(name, depth, bound):
    k = corpus_model(name)
    assert check_projection_cycle_bisim(k, unwind_bounded(k, depth), bound).ok


def test_removing_back_edge_breaks_cycle_clause():
    k = corpus_model("selfloop.kr")
    t = unwind_bounded(k, 4).without_back_edge((("a", NEW),))
    rep = check_projection_cycle_bisim(k, t, 2)
    assert rep.failures["2d"]
    assert not rep.ok


def test_loop_bound_above_depth():
    k = corpus_model("ring2.kr")
    with pytest.raises(BoundTooLarge):
        check_projection_cycle_bisim(k, unwind_bounded(k, 2), 3)


def test_standard_bisimulation_example():
    k1 = make_kripke([("a", "a")], {"a": {"p"}}, "a")
    k2 = make_kripke([("x", "y"), ("y", "x")], {"x": {"p"}, "y": {"p"}}, "x")
    assert find_standard_bisimulation(k1, k2) == {("a", "x"), ("a", "y")}
    k3 = make_kripke([("x", "y"), ("y", "x")], {"x": {"p"}, "y": set()}, "x", atoms=["p"])
    assert find_standard_bisimulation(k1, k3) is None


def test_standard_bisimulation_is_fixpoint():
    rng = random.Random(3)
    for _ in range(40):
        k1 = random_kripke(rng, rng.randint(1, 4), atoms=("p",))
        k2 = random_kripke(rng, rng.randint(1, 4), atoms=("p",))
        rel = find_standard_bisimulation(k1, k2)
        if rel is not None:
            assert refine(k1, k2, rel) == rel


def test_duplicate_world():
    k = corpus_model("ring2.kr")
    d = duplicate_world(k, "b")
    assert d.worlds == ("a", "b", "b'")
    assert d.successors("a") == ("b", "b'")
    assert d.successors("b'") == ("a",)
    assert d.labels["b'"] == k.labels["b"]
    assert find_standard_bisimulation(k, d) is not None


def test_duplicate_world_selfloop_and_errors():
    k = make_kripke([("a", "b"), ("b", "b")], {"a": set(), "b": {"p"}}, "a")
    d = duplicate_world(k, "b", name="c")
    assert set(d.successors("b")) == {"b", "c"} and set(d.successors("c")) == {"b", "c"}
    with pytest.raises(CannotDuplicateInitial):
        duplicate_world(k, "a")
    with pytest.raises(UnknownWorld):
        duplicate_world(k, "zz")


def test_duplication_keeps_cycle_verdicts():
    # the self-loop on b becomes a 2-clique; cycles seen from b are the same up to projection
    k = make_kripke([("a", "b"), ("b", "b")], {"a": set(), "b": set()}, "a")
    d = duplicate_world(k, "b")
    for text in ["E X EC X true", "E X ECs G true", "A X AC X X true"]:
        phi = parse(text)
        assert holds_everywhere(k, phi)["a"] == holds_everywhere(d, phi)["a"]


def test_text_and_dot_exports():
    t = unwind_bounded(corpus_model("selfloop.kr"), 2)
    assert to_text(t) == "ε [p]\n  a:n [p] => ε\n    a:n.a:n [p]\n"
    dot = to_dot(t)
    assert dot.startswith("digraph unwinding {")
    assert dot.count("[style=dashed]") == 1
    assert dot.count("->") == 3


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_random_unwindings_are_valid(seed, depth):
    k = random_kripke(random.Random(seed), random.Random(seed).randint(1, 4))
    t = unwind_bounded(k, depth)
    assert validate_tree_with_back_edges(t).ok
    assert check_projection_cycle_bisim(k, t, min(depth, 2)).ok
