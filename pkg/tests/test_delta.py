from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltacolor.coloring import Coloring
from deltacolor.delta import (TRADEOFF_K, as_fraction, color_delta_plus_one, default_depth, delta_color, floor_power,
                              level_plan, mis_from_coloring, mis_reference, tradeoff_color)
from deltacolor.errors import InvalidParameters, PreconditionError
from deltacolor.graphcore import Graph, GraphSpec, generate
from deltacolor.palette import linial_coloring
from deltacolor.reduce import kw_reduce
from deltacolor.verify import check_legal, check_mis, greedy_reference_coloring
from oracles import greedy_mis_by_color, to_nx
from strategies import graph_with_legal_coloring, graphs


def test_depth_one_is_plain_reduction():
    g = generate(GraphSpec("gnp", 128, p=0.1, seed=9))
    init, _ = linial_coloring(g)
    col, res = delta_color(g, g.max_degree, 1, init)
    ref, rres = kw_reduce(g, init)
    assert col.colors.tolist() == ref.colors.tolist()
    assert res.rounds_used == rres.rounds_used


@pytest.mark.parametrize("depth", [1, 2, 3])
def test_edgeless(depth):
    g = Graph.from_edges(5, [])
    col, _ = delta_color(g, 0, depth, Coloring.from_sequence([1, 2, 3, 4, 5]))
    assert col.colors.tolist() == [1] * 5


def test_cycle_256():
    g = generate(GraphSpec("cycle", 256))
    # log_star(2) = 0 is clamped to depth 1
    assert default_depth(2) == 1
    init, _ = linial_coloring(g)
    col, _ = delta_color(g, 2, default_depth(2), init)
    assert not check_legal(g, col) and col.used <= 3


def test_complete_six():
    g = generate(GraphSpec("complete", 6))
    col, res, report = color_delta_plus_one(g)
    assert sorted(col.colors.tolist()) == [1, 2, 3, 4, 5, 6]
    assert report.passed


@pytest.mark.parametrize("spec,rounds", [("regular:n=256,d=8,seed=4", 45), ("gnp:n=512,p=0.02,seed=11", 95)])
def test_pipeline_examples(spec, rounds):
    g = generate(GraphSpec.parse(spec))
    col, res, report = color_delta_plus_one(g)
    assert not check_legal(g, col) and col.used <= g.max_degree + 1
    assert res.rounds_used == rounds
    assert report.passed and report.measured["rounds"] == rounds


def test_recursion_engages_with_larger_eps():
    g = generate(GraphSpec("gnp", 2048, p=0.2, seed=1))
    col, res, report = color_delta_plus_one(g, eps=Fraction(1, 2), depth=3)
    levels = col.meta["levels"]
    top = levels[0]
    assert not top["base"] and (top["k"], top["q"]) == (3, 21)
    assert top["d"] < top["bound"] == g.max_degree
    assert not check_legal(g, col) and col.used <= g.max_degree + 1
    assert report.passed


def test_level_plan_degenerate_cases():
    eps = Fraction(1, 4)
    assert level_plan(100, 1, 1000, eps) is None
    assert level_plan(1, 3, 10, eps) is None
    # log 3 = 1.58, so k = 1
    assert level_plan(3, 2, 10, eps) is None
    # k = 6 but floor(64^(1/4)) = 2 <= 36
    assert level_plan(64, 2, 4096, eps) is None
    plan = level_plan(477, 3, 2048, Fraction(1, 2))
    assert (plan.k, plan.q) == (3, 21) and plan.d < 477


def test_floor_power_is_exact():
    assert floor_power(16, Fraction(1, 4)) == 2
    assert floor_power(15, Fraction(1, 4)) == 1
    assert floor_power(64, Fraction(3, 4)) == 22
    assert floor_power(10 ** 12, Fraction(1, 3)) == 10 ** 4
    assert floor_power(10 ** 12 - 1, Fraction(1, 3)) == 10 ** 4 - 1
    assert floor_power(0, Fraction(1, 2)) == 0


@given(st.integers(1, 10 ** 9), st.integers(1, 5), st.integers(2, 6))
def test_floor_power_property(x, num, den):
    e = Fraction(num, den)
    if not 0 < e < 1:
        return
    y = floor_power(x, e)
    assert y ** den <= x ** num < (y + 1) ** den


def test_eps_validation():
    assert as_fraction(0.25) == Fraction(1, 4)
    for bad in (0, 1, 1.5, -0.1):
        with pytest.raises(InvalidParameters):
            as_fraction(bad)


def test_delta_color_preconditions():
    g = generate(GraphSpec("path", 3))
    with pytest.raises(PreconditionError):
        delta_color(g, 1, 1, Coloring.from_sequence([1, 2, 3]))
    with pytest.raises(PreconditionError):
        delta_color(g, 2, 1, Coloring.from_sequence([1, 1, 2]))
    with pytest.raises(InvalidParameters):
        delta_color(g, 2, 0, Coloring.from_sequence([1, 2, 3]))


@given(graphs(max_n=16), st.integers(1, 4), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)]))
def test_pipeline_is_legal_on_small_graphs(g, depth, eps):
    col, res, report = color_delta_plus_one(g, eps=eps, depth=depth)
    assert not check_legal(g, col) and col.used <= g.max_degree + 1
    assert report.passed


def test_members_restriction():
    g = generate(GraphSpec("complete", 5))
    members = [True, True, True, False, False]
    col, _ = delta_color(g, 2, 1, Coloring.from_sequence([1, 2, 3, 4, 5]), members=members)
    assert sorted(col.colors[:3].tolist()) == [1, 2, 3] and col.colors[3:].tolist() == [1, 1]


# -- tradeoff


def test_tradeoff_edgeless():
    col, res = tradeoff_color(Graph.from_edges(4, []), 5)
    assert col.colors.tolist() == [1] * 4 and res.rounds_used == 0


def test_tradeoff_t2_on_regular_256_16():
    g = generate(GraphSpec("regular", 256, d=16, seed=5))
    col, res = tradeoff_color(g, 2)
    _, full, _ = color_delta_plus_one(g)
    assert not check_legal(g, col)
    assert col.palette <= TRADEOFF_K * 16 * 2
    # at D = 16 the defective step does not pay for itself yet
    assert (res.rounds_used, full.rounds_used) == (118, 68)


@pytest.fixture(scope="module")
def regular_1024_64():
    return generate(GraphSpec("regular", 1024, d=64, seed=1))


@pytest.mark.parametrize("t,branch", [(2, "single"), (8, "nested")])
def test_tradeoff_branches(regular_1024_64, t, branch):
    g = regular_1024_64
    col, res = tradeoff_color(g, t)
    assert col.meta["branch"] == branch
    assert not check_legal(g, col) and col.used <= col.palette <= TRADEOFF_K * 64 * t


def test_tradeoff_range():
    g = generate(GraphSpec("regular", 64, d=16, seed=1))
    with pytest.raises(InvalidParameters):
        tradeoff_color(g, 1)
    # floor(16^(3/4)) = 8
    with pytest.raises(InvalidParameters):
        tradeoff_color(g, 9)
    col, _ = tradeoff_color(g, 8)
    assert not check_legal(g, col)


# -- MIS


def test_mis_path3():
    g = generate(GraphSpec("path", 3))
    out = mis_from_coloring(g, Coloring.from_sequence([1, 2, 1]))
    assert out.member_set == {1, 3} and out.rounds == 2


def test_mis_clique():
    g = generate(GraphSpec("complete", 5))
    out = mis_from_coloring(g, Coloring.from_sequence([3, 1, 5, 2, 4]))
    assert out.member_set == {2}


def test_mis_after_pipeline():
    g = generate(GraphSpec("gnp", 256, p=0.05, seed=8))
    col, _, _ = color_delta_plus_one(g)
    out = mis_from_coloring(g, col)
    assert not check_mis(g, out.members)
    assert out.rounds <= g.max_degree + 1


def test_mis_rejects_illegal_coloring():
    with pytest.raises(PreconditionError):
        mis_from_coloring(generate(GraphSpec("path", 2)), Coloring.from_sequence([1, 1]))


@given(graph_with_legal_coloring(max_n=14))
def test_mis_matches_oracle(case):
    g, colors = case
    col = Coloring.from_sequence(colors)
    out = mis_from_coloring(g, col)
    members, rounds = greedy_mis_by_color(g.adjacency, colors)
    assert out.members.tolist() == members and out.rounds == rounds
    ref = mis_reference(g, col, order=list(range(g.n, 0, -1)))
    assert ref.members.tolist() == members and ref.rounds == rounds
    assert ref.run.messages_sent == out.run.messages_sent
    assert not check_mis(g, out.members)


@given(graphs(max_n=16))
def test_mis_from_greedy_is_maximal_independent(g):
    out = mis_from_coloring(g, greedy_reference_coloring(g))
    import networkx as nx
    h = to_nx(g)
    s = out.member_set
    assert all(not h.has_edge(u, v) for u in s for v in s if u < v)
    assert all(v in s or any(u in s for u in h[v]) for v in h)
    assert nx.is_dominating_set(h, s)
    assert np.asarray(out.members).dtype == bool
