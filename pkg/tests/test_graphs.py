"""Graph model, infection rule, topology classifier, and access planner."""

import json

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gateway_tomo import (
    AccessPlan,
    CapabilityError,
    InputError,
    NetworkGraph,
    NotEstimableError,
    TopologyKind,
    classify_topology,
    compute_access_plan,
    edge_key,
    graph_from_json,
    graph_to_json,
    infection_closure,
    is_estimable,
    is_infecting,
    minimum_infecting_sets,
)
from util import (
    brute_minimum_sets,
    closure_mask,
    graph_to_masks,
    random_tree_edges,
    random_unicyclic_edges,
)


def nx_of(g: NetworkGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from(g.edges)
    return h


# --------------------------------------------------------------- edge_key


def test_edge_key_orders_endpoints():
    assert edge_key(3, 1) == (1, 3)
    assert edge_key(1, 3) == (1, 3)


def test_edge_key_rejects_self_loop():
    with pytest.raises(InputError):
        edge_key(2, 2)


# --------------------------------------------------------- graph building


def test_from_edges_infers_sorted_nodes():
    g = NetworkGraph.from_edges([(3, 1), (2, 3)])
    assert g.nodes == (1, 2, 3)
    assert g.edges == ((1, 3), (2, 3))
    assert g.sign_of[(1, 3)] == 1


def test_signs_mapping_defaults_to_plus_one():
    g = NetworkGraph.from_edges([(1, 2), (2, 3)], signs={(2, 3): -1})
    assert g.sign_of[(1, 2)] == 1
    assert g.sign_of[(2, 3)] == -1


def test_adjacency_and_degree(fmo_graph):
    assert fmo_graph.adjacency[4] == (3, 5, 7)
    assert fmo_graph.degree(4) == 3
    assert fmo_graph.degree(1) == 1


def test_duplicate_edges_rejected():
    with pytest.raises(InputError):
        NetworkGraph.from_edges([(1, 2), (2, 1)])


def test_edge_outside_declared_nodes_rejected():
    with pytest.raises(InputError):
        NetworkGraph((1, 2), ((1, 2), (2, 3)))


def test_nonpositive_node_labels_rejected():
    with pytest.raises(InputError):
        NetworkGraph.from_edges([(0, 1)])


def test_bad_sign_values_rejected():
    with pytest.raises(InputError):
        NetworkGraph.from_edges([(1, 2)], signs={(1, 2): 0})
    with pytest.raises(InputError):
        NetworkGraph.from_edges([(1, 2)], signs={(1, 3): 1})


# ------------------------------------------------------------------ JSON


def test_graph_json_roundtrip(fmo_graph):
    g = NetworkGraph(fmo_graph.nodes, fmo_graph.edges, {(4, 7): -1})
    again = graph_from_json(json.loads(json.dumps(graph_to_json(g))))
    assert again == g
    assert again.sign_of[(4, 7)] == -1


def test_graph_json_rejects_unknown_keys():
    doc = graph_to_json(NetworkGraph.from_edges([(1, 2)]))
    doc["colour"] = "blue"
    with pytest.raises(InputError):
        graph_from_json(doc)


def test_graph_json_rejects_malformed_edge():
    with pytest.raises(InputError):
        graph_from_json({"nodes": [1, 2], "edges": [{"u": 1}]})
    with pytest.raises(InputError):
        graph_from_json({"nodes": [1, 2], "edges": [{"u": 1, "v": 2, "sign": 2}]})


# -------------------------------------------------------------- infection


def test_closure_stalls_at_junction(fmo_graph, tree8_graph):
    assert infection_closure(fmo_graph, [1]) == frozenset({1, 2, 3, 4})
    assert infection_closure(tree8_graph, [1]) == frozenset({1, 2, 3})
    assert infection_closure(fmo_graph, [4]) == frozenset({4})


def test_closure_covers_graph_from_good_seeds(fmo_graph, tree8_graph):
    assert infection_closure(fmo_graph, [1, 5]) == frozenset(fmo_graph.nodes)
    assert infection_closure(tree8_graph, [1, 5]) == frozenset(tree8_graph.nodes)
    assert is_infecting(tree8_graph, [1, 5])


def test_closure_edge_cases(fmo_graph):
    assert infection_closure(fmo_graph, []) == frozenset()
    assert infection_closure(fmo_graph, fmo_graph.nodes) == frozenset(fmo_graph.nodes)
    with pytest.raises(InputError):
        infection_closure(fmo_graph, [42])


def test_minimum_infecting_sets_path():
    g = NetworkGraph.from_edges([(1, 2), (2, 3)])
    assert minimum_infecting_sets(g) == ((1,), (3,))


def test_minimum_infecting_sets_tree8(tree8_graph):
    sets = minimum_infecting_sets(tree8_graph)
    assert sets == brute_minimum_sets(tree8_graph)
    assert all(len(s) == 2 for s in sets)
    assert (1, 5) in sets


def test_minimum_infecting_sets_star():
    g = NetworkGraph.from_edges([(1, 5), (2, 5), (3, 5), (4, 5)])
    sets = minimum_infecting_sets(g)
    assert sets == brute_minimum_sets(g)
    assert sets[0] == (1, 2, 3)
    assert all(len(s) == 3 for s in sets)


def test_minimum_infecting_sets_needs_three_on_pendant_cycle():
    g = NetworkGraph.from_edges(
        [(1, 5), (2, 5), (3, 6), (4, 6), (5, 6), (6, 7), (5, 7)]
    )
    sets = minimum_infecting_sets(g)
    assert sets == brute_minimum_sets(g)
    assert all(len(s) == 3 for s in sets)
    assert (1, 2, 3) in sets


def test_minimum_infecting_sets_size_guard():
    g = NetworkGraph.from_edges([(i, i + 1) for i in range(1, 18)])
    with pytest.raises(CapabilityError):
        minimum_infecting_sets(g)


@given(st.integers(0, 2**32 - 1), st.integers(2, 9))
def test_closure_matches_bitmask_oracle_on_trees(seed, n):
    rng = np.random.default_rng(seed)
    g = NetworkGraph.from_edges(random_tree_edges(rng, n))
    adj, index = graph_to_masks(g)
    for _ in range(5):
        take = rng.random(n) < 0.4
        seeds = [node for node, t in zip(g.nodes, take) if t]
        want = closure_mask(adj, sum(1 << index[s] for s in seeds))
        got = sum(1 << index[s] for s in infection_closure(g, seeds))
        assert got == want


@given(st.integers(0, 2**32 - 1), st.integers(4, 9))
def test_closure_monotone_and_idempotent(seed, n):
    rng = np.random.default_rng(seed)
    g = NetworkGraph.from_edges(random_unicyclic_edges(rng, n, min(n, 4)))
    seeds = [node for node in g.nodes if rng.random() < 0.5]
    closed = infection_closure(g, seeds)
    assert closed >= frozenset(seeds)
    assert infection_closure(g, closed) == closed
    bigger = set(seeds) | {g.nodes[0]}
    assert infection_closure(g, bigger) >= closed


# ------------------------------------------------------------- classifier


def test_classify_path_and_single_node():
    g = NetworkGraph.from_edges([(1, 2), (2, 3), (3, 4)])
    topo = classify_topology(g)
    assert topo.kind is TopologyKind.PATH
    assert topo.cycle is None
    assert topo.excess == 0
    lone = NetworkGraph((1,), ())
    assert classify_topology(lone).kind is TopologyKind.PATH


def test_classify_tree(tree8_graph):
    topo = classify_topology(tree8_graph)
    assert topo.kind is TopologyKind.TREE
    assert topo.excess == 0


def test_classify_cycle_orientation():
    g = NetworkGraph.from_edges([(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])
    topo = classify_topology(g)
    assert topo.kind is TopologyKind.UNICYCLIC
    assert topo.cycle == (1, 2, 3, 4, 5)


def test_classify_fmo(fmo_graph):
    topo = classify_topology(fmo_graph)
    assert topo.kind is TopologyKind.UNICYCLIC
    assert topo.cycle == (4, 5, 6, 7)
    assert topo.excess == 1


def test_classify_multi_cycle_and_disconnected():
    k4 = NetworkGraph.from_edges(
        [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    )
    topo = classify_topology(k4)
    assert topo.kind is TopologyKind.MULTI_CYCLE
    assert topo.excess == 3
    split = NetworkGraph((1, 2, 3, 4), ((1, 2), (3, 4)))
    assert classify_topology(split).kind is TopologyKind.DISCONNECTED


def test_is_estimable_verdicts(fmo_graph):
    ok, reason = is_estimable(fmo_graph)
    assert ok and reason is None
    k4 = NetworkGraph.from_edges(
        [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    )
    ok, reason = is_estimable(k4)
    assert not ok
    assert "cycle excess 3" in reason
    split = NetworkGraph((1, 2, 3), ((1, 2),))
    ok, reason = is_estimable(split)
    assert not ok
    assert "disconnected" in reason


@given(st.integers(0, 2**32 - 1), st.integers(3, 10))
def test_classifier_agrees_with_networkx(seed, n):
    rng = np.random.default_rng(seed)
    if n >= 4 and rng.random() < 0.5:
        g = NetworkGraph.from_edges(random_unicyclic_edges(rng, n, int(rng.integers(3, n + 1))))
    else:
        g = NetworkGraph.from_edges(random_tree_edges(rng, n))
    h = nx_of(g)
    topo = classify_topology(g)
    assert nx.is_connected(h)
    if topo.kind in (TopologyKind.PATH, TopologyKind.TREE):
        assert nx.is_tree(h)
        assert topo.cycle is None
    else:
        assert topo.kind is TopologyKind.UNICYCLIC
        (basis,) = nx.cycle_basis(h)
        assert set(topo.cycle) == set(basis)
    assert topo.excess == len(g.edges) - len(g.nodes) + 1


# ---------------------------------------------------------------- planner


def test_plan_path_uses_single_end():
    g = NetworkGraph.from_edges([(1, 2), (2, 3)])
    plan = compute_access_plan(g)
    assert plan.reference == 1
    assert plan.access_set == (1,)
    assert plan.reference_path == (1, 2, 3)
    assert plan.peel_schedule == ()
    assert plan.cycle_plan is None


def test_plan_tree8_conservative(tree8_graph):
    plan = compute_access_plan(tree8_graph)
    assert plan.reference == 1
    assert plan.access_set == (1, 5, 8)
    assert plan.reference_path == (1, 2, 3)
    assert [(p.head, p.nodes, p.terminal, p.seeded_by_measurement) for p in plan.peel_schedule] == [
        (5, (5, 4), 3, True),
        (8, (8, 7, 6), 3, True),
    ]
    assert plan.check_sites(tree8_graph) == (3,)
    plan.validate(tree8_graph)


def test_plan_tree8_aggressive(tree8_graph):
    plan = compute_access_plan(tree8_graph, aggressive=True)
    assert plan.access_set == (1, 5)
    assert plan.aggressive
    assert [(p.head, p.nodes, p.terminal, p.seeded_by_measurement) for p in plan.peel_schedule] == [
        (5, (5, 4), 3, True),
        (3, (3, 6, 7), 8, False),
    ]
    assert plan.check_sites(tree8_graph) == (8,)


def test_plan_star_aggressive_drops_one_leaf():
    g = NetworkGraph.from_edges([(1, 5), (2, 5), (3, 5), (4, 5)])
    plan = compute_access_plan(g, aggressive=True)
    assert plan.access_set == (1, 2, 3)
    assert plan.check_sites(g) == (4,)


def test_plan_fmo(fmo_graph):
    plan = compute_access_plan(fmo_graph)
    assert plan.reference == 1
    assert plan.access_set == (1, 5, 6, 7)
    assert plan.reference_path == (1, 2, 3, 4)
    assert plan.cycle_plan is not None
    assert plan.cycle_plan.cycle == (4, 5, 6, 7)
    assert plan.cycle_plan.measured == (5, 6, 7)
    assert plan.cycle_plan.attachments == (4,)
    assert plan.check_sites(fmo_graph) == ()


def test_plan_pure_cycle_measures_everything():
    g = NetworkGraph.from_edges([(1, 2), (2, 3), (3, 4), (4, 5), (1, 5)])
    plan = compute_access_plan(g)
    assert plan.reference == 1
    assert plan.access_set == (1, 2, 3, 4, 5)
    assert plan.cycle_plan.measured == (1, 2, 3, 4, 5)
    assert plan.cycle_plan.attachments == ()


def test_plan_explicit_reference(tree8_graph):
    plan = compute_access_plan(tree8_graph, reference=5)
    assert plan.reference == 5
    assert plan.reference_path == (5, 4, 3)
    assert 5 in plan.access_set


def test_plan_rejects_unknown_reference(tree8_graph):
    with pytest.raises(InputError):
        compute_access_plan(tree8_graph, reference=99)


def test_plan_aggressive_reserved_for_trees(fmo_graph):
    with pytest.raises(CapabilityError):
        compute_access_plan(fmo_graph, aggressive=True)


def test_plan_rejects_multi_cycle():
    k4 = NetworkGraph.from_edges(
        [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
    )
    with pytest.raises(NotEstimableError) as info:
        compute_access_plan(k4)
    assert info.value.flag == "NotEstimable"


@given(st.integers(0, 2**32 - 1), st.integers(2, 12))
def test_plan_access_is_infecting_on_trees(seed, n):
    rng = np.random.default_rng(seed)
    g = NetworkGraph.from_edges(random_tree_edges(rng, n))
    for aggressive in (False, True):
        plan = compute_access_plan(g, aggressive=aggressive)
        assert isinstance(plan, AccessPlan)
        assert is_infecting(g, plan.access_set)
        covered = set(plan.consumed_sites) | set(plan.check_sites(g))
        assert covered == set(g.nodes)
        plan.validate(g)


@given(st.integers(0, 2**32 - 1), st.integers(4, 12))
def test_plan_access_is_infecting_on_unicyclic(seed, n):
    rng = np.random.default_rng(seed)
    g = NetworkGraph.from_edges(
        random_unicyclic_edges(rng, n, int(rng.integers(3, n + 1)))
    )
    plan = compute_access_plan(g)
    assert is_infecting(g, plan.access_set)
    assert set(plan.cycle_plan.measured) <= set(plan.access_set)
    plan.validate(g)
