"""Habitat network: topology, pools, caches, migration, weight adaptation."""

import networkx as nx
import pytest

from ecosim.errors import ConfigurationError
from ecosim.habitat import (Edge, Habitat, HabitatNetwork, build_topology,
                            decay, migrate_application, reinforce,
                            sample_neighbor)
from ecosim.model import Agent, mask_of
from ecosim.rng import DeterministicRng

from helpers import fill_habitat


def _undirected(network):
    g = nx.Graph()
    g.add_nodes_from(h.id for h in network.habitats)
    g.add_edges_from((s, t) for s, t, _ in network.weight_rows())
    return g


def _two_habitat_network():
    a, b = Habitat(0), Habitat(1)
    a.out_edges = [Edge(1, 1.0)]
    b.out_edges = [Edge(0, 1.0)]
    return HabitatNetwork([a, b])


# ------------------------------------------------------------------- topology

def test_ring_of_four():
    net = build_topology(4, 2, 0.0, DeterministicRng(1))
    for h in net.habitats:
        targets = sorted(e.target for e in h.out_edges)
        assert targets == sorted(((h.id + 1) % 4, (h.id - 1) % 4))
        assert all(e.weight == pytest.approx(0.5) for e in h.out_edges)


def test_unrewired_lattice_clustering_coefficient():
    # Ring lattice with k=4: local clustering 3(k-2)/(4(k-1)) = 0.5 at
    # every node, so the graph average is exactly 0.5.
    net = build_topology(100, 4, 0.0, DeterministicRng(2))
    g = _undirected(net)
    assert nx.average_clustering(g) == pytest.approx(0.5, abs=1e-12)
    assert all(d == 4 for _, d in g.degree())


def test_rewired_graph_connected_with_mean_degree_four():
    for seed in range(100):
        net = build_topology(100, 4, 0.1, DeterministicRng(seed))
        g = _undirected(net)
        assert nx.is_connected(g)
        assert g.number_of_edges() == 200  # rewiring preserves edge count
        out_degrees = [len(h.out_edges) for h in net.habitats]
        assert sum(out_degrees) / len(out_degrees) == pytest.approx(4.0)
        for h in net.habitats:
            assert sum(e.weight for e in h.out_edges) == pytest.approx(
                1.0, abs=1e-12)
            assert all(e.weight == pytest.approx(1.0 / len(h.out_edges))
                       for e in h.out_edges)
            assert all(e.target != h.id for e in h.out_edges)


def test_full_rewire_stays_connected():
    net = build_topology(30, 4, 1.0, DeterministicRng(3))
    assert nx.is_connected(_undirected(net))


def test_topology_parameter_validation():
    rng = DeterministicRng(4)
    with pytest.raises(ConfigurationError):
        build_topology(10, 3, 0.1, rng)   # odd degree
    with pytest.raises(ConfigurationError):
        build_topology(10, 0, 0.1, rng)
    with pytest.raises(ConfigurationError):
        build_topology(4, 4, 0.1, rng)    # n must exceed k
    with pytest.raises(ConfigurationError):
        build_topology(10, 4, 1.5, rng)


# ----------------------------------------------------------------- agent pool

def test_pool_deduplicates_by_description():
    hab = Habitat(0)
    first = hab.add_agent(Agent(1, frozenset({1, 2}), 0))
    second = hab.add_agent(Agent(2, frozenset({2, 1}), 0))
    third = hab.add_agent(Agent(3, frozenset({3}), 0))
    assert first == second == 0
    assert third == 1
    assert hab.pool_size == 2
    # The original entry wins; the duplicate's id is not recorded.
    assert hab.agent_at(0).agent_id == 1


def test_agent_roundtrip_through_pool():
    hab = Habitat(0)
    agent = Agent(9, frozenset({0, 5, 63}), origin=4, arrival_edge=(4, 0))
    idx = hab.add_agent(agent)
    assert hab.agent_at(idx) == agent


def test_cache_is_fifo_bounded():
    hab = Habitat(0, cache_capacity=3)
    for i in range(5):
        hab.cache_application((i,), mask_of({1}))
    assert [g for g, _ in hab.cache] == [(2,), (3,), (4,)]


def test_eligible_seeds_overlap_rule_newest_first():
    hab = Habitat(0)
    request_mask = mask_of({1, 2, 3, 4})
    hab.cache_application((0,), mask_of({9}))          # no overlap
    hab.cache_application((1,), mask_of({1}))          # 1/4 < half
    hab.cache_application((2,), mask_of({1, 2}))       # exactly half
    hab.cache_application((3,), mask_of({1, 2, 3}))    # above half
    assert hab.eligible_seeds(request_mask, limit=10) == [(3,), (2,)]
    assert hab.eligible_seeds(request_mask, limit=1) == [(3,)]
    assert hab.eligible_seeds(request_mask, limit=0) == []


# ------------------------------------------------------------------- sampling

def test_sample_neighbor_single_edge():
    hab = Habitat(0)
    hab.out_edges = [Edge(7, 1.0)]
    rng = DeterministicRng(5)
    assert all(sample_neighbor(hab, rng) == 7 for _ in range(50))


@pytest.mark.slow
@pytest.mark.parametrize("weights,expected", [((0.5, 0.5), 0.5),
                                              ((0.9, 0.1), 0.9)])
def test_sample_neighbor_frequencies(weights, expected):
    hab = Habitat(0)
    hab.out_edges = [Edge(1, weights[0]), Edge(2, weights[1])]
    rng = DeterministicRng(6)
    draws = 1_000_000
    hits = sum(1 for _ in range(draws) if sample_neighbor(hab, rng) == 1)
    assert hits / draws == pytest.approx(expected, abs=0.01)


# ------------------------------------------------------------------ migration

def test_migrate_between_two_habitats():
    net = _two_habitat_network()
    rng = DeterministicRng(7)
    agents = [Agent(net.new_agent_id(), frozenset({1, 2}), 0)]
    dest = migrate_application(net, 0, agents, mask_of({1, 2}), rng)
    assert dest == 1
    pool = net.habitats[1]
    assert pool.pool_size == 1
    copy = pool.agent_at(0)
    assert copy.description == frozenset({1, 2})
    assert copy.arrival_edge == (0, 1)
    assert copy.agent_id != agents[0].agent_id  # copies get fresh ids
    assert copy.origin == agents[0].origin
    assert list(pool.cache) == [((0,), mask_of({1, 2}))]


def test_migrate_deduplicates_into_destination_pool():
    net = _two_habitat_network()
    rng = DeterministicRng(8)
    net.habitats[1].add_agent(Agent(net.new_agent_id(), frozenset({1, 2}), 1))
    agents = [Agent(net.new_agent_id(), frozenset({1, 2}), 0),
              Agent(net.new_agent_id(), frozenset({3}), 0)]
    migrate_application(net, 0, agents, mask_of({1, 2, 3}), rng)
    dest = net.habitats[1]
    assert dest.pool_size == 2  # {1,2} deduplicated, {3} added
    assert list(dest.cache) == [((0, 1), mask_of({1, 2, 3}))]


@pytest.mark.slow
def test_migration_destination_frequencies():
    # Weights 6/11 vs 5/11; over 1e5 hops the first target receives about
    # 0.545 of the copies.
    hits = 0
    trials = 100_000
    rng = DeterministicRng(9)
    for _ in range(trials):
        a = Habitat(0)
        b, c = Habitat(1), Habitat(2)
        a.out_edges = [Edge(1, 6 / 11), Edge(2, 5 / 11)]
        net = HabitatNetwork([a, b, c])
        agents = [Agent(0, frozenset({1}), 0)]
        if migrate_application(net, 0, agents, mask_of({1}), rng) == 1:
            hits += 1
    assert hits / trials == pytest.approx(6 / 11, abs=0.01)


# ---------------------------------------------------------------- adaptation

def test_reinforce_hand_arithmetic():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 0.5), Edge(2, 0.5)]
    net = HabitatNetwork([hab, Habitat(1), Habitat(2)])
    reinforce(net, (0, 1), 0.1)
    assert hab.out_edges[0].weight == pytest.approx(0.6 / 1.1, abs=1e-12)
    assert hab.out_edges[1].weight == pytest.approx(0.5 / 1.1, abs=1e-12)


def test_reinforce_single_edge_is_fixed_point():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 1.0)]
    net = HabitatNetwork([hab, Habitat(1)])
    reinforce(net, (0, 1), 0.1)
    assert hab.out_edges[0].weight == pytest.approx(1.0, abs=1e-12)


def test_reinforce_is_monotone_in_applications():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 0.5), Edge(2, 0.5)]
    net = HabitatNetwork([hab, Habitat(1), Habitat(2)])
    reinforce(net, (0, 1), 0.1)
    once = hab.out_edges[0].weight
    reinforce(net, (0, 1), 0.1)
    assert hab.out_edges[0].weight > once


def test_reinforce_missing_edge_skipped_and_counted():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 1.0)]
    net = HabitatNetwork([hab, Habitat(1), Habitat(2)])
    reinforce(net, (0, 2), 0.1)
    assert net.reinforce_skipped == 1
    assert hab.out_edges[0].weight == pytest.approx(1.0)


def test_reinforce_raises_sibling_relative_weight():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 0.2), Edge(2, 0.3), Edge(3, 0.5)]
    net = HabitatNetwork([hab] + [Habitat(i) for i in (1, 2, 3)])
    before = [e.weight for e in hab.out_edges]
    reinforce(net, (0, 2), 0.1)
    after = [e.weight for e in hab.out_edges]
    assert after[1] > before[1]
    assert after[0] < before[0] and after[2] < before[2]


def test_decay_hand_arithmetic():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 1.0 - 1e-15), Edge(2, 1e-15)]
    net = HabitatNetwork([hab, Habitat(1), Habitat(2)])
    decay(net, 0.5)
    assert hab.out_edges[0].weight == pytest.approx(0.75, abs=1e-9)
    assert hab.out_edges[1].weight == pytest.approx(0.25, abs=1e-9)


def test_decay_uniform_fixed_point_and_zero_delta():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 0.25)] + [Edge(t, 0.25) for t in (2, 3, 4)]
    net = HabitatNetwork([hab] + [Habitat(i) for i in range(1, 5)])
    decay(net, 0.3)
    assert all(e.weight == pytest.approx(0.25, abs=1e-12)
               for e in hab.out_edges)
    hab.out_edges[0].weight, hab.out_edges[1].weight = 0.4, 0.1
    decay(net, 0.0)
    assert hab.out_edges[0].weight == pytest.approx(0.4, abs=1e-12)
    assert hab.out_edges[1].weight == pytest.approx(0.1, abs=1e-12)


def test_decay_contracts_weight_spread():
    hab = Habitat(0)
    hab.out_edges = [Edge(1, 0.7), Edge(2, 0.2), Edge(3, 0.1)]
    net = HabitatNetwork([hab, Habitat(1), Habitat(2), Habitat(3)])
    spread = 0.6
    for _ in range(50):
        decay(net, 0.05)
        weights = [e.weight for e in hab.out_edges]
        now = max(weights) - min(weights)
        assert now < spread
        spread = now


def test_weights_normalized_after_many_random_operations():
    # 1e5 interleaved reinforce/decay calls must keep every habitat's
    # out-weights positive and summing to 1 within 1e-9.
    rng = DeterministicRng(10)
    net = build_topology(20, 4, 0.2, rng)
    n = len(net.habitats)
    for _ in range(100_000):
        if rng.random() < 0.7:
            src = rng.randbelow(n)
            edges = net.habitats[src].out_edges
            target = edges[rng.randbelow(len(edges))].target
            reinforce(net, (src, target), 0.1)
        else:
            decay(net, 0.01)
    for h in net.habitats:
        weights = [e.weight for e in h.out_edges]
        assert all(w > 0 for w in weights)
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)


def test_three_habitat_preference_emerges():
    # Line A-B, A-C where only arrivals at C lead to successes: the
    # reinforced A->C edge must dominate A->B after 100 steps for at
    # least 95 of 100 seeds.
    wins = 0
    for seed in range(100):
        rng = DeterministicRng(seed)
        a, b, c = Habitat(0), Habitat(1), Habitat(2)
        a.out_edges = [Edge(1, 0.5), Edge(2, 0.5)]
        b.out_edges = [Edge(0, 1.0)]
        c.out_edges = [Edge(0, 1.0)]
        net = HabitatNetwork([a, b, c])
        for _ in range(100):
            agents = [Agent(net.new_agent_id(), frozenset({1}), 0)]
            dest = migrate_application(net, 0, agents, mask_of({1}), rng)
            if dest == 2:
                reinforce(net, (0, 2), 0.1)
            decay(net, 0.01)
        if a.out_edges[1].weight > a.out_edges[0].weight:
            wins += 1
    assert wins >= 95


def test_weight_rows_export():
    net = build_topology(5, 2, 0.0, DeterministicRng(11))
    rows = net.weight_rows()
    assert len(rows) == 10
    assert all(w == pytest.approx(0.5) for _, _, w in rows)
    assert rows == sorted(rows)
