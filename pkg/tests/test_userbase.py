"""Request generation, community pools, and continuous agent creation."""

from collections import Counter

import pytest

from ecosim import distributions
from ecosim.errors import ConfigurationError
from ecosim.habitat import Habitat, HabitatNetwork, build_topology
from ecosim.rng import DeterministicRng
from ecosim.userbase import (COMMUNITY_BIAS, Community, Userbase, UserProfile,
                             assign_users, build_communities)


def _userbase(attribute_space=16, pool=None, habitats=4):
    pool = tuple(range(10)) if pool is None else tuple(pool)
    communities = [Community(0, pool)]
    network = HabitatNetwork([Habitat(i) for i in range(habitats)])
    return Userbase(communities, attribute_space, network)


def _user(habitat=0, community=0):
    return UserProfile(habitat=habitat, community=community,
                       request_rate=0.1, creation_rate=0.05)


# ---------------------------------------------------------------- communities

def test_build_communities_pools_are_distinct_enough():
    rng = DeterministicRng(1)
    comms = build_communities(10, 16, 64, rng)
    assert [c.id for c in comms] == list(range(10))
    pools = [frozenset(c.attribute_pool) for c in comms]
    for p in pools:
        assert len(p) == 16
        assert all(0 <= a < 64 for a in p)
    for i, p in enumerate(pools):
        for q in pools[i + 1:]:
            assert len(p & q) < 8


def test_build_communities_sorted_pools():
    comms = build_communities(3, 5, 20, DeterministicRng(2))
    for c in comms:
        assert list(c.attribute_pool) == sorted(c.attribute_pool)


def test_build_communities_impossible_overlap_raises():
    # Three pools of 16 from a space of 16 cannot pairwise share < 8.
    with pytest.raises(ConfigurationError):
        build_communities(3, 16, 16, DeterministicRng(3))


def test_build_communities_validation():
    rng = DeterministicRng(4)
    with pytest.raises(ConfigurationError):
        build_communities(0, 4, 16, rng)
    with pytest.raises(ConfigurationError):
        build_communities(2, 0, 16, rng)
    with pytest.raises(ConfigurationError):
        build_communities(2, 17, 16, rng)


def test_assign_users_aligned_blocks():
    comms = [Community(i, (i,)) for i in range(2)]
    users = assign_users(8, comms, 0.1, 0.05, aligned=True)
    assert [u.community for u in users] == [0, 0, 0, 0, 1, 1, 1, 1]
    assert [u.habitat for u in users] == list(range(8))
    assert all(u.request_rate == 0.1 and u.creation_rate == 0.05
               for u in users)


def test_assign_users_interleaved():
    comms = [Community(i, (i,)) for i in range(3)]
    users = assign_users(9, comms, 0.2, 0.1, aligned=False)
    assert [u.community for u in users] == [0, 1, 2] * 3


# ------------------------------------------------------------------- requests

def test_request_shape_follows_sampled_distributions():
    ub = _userbase()
    rng = DeterministicRng(5)
    length_spec = distributions.uniform(2, 6)
    modality_spec = distributions.uniform(3, 3)
    for _ in range(200):
        req = ub.generate_request(_user(), length_spec, modality_spec, rng)
        assert 2 <= req.length <= 6
        for task in req.tasks:
            assert len(task.attributes) == 3
            assert all(0 <= a < 16 for a in task.attributes)
    assert ub.requests_issued == 200


def test_degenerate_specs_give_fixed_shape():
    ub = _userbase()
    rng = DeterministicRng(6)
    req = ub.generate_request(_user(), distributions.uniform(3, 3),
                              distributions.uniform(2, 2), rng)
    assert req.length == 3
    assert req.total_attributes == 6
    assert all(len(t.attributes) == 2 for t in req.tasks)


def test_community_bias_in_attribute_draws():
    # With pool {0..9} in a space of 100 the stray 20% almost always
    # lands outside the pool, so pool attributes appear with frequency
    # close to COMMUNITY_BIAS.
    ub = _userbase(attribute_space=100, pool=range(10))
    rng = DeterministicRng(7)
    spec = distributions.uniform(1, 1)
    in_pool = total = 0
    for _ in range(20_000):
        req = ub.generate_request(_user(), spec, spec, rng)
        for task in req.tasks:
            for a in task.attributes:
                total += 1
                in_pool += a < 10
    # 0.8 + 0.2 * (10/100) = 0.82 expected
    assert in_pool / total == pytest.approx(0.82, abs=0.01)
    assert in_pool / total >= 0.7


def test_pool_exhaustion_falls_back_to_full_space():
    # Tasks larger than the pool must still come out with all-distinct
    # attributes instead of stalling.
    ub = _userbase(attribute_space=16, pool=range(3))
    rng = DeterministicRng(8)
    spec5 = distributions.uniform(5, 5)
    for _ in range(50):
        req = ub.generate_request(_user(), distributions.uniform(1, 1),
                                  spec5, rng)
        task = req.tasks[0]
        assert len(task.attributes) == 5


def test_task_wider_than_space_raises():
    ub = _userbase(attribute_space=4, pool=range(4))
    rng = DeterministicRng(9)
    with pytest.raises(ConfigurationError):
        ub.generate_request(_user(), distributions.uniform(1, 1),
                            distributions.uniform(5, 5), rng)


@pytest.mark.slow
def test_request_length_matches_spec_distribution():
    # Self-consistency: generated request lengths must pass a goodness of
    # fit test against the very spec that produced them.
    ub = _userbase(attribute_space=64, pool=range(16))
    rng = DeterministicRng(10)
    length_spec = distributions.gaussian(2, 18)
    modality_spec = distributions.uniform(2, 2)
    lengths = []
    for _ in range(100_000):
        lengths.append(ub.generate_request(_user(), length_spec,
                                           modality_spec, rng).length)
    import scipy.stats

    counts = Counter(lengths)
    observed = [counts.get(v, 0) for v in range(2, 19)]
    expected = [p * len(lengths)
                for p in distributions.expected_probabilities(length_spec)]
    _, p = scipy.stats.chisquare(observed, expected)
    assert p > 0.05


# --------------------------------------------------------------- agent supply

def test_create_agent_deposits_into_habitat_pool():
    ub = _userbase()
    rng = DeterministicRng(11)
    agent = ub.create_agent(_user(habitat=2), distributions.uniform(4, 4), rng)
    assert len(agent.description) == 4
    assert agent.origin == 2
    assert agent.arrival_edge is None
    hab = ub.network.habitats[2]
    assert hab.pool_size == 1
    assert hab.agent_at(0).description == agent.description
    assert ub.agents_created == 1


def test_created_agents_get_distinct_ids():
    ub = _userbase()
    rng = DeterministicRng(12)
    ids = {ub.create_agent(_user(), distributions.uniform(2, 2), rng).agent_id
           for _ in range(100)}
    assert len(ids) == 100


@pytest.mark.slow
def test_agent_size_matches_spec_distribution():
    ub = _userbase(attribute_space=64, pool=range(16))
    rng = DeterministicRng(13)
    spec = distributions.powerlaw(2, 12)
    counts = Counter(ub.create_agent(_user(), spec, rng).size
                     for _ in range(100_000))
    import scipy.stats

    observed = [counts.get(v, 0) for v in range(2, 13)]
    expected = [p * 100_000
                for p in distributions.expected_probabilities(spec)]
    _, p = scipy.stats.chisquare(observed, expected)
    assert p > 0.05


def test_bias_constant_value():
    assert COMMUNITY_BIAS == 0.8
