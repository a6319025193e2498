"""User behaviour: requests, communities, and continuous agent creation.

Each habitat hosts one user belonging to a community.  Request tasks and
new-agent descriptions draw attributes with an 80/20 split between the
user's community pool and the full attribute space, which keeps nearby
users semantically similar without isolating them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .distributions import DistributionSpec, sample
from .errors import ConfigurationError
from .habitat import HabitatNetwork
from .model import Agent, Request, Task
from .rng import DeterministicRng

COMMUNITY_BIAS = 0.8


@dataclass(frozen=True)
class Community:
    id: int
    attribute_pool: tuple[int, ...]


@dataclass(frozen=True)
class UserProfile:
    habitat: int
    community: int
    request_rate: float
    creation_rate: float


def _draw_subset(space: int, size: int, rng: DeterministicRng) -> tuple[int, ...]:
    """size distinct attributes from [0, space) by partial Fisher-Yates."""
    items = list(range(space))
    for i in range(size):
        j = i + rng.randbelow(space - i)
        items[i], items[j] = items[j], items[i]
    return tuple(sorted(items[:size]))


def build_communities(count: int, pool_size: int, attribute_space: int,
                      rng: DeterministicRng,
                      max_tries: int = 1000) -> list[Community]:
    """Random attribute pools with pairwise overlap below 50%."""
    if count < 1:
        raise ConfigurationError("need at least one community")
    if pool_size < 1 or pool_size > attribute_space:
        raise ConfigurationError("community pool size must be in [1, attribute space]")
    limit = pool_size / 2.0
    pools: list[frozenset[int]] = []
    communities = []
    for cid in range(count):
        for _ in range(max_tries):
            cand = _draw_subset(attribute_space, pool_size, rng)
            cand_set = frozenset(cand)
            if all(len(cand_set & p) < limit for p in pools):
                pools.append(cand_set)
                communities.append(Community(cid, cand))
                break
        else:
            raise ConfigurationError(
                f"could not draw {count} community pools of size {pool_size} "
                f"with <50% overlap from {attribute_space} attributes")
    return communities


def assign_users(n_habitats: int, communities: list[Community],
                 request_rate: float, creation_rate: float,
                 aligned: bool = True) -> list[UserProfile]:
    """One user per habitat.

    ``aligned`` gives contiguous blocks of ring neighbours the same
    community (community structure matches topology); otherwise
    communities interleave round-robin.
    """
    c = len(communities)
    users = []
    for h in range(n_habitats):
        cid = (h * c) // n_habitats if aligned else h % c
        users.append(UserProfile(habitat=h, community=cid,
                                 request_rate=request_rate,
                                 creation_rate=creation_rate))
    return users


class Userbase:
    """Generates requests and agents for the users of one simulation run."""

    def __init__(self, communities: list[Community], attribute_space: int,
                 network: HabitatNetwork):
        self.communities = communities
        self.attribute_space = attribute_space
        self.network = network
        self.requests_issued = 0
        self.agents_created = 0

    def _task_attributes(self, pool: tuple[int, ...], m: int,
                         rng: DeterministicRng) -> frozenset[int]:
        """m distinct attributes, each independently 80% from the
        community pool / 20% from the whole space; fall back to the
        whole space when the pool has no unused attribute left."""
        space = self.attribute_space
        if m > space:
            raise ConfigurationError(
                f"task needs {m} attributes but the space has only {space}")
        chosen: set[int] = set()
        for _ in range(m):
            if rng.random() < COMMUNITY_BIAS:
                candidates = [a for a in pool if a not in chosen]
                if not candidates:
                    candidates = [a for a in range(space) if a not in chosen]
            else:
                candidates = [a for a in range(space) if a not in chosen]
            chosen.add(candidates[rng.randbelow(len(candidates))])
        return frozenset(chosen)

    def generate_request(self, user: UserProfile, length_spec: DistributionSpec,
                         modularity_spec: DistributionSpec,
                         rng: DeterministicRng) -> Request:
        """Request with sampled length; every task gets its own sampled
        attribute count."""
        pool = self.communities[user.community].attribute_pool
        length = sample(length_spec, rng)
        tasks = []
        for _ in range(length):
            m = sample(modularity_spec, rng)
            tasks.append(Task(self._task_attributes(pool, m, rng)))
        self.requests_issued += 1
        return Request(tuple(tasks))

    def create_agent(self, user: UserProfile, modularity_spec: DistributionSpec,
                     rng: DeterministicRng) -> Agent:
        """Create one agent (description generated like a request task)
        and deposit it into the user's habitat pool."""
        pool = self.communities[user.community].attribute_pool
        m = sample(modularity_spec, rng)
        agent = Agent(agent_id=self.network.new_agent_id(),
                      description=self._task_attributes(pool, m, rng),
                      origin=user.habitat)
        self.network.habitats[user.habitat].add_agent(agent)
        self.agents_created += 1
        return agent
