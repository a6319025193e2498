"""Habitat network: agent pools, application caches, adaptive topology.

Habitats sit on a small-world graph built by Watts-Strogatz rewiring.
Every habitat keeps a probability distribution over its neighbours
(out-edge weights summing to 1) that adapts by Hebbian reinforcement
when migrated agents prove useful, and relaxes toward uniform by decay.

Agent pools are stored packed: parallel arrays of uint64 description
bitmasks, sizes and provenance, deduplicated by description.  The
evolution kernels index straight into these arrays; Agent objects are
materialized only at API boundaries.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, EcosimError
from .model import Agent, attrs_of
from .rng import DeterministicRng


@dataclass
class Edge:
    target: int
    weight: float


class Habitat:
    """One node: a deduplicated agent pool, an application cache, out-edges."""

    def __init__(self, habitat_id: int, cache_capacity: int = 100):
        self.id = habitat_id
        self.out_edges: list[Edge] = []
        # packed pool, parallel arrays indexed by pool position
        self.masks: list[int] = []
        self.sizes: list[int] = []
        self.agent_ids: list[int] = []
        self.origins: list[int] = []
        self.arrivals: list[tuple[int, int] | None] = []
        self._index_of: dict[int, int] = {}
        # cache entries: (tuple of pool indices, request signature mask)
        self.cache: deque = deque(maxlen=cache_capacity)
        self._np_masks = np.empty(0, dtype=np.uint64)
        self._np_sizes = np.empty(0, dtype=np.int64)
        self._dirty = False

    @property
    def pool_size(self) -> int:
        return len(self.masks)

    def add_agent(self, agent: Agent) -> int:
        """Insert an agent, deduplicating by description; returns pool index."""
        mask = 0
        for a in agent.description:
            mask |= 1 << a
        existing = self._index_of.get(mask)
        if existing is not None:
            return existing
        idx = len(self.masks)
        self.masks.append(mask)
        self.sizes.append(len(agent.description))
        self.agent_ids.append(agent.agent_id)
        self.origins.append(agent.origin)
        self.arrivals.append(agent.arrival_edge)
        self._index_of[mask] = idx
        self._dirty = True
        return idx

    def agent_at(self, idx: int) -> Agent:
        """Materialize the Agent stored at a pool index."""
        return Agent(agent_id=self.agent_ids[idx],
                     description=attrs_of(self.masks[idx]),
                     origin=self.origins[idx],
                     arrival_edge=self.arrivals[idx])

    def packed_pool(self) -> tuple[np.ndarray, np.ndarray]:
        """Pool masks and sizes as numpy arrays for the compiled kernel."""
        if self._dirty:
            self._np_masks = np.array(self.masks, dtype=np.uint64)
            self._np_sizes = np.array(self.sizes, dtype=np.int64)
            self._dirty = False
        return self._np_masks, self._np_sizes

    def cache_application(self, genome: tuple[int, ...], signature_mask: int) -> None:
        """FIFO-cache a successful application (pool indices + request signature)."""
        self.cache.append((genome, signature_mask))

    def eligible_seeds(self, request_mask: int, limit: int) -> list[tuple[int, ...]]:
        """Cached applications whose originating request shares >= 50% of
        this request's attribute ids, newest first, at most ``limit``."""
        if limit <= 0:
            return []
        need = len_bits(request_mask)
        out = []
        for genome, sig in reversed(self.cache):
            if 2 * len_bits(sig & request_mask) >= need:
                out.append(genome)
                if len(out) == limit:
                    break
        return out


def len_bits(mask: int) -> int:
    return mask.bit_count()


class HabitatNetwork:
    """All habitats plus run-scoped counters (agent ids, diagnostics)."""

    def __init__(self, habitats: list[Habitat]):
        self.habitats = habitats
        self.reinforce_skipped = 0
        self._next_agent_id = 0

    def new_agent_id(self) -> int:
        i = self._next_agent_id
        self._next_agent_id += 1
        return i

    def weight_rows(self) -> list[tuple[int, int, float]]:
        rows = []
        for h in self.habitats:
            for e in h.out_edges:
                rows.append((h.id, e.target, e.weight))
        return rows


def _ring_adjacency(n: int, k: int) -> list[set[int]]:
    adj = [set() for _ in range(n)]
    for j in range(1, k // 2 + 1):
        for u in range(n):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    return adj


def _is_connected(adj: list[set[int]]) -> bool:
    n = len(adj)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                count += 1
                stack.append(v)
    return count == n


def build_topology(n: int, k: int, rewire_p: float, rng: DeterministicRng,
                   cache_capacity: int = 100, max_tries: int = 100) -> HabitatNetwork:
    """Watts-Strogatz small-world habitat graph.

    Ring of n nodes each linked to its k nearest neighbours; every ring
    edge (u, u+j) is rewired to a random non-neighbour with probability
    rewire_p.  Rebuilt from scratch until connected (max_tries attempts).
    Directed edge weights start uniform at 1/out_degree.
    """
    if k < 2 or k % 2 != 0:
        raise ConfigurationError("base degree k must be even and >= 2")
    if n <= k:
        raise ConfigurationError("need more habitats than the base degree")
    if not 0.0 <= rewire_p <= 1.0:
        raise ConfigurationError("rewire_p must be in [0,1]")

    for _ in range(max_tries):
        adj = _ring_adjacency(n, k)
        for j in range(1, k // 2 + 1):
            for u in range(n):
                v = (u + j) % n
                if rng.random() >= rewire_p:
                    continue
                if v not in adj[u] or len(adj[u]) >= n - 1:
                    continue  # edge already rewired away, or u is saturated
                while True:
                    w = rng.randbelow(n)
                    if w != u and w not in adj[u]:
                        break
                adj[u].discard(v)
                adj[v].discard(u)
                adj[u].add(w)
                adj[w].add(u)
        if _is_connected(adj):
            habitats = []
            for u in range(n):
                h = Habitat(u, cache_capacity=cache_capacity)
                deg = len(adj[u])
                h.out_edges = [Edge(v, 1.0 / deg) for v in sorted(adj[u])]
                habitats.append(h)
            return HabitatNetwork(habitats)
    raise ConfigurationError(
        f"could not build a connected topology in {max_tries} attempts")


def sample_neighbor(habitat: Habitat, rng: DeterministicRng) -> int:
    """Draw a neighbour id proportionally to out-edge weight."""
    edges = habitat.out_edges
    if not edges:
        raise EcosimError(f"habitat {habitat.id} has no out-edges")
    r = rng.random()
    acc = 0.0
    for e in edges:
        acc += e.weight
        if r < acc:
            return e.target
    return edges[-1].target  # guard against fp undershoot


def migrate_application(network: HabitatNetwork, source: int,
                        agents: list[Agent], signature_mask: int,
                        rng: DeterministicRng) -> int:
    """Copy a successful application one weighted hop from its habitat.

    The destination receives copies of the constituent agents
    (deduplicated by description, fresh ids, arrival_edge recorded) and a
    cache entry referencing them, tagged with the originating request's
    signature so later similar requests can reuse the application.
    """
    src = network.habitats[source]
    dest_id = sample_neighbor(src, rng)
    dest = network.habitats[dest_id]
    edge = (source, dest_id)
    genome = []
    for agent in agents:
        copy = Agent(agent_id=network.new_agent_id(),
                     description=agent.description,
                     origin=agent.origin,
                     arrival_edge=edge)
        genome.append(dest.add_agent(copy))
    dest.cache_application(tuple(genome), signature_mask)
    return dest_id


def reinforce(network: HabitatNetwork, edge: tuple[int, int], eta: float) -> None:
    """Strengthen one directed edge and renormalize its source's weights.

    A missing edge (possible only if topology and provenance disagree) is
    skipped and counted in network.reinforce_skipped.
    """
    source, target = edge
    h = network.habitats[source]
    hit = None
    for e in h.out_edges:
        if e.target == target:
            hit = e
            break
    if hit is None:
        network.reinforce_skipped += 1
        return
    hit.weight += eta
    total = sum(e.weight for e in h.out_edges)
    for e in h.out_edges:
        e.weight /= total


def decay(network: HabitatNetwork, delta: float) -> None:
    """Relax every habitat's out-weights toward uniform.

    w <- (1-delta)*w + delta/out_degree, applied once per time step.
    Pure multiplicative decay would cancel under renormalization; this
    form genuinely forgets unreinforced preferences.
    """
    for h in network.habitats:
        edges = h.out_edges
        deg = len(edges)
        if deg == 0:
            continue
        base = delta / deg
        total = 0.0
        for e in edges:
            e.weight = (1.0 - delta) * e.weight + base
            total += e.weight
        for e in edges:  # re-pin the sum against fp drift
            e.weight /= total
