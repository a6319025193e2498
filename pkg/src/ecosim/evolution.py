"""One local evolutionary optimization per user request.

A genome is an ordered sequence of pool indices; fitness is the semantic
distance of the corresponding agent aggregation to the request (lower is
better, zero is a perfect match).  The population is seeded from the
habitat: mostly random sequences, plus cached applications previously
evolved for sufficiently similar requests (at this habitat or arrived by
migration).

The generation loop is delegated to a kernel selected in _backend
(compiled when available, pure Python otherwise; identical results).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _evolve_py
from ._backend import BACKEND_NAME, kernel_ga_run
from .errors import InvalidInputError, UnservableRequestError
from .habitat import Habitat
from .model import Aggregation, Request, mask_of
from .rng import DeterministicRng

# Genomes may grow past the random-initialization maximum of 2*tasks via
# insertion; this fixed headroom bounds them (identically in both kernels).
_CAP_HEADROOM = 8

# At most this fraction of the initial population comes from the cache.
_CACHE_SEED_FRACTION = 0.25


def genome_cap(task_count: int) -> int:
    return 2 * task_count + _CAP_HEADROOM


@dataclass(frozen=True)
class EvolutionParams:
    population_size: int = 50
    max_generations: int = 100
    stagnation_limit: int = 20
    tournament_size: int = 3
    crossover_rate: float = 0.7
    mutation_rate: float = 0.3
    elite_count: int = 1

    def __post_init__(self):
        if self.population_size < 1:
            raise InvalidInputError("population_size must be positive")
        if self.max_generations < 1:
            raise InvalidInputError("max_generations must be positive")
        if self.stagnation_limit < 1:
            raise InvalidInputError("stagnation_limit must be positive")
        if self.tournament_size < 1:
            raise InvalidInputError("tournament_size must be positive")
        if self.tournament_size > self.population_size:
            raise InvalidInputError("tournament_size must not exceed population_size")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise InvalidInputError("crossover_rate must be in [0,1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise InvalidInputError("mutation_rate must be in [0,1]")
        if not 0 <= self.elite_count < self.population_size:
            raise InvalidInputError("elite_count must be in [0, population_size)")

    def to_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "max_generations": self.max_generations,
            "stagnation_limit": self.stagnation_limit,
            "tournament_size": self.tournament_size,
            "crossover_rate": self.crossover_rate,
            "mutation_rate": self.mutation_rate,
            "elite_count": self.elite_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvolutionParams":
        if not isinstance(data, dict):
            raise InvalidInputError("evolution params must be an object")
        allowed = set(cls().to_dict())
        unknown = set(data) - allowed
        if unknown:
            raise InvalidInputError(f"unknown evolution keys: {sorted(unknown)}")
        return cls(**data)


@dataclass
class EvolutionResult:
    best: Aggregation
    best_distance: float
    generations_used: int
    succeeded: bool
    best_indices: tuple[int, ...] = ()


class Population:
    """Genomes plus cached distances for one request at one habitat."""

    def __init__(self, habitat: Habitat, request: Request, genomes, dists2, cap):
        self.habitat = habitat
        self.request = request
        self.genomes = genomes
        self.dists2 = dists2  # integer distances at twice the model scale
        self.cap = cap

    def __len__(self) -> int:
        return len(self.genomes)

    @property
    def individuals(self) -> list[tuple[Aggregation, float]]:
        out = []
        for g, d2 in zip(self.genomes, self.dists2):
            agg = Aggregation([self.habitat.agent_at(i) for i in g])
            out.append((agg, d2 / 2.0))
        return out

    def best_distance(self) -> float:
        return min(self.dists2) / 2.0


def _request_arrays(request: Request) -> tuple[list[int], list[int]]:
    task_masks = [mask_of(t.attributes) for t in request.tasks]
    task_sizes = [t.size for t in request.tasks]
    return task_masks, task_sizes


def _gather_seeds(habitat: Habitat, request: Request,
                  params: EvolutionParams) -> list[tuple[int, ...]]:
    limit = math.floor(_CACHE_SEED_FRACTION * params.population_size)
    return habitat.eligible_seeds(mask_of(request.attribute_union), limit)


def instantiate_population(habitat: Habitat, request: Request,
                           params: EvolutionParams,
                           rng: DeterministicRng) -> Population:
    """Build the initial population for a request at a habitat.

    Individuals are random pool-index sequences of length uniform in
    [1, 2 * tasks], except that cached applications whose originating
    requests share at least half of this request's attribute ids are
    copied in first (newest first, at most 25% of the population).
    """
    if habitat.pool_size == 0:
        raise UnservableRequestError(
            f"habitat {habitat.id} has no agents to serve a request")
    task_masks, task_sizes = _request_arrays(request)
    seeds = _gather_seeds(habitat, request, params)
    cap = genome_cap(len(task_masks))
    genomes, dists2 = _evolve_py.instantiate(
        habitat.masks, habitat.sizes, task_masks, task_sizes, seeds,
        params.population_size, cap, rng)
    return Population(habitat, request, genomes, dists2, cap)


def evolve_generation(population: Population, params: EvolutionParams,
                      rng: DeterministicRng) -> Population:
    """Advance the population by one generation in place (and return it).

    Elites are carried over unchanged; the rest are built by tournament
    selection (lowest distance wins, ties to the smaller aggregation then
    the earlier index), one-point crossover with independent per-parent
    cut points, and a mutation that inserts, deletes or replaces one gene.
    """
    h = population.habitat
    task_masks, task_sizes = _request_arrays(population.request)
    _evolve_py.step(population.genomes, population.dists2,
                    h.masks, h.sizes, task_masks, task_sizes,
                    params.population_size, params.tournament_size,
                    params.crossover_rate, params.mutation_rate,
                    params.elite_count, population.cap, rng)
    return population


def run_evolution(habitat: Habitat, request: Request, params: EvolutionParams,
                  threshold_fraction: float, rng: DeterministicRng,
                  max_length: int | None = None) -> EvolutionResult:
    """Evolve an application for a request; stop on perfection,
    stagnation_limit generations without improvement, or max_generations.

    ``max_length`` overrides the default genome cap of 2 * tasks + 8
    (used by small-instance exhaustive-comparison tests).
    """
    if habitat.pool_size == 0:
        raise UnservableRequestError(
            f"habitat {habitat.id} has no agents to serve a request")
    task_masks, task_sizes = _request_arrays(request)
    seeds = _gather_seeds(habitat, request, params)
    cap = max_length if max_length is not None else genome_cap(len(task_masks))

    if BACKEND_NAME == "compiled":
        pool_masks, pool_sizes = habitat.packed_pool()
        best, best_d2, gens = kernel_ga_run(
            pool_masks, pool_sizes,
            np.array(task_masks, dtype=np.uint64),
            np.array(task_sizes, dtype=np.int64),
            seeds, params.population_size, params.max_generations,
            params.stagnation_limit, params.tournament_size,
            params.crossover_rate, params.mutation_rate,
            params.elite_count, cap, rng)
    else:
        best, best_d2, gens = kernel_ga_run(
            habitat.masks, habitat.sizes, task_masks, task_sizes,
            seeds, params.population_size, params.max_generations,
            params.stagnation_limit, params.tournament_size,
            params.crossover_rate, params.mutation_rate,
            params.elite_count, cap, rng)

    distance = best_d2 / 2.0
    aggregation = Aggregation([habitat.agent_at(i) for i in best])
    succeeded = distance <= threshold_fraction * request.total_attributes
    return EvolutionResult(best=aggregation, best_distance=distance,
                           generations_used=gens, succeeded=succeeded,
                           best_indices=tuple(best))
