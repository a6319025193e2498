"""Pure-Python evolution kernel (reference implementation).

The compiled kernel in _evolve_c.pyx mirrors this module draw for draw:
given the same inputs and random stream both produce identical genomes,
distances, generation counts and final stream states.  Any change to the
draw order here is a breaking change and must be applied to both.

Representation: the agent pool is a pair of parallel arrays (uint64
description bitmasks, popcount sizes); a genome is a list of pool
indices; the request is a pair of arrays (task masks, task sizes).
Distances are kept as integers at twice the model scale (surplus
attributes cost 1 instead of 0.5) so all comparison is exact.

Draw-order contract per generation, for each non-elite slot:
  tournament draws (tournament_size indices) for parent 1;
  one uniform for the crossover coin;
  if crossover: tournament draws for parent 2, then one cut point per
  parent (1 + randbelow(len));
  one uniform for the mutation coin;
  if mutation: one op choice randbelow(3), then only the draws the op
  actually applies (insert skips all further draws at the length cap,
  delete skips at length 1).
Ranking is always by (distance, genome length, population index).
"""

from __future__ import annotations


def evaluate(genome, masks, sizes, task_masks, task_sizes) -> int:
    """Doubled semantic distance of a genome against the request."""
    m = len(task_masks)
    n = len(genome)
    s = 0
    for i in range(min(m, n)):
        tm = task_masks[i]
        dm = masks[genome[i]]
        s += 2 * (tm & ~dm).bit_count() + (dm & ~tm).bit_count()
    for i in range(n, m):
        s += 2 * task_sizes[i]
    for j in range(m, n):
        s += sizes[genome[j]]
    return s


def instantiate(masks, sizes, task_masks, task_sizes, seeds, pop, cap, rng):
    """Initial population: cached seeds first, then random sequences.

    Random individuals get length min(1 + randbelow(2m), cap) with genes
    uniform over the pool.  Returns (genomes, dists2).
    """
    n_pool = len(masks)
    m = len(task_masks)
    genomes = []
    for i in range(pop):
        if i < len(seeds):
            genomes.append(list(seeds[i])[:cap])
        else:
            length = min(1 + rng.randbelow(2 * m), cap)
            genomes.append([rng.randbelow(n_pool) for _ in range(length)])
    dists = [evaluate(g, masks, sizes, task_masks, task_sizes) for g in genomes]
    return genomes, dists


def _tournament(dists, lens, pop, k, rng) -> int:
    best = -1
    for _ in range(k):
        c = rng.randbelow(pop)
        if best < 0 or (dists[c], lens[c], c) < (dists[best], lens[best], best):
            best = c
    return best


def step(genomes, dists, masks, sizes, task_masks, task_sizes,
         pop, tourn, cx_rate, mut_rate, elites, cap, rng):
    """One generation: elitism, tournament selection, crossover, mutation."""
    n_pool = len(masks)
    lens = [len(g) for g in genomes]
    order = sorted(range(pop), key=lambda i: (dists[i], lens[i], i))
    new_genomes = [list(genomes[order[e]]) for e in range(elites)]
    new_dists = [dists[order[e]] for e in range(elites)]
    for _ in range(elites, pop):
        p1 = _tournament(dists, lens, pop, tourn, rng)
        if rng.random() < cx_rate:
            p2 = _tournament(dists, lens, pop, tourn, rng)
            g1, g2 = genomes[p1], genomes[p2]
            c1 = 1 + rng.randbelow(len(g1))
            c2 = 1 + rng.randbelow(len(g2))
            child = g1[:c1] + g2[c2:]
            if len(child) > cap:
                del child[cap:]
        else:
            child = list(genomes[p1])
        if rng.random() < mut_rate:
            op = rng.randbelow(3)
            if op == 0:  # insert
                if len(child) < cap:
                    pos = rng.randbelow(len(child) + 1)
                    child.insert(pos, rng.randbelow(n_pool))
            elif op == 1:  # delete
                if len(child) > 1:
                    del child[rng.randbelow(len(child))]
            else:  # replace
                pos = rng.randbelow(len(child))
                child[pos] = rng.randbelow(n_pool)
        new_genomes.append(child)
        new_dists.append(evaluate(child, masks, sizes, task_masks, task_sizes))
    genomes[:] = new_genomes
    dists[:] = new_dists


def _best_index(dists, genomes, pop) -> int:
    best = 0
    for i in range(1, pop):
        if (dists[i], len(genomes[i]), i) < (dists[best], len(genomes[best]), best):
            best = i
    return best


def ga_run(masks, sizes, task_masks, task_sizes, seeds,
           pop, max_gens, stag_limit, tourn, cx_rate, mut_rate, elites,
           cap, rng):
    """Full evolution run; returns (best_genome, best_dist2, generations).

    Stops on perfect distance, stagnation_limit generations without
    improvement of the best-ever distance, or max_generations.
    """
    genomes, dists = instantiate(masks, sizes, task_masks, task_sizes,
                                 seeds, pop, cap, rng)
    bi = _best_index(dists, genomes, pop)
    best_genome = list(genomes[bi])
    best_dist = dists[bi]
    gens = 0
    stagnant = 0
    while best_dist > 0 and gens < max_gens and stagnant < stag_limit:
        step(genomes, dists, masks, sizes, task_masks, task_sizes,
             pop, tourn, cx_rate, mut_rate, elites, cap, rng)
        gens += 1
        bi = _best_index(dists, genomes, pop)
        if dists[bi] < best_dist:
            best_dist = dists[bi]
            best_genome = list(genomes[bi])
            stagnant = 0
        else:
            stagnant += 1
    return best_genome, best_dist, gens
