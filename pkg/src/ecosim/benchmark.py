"""Benchmark the pure-Python evolution kernel against the compiled one.

Runs an identical batch of evolution problems through both kernels,
checks that results agree exactly, and reports timings:

    python -m ecosim.benchmark [--requests N] [--pool-size P]
"""

from __future__ import annotations

import argparse
import time

from . import _evolve_py
from .rng import DeterministicRng

try:
    from . import _evolve_c
except ImportError:
    _evolve_c = None

_PARAMS = dict(pop=50, max_gens=100, stag_limit=20, tourn=3,
               cx_rate=0.7, mut_rate=0.3, elites=1)


def _make_instances(n_requests: int, pool_size: int, seed: int = 7):
    rng = DeterministicRng(seed)
    instances = []
    for _ in range(n_requests):
        masks = [rng.u64() & 0xFFFF for _ in range(pool_size)]
        masks = [m if m else 1 for m in masks]
        sizes = [m.bit_count() for m in masks]
        m_tasks = 2 + rng.randbelow(9)
        task_masks = [rng.u64() & 0xFFFF or 1 for _ in range(m_tasks)]
        task_sizes = [t.bit_count() for t in task_masks]
        instances.append((masks, sizes, task_masks, task_sizes))
    return instances


def _run_batch(kernel, instances, numpy_inputs: bool, seed: int = 99):
    import numpy as np
    rng = DeterministicRng(seed)
    results = []
    t0 = time.perf_counter()
    for masks, sizes, task_masks, task_sizes in instances:
        cap = 2 * len(task_masks) + 8
        if numpy_inputs:
            args = (np.array(masks, dtype=np.uint64),
                    np.array(sizes, dtype=np.int64),
                    np.array(task_masks, dtype=np.uint64),
                    np.array(task_sizes, dtype=np.int64))
        else:
            args = (masks, sizes, task_masks, task_sizes)
        best, dist, gens = kernel.ga_run(
            *args, [], _PARAMS["pop"], _PARAMS["max_gens"],
            _PARAMS["stag_limit"], _PARAMS["tourn"], _PARAMS["cx_rate"],
            _PARAMS["mut_rate"], _PARAMS["elites"], cap, rng)
        results.append((tuple(best), dist, gens))
    elapsed = time.perf_counter() - t0
    return results, elapsed, rng.getstate()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--requests", type=int, default=60,
                        help="evolution problems per batch (default 60)")
    parser.add_argument("--pool-size", type=int, default=300,
                        help="agents in the synthetic pool (default 300)")
    args = parser.parse_args(argv)

    instances = _make_instances(args.requests, args.pool_size)
    pure_results, pure_time, pure_state = _run_batch(
        _evolve_py, instances, numpy_inputs=False)
    print(f"pure python : {pure_time:8.3f}s "
          f"({pure_time / args.requests * 1e3:7.2f} ms/request)")

    if _evolve_c is None:
        print("compiled    : not available (pure fallback active)")
        return 0

    comp_results, comp_time, comp_state = _run_batch(
        _evolve_c, instances, numpy_inputs=True)
    print(f"compiled    : {comp_time:8.3f}s "
          f"({comp_time / args.requests * 1e3:7.2f} ms/request)")
    if comp_results != pure_results or comp_state != pure_state:
        print("MISMATCH: kernels disagree, file a bug")
        return 1
    print(f"speedup     : {pure_time / comp_time:8.1f}x  "
          "(results and stream states identical)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
