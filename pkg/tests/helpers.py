"""Shared builders for the test suite."""

from ecosim.habitat import Habitat
from ecosim.model import Agent, Aggregation, Request, Task
from ecosim.rng import DeterministicRng


def make_request(*attr_sets):
    """Request whose i-th task has the i-th attribute set."""
    return Request(tuple(Task(frozenset(a)) for a in attr_sets))


def make_agents(*attr_sets, origin=0):
    return [Agent(i, frozenset(a), origin) for i, a in enumerate(attr_sets)]


def make_aggregation(*attr_sets):
    return Aggregation(make_agents(*attr_sets))


def fill_habitat(attr_sets, habitat_id=0, cache_capacity=100):
    """Habitat whose pool holds one agent per attribute set, in order."""
    hab = Habitat(habitat_id, cache_capacity=cache_capacity)
    for i, attrs in enumerate(attr_sets):
        hab.add_agent(Agent(i, frozenset(attrs), habitat_id))
    return hab


def rng_for(seed=1):
    return DeterministicRng(seed)


class ScriptedRng:
    """Replays a fixed script of draws; asserts the call sequence.

    Each script entry is ("randbelow", bound, value) or ("random", value).
    Used to drive the pure evolution kernel through exact operator paths,
    which doubles as a check of the documented draw-order contract.
    """

    def __init__(self, script):
        self.script = list(script)
        self.pos = 0

    def _next(self, kind, bound=None):
        assert self.pos < len(self.script), f"script exhausted at draw {self.pos}"
        entry = self.script[self.pos]
        self.pos += 1
        assert entry[0] == kind, (
            f"draw {self.pos - 1}: expected {entry[0]}, kernel asked for {kind}")
        if kind == "randbelow":
            assert entry[1] == bound, (
                f"draw {self.pos - 1}: expected bound {entry[1]}, got {bound}")
            return entry[2]
        return entry[1]

    def randbelow(self, n):
        return self._next("randbelow", n)

    def random(self):
        return self._next("random")

    def exhausted(self):
        return self.pos == len(self.script)
