"""Core domain model: tasks, requests, agents and aggregations.

Attributes are integers in [0, A).  A task is a non-empty set of
attributes a user wants covered; a request is an ordered list of tasks.
An agent offers a fixed set of attributes (its description); an
aggregation is an ordered list of agents proposed to serve a request,
matched position by position.

Attribute sets are exposed as frozensets at this level.  The evolution
kernels work on uint64 bitmask images of the same sets (the simulator
caps the attribute space at 64); ``mask_of``/``attrs_of`` convert
between the two representations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import InvalidInputError

MAX_ATTRIBUTES = 64


def mask_of(attrs) -> int:
    """Pack an iterable of attribute ids into a uint64 bitmask."""
    m = 0
    for a in attrs:
        m |= 1 << a
    return m


def attrs_of(mask: int) -> frozenset[int]:
    """Unpack a bitmask into a frozenset of attribute ids."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class Task:
    """One unit of requested functionality: a non-empty attribute set."""

    attributes: frozenset[int]

    def __post_init__(self):
        if not self.attributes:
            raise InvalidInputError("task needs at least one attribute")

    @property
    def size(self) -> int:
        return len(self.attributes)


@dataclass(frozen=True)
class Request:
    """An ordered sequence of tasks issued by one user."""

    tasks: tuple[Task, ...]

    def __post_init__(self):
        if not self.tasks:
            raise InvalidInputError("request needs at least one task")

    @property
    def length(self) -> int:
        return len(self.tasks)

    @property
    def total_attributes(self) -> int:
        """Sum of task sizes; the normalizer for the success threshold."""
        return sum(t.size for t in self.tasks)

    @property
    def attribute_union(self) -> frozenset[int]:
        out: set[int] = set()
        for t in self.tasks:
            out |= t.attributes
        return frozenset(out)


@dataclass(frozen=True)
class Agent:
    """A service provider with an immutable attribute description.

    ``agent_id`` is unique within a run (copies created by migration get
    fresh ids).  ``arrival_edge`` is None for locally created agents and
    the directed edge (source, destination) for migrants, recorded so
    later successes can reinforce the link that delivered them.
    """

    agent_id: int
    description: frozenset[int]
    origin: int
    arrival_edge: Optional[tuple[int, int]] = None

    def __post_init__(self):
        if not self.description:
            raise InvalidInputError("agent description must be non-empty")

    @property
    def size(self) -> int:
        return len(self.description)


@dataclass
class Aggregation:
    """An ordered list of agents matched against a request's tasks."""

    agents: list[Agent] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.agents)

    @property
    def attribute_counts(self) -> list[int]:
        return [a.size for a in self.agents]


def semantic_distance(request: Request, aggregation: Aggregation) -> float:
    """Mismatch between a request and an aggregation, lower is better.

    Tasks and agents are compared position by position.  Each requested
    attribute the matched agent lacks costs 1; each surplus attribute the
    agent carries costs 0.5.  Tasks beyond the end of the aggregation are
    fully unmet (cost = task size); agents beyond the end of the request
    are pure surplus (cost = half their size).  Zero iff agent i's
    description equals task i's attributes for all i and lengths agree.
    """
    tasks = request.tasks
    agents = aggregation.agents
    m, n = len(tasks), len(agents)
    d = 0.0
    for i in range(min(m, n)):
        t = tasks[i].attributes
        a = agents[i].description
        d += len(t - a) + 0.5 * len(a - t)
    for i in range(n, m):
        d += tasks[i].size
    for j in range(m, n):
        d += 0.5 * agents[j].size
    return d


def success_budget(request: Request, threshold_fraction: float) -> float:
    """Maximum distance still counted as success for this request."""
    return threshold_fraction * request.total_attributes


def is_successful(request: Request, aggregation: Aggregation,
                  threshold_fraction: float) -> bool:
    """True when distance is within the threshold budget (inclusive)."""
    if threshold_fraction < 0:
        raise InvalidInputError("threshold_fraction must be >= 0")
    return semantic_distance(request, aggregation) <= success_budget(
        request, threshold_fraction)
