"""Monte Carlo engines for the flooding time.

Two simulators with different purposes:

``simulate_generative``
    Samples the (informed, active) state machine behind the exact recursion.
    Its mean is the analytic flooding time by construction, so it checks the
    solver, not the model.

``simulate_physical``
    Runs the actual ON/OFF edge processes on all N(N-1)/2 node pairs in
    event order and floods each ON component as soon as it touches an
    informed node. This is the ground truth the model is measured against.

Replications are grouped into fixed-size blocks. Block ``k`` draws from a
generator seeded by ``SeedSequence(seed, spawn_key=(k,))``, so results do not
depend on how blocks are distributed across worker processes.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .core import ModelParams, ParameterError, stationary_probability

BLOCK_SIZE = 2048
DEFAULT_GUARD = 10**9
Z_95 = 1.96


class GuardExceededError(RuntimeError):
    """A physical replication hit its event budget before everyone was informed."""

    def __init__(self, message: str, state: "EdgeSimState", replication: Optional[int] = None):
        super().__init__(message)
        self.state = state
        self.replication = replication


@dataclass(frozen=True)
class OnDurationLaw:
    """Law of a contact (ON period) duration."""

    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("exponential", "deterministic", "point_like"):
            raise ParameterError(f"unknown ON-duration law {self.kind!r}")
        if self.kind == "point_like":
            object.__setattr__(self, "value", 0.0)
        elif not (self.value > 0 and math.isfinite(self.value)):
            raise ParameterError(f"{self.kind} law needs a positive finite mean, got {self.value!r}")

    @classmethod
    def exponential(cls, mean: float) -> "OnDurationLaw":
        return cls("exponential", mean)

    @classmethod
    def deterministic(cls, value: float) -> "OnDurationLaw":
        return cls("deterministic", value)

    @classmethod
    def point_like(cls) -> "OnDurationLaw":
        return cls("point_like")

    @property
    def mean(self) -> float:
        return self.value

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "exponential":
            return rng.exponential(self.value)
        return self.value

    def draw_residual(self, rng: np.random.Generator) -> float:
        """Remaining ON time of an edge found ON in steady state."""
        if self.kind == "exponential":
            return rng.exponential(self.value)
        if self.kind == "deterministic":
            return rng.uniform(0.0, self.value)
        return 0.0


def law_for(params: ModelParams, kind: str = "exponential") -> OnDurationLaw:
    """ON-duration law whose mean reproduces ``params.p``."""
    if params.p == 0.0:
        return OnDurationLaw.point_like()
    if params.p == 1.0:
        raise ParameterError("p = 1 has no finite mean contact duration")
    mean = params.mu_inv if params.mu_inv is not None else params.p / (params.lam * (1.0 - params.p))
    if kind in ("exponential", "exp"):
        return OnDurationLaw.exponential(mean)
    if kind in ("deterministic", "det"):
        return OnDurationLaw.deterministic(mean)
    raise ParameterError(f"unknown ON-duration law {kind!r}")


def check_law(params: ModelParams, law: OnDurationLaw) -> None:
    # with p == 1 the graph is complete at t = 0, no duration is ever drawn
    if params.p == 1.0 and law.kind != "point_like":
        return
    implied = stationary_probability(params.lam, law.mean)
    if not math.isclose(implied, params.p, rel_tol=1e-9, abs_tol=1e-12):
        raise ParameterError(
            f"{law.kind} law with mean {law.mean!r} implies p={implied!r}, params say p={params.p!r}"
        )


@dataclass(frozen=True)
class EdgeSimState:
    """Snapshot of a physical replication."""

    n_nodes: int
    edges: Tuple[Tuple[int, int], ...]
    on: Tuple[bool, ...]
    next_transition_time: Tuple[float, ...]
    informed: FrozenSet[int]
    clock: float
    event_count: int


@dataclass(frozen=True)
class FloodingEstimate:
    mean: float
    stderr: float
    ci_low: float
    ci_high: float
    replications: int
    seed: int

    @classmethod
    def from_samples(cls, samples: np.ndarray, seed: int) -> "FloodingEstimate":
        n = samples.size
        mean = float(samples.mean())
        stderr = float(samples.std(ddof=1) / math.sqrt(n))
        return cls(mean, stderr, mean - Z_95 * stderr, mean + Z_95 * stderr, n, seed)


def edge_list(n_nodes: int) -> List[Tuple[int, int]]:
    return [(u, v) for u in range(n_nodes) for v in range(u + 1, n_nodes)]


def informed_closure(on_edges: Iterable[Tuple[int, int]], informed: Iterable[int]) -> Set[int]:
    """Informed set grown by every ON-edge component that touches it."""
    adjacency: dict = {}
    for u, v in on_edges:
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    reached = set(informed)
    queue = deque(reached)
    while queue:
        u = queue.popleft()
        for v in adjacency.get(u, ()):
            if v not in reached:
                reached.add(v)
                queue.append(v)
    return reached


def simulate_generative(params: ModelParams, rng: np.random.Generator) -> float:
    """One flooding time drawn from the (informed, active) state machine."""
    n, lam, p = params.n_nodes, params.lam, params.p
    i, a, t = 1, 1, 0.0
    while i < n:
        m = n - i
        c = rng.binomial(m, -math.expm1(a * math.log1p(-p)) if p < 1 else 1.0)
        if c == 0:
            t += rng.exponential(1.0 / (lam * i * m))
            i, a = i + 1, 1
        else:
            i, a = i + c, c
    return t


def simulate_generative_batch(params: ModelParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """``size`` independent draws of :func:`simulate_generative`, vectorised."""
    n, lam, p = params.n_nodes, params.lam, params.p
    t = np.zeros(size)
    i = np.ones(size, dtype=np.int64)
    a = np.ones(size, dtype=np.int64)
    live = np.flatnonzero(i < n)
    log_s = math.log1p(-p) if p < 1 else -math.inf
    while live.size:
        il, al = i[live], a[live]
        m = n - il
        q = -np.expm1(al * log_s) if p < 1 else np.ones(live.size)
        c = rng.binomial(m, q)
        wait = c == 0
        if wait.any():
            w = live[wait]
            t[w] += rng.exponential(1.0 / (lam * il[wait] * m[wait]))
        i[live] = np.where(wait, il + 1, il + c)
        a[live] = np.where(wait, 1, c)
        live = live[i[live] < n]
    return t


def stationary_edge_init(
    law: OnDurationLaw, lam: float, rng: np.random.Generator, n_edges: int = 1, p: Optional[float] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Steady-state ON flags and residual times for ``n_edges`` edges.

    OFF residuals are exponential(lam) by memorylessness; ON residuals follow
    the equilibrium residual of ``law``.
    """
    if p is None:
        p = stationary_probability(lam, law.mean)
    on = rng.random(n_edges) < p
    residual = np.empty(n_edges)
    for e in range(n_edges):
        residual[e] = law.draw_residual(rng) if on[e] else rng.exponential(1.0 / lam)
    return on, residual


def simulate_physical(
    params: ModelParams,
    law: OnDurationLaw,
    rng: np.random.Generator,
    guard: int = DEFAULT_GUARD,
) -> float:
    """First time every node is informed, on the explicit ON/OFF edge process.

    Ties between transitions at the same instant resolve by edge index.
    Edges with both ends informed are dropped from the event queue since they
    can no longer affect the outcome.
    """
    if guard <= 0:
        raise ParameterError(f"guard must be positive, got {guard}")
    check_law(params, law)
    n, lam = params.n_nodes, params.lam
    if n == 1:
        return 0.0
    edges = edge_list(n)
    on_arr, residual = stationary_edge_init(law, lam, rng, len(edges), params.p)
    on = on_arr.tolist()
    next_time = residual.tolist()
    neighbours: List[Set[int]] = [set() for _ in range(n)]
    for e, (u, v) in enumerate(edges):
        if on[e]:
            neighbours[u].add(v)
            neighbours[v].add(u)

    informed = [False] * n
    count = 0

    def flood(start: int) -> None:
        nonlocal count
        informed[start] = True
        count += 1
        stack = [start]
        while stack:
            u = stack.pop()
            for v in neighbours[u]:
                if not informed[v]:
                    informed[v] = True
                    count += 1
                    stack.append(v)

    flood(0)
    if count == n:
        return 0.0

    heap = [(next_time[e], e) for e in range(len(edges))]
    heapq.heapify(heap)
    clock = 0.0
    events = 0
    point_like = law.kind == "point_like"
    mean_off = 1.0 / lam
    while heap:
        if events >= guard:
            state = EdgeSimState(
                n, tuple(edges), tuple(on), tuple(next_time),
                frozenset(k for k in range(n) if informed[k]), clock, events,
            )
            raise GuardExceededError(f"event budget {guard} exhausted at t={clock!r}", state)
        clock, e = heapq.heappop(heap)
        events += 1
        u, v = edges[e]
        if on[e]:
            on[e] = False
            neighbours[u].discard(v)
            neighbours[v].discard(u)
            next_time[e] = clock + rng.exponential(mean_off)
        else:
            if informed[u] != informed[v]:
                flood(v if informed[u] else u)
                if count == n:
                    return clock
            if point_like:
                next_time[e] = clock + rng.exponential(mean_off)
            else:
                on[e] = True
                neighbours[u].add(v)
                neighbours[v].add(u)
                next_time[e] = clock + law.draw(rng)
        if not (informed[u] and informed[v]):
            heapq.heappush(heap, (next_time[e], e))
    raise AssertionError("event queue drained before absorption")


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _run_block(task) -> np.ndarray:
    kind, params, law, seed, block, start, size, guard = task
    rng = _block_generator(seed, block)
    if kind == "generative":
        return simulate_generative_batch(params, rng, size)
    out = np.empty(size)
    for k in range(size):
        try:
            out[k] = simulate_physical(params, law, rng, guard)
        except GuardExceededError as exc:
            exc.replication = start + k
            raise
    return out


def monte_carlo(
    kind: str,
    params: ModelParams,
    law: Optional[OnDurationLaw] = None,
    replications: int = 10_000,
    seed: int = 0,
    workers: int = 1,
    guard: int = DEFAULT_GUARD,
) -> FloodingEstimate:
    """Estimate the expected flooding time with one of the two simulators.

    The estimate is bit-identical for a fixed ``(kind, params, law,
    replications, seed)`` whatever ``workers`` is.
    """
    if kind not in ("generative", "physical"):
        raise ParameterError(f"kind must be 'generative' or 'physical', got {kind!r}")
    if replications < 2:
        raise ParameterError(f"replications must be >= 2, got {replications}")
    if seed < 0:
        raise ParameterError(f"seed must be nonnegative, got {seed}")
    if kind == "physical":
        law = law if law is not None else law_for(params)
        check_law(params, law)
    tasks = []
    for block, start in enumerate(range(0, replications, BLOCK_SIZE)):
        size = min(BLOCK_SIZE, replications - start)
        tasks.append((kind, params, law, seed, block, start, size, guard))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, tasks))
    else:
        parts = [_run_block(task) for task in tasks]
    return FloodingEstimate.from_samples(np.concatenate(parts), seed)

