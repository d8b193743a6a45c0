"""Event-driven simulation of the original (non-Markovian-routing) network.

Each arriving customer draws every finite competing time at its node, stays
for the minimum, and on departure is routed by the row belonging to the
component that achieved the minimum. The engine keeps a future-event list
ordered by (time, sequence number) and accumulates time-weighted occupancy
between events inside the measurement window [warmup, horizon].

Determinism contract (given identical spec and config):
  * one uniform stream drives everything, consumed in a fixed order —
    per arrival, component draws in component index order (deterministic
    components consume no uniform), then one uniform per departure for the
    routing decision; external arrival gaps are drawn when the previous
    arrival fires;
  * simultaneous events are ordered by insertion sequence number;
  * replicate() derives the stream of run r from
    numpy.random.SeedSequence(seed).spawn(runs)[r].
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidNetworkError
from .model import (
    Deterministic,
    Exponential,
    NetworkSpec,
    Uniform,
    Weibull,
    structural_violations,
)

__all__ = [
    "SimConfig",
    "EventCounts",
    "SimResult",
    "ReplicateSummary",
    "simulate",
    "replicate",
    "GENERATORS",
]

GENERATORS = {
    "pcg64": np.random.PCG64,
    "philox": np.random.Philox,
}


@dataclass(frozen=True)
class SimConfig:
    """Run parameters. ``warmup`` is discarded; averages cover
    [warmup, horizon]."""

    seed: int = 36
    generator_name: str = "pcg64"
    horizon: float = 10_000.0
    warmup: float = 1_000.0
    record_joint: bool = True

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "horizon", float(self.horizon))
        object.__setattr__(self, "warmup", float(self.warmup))
        if self.generator_name not in GENERATORS:
            raise ValueError(
                f"unknown generator {self.generator_name!r}; "
                f"choose from {sorted(GENERATORS)}")
        if not self.warmup >= 0.0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if not self.horizon > self.warmup:
            raise ValueError(
                f"horizon ({self.horizon}) must exceed warmup ({self.warmup})")


@dataclass
class EventCounts:
    """Integer event tallies for one run."""

    external: np.ndarray    # (N,) external arrivals per node
    arrivals: np.ndarray    # (N,) all arrivals per node (external + routed)
    departures: np.ndarray  # (N, K) departures by winning component

    @property
    def routed(self) -> np.ndarray:
        return self.arrivals - self.external


@dataclass
class SimResult:
    """Time-averaged occupancy data from one run.

    ``marginal_weights[n]`` maps occupancy -> accumulated time; when the
    joint histogram was recorded the marginals are derived from it by
    summing in sorted state order, so the marginal of ``joint_weights``
    over node n reproduces ``marginal_weights[n]`` bit-exactly.
    """

    marginal_weights: tuple[dict[int, float], ...]
    joint_weights: Optional[dict[tuple[int, ...], float]]
    means: np.ndarray
    event_counts: EventCounts
    effective_duration: float
    final_occupancy: tuple[int, ...]
    ties: int
    config: SimConfig


def _sampling_plan(spec: NetworkSpec):
    """Per node: tuple of (component, kind, a, b) for the finite components,
    wired for inline inverse-transform draws in the event loop."""
    plans = []
    for node in spec.nodes:
        plan = []
        for k, d in enumerate(node.components):
            if isinstance(d, Exponential):
                plan.append((k, 0, d.rate, 0.0))
            elif isinstance(d, Deterministic):
                plan.append((k, 1, d.value, 0.0))
            elif isinstance(d, Uniform):
                plan.append((k, 2, d.lo, d.hi - d.lo))
            elif isinstance(d, Weibull):
                plan.append((k, 3, d.scale, 1.0 / d.shape))
            # Infinite components never achieve the minimum: no draw.
        plans.append(tuple(plan))
    return plans


def _route_tables(spec: NetworkSpec):
    """Per (node, component): tuple of (cumulative probability, target);
    a routing uniform beyond the last threshold means the customer exits."""
    tables = []
    for node in spec.nodes:
        rows = []
        for row in node.routing:
            acc = 0.0
            entries = []
            for m, q in enumerate(row):
                if q > 0.0:
                    acc += q
                    entries.append((acc, m))
            rows.append(tuple(entries))
        tables.append(tuple(rows))
    return tables


def _run(spec: NetworkSpec, cfg: SimConfig, rng: np.random.Generator) -> SimResult:
    n_nodes = spec.n_nodes
    n_comp = spec.n_components
    plans = _sampling_plan(spec)
    routes = _route_tables(spec)
    lam = spec.arrival_rates

    horizon = cfg.horizon
    warmup = cfg.warmup
    random = rng.random
    log1p = math.log1p
    inf = math.inf
    push = heapq.heappush
    pop = heapq.heappop

    state = [0] * n_nodes
    joint: Optional[dict] = {} if cfg.record_joint else None
    marg: Optional[list] = None if cfg.record_joint else [{} for _ in range(n_nodes)]
    external = [0] * n_nodes
    arrivals = [0] * n_nodes
    departures = [[0] * n_comp for _ in range(n_nodes)]
    ties = 0
    seq = 0
    heap: list = []

    def admit(j: int, now: float) -> None:
        """New customer at node j: draw finite components in index order,
        keep the strict minimum (first index wins a tie), schedule the
        departure carrying the winning component."""
        nonlocal seq, ties
        arrivals[j] += 1
        state[j] += 1
        best = inf
        best_k = -1
        for k, kind, a, b in plans[j]:
            if kind == 0:
                s = -log1p(-random()) / a
            elif kind == 1:
                s = a
            elif kind == 2:
                s = a + random() * b
            else:
                s = a * (-log1p(-random())) ** b
            if s < best:
                best = s
                best_k = k
            elif s == best:
                ties += 1
        push(heap, (now + best, seq, j, best_k))
        seq += 1

    for n in range(n_nodes):
        if lam[n] > 0.0:
            push(heap, (-log1p(-random()) / lam[n], seq, n, -1))
            seq += 1

    t_last = 0.0
    while heap:
        t, _, n, k = pop(heap)
        if t > horizon:
            break
        if t > warmup:
            a = t_last if t_last > warmup else warmup
            dt = t - a
            if dt > 0.0:
                if joint is not None:
                    key = tuple(state)
                    joint[key] = joint.get(key, 0.0) + dt
                else:
                    for i in range(n_nodes):
                        mi = marg[i]
                        x = state[i]
                        mi[x] = mi.get(x, 0.0) + dt
        t_last = t
        if k < 0:
            push(heap, (t + -log1p(-random()) / lam[n], seq, n, -1))
            seq += 1
            external[n] += 1
            admit(n, t)
        else:
            state[n] -= 1
            departures[n][k] += 1
            u = random()
            for c, m in routes[n][k]:
                if u < c:
                    admit(m, t)
                    break
            # falling through: exits the network

    a = t_last if t_last > warmup else warmup
    dt = horizon - a
    if dt > 0.0:
        if joint is not None:
            key = tuple(state)
            joint[key] = joint.get(key, 0.0) + dt
        else:
            for i in range(n_nodes):
                mi = marg[i]
                x = state[i]
                mi[x] = mi.get(x, 0.0) + dt

    duration = horizon - warmup
    if joint is not None:
        joint = {key: joint[key] for key in sorted(joint)}
        marg = [{} for _ in range(n_nodes)]
        for key, w in joint.items():
            for i, x in enumerate(key):
                mi = marg[i]
                mi[x] = mi.get(x, 0.0) + w
    marginals = tuple(dict(sorted(m.items())) for m in marg)
    means = np.array([
        sum(x * w for x, w in marginals[n].items()) / duration
        for n in range(n_nodes)
    ])
    counts = EventCounts(
        external=np.array(external, dtype=np.int64),
        arrivals=np.array(arrivals, dtype=np.int64),
        departures=np.array(departures, dtype=np.int64).reshape(n_nodes, n_comp),
    )
    return SimResult(
        marginal_weights=marginals,
        joint_weights=joint,
        means=means,
        event_counts=counts,
        effective_duration=duration,
        final_occupancy=tuple(state),
        ties=ties,
        config=cfg,
    )


def simulate(spec: NetworkSpec, cfg: SimConfig = SimConfig()) -> SimResult:
    """Run one simulation. Fully deterministic given (spec, cfg)."""
    report = structural_violations(spec)
    if report:
        raise InvalidNetworkError(report)
    rng = np.random.Generator(GENERATORS[cfg.generator_name](cfg.seed))
    return _run(spec, cfg, rng)


@dataclass
class ReplicateSummary:
    """Independent replications plus pooled means with standard errors."""

    results: list[SimResult]
    means: np.ndarray            # (N,) pooled across runs
    standard_errors: np.ndarray  # (N,) zero when runs == 1
    runs: int

    @property
    def per_run_means(self) -> np.ndarray:
        return np.vstack([r.means for r in self.results])


def replicate(spec: NetworkSpec, cfg: SimConfig, runs: int) -> ReplicateSummary:
    """Run ``runs`` independent replications.

    Run r uses the stream SeedSequence(cfg.seed).spawn(runs)[r]; results
    are ordered by run index, so output is independent of scheduling.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    report = structural_violations(spec)
    if report:
        raise InvalidNetworkError(report)
    children = np.random.SeedSequence(cfg.seed).spawn(runs)
    bitgen = GENERATORS[cfg.generator_name]
    results = [_run(spec, cfg, np.random.Generator(bitgen(child)))
               for child in children]
    per_run = np.vstack([r.means for r in results])
    means = per_run.mean(axis=0)
    if runs > 1:
        errors = per_run.std(axis=0, ddof=1) / math.sqrt(runs)
    else:
        errors = np.zeros_like(means)
    return ReplicateSummary(results=results, means=means,
                            standard_errors=errors, runs=runs)
