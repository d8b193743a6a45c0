"""Service-time numerics: survival/density/mean/sampling for each law, and
the competing-minimum statistics the equilibrium solver consumes — for each
(node, component): the probability that the component achieves the minimum
and the component's mean given that it did.

All integrals are over products of survival functions, which are piecewise
smooth with jumps at deterministic atoms and kinks at uniform endpoints, so
the integration range is split at those points and each smooth panel is
handled by adaptive quadrature. The range is truncated where the survival
product is numerically extinct; every truncation bound has a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import InvalidNetworkError, QuadratureError
from .model import (
    Deterministic,
    Exponential,
    Infinite,
    NetworkSpec,
    ServiceDistribution,
    Uniform,
    Weibull,
    structural_violations,
)

__all__ = [
    "MinStats",
    "survival",
    "density",
    "mean",
    "sample",
    "min_probability",
    "conditional_mean_given_min",
    "expected_min",
    "compute_min_stats",
]

# survival level below which the integration range is truncated; the
# neglected tail of every integral is then far below _QUAD_TOL
_TAIL_EPS = 1e-16
# required absolute accuracy of each integral
_QUAD_TOL = 1e-9
# achievement probabilities below this are treated as exactly zero
_P_FLOOR = 1e-12


def survival(d: ServiceDistribution, t: float) -> float:
    """P(d > t) for t >= 0."""
    if isinstance(d, Exponential):
        return math.exp(-d.rate * t)
    if isinstance(d, Deterministic):
        return 1.0 if t < d.value else 0.0
    if isinstance(d, Uniform):
        if t < d.lo:
            return 1.0
        if t >= d.hi:
            return 0.0
        return (d.hi - t) / (d.hi - d.lo)
    if isinstance(d, Weibull):
        return math.exp(-((t / d.scale) ** d.shape))
    if isinstance(d, Infinite):
        return 1.0
    raise TypeError(f"unknown distribution {d!r}")


def density(d: ServiceDistribution, t: float) -> float:
    """Density at t for the atomless laws; only evaluated at t > 0."""
    if isinstance(d, Exponential):
        return d.rate * math.exp(-d.rate * t)
    if isinstance(d, Uniform):
        if d.lo <= t < d.hi:
            return 1.0 / (d.hi - d.lo)
        return 0.0
    if isinstance(d, Weibull):
        if t <= 0:
            return 0.0
        z = t / d.scale
        return (d.shape / d.scale) * z ** (d.shape - 1) * math.exp(-(z ** d.shape))
    raise TypeError(f"{type(d).__name__} has no density")


def mean(d: ServiceDistribution) -> float:
    if isinstance(d, Exponential):
        return 1.0 / d.rate
    if isinstance(d, Deterministic):
        return d.value
    if isinstance(d, Uniform):
        return 0.5 * (d.lo + d.hi)
    if isinstance(d, Weibull):
        return d.scale * math.gamma(1.0 + 1.0 / d.shape)
    if isinstance(d, Infinite):
        return math.inf
    raise TypeError(f"unknown distribution {d!r}")


def sample(d: ServiceDistribution, rng: np.random.Generator) -> float:
    """One draw via inverse transform; a single uniform stream drives every
    law, so runs are reproducible given the generator and seed."""
    if isinstance(d, Deterministic):
        return d.value
    if isinstance(d, Infinite):
        raise ValueError("an infinite component is never sampled")
    u = rng.random()
    if isinstance(d, Exponential):
        return -math.log1p(-u) / d.rate
    if isinstance(d, Uniform):
        return d.lo + u * (d.hi - d.lo)
    if isinstance(d, Weibull):
        return d.scale * (-math.log1p(-u)) ** (1.0 / d.shape)
    raise TypeError(f"unknown distribution {d!r}")


def _tail_time(d: ServiceDistribution, eps: float) -> float:
    """Smallest t with survival(d, t) <= eps (inf for Infinite)."""
    if isinstance(d, Exponential):
        return -math.log(eps) / d.rate
    if isinstance(d, Deterministic):
        return d.value
    if isinstance(d, Uniform):
        return d.hi
    if isinstance(d, Weibull):
        return d.scale * (-math.log(eps)) ** (1.0 / d.shape)
    if isinstance(d, Infinite):
        return math.inf
    raise TypeError(f"unknown distribution {d!r}")


def _kinks(d: ServiceDistribution) -> tuple[float, ...]:
    """Interior points where survival or density is not smooth."""
    if isinstance(d, Deterministic):
        return (d.value,)
    if isinstance(d, Uniform):
        return (d.lo, d.hi)
    return ()


def _integrate(fn, upper: float, cuts, context: str) -> float:
    """Adaptive quadrature on [0, upper], split at the given cut points."""
    edges = [0.0]
    edges.extend(sorted({float(c) for c in cuts if 0.0 < c < upper}))
    edges.append(upper)
    total = 0.0
    err = 0.0
    for a, b in zip(edges, edges[1:]):
        out = quad(fn, a, b, epsabs=1e-13, epsrel=1e-11, limit=200, full_output=1)
        total += out[0]
        err += out[1]
    if not (err <= _QUAD_TOL):
        raise QuadratureError(
            f"integral for {context} reached accuracy {err:.3e} "
            f"(required {_QUAD_TOL:.0e})")
    return total


def _finite_others(components, k: int) -> list[ServiceDistribution]:
    return [c for j, c in enumerate(components) if j != k
            and not isinstance(c, Infinite)]


def min_probability(components, k: int, context: str = "min probability") -> float:
    """P(component k achieves the minimum of the given components)."""
    comps = list(components)
    d = comps[k]
    if isinstance(d, Infinite):
        return 0.0
    others = _finite_others(comps, k)
    if isinstance(d, Deterministic):
        p = 1.0
        for c in others:
            p *= survival(c, d.value)
        return p
    if not others:
        return 1.0
    upper = min(_tail_time(c, _TAIL_EPS) for c in [d, *others])
    cuts = [t for c in [d, *others] for t in _kinks(c)]

    def integrand(t, _d=d, _others=others):
        v = density(_d, t)
        for c in _others:
            v *= survival(c, t)
        return v

    return _integrate(integrand, upper, cuts, context)


def conditional_mean_given_min(components, k: int,
                               context: str = "conditional mean") -> float:
    """E[S_k | S_k achieved the minimum]; requires min_probability > 0."""
    comps = list(components)
    d = comps[k]
    p = min_probability(comps, k, context)
    if not p > 0:
        raise ValueError(
            f"conditional mean undefined for {context}: "
            "component never achieves the minimum")
    if isinstance(d, Deterministic):
        return d.value
    others = _finite_others(comps, k)
    if not others:
        return mean(d)
    upper = min(_tail_time(c, _TAIL_EPS) for c in [d, *others])
    cuts = [t for c in [d, *others] for t in _kinks(c)]

    def integrand(t, _d=d, _others=others):
        v = t * density(_d, t)
        for c in _others:
            v *= survival(c, t)
        return v

    return _integrate(integrand, upper, cuts, context) / p


def expected_min(components, context: str = "expected minimum") -> float:
    """E[min of the components] = integral of the survival product."""
    finite = [c for c in components if not isinstance(c, Infinite)]
    if not finite:
        raise ValueError("expected_min requires at least one finite component")
    if len(finite) == 1:
        return mean(finite[0])
    upper = min(_tail_time(c, _TAIL_EPS) for c in finite)
    cuts = [t for c in finite for t in _kinks(c)]

    def integrand(t, _finite=finite):
        v = 1.0
        for c in _finite:
            v *= survival(c, t)
        return v

    return _integrate(integrand, upper, cuts, context)


@dataclass
class MinStats:
    """Competing-minimum statistics for every (node, component).

    p[n, k]        — probability that component k achieves node n's minimum
    cond_mean[n, k] — E[S_{n,k} | it achieved the minimum]; +inf where p = 0
    mean_min[n]    — E[node n's total service time]
    """

    p: np.ndarray
    cond_mean: np.ndarray
    mean_min: np.ndarray

    @property
    def rates(self) -> np.ndarray:
        """Conditional service rates (reciprocal conditional means)."""
        return 1.0 / self.cond_mean


def compute_min_stats(spec: NetworkSpec) -> MinStats:
    """Assemble MinStats for a structurally valid spec.

    Verifies, per node, that the achievement probabilities sum to 1 within
    1e-9 and that total expectation holds within 1e-8; a failed check is a
    numerical failure, reported with its (node, component) location.
    """
    report = structural_violations(spec)
    if report:
        raise InvalidNetworkError(report)
    n_nodes, n_comp = spec.n_nodes, spec.n_components
    p = np.zeros((n_nodes, n_comp))
    cond_mean = np.full((n_nodes, n_comp), np.inf)
    mean_min = np.zeros(n_nodes)
    for n, node in enumerate(spec.nodes):
        comps = node.components
        for k in range(n_comp):
            ctx = f"node {n + 1} component {k + 1}"
            val = min_probability(comps, k, ctx)
            if val < _P_FLOOR:
                val = 0.0
            p[n, k] = val
            if val > 0:
                cond_mean[n, k] = conditional_mean_given_min(comps, k, ctx)
        mean_min[n] = expected_min(comps, f"node {n + 1}")
        if abs(p[n].sum() - 1.0) > 1e-9:
            raise QuadratureError(
                f"achievement probabilities at node {n + 1} sum to "
                f"{p[n].sum():.12f}, expected 1")
        mask = p[n] > 0
        recombined = float(np.dot(p[n][mask], cond_mean[n][mask]))
        if abs(recombined - mean_min[n]) > 1e-8:
            raise QuadratureError(
                f"total expectation mismatch at node {n + 1}: "
                f"sum p*cond_mean = {recombined:.12f}, "
                f"expected minimum = {mean_min[n]:.12f}")
    return MinStats(p=p, cond_mean=cond_mean, mean_min=mean_min)
