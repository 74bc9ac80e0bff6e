"""Finite classical probability measures.

A :class:`DiscreteDistribution` is a probability measure with finite support,
given by explicit sample points and weights. Points are either real numbers
or phase-space pairs ``(x, xi)``. Mixtures merge points by exact equality, so
callers are responsible for canonicalising points before mixing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping

from purestates.errors import DomainError, ValidationError

WEIGHT_TOL = 1e-12

Point = Hashable


def _canonical_point(p: Any) -> Point:
    if isinstance(p, (list, tuple)):
        return tuple(float(c) for c in p)
    return float(p)


@dataclass(frozen=True)
class DiscreteDistribution:
    """Finite probability measure ``sum_k w_k delta_{p_k}``.

    Weights below ``WEIGHT_TOL`` are pruned on construction; the remaining
    weights must be non-negative and sum to one within ``WEIGHT_TOL``.
    """

    points: tuple
    weights: tuple

    def __post_init__(self) -> None:
        pts = tuple(_canonical_point(p) for p in self.points)
        ws = tuple(float(w) for w in self.weights)
        if len(pts) != len(ws):
            raise ValidationError(
                f"points and weights differ in length ({len(pts)} != {len(ws)})"
            )
        if not pts:
            raise ValidationError("distribution needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValidationError("points must be pairwise distinct")
        for w in ws:
            if not math.isfinite(w):
                raise ValidationError("weights must be finite")
            if w < -WEIGHT_TOL:
                raise ValidationError(f"negative weight {w!r}")
        total = math.fsum(ws)
        if abs(total - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1")
        kept = [(p, w) for p, w in zip(pts, ws) if w > WEIGHT_TOL]
        object.__setattr__(self, "points", tuple(p for p, _ in kept))
        object.__setattr__(self, "weights", tuple(w for _, w in kept))

    @classmethod
    def dirac(cls, point: Any) -> "DiscreteDistribution":
        return cls((point,), (1.0,))

    @classmethod
    def from_mapping(cls, mapping: Mapping[Any, float]) -> "DiscreteDistribution":
        return cls(tuple(mapping.keys()), tuple(mapping.values()))

    def as_dict(self) -> dict:
        return dict(zip(self.points, self.weights))

    def weight(self, point: Any) -> float:
        return self.as_dict().get(_canonical_point(point), 0.0)

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> str:
        pts = [list(p) if isinstance(p, tuple) else p for p in self.points]
        return json.dumps({"points": pts, "weights": list(self.weights)})

    @classmethod
    def from_json(cls, text: str | Mapping) -> "DiscreteDistribution":
        doc = json.loads(text) if isinstance(text, str) else text
        extra = set(doc) - {"points", "weights"}
        if extra:
            raise ValidationError(f"unknown keys in distribution: {sorted(extra)}")
        return cls(tuple(doc["points"]), tuple(doc["weights"]))


def mix_measures(
    mu1: DiscreteDistribution, mu2: DiscreteDistribution, lam: float
) -> DiscreteDistribution:
    """Convex combination ``lam * mu1 + (1 - lam) * mu2`` on the union of supports."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"mixing parameter must lie in [0, 1], got {lam!r}")
    acc: dict = {}
    for p, w in zip(mu1.points, mu1.weights):
        acc[p] = acc.get(p, 0.0) + lam * w
    for p, w in zip(mu2.points, mu2.weights):
        acc[p] = acc.get(p, 0.0) + (1.0 - lam) * w
    return DiscreteDistribution(tuple(acc), tuple(acc.values()))


def _values(f: Callable, mu: DiscreteDistribution) -> list[float]:
    return [float(f(p)) for p in mu.points]


def mean(f: Callable, mu: DiscreteDistribution) -> float:
    return math.fsum(v * w for v, w in zip(_values(f, mu), mu.weights))


def variance(f: Callable, mu: DiscreteDistribution) -> float:
    """Spread of ``f`` under ``mu``; tiny negative roundoff is clamped to 0."""
    vals = _values(f, mu)
    m = math.fsum(v * w for v, w in zip(vals, mu.weights))
    var = math.fsum(w * (v - m) ** 2 for v, w in zip(vals, mu.weights))
    return max(var, 0.0)


@dataclass(frozen=True)
class VarianceDecomposition:
    total: float
    within: float
    between: float


def mixture_variance_decomposition(
    mu1: DiscreteDistribution,
    mu2: DiscreteDistribution,
    lam: float,
    f: Callable,
) -> VarianceDecomposition:
    """Split the variance of a two-component mixture.

    ``within`` is the weighted average of component variances, ``between``
    is ``lam (1 - lam) (<f>_1 - <f>_2)^2``; ``total`` is computed directly
    from the mixed distribution.
    """
    mixed = mix_measures(mu1, mu2, lam)
    within = lam * variance(f, mu1) + (1.0 - lam) * variance(f, mu2)
    between = lam * (1.0 - lam) * (mean(f, mu1) - mean(f, mu2)) ** 2
    return VarianceDecomposition(variance(f, mixed), within, between)


def is_extremal(mu: DiscreteDistribution) -> bool:
    """True iff ``mu`` is a Dirac measure (the classical pure states)."""
    return sum(1 for w in mu.weights if w > WEIGHT_TOL) == 1


def distinct(mu1: DiscreteDistribution, mu2: DiscreteDistribution) -> bool:
    """Two distributions are distinct when some weight differs by more than WEIGHT_TOL."""
    d1, d2 = mu1.as_dict(), mu2.as_dict()
    return any(abs(d1.get(p, 0.0) - d2.get(p, 0.0)) > WEIGHT_TOL for p in set(d1) | set(d2))


def sample_distribution(samples: Iterable[Any]) -> DiscreteDistribution:
    """Empirical measure of a finite sample.

    Used to approximate continuous measures (e.g. a Gaussian) by sampling;
    the result is an approximation, not the continuous measure itself.
    """
    counts: dict = {}
    n = 0
    for s in samples:
        p = _canonical_point(s)
        counts[p] = counts.get(p, 0) + 1
        n += 1
    if n == 0:
        raise ValidationError("empty sample")
    return DiscreteDistribution(tuple(counts), tuple(c / n for c in counts.values()))
