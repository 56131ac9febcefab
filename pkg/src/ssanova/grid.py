"""Discretized L2[a, b] on a midpoint grid.

All quadrature weights equal ``w = (b - a) / m``, so scaling values by
``sqrt(w)`` is an isometry onto Euclidean R^m. Downstream code works in those
coefficients, where operators are ordinary symmetric matrices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError


@dataclass(frozen=True)
class GridDomain:
    a: float = 0.0
    b: float = 1.0
    m: int = 100

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or not self.a < self.b:
            raise DataError(f"domain needs a < b, got [{self.a}, {self.b}]")
        if int(self.m) != self.m or self.m < 2:
            raise DataError(f"grid size must be an integer >= 2, got {self.m}")

    @property
    def weight(self) -> float:
        return (self.b - self.a) / self.m

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def points(self) -> np.ndarray:
        return self.a + (np.arange(self.m) + 0.5) * self.weight

    def nearest_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.points - t)))


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: GridDomain
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != (self.domain.m,):
            raise DataError(f"expected {self.domain.m} values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, domain: GridDomain, f) -> "GridFunction":
        return cls(domain, np.broadcast_to(f(domain.points), (domain.m,)))

    @classmethod
    def constant(cls, domain: GridDomain, c: float) -> "GridFunction":
        return cls(domain, np.full(domain.m, float(c)))

    @classmethod
    def zero(cls, domain: GridDomain) -> "GridFunction":
        return cls(domain, np.zeros(domain.m))

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _check_same_domain(self, other)
        return GridFunction(self.domain, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _check_same_domain(self, other)
        return GridFunction(self.domain, self.values - other.values)

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.domain, -self.values)

    def __mul__(self, c: float) -> "GridFunction":
        return GridFunction(self.domain, float(c) * self.values)

    __rmul__ = __mul__


@dataclass(frozen=True)
class HTuple:
    """An element of the product space H^K."""

    parts: tuple[GridFunction, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise DataError("HTuple needs at least one part")
        for p in parts[1:]:
            _check_same_domain(parts[0], p)
        object.__setattr__(self, "parts", parts)

    def coefficients(self) -> np.ndarray:
        return np.concatenate([to_coefficients(p) for p in self.parts])

    def squared_norm(self) -> float:
        return float(sum(inner_product(p, p) for p in self.parts))


def _check_same_domain(x: GridFunction, y: GridFunction) -> None:
    if x.domain != y.domain:
        raise DataError(f"domain mismatch: {x.domain} vs {y.domain}")


def inner_product(x: GridFunction, y: GridFunction) -> float:
    _check_same_domain(x, y)
    return float(x.domain.weight * np.dot(x.values, y.values))


def l2_norm(x: GridFunction) -> float:
    return float(np.sqrt(inner_product(x, x)))


def to_coefficients(x: GridFunction | np.ndarray, domain: GridDomain | None = None) -> np.ndarray:
    """Map grid values to isometric Euclidean coefficients ``sqrt(w) * values``.

    Accepts a GridFunction, or a raw array of values (any leading shape) with
    its ``domain``.
    """
    if isinstance(x, GridFunction):
        return np.sqrt(x.domain.weight) * x.values
    if domain is None:
        raise TypeError("raw arrays need an explicit domain")
    return np.sqrt(domain.weight) * np.asarray(x, dtype=np.float64)


def from_coefficients(c: Sequence[float], domain: GridDomain) -> GridFunction:
    return GridFunction(domain, np.asarray(c, dtype=np.float64) / np.sqrt(domain.weight))
