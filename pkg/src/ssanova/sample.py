from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError
from .grid import GridDomain, GridFunction


@dataclass(frozen=True, eq=False)
class GroupedSample:
    """K groups of discretized functions on one domain.

    ``values`` stacks all observations row-wise, group by group; ``sizes``
    gives the group sizes in that order.
    """

    domain: GridDomain
    values: np.ndarray
    sizes: tuple[int, ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        sizes = tuple(int(s) for s in self.sizes)
        if values.ndim != 2 or values.shape[1] != self.domain.m:
            raise DataError(f"values must be (n, {self.domain.m}), got {values.shape}")
        if len(sizes) < 2:
            raise DataError("K >= 2 required")
        if min(sizes) < 1:
            raise DataError(f"every group needs at least one observation, got sizes {sizes}")
        if sum(sizes) != values.shape[0]:
            raise DataError(f"sizes {sizes} do not add up to {values.shape[0]} rows")
        if not np.all(np.isfinite(values)):
            raise DataError("sample values must be finite")
        labels = tuple(self.labels) or tuple(str(k + 1) for k in range(len(sizes)))
        if len(labels) != len(sizes):
            raise DataError("one label per group required")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence], domain: GridDomain | None = None,
                    labels: Sequence[str] = ()) -> "GroupedSample":
        """Build from a sequence of groups, each a sequence of GridFunctions or value rows."""
        rows, sizes = [], []
        for g in groups:
            g = list(g)
            for x in g:
                if isinstance(x, GridFunction):
                    if domain is None:
                        domain = x.domain
                    elif x.domain != domain:
                        raise DataError("all functions must share one domain")
                    rows.append(x.values)
                else:
                    rows.append(np.asarray(x, dtype=np.float64))
            sizes.append(len(g))
        if domain is None:
            raise DataError("domain required when groups hold raw values")
        values = np.vstack(rows) if rows else np.empty((0, domain.m))
        return cls(domain, values, tuple(sizes), tuple(labels))

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def group_index(self) -> np.ndarray:
        """Group number of every row."""
        return np.repeat(np.arange(self.k), self.sizes)

    @property
    def slices(self) -> list[slice]:
        ends = np.cumsum(self.sizes)
        return [slice(int(e - s), int(e)) for s, e in zip(self.sizes, ends)]

    @property
    def groups(self) -> list[list[GridFunction]]:
        return [[GridFunction(self.domain, row) for row in self.values[sl]] for sl in self.slices]

    def coefficients(self) -> np.ndarray:
        return np.sqrt(self.domain.weight) * self.values

    def with_values(self, values: np.ndarray) -> "GroupedSample":
        return GroupedSample(self.domain, values, self.sizes, self.labels)

    def regroup(self, order: np.ndarray, sizes: Sequence[int] | None = None) -> "GroupedSample":
        """Rows taken in ``order`` and cut into ``sizes`` (default: current sizes)."""
        return GroupedSample(self.domain, self.values[np.asarray(order)],
                             tuple(sizes) if sizes is not None else self.sizes)
