"""Path simulators for the noise distributions and the mean-shift design."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import rng
from .errors import DataError, NumericalError
from .grid import GridDomain, GridFunction
from .sample import GroupedSample

KINDS = ("sbm", "t", "gbm", "sbm2", "t2", "contaminated")
JITTER = 1e-12


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    df: int | None = None
    base: "ProcessSpec | None" = None
    p: float = 0.0
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"unknown process kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("t", "t2"):
            if self.df is None or int(self.df) != self.df or self.df < 1:
                raise DataError(f"t processes need an integer df >= 1, got {self.df}")
        if self.kind == "contaminated":
            if self.base is None or self.base.kind == "contaminated":
                raise DataError("contamination needs a non-contaminated base process")
            if not 0.0 <= self.p <= 1.0:
                raise DataError(f"mixing probability must lie in [0, 1], got {self.p}")
            if not self.s > 0:
                raise DataError(f"contamination scale must be positive, got {self.s}")

    @classmethod
    def sbm(cls):
        return cls("sbm")

    @classmethod
    def t(cls, df: int):
        return cls("t", df=df)

    @classmethod
    def gbm(cls):
        return cls("gbm")

    @classmethod
    def squared_sbm(cls):
        return cls("sbm2")

    @classmethod
    def squared_t(cls, df: int):
        return cls("t2", df=df)

    @classmethod
    def contaminated(cls, base: "ProcessSpec", p: float = 0.25, s: float = 5.0):
        return cls("contaminated", base=base, p=p, s=s)

    @property
    def label(self) -> str:
        if self.kind == "t":
            return f"t{self.df}"
        if self.kind == "t2":
            return f"t{self.df}^2"
        if self.kind == "sbm2":
            return "sbm^2"
        if self.kind == "contaminated":
            return f"contaminated({self.base.label},{self.p:g},{self.s:g})"
        return self.kind

    @classmethod
    def parse(cls, text: str) -> "ProcessSpec":
        """Parse labels like ``sbm``, ``t3``, ``gbm``, ``sbm^2``, ``t3^2``,
        ``contaminated(t1,0.25,5)``."""
        t = text.strip().lower().replace(" ", "")
        m = re.fullmatch(r"contaminated\((.+?)(?:,([0-9.eE+-]+))?(?:,([0-9.eE+-]+))?\)", t)
        if m:
            base = cls.parse(m.group(1))
            p = float(m.group(2)) if m.group(2) else 0.25
            s = float(m.group(3)) if m.group(3) else 5.0
            return cls.contaminated(base, p, s)
        if t in ("sbm", "bm"):
            return cls.sbm()
        if t == "gbm":
            return cls.gbm()
        if t in ("sbm^2", "sbm2"):
            return cls.squared_sbm()
        m = re.fullmatch(r"t\(?(\d+)\)?(\^2)?", t)
        if m:
            df = int(m.group(1))
            return cls.squared_t(df) if m.group(2) else cls.t(df)
        raise DataError(f"cannot parse process spec {text!r}")


@dataclass(frozen=True)
class ShiftSpec:
    c1: float
    c2: float
    domain: GridDomain


def eta1(t):
    return np.asarray(t, dtype=np.float64)


def eta2(t):
    t = np.asarray(t, dtype=np.float64)
    return (t - 0.25) * (0.75 - t)


def shift_functions(shift: ShiftSpec) -> tuple[GridFunction, GridFunction, GridFunction]:
    d = shift.domain
    return (GridFunction.zero(d),
            GridFunction(d, shift.c1 * eta1(d.points)),
            GridFunction(d, shift.c2 * eta2(d.points)))


@lru_cache(maxsize=32)
def _bm_factor(a: float, b: float, m: int) -> np.ndarray:
    t = GridDomain(a, b, m).points
    cov = np.minimum.outer(t, t) + JITTER * np.eye(m)
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Brownian kernel on [{a}, {b}] with m={m} is not positive definite "
                             "after jitter (is a <= 0?)") from exc


def _gaussian(domain: GridDomain, indices: np.ndarray, seed: int) -> np.ndarray:
    factor = _bm_factor(domain.a, domain.b, domain.m)
    z = np.stack([rng.stream(seed, "gaussian", int(i)).standard_normal(domain.m) for i in indices])
    return z @ factor.T


def _chi2_divisor(df: int, indices: np.ndarray, seed: int) -> np.ndarray:
    chi = np.array([rng.stream(seed, "chi2", int(i)).chisquare(df) for i in indices])
    return np.sqrt(chi / df)


def simulate_values(spec: ProcessSpec, domain: GridDomain, count: int, seed: int,
                    start: int = 0) -> np.ndarray:
    """Paths ``start .. start+count-1`` as a (count, m) array.

    Path i only reads the streams keyed by (seed, purpose, i), so any subset
    of paths can be regenerated independently.
    """
    idx = np.arange(start, start + int(count))
    if count == 0:
        return np.empty((0, domain.m))
    kind = spec.kind
    if kind == "contaminated":
        base = simulate_values(spec.base, domain, count, seed, start)
        u = np.array([rng.stream(seed, "contamination", int(i)).random() for i in idx])
        return np.where((u < spec.p)[:, None], spec.s * base, base)
    paths = _gaussian(domain, idx, seed)
    if kind in ("t", "t2"):
        paths = paths / _chi2_divisor(spec.df, idx, seed)[:, None]
    if kind == "gbm":
        paths = np.exp(paths)
    elif kind in ("sbm2", "t2"):
        paths = paths * paths
    return paths


def simulate_paths(spec: ProcessSpec, domain: GridDomain, count: int, seed: int) -> list[GridFunction]:
    return [GridFunction(domain, row) for row in simulate_values(spec, domain, count, seed)]


def generate_grouped(spec: ProcessSpec, shift: ShiftSpec | Sequence, sizes: Sequence[int], seed: int,
                     domain: GridDomain | None = None) -> GroupedSample:
    """X_ki = mu_k + eps_ki with eps drawn from ``spec``.

    The noise depends only on (spec, domain, sizes, seed), never on the
    shifts, so different shifts with one seed share the same noise.
    """
    sizes = tuple(int(s) for s in sizes)
    if isinstance(shift, ShiftSpec):
        if len(sizes) != 3:
            raise DataError("the (c1, c2) shift design has exactly 3 groups")
        domain = shift.domain
        means = [f.values for f in shift_functions(shift)]
    else:
        if len(shift) != len(sizes):
            raise DataError("one mean function per group required")
        if domain is None:
            domain = next((f.domain for f in shift if isinstance(f, GridFunction)), None)
        if domain is None:
            raise DataError("domain required with raw mean arrays")
        means = [f.values if isinstance(f, GridFunction) else np.broadcast_to(
            np.asarray(f, dtype=np.float64), (domain.m,)) for f in shift]
    eps = simulate_values(spec, domain, sum(sizes), seed)
    offsets = np.repeat(np.stack(means), sizes, axis=0)
    return GroupedSample(domain, eps + offsets, sizes)
