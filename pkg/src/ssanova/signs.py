"""Spatial signs, pooled spatial ranks and the SS statistic."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DataError, NumericalError
from .grid import GridDomain, GridFunction, HTuple, from_coefficients, to_coefficients
from .sample import GroupedSample

# Norms at or below this are treated as the zero element, whose sign is zero.
ZERO_TOL = 1e-12


def row_norms(x: np.ndarray) -> np.ndarray:
    """Euclidean norms along the last axis (kept), rescaling rows whose squares overflow."""
    with np.errstate(over="ignore"):
        norms = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.all(np.isfinite(norms)):
        return norms
    if not np.all(np.isfinite(x)):
        raise NumericalError("non-finite differences between observations; rescale the data")
    scale = np.max(np.abs(x), axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * np.linalg.norm(x / safe, axis=-1, keepdims=True)


def sign_coefficients(c: np.ndarray) -> np.ndarray:
    """Row-wise spatial signs of coefficient vectors (last axis is the grid)."""
    c = np.asarray(c, dtype=np.float64)
    norms = row_norms(c)
    out = np.zeros_like(c)
    np.divide(c, norms, out=out, where=norms > ZERO_TOL)
    return out


def spatial_sign(x: GridFunction) -> GridFunction:
    return from_coefficients(sign_coefficients(to_coefficients(x)), x.domain)


def spatial_rank(x: GridFunction, pooled: Sequence[GridFunction]) -> GridFunction:
    """Average spatial sign of ``x - X_j`` over the pooled sample."""
    if len(pooled) == 0:
        raise DataError("pooled sample is empty")
    for p in pooled:
        if p.domain != x.domain:
            raise DataError("pooled functions must share the domain of x")
    cx = to_coefficients(x)
    cp = np.stack([to_coefficients(p) for p in pooled])
    return from_coefficients(sign_coefficients(cx - cp).mean(axis=0), x.domain)


class SignCache:
    """All pairwise signs ``s(X_i - X_j)`` of a pooled sample, in coefficients.

    ``signs[i, j]`` is the sign of ``X_i - X_j``; ``inv_dist[i, j]`` is
    ``1 / ||X_i - X_j||`` (zero where the difference is the zero element).
    Memory is ``n * n * m`` floats.
    """

    def __init__(self, coefficients: np.ndarray):
        c = np.asarray(coefficients, dtype=np.float64)
        # Centering leaves differences unchanged and keeps later Gram products small.
        self.coefficients = c - c.mean(axis=0)
        with np.errstate(over="ignore"):
            diffs = c[:, None, :] - c[None, :, :]
        dist = row_norms(diffs)[..., 0]
        nonzero = dist > ZERO_TOL
        self.inv_dist = np.zeros_like(dist)
        np.divide(1.0, dist, out=self.inv_dist, where=nonzero)
        self.signs = diffs * self.inv_dist[:, :, None]

    @classmethod
    def from_sample(cls, sample: GroupedSample) -> "SignCache":
        return cls(sample.coefficients())

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    @cached_property
    def ranks(self) -> np.ndarray:
        """Spatial rank of every pooled observation, shape (n, m)."""
        return self.signs.sum(axis=1) / self.n

    @cached_property
    def rank_gram(self) -> np.ndarray:
        r = self.ranks
        return r @ r.T

    def bootstrap_ranks(self, idx: np.ndarray) -> np.ndarray:
        """Ranks within the resample ``X[idx]``; repeated indices get zero sign."""
        w = self.inv_dist[np.ix_(idx, idx)]
        c = self.coefficients[idx]
        return (w.sum(axis=1)[:, None] * c - w @ c) / len(idx)


def ss_from_ranks(ranks: np.ndarray, sizes: Sequence[int]) -> float:
    """``sum_k n_k ||mean of group-k ranks||^2`` for rows grouped consecutively."""
    total, start = 0.0, 0
    for nk in sizes:
        s = ranks[start:start + nk].sum(axis=0)
        total += float(s @ s) / nk
        start += nk
    return total


def ss_from_labels(rank_gram: np.ndarray, labels: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    """SS for many relabelings at once.

    ``labels`` has shape (B, n) with group numbers; returns B statistics using
    ``SS = sum_k 1_k' M 1_k / n_k`` with ``M`` the Gram matrix of the ranks.
    """
    labels = np.atleast_2d(labels)
    k = len(sizes)
    onehot = (labels[:, :, None] == np.arange(k)).astype(np.float64)
    quad = np.einsum("bik,ij,bjk->bk", onehot, rank_gram, onehot)
    return quad @ (1.0 / np.asarray(sizes, dtype=np.float64))


@dataclass(frozen=True)
class SsStatistic:
    value: float
    rank_means: tuple[GridFunction, ...]
    u_n: HTuple


def ss_statistic(sample: GroupedSample, cache: SignCache | None = None) -> SsStatistic:
    cache = cache if cache is not None else SignCache.from_sample(sample)
    domain: GridDomain = sample.domain
    means = [cache.ranks[sl].mean(axis=0) for sl in sample.slices]
    value = float(sum(nk * float(r @ r) for nk, r in zip(sample.sizes, means)))
    rank_means = tuple(from_coefficients(r, domain) for r in means)
    u_n = HTuple(tuple(from_coefficients(np.sqrt(nk) * r, domain) for nk, r in zip(sample.sizes, means)))
    return SsStatistic(value, rank_means, u_n)
