"""Calibrations of the SS test: asymptotic, bootstrap, permutation, exact."""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

from . import rng
from .covariance import null_spectrum, sample_null_norms, sigma_hat
from .errors import DataError
from .sample import GroupedSample
from .signs import SignCache, ss_from_labels, ss_from_ranks

DEFAULT_DRAWS = 1000
EXACT_LIMIT = 100_000
CHUNK = 256
# Resampled statistics within this relative distance of the observed value
# count as ties (>=); identical partitions can differ by round-off only.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class TestReport:
    test: str
    statistic: float
    p_value: float
    method: str
    replicates: int
    seed: int | None
    extras: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def p_value(null_stats: np.ndarray, observed: float, add_one: bool = False) -> float:
    """Proportion of null statistics >= observed (optionally (count+1)/(R+1))."""
    null_stats = np.asarray(null_stats)
    count = int(np.count_nonzero(null_stats >= observed - TIE_RTOL * abs(observed)))
    if add_one:
        return (count + 1) / (null_stats.size + 1)
    return count / null_stats.size


def recommend_method(sizes: Sequence[int]) -> str:
    """Permutation for small samples (min group <= 5 and n <= 20), else asymptotic."""
    return "permutation" if min(sizes) <= 5 and sum(sizes) <= 20 else "asymptotic"


def _extras(sample: GroupedSample, **kw) -> dict[str, Any]:
    return {"sizes": list(sample.sizes), "advice": recommend_method(sample.sizes), **kw}


def asymptotic_test(sample: GroupedSample, n_draws: int = DEFAULT_DRAWS, seed: int = 0,
                    add_one: bool = False, cache: SignCache | None = None) -> TestReport:
    """p = #{||W_i||^2 >= SS_n} / N with W_i Gaussian under the estimated covariance."""
    cache = cache if cache is not None else SignCache.from_sample(sample)
    observed = ss_from_ranks(cache.ranks, sample.sizes)
    spectrum = null_spectrum(sigma_hat(sample, cache))
    draws = sample_null_norms(spectrum, n_draws, seed)
    return TestReport("SS", observed, p_value(draws, observed, add_one), "asymptotic",
                      int(n_draws), seed,
                      _extras(sample, clipped_eigenvalues=spectrum.clipped,
                              null_trace=float(spectrum.eigenvalues.sum())))


def bootstrap_test(sample: GroupedSample, m_b: int = DEFAULT_DRAWS, seed: int = 0,
                   add_one: bool = False, cache: SignCache | None = None) -> TestReport:
    """Resample n pooled observations with replacement into the original group sizes."""
    if sample.n < 2:
        raise DataError("bootstrap needs n >= 2")
    cache = cache if cache is not None else SignCache.from_sample(sample)
    observed = ss_from_ranks(cache.ranks, sample.sizes)
    stats = np.empty(int(m_b))
    for c, start in enumerate(range(0, int(m_b), CHUNK)):
        stop = min(start + CHUNK, int(m_b))
        idx = rng.stream(seed, "bootstrap", c).integers(0, sample.n, size=(stop - start, sample.n))
        for b, row in enumerate(idx):
            stats[start + b] = ss_from_ranks(cache.bootstrap_ranks(row), sample.sizes)
    return TestReport("SS", observed, p_value(stats, observed, add_one), "bootstrap",
                      int(m_b), seed, _extras(sample))


def random_relabelings(group_index: np.ndarray, count: int, seed: int, purpose: str = "permutation"
                       ) -> Iterator[np.ndarray]:
    """Chunks of uniformly permuted group-label vectors."""
    for c, start in enumerate(range(0, int(count), CHUNK)):
        stop = min(start + CHUNK, int(count))
        base = np.tile(group_index, (stop - start, 1))
        yield rng.stream(seed, purpose, c).permuted(base, axis=1)


def permutation_test(sample: GroupedSample, m_p: int = DEFAULT_DRAWS, seed: int = 0,
                     add_one: bool = False, cache: SignCache | None = None) -> TestReport:
    """Reassign the pooled sample to groups by uniformly random permutations.

    Pooled ranks do not depend on the labels, so each permuted statistic is
    a block sum of the rank Gram matrix.
    """
    if sample.n < 2:
        raise DataError("permutation needs n >= 2")
    cache = cache if cache is not None else SignCache.from_sample(sample)
    gram = cache.rank_gram
    observed = float(ss_from_labels(gram, sample.group_index, sample.sizes)[0])
    stats = np.concatenate([ss_from_labels(gram, labels, sample.sizes)
                            for labels in random_relabelings(sample.group_index, m_p, seed)])
    return TestReport("SS", observed, p_value(stats, observed, add_one), "permutation",
                      int(m_p), seed, _extras(sample))


def n_assignments(sizes: Sequence[int]) -> int:
    out, left = 1, sum(sizes)
    for s in sizes:
        out *= math.comb(left, s)
        left -= s
    return out


def all_assignments(sizes: Sequence[int]) -> Iterator[np.ndarray]:
    """Every distinct labeling of n items into groups of the given sizes."""
    n = sum(sizes)

    def rec(free: tuple[int, ...], k: int, labels: np.ndarray):
        if k == len(sizes) - 1:
            labels[list(free)] = k
            yield labels.copy()
            return
        for chosen in itertools.combinations(free, sizes[k]):
            labels[list(chosen)] = k
            rest = tuple(i for i in free if i not in set(chosen))
            yield from rec(rest, k + 1, labels)

    yield from rec(tuple(range(n)), 0, np.zeros(n, dtype=np.int64))


def exact_permutation_test(sample: GroupedSample, limit: int = EXACT_LIMIT,
                           cache: SignCache | None = None) -> TestReport:
    total = n_assignments(sample.sizes)
    if total > limit:
        raise DataError(f"{total} group assignments exceed the enumeration limit {limit}; "
                        "use the Monte-Carlo permutation test")
    cache = cache if cache is not None else SignCache.from_sample(sample)
    gram = cache.rank_gram
    observed = float(ss_from_labels(gram, sample.group_index, sample.sizes)[0])
    stats, batch = [], []
    for labels in all_assignments(sample.sizes):
        batch.append(labels)
        if len(batch) == 4096:
            stats.append(ss_from_labels(gram, np.array(batch), sample.sizes))
            batch = []
    if batch:
        stats.append(ss_from_labels(gram, np.array(batch), sample.sizes))
    stats = np.concatenate(stats)
    return TestReport("SS", observed, p_value(stats, observed), "exact", int(total), None,
                      _extras(sample))
