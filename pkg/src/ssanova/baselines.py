"""Mean-based functional ANOVA tests used as comparison baselines.

CFF, ZC, F-type, GPF (integrated pointwise F), F-max (sup of pointwise F)
and HR (principal-component scores). Every resampling calibration uses
per-chunk random streams derived from ``seed``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import rng
from .errors import DataError, NumericalError
from .grid import GridFunction
from .inference import CHUNK, TestReport, p_value, random_relabelings
from .sample import GroupedSample

DEFAULT_BOOT = 1000
VARIANCE_FRACTION = 0.9


@dataclass(frozen=True)
class PointwiseF:
    values: GridFunction


@dataclass(frozen=True)
class PcaScores:
    d: int
    scores: np.ndarray  # (n, d)
    group_covariances: np.ndarray  # (K, d, d)
    explained_fraction: float
    eigenvalues: np.ndarray


def _require_finite_moments(sample: GroupedSample) -> None:
    # Mean-based statistics square the data; refuse inputs whose squares overflow.
    with np.errstate(over="ignore", invalid="ignore"):
        total = float(np.sum(sample.values * sample.values))
    if not np.isfinite(total):
        raise NumericalError("sum of squared values overflows; rescale the data")


def _onehot(labels: np.ndarray, k: int) -> np.ndarray:
    return (np.atleast_2d(labels)[:, :, None] == np.arange(k)).astype(np.float64)


def _group_means(x: np.ndarray, onehot: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    # onehot (B, n, K), x (n, m) or (B, n, m) -> (B, K, m)
    return np.einsum("bnk,...nm->bkm", onehot, x) / sizes[None, :, None]


def _between(x, onehot, sizes):
    """sum_k n_k (xbar_k - xbar)^2 per grid point, shape (B, m)."""
    means = _group_means(x, onehot, sizes)
    grand = (sizes[None, :, None] * means).sum(axis=1, keepdims=True) / sizes.sum()
    return (sizes[None, :, None] * (means - grand) ** 2).sum(axis=1), means


def _within(x, onehot, means):
    """sum_k sum_i (x_ki - xbar_k)^2 per grid point, shape (B, m)."""
    fitted = np.einsum("bnk,bkm->bnm", onehot, means)
    return ((x - fitted) ** 2).sum(axis=1)


def _pointwise_f_batch(values: np.ndarray, onehot: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    n, k = int(sizes.sum()), len(sizes)
    ssb, means = _between(values, onehot, sizes)
    ssw = _within(values, onehot, means)
    bad = ssw <= 1e-12 * (ssb + ssw) if np.any(ssb + ssw > 0) else np.ones_like(ssw, dtype=bool)
    bad |= ssw <= 0
    if np.any(bad):
        where = np.argwhere(bad)[0]
        raise DataError(f"zero residual variance at grid point {int(where[-1])}")
    return (ssb / (k - 1)) / (ssw / (n - k))


def pointwise_f(sample: GroupedSample) -> PointwiseF:
    """Classical one-way ANOVA F statistic at every grid point."""
    _require_finite_moments(sample)
    if sample.n <= sample.k:
        raise DataError("pointwise F needs n > K")
    sizes = np.asarray(sample.sizes, dtype=np.float64)
    f = _pointwise_f_batch(sample.values, _onehot(sample.group_index, sample.k), sizes)[0]
    return PointwiseF(GridFunction(sample.domain, f))


def cff_statistic(sample: GroupedSample) -> float:
    _require_finite_moments(sample)
    means = [sample.coefficients()[sl].mean(axis=0) for sl in sample.slices]
    total = 0.0
    for k in range(sample.k):
        for l in range(k + 1, sample.k):
            diff = means[k] - means[l]
            total += sample.sizes[k] * float(diff @ diff)
    return total


def zc_statistic(sample: GroupedSample) -> float:
    _require_finite_moments(sample)
    c = sample.coefficients()
    grand = c.mean(axis=0)
    return float(sum(nk * np.sum((c[sl].mean(axis=0) - grand) ** 2)
                     for nk, sl in zip(sample.sizes, sample.slices)))


def _residuals(sample: GroupedSample) -> np.ndarray:
    c = sample.coefficients()
    return np.vstack([c[sl] - c[sl].mean(axis=0) for sl in sample.slices])


def f_type_statistic(sample: GroupedSample) -> float:
    _require_finite_moments(sample)
    n, k = sample.n, sample.k
    ssw = float(np.sum(_residuals(sample) ** 2))
    if ssw <= 0:
        raise DataError("F-type statistic undefined: zero within-group variation")
    return (zc_statistic(sample) / (k - 1)) / (ssw / (n - k))


def _pooled_traces(sample: GroupedSample) -> tuple[float, float]:
    """tr(G) and tr(G^2) for the pooled within-group covariance G (n - K divisor)."""
    e = _residuals(sample)
    dof = sample.n - sample.k
    if dof <= 0:
        raise DataError("pooled covariance needs n > K")
    gram = e @ e.T
    tr1 = float(np.trace(gram)) / dof
    tr2 = float(np.sum(gram * gram)) / dof ** 2
    if tr1 <= 0:
        raise DataError("pooled covariance is zero")
    return tr1, tr2


# --- batched statistics over relabelings or resampled residuals --------------

def _zc_batch(values_c: np.ndarray, onehot: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    ssb, _ = _between(values_c, onehot, sizes)
    return ssb.sum(axis=1)


def _f_type_batch(values_c, onehot, sizes):
    n, k = int(sizes.sum()), len(sizes)
    ssb, means = _between(values_c, onehot, sizes)
    ssw = _within(values_c, onehot, means).sum(axis=1)
    return (ssb.sum(axis=1) / (k - 1)) / (ssw / (n - k))


def _cff_batch(values_c, onehot, sizes):
    means = _group_means(values_c, onehot, sizes)
    k = len(sizes)
    total = np.zeros(means.shape[0])
    for a in range(k):
        for b in range(a + 1, k):
            total += sizes[a] * np.sum((means[:, a] - means[:, b]) ** 2, axis=1)
    return total


def _permutation_null(sample: GroupedSample, batch_stat: Callable, values: np.ndarray,
                      count: int, seed: int) -> np.ndarray:
    sizes = np.asarray(sample.sizes, dtype=np.float64)
    return np.concatenate([batch_stat(values, _onehot(labels, sample.k), sizes)
                           for labels in random_relabelings(sample.group_index, count, seed)])


def _residual_bootstrap_null(sample: GroupedSample, batch_stat: Callable, residuals: np.ndarray,
                             count: int, seed: int, purpose: str) -> np.ndarray:
    """Statistic on n residuals drawn with replacement from the pooled centered sample,
    cut into the original group sizes."""
    sizes = np.asarray(sample.sizes, dtype=np.float64)
    onehot = _onehot(sample.group_index, sample.k)
    out = []
    for c, start in enumerate(range(0, int(count), CHUNK)):
        stop = min(start + CHUNK, int(count))
        idx = rng.stream(seed, purpose, c).integers(0, sample.n, size=(stop - start, sample.n))
        out.append(np.concatenate([batch_stat(residuals[row], onehot, sizes) for row in idx]))
    return np.concatenate(out)


def _base_extras(sample: GroupedSample, **kw):
    return {"sizes": list(sample.sizes), **kw}


def cff_test(sample: GroupedSample, m_boot: int = DEFAULT_BOOT, seed: int = 0) -> TestReport:
    if min(sample.sizes) < 2:
        raise DataError("CFF bootstrap needs at least 2 observations per group")
    observed = cff_statistic(sample)
    null = _residual_bootstrap_null(sample, _cff_batch, _residuals(sample), m_boot, seed, "cff-boot")
    return TestReport("CFF", observed, p_value(null, observed), "bootstrap", int(m_boot), seed,
                      _base_extras(sample))


def zc_test(sample: GroupedSample, mode: str = "naive", seed: int = 0,
            replicates: int = DEFAULT_BOOT) -> TestReport:
    if sample.n <= sample.k:
        raise DataError("ZC test needs n > K")
    observed = zc_statistic(sample)
    if mode == "naive":
        tr1, tr2 = _pooled_traces(sample)
        beta = tr2 / tr1
        kappa = (sample.k - 1) * tr1 ** 2 / tr2
        p = float(stats.chi2.sf(observed / beta, kappa))
        return TestReport("ZC", observed, p, "naive", 1, seed,
                          _base_extras(sample, beta=beta, kappa=kappa))
    if mode == "permutation":
        null = _permutation_null(sample, _zc_batch, sample.coefficients(), replicates, seed)
        return TestReport("ZC", observed, p_value(null, observed), "permutation", int(replicates),
                          seed, _base_extras(sample))
    raise ValueError(f"unknown mode {mode!r}")


def f_type_test(sample: GroupedSample, mode: str = "naive", seed: int = 0,
                replicates: int = DEFAULT_BOOT) -> TestReport:
    if sample.n <= sample.k:
        raise DataError("F-type test needs n > K")
    observed = f_type_statistic(sample)
    if mode == "naive":
        tr1, tr2 = _pooled_traces(sample)
        kappa = tr1 ** 2 / tr2
        df1, df2 = (sample.k - 1) * kappa, (sample.n - sample.k) * kappa
        p = float(stats.f.sf(observed, df1, df2))
        return TestReport("F-type", observed, p, "naive", 1, seed,
                          _base_extras(sample, df1=df1, df2=df2))
    if mode == "permutation":
        null = _permutation_null(sample, _f_type_batch, sample.coefficients(), replicates, seed)
        return TestReport("F-type", observed, p_value(null, observed), "permutation",
                          int(replicates), seed, _base_extras(sample))
    raise ValueError(f"unknown mode {mode!r}")


def _gpf_batch_factory(weight: float):
    def batch(values, onehot, sizes):
        return weight * _pointwise_f_batch(values, onehot, sizes).sum(axis=1)
    return batch


def gpf_test(sample: GroupedSample, mode: str = "permutation", seed: int = 0,
             replicates: int = DEFAULT_BOOT) -> TestReport:
    """Integrated pointwise F.

    The naive mode matches two cumulants: with rho the pooled pointwise
    correlation operator, FG ~ beta * chi2_d / (K - 1), beta = tr(rho^2)/tr(rho),
    d = (K - 1) tr(rho)^2 / tr(rho^2).
    """
    f = pointwise_f(sample).values.values
    w = sample.domain.weight
    observed = float(w * f.sum())
    if mode == "naive":
        e = np.vstack([sample.values[sl] - sample.values[sl].mean(axis=0) for sl in sample.slices])
        cov = e.T @ e
        sd = np.sqrt(np.diag(cov))
        corr = cov / np.outer(sd, sd)
        tr1 = w * sample.domain.m
        tr2 = w * w * float(np.sum(corr * corr))
        beta = tr2 / tr1
        dof = (sample.k - 1) * tr1 ** 2 / tr2
        p = float(stats.chi2.sf(observed * (sample.k - 1) / beta, dof))
        return TestReport("GPF", observed, p, "naive", 1, seed, _base_extras(sample, beta=beta, d=dof))
    if mode == "permutation":
        null = _permutation_null(sample, _gpf_batch_factory(w), sample.values, replicates, seed)
        return TestReport("GPF", observed, p_value(null, observed), "permutation", int(replicates),
                          seed, _base_extras(sample))
    raise ValueError(f"unknown mode {mode!r}")


def _fmax_batch(values, onehot, sizes):
    return _pointwise_f_batch(values, onehot, sizes).max(axis=1)


def fmax_test(sample: GroupedSample, m_boot: int = DEFAULT_BOOT, seed: int = 0) -> TestReport:
    observed = float(pointwise_f(sample).values.values.max())
    resid = np.vstack([sample.values[sl] - sample.values[sl].mean(axis=0) for sl in sample.slices])
    null = _residual_bootstrap_null(sample, _fmax_batch, resid, m_boot, seed, "fmax-boot")
    return TestReport("F-max", observed, p_value(null, observed), "bootstrap", int(m_boot), seed,
                      _base_extras(sample))


def choose_components(eigenvalues: np.ndarray, fraction: float = VARIANCE_FRACTION) -> int:
    """Smallest d whose top-d eigenvalues carry at least ``fraction`` of the total."""
    vals = np.clip(np.sort(np.asarray(eigenvalues))[::-1], 0.0, None)
    total = vals.sum()
    if total <= 0:
        raise DataError("covariance has no positive eigenvalues")
    cum = np.cumsum(vals) / total
    return int(np.searchsorted(cum, fraction - 1e-12) + 1)


def pca_scores(sample: GroupedSample, variance_fraction: float = VARIANCE_FRACTION) -> PcaScores:
    _require_finite_moments(sample)
    c = sample.coefficients()
    e = _residuals(sample)
    omega = e.T @ e / sample.n
    try:
        vals, vecs = np.linalg.eigh(omega)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"pooled covariance eigendecomposition failed: {exc}") from exc
    vals, vecs = vals[::-1], vecs[:, ::-1]
    d = choose_components(vals, variance_fraction)
    scores = c @ vecs[:, :d]
    psi = np.stack([np.cov(scores[sl], rowvar=False, bias=True).reshape(d, d) for sl in sample.slices])
    explained = float(np.clip(vals, 0, None)[:d].sum() / np.clip(vals, 0, None).sum())
    return PcaScores(d, scores, psi, explained, np.clip(vals, 0, None))


def hr_statistic(sample: GroupedSample, pca: PcaScores) -> float:
    d = pca.d
    if min(sample.sizes) <= d:
        raise DataError(f"HR test needs every group larger than d={d} components; "
                        "use fewer components or another test")
    sizes = np.asarray(sample.sizes, dtype=np.float64)
    try:
        inv = np.stack([np.linalg.inv(p) for p in pca.group_covariances])
    except np.linalg.LinAlgError as exc:
        raise DataError("singular score covariance; use fewer components or another test") from exc
    if any(np.linalg.cond(p) > 1e12 for p in pca.group_covariances):
        raise DataError("ill-conditioned score covariance; use fewer components or another test")
    means = np.stack([pca.scores[sl].mean(axis=0) for sl in sample.slices])
    weight = np.einsum("k,kij->ij", sizes, inv)
    grand = np.linalg.solve(weight, np.einsum("k,kij,kj->i", sizes, inv, means))
    dev = means - grand
    return float(np.einsum("k,ki,kij,kj->", sizes, dev, inv, dev))


def hr_test(sample: GroupedSample, variance_fraction: float = VARIANCE_FRACTION) -> TestReport:
    pca = pca_scores(sample, variance_fraction)
    observed = hr_statistic(sample, pca)
    dof = (sample.k - 1) * pca.d
    return TestReport("HR", observed, float(stats.chi2.sf(observed, dof)), "asymptotic", 1, None,
                      _base_extras(sample, d=pca.d, explained=pca.explained_fraction))
