"""Block covariance estimator of the limiting law of U_n and its Gaussian sampler."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import rng
from .errors import DegenerateEstimatorError, NumericalError
from .sample import GroupedSample
from .signs import SignCache

# Relative size of a negative eigenvalue still attributed to round-off.
CLIP_TOL = 1e-8
DRAW_CHUNK = 256


@dataclass(frozen=True, eq=False)
class BlockOperator:
    """K x K array of m x m blocks acting on H^K (embedded coefficients).

    ``blocks[k1, k2]`` is the matrix of sigma_{k1 k2}. Since x (x) y sends the
    x-slot to the y-slot, that block maps component k1 into component k2, so
    it sits at row-block k2, column-block k1 of the full matrix.
    """

    blocks: np.ndarray  # shape (K, K, m, m)

    @property
    def k(self) -> int:
        return self.blocks.shape[0]

    @property
    def m(self) -> int:
        return self.blocks.shape[2]

    def to_matrix(self) -> np.ndarray:
        k, m = self.k, self.m
        return self.blocks.transpose(1, 2, 0, 3).reshape(k * m, k * m)

    def trace(self) -> float:
        return float(sum(np.trace(self.blocks[i, i]) for i in range(self.k)))

    @classmethod
    def from_matrix(cls, mat: np.ndarray, k: int) -> "BlockOperator":
        m = mat.shape[0] // k
        return cls(mat.reshape(k, m, k, m).transpose(2, 0, 1, 3).copy())


@dataclass(frozen=True, eq=False)
class NullSpectrum:
    eigenvalues: np.ndarray  # non-increasing, clipped at zero
    eigenvectors: np.ndarray  # columns, orthonormal
    clipped: int  # how many slightly negative eigenvalues were zeroed


def _group_sign_means(cache: SignCache, sample: GroupedSample) -> list[list[np.ndarray]]:
    """``means[i][k][l]`` = average over X in group i of s(X - X_{k,l})."""
    sl = sample.slices
    return [[cache.signs[sl[i], sl[k]].mean(axis=0) for k in range(sample.k)] for i in range(sample.k)]


def _c_hat_from_means(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # a: (n_k, m) means toward group i; b: (n_k, m) toward group j.
    # x (x) y maps w -> <w, x> y, i.e. the matrix y x^T.
    nk = a.shape[0]
    return b.T @ a / (nk - 1) - np.outer(b.mean(axis=0), a.mean(axis=0))


def c_hat(i: int, j: int, k: int, sample: GroupedSample, cache: SignCache | None = None) -> np.ndarray:
    """Matrix of the sign cross-covariance C_n(i, j, k) (groups 0-based)."""
    if sample.sizes[k] < 2:
        raise DegenerateEstimatorError(
            f"group {sample.labels[k]} has {sample.sizes[k]} observation(s); the covariance "
            "estimator needs at least 2 per group (use permutation calibration)")
    cache = cache if cache is not None else SignCache.from_sample(sample)
    sl = sample.slices
    a = cache.signs[sl[i], sl[k]].mean(axis=0)
    b = cache.signs[sl[j], sl[k]].mean(axis=0)
    return _c_hat_from_means(a, b)


def assemble_blocks(c: Callable[[int, int, int], np.ndarray], weights: Sequence[float]) -> BlockOperator:
    """Combine three-index sign covariances into the K x K block operator.

    ``weights`` are the group fractions (n_k / n, or their limits).
    """
    lam = np.asarray(weights, dtype=np.float64)
    k = len(lam)
    first = c(0, 0, 0)
    m = first.shape[0]
    cache = {(0, 0, 0): first}

    def get(i, j, l):
        if (i, j, l) not in cache:
            cache[i, j, l] = c(i, j, l)
        return cache[i, j, l]

    blocks = np.zeros((k, k, m, m))
    for k1 in range(k):
        for k2 in range(k):
            acc = np.zeros((m, m))
            for l in range(k):
                acc += lam[l] * (get(k1, k2, l) - get(l, k2, k1) - get(k1, l, k2))
            blocks[k1, k2] = np.sqrt(lam[k1] * lam[k2]) * acc
        for l1 in range(k):
            for l2 in range(k):
                blocks[k1, k1] += lam[l1] * lam[l2] * get(l1, l2, k1)
    return BlockOperator(blocks)


def sigma_hat(sample: GroupedSample, cache: SignCache | None = None) -> BlockOperator:
    """Estimated covariance operator of U_n (K x K blocks of m x m)."""
    small = [lab for lab, nk in zip(sample.labels, sample.sizes) if nk < 2]
    if small:
        raise DegenerateEstimatorError(
            f"groups {small} have fewer than 2 observations; the covariance estimator is "
            "undefined (use permutation calibration)")
    cache = cache if cache is not None else SignCache.from_sample(sample)
    means = _group_sign_means(cache, sample)
    op = assemble_blocks(lambda i, j, k: _c_hat_from_means(means[i][k], means[j][k]),
                         np.asarray(sample.sizes) / sample.n)
    # Exact symmetry holds algebraically; remove round-off asymmetry.
    mat = op.to_matrix()
    return BlockOperator.from_matrix(0.5 * (mat + mat.T), op.k)


def null_spectrum(op: BlockOperator | np.ndarray) -> NullSpectrum:
    mat = op.to_matrix() if isinstance(op, BlockOperator) else np.asarray(op, dtype=np.float64)
    if not np.all(np.isfinite(mat)):
        raise NumericalError("covariance operator has non-finite entries")
    try:
        vals, vecs = np.linalg.eigh(0.5 * (mat + mat.T))
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(mat)
        raise NumericalError(f"eigendecomposition failed (condition number {cond:.3g})") from exc
    vals, vecs = vals[::-1], vecs[:, ::-1]
    top = max(float(vals[0]), 0.0)
    if vals[-1] < -(CLIP_TOL * top + 1e-15):
        raise NumericalError(
            f"covariance operator is not non-negative definite: min eigenvalue {vals[-1]:.3g}, "
            f"max {top:.3g}")
    negative = vals < 0
    vals = np.where(negative, 0.0, vals)
    return NullSpectrum(vals, vecs, int(negative.sum()))


def sample_null_norms(op: BlockOperator | NullSpectrum, count: int, seed: int) -> np.ndarray:
    """``count`` draws of ||W||^2 for W Gaussian with covariance ``op``.

    With the eigenpairs (a_i, b_i), W = sum sqrt(a_i) z_i b_i, so
    ||W||^2 = sum a_i z_i^2. Draws come in fixed chunks, each with its own
    stream, so the output only depends on ``seed``.
    """
    spec = op if isinstance(op, NullSpectrum) else null_spectrum(op)
    # Every eigen-direction gets a normal draw, even clipped ones, so the
    # stream layout never depends on round-off in the spectrum.
    alpha = spec.eigenvalues
    out = np.zeros(int(count))
    if not np.any(alpha > 0):
        return out
    for c, start in enumerate(range(0, int(count), DRAW_CHUNK)):
        stop = min(start + DRAW_CHUNK, int(count))
        z = rng.stream(seed, "null-norms", c).standard_normal((stop - start, alpha.size))
        out[start:stop] = (z * z) @ alpha
    return out


def sample_gaussian(spec: NullSpectrum, count: int, seed: int, purpose: str = "gaussian") -> np.ndarray:
    """``count`` draws of the Gaussian element itself, shape (count, dim)."""
    scale = spec.eigenvectors * np.sqrt(spec.eigenvalues)
    dim = spec.eigenvectors.shape[0]
    out = np.zeros((int(count), dim))
    for c, start in enumerate(range(0, int(count), DRAW_CHUNK)):
        stop = min(start + DRAW_CHUNK, int(count))
        z = rng.stream(seed, purpose, c).standard_normal((stop - start, scale.shape[1]))
        out[start:stop] = z @ scale.T
    return out
