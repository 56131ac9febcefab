"""Slow literal transcriptions used as independent reference values.

Everything here works on GridFunctions with explicit loops and the L2
inner product; nothing touches the vectorized coefficient code paths.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.stats import ortho_group

from ssanova.grid import GridDomain, GridFunction, inner_product
from ssanova.sample import GroupedSample


def sign(x: GridFunction) -> GridFunction:
    norm = math.sqrt(inner_product(x, x))
    if norm <= 1e-12:
        return GridFunction.zero(x.domain)
    return x * (1.0 / norm)


def ss_four_loop(groups: list[list[GridFunction]]) -> float:
    pooled = [x for g in groups for x in g]
    n = len(pooled)
    total = 0.0
    for g in groups:
        nk = len(g)
        acc = 0.0
        for xi in g:
            for xi2 in g:
                for xj in pooled:
                    for xj2 in pooled:
                        acc += inner_product(sign(xi - xj), sign(xi2 - xj2))
        total += acc / (nk * n * n)
    return total


def outer(x: GridFunction, y: GridFunction) -> np.ndarray:
    """Matrix of w -> <w, x> y on the embedded coefficients, built from its action."""
    d = x.domain
    m = d.m
    w = math.sqrt(d.weight)
    mat = np.zeros((m, m))
    for c in range(m):
        e = np.zeros(m)
        e[c] = 1.0 / w  # grid function whose coefficient vector is the unit vector e_c
        image = inner_product(GridFunction(d, e), x) * y.values
        mat[:, c] = image * w
    return mat


def c_hat_loop(groups, i: int, j: int, k: int) -> np.ndarray:
    gi, gj, gk = groups[i], groups[j], groups[k]
    ni, nj, nk = len(gi), len(gj), len(gk)
    d = gk[0].domain
    first = np.zeros((d.m, d.m))
    for zk in gk:
        a = GridFunction.zero(d)
        for xi in gi:
            a = a + sign(xi - zk) * (1.0 / ni)
        b = GridFunction.zero(d)
        for xj in gj:
            b = b + sign(xj - zk) * (1.0 / nj)
        first += outer(a, b)
    a_all = GridFunction.zero(d)
    for xi in gi:
        for zk in gk:
            a_all = a_all + sign(xi - zk) * (1.0 / (ni * nk))
    b_all = GridFunction.zero(d)
    for xj in gj:
        for zk in gk:
            b_all = b_all + sign(xj - zk) * (1.0 / (nj * nk))
    return first / (nk - 1) - outer(a_all, b_all)


def sigma_blocks_loop(groups) -> list[list[np.ndarray]]:
    kk = len(groups)
    sizes = [len(g) for g in groups]
    n = sum(sizes)
    m = groups[0][0].domain.m
    c = {(i, j, k): c_hat_loop(groups, i, j, k)
         for i in range(kk) for j in range(kk) for k in range(kk)}
    blocks = [[None] * kk for _ in range(kk)]
    for k1 in range(kk):
        for k2 in range(kk):
            acc = np.zeros((m, m))
            for l in range(kk):
                acc += sizes[l] / n * (c[k1, k2, l] - c[l, k2, k1] - c[k1, l, k2])
            blk = math.sqrt(sizes[k1] * sizes[k2]) / n * acc
            if k1 == k2:
                for l1 in range(kk):
                    for l2 in range(kk):
                        blk = blk + sizes[l1] * sizes[l2] / n ** 2 * c[l1, l2, k1]
            blocks[k1][k2] = blk
    return blocks


def sigma_matrix_loop(groups) -> np.ndarray:
    """Covariance operator on H^K as a matrix: (S w)_{k2} = sum_{k1} sigma_{k1 k2}(w_{k1})."""
    blocks = sigma_blocks_loop(groups)
    kk = len(groups)
    m = blocks[0][0].shape[0]
    out = np.zeros((kk * m, kk * m))
    for col in range(kk * m):
        w = np.zeros(kk * m)
        w[col] = 1.0
        image = np.zeros(kk * m)
        for k1 in range(kk):
            for k2 in range(kk):
                image[k2 * m:(k2 + 1) * m] += blocks[k1][k2] @ w[k1 * m:(k1 + 1) * m]
        out[:, col] = image
    return out


def scalar_anova_f(groups: list[np.ndarray]) -> float:
    """Textbook one-way ANOVA F for scalar groups."""
    allv = np.concatenate(groups)
    grand = allv.mean()
    k, n = len(groups), allv.size
    ssb = sum(len(g) * (g.mean() - grand) ** 2 for g in groups)
    ssw = sum(((g - g.mean()) ** 2).sum() for g in groups)
    return (ssb / (k - 1)) / (ssw / (n - k))


def integer_groups(rng: np.random.Generator, sizes, m: int, domain: GridDomain | None = None):
    domain = domain or GridDomain(0.0, 1.0, m)
    return [[GridFunction(domain, rng.integers(-3, 4, size=m).astype(float)) for _ in range(s)]
            for s in sizes]


def random_sample(seed: int, sizes=(4, 5, 3), m: int = 8, domain: GridDomain | None = None) -> GroupedSample:
    rng = np.random.default_rng(seed)
    d = domain or GridDomain(0.0, 1.0, m)
    return GroupedSample(d, rng.normal(size=(sum(sizes), d.m)), sizes)


def transformed_copies(sample: GroupedSample, seed: int):
    rng = np.random.default_rng(seed)
    m = sample.domain.m
    shift = rng.normal(size=m)
    q = ortho_group.rvs(m, random_state=seed)
    c = sample.coefficients()
    yield "translation", sample.with_values(sample.values + shift)
    yield "scaling", sample.with_values(sample.values * 7.3)
    rotated = (c @ q.T) / math.sqrt(sample.domain.weight)
    yield "orthogonal", sample.with_values(rotated)
