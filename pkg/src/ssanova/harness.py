"""Monte-Carlo size and power studies, subsampling studies and limiting powers."""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

from . import baselines, inference, rng
from .covariance import assemble_blocks, null_spectrum, sample_gaussian
from .errors import DataError, NumericalError
from .grid import GridDomain, GridFunction, to_coefficients
from .processes import ProcessSpec, ShiftSpec, eta1, eta2, simulate_values
from .sample import GroupedSample
from .signs import ZERO_TOL, SignCache, sign_coefficients

STUDY_DOMAIN = GridDomain(0.25, 0.75, 100)
DEFAULT_REPLICATIONS = 500
DEFAULT_RESAMPLES = 500
RECOVERABLE = (DataError, NumericalError, np.linalg.LinAlgError)


# --- test selectors ----------------------------------------------------------

class _Context:
    """Per-sample lazily built shared state (the sign cache)."""

    def __init__(self, sample: GroupedSample):
        self.sample = sample
        self._cache = None

    @property
    def cache(self) -> SignCache:
        if self._cache is None:
            self._cache = SignCache.from_sample(self.sample)
        return self._cache


Runner = Callable[[_Context, int, int], inference.TestReport]

SELECTORS: dict[str, Runner] = {
    "ss-asym": lambda c, r, s: inference.asymptotic_test(c.sample, r, s, cache=c.cache),
    "ss-boot": lambda c, r, s: inference.bootstrap_test(c.sample, r, s, cache=c.cache),
    "ss-perm": lambda c, r, s: inference.permutation_test(c.sample, r, s, cache=c.cache),
    "ss-exact": lambda c, r, s: inference.exact_permutation_test(c.sample, cache=c.cache),
    "cff": lambda c, r, s: baselines.cff_test(c.sample, r, s),
    "zc": lambda c, r, s: baselines.zc_test(c.sample, "naive", s, r),
    "zc-perm": lambda c, r, s: baselines.zc_test(c.sample, "permutation", s, r),
    "ftype": lambda c, r, s: baselines.f_type_test(c.sample, "naive", s, r),
    "ftype-perm": lambda c, r, s: baselines.f_type_test(c.sample, "permutation", s, r),
    "gpf": lambda c, r, s: baselines.gpf_test(c.sample, "permutation", s, r),
    "gpf-naive": lambda c, r, s: baselines.gpf_test(c.sample, "naive", s, r),
    "fmax": lambda c, r, s: baselines.fmax_test(c.sample, r, s),
    "hr": lambda c, r, s: baselines.hr_test(c.sample),
}


class UnknownSelectorError(ValueError):
    pass


def check_selectors(tests: Sequence[str]) -> tuple[str, ...]:
    bad = [t for t in tests if t not in SELECTORS]
    if bad:
        raise UnknownSelectorError(f"unknown test selector(s) {bad}; valid: {', '.join(SELECTORS)}")
    if not tests:
        raise UnknownSelectorError(f"no tests selected; valid: {', '.join(SELECTORS)}")
    return tuple(tests)


def run_tests(sample: GroupedSample, tests: Sequence[str], resamples: int, seed: int
              ) -> dict[str, inference.TestReport | Exception]:
    """Run each selector with its own derived seed; recoverable errors are returned, not raised."""
    ctx = _Context(sample)
    out: dict[str, inference.TestReport | Exception] = {}
    for name in check_selectors(tests):
        try:
            out[name] = SELECTORS[name](ctx, resamples, rng.derive_seed(seed, "test", name))
        except RECOVERABLE as exc:
            out[name] = exc
    return out


# --- configurations and results ----------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    process: ProcessSpec
    sizes: tuple[int, ...]
    tests: tuple[str, ...]
    c1: float = 0.0
    c2_values: tuple[float, ...] = (0.0,)
    replications: int = DEFAULT_REPLICATIONS
    alpha: float = 0.05
    seed: int = 0
    resamples: int = DEFAULT_RESAMPLES
    domain: GridDomain = STUDY_DOMAIN

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        object.__setattr__(self, "tests", check_selectors(tuple(self.tests)))
        object.__setattr__(self, "c2_values", tuple(float(c) for c in self.c2_values))
        if self.replications < 1:
            raise DataError("replications must be >= 1")
        if not 0 < self.alpha < 1:
            raise DataError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not self.c2_values:
            raise DataError("c2 list must be nonempty")
        if len(self.sizes) != 3:
            raise DataError("the shift design has exactly 3 groups")
        if self.resamples < 1:
            raise DataError("resamples must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        return {"process": self.process.label, "sizes": list(self.sizes), "tests": list(self.tests),
                "c1": self.c1, "c2_values": list(self.c2_values), "replications": self.replications,
                "alpha": self.alpha, "seed": self.seed, "resamples": self.resamples,
                "domain": {"a": self.domain.a, "b": self.domain.b, "m": self.domain.m}}


def _se(rate: np.ndarray, count: np.ndarray) -> np.ndarray:
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(count > 0, np.sqrt(rate * (1 - rate) / np.maximum(count, 1)), np.nan)


@dataclass(frozen=True)
class PowerCurve:
    c2_values: tuple[float, ...]
    rejections: dict[str, np.ndarray]  # counts per c2
    valid: dict[str, np.ndarray]  # replications without error per c2
    errors: dict[str, np.ndarray]

    @property
    def rates(self) -> dict[str, np.ndarray]:
        return {t: np.where(self.valid[t] > 0, self.rejections[t] / np.maximum(self.valid[t], 1), np.nan)
                for t in self.rejections}

    @property
    def standard_errors(self) -> dict[str, np.ndarray]:
        rates = self.rates
        return {t: _se(rates[t], self.valid[t]) for t in rates}

    def rows(self) -> list[dict[str, Any]]:
        rates, ses = self.rates, self.standard_errors
        return [{"test": t, "c2": c2, "rate": float(rates[t][i]), "se": float(ses[t][i]),
                 "rejections": int(self.rejections[t][i]), "valid": int(self.valid[t][i]),
                 "errors": int(self.errors[t][i])}
                for t in self.rejections for i, c2 in enumerate(self.c2_values)]


@dataclass(frozen=True)
class SizeEstimate:
    rates: dict[str, float]
    standard_errors: dict[str, float]
    errors: dict[str, int]
    valid: dict[str, int]

    def rows(self) -> list[dict[str, Any]]:
        return [{"test": t, "rate": self.rates[t], "se": self.standard_errors[t],
                 "valid": self.valid[t], "errors": self.errors[t]} for t in self.rates]


def replication_noise(config: ExperimentConfig, rep: int) -> np.ndarray:
    """The noise matrix of one replication; shared by every c2 value."""
    return simulate_values(config.process, config.domain, sum(config.sizes),
                           rng.derive_seed(config.seed, "data", rep))


def _one_replication(config: ExperimentConfig, rep: int) -> np.ndarray:
    """Outcome codes per (test, c2): 1 reject, 0 accept, -1 error."""
    eps = replication_noise(config, rep)
    t = config.domain.points
    test_seed = rng.derive_seed(config.seed, "tests", rep)
    out = np.empty((len(config.tests), len(config.c2_values)), dtype=np.int8)
    for j, c2 in enumerate(config.c2_values):
        means = np.stack([np.zeros_like(t), config.c1 * eta1(t), c2 * eta2(t)])
        sample = GroupedSample(config.domain, eps + np.repeat(means, config.sizes, axis=0), config.sizes)
        reports = run_tests(sample, config.tests, config.resamples, test_seed)
        for i, name in enumerate(config.tests):
            r = reports[name]
            out[i, j] = -1 if isinstance(r, Exception) else int(r.p_value <= config.alpha)
    return out


def _outcomes(config: ExperimentConfig, threads: int = 1) -> np.ndarray:
    reps = range(config.replications)
    if threads <= 1:
        res = [_one_replication(config, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(lambda r: _one_replication(config, r), reps))
    return np.stack(res)  # (R, tests, c2)


def power_curve(config: ExperimentConfig, threads: int = 1) -> PowerCurve:
    """Rejection rates over the c2 grid with common noise per replication."""
    out = _outcomes(config, threads)
    rej, val, err = {}, {}, {}
    for i, t in enumerate(config.tests):
        o = out[:, i, :]
        rej[t] = (o == 1).sum(axis=0)
        err[t] = (o == -1).sum(axis=0)
        val[t] = (o >= 0).sum(axis=0)
    return PowerCurve(config.c2_values, rej, val, err)


def estimate_size(config: ExperimentConfig, threads: int = 1) -> SizeEstimate:
    """Null rejection rates (c1 = c2 = 0), same data streams as ``power_curve``."""
    null = ExperimentConfig(config.process, config.sizes, config.tests, 0.0, (0.0,), config.replications,
                            config.alpha, config.seed, config.resamples, config.domain)
    curve = power_curve(null, threads)
    rates, ses = curve.rates, curve.standard_errors
    return SizeEstimate({t: float(rates[t][0]) for t in rates}, {t: float(ses[t][0]) for t in ses},
                        {t: int(curve.errors[t][0]) for t in rates}, {t: int(curve.valid[t][0]) for t in rates})


def noise_digest(config: ExperimentConfig, rep: int) -> str:
    return hashlib.sha256(replication_noise(config, rep).tobytes()).hexdigest()


# --- subsampling studies -------------------------------------------------------

@dataclass(frozen=True)
class SubsampleResult:
    mode: str
    rates: dict[str, float]
    valid: dict[str, int]
    errors: dict[str, int]
    omitted_groups: tuple[str, ...]
    subgroup_size: int
    replications: int

    def rows(self) -> list[dict[str, Any]]:
        return [{"mode": self.mode, "test": t, "rate": self.rates[t], "valid": self.valid[t],
                 "errors": self.errors[t], "subgroup_size": self.subgroup_size,
                 "omitted": ";".join(self.omitted_groups)} for t in self.rates]


def subsample_study(data: GroupedSample, tests: Sequence[str], mode: str = "size",
                    subgroup_size: int | None = None, replications: int = 200, alpha: float = 0.05,
                    resamples: int = DEFAULT_RESAMPLES, seed: int = 0) -> SubsampleResult:
    """Size: split each large-enough group into K random subgroups and test them.
    Power: draw one random subgroup from every group and test across groups."""
    tests = check_selectors(tuple(tests))
    k = data.k
    sizes = np.asarray(data.sizes)
    if subgroup_size is None:
        subgroup_size = int(sizes.max() // k) if mode == "size" else int(sizes.min())
    s = int(subgroup_size)
    if s < 1:
        raise DataError("subgroup size must be >= 1")
    counts = {t: [0, 0, 0] for t in tests}  # rejections, valid, errors

    def tally(reports):
        for t, r in reports.items():
            if isinstance(r, Exception):
                counts[t][2] += 1
            else:
                counts[t][0] += int(r.p_value <= alpha)
                counts[t][1] += 1

    groups = [data.values[sl] for sl in data.slices]
    omitted: tuple[str, ...] = ()
    if mode == "size":
        included = [g for g in range(k) if sizes[g] >= k * s]
        omitted = tuple(str(data.labels[g]) for g in range(k) if sizes[g] < k * s)
        if not included:
            raise DataError(f"every group has fewer than K*s = {k * s} observations; nothing to study")
        for rep in range(int(replications)):
            for g in included:
                gen = rng.stream(seed, "subsample-size", rep, g)
                pick = gen.choice(sizes[g], size=k * s, replace=False)
                vals = groups[g][pick]
                sample = GroupedSample(data.domain, vals, (s,) * k)
                tally(run_tests(sample, tests, resamples, rng.derive_seed(seed, "tests", rep, g)))
    elif mode == "power":
        small = [str(data.labels[g]) for g in range(k) if sizes[g] < s]
        if small:
            raise DataError(f"groups {small} have fewer than {s} observations")
        for rep in range(int(replications)):
            gen = rng.stream(seed, "subsample-power", rep)
            vals = np.vstack([groups[g][gen.choice(sizes[g], size=s, replace=False)] for g in range(k)])
            sample = GroupedSample(data.domain, vals, (s,) * k, data.labels)
            tally(run_tests(sample, tests, resamples, rng.derive_seed(seed, "tests", rep)))
    else:
        raise ValueError(f"mode must be 'size' or 'power', got {mode!r}")
    rates = {t: (c[0] / c[1] if c[1] else float("nan")) for t, c in counts.items()}
    return SubsampleResult(mode, rates, {t: c[1] for t, c in counts.items()},
                           {t: c[2] for t, c in counts.items()}, omitted, s, int(replications))


# --- limiting powers under shrinking alternatives ------------------------------

@dataclass(frozen=True)
class ShrinkingAlternative:
    weights: tuple[float, ...]
    deltas: tuple[GridFunction, ...]
    process: ProcessSpec
    domain: GridDomain

    def __post_init__(self):
        lam = np.asarray(self.weights, dtype=np.float64)
        if lam.ndim != 1 or len(lam) < 2:
            raise DataError("need at least two group weights")
        if np.any(lam <= 0) or np.any(lam >= 1):
            raise DataError(f"weights must lie in (0, 1), got {self.weights}")
        if abs(lam.sum() - 1) > 1e-10:
            raise DataError(f"weights must sum to 1, got {lam.sum()}")
        if len(self.deltas) != len(lam):
            raise DataError("one delta per group required")
        if any(d.domain != self.domain for d in self.deltas):
            raise DataError("deltas must live on the alternative's domain")

    @classmethod
    def shift_design(cls, c1: float, c2: float, process: ProcessSpec, domain: GridDomain = STUDY_DOMAIN,
                     weights=(1 / 3, 1 / 3, 1 / 3)) -> "ShrinkingAlternative":
        t = domain.points
        return cls(tuple(weights), (GridFunction.zero(domain), GridFunction(domain, c1 * eta1(t)),
                                    GridFunction(domain, c2 * eta2(t))), process, domain)

    @property
    def k(self) -> int:
        return len(self.weights)

    def delta_coefficients(self) -> np.ndarray:
        return np.stack([to_coefficients(d) for d in self.deltas])

    def delta_bar(self) -> np.ndarray:
        return np.asarray(self.weights) @ self.delta_coefficients()


@dataclass(frozen=True)
class AsymptoticPower:
    test: str
    power: float
    standard_error: float
    null_quantile: float
    extras: dict[str, Any] = field(default_factory=dict)


def _quantile_power(null: np.ndarray, alt: np.ndarray, alpha: float) -> tuple[float, float, float]:
    """Power P(alt > q), q the empirical (1 - alpha) null quantile, and a standard
    error combining the alternative's binomial error and the quantile's error."""
    q = float(np.quantile(null, 1 - alpha))
    power = float(np.mean(alt > q))
    dq = np.sqrt(alpha * (1 - alpha) / null.size)
    lo = float(np.quantile(null, max(1 - alpha - dq, 0.0)))
    hi = float(np.quantile(null, min(1 - alpha + dq, 1.0)))
    shift = 0.5 * (np.mean(alt > lo) - np.mean(alt > hi))
    se = float(np.sqrt(power * (1 - power) / alt.size + shift ** 2))
    return power, se, q


def derivative_operator(process: ProcessSpec, domain: GridDomain, pairs: int, seed: int
                        ) -> tuple[np.ndarray, dict[str, Any]]:
    """Monte-Carlo E[(I - u u') / ||x||] with x = X - X', u = x / ||x||.

    Also compares E||X - X'||^-1 estimated on the two halves of the pairs; a
    large relative gap suggests the expectation may not be finite.
    """
    a = simulate_values(process, domain, pairs, rng.derive_seed(seed, "pairs-a"))
    b = simulate_values(process, domain, pairs, rng.derive_seed(seed, "pairs-b"))
    x = to_coefficients(a - b, domain)
    r = np.linalg.norm(x, axis=1)
    if np.any(r <= ZERO_TOL):
        raise NumericalError("coincident pairs: ||X - X'|| = 0 occurs with positive frequency")
    inv = 1.0 / r
    u = x * inv[:, None]
    scaled = u * np.sqrt(inv)[:, None]
    op = inv.mean() * np.eye(domain.m) - scaled.T @ scaled / pairs
    half = pairs // 2
    m1, m2 = inv[:half].mean(), inv[half:].mean()
    gap = abs(m1 - m2) / max(0.5 * (m1 + m2), 1e-300)
    # Rough scale: relative MC error of the half means.
    rel_se = inv.std() / inv.mean() * np.sqrt(2.0 / max(half, 1))
    unstable = bool(gap > max(4 * rel_se, 0.05)) or bool(inv.max() > 0.25 * inv.sum())
    return op, {"inverse_distance_mean": float(inv.mean()), "half_gap": float(gap),
                "unstable_inverse_distance": unstable}


def null_sign_covariance(process: ProcessSpec, domain: GridDomain, outer: int, inner: int, seed: int
                         ) -> np.ndarray:
    """Nested Monte Carlo of Cov(g(X)), g(x) = E s(X' - x).

    g is estimated on two disjoint halves of an inner pool; averaging
    g1 g2' removes the inner-sample noise from the second moment.
    """
    if inner < 2:
        raise DataError("inner sample size must be >= 2")
    outer_c = to_coefficients(simulate_values(process, domain, outer, rng.derive_seed(seed, "outer")), domain)
    pool = to_coefficients(simulate_values(process, domain, inner, rng.derive_seed(seed, "inner")), domain)
    half = inner // 2
    g1 = np.empty_like(outer_c)
    g2 = np.empty_like(outer_c)
    for start in range(0, outer, 128):
        x = outer_c[start:start + 128]
        signs = sign_coefficients(pool[None, :, :] - x[:, None, :])
        g1[start:start + 128] = signs[:, :half].mean(axis=1)
        g2[start:start + 128] = signs[:, half:2 * half].mean(axis=1)
    second = 0.5 * (g1.T @ g2 + g2.T @ g1) / outer
    mean = 0.5 * (g1.mean(axis=0) + g2.mean(axis=0))
    c0 = second - np.outer(mean, mean)
    # The split-half product is unbiased but not NND; project onto the NND cone.
    vals, vecs = np.linalg.eigh(0.5 * (c0 + c0.T))
    return (vecs * np.clip(vals, 0.0, None)) @ vecs.T


def asymptotic_power_ss(alt: ShrinkingAlternative, alpha: float = 0.05, outer: int = 2000,
                        inner: int = 200, pairs: int = 4000, draws: int = 20000, seed: int = 0
                        ) -> AsymptoticPower:
    """Limiting power P(||U0 + W||^2 > q) of the SS test.

    U0_k = T(sqrt(lam_k)(delta_k - delta_bar)) with T the expected sign
    derivative, W Gaussian with the null covariance of U_n, q the (1 - alpha)
    quantile of ||W||^2. Null and alternative use independent draws.
    """
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    lam = np.asarray(alt.weights)
    t_op, flags = derivative_operator(alt.process, alt.domain, pairs, rng.derive_seed(seed, "derivative"))
    centered = alt.delta_coefficients() - alt.delta_bar()
    u0 = (np.sqrt(lam)[:, None] * centered) @ t_op.T
    c0 = null_sign_covariance(alt.process, alt.domain, outer, inner, rng.derive_seed(seed, "sign-cov"))
    op = assemble_blocks(lambda i, j, k: c0, lam)
    spec = null_spectrum(op)
    null_w = sample_gaussian(spec, draws, seed, "null")
    alt_w = sample_gaussian(spec, draws, seed, "alternative")
    null = np.einsum("ij,ij->i", null_w, null_w)
    shifted = alt_w + u0.reshape(-1)
    power, se, q = _quantile_power(null, np.einsum("ij,ij->i", shifted, shifted), alpha)
    return AsymptoticPower("SS", power, se, q, {**flags, "u0_norm2": float(np.sum(u0 * u0)),
                                               "null_trace": float(spec.eigenvalues.sum())})


def process_covariance(process: ProcessSpec, domain: GridDomain, count: int, seed: int) -> np.ndarray:
    """Sample covariance of P0 in embedded coefficients."""
    c = to_coefficients(simulate_values(process, domain, count, seed), domain)
    if not np.all(np.isfinite(c)):
        raise NumericalError("non-finite simulated paths; covariance estimation failed")
    cov = np.cov(c, rowvar=False)
    if not np.all(np.isfinite(cov)) or np.trace(cov) <= 0:
        raise NumericalError("covariance estimation failed")
    return cov


def _gaussian_y(cov: np.ndarray, k: int, count: int, seed: int, purpose: str) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    scale = vecs * np.sqrt(np.clip(vals, 0, None))
    gen_draws = []
    for c, start in enumerate(range(0, count, 256)):
        stop = min(start + 256, count)
        z = rng.stream(seed, purpose, c).standard_normal((stop - start, k, cov.shape[0]))
        gen_draws.append(z @ scale.T)
    return np.concatenate(gen_draws)  # (count, K, m)


def _cff_limit(z: np.ndarray, lam: np.ndarray) -> np.ndarray:
    out = np.zeros(z.shape[0])
    for k in range(len(lam)):
        for l in range(k + 1, len(lam)):
            d = z[:, k] - np.sqrt(lam[k] / lam[l]) * z[:, l]
            out += np.einsum("ij,ij->i", d, d)
    return out


def _zc_limit(z: np.ndarray, lam: np.ndarray) -> np.ndarray:
    p0 = np.sqrt(lam)
    proj = np.einsum("k,bkm->bm", p0, z)
    return np.einsum("bkm,bkm->b", z, z) - np.einsum("bm,bm->b", proj, proj)


def hr_noncentrality(alt: ShrinkingAlternative, cov: np.ndarray,
                     variance_fraction: float = baselines.VARIANCE_FRACTION) -> tuple[float, int]:
    """||M~||^2 = mu' A mu with common score covariance diag(gamma_1..d)."""
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    vals, vecs = vals[::-1], vecs[:, ::-1]
    d = baselines.choose_components(vals, variance_fraction)
    gamma = vals[:d]
    if np.any(gamma <= 0):
        raise NumericalError("non-positive retained eigenvalue")
    lam = np.asarray(alt.weights)
    k = len(lam)
    dk = alt.delta_coefficients() @ vecs[:, :d]  # (K, d)
    inv_half = np.diag(gamma ** -0.5)
    stacked = np.vstack([np.sqrt(l) * inv_half for l in lam])  # (Kd, d)
    middle = np.linalg.inv(sum(l * np.diag(1 / gamma) for l in lam))
    a = np.eye(k * d) - stacked @ middle @ stacked.T
    mu = np.concatenate([np.sqrt(l) * inv_half @ dk[i] for i, l in enumerate(lam)])
    return float(mu @ a @ mu), d


def asymptotic_power_baseline(test: str, alt: ShrinkingAlternative, alpha: float = 0.05,
                              gamma_draws: int = 4000, draws: int = 20000, seed: int = 0) -> AsymptoticPower:
    """Limiting power of CFF, ZC or HR with Gamma estimated from P0 draws."""
    test = test.upper()
    if test not in ("CFF", "ZC", "HR"):
        raise DataError(f"asymptotic power available for CFF, ZC, HR; got {test!r}")
    if not 0 < alpha < 1:
        raise DataError("alpha must lie in (0, 1)")
    lam = np.asarray(alt.weights)
    cov = process_covariance(alt.process, alt.domain, gamma_draws, rng.derive_seed(seed, "gamma"))
    if test == "HR":
        nc, d = hr_noncentrality(alt, cov)
        dof = (alt.k - 1) * d
        q = float(stats.chi2.ppf(1 - alpha, dof))
        power = float(stats.ncx2.sf(q, dof, nc)) if nc > 0 else float(stats.chi2.sf(q, dof))
        return AsymptoticPower("HR", power, 0.0, q, {"noncentrality": nc, "d": d})
    shift = np.sqrt(lam)[:, None] * alt.delta_coefficients()
    y_alt = _gaussian_y(cov, alt.k, draws, seed, "alternative") + shift
    if test == "CFF":
        null = _cff_limit(_gaussian_y(cov, alt.k, draws, seed, "null"), lam)
        alt_stat = _cff_limit(y_alt, lam)
    else:
        gamma = np.clip(np.linalg.eigvalsh(cov), 0, None)
        gamma = gamma[gamma > 0]
        null = np.empty(draws)
        for c, start in enumerate(range(0, draws, 256)):
            stop = min(start + 256, draws)
            chi = rng.stream(seed, "null-chi2", c).chisquare(alt.k - 1, size=(stop - start, gamma.size))
            null[start:stop] = chi @ gamma
        alt_stat = _zc_limit(y_alt, lam)
    power, se, q = _quantile_power(null, alt_stat, alpha)
    return AsymptoticPower(test, power, se, q)
