"""Monte Carlo laboratory for sphere-decoder complexity distributions.

Instances follow the usual MIMO model: H has i.i.d. CN(0, 1/M) entries and
the observation is pure noise w ~ CN(0, sigma^2 I) (the transmitted vector is
taken as 0; complexity does not depend on it). The radius is fixed per
configuration from the noise statistics.
"""
import math
import os
from dataclasses import asdict, dataclass, field
from multiprocessing import get_context

import numpy as np
from scipy import special

from .decoder import decode
from .errors import EmptySamples
from .lattice import covering_radius_ub
from .linalg import sub_gram_dets
from .preproc import Method, preprocess, scaling_invariance_check

THREADS_ENV = "LATTICETAIL_THREADS"
CHUNK = 2000


@dataclass(frozen=True)
class TrialConfig:
    n: int
    m: int
    snr_db: float
    trials: int
    seed: int
    p_find: float = 0.99
    method: str = "qrd"
    node_budget: int | None = None

    def __post_init__(self):
        if not self.n >= self.m >= 1:
            raise ValueError(f"need n >= m >= 1, got n={self.n}, m={self.m}")
        if not 0 < self.p_find < 1:
            raise ValueError(f"p_find must lie in (0, 1), got {self.p_find}")
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.node_budget is not None and self.node_budget < 1:
            raise ValueError("node_budget must be positive")
        Method(self.method)

    @property
    def sigma2(self):
        return 10.0 ** (-self.snr_db / 10.0)

    @property
    def rho(self):
        return radius_for_coverage(self.m, self.sigma2, self.p_find)

    def as_dict(self):
        return asdict(self)


def radius_for_coverage(m, sigma2, p, rtol=1e-10):
    """Radius whose sphere holds the projected noise with probability ``p``.

    The projected noise Q^H w has m i.i.d. CN(0, sigma2) coordinates, so
    ||Q^H w||^2 / sigma2 is Gamma(m, 1); rho^2 is sigma2 times its p-quantile,
    found by bisection on the regularized lower incomplete gamma function.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    lo, hi = 0.0, float(m)
    while special.gammainc(m, hi) < p:
        lo, hi = hi, 2 * hi
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if special.gammainc(m, mid) < p:
            lo = mid
        else:
            hi = mid
    return math.sqrt(sigma2 * 0.5 * (lo + hi))


def trial_rng(seed, index):
    """Independent PCG64 substream for trial ``index``; order-free by construction."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def complex_normal(rng, shape, var):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * math.sqrt(var / 2)


def sample_instance(rng, cfg):
    """Draw (H, r) with H ~ CN(0, 1/M) entries and r = w ~ CN(0, sigma^2)."""
    h = complex_normal(rng, (cfg.n, cfg.m), 1.0 / cfg.m)
    w = complex_normal(rng, cfg.n, cfg.sigma2)
    return h, w


@dataclass
class SampleSet:
    config: TrialConfig
    counts: np.ndarray  # (trials, M) layer counts S_1..S_M
    found: np.ndarray
    censored: np.ndarray
    inv_volume: np.ndarray  # (trials, M) 1/det(R_k^H R_k) of the decoded factor
    z2: np.ndarray  # covering-radius bound squared of the decoded factor

    @property
    def total(self):
        return self.counts.sum(axis=1)

    @property
    def trials(self):
        return len(self.found)

    @property
    def found_fraction(self):
        return float(self.found.mean())

    @property
    def censored_count(self):
        return int(self.censored.sum())

    def ccdf(self, layer=None, thresholds=None):
        """CCDF of S (``layer=None``) or of S_k, truncated at the censoring cap."""
        x = self.total if layer is None else self.counts[:, layer - 1]
        c = empirical_ccdf(x, thresholds)
        if self.censored.any():
            cap = self.config.node_budget
            if (~self.censored).any():
                cap = min(cap, int(x[~self.censored].max()))
            keep = c.thresholds <= cap
            c = CCDF(c.thresholds[keep], c.probabilities[keep])
        return c

    def fit(self, layer=None, q_lo=0.90, q_hi=0.999):
        fit = fit_tail(self.ccdf(layer), q_lo, q_hi)
        if self.censored.mean() > 1 - q_hi:
            # censoring reaches into the fit window
            fit = TailFit(fit.exponent, fit.window, fit.points_used, fit.r_squared, False)
        return fit


def _run_chunk(args):
    cfg, rho, start, stop = args
    m = cfg.m
    k = stop - start
    counts = np.zeros((k, m), dtype=np.int64)
    found = np.zeros(k, dtype=bool)
    censored = np.zeros(k, dtype=bool)
    inv_volume = np.zeros((k, m))
    z2 = np.zeros(k)
    method = Method(cfg.method)
    for row, idx in enumerate(range(start, stop)):
        h, w = sample_instance(trial_rng(cfg.seed, idx), cfg)
        out = preprocess(h, method)
        y = out.q_tilde.conj().T @ w
        res = decode(out.r_tilde, y, rho, cfg.node_budget)
        counts[row] = res.layer_counts
        found[row] = res.found
        censored[row] = res.censored or res.overflow
        inv_volume[row] = 1.0 / sub_gram_dets(out.r_tilde)
        z2[row] = covering_radius_ub(out.r_tilde) ** 2
    return start, counts, found, censored, inv_volume, z2


def worker_count(workers=None):
    if workers is None:
        workers = int(os.environ.get(THREADS_ENV, os.cpu_count() or 1))
    return max(1, int(workers))


def run_trials(cfg, workers=None):
    """Run ``cfg.trials`` independent decodes at the configuration's fixed radius.

    Trial ``i`` draws from its own substream of ``cfg.seed``, so the merged
    result is identical for any worker count.
    """
    rho = cfg.rho
    jobs = [(cfg, rho, s, min(s + CHUNK, cfg.trials)) for s in range(0, cfg.trials, CHUNK)]
    workers = min(worker_count(workers), len(jobs))
    if workers == 1:
        parts = [_run_chunk(j) for j in jobs]
    else:
        with get_context("fork").Pool(workers) as pool:
            parts = pool.map(_run_chunk, jobs)
    parts.sort(key=lambda p: p[0])
    return SampleSet(
        config=cfg,
        counts=np.concatenate([p[1] for p in parts]),
        found=np.concatenate([p[2] for p in parts]),
        censored=np.concatenate([p[3] for p in parts]),
        inv_volume=np.concatenate([p[4] for p in parts]),
        z2=np.concatenate([p[5] for p in parts]),
    )


def stratified_unit_cube(rng, samples, dim):
    """Jittered grid: one uniform point in each of ``cells**dim`` equal sub-cubes.

    Each point is marginally uniform on [0, 1)^dim; ``samples`` is rounded
    down to a perfect ``dim``-th power.
    """
    cells = max(1, int(math.floor(samples ** (1.0 / dim) + 1e-9)))
    grid = np.stack(np.meshgrid(*[np.arange(cells)] * dim, indexing="ij"), -1).reshape(-1, dim)
    return (grid + rng.random(grid.shape)) / cells


def dithered_layer_means(r, rho, samples, rng):
    """Average S_k over centers y = R u with u uniform on the unit cube of C^M.

    The tail of R u is R_k u_k, so every layer sees centers uniform over a
    fundamental region of L(R_k). Returns ``(mean_counts, volume_estimates)``
    where the estimate is V_k(rho) / det(R_k^H R_k).
    """
    from .lattice import sphere_volume

    r = np.asarray(r, dtype=np.complex128)
    m = r.shape[0]
    u = stratified_unit_cube(rng, samples, 2 * m)
    centers = (u[:, :m] + 1j * u[:, m:]) @ r.T
    totals = np.zeros(m)
    for y in centers:
        totals += decode(r, y, rho).layer_counts
    vols = sub_gram_dets(r)
    heuristic = np.array([sphere_volume(k, rho) / vols[k - 1] for k in range(1, m + 1)])
    return totals / len(centers), heuristic


@dataclass(frozen=True)
class CCDF:
    thresholds: np.ndarray
    probabilities: np.ndarray


def default_thresholds(xmax, per_decade=20):
    """Log-spaced integer thresholds covering [1, xmax]."""
    xmax = max(1.0, float(xmax))
    num = max(2, int(math.ceil(per_decade * math.log10(xmax))) + 1)
    return np.unique(np.round(np.logspace(0.0, math.log10(xmax), num)))


def empirical_ccdf(samples, thresholds=None):
    """P[X >= L] estimated as the fraction of samples at or above each threshold."""
    x = np.sort(np.asarray(samples, dtype=np.float64).reshape(-1))
    if x.size == 0:
        raise EmptySamples("no samples")
    if thresholds is None:
        thresholds = default_thresholds(x[-1])
    thresholds = np.asarray(thresholds, dtype=np.float64)
    below = np.searchsorted(x, thresholds, side="left")
    return CCDF(thresholds, (x.size - below) / x.size)


@dataclass(frozen=True)
class TailFit:
    exponent: float
    window: tuple
    points_used: int
    r_squared: float
    reliable: bool = True

    def as_dict(self):
        return {
            "exponent": self.exponent,
            "window": list(self.window),
            "points_used": self.points_used,
            "r_squared": self.r_squared,
            "reliable": self.reliable,
        }


MIN_FIT_POINTS = 5


def fit_tail(ccdf, q_lo=0.90, q_hi=0.999):
    """Pareto exponent from an OLS line through log P vs log L.

    Only CCDF points whose probability lies in [1 - q_hi, 1 - q_lo] are used,
    i.e. thresholds between the q_lo and q_hi sample quantiles.
    """
    if not 0 <= q_lo < q_hi <= 1:
        raise ValueError(f"need 0 <= q_lo < q_hi <= 1, got ({q_lo}, {q_hi})")
    L = np.asarray(ccdf.thresholds, dtype=np.float64)
    p = np.asarray(ccdf.probabilities, dtype=np.float64)
    sel = (p > 0) & (L > 0) & (p >= 1 - q_hi - 1e-12) & (p <= 1 - q_lo + 1e-12)
    n = int(sel.sum())
    if n < 2:
        return TailFit(math.nan, (q_lo, q_hi), n, math.nan, False)
    lx, ly = np.log(L[sel]), np.log(p[sel])
    if np.ptp(lx) == 0:
        return TailFit(math.nan, (q_lo, q_hi), n, math.nan, False)
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icpt)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return TailFit(float(-slope), (q_lo, q_hi), n, r2, n >= MIN_FIT_POINTS)


@dataclass
class ConditionReport:
    checks: dict = field(default_factory=dict)
    deterministic: tuple = ("pdf_scaling", "homogeneity")

    def add(self, name, passed, **details):
        self.checks[name] = {"passed": bool(passed), **details}

    @property
    def deterministic_ok(self):
        return all(self.checks[n]["passed"] for n in self.deterministic if n in self.checks)

    @property
    def all_ok(self):
        return all(c["passed"] for c in self.checks.values())

    def as_dict(self):
        return {"deterministic_ok": self.deterministic_ok, "all_ok": self.all_ok, "checks": self.checks}


def verify_theorem_conditions(cfg, draws, slope_tol=0.3, samples=None):
    """Empirical and deterministic checks of the tail-equivalence conditions.

    (a) the i.i.d. Gaussian density is non-increasing under H -> aH, a > 1;
    (b) the mean of z^2 = sum(R_ii^2)/2 for direct QRD matches its chi-square
        moment (sigma_H^2/2) sum_i (N - i + 1) within 5 standard errors;
    (c) sub-Gram determinants and the covering bound are homogeneous in H;
    (d) fitted tail slopes of 1/det(R_k^H R_k) and S_k agree within ``slope_tol``.
    """
    if draws < 1000:
        raise ValueError("draws must be >= 1000")
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2**32,)))
    var_h = 1.0 / cfg.m
    report = ConditionReport()

    # (a) log f(H) = log c1 - |H|_F^2 / var_h
    worst = math.inf
    for _ in range(draws):
        h = complex_normal(rng, (cfg.n, cfg.m), var_h)
        fro2 = float(np.sum(np.abs(h) ** 2))
        for a in (1.5, 2.0, 4.0):
            worst = min(worst, (a * a - 1.0) * fro2 / var_h)
    report.add("pdf_scaling", worst >= 0, beta=1.0, min_log_ratio=worst)

    # (b) chi moments of the covering-radius bound for direct QRD
    z2 = np.empty(draws)
    z2_used = np.empty(draws)
    method = Method(cfg.method)
    for i in range(draws):
        h = complex_normal(rng, (cfg.n, cfg.m), var_h)
        z2[i] = covering_radius_ub(preprocess(h, Method.DIRECT).r_tilde) ** 2
        z2_used[i] = (z2[i] if method is Method.DIRECT
                      else covering_radius_ub(preprocess(h, method).r_tilde) ** 2)
    target = 0.5 * var_h * sum(cfg.n - i for i in range(cfg.m))
    se = float(z2.std(ddof=1) / math.sqrt(draws))
    report.add("covering_bound_moment", abs(z2.mean() - target) <= 5 * se,
               mean=float(z2.mean()), target=target, stderr=se,
               mean_decoded_factor=float(z2_used.mean()))

    # (c) homogeneity of g_k and of the covering bound
    homog = True
    for _ in range(min(draws, 200)):
        h = complex_normal(rng, (cfg.n, cfg.m), var_h)
        for b in (2.0, 0.5, 3.0):
            homog &= scaling_invariance_check(h, method, b)
            r = preprocess(h, method).r_tilde
            homog &= abs(covering_radius_ub(b * r) - b * covering_radius_ub(r)) <= 1e-12 * b * covering_radius_ub(r)
    report.add("homogeneity", homog, scales=[2.0, 0.5, 3.0])

    # (d) tail of the inverse fundamental volume vs tail of the layer count
    if samples is None:
        samples = run_trials(TrialConfig(cfg.n, cfg.m, cfg.snr_db, draws, cfg.seed,
                                         cfg.p_find, cfg.method, cfg.node_budget))
    slopes = {}
    ok = True
    for k in range(1, cfg.m + 1):
        fs = samples.fit(k)
        fv = fit_tail(empirical_ccdf(samples.inv_volume[:, k - 1],
                                     float_thresholds(samples.inv_volume[:, k - 1])))
        good = fs.reliable and fv.reliable and abs(fs.exponent - fv.exponent) <= slope_tol
        ok &= good
        slopes[k] = {"S_k": fs.exponent, "inv_volume": fv.exponent, "passed": bool(good)}
    report.add("volume_tail_equivalence", ok, slopes=slopes, trials=samples.trials)
    return report


def float_thresholds(x, per_decade=20):
    """Log grid across the positive range of a continuous sample."""
    x = np.asarray(x)
    lo, hi = float(np.min(x)), float(np.max(x))
    num = max(2, int(math.ceil(per_decade * math.log10(hi / lo))) + 1)
    return np.logspace(math.log10(lo), math.log10(hi), num)
