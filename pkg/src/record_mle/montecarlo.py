"""Seeded Monte Carlo checks for the estimators.

Replications are grouped into fixed blocks of ``BLOCK_SIZE``.  Block ``k`` of
a run draws from its own generator, seeded by
``SeedSequence(seed, spawn_key=(stream, k))``, so the numbers produced never
depend on how many worker threads process the blocks or in which order they
finish.  Blocks are concatenated in index order before any reduction.
"""

from __future__ import annotations

import hashlib
import json
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special, stats

from .errors import McRunError
from .estimators import IDENTITY, EstimandTransform, theta_hat_from_statistic
from .family import FamilyMember, check_support, check_theta, quantile
from .records import simulate_record_statistics

__all__ = [
    "BLOCK_SIZE",
    "Source",
    "McReport",
    "CurvePoint",
    "ConsistencyTable",
    "config_digest",
    "draw_statistics",
    "draw_theta_hats",
    "mc_estimate",
    "mc_plugin_curve",
    "consistency_curve",
    "ks_two_sample",
    "ks_one_sample",
    "ks_gamma_gof",
    "sample_vs_records_ks",
]

BLOCK_SIZE = 2048
MAX_FAILURE_RATE = 0.01

_STREAMS = {"sample": 1, "records": 2}


@dataclass(frozen=True)
class Source:
    """Where estimates come from: an i.i.d. sample of size n or the first m records."""

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in _STREAMS:
            raise ValueError(f"source kind must be 'sample' or 'records', got {self.kind!r}")
        if int(self.size) != self.size or self.size < 1:
            raise ValueError(f"source size must be a positive integer, got {self.size}")

    @classmethod
    def sample(cls, n: int) -> "Source":
        return cls("sample", int(n))

    @classmethod
    def records(cls, m: int) -> "Source":
        return cls("records", int(m))

    def __str__(self) -> str:
        return f"{self.kind}({self.size})"


@dataclass
class McReport:
    mean: float
    bias: float
    mse: float
    stderr_of_mse: float
    reps: int
    seed: int
    estimand: str
    config_digest: str
    failures: int = 0
    robust: dict | None = None
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return asdict(self)


class CurvePoint(NamedTuple):
    x: float
    bias: float
    mse: float
    mean: float
    bias_stderr: float
    mse_stderr: float


@dataclass
class ConsistencyTable:
    epsilons: list[float]
    m_grid: list[int]
    exceedance: list[list[float]]  # [eps index][m index]
    reps: int
    seed: int

    def at(self, eps: float, m: int) -> float:
        return self.exceedance[self.epsilons.index(eps)][self.m_grid.index(m)]


def config_digest(config: dict) -> str:
    """Stable short hash of a JSON-serialisable config."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def _block_rng(seed: int, stream: Sequence[int], block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(*stream, block))
    return np.random.Generator(np.random.PCG64(ss))


def _run_blocks(
    fn: Callable[[np.random.Generator, int], np.ndarray],
    reps: int,
    seed: int,
    stream: Sequence[int],
    workers: int = 1,
) -> np.ndarray:
    nblocks = -(-reps // BLOCK_SIZE)
    sizes = [min(BLOCK_SIZE, reps - k * BLOCK_SIZE) for k in range(nblocks)]

    def job(k: int) -> np.ndarray:
        return fn(_block_rng(seed, stream, k), sizes[k])

    if workers <= 1:
        parts = [job(k) for k in range(nblocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, range(nblocks)))
    return np.concatenate(parts)


def draw_statistics(
    member: FamilyMember, theta: float, source: Source, reps: int, seed: int, workers: int = 1
) -> np.ndarray:
    """Draw ``reps`` copies of the sufficient statistic T for ``source``.

    For a sample, T is ``sum A(X_i)`` over inverse-transform draws; for
    records, T is ``A(R'_m)`` of a directly simulated record sequence.
    """
    theta = check_theta(member, theta)
    size = source.size

    if source.kind == "sample":
        tiny = np.finfo(float).tiny

        def block(rng, k):
            u = rng.uniform(tiny, 1.0, size=(k, size))
            xs = quantile(member, theta, u)
            with np.errstate(all="ignore"):
                return np.sum(member.A(xs), axis=1)
    else:
        def block(rng, k):
            stats_ = simulate_record_statistics(member, theta, size, k, rng)
            with np.errstate(all="ignore"):
                last = member.A_inv(stats_[:, -1])
                return np.asarray(member.A(last), dtype=float)

    stream = (_STREAMS[source.kind], size, zlib.crc32(member.label.encode()))
    return _run_blocks(block, reps, seed, stream, workers)


def draw_theta_hats(
    member: FamilyMember, theta: float, source: Source, reps: int, seed: int, workers: int = 1
) -> np.ndarray:
    """``reps`` MLEs of theta; failed inversions are NaN."""
    T = draw_statistics(member, theta, source, reps, seed, workers)
    return theta_hat_from_statistic(member, source.size, T)


def _failure_check(failures: int, reps: int) -> None:
    if failures > MAX_FAILURE_RATE * reps:
        raise McRunError(f"{failures} of {reps} replications failed to invert")


def mc_estimate(
    member: FamilyMember,
    theta: float,
    transform: EstimandTransform = IDENTITY,
    source: Source = Source.sample(10),
    reps: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> McReport:
    """Empirical mean, bias and MSE of ``transform(theta_hat)`` against ``transform(theta)``.

    The standard error of the MSE is the sample standard deviation of the
    squared errors over ``sqrt(reps)``.  For the exp transform the report also
    carries robust summaries, because the true MSE there is infinite.
    """
    if reps < 100:
        raise ValueError(f"need at least 100 replications, got {reps}")
    theta = check_theta(member, theta)
    hats = draw_theta_hats(member, theta, source, reps, seed, workers)
    bad = np.isnan(hats)
    failures = int(bad.sum())
    _failure_check(failures, reps)
    with np.errstate(over="ignore"):
        est = np.asarray(transform.apply(hats[~bad]), dtype=float)
    target = float(transform.apply(theta))
    err = est - target
    sq = err * err
    count = sq.size
    digest = config_digest({
        "member": member.label,
        "theta": theta,
        "transform": transform.name,
        "source": str(source),
        "reps": reps,
    })
    mean = float(np.mean(est))
    report = McReport(
        mean=mean,
        bias=mean - target,
        mse=float(np.mean(sq)),
        stderr_of_mse=float(np.std(sq, ddof=1) / math.sqrt(count)),
        reps=reps,
        seed=int(seed),
        estimand=f"{transform.name}(theta) from {source}",
        config_digest=digest,
        failures=failures,
    )
    if failures:
        report.warnings.append(f"{failures} replications failed to invert and were dropped")
    if transform.name == "exp":
        abs_err = np.abs(err)
        report.robust = {
            "median": float(np.median(est)),
            "trimmed_mean": float(stats.trim_mean(est, 0.1)),
            "median_squared_error": float(np.median(sq)),
            "exceedance_rates": {
                str(c): float(np.mean(abs_err > c)) for c in (0.5, 1.0, 2.0, 5.0)
            },
        }
        report.warnings.append(
            "true MSE of exp(theta_hat) is infinite; the empirical MSE does not converge"
        )
    return report


def mc_plugin_curve(
    member: FamilyMember,
    theta: float,
    m: int,
    x_grid: Sequence[float],
    which: str = "cdf",
    reps: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> list[CurvePoint]:
    """Empirical bias and MSE of the record-based plug-in CDF or PDF along ``x_grid``.

    One set of ``reps`` record sequences is shared by every grid point.
    """
    if which not in ("cdf", "pdf"):
        raise ValueError(f"which must be 'cdf' or 'pdf', got {which!r}")
    if reps < 1000:
        raise ValueError(f"need at least 1000 replications, got {reps}")
    theta = check_theta(member, theta)
    xs = check_support(member, np.asarray(x_grid, dtype=float).ravel())
    T = draw_statistics(member, theta, Source.records(m), reps, seed, workers)
    ok = np.isfinite(T) & (T > 0)
    _failure_check(int((~ok).sum()), reps)
    T = T[ok]
    b = float(member.B(theta))
    out = []
    for x in xs:
        a = float(member.A(x))
        with np.errstate(all="ignore"):
            est = np.exp(-m * a / T)
            if which == "cdf":
                truth = math.exp(-b * a)
            else:
                ap = float(member.A_prime(x))
                est = (-m * ap / T) * est
                truth = -b * ap * math.exp(-b * a)
        err = est - truth
        sq = err * err
        n = err.size
        out.append(CurvePoint(
            x=float(x),
            bias=float(np.mean(err)),
            mse=float(np.mean(sq)),
            mean=float(np.mean(est)),
            bias_stderr=float(np.std(err, ddof=1) / math.sqrt(n)),
            mse_stderr=float(np.std(sq, ddof=1) / math.sqrt(n)),
        ))
    return out


def consistency_curve(
    member: FamilyMember,
    theta: float,
    epsilons: Sequence[float],
    m_grid: Sequence[int],
    reps: int = 10_000,
    seed: int = 0,
    workers: int = 1,
) -> ConsistencyTable:
    """Estimated ``P(|theta_hat_m - theta| > eps)`` for record-based estimates."""
    m_grid = [int(m) for m in m_grid]
    if any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ValueError("m_grid must be strictly increasing")
    if reps < 1000:
        raise ValueError(f"need at least 1000 replications, got {reps}")
    theta = check_theta(member, theta)
    eps = [float(e) for e in epsilons]
    table = [[0.0] * len(m_grid) for _ in eps]
    for j, m in enumerate(m_grid):
        hats = draw_theta_hats(member, theta, Source.records(m), reps, seed, workers)
        bad = np.isnan(hats)
        _failure_check(int(bad.sum()), reps)
        dev = np.abs(hats[~bad] - theta)
        for i, e in enumerate(eps):
            table[i][j] = float(np.mean(dev > e))
    return ConsistencyTable(eps, m_grid, table, reps, int(seed))


def _kolmogorov_sf(stat: float, en: float) -> float:
    # asymptotic Kolmogorov tail with Stephens' finite-size correction
    return float(np.clip(special.kolmogorov((en + 0.12 + 0.11 / en) * stat), 0.0, 1.0))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if a.size < 10 or b.size < 10:
        raise ValueError("each sample needs at least 10 values")
    n1, n2 = a.size, b.size
    grid = np.concatenate([a, b])
    cdf1 = np.searchsorted(a, grid, side="right") / n1
    cdf2 = np.searchsorted(b, grid, side="right") / n2
    stat = float(np.max(np.abs(cdf1 - cdf2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return stat, _kolmogorov_sf(stat, en)


def ks_one_sample(data: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> tuple[float, float]:
    """One-sample KS test against a continuous CDF; p-value from the exact law of D_n."""
    x = np.sort(np.asarray(data, dtype=float).ravel())
    n = x.size
    if n < 10:
        raise ValueError("need at least 10 values")
    F = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    stat = float(max(np.max(i / n - F), np.max(F - (i - 1) / n)))
    return stat, float(stats.kstwo.sf(stat, n))


def ks_gamma_gof(data: Sequence[float], shape: float, rate: float) -> tuple[float, float]:
    """One-sample KS test against Gamma(shape, rate) via the regularized incomplete gamma."""
    x = np.asarray(data, dtype=float).ravel()
    if x.size < 10:
        raise ValueError("need at least 10 values")
    if np.any(x <= 0):
        raise ValueError("gamma goodness of fit needs strictly positive data")
    if not (shape > 0 and rate > 0):
        raise ValueError("shape and rate must be positive")
    return ks_one_sample(x, lambda t: special.gammainc(shape, rate * t))


def sample_vs_records_ks(
    member: FamilyMember, theta: float, size: int, reps: int, seed: int, workers: int = 1
) -> tuple[float, float]:
    """Two-sample KS between sample-based and record-based theta_hat with n = m = size."""
    a = draw_theta_hats(member, theta, Source.sample(size), reps, seed, workers)
    b = draw_theta_hats(member, theta, Source.records(size), reps, seed, workers)
    return ks_two_sample(a[~np.isnan(a)], b[~np.isnan(b)])
