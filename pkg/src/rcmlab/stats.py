"""Replication harness: LLN/CLT verdicts over independent simulator runs.

Per-replication seeds are pre-assigned from the master seed, accumulation
slots are fixed up front, and every report is a pure function of the run
description, so results are identical at any worker-pool size.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import special

from .connection import ConnectionFunction, build_graph
from .functionals import Functional
from .points import Window, sample_poisson


class StatsError(ValueError):
    """Raised on invalid replication requests."""


_POINT_STREAM = 0x706F696E74  # b'point'
_EDGE_STREAM = 0x65646765    # b'edge'


def derive_seeds(master_seed: int, count: int, stream: int) -> np.ndarray:
    """Deterministic per-replication sub-seeds for one named stream."""
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, int(stream)])
    return ss.generate_state(count, dtype=np.uint64)


@dataclass(frozen=True)
class SampleSet:
    """Functional values over independent replications."""

    functional: str
    volume: float
    values: np.ndarray
    master_seed: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def reps(self) -> int:
        return int(self.values.size)


def run_replications(functional: Functional, window: Window, phi: ConnectionFunction,
                     intensity: float, reps: int, master_seed: int,
                     periodic: bool = False, threads: int = 1) -> SampleSet:
    """Evaluate the functional on ``reps`` independent point+edge realizations."""
    if reps < 2:
        raise StatsError("need at least 2 replications")
    point_seeds = derive_seeds(master_seed, reps, _POINT_STREAM)
    edge_seeds = derive_seeds(master_seed, reps, _EDGE_STREAM)
    values = np.empty(reps, dtype=float)

    def one(r: int) -> None:
        config = sample_poisson(window, intensity, int(point_seeds[r]))
        graph = build_graph(config, phi, int(edge_seeds[r]), periodic=periodic)
        values[r] = functional.value(graph)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(reps)))
    else:
        for r in range(reps):
            one(r)
    return SampleSet(functional=functional.name, volume=window.volume(),
                     values=values, master_seed=int(master_seed))


# ---------------------------------------------------------------------------
# moments and normality


def _running_moments(values: np.ndarray) -> tuple[float, float, float, float]:
    """Stable one-pass mean, variance (ddof=1), skewness, excess kurtosis."""
    n = 0
    mean = m2 = m3 = m4 = 0.0
    for x in values:
        n += 1
        delta = x - mean
        dn = delta / n
        t1 = delta * dn * (n - 1)
        mean += dn
        m4 += t1 * dn * dn * (n * n - 3 * n + 3) + 6 * dn * dn * m2 - 4 * dn * m3
        m3 += t1 * dn * (n - 2) - 3 * dn * m2
        m2 += t1
    if n < 2 or m2 == 0.0:
        return mean, 0.0, 0.0, 0.0
    variance = m2 / (n - 1)
    skew = math.sqrt(n) * m3 / m2 ** 1.5
    kurt = n * m4 / (m2 * m2) - 3.0
    return mean, variance, skew, kurt


def ks_statistic_normal(standardized: np.ndarray) -> float:
    """One-sample KS distance of the sample from the standard normal."""
    z = np.sort(np.asarray(standardized, dtype=float))
    n = z.size
    cdf = special.ndtr(z)
    upper = np.arange(1, n + 1) / n - cdf
    lower = cdf - np.arange(0, n) / n
    return float(max(upper.max(), lower.max()))


def ks_pvalue_asymptotic(d: float, n: int) -> float:
    """Asymptotic Kolmogorov p-value of a one-sample KS distance."""
    return float(special.kolmogorov(d * math.sqrt(n)))


def ks_pvalue_bootstrap(d_observed: float, n: int, n_boot: int = 1000,
                        seed: int = 20210) -> float:
    """Parametric bootstrap p-value for KS with estimated mean and variance.

    The naive asymptotic p-value over-rejects when the normal parameters
    are fitted from the data (the Lilliefors effect); this calibrates the
    null by re-standardizing simulated normal samples.
    """
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_boot):
        z = rng.standard_normal(n)
        z = (z - z.mean()) / z.std(ddof=1)
        if ks_statistic_normal(z) >= d_observed:
            hits += 1
    return (1 + hits) / (n_boot + 1)


@dataclass(frozen=True)
class CltReport:
    """Moment and normality summary of a replication sample."""

    functional: str
    volume: float
    reps: int
    mean: float
    variance: float
    variance_over_volume: float
    skewness: float
    excess_kurtosis: float
    ks_stat: float
    ks_pvalue: float
    ks_pvalue_bootstrap: float
    degenerate: bool


def clt_report(samples: SampleSet, n_boot: int = 1000) -> CltReport:
    """Standardize by the sample mean/sd and test against the normal limit."""
    values = samples.values
    mean, variance, skew, kurt = _running_moments(values)
    if variance <= 0.0:
        return CltReport(
            functional=samples.functional, volume=samples.volume, reps=samples.reps,
            mean=mean, variance=0.0, variance_over_volume=0.0, skewness=0.0,
            excess_kurtosis=0.0, ks_stat=float("nan"), ks_pvalue=float("nan"),
            ks_pvalue_bootstrap=float("nan"), degenerate=True,
        )
    z = (values - mean) / math.sqrt(variance)
    d = ks_statistic_normal(z)
    return CltReport(
        functional=samples.functional, volume=samples.volume, reps=samples.reps,
        mean=mean, variance=variance, variance_over_volume=variance / samples.volume,
        skewness=skew, excess_kurtosis=kurt, ks_stat=d,
        ks_pvalue=ks_pvalue_asymptotic(d, samples.reps),
        ks_pvalue_bootstrap=ks_pvalue_bootstrap(d, samples.reps, n_boot=n_boot),
        degenerate=False,
    )


# ---------------------------------------------------------------------------
# variance scaling and covariance


@dataclass(frozen=True)
class ScalingRow:
    volume: float
    report: CltReport


def variance_scaling(functional: Functional, volumes, phi: ConnectionFunction,
                     intensity: float, reps: int, master_seed: int,
                     periodic: bool = False, threads: int = 1) -> list[ScalingRow]:
    """Per-volume CLT reports; the Var/|W| column flattening is the evidence."""
    from .points import centered_cube

    vols = [float(v) for v in volumes]
    if len(vols) < 2:
        raise StatsError("variance scaling needs at least two volumes")
    rows = []
    for i, v in enumerate(vols):
        samples = run_replications(functional, centered_cube(phi.dim, v), phi,
                                   intensity, reps, master_seed + i,
                                   periodic=periodic, threads=threads)
        rows.append(ScalingRow(volume=v, report=clt_report(samples)))
    return rows


@dataclass(frozen=True)
class CovarianceReport:
    functionals: tuple
    volume: float
    reps: int
    matrix: np.ndarray               # empirical covariance / volume
    polarization_matrix: np.ndarray  # same via 1/4 (Var[X+Y] - Var[X-Y])

    def max_polarization_gap(self) -> float:
        return float(np.abs(self.matrix - self.polarization_matrix).max())


def covariance_report(functionals: list[Functional], window: Window,
                      phi: ConnectionFunction, intensity: float, reps: int,
                      master_seed: int, periodic: bool = False,
                      threads: int = 1) -> CovarianceReport:
    """Empirical covariance matrix of per-replication functional vectors.

    Each replication evaluates every functional on the same graph; the
    polarization identity on sums and differences cross-checks the matrix.
    """
    if len(functionals) < 2:
        raise StatsError("covariance report needs at least two functionals")
    if reps < 2:
        raise StatsError("need at least 2 replications")
    point_seeds = derive_seeds(master_seed, reps, _POINT_STREAM)
    edge_seeds = derive_seeds(master_seed, reps, _EDGE_STREAM)
    table = np.empty((reps, len(functionals)), dtype=float)

    def one(r: int) -> None:
        config = sample_poisson(window, intensity, int(point_seeds[r]))
        graph = build_graph(config, phi, int(edge_seeds[r]), periodic=periodic)
        for j, f in enumerate(functionals):
            table[r, j] = f.value(graph)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(reps)))
    else:
        for r in range(reps):
            one(r)
    volume = window.volume()
    matrix = np.cov(table, rowvar=False, ddof=1) / volume
    m = len(functionals)
    polar = np.empty((m, m))
    for i in range(m):
        for j in range(m):
            vp = float(np.var(table[:, i] + table[:, j], ddof=1))
            vm = float(np.var(table[:, i] - table[:, j], ddof=1))
            polar[i, j] = 0.25 * (vp - vm) / volume
    return CovarianceReport(
        functionals=tuple(f.name for f in functionals), volume=volume, reps=reps,
        matrix=matrix, polarization_matrix=polar,
    )


# ---------------------------------------------------------------------------
# quenched experiment


def wasserstein2_to_normal(values: np.ndarray, sigma2: float) -> float:
    """Quantile-coupling W2 between the empirical law and N(0, sigma2)."""
    z = np.sort(np.asarray(values, dtype=float))
    n = z.size
    quantiles = special.ndtri((np.arange(1, n + 1) - 0.5) / n) * math.sqrt(max(sigma2, 0.0))
    return float(math.sqrt(np.mean((z - quantiles) ** 2)))


@dataclass(frozen=True)
class QuenchedResult:
    """Conditional (frozen-positions) CLT sample and variance summary."""

    samples: SampleSet            # standardized Z values over edge replications
    sigma_q2: float               # conditional variance / volume
    conditional_mean: float
    degenerate: bool              # no edge randomness reached the functional
    w2_to_normal: float
    ordering_ok: bool | None      # sigma_q2 <= sigma2_reference + tolerance


def quenched_run(positions_seed: int, edge_reps: int, functional: Functional,
                 window: Window, phi: ConnectionFunction, intensity: float,
                 periodic: bool = False, sigma2_reference: float | None = None,
                 ordering_tolerance: float = 0.0) -> QuenchedResult:
    """Freeze one point configuration and replicate only the edge randomness.

    Z values are centered by the conditional empirical mean and scaled by
    sqrt(volume); their variance estimates the quenched limit variance,
    which the total-variance decomposition bounds by the unconditional one.
    """
    if edge_reps < 2:
        raise StatsError("need at least 2 edge replications")
    config = sample_poisson(window, intensity, positions_seed)
    edge_seeds = derive_seeds(positions_seed, edge_reps, _EDGE_STREAM)
    values = np.empty(edge_reps, dtype=float)
    for r in range(edge_reps):
        graph = build_graph(config, phi, int(edge_seeds[r]), periodic=periodic)
        values[r] = functional.value(graph)
    volume = window.volume()
    cond_mean = float(values.mean())
    z = (values - cond_mean) / math.sqrt(volume)
    sigma_q2 = float(np.var(values, ddof=1)) / volume
    degenerate = sigma_q2 == 0.0
    ordering = None
    if sigma2_reference is not None:
        ordering = sigma_q2 <= sigma2_reference + ordering_tolerance
    return QuenchedResult(
        samples=SampleSet(functional=f"quenched[{functional.name}]", volume=volume,
                          values=z, master_seed=int(positions_seed)),
        sigma_q2=sigma_q2, conditional_mean=cond_mean, degenerate=degenerate,
        w2_to_normal=wasserstein2_to_normal(z, sigma_q2), ordering_ok=ordering,
    )


# ---------------------------------------------------------------------------
# serialization


def samples_to_csv(samples: SampleSet) -> str:
    lines = ["functional,volume,rep,value"]
    for r, v in enumerate(samples.values):
        lines.append(f"{samples.functional},{samples.volume!r},{r},{float(v)!r}")
    return "\n".join(lines) + "\n"


def reports_to_csv(reports: list[CltReport]) -> str:
    header = ("functional,volume,reps,mean,variance,variance_over_volume,"
              "skewness,excess_kurtosis,ks_stat,ks_pvalue,ks_pvalue_bootstrap,degenerate")
    lines = [header]
    for rep in reports:
        lines.append(
            f"{rep.functional},{rep.volume!r},{rep.reps},{rep.mean!r},{rep.variance!r},"
            f"{rep.variance_over_volume!r},{rep.skewness!r},{rep.excess_kurtosis!r},"
            f"{rep.ks_stat!r},{rep.ks_pvalue!r},{rep.ks_pvalue_bootstrap!r},"
            f"{int(rep.degenerate)}"
        )
    return "\n".join(lines) + "\n"


def covariance_to_csv(report: CovarianceReport) -> str:
    lines = ["row,col,value"]
    for i, a in enumerate(report.functionals):
        for j, b in enumerate(report.functionals):
            lines.append(f"{a},{b},{float(report.matrix[i, j])!r}")
    return "\n".join(lines) + "\n"
