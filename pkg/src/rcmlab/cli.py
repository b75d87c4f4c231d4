"""Config-driven command line interface with reproducible, hashed run artifacts.

A run is described by one strict JSON config (unknown keys are rejected);
outputs land under a directory keyed by the config hash together with a
manifest recording the hash, seed, library versions and wall time.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .connection import (ConnectionFunction, Gaussian, Indicator, PolyTail, Tabulated,
                         build_graph, graph_to_csv)
from .functionals import (Functional, make_functional, parse_functional,
                          stabilization_trace, trace_records_to_csv)
from .limits import (estimate_component_limit, estimate_h_A, estimate_mean_density,
                     estimate_sigma_AB, limit_results_to_csv)
from .patterns import PatternGraph, builtin_pattern, from_edge_list
from .percolation import (biggest_equals_c_delta_frequency, estimate_beta_nu,
                          estimate_crossing_theta, estimate_kappa,
                          percolation_results_to_csv)
from .points import centered_cube, configuration_to_csv, sample_poisson
from .stats import (clt_report, covariance_report, covariance_to_csv, derive_seeds,
                    quenched_run, reports_to_csv, run_replications, samples_to_csv,
                    variance_scaling)
from .topology import betti_numbers, clique_complex, simplex_counts

MODES = ("sample", "estimate", "clt", "limits", "betti", "stabilize",
         "percolation", "quenched")

OUTPUT_ROOT_ENV = "RCMLAB_OUT"


class ConfigError(ValueError):
    """Raised when the experiment config fails validation; names the field."""


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _take(raw: dict, field_name: str, default=None, required: bool = False):
    if field_name not in raw:
        _require(not required, f"missing required field {field_name!r}")
        return default
    return raw[field_name]


def _no_unknown_keys(raw: dict, allowed: set, where: str) -> None:
    unknown = set(raw) - allowed
    _require(not unknown, f"unknown key(s) {sorted(unknown)} in {where}")


def parse_phi(raw: dict, dim: int) -> ConnectionFunction:
    _require(isinstance(raw, dict), "field 'phi' must be an object")
    variant = _take(raw, "variant", required=True)
    if variant == "indicator":
        _no_unknown_keys(raw, {"variant", "radius"}, "phi")
        return Indicator(dim=dim, radius=float(_take(raw, "radius", 1.0)))
    if variant == "gaussian":
        _no_unknown_keys(raw, {"variant", "scale"}, "phi")
        return Gaussian(dim=dim, scale=float(_take(raw, "scale", 1.0)))
    if variant == "polytail":
        _no_unknown_keys(raw, {"variant", "c0", "epsilon0", "cutoff"}, "phi")
        return PolyTail(dim=dim, c0=float(_take(raw, "c0", 1.0)),
                        epsilon0=float(_take(raw, "epsilon0", 1.0)),
                        cutoff=float(_take(raw, "cutoff", 1.0)))
    if variant == "tabulated":
        _no_unknown_keys(raw, {"variant", "radii", "values"}, "phi")
        return Tabulated(dim=dim, radii=tuple(_take(raw, "radii", required=True)),
                         values=tuple(_take(raw, "values", required=True)))
    raise ConfigError(f"unknown phi variant {variant!r}")


def parse_pattern(raw) -> PatternGraph:
    if isinstance(raw, str):
        return builtin_pattern(raw)
    _require(isinstance(raw, dict), "pattern spec must be a name or an object")
    _no_unknown_keys(raw, {"order", "edges", "name"}, "pattern")
    return from_edge_list(int(_take(raw, "order", required=True)),
                          [tuple(e) for e in _take(raw, "edges", required=True)],
                          name=str(_take(raw, "name", "")))


def parse_functional_spec(raw) -> Functional:
    if isinstance(raw, str):
        return parse_functional(raw)
    _require(isinstance(raw, dict), "functional spec must be a string or an object")
    _no_unknown_keys(raw, {"name", "pattern", "k"}, "functional")
    name = _take(raw, "name", required=True)
    pattern = raw.get("pattern")
    k = raw.get("k")
    return make_functional(name,
                           pattern=parse_pattern(pattern) if pattern is not None else None,
                           k=int(k) if k is not None else None)


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; `raw` is the canonical dict."""

    mode: str
    dimension: int
    intensity: float
    phi: ConnectionFunction
    volumes: tuple
    periodic: bool
    functionals: tuple
    reps: int
    master_seed: int
    output_dir: str | None
    limits_options: dict = field(default_factory=dict)
    percolation_options: dict = field(default_factory=dict)
    quenched_options: dict = field(default_factory=dict)
    betti_options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @property
    def max_volume(self) -> float:
        return self.volumes[-1]


_TOP_KEYS = {"mode", "dimension", "lambda", "phi", "volumes", "periodic",
             "functionals", "reps", "master_seed", "output_dir", "limits",
             "percolation", "quenched", "betti"}


def validate_config(raw: dict) -> ExperimentConfig:
    """Strict validation of a config dict; every failure names the field."""
    _require(isinstance(raw, dict), "config must be a JSON object")
    _no_unknown_keys(raw, _TOP_KEYS, "config")
    mode = _take(raw, "mode", required=True)
    _require(mode in MODES, f"field 'mode' must be one of {MODES}, got {mode!r}")
    dimension = int(_take(raw, "dimension", required=True))
    _require(dimension >= 1, "field 'dimension' must be >= 1")
    intensity = float(_take(raw, "lambda", required=True))
    _require(intensity > 0, "field 'lambda' must be positive")
    phi = parse_phi(_take(raw, "phi", required=True), dimension)
    volumes = tuple(float(v) for v in _take(raw, "volumes", required=True))
    _require(len(volumes) >= 1, "field 'volumes' must be non-empty")
    _require(all(v > 0 for v in volumes), "field 'volumes' must be positive")
    _require(all(b > a for a, b in zip(volumes, volumes[1:])),
             "field 'volumes' must be strictly increasing")
    periodic = bool(_take(raw, "periodic", False))
    functional_specs = _take(raw, "functionals", [])
    functionals = tuple(parse_functional_spec(f) for f in functional_specs)
    reps = int(_take(raw, "reps", 2))
    master_seed = int(_take(raw, "master_seed", required=True))
    output_dir = _take(raw, "output_dir")
    if mode in ("estimate", "clt", "stabilize", "quenched"):
        _require(len(functionals) >= 1, f"mode {mode!r} needs field 'functionals'")
    if mode in ("estimate", "clt", "betti"):
        _require(reps >= 2, "field 'reps' must be >= 2 for replication modes")

    limits_options = dict(_take(raw, "limits", {}) or {})
    _no_unknown_keys(limits_options, {"n_samples", "patterns"}, "limits")
    percolation_options = dict(_take(raw, "percolation", {}) or {})
    _no_unknown_keys(percolation_options,
                     {"delta", "s", "t", "alpha", "active", "lambdas"}, "percolation")
    quenched_options = dict(_take(raw, "quenched", {}) or {})
    _no_unknown_keys(quenched_options, {"edge_reps", "position_draws"}, "quenched")
    betti_options = dict(_take(raw, "betti", {}) or {})
    _no_unknown_keys(betti_options, {"k_max"}, "betti")
    if mode == "limits":
        _require(bool(limits_options.get("patterns")),
                 "mode 'limits' needs limits.patterns")
    if mode == "quenched":
        _require(int(quenched_options.get("edge_reps", 0)) >= 2,
                 "mode 'quenched' needs quenched.edge_reps >= 2")
    if mode == "percolation":
        for key in ("delta", "s", "t"):
            _require(key in percolation_options, f"mode 'percolation' needs percolation.{key}")
    return ExperimentConfig(
        mode=mode, dimension=dimension, intensity=intensity, phi=phi,
        volumes=volumes, periodic=periodic, functionals=functionals, reps=reps,
        master_seed=master_seed, output_dir=output_dir,
        limits_options=limits_options, percolation_options=percolation_options,
        quenched_options=quenched_options, betti_options=betti_options, raw=raw,
    )


def canonical_json(raw: dict) -> str:
    return json.dumps(raw, sort_keys=True, separators=(",", ":"))


def config_hash(raw: dict) -> str:
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# mode runners


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _run_sample(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    outputs = []
    for i, volume in enumerate(cfg.volumes):
        window = centered_cube(cfg.dimension, volume)
        point_seed = int(derive_seeds(cfg.master_seed, i + 1, 0x73616D70)[-1])
        edge_seed = int(derive_seeds(cfg.master_seed, i + 1, 0x65646765)[-1])
        config = sample_poisson(window, cfg.intensity, point_seed)
        graph = build_graph(config, cfg.phi, edge_seed, periodic=cfg.periodic)
        name_c = f"configuration_v{volume:g}.csv"
        name_e = f"edges_v{volume:g}.csv"
        _write(out / name_c, configuration_to_csv(config))
        _write(out / name_e, graph_to_csv(graph))
        outputs += [name_c, name_e]
    return outputs


def _run_estimate(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    window = centered_cube(cfg.dimension, cfg.max_volume)
    lines = ["functional,volume,reps,mean,stderr,mean_over_volume"]
    outputs = []
    for f in cfg.functionals:
        samples = run_replications(f, window, cfg.phi, cfg.intensity, cfg.reps,
                                   cfg.master_seed, periodic=cfg.periodic,
                                   threads=threads)
        name = f"samples_{_slug(f.name)}.csv"
        _write(out / name, samples_to_csv(samples))
        outputs.append(name)
        mean = float(samples.values.mean())
        stderr = float(samples.values.std(ddof=1) / np.sqrt(samples.reps))
        lines.append(f"{f.name},{samples.volume!r},{samples.reps},{mean!r},"
                     f"{stderr!r},{mean / samples.volume!r}")
    _write(out / "estimates.csv", "\n".join(lines) + "\n")
    return outputs + ["estimates.csv"]


def _run_clt(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    outputs = []
    reports = []
    for f in cfg.functionals:
        if len(cfg.volumes) >= 2:
            rows = variance_scaling(f, cfg.volumes, cfg.phi, cfg.intensity, cfg.reps,
                                    cfg.master_seed, periodic=cfg.periodic,
                                    threads=threads)
            reports.extend(r.report for r in rows)
        window = centered_cube(cfg.dimension, cfg.max_volume)
        samples = run_replications(f, window, cfg.phi, cfg.intensity, cfg.reps,
                                   cfg.master_seed, periodic=cfg.periodic,
                                   threads=threads)
        if len(cfg.volumes) < 2:
            reports.append(clt_report(samples))
        name = f"samples_{_slug(f.name)}.csv"
        _write(out / name, samples_to_csv(samples))
        outputs.append(name)
    _write(out / "reports.csv", reports_to_csv(reports))
    outputs.append("reports.csv")
    if len(cfg.functionals) >= 2:
        window = centered_cube(cfg.dimension, cfg.max_volume)
        cov = covariance_report(list(cfg.functionals), window, cfg.phi, cfg.intensity,
                                cfg.reps, cfg.master_seed, periodic=cfg.periodic,
                                threads=threads)
        _write(out / "covariance.csv", covariance_to_csv(cov))
        outputs.append("covariance.csv")
    return outputs


def _run_limits(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    n_samples = int(cfg.limits_options.get("n_samples", 20000))
    rows = []
    phi_spec = cfg.phi.spec_string()
    for raw_pattern in cfg.limits_options["patterns"]:
        pattern = parse_pattern(raw_pattern)
        label = pattern.name or "custom"
        h = estimate_h_A(cfg.phi, cfg.intensity, pattern, n_samples=n_samples,
                         seed=cfg.master_seed)
        rows.append(("h_A", label, phi_spec, cfg.intensity, h, "single"))
        md = estimate_mean_density(pattern, cfg.phi, cfg.intensity,
                                   n_samples=n_samples, seed=cfg.master_seed)
        rows.append(("mean_density", label, phi_spec, cfg.intensity, md, "single"))
        sig = estimate_sigma_AB(pattern, pattern, cfg.phi, cfg.intensity,
                                n_samples=n_samples, seed=cfg.master_seed)
        rows.append(("sigma_AA", label, phi_spec, cfg.intensity, sig, "single"))
        comp = estimate_component_limit(pattern, cfg.phi, cfg.intensity,
                                        n_samples=min(n_samples, 2000),
                                        seed=cfg.master_seed)
        rows.append(("component_limit", label, phi_spec, cfg.intensity,
                     comp.as_printed, "as_printed"))
        rows.append(("component_limit", label, phi_spec, cfg.intensity,
                     comp.lambda_in_exponent, "lambda_in_exponent"))
    _write(out / "limits.csv", limit_results_to_csv(rows))
    return ["limits.csv"]


def _run_betti(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    k_max = int(cfg.betti_options.get("k_max", 1))
    window = centered_cube(cfg.dimension, cfg.max_volume)
    point_seeds = derive_seeds(cfg.master_seed, cfg.reps, 0x706F696E74)
    edge_seeds = derive_seeds(cfg.master_seed, cfg.reps, 0x65646765)
    lines = ["rep,volume,dim,S_j,beta_j"]
    for r in range(cfg.reps):
        config = sample_poisson(window, cfg.intensity, int(point_seeds[r]))
        graph = build_graph(config, cfg.phi, int(edge_seeds[r]), periodic=cfg.periodic)
        complex_ = clique_complex(graph, dim_cap=k_max + 1)
        counts = simplex_counts(complex_)
        betti = betti_numbers(complex_, k_max=k_max)
        for j in range(k_max + 1):
            lines.append(f"{r},{cfg.max_volume!r},{j},{counts[j]},{betti[j]}")
    _write(out / "betti.csv", "\n".join(lines) + "\n")
    return ["betti.csv"]


def _run_stabilize(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    _require(len(cfg.volumes) >= 2, "mode 'stabilize' needs >= 2 volumes")
    max_window = centered_cube(cfg.dimension, cfg.max_volume)
    point_seeds = derive_seeds(cfg.master_seed, cfg.reps, 0x706F696E74)
    edge_seeds = derive_seeds(cfg.master_seed, cfg.reps, 0x65646765)
    records = []
    for f in cfg.functionals:
        for r in range(cfg.reps):
            records.extend(stabilization_trace(
                f, max_window, cfg.volumes, cfg.phi, cfg.intensity,
                int(point_seeds[r]), int(edge_seeds[r])))
    _write(out / "traces.csv", trace_records_to_csv(records))
    return ["traces.csv"]


def _run_percolation(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    opts = cfg.percolation_options
    delta = float(opts["delta"])
    s = float(opts["s"])
    t = float(opts["t"])
    alpha = float(opts.get("alpha", 0.5))
    active = tuple(opts.get("active", range(cfg.dimension)))
    rows = []
    kappa = estimate_kappa(cfg.phi, cfg.intensity, alpha, t, reps=cfg.reps,
                           seed=cfg.master_seed)
    rows.append(("kappa", delta, s, t, alpha, cfg.intensity, kappa))
    theta = estimate_crossing_theta(cfg.phi, cfg.intensity, active, s, t,
                                    reps=cfg.reps, seed=cfg.master_seed, delta=delta)
    rows.append(("theta", delta, s, t, alpha, cfg.intensity, theta))
    beta, nu = estimate_beta_nu(cfg.phi, cfg.intensity, delta, s, t, reps=cfg.reps,
                                seed=cfg.master_seed)
    rows.append(("beta", delta, s, t, alpha, cfg.intensity, beta))
    rows.append(("nu", delta, s, t, alpha, cfg.intensity, nu))
    for lam in opts.get("lambdas", []):
        freq = biggest_equals_c_delta_frequency(
            cfg.phi, float(lam), delta, centered_cube(cfg.dimension, cfg.max_volume),
            reps=cfg.reps, seed=cfg.master_seed)
        rows.append(("full_cluster_frequency", delta, s, t, alpha, float(lam), freq))
    _write(out / "percolation.csv", percolation_results_to_csv(rows))
    return ["percolation.csv"]


def _run_quenched(cfg: ExperimentConfig, out: Path, threads: int) -> list[str]:
    edge_reps = int(cfg.quenched_options.get("edge_reps", 100))
    draws = int(cfg.quenched_options.get("position_draws", 10))
    window = centered_cube(cfg.dimension, cfg.max_volume)
    functional = cfg.functionals[0]
    reference = run_replications(functional, window, cfg.phi, cfg.intensity,
                                 max(cfg.reps, 2), cfg.master_seed,
                                 periodic=cfg.periodic, threads=threads)
    sigma2 = float(np.var(reference.values, ddof=1)) / window.volume()
    position_seeds = derive_seeds(cfg.master_seed, draws, 0x71756E63)
    lines = ["draw,functional,volume,edge_reps,sigma_q2,sigma2_reference,"
             "w2_to_normal,degenerate,ordering_ok"]
    for i in range(draws):
        result = quenched_run(int(position_seeds[i]), edge_reps, functional, window,
                              cfg.phi, cfg.intensity, periodic=cfg.periodic,
                              sigma2_reference=sigma2)
        lines.append(
            f"{i},{functional.name},{window.volume()!r},{edge_reps},"
            f"{result.sigma_q2!r},{sigma2!r},{result.w2_to_normal!r},"
            f"{int(result.degenerate)},{int(bool(result.ordering_ok))}"
        )
    _write(out / "quenched.csv", "\n".join(lines) + "\n")
    return ["quenched.csv"]


_RUNNERS = {
    "sample": _run_sample,
    "estimate": _run_estimate,
    "clt": _run_clt,
    "limits": _run_limits,
    "betti": _run_betti,
    "stabilize": _run_stabilize,
    "percolation": _run_percolation,
    "quenched": _run_quenched,
}


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name).strip("_")


def output_root(cli_out: str | None) -> Path:
    if cli_out:
        return Path(cli_out)
    env = os.environ.get(OUTPUT_ROOT_ENV)
    if env:
        return Path(env)
    return Path("rcmlab_runs")


def run(config_path: str, out_dir: str | None = None, threads: int = 1,
        seed_override: int | None = None) -> int:
    """Execute the configured mode; returns a process exit code (0/1/2)."""
    try:
        raw = json.loads(Path(config_path).read_text())
    except OSError as exc:
        print(f"config error: cannot read {config_path}: {exc}", file=sys.stderr)
        return 1
    except json.JSONDecodeError as exc:
        print(f"config error: invalid JSON in {config_path}: {exc}", file=sys.stderr)
        return 1
    if seed_override is not None:
        if not isinstance(raw, dict):
            print("config error: config must be a JSON object", file=sys.stderr)
            return 1
        raw = dict(raw, master_seed=int(seed_override))
    try:
        cfg = validate_config(raw)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    digest = config_hash(raw)
    root = output_root(out_dir) if cfg.output_dir is None else Path(cfg.output_dir)
    out = root / f"run-{cfg.mode}-{digest}"
    started = time.time()
    try:
        outputs = _RUNNERS[cfg.mode](cfg, out, threads)
    except Exception as exc:  # runtime failure, distinct from bad config
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "config_hash": digest,
        "config": raw,
        "mode": cfg.mode,
        "master_seed": cfg.master_seed,
        "threads": threads,
        "outputs": sorted(outputs),
        "versions": {"rcmlab": __version__, "numpy": np.__version__},
        "wall_time_s": round(time.time() - started, 3),
    }
    _write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(out)
    return 0


# ---------------------------------------------------------------------------
# plot-data bundles


def emit_plot_data(run_dir: str) -> list[Path]:
    """Tidy long-format CSVs for external plotting, derived from run outputs."""
    run = Path(run_dir)
    if not run.is_dir():
        raise ConfigError(f"run directory {run_dir!r} does not exist")
    plot = run / "plot_data"
    written = []
    reports = run / "reports.csv"
    if reports.exists():
        rows = reports.read_text().strip().split("\n")
        header = rows[0].split(",")
        vol_i = header.index("volume")
        vov_i = header.index("variance_over_volume")
        fn_i = header.index("functional")
        lines = ["functional,volume,var_over_volume"]
        for row in rows[1:]:
            parts = row.split(",")
            lines.append(f"{parts[fn_i]},{parts[vol_i]},{parts[vov_i]}")
        path = plot / "variance_scaling.csv"
        _write(path, "\n".join(lines) + "\n")
        written.append(path)
    for samples_file in sorted(run.glob("samples_*.csv")):
        rows = samples_file.read_text().strip().split("\n")[1:]
        values = np.sort(np.array([float(r.split(",")[3]) for r in rows]))
        n = values.size
        if n < 2 or values.std(ddof=1) == 0:
            continue
        z = (values - values.mean()) / values.std(ddof=1)
        from scipy import special
        theo = special.ndtri((np.arange(1, n + 1) - 0.5) / n)
        lines = ["theoretical_quantile,empirical_quantile"]
        lines += [f"{t!r},{e!r}" for t, e in zip(theo, z)]
        path = plot / f"qq_{samples_file.stem}.csv"
        _write(path, "\n".join(lines) + "\n")
        written.append(path)
    traces = run / "traces.csv"
    if traces.exists():
        rows = traces.read_text().strip().split("\n")
        lines = ["volume,d0f_value,case_tag"]
        for row in rows[1:]:
            _, volume, value, tag = row.split(",")
            lines.append(f"{volume},{value},{tag}")
        path = plot / "stabilization_traces.csv"
        _write(path, "\n".join(lines) + "\n")
        written.append(path)
    if not written:
        raise ConfigError(f"no plottable outputs found under {run_dir!r}")
    return written


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="rcmlab",
        description="Random connection model simulation laboratory",
    )
    parser.add_argument("--config", metavar="PATH", help="experiment config JSON")
    parser.add_argument("--threads", type=int, default=1, metavar="N",
                        help="worker pool size (determinism is schedule independent)")
    parser.add_argument("--out", metavar="DIR", default=None,
                        help=f"output root (default ${OUTPUT_ROOT_ENV} or ./rcmlab_runs)")
    parser.add_argument("--seed", type=int, default=None, metavar="OVERRIDE",
                        help="override the config master seed")
    parser.add_argument("--plot-data", metavar="RUNDIR", default=None,
                        help="emit tidy plot CSVs from an existing run directory")
    args = parser.parse_args(argv)
    if args.plot_data is not None:
        try:
            for path in emit_plot_data(args.plot_data):
                print(path)
            return 0
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
    if args.config is None:
        parser.print_usage(sys.stderr)
        print("error: --config or --plot-data is required", file=sys.stderr)
        return 1
    return run(args.config, out_dir=args.out, threads=args.threads,
               seed_override=args.seed)


if __name__ == "__main__":
    sys.exit(main())
