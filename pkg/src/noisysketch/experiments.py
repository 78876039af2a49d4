"""Monte Carlo harness: named experiments, trial records, reports.

Six named experiments share one skeleton: derive a per-trial key from
``mix(master_seed, trial_index)``, split it into an operator seed and a
noise seed (so corruption stays independent of the sketch), run the
trial, and aggregate.  Reports carry the effective config, the per-trial
records, aggregates recomputable from the records alone, and the
theoretical comparators the run is judged against.

Trials are pure functions of their derived seed, so the harness may run
them on any number of threads; records are assembled in trial order and
reports are bit-identical regardless.
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng
from .bounds import (
    EmbeddingParams,
    NoiseTailParams,
    hashing_m,
    norm_slack,
    nu_bar,
    sampling_m,
    solve_n0,
    tail_bounds,
    noisy_norm_interval,
    noisy_nu_bound,
)
from .errors import BadParams
from .noise import NoiseModel, corrupt, corrupt_streaming
from .sketch import GAUSSIAN, HASHING, KINDS, SAMPLING, apply, embedding_distortion, make_operator
from .vectors import Vector, norm2_sq, nu

EXPERIMENT_NAMES = (
    "fig1",
    "fig2",
    "appendix_nu",
    "oblivious_rate",
    "interval_coverage",
    "nu_coverage",
)
NORMALIZATIONS = ("sigma2n", "one_plus_sigma2n")
SIGNALS = ("one_hot", "k_sparse_equal")

TRIALS_CSV_HEADER = "trial,distortion,noisy_norm_sq,nu_noisy,in_interval"
PLOT_CSV_HEADER = "x,y"


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    trials: int = 100
    master_seed: int = 0
    n: int = 1000
    m: int | None = None
    signal: str = "k_sparse_equal"
    signal_k: int = 3
    sigma: float | None = None
    operator: str = SAMPLING
    hash_s: int = 1
    eps_s: float = 0.5
    delta_s: float = 0.1
    E: float = math.e
    C2: float = 1.0
    eps: float = 0.1
    t: float = 3.0
    C1: float = 2.0
    normalization: str = "sigma2n"
    noisy: bool = False
    grid_min: int = 10**4
    grid_max: int = 10**7
    grid_points: int = 20

    def __post_init__(self):
        if self.name not in EXPERIMENT_NAMES:
            raise BadParams(f"unknown experiment {self.name!r}")
        if self.trials < 1:
            raise BadParams(f"trials must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 1 << 64:
            raise BadParams(f"master_seed must be a 64-bit unsigned integer")
        if self.signal not in SIGNALS:
            raise BadParams(f"unknown signal {self.signal!r}")
        if self.operator not in KINDS:
            raise BadParams(f"unknown operator {self.operator!r}")
        if self.normalization not in NORMALIZATIONS:
            raise BadParams(f"unknown normalization {self.normalization!r}")
        if self.sigma is not None and not self.sigma > 0:
            raise BadParams(f"sigma must be positive, got {self.sigma}")
        if self.name in ("fig2", "appendix_nu", "interval_coverage", "nu_coverage") and self.sigma is None:
            raise BadParams(f"{self.name} requires a noise level sigma")
        if self.noisy and self.sigma is None:
            raise BadParams("noisy runs require a noise level sigma")


@dataclass(frozen=True)
class TrialRecord:
    trial_index: int
    distortion: float
    noisy_norm_sq: float | None = None
    nu_noisy: float | None = None
    in_interval: bool | None = None

    def __post_init__(self):
        if self.distortion < 0:
            raise BadParams(f"distortion must be nonnegative, got {self.distortion}")


@dataclass
class ExperimentReport:
    config: dict
    records: list
    aggregates: dict
    comparators: dict = field(default_factory=dict)


_DEFAULTS = {
    "fig1": dict(trials=100, n=1000, m=100, signal="k_sparse_equal", signal_k=3,
                 operator=SAMPLING),
    "fig2": dict(trials=100, n=1000, m=100, signal="k_sparse_equal", signal_k=3,
                 operator=SAMPLING, sigma=0.1, noisy=True),
    "appendix_nu": dict(trials=20, signal="one_hot", sigma=0.01, n=10**4),
    "oblivious_rate": dict(trials=10**4, n=1000, signal="one_hot", operator=GAUSSIAN,
                           sigma=0.1),
    "interval_coverage": dict(trials=10**4, n=10**4, signal="one_hot", sigma=0.01),
    "nu_coverage": dict(trials=10**4, n=10**4, signal="one_hot", sigma=0.01),
}


def default_config(name: str, **overrides) -> ExperimentConfig:
    """Config with per-experiment defaults, selectively overridden."""
    if name not in _DEFAULTS:
        raise BadParams(f"unknown experiment {name!r}")
    merged = dict(_DEFAULTS[name])
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(name=name, **merged)


def make_signal(cfg: ExperimentConfig) -> Vector:
    if cfg.signal == "one_hot":
        return Vector.one_hot(cfg.n)
    return Vector.k_sparse_equal(cfg.n, cfg.signal_k)


def trial_seeds(master_seed: int, trial_index: int) -> tuple[int, int]:
    """(operator seed, noise seed) for one trial, from the documented mixer."""
    key = rng.child_key(rng.stream_key(master_seed, rng.DOMAIN_TRIAL), trial_index)
    return int(rng.uniform64(key, 0)), int(rng.uniform64(key, 1))


def _run_trials(worker, count: int, threads: int) -> list:
    if threads <= 1:
        return [worker(t) for t in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(worker, range(count)))


# ---------------------------------------------------------------- aggregates

def _mean(vals) -> float:
    return math.fsum(vals) / len(vals)


def _sample_std(vals) -> float:
    if len(vals) < 2:
        return 0.0
    mu = _mean(vals)
    return math.sqrt(math.fsum((v - mu) ** 2 for v in vals) / (len(vals) - 1))


def binomial_se(rate: float, trials: int) -> float:
    return math.sqrt(rate * (1.0 - rate) / trials)


def _ols_slope(xs, ys) -> float:
    xbar, ybar = _mean(xs), _mean(ys)
    sxy = math.fsum((x - xbar) * (y - ybar) for x, y in zip(xs, ys))
    sxx = math.fsum((x - xbar) ** 2 for x in xs)
    return sxy / sxx


def compute_aggregates(name: str, records, config: dict) -> dict:
    """Aggregates from the records (plus config echo); used both for the
    in-memory report and to re-derive aggregates from an emitted CSV."""
    dist = [r.distortion for r in records]
    agg = {
        "trials": len(records),
        "mean": _mean(dist),
        "std": _sample_std(dist),
        "min": min(dist),
        "max": max(dist),
    }
    if name in ("fig1", "fig2"):
        agg["zero_fraction"] = sum(1 for d in dist if d == 0.0) / len(dist)
    if name in ("oblivious_rate", "interval_coverage", "nu_coverage"):
        rate = sum(1 for r in records if r.in_interval) / len(records)
        agg["success_rate"] = rate
        agg["success_se"] = binomial_se(rate, len(records))
    if name == "appendix_nu":
        grid = config["grid_n"]
        xs = [math.log(math.sqrt(math.log(n) / n)) for n in grid]
        ys = [math.log(r.nu_noisy) for r in records]
        agg["slope"] = _ols_slope(xs, ys)
    return agg


# ------------------------------------------------------------------- runners

def _config_echo(cfg: ExperimentConfig, **extra) -> dict:
    echo = asdict(cfg)
    echo.update(extra)
    return echo


def _require(cond: bool, msg: str):
    if not cond:
        raise BadParams(msg)


def run_fig1(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Sketch a fixed sparse signal with fresh sampling operators, no noise."""
    _require(cfg.name == "fig1", f"config names {cfg.name}, not fig1")
    _require(cfg.operator == SAMPLING, "fig1 uses the sampling operator")
    _require(not cfg.noisy and cfg.sigma is None, "fig1 is the clean baseline")
    x = make_signal(cfg)
    m = cfg.m if cfg.m is not None else 100

    def worker(t):
        op_seed, _ = trial_seeds(cfg.master_seed, t)
        op = make_operator(SAMPLING, m, cfg.n, op_seed)
        return TrialRecord(t, embedding_distortion(op, x))

    records = _run_trials(worker, cfg.trials, threads)
    config = _config_echo(cfg, m=m)
    aggregates = compute_aggregates("fig1", records, config)
    comparators = {
        "expected_zero_fraction": (1.0 - x.nnz / cfg.n) ** m,
        "expected_mean": 1.0,
    }
    return ExperimentReport(config, records, aggregates, comparators)


def run_fig2(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Same sampling sketch with fresh additive noise per trial."""
    _require(cfg.name == "fig2", f"config names {cfg.name}, not fig2")
    _require(cfg.operator == SAMPLING, "fig2 uses the sampling operator")
    _require(cfg.sigma is not None, "fig2 requires a noise level sigma")
    x = make_signal(cfg)
    m = cfg.m if cfg.m is not None else 100
    nx2 = norm2_sq(x)
    s2n = cfg.sigma * cfg.sigma * cfg.n
    norm_factor = s2n if cfg.normalization == "sigma2n" else 1.0 + s2n
    denom = norm_factor * nx2

    def worker(t):
        op_seed, noise_seed = trial_seeds(cfg.master_seed, t)
        xt = corrupt(x, NoiseModel(cfg.sigma, noise_seed))
        op = make_operator(SAMPLING, m, cfg.n, op_seed)
        d = norm2_sq(apply(op, xt)) / denom
        return TrialRecord(t, d, noisy_norm_sq=norm2_sq(xt), nu_noisy=nu(xt))

    records = _run_trials(worker, cfg.trials, threads)
    config = _config_echo(cfg, m=m)
    aggregates = compute_aggregates("fig2", records, config)

    # paired clean run: same seeds, same operator budget, no noise
    clean = run_fig1(
        default_config("fig1", trials=cfg.trials, master_seed=cfg.master_seed,
                       n=cfg.n, m=m, signal=cfg.signal, signal_k=cfg.signal_k),
        threads=threads,
    )
    comparators = {
        "expected_mean": (1.0 + s2n) / norm_factor,
        "clean_std": clean.aggregates["std"],
        "std_ratio": aggregates["std"] / clean.aggregates["std"],
    }
    return ExperimentReport(config, records, aggregates, comparators)


def appendix_grid(cfg: ExperimentConfig) -> list[int]:
    """Log-spaced dimension grid, rounded to unique integers."""
    pts = np.logspace(math.log10(cfg.grid_min), math.log10(cfg.grid_max), cfg.grid_points)
    return np.unique(np.round(pts).astype(np.int64)).tolist()


def run_appendix_nu(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Non-uniformity of a corrupted one-hot signal across a dimension grid.

    One streaming draw per grid point; the tracked distortion column is the
    ratio of the observed non-uniformity to the sqrt(log(n)/n) reference.
    """
    _require(cfg.name == "appendix_nu", f"config names {cfg.name}, not appendix_nu")
    _require(cfg.signal == "one_hot", "the grid experiment uses a one-hot signal")
    grid = appendix_grid(cfg)

    def worker(k):
        n = grid[k]
        _, noise_seed = trial_seeds(cfg.master_seed, k)
        stats = corrupt_streaming(Vector.one_hot(n), NoiseModel(cfg.sigma, noise_seed))
        ref = math.sqrt(math.log(n) / n)
        return TrialRecord(k, stats.nu_noisy / ref,
                           noisy_norm_sq=stats.norm2_sq_noisy, nu_noisy=stats.nu_noisy)

    records = _run_trials(worker, len(grid), threads)
    config = _config_echo(cfg, trials=len(grid), grid_n=grid)
    aggregates = compute_aggregates("appendix_nu", records, config)
    comparators = {"target_slope": 1.0}
    return ExperimentReport(config, records, aggregates, comparators)


def run_oblivious_rate(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """Empirical success rate of the distortion band vs the guaranteed rate.

    Clean runs test the plain band |d - 1| <= eps_s against 1 - delta_s.
    Noisy runs corrupt the signal each trial, normalize the sketched norm
    by (1 + sigma^2 n) ||x||^2, widen the band by the noisy-norm slack, and
    compare against the product of the noise-event and embedding rates.
    """
    _require(cfg.name == "oblivious_rate", f"config names {cfg.name}, not oblivious_rate")
    x = make_signal(cfg)
    p = EmbeddingParams(cfg.eps_s, cfg.delta_s, cfg.E, cfg.C2)
    nx2 = norm2_sq(x)
    comparators: dict = {"nu_bar": nu_bar(p)}
    if cfg.noisy:
        q = NoiseTailParams(cfg.eps, cfg.t, cfg.C1, cfg.sigma)
        if cfg.m is not None:
            m = cfg.m
        elif cfg.operator == SAMPLING:
            m = sampling_m(nu(x), cfg.n, p, q)
        else:
            m = hashing_m(p)
        slack = norm_slack(q, cfg.n)
        tb = tail_bounds(cfg.n, q)
        target = (1.0 - tb.combined) * (1.0 - cfg.delta_s)
        comparators.update(
            n0_solved=solve_n0(nu(x), p, q),
            noise_event_bound=1.0 - tb.combined,
            nu_noisy_bound=noisy_nu_bound(nu(x), cfg.n, q),
        )
    else:
        m = cfg.m if cfg.m is not None else hashing_m(p)
        slack = 0.0
        target = 1.0 - cfg.delta_s
    lo = (1.0 - cfg.eps_s) * (1.0 - slack)
    hi = (1.0 + cfg.eps_s) * (1.0 + slack)
    hash_s = cfg.hash_s if cfg.operator == HASHING else None
    denom = (1.0 + cfg.sigma * cfg.sigma * cfg.n) * nx2 if cfg.noisy else None

    def worker(t):
        op_seed, noise_seed = trial_seeds(cfg.master_seed, t)
        op = make_operator(cfg.operator, m, cfg.n, op_seed, hash_s)
        if cfg.noisy:
            xt = corrupt(x, NoiseModel(cfg.sigma, noise_seed))
            d = norm2_sq(apply(op, xt)) / denom
            return TrialRecord(t, d, noisy_norm_sq=norm2_sq(xt), nu_noisy=nu(xt),
                               in_interval=lo <= d <= hi)
        d = embedding_distortion(op, x)
        return TrialRecord(t, d, in_interval=lo <= d <= hi)

    records = _run_trials(worker, cfg.trials, threads)
    config = _config_echo(cfg, m=m)
    aggregates = compute_aggregates("oblivious_rate", records, config)
    comparators.update(m_used=m, target_rate=target, band_lo=lo, band_hi=hi, slack=slack)
    return ExperimentReport(config, records, aggregates, comparators)


def _coverage_report(cfg: ExperimentConfig, threads: int, check_nu: bool) -> ExperimentReport:
    x = make_signal(cfg)
    q = NoiseTailParams(cfg.eps, cfg.t, cfg.C1, cfg.sigma)
    nx2 = norm2_sq(x)
    denom = (1.0 + cfg.sigma * cfg.sigma * cfg.n) * nx2
    lo, hi = noisy_norm_interval(nx2, cfg.n, q)
    bound = noisy_nu_bound(nu(x), cfg.n, q)
    chi = 2.0 * math.exp(-cfg.n * cfg.eps * cfg.eps / 12.0)
    peak_fail = 2.0 * math.exp(-cfg.t * cfg.t / 2.0)
    extra = (2.0 * cfg.n) ** -(cfg.C1 - 1.0)
    if check_nu:
        fail = min(1.0, chi + peak_fail + extra)
    else:
        fail = min(1.0, chi + peak_fail)

    def worker(t):
        _, noise_seed = trial_seeds(cfg.master_seed, t)
        stats = corrupt_streaming(x, NoiseModel(cfg.sigma, noise_seed))
        if check_nu:
            ok = stats.nu_noisy <= bound
        else:
            ok = lo <= stats.norm2_sq_noisy <= hi
        return TrialRecord(t, stats.norm2_sq_noisy / denom,
                           noisy_norm_sq=stats.norm2_sq_noisy,
                           nu_noisy=stats.nu_noisy, in_interval=ok)

    records = _run_trials(worker, cfg.trials, threads)
    config = _config_echo(cfg)
    aggregates = compute_aggregates(cfg.name, records, config)
    comparators = {
        "coverage_lower_bound": 1.0 - fail,
        "interval_lo": lo,
        "interval_hi": hi,
        "nu_bound": bound,
        "tail_chi_sq": chi,
        "tail_peak": peak_fail,
        "tail_extra": extra,
    }
    return ExperimentReport(config, records, aggregates, comparators)


def run_interval_coverage(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """How often the corrupted squared norm lands in its two-sided interval."""
    _require(cfg.name == "interval_coverage", f"config names {cfg.name}")
    return _coverage_report(cfg, threads, check_nu=False)


def run_nu_coverage(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    """How often the corrupted non-uniformity stays below its bound."""
    _require(cfg.name == "nu_coverage", f"config names {cfg.name}")
    return _coverage_report(cfg, threads, check_nu=True)


_RUNNERS = {
    "fig1": run_fig1,
    "fig2": run_fig2,
    "appendix_nu": run_appendix_nu,
    "oblivious_rate": run_oblivious_rate,
    "interval_coverage": run_interval_coverage,
    "nu_coverage": run_nu_coverage,
}


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> ExperimentReport:
    return _RUNNERS[cfg.name](cfg, threads=threads)


# ------------------------------------------------------------------ emission

def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    return repr(value)


def trials_csv_lines(report: ExperimentReport) -> list[str]:
    lines = [TRIALS_CSV_HEADER]
    for r in report.records:
        lines.append(
            f"{r.trial_index},{_csv_cell(r.distortion)},{_csv_cell(r.noisy_norm_sq)},"
            f"{_csv_cell(r.nu_noisy)},{_csv_cell(r.in_interval)}"
        )
    return lines


def parse_trials_csv(text: str) -> list[TrialRecord]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != TRIALS_CSV_HEADER:
        raise ValueError("missing trials CSV header")
    records = []
    for ln in lines[1:]:
        trial, dist, nn, nun, ini = ln.split(",")
        records.append(TrialRecord(
            int(trial),
            float(dist),
            noisy_norm_sq=float(nn) if nn else None,
            nu_noisy=float(nun) if nun else None,
            in_interval=(ini == "1") if ini else None,
        ))
    return records


def plot_data_lines(report: ExperimentReport) -> list[str]:
    """Figure-ready x,y pairs per experiment."""
    name = report.config["name"]
    lines = [PLOT_CSV_HEADER]
    if name == "appendix_nu":
        for n, r in zip(report.config["grid_n"], report.records):
            lines.append(f"{math.sqrt(math.log(n) / n)!r},{r.nu_noisy!r}")
    elif name == "interval_coverage":
        for r in report.records:
            lines.append(f"{r.trial_index},{r.noisy_norm_sq!r}")
    elif name == "nu_coverage":
        for r in report.records:
            lines.append(f"{r.trial_index},{r.nu_noisy!r}")
    else:
        for r in report.records:
            lines.append(f"{r.trial_index},{r.distortion!r}")
    return lines


def report_json_text(report: ExperimentReport) -> str:
    doc = {
        "config": report.config,
        "aggregates": report.aggregates,
        "comparators": report.comparators,
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_outputs(report: ExperimentReport, out_dir, render_figure: bool = True) -> dict:
    """Write trials CSV, report JSON, plot data, and (optionally) the figure."""
    os.makedirs(out_dir, exist_ok=True)
    name = report.config["name"]
    paths = {
        "trials_csv": os.path.join(out_dir, f"{name}_trials.csv"),
        "report_json": os.path.join(out_dir, f"{name}_report.json"),
        "plot_csv": os.path.join(out_dir, f"{name}_plot.csv"),
    }
    with open(paths["trials_csv"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(trials_csv_lines(report)) + "\n")
    with open(paths["report_json"], "w", encoding="utf-8") as fh:
        fh.write(report_json_text(report))
    with open(paths["plot_csv"], "w", encoding="utf-8") as fh:
        fh.write("\n".join(plot_data_lines(report)) + "\n")
    if render_figure:
        from .figures import render_report
        paths["figure_png"] = render_report(report, os.path.join(out_dir, f"{name}.png"))
    return paths


def acceptance_check(report: ExperimentReport) -> tuple[bool, str]:
    """The per-experiment pass/fail comparison behind the CLI --check flag."""
    name = report.config["name"]
    agg, cmp_ = report.aggregates, report.comparators
    if name == "fig1":
        gap = abs(agg["zero_fraction"] - cmp_["expected_zero_fraction"])
        return gap <= 0.02, (
            f"zero_fraction={agg['zero_fraction']:.4f} "
            f"expected={cmp_['expected_zero_fraction']:.4f} gap={gap:.4f} (tol 0.02)"
        )
    if name == "fig2":
        lo, hi = (0.9, 1.35) if report.config["normalization"] == "sigma2n" else (0.82, 1.23)
        ok_mean = lo <= agg["mean"] <= hi
        ok_std = cmp_["std_ratio"] <= 1.0 / 3.0
        return ok_mean and ok_std, (
            f"mean={agg['mean']:.4f} (range [{lo}, {hi}]) "
            f"std_ratio={cmp_['std_ratio']:.4f} (max 1/3)"
        )
    if name == "appendix_nu":
        return 0.9 <= agg["slope"] <= 1.1, f"slope={agg['slope']:.4f} (range [0.9, 1.1])"
    if name == "oblivious_rate":
        floor = cmp_["target_rate"] - 3.0 * agg["success_se"]
        return agg["success_rate"] >= floor, (
            f"success_rate={agg['success_rate']:.4f} target={cmp_['target_rate']:.4f} "
            f"floor={floor:.4f}"
        )
    floor = cmp_["coverage_lower_bound"] - 3.0 * agg["success_se"]
    return agg["success_rate"] >= floor, (
        f"coverage={agg['success_rate']:.4f} "
        f"lower_bound={cmp_['coverage_lower_bound']:.4f} floor={floor:.4f}"
    )
