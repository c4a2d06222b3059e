"""Monte Carlo reconstruction-error study over random conductivity fields.

For each seed: draw a log-conductivity realization, simulate the probe
impulse response, expand it into transfer coefficients ``b`` and the
triangular-Toeplitz matrix ``B``; the probe signal ``c = B a`` produced by a
known boundary transient ``a`` is then inverted through the *homogeneous*
interpretive model ``B_tilde``, and the resulting reconstruction error is
compared against the closed-form lower bounds and the spectral upper bound.
Records are deterministic functions of (seed, config) and are emitted as
CSV/JSON figure data.
"""

from __future__ import annotations

import dataclasses
import json
import math
import multiprocessing as mp
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import toeplitz
from .bounds import compute_bounds
from .deconv import (
    Observation,
    ObservationSet,
    reconstruction_error,
    solve_multi_averaged,
    solve_multi_lsq,
)
from .groundwater import (
    CovarianceConfig,
    DomainConfig,
    greens_coeffs,
    kle_build,
    sample_field,
    simulate_impulse,
)
from .laguerre import LaguerreBasis, LaguerreSeries, TimeSeries, synthesize
from .toeplitz import from_green_series

__all__ = [
    "StudyConfig",
    "StudyRecord",
    "StudySummary",
    "desk_config",
    "paper_config",
    "load_config",
    "flat_defaults",
    "config_from_flat",
    "run_study",
    "reconstruct_boundary",
    "count_sign_changes",
    "classify_bifurcation",
    "summarize",
    "emit_outputs",
    "RECORD_COLUMNS",
]

ESTIMATORS = ("averaged", "least_squares")

# fixed reconstruction grid: 400 points spanning four characteristic times
RECON_POINTS = 400
RECON_SPAN = 4.0

# dead band (fraction of max |values|) below which samples do not count as
# signed when tallying zero crossings
DEAD_BAND_FACTOR = 1e-3

# sandwich slacks: lower bounds may exceed the error by at most SLACK_LOWER,
# the error may exceed the upper bound by at most SLACK_UPPER
SLACK_LOWER = 1e-8
SLACK_UPPER = 1e-6

MAX_FAILURE_FRACTION = 0.10

HISTOGRAM_BINS = 20

RECORD_COLUMNS = (
    "seed",
    "abs_error",
    "rel_error",
    "lower_k1",
    "lower_k2",
    "upper",
    "b0",
    "b0_tilde",
    "peak_time_true",
    "peak_time_model",
    "peak_class",
    "sign_changes",
    "recon_peak_time",
)


@dataclass(frozen=True)
class StudyConfig:
    """Full description of one ensemble run.

    ``kle_terms`` is authoritative for the random-field truncation; the
    nested covariance config is kept in lockstep.  ``amplitude`` scales the
    boundary transient ``a = (amplitude, 0, ..., 0)`` — reconstruction
    quality and classification are invariant to it while absolute errors
    scale proportionally.  ``workers`` caps the process pool (``None`` uses
    the CPU count, 1 forces serial execution).
    """

    realizations: int = 50
    laguerre_terms: int = 50
    scale_T: float = 100.0
    kle_terms: int = 100
    domain: DomainConfig = field(default_factory=DomainConfig)
    covariance: CovarianceConfig = field(default_factory=CovarianceConfig)
    base_seed: int = 0
    estimator: str = "averaged"
    output_dir: Optional[str] = None
    amplitude: float = 1.0
    workers: Optional[int] = None

    def __post_init__(self):
        if int(self.realizations) != self.realizations or self.realizations < 1:
            raise ValueError("realizations must be a positive integer")
        if int(self.laguerre_terms) != self.laguerre_terms or self.laguerre_terms < 1:
            raise ValueError("laguerre_terms must be a positive integer")
        if not (self.scale_T > 0 and math.isfinite(self.scale_T)):
            raise ValueError("scale_T must be positive and finite")
        if int(self.kle_terms) != self.kle_terms or self.kle_terms < 1:
            raise ValueError("kle_terms must be a positive integer")
        if self.estimator not in ESTIMATORS:
            raise ValueError(f"estimator must be one of {ESTIMATORS}")
        if not (math.isfinite(self.amplitude) and self.amplitude != 0.0):
            raise ValueError("amplitude must be nonzero and finite")
        if self.workers is not None and (int(self.workers) != self.workers or self.workers < 1):
            raise ValueError("workers must be a positive integer or None")
        if self.covariance.n_terms != self.kle_terms:
            object.__setattr__(
                self, "covariance",
                dataclasses.replace(self.covariance, n_terms=int(self.kle_terms)),
            )

    @property
    def recon_grid(self) -> np.ndarray:
        return np.linspace(0.0, RECON_SPAN * self.scale_T, RECON_POINTS)


def desk_config(**overrides) -> StudyConfig:
    """Coarse-grid preset: 50 realizations, minutes of runtime."""
    base = dict(realizations=50,
                domain=DomainConfig(nx=50, ny=20, dt=0.1, t_end=300.0))
    base.update(overrides)
    return StudyConfig(**base)


def paper_config(**overrides) -> StudyConfig:
    """Full-fidelity preset: 500 realizations on the fine default grid."""
    base = dict(realizations=500, domain=DomainConfig())
    base.update(overrides)
    return StudyConfig(**base)


@dataclass(frozen=True)
class StudyRecord:
    """Outcome of one realization.

    ``sign_changes`` counts the zero crossings of the reconstruction's
    deviation from the true transient on the fixed grid (corrective
    oscillations around the truth).  ``recon_peak_time`` (argmax of the
    reconstructed boundary series on that grid) is an extra diagnostic
    column appended after the core fields; ``a_hat`` carries the estimated
    coefficients for reconstruction export and is not serialized into the
    records table.
    """

    seed: int
    abs_error: float
    rel_error: float
    lower_k1: float
    lower_k2: float
    upper: float
    b0: float
    b0_tilde: float
    peak_time_true: float
    peak_time_model: float
    peak_class: str
    sign_changes: int
    recon_peak_time: float
    a_hat: np.ndarray = field(repr=False, compare=False)

    def __post_init__(self):
        if self.peak_class not in ("early", "late"):
            raise ValueError("peak_class must be 'early' or 'late'")
        expected = "early" if self.peak_time_true < self.peak_time_model else "late"
        if self.peak_class != expected:
            raise ValueError("peak_class inconsistent with peak times")
        if self.sign_changes < 0:
            raise ValueError("sign_changes must be nonnegative")
        for name in ("abs_error", "rel_error", "lower_k1", "lower_k2", "upper"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and nonnegative")
        a = np.asarray(self.a_hat, dtype=float).copy()
        a.setflags(write=False)
        object.__setattr__(self, "a_hat", a)

    def violates_bounds(self) -> bool:
        """True when the record breaks the lower/upper sandwich (with slack)."""
        return (self.lower_k1 > self.lower_k2 + SLACK_LOWER
                or self.lower_k2 > self.rel_error + SLACK_LOWER
                or self.rel_error > self.upper + SLACK_UPPER)


@dataclass(frozen=True)
class StudySummary:
    """Ensemble statistics over the included records."""

    total: int
    exclusions: int
    failures: tuple
    violations: int
    quantiles: dict
    histogram_edges: tuple
    histogram_counts: tuple
    class_stats: dict

    def __post_init__(self):
        if self.total < 0 or self.violations < 0:
            raise ValueError("counts must be nonnegative")
        if self.exclusions != len(self.failures):
            raise ValueError("exclusions must match the failure list")
        if sum(self.histogram_counts) != self.total:
            raise ValueError("histogram counts must sum to the record total")


def reconstruct_boundary(series: LaguerreSeries, t_grid) -> TimeSeries:
    """Synthesize the estimated boundary transient on a plotting grid."""
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("t_grid must be a 1-D vector with at least 2 points")
    if t[0] < 0 or np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be ascending and nonnegative")
    return TimeSeries(times=t, values=synthesize(series, t))


def count_sign_changes(values, dead_band_factor: float = DEAD_BAND_FACTOR) -> int:
    """Count zero crossings, ignoring samples inside the dead band.

    Samples with ``|v| <= dead_band_factor * max|v|`` carry no sign, so
    roundoff-level wiggles around zero do not register as oscillations.
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0
    band = dead_band_factor * float(np.max(np.abs(v)))
    if band == 0.0:
        return 0
    signs = np.sign(v[np.abs(v) > band])
    return int(np.count_nonzero(np.diff(signs) != 0))


def classify_bifurcation(records: Sequence[StudyRecord]) -> dict:
    """Per-peak-class oscillation statistics.

    The diagnostic (early-peak reconstructions oscillate more) is only
    evaluated when both classes are populated; classes with fewer than 5
    members are flagged low-confidence.
    """
    classes = {}
    for name in ("early", "late"):
        sc = [r.sign_changes for r in records if r.peak_class == name]
        if sc:
            classes[name] = {
                "count": len(sc),
                "median_sign_changes": float(np.median(sc)),
                "low_confidence": len(sc) < 5,
            }
    applicable = set(classes) == {"early", "late"}
    diagnostic = None
    if applicable:
        diagnostic = bool(classes["early"]["median_sign_changes"]
                          > classes["late"]["median_sign_changes"])
    return {
        "classes": classes,
        "diagnostic_applicable": applicable,
        "oscillation_diagnostic": diagnostic,
    }


# ---------------------------------------------------------------------------
# per-seed pipeline (runs in worker processes for parallel ensembles)

_WORKER: dict = {}


def _worker_init(domain: DomainConfig, covariance: CovarianceConfig,
                 n_terms: int, scale: float) -> None:
    _WORKER["domain"] = domain
    _WORKER["kle"] = kle_build(covariance, domain)
    _WORKER["lag"] = LaguerreBasis(n_terms=n_terms, scale=scale)


def _worker_seed(seed: int):
    """Simulate one realization; returns (seed, coeffs|None, peak_time, reason)."""
    try:
        realization = sample_field(_WORKER["kle"], seed)
        resp = simulate_impulse(realization, _WORKER["domain"])
        b = greens_coeffs(resp, _WORKER["lag"])
        return seed, np.asarray(b.coeffs), float(resp.peak_time), ""
    except Exception as exc:  # recorded per-seed, never aborts the pool
        return seed, None, math.nan, f"{type(exc).__name__}: {exc}"


def _collect_responses(cfg: StudyConfig, seeds: Sequence[int]):
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    workers = max(1, min(int(workers), len(seeds)))
    initargs = (cfg.domain, cfg.covariance, cfg.laguerre_terms, cfg.scale_T)
    if workers == 1:
        _worker_init(*initargs)
        try:
            return [_worker_seed(s) for s in seeds]
        finally:
            _WORKER.clear()
    ctx = mp.get_context("spawn")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx,
                             initializer=_worker_init, initargs=initargs) as ex:
        return list(ex.map(_worker_seed, seeds))


def run_study(cfg: StudyConfig):
    """Execute the ensemble; returns (records, summary) in seed order."""
    basis = LaguerreBasis(n_terms=cfg.laguerre_terms, scale=cfg.scale_T)
    resp_model = simulate_impulse(None, cfg.domain)
    b_tilde = greens_coeffs(resp_model, basis)
    model = from_green_series(b_tilde)
    peak_model = float(resp_model.peak_time)

    a = np.zeros(cfg.laguerre_terms)
    a[0] = cfg.amplitude
    t_grid = cfg.recon_grid
    # oscillations are counted on the deviation from the true transient:
    # a smooth-but-offset reconstruction crosses the truth, not zero
    reference = cfg.amplitude * np.exp(-t_grid / (2.0 * cfg.scale_T))
    seeds = [cfg.base_seed + i for i in range(cfg.realizations)]

    if cfg.covariance.variance == 0.0:
        # degenerate ensemble: every realization is the homogeneous model
        results = [(s, np.asarray(b_tilde.coeffs), peak_model, "") for s in seeds]
    else:
        results = _collect_responses(cfg, seeds)

    failures = tuple((seed, reason) for seed, coeffs, _, reason in results
                     if coeffs is None)
    if len(failures) > MAX_FAILURE_FRACTION * cfg.realizations:
        preview = "; ".join(f"seed {s}: {r}" for s, r in failures[:3])
        raise RuntimeError(
            f"{len(failures)}/{cfg.realizations} realizations failed ({preview})")

    solver = solve_multi_averaged if cfg.estimator == "averaged" else solve_multi_lsq
    records = []
    for seed, coeffs, peak_true, _ in results:
        if coeffs is None:
            continue
        b = LaguerreSeries(coeffs=coeffs, scale=cfg.scale_T)
        truth = from_green_series(b)
        c = toeplitz.apply(truth, a)
        est = solver(ObservationSet(entries=(
            Observation(c=c, model=model, truth=truth),)))
        err = reconstruction_error(a, est.a_hat)
        rep = compute_bounds(a, [(model, truth)], relative=True)
        recon = reconstruct_boundary(
            LaguerreSeries(coeffs=est.a_hat, scale=cfg.scale_T), t_grid)
        residual = recon.values - reference
        if np.max(np.abs(residual)) <= 1e-12 * abs(cfg.amplitude):
            n_osc = 0  # roundoff-level residual carries no oscillation signal
        else:
            n_osc = count_sign_changes(residual)
        records.append(StudyRecord(
            seed=seed,
            abs_error=err.absolute,
            rel_error=err.relative,
            lower_k1=rep.lower_k1,
            lower_k2=rep.lower_k2,
            upper=rep.upper,
            b0=float(coeffs[0]),
            b0_tilde=float(b_tilde.coeffs[0]),
            peak_time_true=peak_true,
            peak_time_model=peak_model,
            peak_class="early" if peak_true < peak_model else "late",
            sign_changes=n_osc,
            recon_peak_time=float(recon.times[int(np.argmax(recon.values))]),
            a_hat=est.a_hat,
        ))
    return records, summarize(records, failures)


def summarize(records: Sequence[StudyRecord], failures: Sequence = ()) -> StudySummary:
    """Quantiles, histogram, violation count, and per-class statistics."""
    if not records:
        raise ValueError("no records to summarize")
    rel = np.array([r.rel_error for r in records])
    qs = np.quantile(rel, [0.05, 0.25, 0.50, 0.75, 0.95])
    quantiles = {k: float(v) for k, v in zip(("p05", "p25", "p50", "p75", "p95"), qs)}
    if np.all(rel > 0):
        # errors span decades; bin their logarithms
        counts, edges = np.histogram(np.log10(rel), bins=HISTOGRAM_BINS)
        edges = 10.0 ** edges
    else:
        counts, edges = np.histogram(rel, bins=HISTOGRAM_BINS)
    return StudySummary(
        total=len(records),
        exclusions=len(failures),
        failures=tuple((int(s), str(r)) for s, r in failures),
        violations=sum(1 for r in records if r.violates_bounds()),
        quantiles=quantiles,
        histogram_edges=tuple(float(e) for e in edges),
        histogram_counts=tuple(int(c) for c in counts),
        class_stats=classify_bifurcation(records),
    )


# ---------------------------------------------------------------------------
# configuration files and flat key=value mappings

_INT_KEYS = ("realizations", "laguerre_terms", "kle_terms", "base_seed",
             "nx", "ny", "workers")
_FLOAT_KEYS = ("scale_T", "dt", "t_end", "length_x", "length_y", "storage",
               "probe_x", "probe_y", "variance", "eta1", "eta2", "amplitude")
_STR_KEYS = ("estimator", "output_dir")
_ALL_KEYS = _INT_KEYS + _FLOAT_KEYS + _STR_KEYS

_DOMAIN_KEYS = ("nx", "ny", "dt", "t_end", "length_x", "length_y", "storage")
_COV_KEYS = ("variance", "eta1", "eta2")


def flat_defaults(paper: bool = False) -> dict:
    """The desk (or full-scale) preset as a flat key=value mapping."""
    cfg = paper_config() if paper else desk_config()
    flat = {
        "realizations": cfg.realizations,
        "laguerre_terms": cfg.laguerre_terms,
        "scale_T": cfg.scale_T,
        "kle_terms": cfg.kle_terms,
        "base_seed": cfg.base_seed,
        "estimator": cfg.estimator,
        "amplitude": cfg.amplitude,
        "probe_x": cfg.domain.probe[0],
        "probe_y": cfg.domain.probe[1],
    }
    for k in _DOMAIN_KEYS:
        flat[k] = getattr(cfg.domain, k)
    for k in _COV_KEYS:
        flat[k] = getattr(cfg.covariance, k)
    return flat


def config_from_flat(flat: dict) -> StudyConfig:
    """Assemble a StudyConfig from a flat mapping (unknown keys rejected)."""
    unknown = sorted(set(flat) - set(_ALL_KEYS))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    merged = flat_defaults()
    merged.update(flat)
    estimator = str(merged["estimator"])
    if estimator == "lsq":
        estimator = "least_squares"
    domain = DomainConfig(
        probe=(float(merged["probe_x"]), float(merged["probe_y"])),
        **{k: (int(merged[k]) if k in _INT_KEYS else float(merged[k]))
           for k in _DOMAIN_KEYS},
    )
    covariance = CovarianceConfig(
        n_terms=int(merged["kle_terms"]),
        **{k: float(merged[k]) for k in _COV_KEYS},
    )
    return StudyConfig(
        realizations=int(merged["realizations"]),
        laguerre_terms=int(merged["laguerre_terms"]),
        scale_T=float(merged["scale_T"]),
        kle_terms=int(merged["kle_terms"]),
        domain=domain,
        covariance=covariance,
        base_seed=int(merged["base_seed"]),
        estimator=estimator,
        output_dir=merged.get("output_dir"),
        amplitude=float(merged["amplitude"]),
        workers=None if merged.get("workers") is None else int(merged["workers"]),
    )


def load_config(path) -> dict:
    """Parse a flat ``key = value`` file (# comments and blank lines allowed)."""
    flat = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value, got {raw!r}")
            key, _, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if key in _INT_KEYS:
                flat[key] = int(value)
            elif key in _FLOAT_KEYS:
                flat[key] = float(value)
            elif key in _STR_KEYS:
                flat[key] = value
            else:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
    return flat


# ---------------------------------------------------------------------------
# output emission

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    try:
        with open(path, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(x) for x in row) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


_SCHEMA = """\
records.csv
  one row per included realization, in seed order
  columns: seed (int), abs_error, rel_error, lower_k1, lower_k2, upper,
           b0, b0_tilde, peak_time_true, peak_time_model,
           peak_class (early|late), sign_changes (int), recon_peak_time
  recon_peak_time is a supplementary diagnostic column: argmax time of the
  reconstructed boundary series on the fixed grid.

summary.json
  ensemble statistics: totals, exclusions with reasons, bound-violation
  count, rel_error quantiles (p05..p95), histogram, per-class oscillation
  statistics, and the full configuration echo.

histogram.csv
  columns: bin_left, bin_right, count — empirical distribution of rel_error
  (log-spaced bins when all errors are positive).

bound_scatter.csv
  columns: seed, lower_k1, lower_k2, rel_error, upper — scatter data of
  the error against its bounds.

reconstructions/<seed>.csv
  columns: time, value — the estimated boundary transient synthesized on
  the fixed grid (400 points over [0, 4T]).

All floating-point values carry 17 significant digits.
"""


def emit_outputs(records: Sequence[StudyRecord], summary: StudySummary,
                 cfg: StudyConfig, plots: bool = False) -> dict:
    """Write records.csv, summary.json, figure-data CSVs, and schema.txt.

    Returns a name -> path mapping of everything written.  Output is a pure
    function of (records, summary, cfg): identical inputs produce
    byte-identical files.
    """
    if cfg.output_dir is None:
        raise ValueError("cfg.output_dir is not set")
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "reconstructions").mkdir(exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    paths = {"records": out / "records.csv"}
    _write_csv(paths["records"], RECORD_COLUMNS,
               ([getattr(r, col) for col in RECORD_COLUMNS] for r in records))

    paths["summary"] = out / "summary.json"
    payload = {
        "total": summary.total,
        "exclusions": summary.exclusions,
        "failures": [{"seed": s, "reason": r} for s, r in summary.failures],
        "violations": summary.violations,
        "quantiles": summary.quantiles,
        "histogram": {"edges": list(summary.histogram_edges),
                      "counts": list(summary.histogram_counts)},
        "class_stats": summary.class_stats,
        "config": _config_payload(cfg),
    }
    with open(paths["summary"], "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    paths["histogram"] = out / "histogram.csv"
    edges = summary.histogram_edges
    _write_csv(paths["histogram"], ("bin_left", "bin_right", "count"),
               ((edges[i], edges[i + 1], summary.histogram_counts[i])
                for i in range(len(summary.histogram_counts))))

    paths["bound_scatter"] = out / "bound_scatter.csv"
    _write_csv(paths["bound_scatter"],
               ("seed", "lower_k1", "lower_k2", "rel_error", "upper"),
               ((r.seed, r.lower_k1, r.lower_k2, r.rel_error, r.upper)
                for r in records))

    t_grid = cfg.recon_grid
    for r in records:
        series = LaguerreSeries(coeffs=r.a_hat, scale=cfg.scale_T)
        dest = out / "reconstructions" / f"{r.seed}.csv"
        reconstruct_boundary(series, t_grid).to_csv(dest)
        paths[f"reconstruction_{r.seed}"] = dest

    paths["schema"] = out / "schema.txt"
    with open(paths["schema"], "w") as fh:
        fh.write(_SCHEMA)

    if plots:
        paths.update(_write_plots(records, summary, cfg, out))
    return paths


def _config_payload(cfg: StudyConfig) -> dict:
    payload = dataclasses.asdict(cfg)
    payload["domain"]["probe"] = list(cfg.domain.probe)
    # the destination is implied by the file location and would make
    # otherwise-identical runs compare unequal
    payload.pop("output_dir")
    return payload


def _write_plots(records, summary, cfg, out: Path) -> dict:
    try:
        import matplotlib
    except ImportError as exc:
        raise RuntimeError(
            "plot output requires matplotlib; install the 'plots' extra") from exc
    matplotlib.use("svg", force=True)
    import matplotlib.pyplot as plt

    paths = {}
    meta = {"Date": None}  # strip the timestamp so outputs stay reproducible

    fig, ax = plt.subplots(figsize=(6, 4))
    edges = np.asarray(summary.histogram_edges)
    counts = np.asarray(summary.histogram_counts)
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge",
           color="steelblue", edgecolor="black", linewidth=0.4)
    if np.all(edges > 0):
        ax.set_xscale("log")
    ax.set_xlabel("relative reconstruction error")
    ax.set_ylabel("count")
    ax.set_title(f"error distribution ({summary.total} realizations)")
    paths["histogram_plot"] = out / "histogram.svg"
    fig.savefig(paths["histogram_plot"], metadata=meta)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6, 4))
    lo = [r.lower_k2 for r in records]
    re_ = [r.rel_error for r in records]
    ax.loglog(lo, re_, "o", ms=4, alpha=0.7, label="realizations")
    span = [min(min(lo), min(re_)), max(max(lo), max(re_))]
    ax.loglog(span, span, "k--", lw=1, label="error = bound")
    ax.set_xlabel("lower bound (k=2)")
    ax.set_ylabel("relative error")
    ax.legend()
    paths["scatter_plot"] = out / "bound_scatter.svg"
    fig.savefig(paths["scatter_plot"], metadata=meta)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(7, 4))
    t = cfg.recon_grid
    ax.plot(t, cfg.amplitude * np.exp(-t / (2 * cfg.scale_T)), "k-", lw=2,
            label="true transient")
    shown = {"early": 0, "late": 0}
    for r in records:
        if shown[r.peak_class] >= 3:
            continue
        shown[r.peak_class] += 1
        vals = synthesize(LaguerreSeries(coeffs=r.a_hat, scale=cfg.scale_T), t)
        color = "crimson" if r.peak_class == "early" else "seagreen"
        label = f"{r.peak_class} peak" if shown[r.peak_class] == 1 else None
        ax.plot(t, vals, color=color, lw=1, alpha=0.8, label=label)
    ax.set_xlabel("time")
    ax.set_ylabel("boundary head")
    ax.legend()
    paths["reconstructions_plot"] = out / "reconstructions.svg"
    fig.savefig(paths["reconstructions_plot"], metadata=meta)
    plt.close(fig)
    return paths
