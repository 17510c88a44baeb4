"""Monte Carlo runner comparing exact and Laplace-approximate normalizers.

Every (n, replicate) pair gets its own random stream, seeded by a 64-bit
SplitMix64 mix of ``(base_seed, n, replicate)``, so results do not depend on
how replicates are scheduled across workers.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence

import numpy as np

from . import bounds
from .engine import laplace_approximate
from .errors import ConfigError, DegenerateData, InsufficientData, LaplabError
from .models import (
    MODELS,
    TrueDistribution,
    bernoulli_exact_log_z,
    bernoulli_log_laplace_closed,
    bernoulli_objective,
    multinomial_exact_log_z,
    multinomial_log_laplace_closed,
    multinomial_objective,
    poisson_exact_log_marginal,
    poisson_log_laplace_closed,
    poisson_objective,
    sample,
)
from .numerics import log_expm1_ratio

CSV_COLUMNS = (
    "model", "n", "replicate", "seed", "log_exact", "log_laplace",
    "rel_error_signed", "rel_error_abs",
    "t2_applicable", "t2_satisfied", "t3_applicable", "t3_satisfied",
    "t4_applicable", "t4_satisfied", "degenerate",
)

STATISTICS = ("median", "mean", "q90")

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def replicate_seed(base_seed: int, n: int, replicate: int) -> int:
    h = splitmix64(base_seed & _MASK64)
    h = splitmix64(h ^ (n & _MASK64))
    return splitmix64(h ^ (replicate & _MASK64))


@dataclass
class ExperimentConfig:
    model: str
    n_grid: List[int]
    reps: int
    base_seed: int = 0
    theta_star: Optional[float] = None
    psi_star: Optional[List[float]] = None
    lambda_star: Optional[float] = None
    theta_grid: List[float] = field(default_factory=lambda: [1.0])
    n_min_t2: int = bounds.DEFAULT_N_MIN_T2
    n_min_t3: int = bounds.DEFAULT_N_MIN_T3
    out: Optional[str] = None
    out_json: Optional[str] = None
    out_plot: Optional[str] = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODELS}")
        grid = [int(n) for n in self.n_grid]
        if not grid or grid[0] < 1 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be strictly increasing positive integers, got {self.n_grid}")
        self.n_grid = grid
        if int(self.reps) < 1:
            raise ConfigError(f"reps must be at least 1, got {self.reps}")
        self.reps = int(self.reps)
        if not 0 <= int(self.base_seed) <= _MASK64:
            raise ConfigError("base_seed must fit in an unsigned 64-bit integer")
        self.base_seed = int(self.base_seed)
        self.theta_grid = [float(t) for t in self.theta_grid]
        if not self.theta_grid or min(self.theta_grid) <= 0:
            raise ConfigError("theta_grid must be a non-empty list of positive reals")
        try:
            self.truth()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def truth(self) -> TrueDistribution:
        psi = tuple(self.psi_star) if self.psi_star is not None else None
        return TrueDistribution(self.model, self.theta_star, psi, self.lambda_star)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ComparisonRecord:
    model: str
    n: int
    replicate: int
    seed: int
    log_exact: float
    log_laplace_engine: float
    log_laplace_closed: float
    rel_error_signed: float
    rel_error_abs: float
    checks: List[bounds.BoundCheck] = field(default_factory=list)
    degenerate: bool = False
    theta_spread: Optional[float] = None
    lambda_star: Optional[float] = None
    error: Optional[str] = None

    @property
    def usable(self) -> bool:
        return not self.degenerate and self.error is None and math.isfinite(self.rel_error_abs)

    def check(self, theorem: str) -> Optional[bounds.BoundCheck]:
        for c in self.checks:
            if c.theorem == theorem:
                return c
        return None


@dataclass
class RateFit:
    slope: float
    intercept: float
    r_squared: float
    statistic: str
    n_grid: List[int]
    values: List[float]
    counts: List[int]


def _evaluate(model, d, theta_grid, lambda_star):
    """Exact log value, engine and closed-form log Laplace values, theta spread."""
    spread = None
    if model == "bernoulli":
        log_exact = bernoulli_exact_log_z(d)
        closed = bernoulli_log_laplace_closed(d)
        engine = laplace_approximate(bernoulli_objective(d)).log_laplace
    elif model == "multinomial":
        log_exact = multinomial_exact_log_z(d)
        closed = multinomial_log_laplace_closed(d)
        engine = laplace_approximate(multinomial_objective(d)).log_laplace
    else:
        theta0 = theta_grid[0]
        log_exact = poisson_exact_log_marginal(d, theta0)
        closed = poisson_log_laplace_closed(d, theta0)
        ratios = [
            poisson_exact_log_marginal(d, t) - poisson_log_laplace_closed(d, t)
            for t in theta_grid
        ]
        spread = max(ratios) - min(ratios)
        engine = laplace_approximate(poisson_objective(d, theta0)).log_laplace
    return log_exact, engine, closed, spread


def run_replicate(cfg: ExperimentConfig, n: int, replicate: int) -> ComparisonRecord:
    seed = replicate_seed(cfg.base_seed, n, replicate)
    rng = np.random.default_rng(seed)
    truth = cfg.truth()
    d = sample(truth, n, rng)
    checks = bounds.check_dataset(
        cfg.model, d, lambda_star=cfg.lambda_star, n_min_t2=cfg.n_min_t2, n_min_t3=cfg.n_min_t3
    )
    rec = ComparisonRecord(
        model=cfg.model, n=n, replicate=replicate, seed=seed,
        log_exact=math.nan, log_laplace_engine=math.nan, log_laplace_closed=math.nan,
        rel_error_signed=math.nan, rel_error_abs=math.nan, checks=checks,
        degenerate=bool(d.degenerate), lambda_star=cfg.lambda_star,
    )
    if cfg.model == "bernoulli":
        rec.log_exact = bernoulli_exact_log_z(d)
    elif cfg.model == "poisson":
        rec.log_exact = poisson_exact_log_marginal(d, cfg.theta_grid[0])
    if rec.degenerate:
        return rec
    try:
        log_exact, engine, closed, spread = _evaluate(cfg.model, d, cfg.theta_grid, cfg.lambda_star)
    except DegenerateData:
        rec.degenerate = True
        return rec
    except LaplabError as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
        return rec
    rec.log_exact = log_exact
    rec.log_laplace_engine = engine
    rec.log_laplace_closed = closed
    rec.theta_spread = spread
    rec.rel_error_signed = log_expm1_ratio(log_exact, closed)
    rec.rel_error_abs = abs(rec.rel_error_signed)
    return rec


def run_experiment(cfg: ExperimentConfig, threads: int = 1) -> List[ComparisonRecord]:
    """Run every (n, replicate) pair; records come back in (n, replicate) order."""
    tasks = [(n, r) for n in cfg.n_grid for r in range(cfg.reps)]
    if threads <= 1:
        return [run_replicate(cfg, n, r) for n, r in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda t: run_replicate(cfg, *t), tasks, chunksize=256))


def _statistic(values: np.ndarray, statistic: str) -> float:
    if statistic == "median":
        return float(np.median(values))
    if statistic == "mean":
        return float(np.mean(values))
    if statistic == "q90":
        return float(np.quantile(values, 0.9))
    raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")


def fit_rate(records: Iterable[ComparisonRecord], statistic: str = "median",
             min_records: int = 30) -> RateFit:
    """Least-squares slope of ``log statistic(|p/p_LA - 1|)`` against ``log n``."""
    if statistic not in STATISTICS:
        raise ValueError(f"unknown statistic {statistic!r}; expected one of {STATISTICS}")
    by_n: dict = {}
    for rec in records:
        if rec.usable:
            by_n.setdefault(rec.n, []).append(rec.rel_error_abs)
    grid = sorted(n for n, v in by_n.items() if len(v) >= min_records)
    if len(grid) < 3:
        raise InsufficientData(
            f"need at least 3 sample sizes with >= {min_records} usable records, got {len(grid)}"
        )
    values = [_statistic(np.asarray(by_n[n]), statistic) for n in grid]
    x = np.log(np.asarray(grid, dtype=float))
    y = np.log(np.asarray(values))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return RateFit(
        slope=float(slope), intercept=float(intercept), r_squared=r2, statistic=statistic,
        n_grid=grid, values=values, counts=[len(by_n[n]) for n in grid],
    )


def summarize_bounds(records: Iterable[ComparisonRecord]) -> dict:
    """Per-theorem counts of applicable, satisfied and violated checks.

    Degenerate records are skipped. Every violation carries its full record.
    """
    summary = {
        t: {"applicable": 0, "satisfied": 0, "violated": 0, "violations": []}
        for t in bounds.THEOREMS
    }
    for rec in records:
        if rec.degenerate:
            continue
        for c in rec.checks:
            if not c.applicable:
                continue
            entry = summary[c.theorem]
            entry["applicable"] += 1
            if c.satisfied:
                entry["satisfied"] += 1
            else:
                entry["violated"] += 1
                entry["violations"].append(record_to_dict(rec))
    return summary


def total_violations(summary: dict) -> int:
    return sum(entry["violated"] for entry in summary.values())


# ---------------------------------------------------------------- serialization


def _fmt_float(x: float) -> str:
    return format(x, ".17g")


def _fmt_bool(b: Optional[bool]) -> str:
    if b is None:
        return ""
    return "true" if b else "false"


def _check_cells(rec: ComparisonRecord, theorem: str):
    c = rec.check(theorem)
    if c is None:
        return "", ""
    return _fmt_bool(c.applicable), _fmt_bool(c.satisfied)


def records_to_csv(records: Sequence[ComparisonRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([
            rec.model, rec.n, rec.replicate, rec.seed,
            _fmt_float(rec.log_exact), _fmt_float(rec.log_laplace_engine),
            _fmt_float(rec.rel_error_signed), _fmt_float(rec.rel_error_abs),
            *_check_cells(rec, "T2"), *_check_cells(rec, "T3"), *_check_cells(rec, "T4"),
            _fmt_bool(rec.degenerate),
        ])
    return buf.getvalue()


def _parse_bool(cell: str) -> Optional[bool]:
    if cell == "":
        return None
    if cell not in ("true", "false"):
        raise ValueError(f"bad boolean cell {cell!r}")
    return cell == "true"


def records_from_csv(text: str) -> List[ComparisonRecord]:
    """Rebuild records from CSV text; bound values are not stored and come back as nan."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != CSV_COLUMNS:
        raise ValueError("CSV header does not match the record schema")
    out = []
    for row in reader:
        cells = dict(zip(CSV_COLUMNS, row))
        signed = float(cells["rel_error_signed"])
        checks = []
        for th in ("T2", "T3", "T4"):
            applicable = _parse_bool(cells[f"{th.lower()}_applicable"])
            if applicable is None:
                continue
            checks.append(bounds.BoundCheck(
                th, applicable, math.nan, signed, _parse_bool(cells[f"{th.lower()}_satisfied"])
            ))
        log_laplace = float(cells["log_laplace"])
        out.append(ComparisonRecord(
            model=cells["model"], n=int(cells["n"]), replicate=int(cells["replicate"]),
            seed=int(cells["seed"]), log_exact=float(cells["log_exact"]),
            log_laplace_engine=log_laplace, log_laplace_closed=math.nan,
            rel_error_signed=signed, rel_error_abs=float(cells["rel_error_abs"]),
            checks=checks, degenerate=bool(_parse_bool(cells["degenerate"])),
        ))
    return out


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def record_to_dict(rec: ComparisonRecord) -> dict:
    return _jsonable(rec)


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, allow_nan=False) + "\n"


def _write(path: str, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


def emit(obj, fmt: str, path: str) -> None:
    """Write records, a rate fit, a bound summary or a diagnostics report."""
    if fmt == "csv":
        if not isinstance(obj, (list, tuple)):
            raise ValueError("CSV output is only defined for a list of records")
        _write(path, records_to_csv(obj))
    elif fmt == "json":
        _write(path, to_json(obj))
    else:
        raise ValueError(f"unknown format {fmt!r}; expected 'csv' or 'json'")


def read_records(path: str) -> List[ComparisonRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read {path}: {exc.strerror}") from exc
    return records_from_csv(text)


def default_threads() -> int:
    return os.cpu_count() or 1
