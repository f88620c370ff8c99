"""Seeded Monte Carlo sweeps, convergence traces and CSV emission.

Configs are flat UTF-8 JSON objects; every key is optional and unknown keys
are rejected. CSV output uses ',' separators, a header row, LF line endings
and ``repr`` floats, so identical configs give byte-identical files.
"""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .bd import bd_solve
from .boost import minimize_power_factor
from .improve import improve_over_bd
from .linalg import InvalidInputError
from .metrics import LN2, per_bs_powers
from .network import NetworkConfig, derive_seed, sample_channels

__all__ = [
    "ConfigError",
    "ExperimentSpec",
    "ResultRow",
    "RESULT_COLUMNS",
    "AGGREGATE_COLUMNS",
    "TRACE_COLUMNS",
    "parse_config",
    "run_trial",
    "run_sweep",
    "aggregate",
    "run_convergence_trace",
    "read_csv",
]

SCHEMES = ("bd", "proposed")


class ConfigError(ValueError):
    """Malformed experiment configuration; ``field`` names the culprit."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentSpec:
    dims: tuple = (3, 2, 3, 2)
    snr_list_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)
    trials: int = 500
    seed: int = 42
    schemes: tuple = SCHEMES
    jobs: int = 1
    out: str = "results.csv"
    aggregate: str = "aggregate.csv"
    trace_snr_db: float | None = None
    trace_seed: int | None = None
    trace_out: str = "trace.csv"
    timing: bool = False

    def network(self, snr_db):
        return NetworkConfig.from_dims(self.dims, snr_db=snr_db)


RESULT_COLUMNS = ("snr_db", "trial", "scheme", "sum_rate_nats", "sum_rate_bits", "rho",
                  "snr_boost_db", "iterations", "wall_ms", "status")
AGGREGATE_COLUMNS = ("snr_db", "scheme", "n", "sum_rate_nats_mean", "sum_rate_nats_se",
                     "sum_rate_bits_mean", "sum_rate_bits_se", "rho_mean", "rho_se",
                     "snr_boost_db_mean", "snr_boost_db_se", "iterations_mean")
TRACE_COLUMNS = ("iteration", "scaled_sum_rate_nats", "scaled_sum_rate_bits", "rho",
                 "cut_kind", "bd_sum_rate_nats", "bd_sum_rate_bits")


@dataclass
class ResultRow:
    snr_db: float
    trial: int
    scheme: str
    sum_rate_nats: float = math.nan
    sum_rate_bits: float = math.nan
    rho: float = math.nan
    snr_boost_db: float = math.nan
    iterations: int = 0
    wall_ms: float | None = None
    status: str = "ok"

    def as_record(self):
        return [_fmt(getattr(self, c)) for c in RESULT_COLUMNS]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# -- config ------------------------------------------------------------------

def _as_list(name, value, conv):
    if isinstance(value, str):
        value = [v for v in value.replace(" ", "").split(",") if v]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(name, f"expected a list, got {value!r}")
    try:
        return tuple(conv(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(name, str(exc)) from None


def _as_int(name, value, lo=None):
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ConfigError(name, f"expected an integer, got {value!r}")
    try:
        out = int(value)
    except ValueError:
        raise ConfigError(name, f"expected an integer, got {value!r}") from None
    if lo is not None and out < lo:
        raise ConfigError(name, f"must be >= {lo}, got {out}")
    return out


def _validate(raw):
    known = {f.name for f in fields(ExperimentSpec)}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown key")
    vals = {}
    for key, value in raw.items():
        if value is None and key in ("trace_snr_db", "trace_seed"):
            vals[key] = None
        elif key == "dims":
            vals[key] = _as_list(key, value, int)
        elif key == "snr_list_db":
            snrs = _as_list(key, value, float)
            if not snrs or not all(math.isfinite(s) for s in snrs):
                raise ConfigError(key, "needs at least one finite value")
            vals[key] = snrs
        elif key == "schemes":
            schemes = _as_list(key, value, str)
            bad = [s for s in schemes if s not in SCHEMES]
            if bad or not schemes:
                raise ConfigError(key, f"schemes must be a non-empty subset of {SCHEMES}")
            vals[key] = tuple(s for s in SCHEMES if s in schemes)
        elif key in ("trials", "jobs"):
            vals[key] = _as_int(key, value, lo=1)
        elif key in ("seed", "trace_seed"):
            seed = _as_int(key, value, lo=0)
            if seed >= 2**64:
                raise ConfigError(key, "must fit in 64 bits")
            vals[key] = seed
        elif key == "trace_snr_db":
            try:
                vals[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(key, f"expected a number, got {value!r}") from None
            if not math.isfinite(vals[key]):
                raise ConfigError(key, "must be finite")
        elif key == "timing":
            if not isinstance(value, bool):
                raise ConfigError(key, "expected true or false")
            vals[key] = value
        else:
            if not isinstance(value, str) or not value:
                raise ConfigError(key, "expected a non-empty path")
            vals[key] = value
    spec = replace(ExperimentSpec(), **vals)
    try:
        NetworkConfig.from_dims(spec.dims)
    except InvalidInputError as exc:
        raise ConfigError("dims", str(exc)) from None
    return spec


def parse_config(path=None, **overrides):
    """Load a JSON config (optional) and apply flag overrides (None = unset)."""
    raw = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be a JSON object")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return _validate(raw)


# -- sweep -------------------------------------------------------------------

def _clock():
    return time.perf_counter()


def run_trial(spec, snr_index, trial):
    """All scheme rows for one (SNR, trial) cell, in scheme order."""
    snr_db = spec.snr_list_db[snr_index]
    cfg = spec.network(snr_db)
    ch = sample_channels(cfg, derive_seed(spec.seed, snr_index, trial))
    rows = []
    t0 = _clock()
    try:
        bd = bd_solve(cfg, ch)
    except Exception as exc:  # noqa: BLE001 - failures are recorded per row
        return [ResultRow(snr_db, trial, s, status=type(exc).__name__) for s in spec.schemes]
    t_bd = _clock()
    if "bd" in spec.schemes:
        rows.append(_checked(cfg, ResultRow(
            snr_db, trial, "bd", bd.sum_rate, bd.sum_rate / LN2, 1.0, 0.0, bd.iterations,
            (t_bd - t0) * 1e3 if spec.timing else None), bd.S))
    if "proposed" in spec.schemes:
        try:
            imp = improve_over_bd(cfg, ch, bd)
        except Exception as exc:  # noqa: BLE001
            rows.append(ResultRow(snr_db, trial, "proposed", status=type(exc).__name__))
        else:
            wall = (_clock() - t_bd) * 1e3 if spec.timing else None
            rows.append(_checked(cfg, ResultRow(
                snr_db, trial, "proposed", imp.sum_rate, imp.sum_rate / LN2, imp.rho,
                float(-10.0 * np.log10(imp.rho)), imp.iterations, wall), imp.S_prop))
    return rows


def _checked(cfg, row, S):
    """Re-check the emitted row against the solver invariants."""
    power = per_bs_powers(cfg, S)
    ok = (math.isfinite(row.sum_rate_nats) and row.sum_rate_nats >= 0
          and 0 < row.rho <= 1 + 1e-6 and np.all(power <= cfg.bs_power * (1 + 1e-6)))
    if not ok:
        row.status = "invariant_violation"
    return row


def _trial_task(args):
    spec, snr_index, trial = args
    return run_trial(spec, snr_index, trial)


def _cells(spec):
    return [(spec, i, t) for i in range(len(spec.snr_list_db)) for t in range(spec.trials)]


def run_sweep(spec, write=True):
    """Run every (SNR, trial) cell and write the row and aggregate CSVs.

    Rows come out in (SNR, trial, scheme) order regardless of ``spec.jobs``.
    """
    cells = _cells(spec)
    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            chunks = list(pool.map(_trial_task, cells, chunksize=max(1, len(cells) // (8 * spec.jobs))))
    else:
        chunks = [_trial_task(c) for c in cells]
    rows = [r for chunk in chunks for r in chunk]
    agg = aggregate(rows)
    if write:
        _write_csv(spec.out, RESULT_COLUMNS, [r.as_record() for r in rows])
        _write_csv(spec.aggregate, AGGREGATE_COLUMNS,
                   [[_fmt(a[c]) for c in AGGREGATE_COLUMNS] for a in agg])
    return rows, agg


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        return math.nan, math.nan
    mean = float(math.fsum(values) / n)
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return mean, se


def aggregate(rows):
    """Per-(SNR, scheme) means and standard errors over the rows with status ok."""
    groups = {}
    for r in rows:
        groups.setdefault((r.snr_db, r.scheme), []).append(r)
    out = []
    for (snr, scheme), members in groups.items():
        ok = [r for r in members if r.status == "ok"]
        rec = {"snr_db": snr, "scheme": scheme, "n": len(ok)}
        for col in ("sum_rate_nats", "sum_rate_bits", "rho", "snr_boost_db"):
            rec[f"{col}_mean"], rec[f"{col}_se"] = _mean_se([getattr(r, col) for r in ok])
        rec["iterations_mean"] = _mean_se([r.iterations for r in ok])[0]
        out.append(rec)
    return out


# -- convergence trace -------------------------------------------------------

def run_convergence_trace(spec, snr_db=None, seed=None, out=None, write=True):
    """Per-iteration scaled sum rate of the dual search on one channel draw.

    The channel is drawn directly from ``seed`` (no per-trial hashing).
    """
    snr_db = spec.trace_snr_db if snr_db is None else snr_db
    seed = spec.trace_seed if seed is None else seed
    if snr_db is None:
        raise ConfigError("trace_snr_db", "trace needs an SNR")
    if seed is None:
        seed = spec.seed
    cfg = spec.network(snr_db)
    ch = sample_channels(cfg, seed)
    bd = bd_solve(cfg, ch)
    sol = minimize_power_factor(cfg, ch, bd, track_rates=True)
    records = []
    for t in sol.trace:
        rate = t.scaled_sum_rate
        feasible = math.isfinite(rate)
        records.append([_fmt(t.iteration), _fmt(rate) if feasible else "",
                        _fmt(rate / LN2) if feasible else "",
                        _fmt(t.rho) if feasible else "", t.kind,
                        _fmt(bd.sum_rate), _fmt(bd.sum_rate / LN2)])
    if write:
        _write_csv(out or spec.trace_out, TRACE_COLUMNS, records)
    return sol, bd


# -- csv ---------------------------------------------------------------------

def _write_csv(path, header, records):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(records)


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
