"""Result files: per-run CSV, aggregate CSV/JSON and plot data.

Reals are written with 17 significant digits so that reading a file back
recovers every float exactly. Missing values are empty CSV fields and JSON
``null``.
"""
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import AllZeroEstimates, MissingSweepAxis, ZeroMean, ZeroReference
from ..metrics import RunEnsemble, coefficient_of_variation, male, rrmse

RUNS_HEADER = ["benchmark", "method", "N", "K", "d_x", "rho", "lambda", "repetition", "seed",
               "p_f", "p_f_recycled", "iterations", "performance_calls", "wall_time_ms", "error"]
AGGREGATE_HEADER = ["benchmark", "method", "N", "K", "d_x", "R", "mean_pf", "rrmse", "male",
                    "cov_percent", "excluded_zero_count", "mean_calls"]
_INT_FIELDS = {"N", "K", "d_x", "repetition", "seed", "iterations", "performance_calls", "R",
               "excluded_zero_count"}
_STR_FIELDS = {"benchmark", "method", "error"}


def fmt(value):
    """CSV text for one field."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "" if math.isnan(value) else "%.17g" % value
    return str(value)


def _parse(name, text):
    if name in _STR_FIELDS:
        return text
    if text == "":
        return None if name in _INT_FIELDS else float("nan")
    return int(text) if name in _INT_FIELDS else float(text)


def run_record(row):
    return {
        "benchmark": row.benchmark, "method": row.method, "N": row.N, "K": row.K, "d_x": row.d_x,
        "rho": row.rho, "lambda": row.lam, "repetition": row.repetition, "seed": row.seed,
        "p_f": row.p_f, "p_f_recycled": row.p_f_recycled, "iterations": row.iterations,
        "performance_calls": row.performance_calls, "wall_time_ms": row.wall_time_ms,
        "error": row.error,
    }


@dataclass
class AggregateRow:
    benchmark: str
    method: str
    N: int
    K: int
    d_x: int
    R: int
    mean_pf: float
    rrmse: float
    male: float
    cov_percent: float
    excluded_zero_count: int
    mean_calls: float

    def record(self):
        return {k: getattr(self, k) for k in AGGREGATE_HEADER}


def _safe(metric, ensemble):
    try:
        return metric(ensemble)
    except (ZeroReference, AllZeroEstimates, ZeroMean, ValueError):
        return float("nan")


def summarize(benchmark, method, point, estimates, calls, reference_pf):
    estimates = np.asarray(estimates, dtype=float)
    nan = float("nan")
    if estimates.size == 0:
        return AggregateRow(benchmark, method, point[0], point[1], point[2], 0, nan, nan, nan, nan,
                            0, nan)
    ens = RunEnsemble(method, benchmark, estimates, reference_pf, calls)
    return AggregateRow(benchmark, method, point[0], point[1], point[2], ens.repetitions,
                        ens.mean, _safe(rrmse, ens), _safe(male, ens),
                        _safe(coefficient_of_variation, ens), ens.zero_count, ens.mean_calls)


def aggregate(rows, reference_pf):
    """Aggregate rows per (method, grid point); failed runs are left out.

    ``reference_pf`` maps ``d_x`` to the reference probability (or None).
    SAIS groups yield two rows: the last-iteration estimate under the method
    label and the recycled estimate under ``<label>_recycled``.
    """
    groups = {}
    for row in rows:
        groups.setdefault((row.method, row.N, row.K, row.d_x), []).append(row)
    out = []
    for (method, n, k, d), members in groups.items():
        ok = [r for r in members if not r.failed]
        ref = reference_pf(d)
        bench = members[0].benchmark
        calls = [r.performance_calls for r in ok]
        out.append(summarize(bench, method, (n, k, d), [r.p_f for r in ok], calls, ref))
        if members[0].kind == "sais":
            out.append(summarize(bench, f"{method}_recycled", (n, k, d),
                                 [r.p_f_recycled for r in ok], calls, ref))
    return out


def write_runs_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUNS_HEADER)
        for row in rows:
            rec = run_record(row)
            writer.writerow([fmt(rec[k]) for k in RUNS_HEADER])


class RunsWriter:
    """Append rows to ``runs.csv`` as they arrive."""

    def __init__(self, path):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(RUNS_HEADER)

    def __call__(self, row):
        rec = run_record(row)
        self._writer.writerow([fmt(rec[k]) for k in RUNS_HEADER])
        self._fh.flush()

    def close(self):
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_aggregate_csv(aggregates, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for agg in aggregates:
            rec = agg.record()
            writer.writerow([fmt(rec[k]) for k in AGGREGATE_HEADER])


def _json_value(value):
    if value is None:
        return "null"
    if isinstance(value, (float, np.floating)):
        return "null" if not math.isfinite(value) else "%.17g" % value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return json.dumps(value)


def write_aggregate_json(aggregates, path):
    items = []
    for agg in aggregates:
        rec = agg.record()
        fields = ", ".join(f'"{k}": {_json_value(rec[k])}' for k in AGGREGATE_HEADER)
        items.append("    {" + fields + "}")
    body = ",\n".join(items)
    text = '{\n  "columns": ' + json.dumps(AGGREGATE_HEADER) + ',\n  "rows": [\n' + body + "\n  ]\n}\n"
    Path(path).write_text(text, encoding="utf-8")


def _read_csv(path, header):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        found = next(reader)
        if found != header:
            raise ValueError(f"{path}: unexpected header {found}")
        return [{k: _parse(k, v) for k, v in zip(header, line)} for line in reader]


def read_runs_csv(path):
    return _read_csv(path, RUNS_HEADER)


def read_aggregate_csv(path):
    return _read_csv(path, AGGREGATE_HEADER)


def read_aggregate_json(path):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    out = []
    for rec in data["rows"]:
        out.append({k: (float("nan") if rec[k] is None and k not in _INT_FIELDS else rec[k])
                    for k in AGGREGATE_HEADER})
    return out


def export_results(rows, out_dir, reference_pf, fmt_="csv"):
    """Write ``runs.csv`` and ``aggregate.csv``, plus ``aggregate.json`` for json."""
    if not rows:
        raise ValueError("no rows to export")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_runs_csv(rows, out_dir / "runs.csv")
    aggs = aggregate(rows, reference_pf)
    write_aggregate_csv(aggs, out_dir / "aggregate.csv")
    if fmt_ == "json":
        write_aggregate_json(aggs, out_dir / "aggregate.json")
    return aggs


def export_plot_data(aggregates, out_dir, reference_pf):
    """Long-format ``pf_vs_dim.csv`` and ``male_vs_dim.csv`` from a d_x sweep.

    Each file lists ``dim,method,value``; the first file also carries a
    ``reference`` row per dimension with the exact probability.
    """
    dims = sorted({a.d_x for a in aggregates})
    if len(dims) < 2:
        raise MissingSweepAxis("plot data needs results at two or more values of d_x")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ordered = sorted(aggregates, key=lambda a: a.d_x)
    pf_path, male_path = out_dir / "pf_vs_dim.csv", out_dir / "male_vs_dim.csv"
    with open(pf_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "method", "mean_pf"])
        for d in dims:
            ref = reference_pf(d)
            if ref is not None:
                w.writerow([d, "reference", fmt(float(ref))])
            for a in ordered:
                if a.d_x == d:
                    w.writerow([d, a.method, fmt(a.mean_pf)])
    with open(male_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dim", "method", "male"])
        for a in ordered:
            w.writerow([a.d_x, a.method, fmt(a.male)])
    return pf_path, male_path
