"""Metric files: per-step CSV, seed-aggregated tables and JSON state dumps."""
import csv
import json
import math
import os

import numpy as np


def metric_columns(n_orus):
    return (["step", "scheme", "seed"] + [f"omega_{s}" for s in range(n_orus)]
            + ["std_dev", "sum_rate_bps", "p_o", "eff_sum_rate_bps", "objective",
               "handover_count"])


def _fmt(v):
    # repr round-trips exactly, so equal runs give equal bytes
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def metric_rows(result):
    for i in range(len(result)):
        yield ([i + 1, result.scheme, result.seed] + list(result.utilization[i])
               + [result.std_dev[i], result.sum_rate[i], result.p_o[i],
                  result.eff_sum_rate[i], result.objective[i], result.handovers[i]])


def write_metrics(result, path):
    """One row per step for a :class:`RunResult`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(metric_columns(result.utilization.shape[1]))
        for row in metric_rows(result):
            w.writerow([_fmt(v) for v in row])
    return path


def read_metrics(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def write_state(state, path):
    with open(path, "w") as fh:
        json.dump(_jsonable(state), fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


AGGREGATE_COLUMNS = ["scheme", "speed", "users", "n_seeds",
                     "std_dev_mean", "std_dev_se", "eff_sum_rate_mean", "eff_sum_rate_se",
                     "sum_rate_mean", "sum_rate_se", "p_o_mean", "p_o_se"]


def mean_se(values):
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return math.nan, math.nan
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def aggregate(rows):
    """Group per-run summary rows by (scheme, speed, users); mean and SE over seeds."""
    groups = {}
    for r in rows:
        groups.setdefault((r["scheme"], r["speed"], r["users"]), []).append(r)
    out = []
    for (scheme, speed, users), rs in groups.items():
        row = {"scheme": scheme, "speed": speed, "users": users, "n_seeds": len(rs)}
        for key in ("std_dev", "eff_sum_rate", "sum_rate", "p_o"):
            row[f"{key}_mean"], row[f"{key}_se"] = mean_se([r[key] for r in rs])
        out.append(row)
    return out


def write_table(rows, path, columns):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in columns])
    return path


def format_table(rows, columns):
    """Fixed-width text rendering for the terminal."""
    cells = [[c for c in columns]]
    for r in rows:
        cells.append([f"{r[c]:.4g}" if isinstance(r[c], float) else str(r[c]) for c in columns])
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return "\n".join("  ".join(v.rjust(w) for v, w in zip(row, widths)) for row in cells)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
