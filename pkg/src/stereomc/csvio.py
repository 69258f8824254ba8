"""Versioned CSV writers for chain, path and diagnostic outputs.

Every file starts with a schema comment line

    # stereomc-csv v1 kind=<kind> key=value ...

followed by a standard header row.  Floats are written with 17 significant
digits so a round trip through the file is lossless.
"""

from __future__ import annotations

import csv
import io
import os
from typing import Iterable

import numpy as np

from .sbps import EventPath
from .sps import Trace

SCHEMA_VERSION = "v1"


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _schema_line(kind: str, meta: dict) -> str:
    parts = [f"# stereomc-csv {SCHEMA_VERSION} kind={kind}"]
    for k, v in meta.items():
        if v is None:
            continue
        sv = _fmt(v) if not isinstance(v, str) else v
        if " " in sv or "," in sv:
            continue
        parts.append(f"{k}={sv}")
    return " ".join(parts)


def write_rows(path: str, kind: str, meta: dict, header: list[str], rows: Iterable[Iterable]) -> None:
    buf = io.StringIO()
    buf.write(_schema_line(kind, meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as f:
        f.write(buf.getvalue())
    os.replace(tmp, path)


def write_trace(path: str, trace: Trace, coords: str = "first") -> None:
    """Trace rows are post-step states (so a zero-step run is header-only).

    ``coords="all"`` stores every coordinate; the default keeps coordinate 1
    plus the squared norm.  Discretized continuous paths store one row per
    sample with the source time attached.
    """
    meta = dict(trace.meta)
    meta["coords"] = coords
    states = trace.states
    d = states.shape[1]
    discretized = trace.source_times is not None

    if coords == "all":
        coord_cols = [f"x_{i + 1}" for i in range(d)]
    else:
        coord_cols = ["x_1", "norm_sq"]

    header = ["step"] + coord_cols + ["latitude", "accepted", "log_ratio"]
    if discretized:
        header.append("source_time")

    def coord_vals(row: np.ndarray):
        if coords == "all":
            return list(row)
        return [row[0], float(np.dot(row, row))]

    def rows():
        if discretized:
            for k in range(len(states)):
                yield [k, *coord_vals(states[k]), trace.latitudes[k], 1, 0.0, trace.source_times[k]]
        else:
            for t in range(1, len(states)):
                yield [t, *coord_vals(states[t]), trace.latitudes[t], trace.accepted[t - 1], trace.log_ratios[t - 1]]

    write_rows(path, "trace", meta, header, rows())


def write_events(path: str, ep: EventPath, coords: str = "compact") -> None:
    """Event log; compact mode keeps the latitude and first two coordinates."""
    meta = dict(ep.meta)
    meta.update({"total_time": ep.total_time, "flow": ep.flow_kind, "coords": coords})
    for k, v in ep.counts.items():
        meta[f"count_{k}"] = v
    width = ep.states.shape[1] if len(ep.states) else 0
    if coords == "all":
        coord_cols = [f"z_{i + 1}" for i in range(width)]

        def coord_vals(row):
            return list(row)
    else:
        coord_cols = ["latitude", "z_1", "z_2"]

        def coord_vals(row):
            lat = row[-1] if ep.flow_kind == "sphere" else np.nan
            return [lat, row[0], row[1] if len(row) > 1 else np.nan]

    header = ["t", "kind"] + coord_cols + ["v_dot_grad"]

    def rows():
        for i in range(len(ep.times)):
            yield [ep.times[i], ep.kinds[i], *coord_vals(ep.states[i]), ep.v_dot_grad[i]]

    write_rows(path, "events", meta, header, rows())


def write_diagnostics(path: str, rows_in: list[dict]) -> None:
    header = [
        "sampler",
        "observable",
        "esjd",
        "esjd_per_dim",
        "acceptance_rate",
        "ess",
        "ess_per_switch",
        "batch_count",
        "n_switches",
        "seed",
    ]
    write_rows(path, "diagnostics", {}, header, ([r.get(k, "") for k in header] for r in rows_in))


def write_acf(path: str, meta: dict, lags: np.ndarray, series: dict[str, np.ndarray]) -> None:
    names = list(series)
    header = ["lag"] + names
    rows = ([int(lag), *[series[n][i] for n in names]] for i, lag in enumerate(lags))
    write_rows(path, "acf", meta, header, rows)


def write_sweep(path: str, meta: dict, rows_in: list[dict]) -> None:
    header = ["R_multiplier", "R", "h", "ell", "acceptance_rate", "esjd", "esjd_per_dim", "n_steps", "seed"]
    write_rows(path, "esjd_sweep", meta, header, ([r.get(k, "") for k in header] for r in rows_in))


def write_ess_curve(path: str, meta: dict, rows_in: list[dict]) -> None:
    header = [
        "sampler",
        "refresh_rate",
        "observable",
        "ess",
        "ess_per_switch",
        "refresh_fraction",
        "n_switches",
        "total_time",
        "n_seeds",
    ]
    write_rows(path, "ess_curve", meta, header, ([r.get(k, "") for k in header] for r in rows_in))


def write_tuning(path: str, meta: dict, rows_in: list[dict]) -> None:
    header = [
        "nu",
        "c_nu",
        "c_nu_ratio",
        "ell",
        "ell_numeric",
        "h",
        "predicted_acceptance",
        "predicted_esjd",
        "predicted_esjd_numeric",
        "diffusion_speed",
    ]
    write_rows(path, "tuning", meta, header, ([r.get(k, "") for k in header] for r in rows_in))


def write_gk(path: str, meta: dict, z: np.ndarray, curves: dict[str, np.ndarray]) -> None:
    names = list(curves)
    header = ["z"] + names
    rows = ([z[i], *[curves[n][i] for n in names]] for i in range(len(z)))
    write_rows(path, "gk", meta, header, rows)


def write_latitude_compare(path: str, meta: dict, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    n = len(next(iter(columns.values())))
    header = ["step"] + names
    rows = ([k, *[columns[nm][k] for nm in names]] for k in range(n))
    write_rows(path, "latitude_compare", meta, header, rows)
