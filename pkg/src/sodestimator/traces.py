"""CSV and text outputs of a run.

Numbers are written in scientific notation with 9 significant digits;
event flags and counts are integers.
"""

from __future__ import annotations

import csv

import numpy as np

from .pipeline import RunResult

__all__ = [
    "FLOAT_FMT",
    "trace_header",
    "write_trace_csv",
    "read_trace_csv",
    "write_table_csv",
    "read_table_csv",
    "write_metrics_txt",
    "read_metrics_txt",
]

FLOAT_FMT = "%.8e"


def fmt(x) -> str:
    return FLOAT_FMT % x


def trace_header(n: int, p: int):
    cols = ["t"]
    for prefix, count in (("x_true", n), ("x_hat", n), ("x_base", n), ("y_held", p), ("y_rec", p), ("event", p)):
        cols += [f"{prefix}_{i + 1}" for i in range(count)]
    return cols


def write_trace_csv(result: RunResult, path):
    traj = result.trajectory
    n, p = traj.states.shape[1], traj.outputs.shape[1]
    table = np.column_stack(
        [
            traj.times,
            traj.states,
            result.estimates,
            result.baseline_estimates,
            result.held,
            result.reconstructions,
            result.event_flags,
        ]
    )
    row_fmt = ",".join([FLOAT_FMT] * (1 + 3 * n + 2 * p) + ["%d"] * p)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(trace_header(n, p)) + "\n")
        np.savetxt(fh, table, fmt=row_fmt, delimiter=",", newline="\n")


def read_trace_csv(path):
    """Column name -> array."""
    with open(path, newline="") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: {data.shape[1]} columns for {len(header)} header fields")
    return {name: data[:, j] for j, name in enumerate(header)}


def write_table_csv(path, header, rows):
    """Write rows of mixed ints and floats under ``header``."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fields = [str(int(v)) if isinstance(v, (int, np.integer)) else fmt(v) for v in row]
            fh.write(",".join(fields) + "\n")


def read_table_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[int(v) if v.lstrip("-").isdigit() else float(v) for v in r] for r in reader]
    return header, rows


def write_metrics_txt(path, entries):
    """``key = value`` lines in the given order."""
    with open(path, "w", newline="") as fh:
        for key, value in entries:
            if isinstance(value, (int, np.integer)):
                fh.write(f"{key} = {int(value)}\n")
            elif isinstance(value, str):
                fh.write(f"{key} = {value}\n")
            else:
                fh.write(f"{key} = {fmt(value)}\n")


def read_metrics_txt(path):
    out = {}
    with open(path) as fh:
        for line in fh:
            key, _, value = line.partition(" = ")
            value = value.strip()
            try:
                out[key] = int(value)
            except ValueError:
                try:
                    out[key] = float(value)
                except ValueError:
                    out[key] = value
    return out
