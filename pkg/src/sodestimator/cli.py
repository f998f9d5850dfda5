"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 numerical or
pipeline failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .config import ConfigError, ScenarioConfig, parse_config
from .kalman import NumericalError
from .pipeline import run_scenario
from .sampler import write_events_csv
from .traces import write_metrics_txt, write_table_csv, write_trace_csv

log = logging.getLogger("sodestimator")

EXIT_OK, EXIT_USAGE, EXIT_PIPELINE, EXIT_IO = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _run(cfg: ScenarioConfig, check_covariance=False):
    return run_scenario(
        cfg.model,
        cfg.x0,
        cfg.channels,
        cfg.T,
        cfg.duration,
        cfg.seed,
        pocs=cfg.pocs,
        transport=cfg.transport(),
        x0_hat=cfg.x0_hat,
        P0=cfg.P0,
        check_covariance=check_covariance,
    )


def _summary_row(cfg: ScenarioConfig):
    """Scalar results of one run, for the multi-run tables."""
    m = _run(cfg).metrics
    return (
        m.mse_per_state.tolist(),
        m.baseline_mse_per_state.tolist(),
        [int(c) for c in m.event_count_per_channel],
    )


def _map(fn, items, workers):
    workers = max(1, min(workers or os.cpu_count() or 1, len(items)))
    if workers == 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _outdir(args, cfg):
    out = Path(args.out or cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def metrics_entries(cfg: ScenarioConfig, result):
    m = result.metrics
    entries = [
        ("scenario", cfg.source),
        ("seed", cfg.seed),
        ("steps", len(result.trajectory)),
        ("T", cfg.T),
        ("omega", cfg.pocs.omega if cfg.pocs else float("nan")),
    ]
    for j, v in enumerate(m.mse_per_state):
        entries.append((f"mse_x{j + 1}", v))
    for j, v in enumerate(m.baseline_mse_per_state):
        entries.append((f"baseline_mse_x{j + 1}", v))
    for i, c in enumerate(cfg.channels):
        entries.append((f"events_{c.name}", int(m.event_count_per_channel[i])))
        entries.append((f"compression_{c.name}", m.compression_ratio[i]))
    return entries


def cmd_run(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = _outdir(args, cfg)
    result = _run(cfg)
    write_trace_csv(result, out / "trace.csv")
    write_events_csv(result.events, out / "events.csv")
    write_metrics_txt(out / "metrics.txt", metrics_entries(cfg, result))
    log.info("wrote %s", out)
    return EXIT_OK


def _stat_header(cfg):
    n = cfg.model.n
    return (
        [f"mse_x{j + 1}" for j in range(n)]
        + [f"baseline_mse_x{j + 1}" for j in range(n)]
        + [f"events_{c.name}" for c in cfg.channels]
    )


def cmd_compare(args) -> int:
    cfg = parse_config(args.config)
    if args.seeds < 1:
        raise _UsageError("--seeds must be >= 1")
    base_seed = cfg.seed if args.seed is None else args.seed
    seeds = [base_seed + s for s in range(args.seeds)]
    out = _outdir(args, cfg)
    rows = _map(_summary_row, [cfg.with_seed(s) for s in seeds], args.workers)
    table = [[s, *prop, *base, *ev] for s, (prop, base, ev) in zip(seeds, rows)]
    write_table_csv(out / "compare.csv", ["seed"] + _stat_header(cfg), table)
    prop = np.array([r[0] for r in rows])
    base = np.array([r[1] for r in rows])
    for j in range(cfg.model.n):
        wins = int(np.sum(prop[:, j] <= base[:, j]))
        print(
            f"x{j + 1}: proposed wins {wins}/{len(seeds)} "
            f"(mean mse {prop[:, j].mean():.6g} vs baseline {base[:, j].mean():.6g})"
        )
    counts = np.array([r[2] for r in rows])
    print("mean events: " + ", ".join(f"{c.name}={v:.1f}" for c, v in zip(cfg.channels, counts.mean(0))))
    return EXIT_OK


def _parse_deltas(text):
    try:
        deltas = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"--deltas: not a comma-separated number list: {text!r}") from None
    if not deltas or any(d < 0 for d in deltas) or deltas != sorted(deltas):
        raise _UsageError("--deltas must be non-negative and sorted ascending")
    return deltas


def cmd_sweep_delta(args) -> int:
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    deltas = _parse_deltas(args.deltas)
    out = _outdir(args, cfg)
    rows = _map(_summary_row, [cfg.with_delta(d) for d in deltas], args.workers)
    table = [[d, *prop, *base, *ev] for d, (prop, base, ev) in zip(deltas, rows)]
    write_table_csv(out / "sweep.csv", ["delta"] + _stat_header(cfg), table)
    return EXIT_OK


PLOT_SCRIPT = '''"""Plot a trace.csv written by `sodestimator run`.

Usage: python plot_trace.py [trace.csv]
"""
import sys

import matplotlib.pyplot as plt
import numpy as np

N_STATES = {n}
N_OUTPUTS = {p}

path = sys.argv[1] if len(sys.argv) > 1 else "trace.csv"
data = np.genfromtxt(path, delimiter=",", names=True)
t = data["t"]

fig, axes = plt.subplots(N_STATES, 2, figsize=(10, 2.5 * N_STATES), sharex=True)
for j in range(1, N_STATES + 1):
    ax, err = axes[j - 1]
    ax.plot(t, data[f"x_true_{{j}}"], "k", lw=1, label="true")
    ax.plot(t, data[f"x_hat_{{j}}"], label="event-based")
    ax.plot(t, data[f"x_base_{{j}}"], "--", label="baseline")
    ax.set_ylabel(f"x{{j}}")
    err.plot(t, data[f"x_hat_{{j}}"] - data[f"x_true_{{j}}"], label="event-based")
    err.plot(t, data[f"x_base_{{j}}"] - data[f"x_true_{{j}}"], "--", label="baseline")
    err.set_ylabel(f"error x{{j}}")
axes[0, 0].legend()
axes[0, 1].legend()
axes[-1, 0].set_xlabel("t [s]")
axes[-1, 1].set_xlabel("t [s]")

fig2, ax2 = plt.subplots(N_OUTPUTS, 1, figsize=(10, 2.5 * N_OUTPUTS), sharex=True, squeeze=False)
for i in range(1, N_OUTPUTS + 1):
    ax = ax2[i - 1, 0]
    ax.step(t, data[f"y_held_{{i}}"], where="post", label="held")
    ax.plot(t, data[f"y_rec_{{i}}"], label="reconstructed")
    ev = data[f"event_{{i}}"] > 0
    ax.plot(t[ev], data[f"y_held_{{i}}"][ev], "o", ms=3, label="events")
    ax.set_ylabel(f"y{{i}}")
ax2[0, 0].legend()
plt.show()
'''


def cmd_emit_plot_script(args) -> int:
    cfg = parse_config(args.config)
    out = _outdir(args, cfg)
    script = PLOT_SCRIPT.format(n=cfg.model.n, p=cfg.model.p)
    (out / "plot_trace.py").write_text(script)
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="sodestimator", description=__doc__.splitlines()[0])
    parser.add_argument("-q", "--quiet", action="store_true", help="only report warnings and errors")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--config", required=True, help="scenario file or built-in name (paper-sec7)")
        p.add_argument("--out", help="output directory (default: [run] output)")
        p.add_argument("--seed", type=int, help="override [run] seed")

    p = sub.add_parser("run", help="single scenario run")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="proposed vs baseline across seeds")
    common(p)
    p.add_argument("--seeds", type=int, default=10,
                   help="number of seeds, counted up from the base seed")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep-delta", help="event count and error against delta")
    common(p)
    p.add_argument("--deltas", required=True, help="comma-separated, ascending")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: CPU count)")
    p.set_defaults(func=cmd_sweep_delta)

    p = sub.add_parser("emit-plot-script", help="write a matplotlib script for trace.csv")
    common(p)
    p.set_defaults(func=cmd_emit_plot_script)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (_UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, ValueError, ArithmeticError) as exc:
        print(f"pipeline error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
