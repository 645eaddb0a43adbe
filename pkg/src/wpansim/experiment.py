"""Sweep execution: replicated scenario runs and plot-ready summaries.

A sweep's cartesian points run (optionally in parallel worker processes) and
land in a :class:`ResultsTable` whose row order — point index, then
replication, then per-point aggregate rows — never depends on worker
completion order.  Each (point, replication) pair derives its own seed from
the sweep's ``seed_base``, so any single run can be reproduced in isolation
without executing the rest of the sweep.
"""

from __future__ import annotations

import csv
import hashlib
import json
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from io import StringIO
from pathlib import Path

from wpansim.kernel import SYMBOL_RATE
from wpansim.metrics import MetricsRow
from wpansim.network import RunResult, StarNetwork
from wpansim.scenario import ScenarioSpec, SweepSpec
from wpansim.trace import MacTrace

__all__ = [
    "replication_seed", "run_scenario", "run_scenario_full",
    "ResultsTable", "run_sweep", "read_results", "emit_plot_data",
    "METRIC_COLUMNS",
]

#: Per-run output columns, in CSV order.  Times appear in symbols and seconds.
METRIC_COLUMNS = [
    "generated", "delivered", "dropped_queue_overflow",
    "dropped_channel_access", "dropped_retry_exhausted", "unresolved",
    "t_start_symbols", "t_end_symbols", "duration_s",
    "effective_data_rate_bps", "packet_loss_rate",
    "mean_delay_symbols", "mean_delay_s",
]


def replication_seed(seed_base: int, point: dict, replication: int) -> int:
    """Stable 64-bit seed for one replication of one sweep point.

    Hashes the point's parameters by name, so the seed survives reordering of
    axes and is insensitive to the position of the point within the sweep.
    """
    payload = json.dumps([seed_base, sorted(point.items()), replication],
                         separators=(",", ":"))
    digest = hashlib.sha256(payload.encode()).digest()
    return int.from_bytes(digest[:8], "big")


def run_scenario_full(spec: ScenarioSpec, seed: int | None = None,
                      trace: MacTrace | None = None) -> RunResult:
    """Run one scenario to its stop condition; ``seed`` overrides the scenario's."""
    net = StarNetwork(
        mode=spec.mode, n_devices=spec.n_devices, msdu=spec.msdu,
        interval_s=spec.interval_s, distribution=spec.distribution,
        csma_params=spec.csma_params(), bo=spec.bo, so=spec.so,
        queue_capacity=spec.queue_capacity, quota=spec.quota,
        run_time_s=spec.run_time_s,
        seed=spec.seed if seed is None else seed,
        placement=spec.placement, trace=trace)
    return net.run()


def run_scenario(spec: ScenarioSpec, seed: int | None = None) -> MetricsRow:
    """Run one scenario and return its metrics row; deterministic in
    (spec, seed)."""
    return run_scenario_full(spec, seed).metrics


def _metric_values(row: MetricsRow | None) -> dict:
    if row is None:
        return {name: None for name in METRIC_COLUMNS}
    values = {f.name: getattr(row, f.name) for f in fields(MetricsRow)}
    values["duration_s"] = (row.t_end_symbols - row.t_start_symbols) / SYMBOL_RATE
    return values


def _fmt_axis_value(value) -> object:
    # Compound (bo, so) axis values render as "bo-so" so they stay a single
    # CSV cell and a readable series label.
    if isinstance(value, tuple):
        return "-".join(str(v) for v in value)
    return value


def _fmt_cell(value) -> str:
    if value is None:
        return "NA"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass
class ResultsTable:
    """Sweep output: one 'sample' row per run plus per-point 'mean' and
    'stddev' rows, all in deterministic order."""

    columns: list[str]
    rows: list[dict]

    def write_csv(self, f) -> None:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_fmt_cell(row.get(col)) for col in self.columns])

    def to_csv(self) -> str:
        buf = StringIO()
        self.write_csv(buf)
        return buf.getvalue()

    def samples(self) -> list[dict]:
        return [r for r in self.rows if r["kind"] == "sample"]


def _run_job(job):
    index, rep, spec, seed = job
    try:
        return index, rep, seed, run_scenario(spec, seed), None
    except Exception as exc:  # a failed run is a result, not a crash
        return index, rep, seed, None, f"{type(exc).__name__}: {exc}"


def run_sweep(sweep: SweepSpec, jobs: int = 1) -> ResultsTable:
    """Run every (point, replication) pair of a sweep.

    Failed runs keep their row (status ``failed`` with the error message) and
    are excluded from the aggregate rows.  Output bytes depend only on the
    sweep and its seeds, never on scheduling.
    """
    if jobs < 1:
        raise ValueError(f"jobs must be positive, got {jobs}")
    points = sweep.points()
    axis_names = [name for name, _ in sweep.axes]
    columns = (["point", "replication", "kind"] + axis_names + ["seed"]
               + METRIC_COLUMNS + ["status", "error"])

    jobs_list = []
    for index, point in enumerate(points):
        spec = sweep.point_spec(point)
        for rep in range(sweep.replications):
            seed = replication_seed(sweep.seed_base, point, rep)
            jobs_list.append((index, rep, spec, seed))

    if jobs == 1:
        outcomes = map(_run_job, jobs_list)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_job, jobs_list, chunksize=1))

    by_point: dict[int, list] = {i: [] for i in range(len(points))}
    for outcome in outcomes:
        by_point[outcome[0]].append(outcome)

    rows = []
    for index, point in enumerate(points):
        axis_cells = {name: _fmt_axis_value(point[name]) for name in axis_names}
        metric_rows = []
        for _, rep, seed, metrics, error in sorted(by_point[index],
                                                   key=lambda o: o[1]):
            row = {"point": index, "replication": rep, "kind": "sample",
                   **axis_cells, "seed": seed,
                   **_metric_values(metrics),
                   "status": "ok" if error is None else "failed",
                   "error": error}
            rows.append(row)
            if error is None:
                metric_rows.append(row)
        for kind in ("mean", "stddev"):
            agg = {"point": index, "replication": None, "kind": kind,
                   **axis_cells, "seed": None, "status": None, "error": None}
            for col in METRIC_COLUMNS:
                values = [r[col] for r in metric_rows if r[col] is not None]
                if kind == "mean":
                    agg[col] = statistics.fmean(values) if values else None
                else:
                    agg[col] = (statistics.stdev(values)
                                if len(values) >= 2 else None)
            rows.append(agg)
    return ResultsTable(columns=columns, rows=rows)


def _parse_cell(text: str):
    if text == "NA":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_results(path) -> ResultsTable:
    """Read a results CSV back into a table (inverse of ``write_csv``)."""
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            columns = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty results file") from None
        rows = [dict(zip(columns, map(_parse_cell, row))) for row in reader]
    return ResultsTable(columns=columns, rows=rows)


def emit_plot_data(results: ResultsTable, x_axis: str, metric: str,
                   series_key: str | None = None) -> str:
    """Summarize sample rows into plot-ready text.

    One block per value of ``series_key`` (a single block when it is None),
    each holding tab-separated columns ``x mean stddev n`` with x ascending.
    Any plotting tool that reads whitespace-separated columns can consume it.
    """
    for name in (x_axis, metric) + ((series_key,) if series_key else ()):
        if name not in results.columns:
            raise ValueError(f"unknown column {name!r}; available: "
                             f"{', '.join(results.columns)}")

    samples = [r for r in results.samples() if r.get("status") == "ok"]
    header = "x\tmean\tstddev\tn"
    out = StringIO()
    if series_key is None:
        groups = [(None, samples)]
    else:
        order = []
        buckets: dict = {}
        for row in samples:
            key = row[series_key]
            if key not in buckets:
                buckets[key] = []
                order.append(key)
            buckets[key].append(row)
        groups = [(key, buckets[key]) for key in order]

    first = True
    if not groups:
        out.write(header + "\n")
    for key, rows in groups:
        if not first:
            out.write("\n")
        first = False
        if key is not None:
            out.write(f"# series: {series_key}={_fmt_cell(key)}\n")
        out.write(header + "\n")
        xs: dict = {}
        x_order = []
        for row in rows:
            x = row[x_axis]
            if x not in xs:
                xs[x] = []
                x_order.append(x)
            if row[metric] is not None:
                xs[x].append(row[metric])
        if all(isinstance(x, (int, float)) for x in x_order):
            x_order.sort()
        for x in x_order:
            values = xs[x]
            mean = statistics.fmean(values) if values else None
            stddev = statistics.stdev(values) if len(values) >= 2 else None
            out.write(f"{_fmt_cell(x)}\t{_fmt_cell(mean)}\t"
                      f"{_fmt_cell(stddev)}\t{len(values)}\n")
    return out.getvalue()


def write_metrics_csv(rows: list[MetricsRow], f) -> None:
    """Write standalone metrics rows (the single-run CSV shape)."""
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(METRIC_COLUMNS)
    for row in rows:
        values = _metric_values(row)
        writer.writerow([_fmt_cell(values[col]) for col in METRIC_COLUMNS])
