"""Sweep execution: seeding, row layout, aggregates, failure handling,
the results CSV round-trip, and plot-data extraction."""

import pytest

import wpansim.experiment as experiment
from wpansim.experiment import (METRIC_COLUMNS, ResultsTable, emit_plot_data,
                                read_results, replication_seed, run_scenario,
                                run_scenario_full, run_sweep)
from wpansim.scenario import ScenarioSpec, SweepSpec


def _tiny_sweep(**kwargs):
    base = ScenarioSpec(mode="nonbeacon", n_devices=2, msdu=60,
                        interval_s=0.05, quota=5)
    defaults = dict(base=base, axes=(("msdu", (20, 60)),),
                    replications=3, seed_base=17)
    defaults.update(kwargs)
    return SweepSpec(**defaults)


def test_replication_seeds_are_stable_and_distinct():
    a = replication_seed(1, {"msdu": 20, "n_devices": 8}, 0)
    b = replication_seed(1, {"n_devices": 8, "msdu": 20}, 0)
    assert a == b                       # axis order never matters
    assert a.bit_length() <= 64
    others = {replication_seed(1, {"msdu": 20, "n_devices": 8}, r)
              for r in range(1, 6)}
    assert a not in others and len(others) == 5
    assert replication_seed(2, {"msdu": 20, "n_devices": 8}, 0) != a


def test_run_scenario_is_deterministic_in_spec_and_seed():
    spec = ScenarioSpec(mode="nonbeacon", n_devices=4, interval_s=0.02,
                        quota=10, seed=33)
    assert run_scenario(spec) == run_scenario(spec)
    assert run_scenario(spec, seed=99) != run_scenario(spec)
    result = run_scenario_full(spec)
    assert result.metrics == run_scenario(spec)
    assert len(result.log) == result.metrics.generated


def test_sweep_rows_follow_point_then_replication_order():
    table = run_sweep(_tiny_sweep())
    assert table.columns[:4] == ["point", "replication", "kind", "msdu"]
    assert table.columns[-2:] == ["status", "error"]
    shape = [(r["point"], r["replication"], r["kind"]) for r in table.rows]
    assert shape == [
        (0, 0, "sample"), (0, 1, "sample"), (0, 2, "sample"),
        (0, None, "mean"), (0, None, "stddev"),
        (1, 0, "sample"), (1, 1, "sample"), (1, 2, "sample"),
        (1, None, "mean"), (1, None, "stddev")]
    samples = table.samples()
    assert len(samples) == 6
    assert all(r["status"] == "ok" for r in samples)
    assert all(r["generated"] == 10 for r in samples)   # 2 devices x 5
    # The recorded seed is exactly the derived replication seed.
    assert samples[0]["seed"] == replication_seed(17, {"msdu": 20}, 0)


def test_sweep_output_is_independent_of_worker_count():
    sweep = _tiny_sweep()
    assert run_sweep(sweep, jobs=1).to_csv() == run_sweep(sweep, jobs=2).to_csv()


def test_sweep_aggregates_average_the_samples():
    table = run_sweep(_tiny_sweep())
    point0 = [r for r in table.rows if r["point"] == 0]
    samples = [r for r in point0 if r["kind"] == "sample"]
    mean = next(r for r in point0 if r["kind"] == "mean")
    stddev = next(r for r in point0 if r["kind"] == "stddev")
    rates = [r["effective_data_rate_bps"] for r in samples]
    assert mean["effective_data_rate_bps"] == pytest.approx(sum(rates) / 3)
    assert stddev["effective_data_rate_bps"] >= 0.0
    assert mean["replication"] is None and mean["seed"] is None


def test_failed_runs_are_rows_not_crashes(monkeypatch):
    real = experiment.run_scenario

    def flaky(spec, seed=None):
        if spec.msdu == 60:
            raise RuntimeError("injected fault")
        return real(spec, seed)

    monkeypatch.setattr(experiment, "run_scenario", flaky)
    table = run_sweep(_tiny_sweep())          # jobs=1 runs in-process
    failed = [r for r in table.rows if r["status"] == "failed"]
    assert len(failed) == 3
    assert all(r["error"] == "RuntimeError: injected fault" for r in failed)
    assert all(r[c] is None for r in failed for c in METRIC_COLUMNS)
    # Aggregates for the failed point hold no values at all.
    mean1 = next(r for r in table.rows
                 if r["point"] == 1 and r["kind"] == "mean")
    assert all(mean1[c] is None for c in METRIC_COLUMNS)
    # The healthy point still aggregates normally.
    mean0 = next(r for r in table.rows
                 if r["point"] == 0 and r["kind"] == "mean")
    assert mean0["effective_data_rate_bps"] > 0


def test_results_csv_round_trips(tmp_path):
    table = run_sweep(_tiny_sweep(replications=2))
    path = tmp_path / "results.csv"
    with open(path, "w") as f:
        table.write_csv(f)
    loaded = read_results(path)
    assert loaded.columns == table.columns
    assert len(loaded.rows) == len(table.rows)
    for mine, theirs in zip(table.rows, loaded.rows):
        for col in table.columns:
            assert mine.get(col) == theirs.get(col), col
    with pytest.raises(ValueError):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        read_results(empty)


def test_rewriting_a_reloaded_table_is_byte_identical(tmp_path):
    table = run_sweep(_tiny_sweep(replications=2))
    path = tmp_path / "results.csv"
    with open(path, "w") as f:
        table.write_csv(f)
    assert read_results(path).to_csv() == table.to_csv()


def test_plot_data_groups_and_sorts(tmp_path):
    base = ScenarioSpec(mode="nonbeacon", n_devices=2, msdu=60,
                        interval_s=0.05, quota=5)
    sweep = SweepSpec(base=base,
                      axes=(("n_devices", (4, 2)), ("msdu", (60, 20))),
                      replications=2, seed_base=3)
    table = run_sweep(sweep)
    text = emit_plot_data(table, "msdu", "effective_data_rate_bps",
                          series_key="n_devices")
    blocks = text.strip().split("\n\n")
    assert len(blocks) == 2
    assert blocks[0].startswith("# series: n_devices=4")
    assert blocks[1].startswith("# series: n_devices=2")
    for block in blocks:
        lines = block.splitlines()
        assert lines[1] == "x\tmean\tstddev\tn"
        xs = [float(line.split("\t")[0]) for line in lines[2:]]
        assert xs == sorted(xs)          # 20 before 60 despite axis order
        assert all(line.split("\t")[3] == "2" for line in lines[2:])


def test_plot_data_without_series_is_one_block():
    table = run_sweep(_tiny_sweep(replications=2))
    text = emit_plot_data(table, "msdu", "mean_delay_s")
    lines = text.splitlines()
    assert lines[0] == "x\tmean\tstddev\tn"
    assert len(lines) == 3


def test_plot_data_rejects_unknown_columns():
    table = run_sweep(_tiny_sweep(replications=2))
    with pytest.raises(ValueError):
        emit_plot_data(table, "msdu", "throughput")
    with pytest.raises(ValueError):
        emit_plot_data(table, "voltage", "mean_delay_s")


def test_plot_data_on_empty_results_is_just_a_header():
    table = ResultsTable(columns=["point", "kind", "msdu", "status",
                                  "mean_delay_s"], rows=[])
    assert emit_plot_data(table, "msdu", "mean_delay_s") == "x\tmean\tstddev\tn\n"


def test_run_sweep_validates_jobs():
    with pytest.raises(ValueError):
        run_sweep(_tiny_sweep(), jobs=0)
