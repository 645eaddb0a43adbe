"""Scenario/sweep YAML loading: defaults, diagnostics, round-trips, and the
packaged configuration library."""

import dataclasses

import pytest

from wpansim.scenario import (BUILTINS, ScenarioError, ScenarioSpec,
                              SweepSpec, builtin_path, dump_scenario,
                              load_builtin, load_scenario, loads_scenario)


def test_minimal_file_fills_in_defaults():
    spec = loads_scenario("mode: nonbeacon\nquota: 100\n")
    assert isinstance(spec, ScenarioSpec)
    assert spec.n_devices == 8 and spec.msdu == 60
    assert spec.interval_s == 0.025
    assert spec.distribution == "exponential"
    assert (spec.min_be, spec.max_be, spec.max_nb, spec.max_frame_retries) \
        == (3, 5, 4, 3)
    assert spec.queue_capacity == 1
    assert spec.bo is None and spec.so is None
    assert spec.ack_enabled is True


def test_spec_validation_mirrors_the_loader():
    with pytest.raises(ValueError):
        ScenarioSpec(mode="nonbeacon")            # no stop condition
    with pytest.raises(ValueError):
        ScenarioSpec(mode="nonbeacon", quota=5, run_time_s=1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(mode="beacon", quota=5)      # missing orders
    with pytest.raises(ValueError):
        ScenarioSpec(mode="nonbeacon", quota=5, bo=3, so=2)
    with pytest.raises(ValueError):
        ScenarioSpec(mode="beacon", quota=5, bo=3, so=4)
    with pytest.raises(ValueError):
        ScenarioSpec(mode="nonbeacon", quota=5, msdu=200)
    with pytest.raises(ValueError):
        ScenarioSpec(mode="nonbeacon", quota=5, seed=-1)
    spec = ScenarioSpec(mode="beacon", bo=7, so=6, run_time_s=10.0)
    assert spec.csma_params().min_be == 3


@pytest.mark.parametrize("text,needle", [
    ("mode: nonbeacon\nquota: 10\nquot: 3\n", "f.yaml:3: unknown key 'quot'"),
    ("mode: beacon\nbo: 7\nso: 8\nrun_time_s: 1\n",
     "f.yaml:3: so must not exceed bo"),
    ("mode: nonbeacon\nquota: 5\nquota: 6\n", "f.yaml:3: duplicate key"),
    ("- 1\n- 2\n", "top level must be a mapping"),
    ("", "file is empty"),
    ("mode: nonbeacon\nquota: 5\nn_devices: true\n",
     "n_devices must be an integer"),
    ("mode: nonbeacon\nquota: 5\nmax_nb: 9\n", "max_nb must be <= 5"),
    ("mode: nonbeacon\nquota: 5\nmsdu: 0\n", "msdu"),
    ("mode: warp\nquota: 5\n", "mode"),
])
def test_scenario_diagnostics_carry_file_and_line(text, needle):
    with pytest.raises(ScenarioError) as err:
        loads_scenario(text, label="f.yaml")
    assert needle in str(err.value)


@pytest.mark.parametrize("text,needle", [
    ("base: {mode: nonbeacon, quota: 5}\naxes:\n  - [msdu, [10, 20]]\n"
     "  - [msdu, [30]]\n", "appears twice"),
    ("base: {mode: nonbeacon, quota: 5}\naxes:\n  - [n_devices, []]\n",
     "has no values"),
    ("base: {mode: nonbeacon, quota: 5}\naxes: {}\n",
     "non-empty 'axes' list"),
    ("base: {mode: nonbeacon, quota: 5}\naxes:\n  - [seed, [1, 2]]\n",
     "unknown sweep axis 'seed'"),
    ("base: {mode: nonbeacon, quota: 5}\naxes:\n  - [msdu, [10]]\n"
     "replications: 0\n", "replications must be >= 1"),
    ("base: {mode: beacon, bo: 7, so: 6, run_time_s: 1}\naxes:\n"
     "  - [bo_so, [[7, 8]]]\n", "invalid sweep point"),
    ("base: {mode: nonbeacon, quota: 5, run_time_s: 2}\naxes:\n"
     "  - [msdu, [10]]\n", "mutually exclusive"),
])
def test_sweep_diagnostics(text, needle):
    with pytest.raises(ScenarioError) as err:
        loads_scenario(text, label="f.yaml")
    assert needle in str(err.value)


def test_sweep_points_enumerate_first_axis_slowest():
    sweep = loads_scenario(
        "base: {mode: beacon, bo: 7, so: 6, run_time_s: 2}\n"
        "axes:\n"
        "  - [so, [1, 2]]\n"
        "  - [interval_s, [0.01, 0.1]]\n"
        "replications: 3\n"
        "seed_base: 42\n")
    assert isinstance(sweep, SweepSpec)
    assert sweep.replications == 3 and sweep.seed_base == 42
    assert sweep.points() == [
        {"so": 1, "interval_s": 0.01}, {"so": 1, "interval_s": 0.1},
        {"so": 2, "interval_s": 0.01}, {"so": 2, "interval_s": 0.1}]
    spec = sweep.point_spec(sweep.points()[0])
    assert spec.so == 1 and spec.bo == 7 and spec.interval_s == 0.01


def test_bo_so_axis_expands_into_both_orders():
    sweep = loads_scenario(
        "base: {mode: beacon, bo: 7, so: 6, run_time_s: 2}\n"
        "axes:\n"
        "  - [bo_so, [[1, 0], [3, 2]]]\n")
    assert sweep.points() == [{"bo_so": (1, 0)}, {"bo_so": (3, 2)}]
    spec = sweep.point_spec({"bo_so": (3, 2)})
    assert (spec.bo, spec.so) == (3, 2)


def test_dump_round_trips_scenarios_and_sweeps(tmp_path):
    spec = ScenarioSpec(mode="beacon", n_devices=12, msdu=80,
                        interval_s=0.04, bo=5, so=3, run_time_s=30.0,
                        seed=77, queue_capacity=None)
    text = dump_scenario(spec)
    assert loads_scenario(text) == spec
    path = tmp_path / "point.yaml"
    path.write_text(text)
    assert load_scenario(path) == spec

    sweep = SweepSpec(base=spec, axes=(("msdu", (20, 60, 100)),),
                      replications=4, seed_base=9)
    assert loads_scenario(dump_scenario(sweep)) == sweep


def test_every_builtin_loads_and_round_trips():
    assert len(BUILTINS) == 10
    for name in BUILTINS:
        cfg = load_builtin(name)
        assert loads_scenario(dump_scenario(cfg)) == cfg
        assert builtin_path(name).name == f"{name}.yaml"
        if isinstance(cfg, SweepSpec):
            # every point constructs a valid spec
            for point in cfg.points():
                cfg.point_spec(point)


def test_builtin_sweeps_cover_both_modes():
    kinds = {name: type(load_builtin(name)).__name__ for name in BUILTINS}
    assert kinds["nonbeacon-defaults"] == "ScenarioSpec"
    assert kinds["beacon-defaults"] == "ScenarioSpec"
    sweep_names = [n for n, k in kinds.items() if k == "SweepSpec"]
    assert len(sweep_names) == 8
    modes = {load_builtin(n).base.mode for n in sweep_names}
    assert modes == {"nonbeacon", "beacon"}


def test_unknown_builtin_is_an_error():
    with pytest.raises(ScenarioError):
        load_builtin("no-such-study")


def test_point_spec_rejects_foreign_axes():
    sweep = load_builtin("s6-msdu")
    with pytest.raises((ScenarioError, TypeError, ValueError)):
        sweep.point_spec({"warp_factor": 9})


def test_replacing_base_fields_preserves_validity():
    # Downstream consumers shrink built-ins this way; it must keep validating.
    sweep = load_builtin("s6-msdu")
    smaller = dataclasses.replace(sweep.base, quota=10)
    assert smaller.quota == 10
    with pytest.raises(ValueError):
        dataclasses.replace(sweep.base, msdu=0)
