"""Scenario files: single-run and sweep definitions in YAML.

A scenario file is a mapping that describes one simulation run.  A sweep file
wraps a ``base`` scenario with a list of parameter ``axes`` (their cartesian
product defines the run set) plus a replication count and a seed base.  The
key-by-key reference lives in ``docs/scenario-schema.md``; the packaged files
under ``wpansim/scenarios/`` double as worked examples.

Loading is strict: unknown keys, duplicate keys, values of the wrong type, and
out-of-range parameters are all errors, each reported with file and line.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from wpansim.csma import CsmaParams
from wpansim.phy import MAX_MSDU_BYTES
from wpansim.superframe import MAX_ORDER

__all__ = [
    "ScenarioError", "ScenarioSpec", "SweepSpec",
    "load_scenario", "loads_scenario", "dump_scenario",
    "BUILTINS", "builtin_path", "load_builtin",
]


class ScenarioError(ValueError):
    """A scenario file failed to parse or validate."""


@dataclass(frozen=True)
class ScenarioSpec:
    """One fully-specified simulation run.

    ``quota`` (packets per device) and ``run_time_s`` are the two stop
    conditions; exactly one must be set.  ``bo``/``so`` are required in beacon
    mode and must be absent otherwise.  ``queue_capacity=None`` means an
    unbounded MAC queue.
    """

    mode: str = "nonbeacon"
    n_devices: int = 8
    msdu: int = 60
    interval_s: float = 0.025
    distribution: str = "exponential"
    min_be: int = 3
    max_be: int = 5
    max_nb: int = 4
    max_frame_retries: int = 3
    bo: int | None = None
    so: int | None = None
    queue_capacity: int | None = 1
    quota: int | None = None
    run_time_s: float | None = None
    seed: int = 1
    placement: str = "equal"
    ack_enabled: bool = True

    def __post_init__(self):
        if self.mode not in ("nonbeacon", "beacon"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n_devices < 1:
            raise ValueError(f"n_devices must be positive, got {self.n_devices}")
        if not 1 <= self.msdu <= MAX_MSDU_BYTES:
            raise ValueError(
                f"msdu must be in [1, {MAX_MSDU_BYTES}], got {self.msdu}")
        if self.interval_s <= 0:
            raise ValueError(f"interval_s must be positive, got {self.interval_s}")
        if self.distribution not in ("exponential", "periodic"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.placement not in ("equal", "random"):
            raise ValueError(f"unknown placement {self.placement!r}")
        # Range-checks min_be/max_be/max_nb/max_frame_retries as a side effect.
        CsmaParams(min_be=self.min_be, max_be=self.max_be, max_nb=self.max_nb,
                   max_frame_retries=self.max_frame_retries,
                   ack_enabled=self.ack_enabled)
        if self.mode == "beacon":
            if self.bo is None or self.so is None:
                raise ValueError("beacon mode requires both bo and so")
            if not 0 <= self.so <= self.bo <= MAX_ORDER:
                raise ValueError(
                    f"need 0 <= so <= bo <= {MAX_ORDER}, got bo={self.bo} so={self.so}")
        elif self.bo is not None or self.so is not None:
            raise ValueError("bo/so are only meaningful in beacon mode")
        if (self.quota is None) == (self.run_time_s is None):
            raise ValueError("exactly one of quota and run_time_s must be set")
        if self.quota is not None and self.quota < 1:
            raise ValueError(f"quota must be positive, got {self.quota}")
        if self.run_time_s is not None and self.run_time_s <= 0:
            raise ValueError(f"run_time_s must be positive, got {self.run_time_s}")
        if self.queue_capacity is not None and self.queue_capacity < 0:
            raise ValueError(
                f"queue_capacity must be >= 0 or null, got {self.queue_capacity}")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must fit in 64 bits, got {self.seed}")

    def csma_params(self) -> CsmaParams:
        return CsmaParams(min_be=self.min_be, max_be=self.max_be,
                          max_nb=self.max_nb,
                          max_frame_retries=self.max_frame_retries,
                          ack_enabled=self.ack_enabled)


# Scenario fields a sweep axis may vary, plus the compound (bo, so) axis used
# for equal-duty-cycle sweeps.
_AXIS_NAMES = frozenset(
    f.name for f in dataclasses.fields(ScenarioSpec) if f.name != "seed"
) | {"bo_so"}


@dataclass(frozen=True)
class SweepSpec:
    """A cartesian parameter sweep over a base scenario.

    ``axes`` is an ordered list of (name, values); the first axis varies
    slowest.  Replication ``r`` of a point derives its seed from
    ``seed_base``, the point's parameters and ``r`` (see
    :func:`wpansim.experiment.replication_seed`), so any subset of a sweep can
    be reproduced in isolation.
    """

    base: ScenarioSpec
    axes: tuple[tuple[str, tuple], ...]
    replications: int = 5
    seed_base: int = 0

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a sweep needs at least one axis")
        seen = set()
        for name, values in self.axes:
            if name not in _AXIS_NAMES:
                raise ValueError(f"unknown sweep axis {name!r}")
            if name in seen:
                raise ValueError(f"sweep axis {name!r} appears twice")
            seen.add(name)
            if not values:
                raise ValueError(f"sweep axis {name!r} has no values")
        if self.replications < 1:
            raise ValueError(
                f"replications must be positive, got {self.replications}")
        if not 0 <= self.seed_base < 2 ** 64:
            raise ValueError(f"seed_base must fit in 64 bits, got {self.seed_base}")

    def points(self) -> list[dict]:
        """All axis-value combinations, first axis slowest."""
        names = [name for name, _ in self.axes]
        return [dict(zip(names, combo))
                for combo in itertools.product(*(vals for _, vals in self.axes))]

    def point_spec(self, point: dict) -> ScenarioSpec:
        """The base scenario with one point's parameters applied."""
        changes = {}
        for name, value in point.items():
            if name == "bo_so":
                changes["bo"], changes["so"] = value
            else:
                changes[name] = value
        return dataclasses.replace(self.base, **changes)


# ---------------------------------------------------------------------------
# YAML loading with file/line diagnostics.

_SCENARIO_KEYS = frozenset(f.name for f in dataclasses.fields(ScenarioSpec))
_SWEEP_KEYS = frozenset({"base", "axes", "replications", "seed_base"})


def _collect_lines(node, prefix: tuple, lines: dict, label: str) -> None:
    """Map every key/item path in the YAML document to its 1-based line."""
    if isinstance(node, yaml.MappingNode):
        seen = set()
        for key_node, value_node in node.value:
            key = key_node.value
            line = key_node.start_mark.line + 1
            if not isinstance(key, str):
                raise ScenarioError(f"{label}:{line}: mapping keys must be strings")
            if key in seen:
                raise ScenarioError(f"{label}:{line}: duplicate key {key!r}")
            seen.add(key)
            lines[prefix + (key,)] = line
            _collect_lines(value_node, prefix + (key,), lines, label)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            lines[prefix + (i,)] = item.start_mark.line + 1
            _collect_lines(item, prefix + (i,), lines, label)


class _Reader:
    """Typed accessors over one mapping of a parsed file, for error messages
    that point at the offending line."""

    def __init__(self, label: str, lines: dict, raw: dict, prefix: tuple = ()):
        self.label = label
        self.lines = lines
        self.raw = raw
        self.prefix = prefix

    def line(self, key=None) -> int:
        if key is not None:
            found = self.lines.get(self.prefix + (key,))
            if found is not None:
                return found
        return self.lines.get(self.prefix, 1)

    def fail(self, key, message: str):
        raise ScenarioError(f"{self.label}:{self.line(key)}: {message}")

    def reject_unknown(self, allowed) -> None:
        for key in self.raw:
            if key not in allowed:
                self.fail(key, f"unknown key {key!r}")

    def str_in(self, key: str, choices, default: str) -> str:
        value = self.raw.get(key, default)
        if value not in choices:
            self.fail(key, f"{key} must be one of {sorted(choices)}, got {value!r}")
        return value

    def integer(self, key: str, default, lo=None, hi=None,
                allow_none: bool = False):
        value = self.raw.get(key, default)
        if value is None and allow_none:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(key, f"{key} must be an integer, got {value!r}")
        if lo is not None and value < lo:
            self.fail(key, f"{key} must be >= {lo}, got {value}")
        if hi is not None and value > hi:
            self.fail(key, f"{key} must be <= {hi}, got {value}")
        return value

    def number(self, key: str, default, positive: bool = True):
        value = self.raw.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(key, f"{key} must be a number, got {value!r}")
        if positive and value <= 0:
            self.fail(key, f"{key} must be positive, got {value}")
        return float(value)

    def boolean(self, key: str, default: bool) -> bool:
        value = self.raw.get(key, default)
        if not isinstance(value, bool):
            self.fail(key, f"{key} must be true or false, got {value!r}")
        return value


def _build_scenario(reader: _Reader) -> ScenarioSpec:
    raw = reader.raw
    reader.reject_unknown(_SCENARIO_KEYS)
    mode = reader.str_in("mode", ("nonbeacon", "beacon"), "nonbeacon")

    max_be = reader.integer("max_be", 5, lo=3, hi=8)
    min_be = reader.integer("min_be", 3, lo=0, hi=max_be)
    bo = reader.integer("bo", None, lo=0, hi=MAX_ORDER, allow_none=True)
    so = reader.integer("so", None, lo=0, hi=MAX_ORDER, allow_none=True)
    if mode == "beacon":
        if bo is None or so is None:
            reader.fail("mode", "beacon mode requires both bo and so")
        if so > bo:
            reader.fail("so", f"so must not exceed bo, got bo={bo} so={so}")
    else:
        if bo is not None:
            reader.fail("bo", "bo is only meaningful in beacon mode")
        if so is not None:
            reader.fail("so", "so is only meaningful in beacon mode")

    quota = reader.integer("quota", None, lo=1, allow_none=True)
    run_time_s = reader.number("run_time_s", None)
    if quota is None and run_time_s is None:
        reader.fail(None, "a stop condition is required: quota or run_time_s")
    if quota is not None and run_time_s is not None:
        reader.fail("run_time_s", "quota and run_time_s are mutually exclusive")

    try:
        return ScenarioSpec(
            mode=mode,
            n_devices=reader.integer("n_devices", 8, lo=1),
            msdu=reader.integer("msdu", 60, lo=1, hi=MAX_MSDU_BYTES),
            interval_s=reader.number("interval_s", 0.025),
            distribution=reader.str_in(
                "distribution", ("exponential", "periodic"), "exponential"),
            min_be=min_be, max_be=max_be,
            max_nb=reader.integer("max_nb", 4, lo=0, hi=5),
            max_frame_retries=reader.integer("max_frame_retries", 3, lo=0, hi=7),
            bo=bo, so=so,
            queue_capacity=reader.integer("queue_capacity", 1, lo=0,
                                          allow_none="queue_capacity" in raw),
            quota=quota, run_time_s=run_time_s,
            seed=reader.integer("seed", 1, lo=0, hi=2 ** 64 - 1),
            placement=reader.str_in("placement", ("equal", "random"), "equal"),
            ack_enabled=reader.boolean("ack_enabled", True),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{reader.label}:{reader.line()}: {exc}") from exc


def _build_sweep(reader: _Reader) -> SweepSpec:
    reader.reject_unknown(_SWEEP_KEYS)
    raw = reader.raw
    if "base" not in raw or not isinstance(raw["base"], dict):
        reader.fail("base", "a sweep needs a 'base' scenario mapping")
    base = _build_scenario(_Reader(reader.label, reader.lines, raw["base"],
                                   reader.prefix + ("base",)))

    axes_raw = raw.get("axes")
    if not isinstance(axes_raw, list) or not axes_raw:
        reader.fail("axes", "a sweep needs a non-empty 'axes' list")
    axes = []
    for i, entry in enumerate(axes_raw):
        line = reader.lines.get(reader.prefix + ("axes", i), reader.line("axes"))
        if (not isinstance(entry, list) or len(entry) != 2
                or not isinstance(entry[0], str) or not isinstance(entry[1], list)):
            raise ScenarioError(
                f"{reader.label}:{line}: each axis must be [name, [values...]]")
        name, values = entry
        if name not in _AXIS_NAMES:
            raise ScenarioError(f"{reader.label}:{line}: unknown sweep axis {name!r}")
        if name == "bo_so":
            for v in values:
                if (not isinstance(v, list) or len(v) != 2
                        or not all(isinstance(x, int) for x in v)):
                    raise ScenarioError(
                        f"{reader.label}:{line}: bo_so values must be [bo, so] pairs")
            values = [tuple(v) for v in values]
        axes.append((name, tuple(values)))

    try:
        sweep = SweepSpec(
            base=base,
            axes=tuple(axes),
            replications=reader.integer("replications", 5, lo=1),
            seed_base=reader.integer("seed_base", 0, lo=0, hi=2 ** 64 - 1),
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise ScenarioError(f"{reader.label}:{reader.line()}: {exc}") from exc

    # Every point of the cartesian product must itself be a valid scenario.
    for point in sweep.points():
        try:
            sweep.point_spec(point)
        except ValueError as exc:
            raise ScenarioError(
                f"{reader.label}:{reader.line('axes')}: "
                f"invalid sweep point {point}: {exc}") from exc
    return sweep


def loads_scenario(text: str, label: str = "<string>") -> ScenarioSpec | SweepSpec:
    """Parse scenario or sweep YAML from a string; ``label`` names it in errors."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{label}: {exc}") from exc
    if node is None:
        raise ScenarioError(f"{label}: file is empty")
    if not isinstance(node, yaml.MappingNode):
        raise ScenarioError(f"{label}:1: top level must be a mapping")
    lines: dict = {}
    _collect_lines(node, (), lines, label)
    raw = yaml.safe_load(text)
    reader = _Reader(label, lines, raw)
    if "axes" in raw or "base" in raw:
        return _build_sweep(reader)
    return _build_scenario(reader)


def load_scenario(path) -> ScenarioSpec | SweepSpec:
    """Load and validate a scenario or sweep file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: {exc.strerror or exc}") from exc
    return loads_scenario(text, label=str(path))


# ---------------------------------------------------------------------------
# Serialization (round-trips through load_scenario).

def _scenario_dict(spec: ScenarioSpec) -> dict:
    out = {}
    for field in dataclasses.fields(ScenarioSpec):
        value = getattr(spec, field.name)
        if value is None and field.name in ("bo", "so", "quota", "run_time_s"):
            continue
        out[field.name] = value
    return out


def dump_scenario(spec: ScenarioSpec | SweepSpec) -> str:
    """Serialize a spec back to YAML text."""
    if isinstance(spec, SweepSpec):
        data = {
            "base": _scenario_dict(spec.base),
            "axes": [[name, [list(v) if isinstance(v, tuple) else v
                             for v in values]]
                     for name, values in spec.axes],
            "replications": spec.replications,
            "seed_base": spec.seed_base,
        }
    else:
        data = _scenario_dict(spec)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# Packaged scenarios.

#: name -> one-line description, in listing order.
BUILTINS = {
    "nonbeacon-defaults": "single non-beacon run with the default MAC settings",
    "beacon-defaults": "single beacon-enabled run (8 devices, BO=7, SO=6)",
    "s6-msdu": "non-beacon sweep: MSDU size crossed with device count",
    "s6-interval": "non-beacon sweep: packet interval crossed with device count",
    "s6-maxnb": "non-beacon sweep: MaxNB crossed with device count",
    "s6-minbe": "non-beacon sweep: MinBE crossed with device count",
    "s6-retries": "non-beacon sweep: retry limit crossed with device count",
    "s7-maxnb": "beacon sweep: MaxNB crossed with 50%-duty (BO, SO) pairs",
    "s7-so": "beacon sweep: SO at BO=7 crossed with packet interval",
    "s7-bo": "beacon sweep: BO at SO=1 crossed with packet interval",
}


def builtin_path(name: str):
    """Filesystem path of a packaged scenario file."""
    if name not in BUILTINS:
        raise ScenarioError(
            f"unknown built-in scenario {name!r}; choose from "
            f"{', '.join(BUILTINS)}")
    return resources.files("wpansim") / "scenarios" / f"{name}.yaml"


def load_builtin(name: str) -> ScenarioSpec | SweepSpec:
    """Load one of the packaged scenarios by name."""
    path = builtin_path(name)
    return loads_scenario(path.read_text(), label=f"builtin:{name}")
