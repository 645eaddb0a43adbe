"""One-hop IEEE 802.15.4 star-network simulator and QoS sweep harness."""

from wpansim.csma import CsmaParams, DropReason
from wpansim.experiment import (ResultsTable, emit_plot_data, run_scenario,
                                run_scenario_full, run_sweep)
from wpansim.kernel import (SYMBOL_RATE, Scheduler, SimulationError,
                            seconds_to_symbols, symbols_to_seconds)
from wpansim.metrics import MetricsRow, PacketRecord
from wpansim.network import RunResult, StarNetwork
from wpansim.scenario import (BUILTINS, ScenarioError, ScenarioSpec, SweepSpec,
                              load_builtin, load_scenario)
from wpansim.superframe import SuperframeConfig, SuperframeSchedule

__version__ = "0.1.0"

__all__ = [
    "BUILTINS",
    "CsmaParams",
    "DropReason",
    "MetricsRow",
    "PacketRecord",
    "ResultsTable",
    "RunResult",
    "SYMBOL_RATE",
    "ScenarioError",
    "ScenarioSpec",
    "Scheduler",
    "SimulationError",
    "StarNetwork",
    "SuperframeConfig",
    "SuperframeSchedule",
    "SweepSpec",
    "emit_plot_data",
    "load_builtin",
    "load_scenario",
    "run_scenario",
    "run_scenario_full",
    "run_sweep",
    "seconds_to_symbols",
    "symbols_to_seconds",
    "__version__",
]
