"""Deterministic discrete-event kernel: clock, event queue, seeded RNG streams.

Simulated time is counted in integer symbol periods of the 2.4 GHz PHY
(62,500 symbols per second), which keeps all superframe arithmetic exact.
"""

from __future__ import annotations

import heapq
import itertools
import zlib
from dataclasses import dataclass
from enum import Enum

import numpy as np

SYMBOL_RATE = 62_500  # symbols per second: 250 kbps O-QPSK, 4 bits/symbol


def symbols_to_seconds(symbols: int) -> float:
    return symbols / SYMBOL_RATE


def seconds_to_symbols(seconds: float) -> int:
    """Convert seconds to the nearest whole symbol count."""
    return round(seconds * SYMBOL_RATE)


class SimulationError(Exception):
    """A protocol violation or impossible schedule inside a simulation run."""


class EventKind(Enum):
    ARRIVAL = "arrival"
    BACKOFF = "backoff"
    CCA_RESULT = "cca-result"
    TX_START = "tx-start"
    TX_END = "tx-end"
    ACK_TIMEOUT = "ack-timeout"
    BEACON = "beacon"
    CAP_END = "cap-end"
    SUPERFRAME_START = "superframe-start"
    GENERIC = "generic"


class StopReason(Enum):
    TIME_LIMIT = "time_limit"
    STOPPED = "stopped"
    COMPLETED = "completed"
    STARVED = "starved"


@dataclass(frozen=True, slots=True)
class SimSummary:
    end_time: int
    events_processed: int
    stop_reason: StopReason


# Heap entry layout; (time, seq) is unique so later fields are never compared.
_TIME, _SEQ, _LIVE, _FN, _ARG, _KIND, _TARGET = range(7)


class EventHandle:
    """Ticket for a scheduled event, usable to cancel it."""

    __slots__ = ("_entry",)

    def __init__(self, entry: list):
        self._entry = entry

    @property
    def live(self) -> bool:
        return self._entry[_LIVE]

    @property
    def fire_time(self) -> int:
        return self._entry[_TIME]


class Scheduler:
    """Event queue with a monotone clock and FIFO tie-breaking.

    Events at equal times fire in insertion order; ordering never depends
    on payload contents, so unrelated changes cannot reorder ties.
    """

    def __init__(self):
        self._heap: list[list] = []
        self._seq = itertools.count()
        self._now = 0
        self._processed = 0
        self._stop_requested = False
        self.fire_log: list[tuple[int, EventKind, object]] | None = None

    @property
    def now(self) -> int:
        return self._now

    def at(self, time: int, fn, arg=None, *, kind: EventKind = EventKind.GENERIC,
           target=None) -> EventHandle:
        """Schedule ``fn(arg)`` at ``time``; scheduling in the past is an error."""
        if time < self._now:
            raise SimulationError(
                f"event {kind.value} scheduled at {time} before current time {self._now}")
        entry = [time, next(self._seq), True, fn, arg, kind, target]
        heapq.heappush(self._heap, entry)
        return EventHandle(entry)

    def after(self, delay: int, fn, arg=None, *, kind: EventKind = EventKind.GENERIC,
              target=None) -> EventHandle:
        return self.at(self._now + delay, fn, arg, kind=kind, target=target)

    def cancel(self, handle: EventHandle) -> bool:
        """Cancel a pending event; False if it already fired or was cancelled."""
        entry = handle._entry
        if not entry[_LIVE]:
            return False
        entry[_LIVE] = False
        entry[_FN] = entry[_ARG] = None
        return True

    def request_stop(self) -> None:
        """Stop the run after the currently executing event completes."""
        self._stop_requested = True

    def run(self, *, until: int | None = None, stop=None) -> SimSummary:
        """Process events in (fire_time, insertion) order until a stop condition.

        ``until`` stops the run with the clock set to exactly that time; events
        scheduled at or after it stay pending.  ``stop`` is an optional zero-arg
        predicate checked after every event.  Running dry with an unmet
        ``until``/``stop`` condition reports starvation.
        """
        heap = self._heap
        pop = heapq.heappop
        while True:
            if self._stop_requested:
                return self._finish(StopReason.STOPPED)
            if not heap:
                if until is None and stop is None:
                    return self._finish(StopReason.COMPLETED)
                return self._finish(StopReason.STARVED)
            entry = heap[0]
            if until is not None and entry[_TIME] >= until:
                self._now = until
                return self._finish(StopReason.TIME_LIMIT)
            pop(heap)
            if not entry[_LIVE]:
                continue
            self._now = entry[_TIME]
            entry[_LIVE] = False
            if self.fire_log is not None:
                self.fire_log.append((entry[_TIME], entry[_KIND], entry[_TARGET]))
            entry[_FN](entry[_ARG])
            self._processed += 1
            if stop is not None and stop():
                return self._finish(StopReason.STOPPED)

    def _finish(self, reason: StopReason) -> SimSummary:
        return SimSummary(self._now, self._processed, reason)


_PURPOSE_SALT = 0x802154


class RngManager:
    """Derives independent, reproducible RNG streams from one master seed.

    Streams are keyed by (purpose, key), so a node's draws do not change
    when unrelated nodes are added to the scenario.  PCG64 is fixed as the
    generator for the lifetime of the project.
    """

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & (2**64 - 1)

    def stream(self, purpose: str, key: int = 0) -> np.random.Generator:
        tag = zlib.crc32(purpose.encode("ascii"))
        seq = np.random.SeedSequence([self.master_seed, _PURPOSE_SALT, tag, key])
        return np.random.Generator(np.random.PCG64(seq))


def rng_uniform_units(rng: np.random.Generator, be: int) -> int:
    """Uniform integer in [0, 2**be - 1]: a backoff delay in whole units."""
    if be < 0:
        raise ValueError(f"backoff exponent must be non-negative, got {be}")
    if be == 0:
        return 0
    return int(rng.integers(0, 1 << be))


def rng_exponential(rng: np.random.Generator, mean_seconds: float) -> int:
    """Exponential interarrival in symbols, rounded and clamped to >= 1."""
    if mean_seconds <= 0:
        raise ValueError(f"mean interval must be positive, got {mean_seconds}")
    return max(1, round(rng.exponential(mean_seconds) * SYMBOL_RATE))
