"""CSMA-CA transmit state machine and the MAC queue.

The machine is a pure transition function ``(state, input) -> (state, action)``
plus an RNG for backoff draws: it owns no clock and schedules nothing.  The
caller performs each emitted action (wait, CCA, transmit, arm a timer) and
feeds the observed outcome back as the next input, which keeps the protocol
logic unit-testable without a simulator.

The slotted variant (contention window, CAP deference) shares this core; see
:func:`wpansim.superframe.slotted_step`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from wpansim.kernel import SimulationError, rng_uniform_units
from wpansim.phy import ACK_WAIT, UNIT_BACKOFF


@dataclass(frozen=True, slots=True)
class CsmaParams:
    """Tunable MAC attributes, range-checked against their permitted values."""

    min_be: int = 3             # macMinBE
    max_be: int = 5             # macMaxBE
    max_nb: int = 4             # macMaxCSMABackoffs
    max_frame_retries: int = 3  # macMaxFrameRetries
    ack_enabled: bool = True

    def __post_init__(self):
        if not 3 <= self.max_be <= 8:
            raise ValueError(f"max_be must be in [3, 8], got {self.max_be}")
        if not 0 <= self.min_be <= self.max_be:
            raise ValueError(
                f"min_be must be in [0, max_be={self.max_be}], got {self.min_be}")
        if not 0 <= self.max_nb <= 5:
            raise ValueError(f"max_nb must be in [0, 5], got {self.max_nb}")
        if not 0 <= self.max_frame_retries <= 7:
            raise ValueError(
                f"max_frame_retries must be in [0, 7], got {self.max_frame_retries}")


class DropReason(Enum):
    QUEUE_OVERFLOW = "queue_overflow"
    CHANNEL_ACCESS_FAILURE = "channel_access_failure"
    RETRY_EXHAUSTED = "retry_exhausted"
    UNRESOLVED_AT_END = "unresolved_at_end"


class Phase(Enum):
    IDLE = "idle"
    BACKOFF = "backoff"
    CCA = "cca"
    TRANSMITTING = "transmitting"
    AWAITING_ACK = "awaiting_ack"
    SUCCESS = "success"
    FAILED = "failed"


TERMINAL_PHASES = frozenset({Phase.SUCCESS, Phase.FAILED})


class MacInput(Enum):
    START_TX = "start_tx"
    BACKOFF_EXPIRED = "backoff_expired"
    CCA_IDLE = "cca_idle"
    CCA_BUSY = "cca_busy"
    TX_DONE = "tx_done"
    ACK_RECEIVED = "ack_received"
    ACK_TIMEOUT = "ack_timeout"


# Actions the caller must carry out.  Durations are in symbols.
@dataclass(frozen=True, slots=True)
class Wait:
    duration: int


@dataclass(frozen=True, slots=True)
class DoCca:
    pass


@dataclass(frozen=True, slots=True)
class Transmit:
    pass


@dataclass(frozen=True, slots=True)
class ArmAckTimeout:
    duration: int


@dataclass(frozen=True, slots=True)
class Success:
    pass


@dataclass(frozen=True, slots=True)
class Fail:
    reason: DropReason


@dataclass(frozen=True, slots=True)
class DeferToNextCap:
    """Slotted only: park until the next CAP and perform both CCAs there."""


MacAction = Wait | DoCca | Transmit | ArmAckTimeout | Success | Fail | DeferToNextCap

# Field-less actions are interned; Wait/Fail/ArmAckTimeout carry payloads.
_DO_CCA = DoCca()
_TRANSMIT = Transmit()
_SUCCESS = Success()
_DEFER = DeferToNextCap()
_ARM_ACK = ArmAckTimeout(ACK_WAIT)


@dataclass(frozen=True, slots=True)
class TxAttemptState:
    """Live counters of one frame's delivery attempt."""

    nb: int = 0
    be: int = 0
    cw: int = 0
    retries: int = 0
    phase: Phase = Phase.IDLE


IDLE_STATE = TxAttemptState()


def _backoff(nb: int, be: int, cw: int, retries: int,
             rng: np.random.Generator) -> tuple[TxAttemptState, Wait]:
    units = rng_uniform_units(rng, be)
    return TxAttemptState(nb, be, cw, retries, Phase.BACKOFF), \
        Wait(units * UNIT_BACKOFF)


def _step(state: TxAttemptState, event: MacInput, params: CsmaParams,
          rng: np.random.Generator, *, slotted: bool,
          fits_cap=None) -> tuple[TxAttemptState, MacAction]:
    phase = state.phase

    if phase is Phase.CCA and event is MacInput.CCA_IDLE:
        if slotted and state.cw == 2:
            return TxAttemptState(state.nb, state.be, 1, state.retries,
                                  Phase.CCA), _DO_CCA
        if slotted and not fits_cap():
            # Transaction would cross the CAP end: hold the frame and redo
            # both CCAs in the next CAP, without drawing a new backoff.
            return TxAttemptState(state.nb, state.be, 2, state.retries,
                                  Phase.CCA), _DEFER
        return TxAttemptState(state.nb, state.be, 0, state.retries,
                              Phase.TRANSMITTING), _TRANSMIT

    if phase is Phase.CCA and event is MacInput.CCA_BUSY:
        nb = state.nb + 1
        if nb > params.max_nb:
            return TxAttemptState(nb, state.be, state.cw, state.retries,
                                  Phase.FAILED), \
                Fail(DropReason.CHANNEL_ACCESS_FAILURE)
        return _backoff(nb, min(state.be + 1, params.max_be),
                        2 if slotted else 0, state.retries, rng)

    if phase is Phase.BACKOFF and event is MacInput.BACKOFF_EXPIRED:
        return TxAttemptState(state.nb, state.be, state.cw, state.retries,
                              Phase.CCA), _DO_CCA

    if phase is Phase.TRANSMITTING and event is MacInput.TX_DONE:
        if params.ack_enabled:
            return TxAttemptState(state.nb, state.be, state.cw, state.retries,
                                  Phase.AWAITING_ACK), _ARM_ACK
        return TxAttemptState(state.nb, state.be, state.cw, state.retries,
                              Phase.SUCCESS), _SUCCESS

    if phase is Phase.AWAITING_ACK and event is MacInput.ACK_RECEIVED:
        return TxAttemptState(state.nb, state.be, state.cw, state.retries,
                              Phase.SUCCESS), _SUCCESS

    if phase is Phase.AWAITING_ACK and event is MacInput.ACK_TIMEOUT:
        retries = state.retries + 1
        if retries > params.max_frame_retries:
            return TxAttemptState(state.nb, state.be, state.cw, retries,
                                  Phase.FAILED), Fail(DropReason.RETRY_EXHAUSTED)
        return _backoff(0, params.min_be, 2 if slotted else 0, retries, rng)

    if phase is Phase.IDLE and event is MacInput.START_TX:
        return _backoff(0, params.min_be, 2 if slotted else 0, 0, rng)

    raise SimulationError(
        f"MAC input {event.value} is not valid in phase {phase.value}")


def unslotted_step(state: TxAttemptState, event: MacInput, params: CsmaParams,
                   rng: np.random.Generator) -> tuple[TxAttemptState, MacAction]:
    """One transition of the unslotted (non-beacon) CSMA-CA machine.

    On busy CCA the backoff stage counter NB and the exponent BE grow until
    NB exceeds MaxNB (channel access failure); a missing acknowledgement
    restarts CSMA from scratch until retries exceed MaxFrameRetries.
    """
    return _step(state, event, params, rng, slotted=False)


class MacQueue:
    """FIFO of frames waiting behind the one in service; overflow drops the
    newest arrival.  ``capacity=None`` removes the bound."""

    def __init__(self, capacity: int | None = 1):
        if capacity is not None and capacity < 0:
            raise ValueError(f"queue capacity must be non-negative, got {capacity}")
        self.capacity = capacity
        self._items: deque = deque()

    def __len__(self) -> int:
        return len(self._items)

    def offer(self, item) -> bool:
        """Append ``item``; False when the queue is full and the item dropped."""
        if self.capacity is not None and len(self._items) >= self.capacity:
            return False
        self._items.append(item)
        return True

    def pop(self):
        return self._items.popleft()
