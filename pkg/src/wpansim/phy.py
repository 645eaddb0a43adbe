"""PHY and channel model: airtimes, binary-disc propagation, CCA, collisions.

The channel is an ideal binary disc: a frame is heard at full fidelity inside
the communication range and not at all outside it.  Propagation delay is zero.
Any temporal overlap between two frames audible at a receiver corrupts both;
there is no capture effect.  A receiver must also be awake and not itself
transmitting for the whole frame, otherwise the frame is missed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

from wpansim.kernel import SimulationError

# MAC/PHY timing constants, in symbols unless noted.
UNIT_BACKOFF = 20          # aUnitBackoffPeriod
BASE_SUPERFRAME = 960      # aBaseSuperframeDuration
MIN_CAP_LENGTH = 440       # aMinCAPLength
TURNAROUND = 12            # aTurnaroundTime (rx/tx switch)
CCA_DURATION = 8           # symbols sensed per clear-channel assessment
ACK_WAIT = 54              # macAckWaitDuration, unslotted acknowledgements

PHY_OVERHEAD_BYTES = 6     # synchronisation header + PHY header
MAC_DATA_OVERHEAD_BYTES = 11   # data-frame MHR + FCS
ACK_MPDU_BYTES = 5
BEACON_MPDU_BYTES = 13
MAX_MSDU_BYTES = 118       # largest payload the harness accepts by default

SYMBOLS_PER_BYTE = 2       # 8 bits / 4 bits-per-symbol

COMM_RANGE_M = 176.0       # binary-disc radius at 1 mW tx / -85 dBm sensitivity

BROADCAST = -1


def frame_airtime(mpdu_len: int) -> int:
    """Airtime in symbols of a frame whose MAC-level PDU is ``mpdu_len`` bytes."""
    if mpdu_len < 0:
        raise ValueError(f"MPDU length must be non-negative, got {mpdu_len}")
    return (mpdu_len + PHY_OVERHEAD_BYTES) * SYMBOLS_PER_BYTE


def data_frame_airtime(msdu_bytes: int) -> int:
    """Airtime of a data frame carrying ``msdu_bytes`` of payload."""
    if msdu_bytes < 0:
        raise ValueError(f"MSDU size must be non-negative, got {msdu_bytes}")
    return frame_airtime(msdu_bytes + MAC_DATA_OVERHEAD_BYTES)


ACK_AIRTIME = frame_airtime(ACK_MPDU_BYTES)        # 22 symbols
BEACON_AIRTIME = frame_airtime(BEACON_MPDU_BYTES)  # 38 symbols


class FrameKind(IntEnum):
    DATA = 0
    ACK = 1
    BEACON = 2


@dataclass(slots=True)
class Frame:
    kind: FrameKind
    src: int
    dst: int
    airtime: int
    msdu_bytes: int = 0
    packet_id: int = -1


@dataclass(slots=True)
class Transmission:
    frame: Frame
    start: int
    end: int
    # Other transmissions that overlapped this one in time at any point.
    overlappers: list["Transmission"] = field(default_factory=list)
    # Receivers that slept or transmitted during the frame and so missed it.
    deaf: set[int] = field(default_factory=set)


class Medium:
    """Shared radio medium for one PAN: who is audible to whom, and when.

    Nodes register once with a position.  Transmissions are opened with
    :meth:`begin_tx` and closed with :meth:`end_tx`; reception outcomes are
    evaluated at close, by which time every overlap has been recorded.
    """

    def __init__(self, comm_range_m: float = COMM_RANGE_M):
        self.comm_range_m = comm_range_m
        self._pos: dict[int, tuple[float, float]] = {}
        self._awake: dict[int, bool] = {}
        self._tx_of: dict[int, Transmission | None] = {}
        self._active: list[Transmission] = []
        self._recent: list[Transmission] = []   # ended, kept for the CCA window

    def add_node(self, node_id: int, x: float = 0.0, y: float = 0.0) -> None:
        if node_id in self._pos:
            raise ValueError(f"node {node_id} registered twice")
        self._pos[node_id] = (x, y)
        self._awake[node_id] = True
        self._tx_of[node_id] = None

    def in_range(self, a: int, b: int) -> bool:
        (ax, ay), (bx, by) = self._pos[a], self._pos[b]
        return math.hypot(ax - bx, ay - by) <= self.comm_range_m

    def is_awake(self, node_id: int) -> bool:
        return self._awake[node_id]

    def set_awake(self, node_id: int, awake: bool, now: int) -> None:
        """Sleep/wake a radio; sleeping mid-frame makes the receiver miss it.

        A frame ending exactly at the sleep instant was fully heard (and a
        transmission ending exactly now has finished), so only strictly
        later-ending frames are affected.
        """
        self._awake[node_id] = awake
        if not awake:
            own = self._tx_of[node_id]
            if own is not None and own.end > now:
                raise SimulationError(f"node {node_id} put to sleep while transmitting")
            for tx in self._active:
                if tx.end > now and tx.frame.src != node_id:
                    tx.deaf.add(node_id)

    def begin_tx(self, frame: Frame, now: int) -> Transmission:
        src = frame.src
        if self._tx_of[src] is not None:
            raise SimulationError(f"node {src} began a frame while already transmitting")
        if not self._awake[src]:
            raise SimulationError(f"node {src} began a frame while asleep")
        tx = Transmission(frame, now, now + frame.airtime)
        for other in self._active:
            # A transmission ending exactly now does not overlap [now, end).
            if other.end > now:
                tx.overlappers.append(other)
                other.overlappers.append(tx)
                other.deaf.add(src)
        for node_id, node_tx in self._tx_of.items():
            if node_id == src:
                continue
            if (node_tx is not None and node_tx.end > now) or not self._awake[node_id]:
                tx.deaf.add(node_id)
        self._active.append(tx)
        self._tx_of[src] = tx
        return tx

    def end_tx(self, tx: Transmission, now: int) -> None:
        if tx.end != now:
            raise SimulationError(f"transmission closed at {now}, expected {tx.end}")
        self._active.remove(tx)
        self._tx_of[tx.frame.src] = None
        self._recent.append(tx)
        self._prune(now)

    def heard_intact(self, tx: Transmission, node_id: int) -> bool:
        """Whether ``node_id`` received the whole frame uncorrupted."""
        if node_id == tx.frame.src or node_id in tx.deaf:
            return False
        if not self.in_range(tx.frame.src, node_id):
            return False
        return all(not self.in_range(o.frame.src, node_id) for o in tx.overlappers)

    def receivers(self, tx: Transmission) -> list[int]:
        """All nodes that received the frame intact (for broadcasts)."""
        return [n for n in self._pos if self.heard_intact(tx, n)]

    def cca_busy(self, node_id: int, now: int) -> bool:
        """Channel state over the CCA window [now - 8, now).

        Busy when any foreign transmission audible at the node overlaps the
        window; both window and transmissions are half-open intervals.
        """
        if not self._awake[node_id]:
            raise SimulationError(f"sleeping node {node_id} performed a CCA")
        w_start = now - CCA_DURATION
        for tx in self._active:
            if tx.frame.src != node_id and tx.start < now and self.in_range(tx.frame.src, node_id):
                return True
        for tx in self._recent:
            if (tx.frame.src != node_id and tx.start < now and tx.end > w_start
                    and self.in_range(tx.frame.src, node_id)):
                return True
        return False

    def _prune(self, now: int) -> None:
        cutoff = now - CCA_DURATION
        self._recent = [tx for tx in self._recent if tx.end > cutoff]
