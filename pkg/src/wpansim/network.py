"""One-hop star network simulation.

Devices placed on a circle around a central coordinator generate MSDUs and
deliver them upstream as acknowledged data frames, contending for the channel
with CSMA-CA — unslotted, or slotted under a beacon-enabled superframe with
duty cycling.  This module owns all event scheduling; the protocol decisions
themselves live in the pure state machines of ``csma`` and ``superframe``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from wpansim.csma import (ArmAckTimeout, CsmaParams, DeferToNextCap, DoCca, DropReason,
                          Fail, IDLE_STATE, MacInput, MacQueue, Phase, Success,
                          Transmit, TxAttemptState, Wait, unslotted_step)
from wpansim.kernel import (EventKind, RngManager, Scheduler, SimSummary,
                            SimulationError, StopReason, rng_exponential,
                            seconds_to_symbols)
from wpansim.metrics import MetricsRow, PacketRecord, build_metrics
from wpansim.phy import (ACK_MPDU_BYTES, BEACON_MPDU_BYTES, BROADCAST, CCA_DURATION,
                         COMM_RANGE_M, Frame, FrameKind, MAC_DATA_OVERHEAD_BYTES,
                         MAX_MSDU_BYTES, Medium, PHY_OVERHEAD_BYTES, TURNAROUND,
                         UNIT_BACKOFF)
from wpansim.superframe import SuperframeConfig, SuperframeSchedule, slotted_step
from wpansim.trace import MacTrace

COORDINATOR = 0


class Device:
    """Per-device MAC driver state; protocol logic lives in the step functions."""

    __slots__ = ("id", "queue", "rng", "traffic_rng", "state", "current",
                 "mac_timer", "tx", "generated", "last_intact", "cap_end",
                 "fits_cap")

    def __init__(self, node_id: int, queue_capacity: int | None,
                 rng, traffic_rng):
        self.id = node_id
        self.queue = MacQueue(queue_capacity)
        self.rng = rng
        self.traffic_rng = traffic_rng
        self.state: TxAttemptState = IDLE_STATE
        self.current: PacketRecord | None = None
        self.mac_timer = None
        self.tx = None
        self.generated = 0
        self.last_intact = False
        self.cap_end = 0
        self.fits_cap = None


@dataclass(slots=True)
class RunResult:
    metrics: MetricsRow
    summary: SimSummary
    log: list[PacketRecord]
    trace: MacTrace | None


class StarNetwork:
    def __init__(self, *, mode: str = "nonbeacon", n_devices: int = 1,
                 msdu: int = 60, interval_s: float = 0.025,
                 distribution: str = "exponential",
                 csma_params: CsmaParams | None = None,
                 bo: int | None = None, so: int | None = None,
                 queue_capacity: int | None = 1,
                 quota: int | None = None, run_time_s: float | None = None,
                 seed: int = 1, comm_range_m: float = COMM_RANGE_M,
                 circle_radius_m: float = 50.0, placement: str = "equal",
                 msdu_cap: int = MAX_MSDU_BYTES,
                 phy_overhead: int = PHY_OVERHEAD_BYTES,
                 mac_overhead: int = MAC_DATA_OVERHEAD_BYTES,
                 ack_mpdu: int = ACK_MPDU_BYTES,
                 beacon_mpdu: int = BEACON_MPDU_BYTES,
                 trace: MacTrace | None = None):
        if mode not in ("nonbeacon", "beacon"):
            raise ValueError(f"unknown mode {mode!r}")
        if n_devices < 1:
            raise ValueError(f"need at least one device, got {n_devices}")
        if not 1 <= msdu <= msdu_cap:
            raise ValueError(f"MSDU size must be in [1, {msdu_cap}], got {msdu}")
        if interval_s <= 0:
            raise ValueError(f"generation interval must be positive, got {interval_s}")
        if distribution not in ("exponential", "periodic"):
            raise ValueError(f"unknown traffic distribution {distribution!r}")
        if placement not in ("equal", "random"):
            raise ValueError(f"unknown placement {placement!r}")
        if quota is None and run_time_s is None:
            raise ValueError("a stop condition is required: quota or run_time_s")
        if quota is not None and quota < 1:
            raise ValueError(f"quota must be positive, got {quota}")
        if run_time_s is not None and run_time_s <= 0:
            raise ValueError(f"run time must be positive, got {run_time_s}")

        self.mode = mode
        self.slotted = mode == "beacon"
        self.csma = csma_params or CsmaParams()
        self.msdu = msdu
        self.interval_s = interval_s
        self.distribution = distribution
        self.quota = quota
        self.run_time_s = run_time_s
        self.trace = trace

        if self.slotted:
            if bo is None or so is None:
                raise ValueError("beacon mode requires BO and SO")
            self.sf_config = SuperframeConfig(bo=bo, so=so)
            self.schedule = SuperframeSchedule(self.sf_config)
        else:
            if bo is not None or so is not None:
                raise ValueError("BO/SO are meaningful only in beacon mode")
            self.sf_config = None
            self.schedule = None

        self.data_airtime = (msdu + mac_overhead + phy_overhead) * 2
        self.ack_airtime = (ack_mpdu + phy_overhead) * 2
        self.beacon_airtime = (beacon_mpdu + phy_overhead) * 2
        # Time on air a transmission must reserve before the CAP end.
        self.transaction = self.data_airtime + (
            TURNAROUND + self.ack_airtime if self.csma.ack_enabled else 0)

        self.sched = Scheduler()
        self.medium = Medium(comm_range_m)
        self.medium.add_node(COORDINATOR, 0.0, 0.0)

        rngs = RngManager(seed)
        if placement == "random":
            angles = rngs.stream("placement").uniform(0, 2 * math.pi, n_devices)
        else:
            angles = [2 * math.pi * i / n_devices for i in range(n_devices)]
        self.devices: list[Device] = []
        for i in range(n_devices):
            node_id = i + 1
            self.medium.add_node(node_id,
                                 circle_radius_m * math.cos(angles[i]),
                                 circle_radius_m * math.sin(angles[i]))
            dev = Device(node_id, queue_capacity,
                         rngs.stream("backoff", node_id),
                         rngs.stream("traffic", node_id))
            dev.fits_cap = self._make_fits_cap(dev)
            self.devices.append(dev)

        self.log: list[PacketRecord] = []
        self._next_pid = 0
        self._resolved = 0
        self._generated = 0
        self._total_quota = None if quota is None else quota * n_devices
        self._period_symbols = max(1, seconds_to_symbols(interval_s))

    # ---------------------------------------------------------------- run

    def run(self) -> RunResult:
        if self.slotted:
            self.sched.at(0, self._on_superframe_start, 0,
                          kind=EventKind.SUPERFRAME_START)
        for dev in self.devices:
            self._schedule_arrival(dev)
        until = None if self.run_time_s is None else seconds_to_symbols(self.run_time_s)
        summary = self.sched.run(until=until)
        if summary.stop_reason is StopReason.STARVED:
            raise SimulationError(
                f"event queue ran dry at t={summary.end_time} with the packet "
                f"quota unmet ({self._resolved}/{self._total_quota} resolved)")
        for rec in self.log:
            if rec.rx_time is None and rec.drop_reason is None:
                rec.drop_reason = DropReason.UNRESOLVED_AT_END
        metrics = self._build_row(summary)
        return RunResult(metrics, summary, self.log, self.trace)

    def _build_row(self, summary: SimSummary) -> MetricsRow:
        if not self.log or summary.end_time <= self.log[0].gen_time:
            t_end = summary.end_time
            return MetricsRow(0, 0, 0, 0, 0, len(self.log), 0, t_end,
                              0.0, None, None, None)
        return build_metrics(self.log, self.log[0].gen_time, summary.end_time)

    # ------------------------------------------------------------ traffic

    def _schedule_arrival(self, dev: Device) -> None:
        if self.distribution == "exponential":
            gap = rng_exponential(dev.traffic_rng, self.interval_s)
        else:
            gap = self._period_symbols
        self.sched.after(gap, self._on_arrival, dev,
                         kind=EventKind.ARRIVAL, target=dev.id)

    def _on_arrival(self, dev: Device) -> None:
        now = self.sched.now
        rec = PacketRecord(self._next_pid, dev.id, now, self.msdu)
        self._next_pid += 1
        self.log.append(rec)
        dev.generated += 1
        self._generated += 1
        if self.quota is None or dev.generated < self.quota:
            self._schedule_arrival(dev)
        self._trace(now, dev.id, "arrival", pkt=rec.packet_id)
        if dev.current is None:
            dev.current = rec
            self._start_attempt(dev)
        elif dev.queue.offer(rec):
            self._trace(now, dev.id, "enqueue", pkt=rec.packet_id)
        else:
            self._resolve_drop(rec, DropReason.QUEUE_OVERFLOW)

    # ------------------------------------------------------ MAC sequencing

    def _start_attempt(self, dev: Device) -> None:
        dev.state = IDLE_STATE
        self._feed(dev, MacInput.START_TX)

    def _feed(self, dev: Device, event: MacInput) -> None:
        if self.slotted:
            dev.state, action = slotted_step(dev.state, event, self.csma,
                                             dev.rng, dev.fits_cap)
        else:
            dev.state, action = unslotted_step(dev.state, event, self.csma, dev.rng)
        self._apply(dev, action)

    def _apply(self, dev: Device, action) -> None:
        now = self.sched.now
        if type(action) is Wait:
            self._trace(now, dev.id, "backoff-start",
                        pkt=dev.current.packet_id,
                        note=f"be={dev.state.be} units={action.duration // UNIT_BACKOFF}")
            if self.slotted:
                units = action.duration // UNIT_BACKOFF
                end = self.schedule.countdown_end(now, units)
                dev.mac_timer = self.sched.at(end, self._on_countdown_done, dev,
                                              kind=EventKind.BACKOFF, target=dev.id)
            else:
                dev.mac_timer = self.sched.after(action.duration,
                                                 self._on_backoff_expired, dev,
                                                 kind=EventKind.BACKOFF, target=dev.id)
        elif type(action) is DoCca:
            self._issue_cca(dev)
        elif type(action) is Transmit:
            if self.slotted:
                # CCA result instants sit 8 symbols into a period; the frame
                # goes out on the next 20-symbol boundary.
                self.sched.after(UNIT_BACKOFF - CCA_DURATION,
                                 self._begin_data_tx, dev,
                                 kind=EventKind.TX_START, target=dev.id)
            else:
                self._begin_data_tx(dev)
        elif type(action) is ArmAckTimeout:
            dev.mac_timer = self.sched.after(action.duration, self._on_ack_timeout,
                                             dev, kind=EventKind.ACK_TIMEOUT,
                                             target=dev.id)
        elif type(action) is Success:
            rec = dev.current
            if self.csma.ack_enabled or dev.last_intact:
                rec.rx_time = now
                self._trace(now, dev.id, "delivered", pkt=rec.packet_id)
                self._count_resolution()
            else:
                self._resolve_drop(rec, DropReason.RETRY_EXHAUSTED)
            self._next_frame(dev)
        elif type(action) is Fail:
            self._resolve_drop(dev.current, action.reason)
            self._next_frame(dev)
        elif type(action) is DeferToNextCap:
            self._trace(now, dev.id, "defer", pkt=dev.current.packet_id)
            dev.mac_timer = self.sched.at(self.schedule.next_cap_start(now),
                                          self._on_cap_reentry, dev,
                                          kind=EventKind.BACKOFF, target=dev.id)
        else:
            raise SimulationError(f"unhandled MAC action {action!r}")

    def _on_backoff_expired(self, dev: Device) -> None:
        self._feed(dev, MacInput.BACKOFF_EXPIRED)

    def _on_countdown_done(self, dev: Device) -> None:
        # Slotted: the countdown may complete too close to the CAP end for a
        # CCA pair (which needs to resolve strictly before nodes sleep); if so
        # it carries over to the next CAP, like the pause rule.
        now = self.sched.now
        if (not self.schedule.in_cap(now)
                or now + UNIT_BACKOFF + CCA_DURATION >= self.schedule.cap_end_for(now)):
            dev.mac_timer = self.sched.at(self.schedule.next_cap_start(now),
                                          self._on_countdown_done, dev,
                                          kind=EventKind.BACKOFF, target=dev.id)
            return
        dev.cap_end = self.schedule.cap_end_for(now)
        self._feed(dev, MacInput.BACKOFF_EXPIRED)

    def _on_cap_reentry(self, dev: Device) -> None:
        # A deferred frame redoes both CCAs at the start of the fresh CAP.
        dev.cap_end = self.schedule.cap_end_for(self.sched.now)
        self._issue_cca(dev)

    def _make_fits_cap(self, dev: Device):
        def fits() -> bool:
            tx_start = self.sched.now + (UNIT_BACKOFF - CCA_DURATION)
            return tx_start + self.transaction <= dev.cap_end
        return fits

    def _issue_cca(self, dev: Device) -> None:
        now = self.sched.now
        if self.slotted and dev.state.cw == 1:
            start = now + (UNIT_BACKOFF - CCA_DURATION)  # next boundary
        else:
            start = now
        self._trace(start, dev.id, "cca-start", pkt=dev.current.packet_id)
        dev.mac_timer = self.sched.at(start + CCA_DURATION, self._on_cca_result,
                                      dev, kind=EventKind.CCA_RESULT, target=dev.id)

    def _on_cca_result(self, dev: Device) -> None:
        busy = self.medium.cca_busy(dev.id, self.sched.now)
        self._trace(self.sched.now, dev.id, "cca-result",
                    pkt=dev.current.packet_id, note="busy" if busy else "idle")
        self._feed(dev, MacInput.CCA_BUSY if busy else MacInput.CCA_IDLE)

    # ------------------------------------------------------- transmissions

    def _begin_data_tx(self, dev: Device) -> None:
        now = self.sched.now
        rec = dev.current
        frame = Frame(FrameKind.DATA, dev.id, COORDINATOR, self.data_airtime,
                      self.msdu, rec.packet_id)
        dev.tx = self.medium.begin_tx(frame, now)
        rec.tx_count += 1
        self._trace(now, dev.id, "tx-start", pkt=rec.packet_id)
        self.sched.after(self.data_airtime, self._on_data_tx_end, dev,
                         kind=EventKind.TX_END, target=dev.id)

    def _on_data_tx_end(self, dev: Device) -> None:
        now = self.sched.now
        tx = dev.tx
        dev.tx = None
        self.medium.end_tx(tx, now)
        intact = self.medium.heard_intact(tx, COORDINATOR)
        dev.last_intact = intact
        self._trace(now, dev.id, "tx-end", pkt=dev.current.packet_id,
                    note="intact" if intact else "corrupted")
        if intact and self.csma.ack_enabled:
            self.sched.after(TURNAROUND, self._begin_ack_tx, dev,
                             kind=EventKind.TX_START, target=COORDINATOR)
        self._feed(dev, MacInput.TX_DONE)

    def _begin_ack_tx(self, dev: Device) -> None:
        now = self.sched.now
        frame = Frame(FrameKind.ACK, COORDINATOR, dev.id, self.ack_airtime,
                      0, dev.current.packet_id)
        tx = self.medium.begin_tx(frame, now)
        self._trace(now, COORDINATOR, "ack-start", pkt=frame.packet_id)
        self.sched.after(self.ack_airtime, self._on_ack_tx_end, (tx, dev),
                         kind=EventKind.TX_END, target=COORDINATOR)

    def _on_ack_tx_end(self, arg) -> None:
        tx, dev = arg
        now = self.sched.now
        self.medium.end_tx(tx, now)
        self._trace(now, COORDINATOR, "ack-end", pkt=tx.frame.packet_id)
        if self.medium.heard_intact(tx, dev.id):
            if (dev.state.phase is Phase.AWAITING_ACK and dev.current is not None
                    and dev.current.packet_id == tx.frame.packet_id):
                self.sched.cancel(dev.mac_timer)
                self._feed(dev, MacInput.ACK_RECEIVED)

    def _on_ack_timeout(self, dev: Device) -> None:
        self._trace(self.sched.now, dev.id, "ack-timeout", pkt=dev.current.packet_id)
        self._feed(dev, MacInput.ACK_TIMEOUT)

    # --------------------------------------------------------- resolution

    def _resolve_drop(self, rec: PacketRecord, reason: DropReason) -> None:
        rec.drop_reason = reason
        self._trace(self.sched.now, rec.node, "drop", pkt=rec.packet_id,
                    note=reason.value)
        self._count_resolution()

    def _count_resolution(self) -> None:
        self._resolved += 1
        if (self._total_quota is not None and self._generated == self._total_quota
                and self._resolved == self._total_quota):
            self.sched.request_stop()

    def _next_frame(self, dev: Device) -> None:
        dev.current = dev.queue.pop() if len(dev.queue) else None
        if dev.current is not None:
            self._start_attempt(dev)

    # ---------------------------------------------------------- superframe

    def _on_superframe_start(self, k: int) -> None:
        now = self.sched.now
        for node_id in range(len(self.devices) + 1):
            self.medium.set_awake(node_id, True, now)
        self._trace(now, COORDINATOR, "sf-start", note=f"k={k}")
        beacon = Frame(FrameKind.BEACON, COORDINATOR, BROADCAST, self.beacon_airtime)
        btx = self.medium.begin_tx(beacon, now)
        self._trace(now, COORDINATOR, "beacon-start")
        self.sched.after(self.beacon_airtime, self._on_beacon_end, btx,
                         kind=EventKind.BEACON, target=COORDINATOR)
        if self.schedule.sd < self.schedule.bi:
            self.sched.at(now + self.schedule.sd, self._on_inactive_start, k,
                          kind=EventKind.CAP_END, target=COORDINATOR)
        self.sched.at(now + self.schedule.bi, self._on_superframe_start, k + 1,
                      kind=EventKind.SUPERFRAME_START, target=COORDINATOR)

    def _on_beacon_end(self, btx) -> None:
        self.medium.end_tx(btx, self.sched.now)
        self._trace(self.sched.now, COORDINATOR, "beacon-end")

    def _on_inactive_start(self, k: int) -> None:
        now = self.sched.now
        for node_id in range(len(self.devices) + 1):
            self.medium.set_awake(node_id, False, now)
        self._trace(now, COORDINATOR, "sleep", note=f"k={k}")

    # -------------------------------------------------------------- trace

    def _trace(self, time: int, node: int, event: str, *, pkt: int = -1,
               note: str = "") -> None:
        if self.trace is None:
            return
        if self.slotted:
            offset = time % self.schedule.bi
            if offset < self.schedule.cap_offset:
                period = "beacon"
            elif offset < self.schedule.sd:
                period = "cap"
            else:
                period = "inactive"
            slot = self.schedule.slot_index(time) if offset < self.schedule.sd else -1
            self.trace.add(time, node, event, pkt=pkt,
                           sf=self.schedule.index_at(time), slot=slot,
                           period=period, note=note)
        else:
            self.trace.add(time, node, event, pkt=pkt, note=note)
