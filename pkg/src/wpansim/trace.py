"""Optional per-event MAC trace for conformance checks and debugging.

Events carry the node, a short tag, and (in beacon mode) the superframe
index, slot index, and period the instant falls in.  The text form is one
tab-separated line per event with a fixed column order, stable across
versions; missing numeric fields are written as ``-``.
"""

from __future__ import annotations

from dataclasses import dataclass

COLUMNS = ["time", "node", "event", "pkt", "sf", "slot", "period", "note"]


@dataclass(slots=True)
class TraceEvent:
    time: int
    node: int
    event: str
    pkt: int = -1
    sf: int = -1
    slot: int = -1
    period: str = ""
    note: str = ""


class MacTrace:
    """Append-only event collection; ordering follows simulation callbacks,
    which may announce an imminent instant slightly ahead (sort by time when
    strict order matters)."""

    def __init__(self):
        self.events: list[TraceEvent] = []

    def add(self, time: int, node: int, event: str, *, pkt: int = -1, sf: int = -1,
            slot: int = -1, period: str = "", note: str = "") -> None:
        self.events.append(TraceEvent(time, node, event, pkt, sf, slot, period, note))

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def of_kind(self, event: str) -> list[TraceEvent]:
        return [ev for ev in self.events if ev.event == event]

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\t".join(COLUMNS) + "\n")
            for ev in self.events:
                fh.write(f"{ev.time}\t{ev.node}\t{ev.event}\t"
                         f"{ev.pkt if ev.pkt >= 0 else '-'}\t"
                         f"{ev.sf if ev.sf >= 0 else '-'}\t"
                         f"{ev.slot if ev.slot >= 0 else '-'}\t"
                         f"{ev.period or '-'}\t{ev.note or '-'}\n")


def read_trace(path) -> MacTrace:
    trace = MacTrace()
    with open(path) as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if header != COLUMNS:
            raise ValueError(f"unrecognized trace header: {header}")
        for line in fh:
            time, node, event, pkt, sf, slot, period, note = line.rstrip("\n").split("\t")
            trace.add(int(time), int(node), event,
                      pkt=-1 if pkt == "-" else int(pkt),
                      sf=-1 if sf == "-" else int(sf),
                      slot=-1 if slot == "-" else int(slot),
                      period="" if period == "-" else period,
                      note="" if note == "-" else note)
    return trace
