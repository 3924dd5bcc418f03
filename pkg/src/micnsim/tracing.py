"""Trace records, counters, and the CSV contracts other tools consume.

Trace CSV header (one row per record)::

    time,node,kind,index,innovative,peer

Kinds: rank-change (index = new rank), data-tx, data-rx (innovative is 0/1),
interest-tx, drop (a packet lost on the wire), decode-complete.  Fields
that do not apply to a kind are left empty.

Summary CSV: one row per client under the header
``client,download_time,rank,interests_sent,data_rx,data_rx_innovative``,
followed by a single network row under the header
``total_data_tx,total_interest_tx,drops``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

TRACE_HEADER = "time,node,kind,index,innovative,peer"
SUMMARY_CLIENT_HEADER = "client,download_time,rank,interests_sent,data_rx,data_rx_innovative"
SUMMARY_NETWORK_HEADER = "total_data_tx,total_interest_tx,drops"

KINDS = ("rank-change", "data-tx", "data-rx", "interest-tx", "drop", "decode-complete")


@dataclass(frozen=True)
class TraceRecord:
    time: float
    node: str
    kind: str
    index: int | None = None
    innovative: bool | None = None
    peer: str | None = None


@dataclass
class ClientSummary:
    client: str
    download_time: float | None
    rank: int
    interests_sent: int
    data_rx: int
    data_rx_innovative: int


@dataclass
class NetworkSummary:
    total_data_tx: int
    total_interest_tx: int
    drops: int


class Tracer:
    """Collects trace rows and the counters behind the summary CSV."""

    def __init__(self, scheduler, enabled: bool = True):
        self.scheduler = scheduler
        self.enabled = enabled
        self.records: list[TraceRecord] = []
        self.total_data_tx = 0
        self.total_interest_tx = 0
        self.drops = 0

    def emit(self, kind: str, node: str, index: int | None = None,
             innovative: bool | None = None, peer: str | None = None):
        if kind == "data-tx":
            self.total_data_tx += 1
        elif kind == "interest-tx":
            self.total_interest_tx += 1
        elif kind == "drop":
            self.drops += 1
        if self.enabled:
            self.records.append(TraceRecord(self.scheduler.now, node, kind,
                                            index, innovative, peer))

    def network_summary(self) -> NetworkSummary:
        return NetworkSummary(self.total_data_tx, self.total_interest_tx, self.drops)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_trace_csv(records) -> str:
    out = io.StringIO()
    out.write(TRACE_HEADER + "\n")
    for r in records:
        out.write(",".join((_cell(r.time), r.node, r.kind, _cell(r.index),
                            _cell(r.innovative), _cell(r.peer))) + "\n")
    return out.getvalue()


def format_summary_csv(clients: list[ClientSummary], network: NetworkSummary) -> str:
    out = io.StringIO()
    out.write(SUMMARY_CLIENT_HEADER + "\n")
    for c in clients:
        out.write(",".join((c.client, _cell(c.download_time), str(c.rank),
                            str(c.interests_sent), str(c.data_rx),
                            str(c.data_rx_innovative))) + "\n")
    out.write(SUMMARY_NETWORK_HEADER + "\n")
    out.write(f"{network.total_data_tx},{network.total_interest_tx},{network.drops}\n")
    return out.getvalue()


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def parse_summary_csv(text: str) -> tuple[list[ClientSummary], NetworkSummary]:
    """Read back a summary file written by format_summary_csv."""
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != SUMMARY_CLIENT_HEADER:
        raise ValueError("summary file does not start with the client header")
    clients = []
    i = 1
    while i < len(lines) and lines[i] != SUMMARY_NETWORK_HEADER:
        parts = lines[i].split(",")
        clients.append(ClientSummary(
            client=parts[0],
            download_time=float(parts[1]) if parts[1] else None,
            rank=int(parts[2]),
            interests_sent=int(parts[3]),
            data_rx=int(parts[4]),
            data_rx_innovative=int(parts[5]),
        ))
        i += 1
    if i >= len(lines) - 1:
        raise ValueError("summary file is missing the network row")
    parts = lines[i + 1].split(",")
    network = NetworkSummary(int(parts[0]), int(parts[1]), int(parts[2]))
    return clients, network
