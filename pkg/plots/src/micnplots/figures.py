"""Figure rendering from the simulator's CSV contracts.

Three figure kinds, all pure functions of the input files (fixed styles, no
timestamps baked into the output):

* ``rank``    - per-client rank versus time, stepped at innovative receptions.
* ``traffic`` - cumulative data transmissions over time, with the receiver-side
                innovative/redundant split.
* ``sweep``   - download time against the swept axis, one line per protocol.

Input schemas are the documented CSV headers:

    time,node,kind,index,innovative,peer
    client,download_time,rank,interests_sent,data_rx,data_rx_innovative
    total_data_tx,total_interest_tx,drops
    axis,value,protocol,seed,mean_download_time,max_download_time,total_data_tx,total_interest_tx
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

TRACE_HEADER = ["time", "node", "kind", "index", "innovative", "peer"]
SWEEP_HEADER = ["axis", "value", "protocol", "seed", "mean_download_time",
                "max_download_time", "total_data_tx", "total_interest_tx"]


class SchemaError(ValueError):
    """Input file does not match the documented CSV contract."""


@dataclass(frozen=True)
class TraceRow:
    time: float
    node: str
    kind: str
    index: int | None
    innovative: bool | None
    peer: str


def read_trace(path) -> list[TraceRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != TRACE_HEADER:
            offending = _first_mismatch(header, TRACE_HEADER)
            raise SchemaError(f"{path}: trace header mismatch at column {offending!r}")
        rows = []
        for rec in reader:
            if not rec:
                continue
            rows.append(TraceRow(
                time=float(rec[0]),
                node=rec[1],
                kind=rec[2],
                index=int(rec[3]) if rec[3] else None,
                innovative=None if rec[4] == "" else rec[4] == "1",
                peer=rec[5],
            ))
        return rows


def _first_mismatch(got, want):
    if got is None:
        return want[0]
    for g, w in zip(got, want):
        if g != w:
            return g
    return "missing columns" if len(got or []) < len(want) else "extra columns"


def read_summary(path):
    """Returns (client rows as dicts, network row as dict)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0].split(",") != [
            "client", "download_time", "rank", "interests_sent",
            "data_rx", "data_rx_innovative"]:
        raise SchemaError(f"{path}: summary client header mismatch at column "
                          f"{_first_mismatch(lines[0].split(',') if lines else None, ['client'])!r}")
    clients = []
    i = 1
    while i < len(lines) and lines[i] != "total_data_tx,total_interest_tx,drops":
        parts = lines[i].split(",")
        clients.append({
            "client": parts[0],
            "download_time": float(parts[1]) if parts[1] else None,
            "rank": int(parts[2]),
            "interests_sent": int(parts[3]),
            "data_rx": int(parts[4]),
            "data_rx_innovative": int(parts[5]),
        })
        i += 1
    if i + 1 >= len(lines):
        raise SchemaError(f"{path}: summary network row missing")
    parts = lines[i + 1].split(",")
    network = {"total_data_tx": int(parts[0]),
               "total_interest_tx": int(parts[1]),
               "drops": int(parts[2])}
    return clients, network


def read_sweep(path):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_HEADER:
            raise SchemaError(f"{path}: sweep header mismatch at column "
                              f"{_first_mismatch(header, SWEEP_HEADER)!r}")
        return [dict(zip(SWEEP_HEADER, rec)) for rec in reader if rec]


def render_rank(trace_paths, nodes=None):
    """Step curves of rank over time, one line per node with rank changes."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in trace_paths:
        rows = read_trace(path)
        by_node: dict[str, tuple[list, list]] = {}
        for r in rows:
            if r.kind != "rank-change":
                continue
            if nodes and r.node not in nodes:
                continue
            xs, ys = by_node.setdefault(r.node, ([0.0], [0]))
            xs.append(r.time)
            ys.append(r.index)
        label_prefix = f"{path}: " if len(trace_paths) > 1 else ""
        for node in sorted(by_node):
            xs, ys = by_node[node]
            ax.step(xs, ys, where="post", label=f"{label_prefix}{node}")
    ax.set_xlabel("time")
    ax.set_ylabel("rank")
    if ax.get_lines():
        ax.legend(loc="lower right")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def render_traffic(trace_paths, nodes=None):
    """Cumulative data transmissions plus the innovative/redundant split of
    receptions, over time."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in trace_paths:
        rows = read_trace(path)
        label_prefix = f"{path}: " if len(trace_paths) > 1 else ""
        tx_times = [r.time for r in rows if r.kind == "data-tx"]
        innov = [r.time for r in rows if r.kind == "data-rx" and r.innovative]
        redun = [r.time for r in rows if r.kind == "data-rx" and r.innovative is False]
        for times, label in ((tx_times, "transmissions"),
                             (innov, "innovative receptions"),
                             (redun, "redundant receptions")):
            xs = [0.0] + sorted(times)
            ys = list(range(len(xs)))
            ax.step(xs, ys, where="post", label=f"{label_prefix}{label}")
    ax.set_xlabel("time")
    ax.set_ylabel("cumulative data packets")
    ax.legend(loc="upper left")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


def render_sweep(sweep_paths, metric="mean_download_time"):
    """Download time against the swept value, averaged over seeds, one line
    per protocol."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for path in sweep_paths:
        rows = read_sweep(path)
        if not rows:
            continue
        axis = rows[0]["axis"]
        grouped: dict[str, dict[float, list[float]]] = {}
        for r in rows:
            grouped.setdefault(r["protocol"], {}).setdefault(
                float(r["value"]), []).append(float(r[metric]))
        label_prefix = f"{path}: " if len(sweep_paths) > 1 else ""
        for protocol in sorted(grouped):
            points = sorted((v, sum(ts) / len(ts)) for v, ts in grouped[protocol].items())
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    marker="o", label=f"{label_prefix}{protocol}")
        ax.set_xlabel(axis)
    ax.set_ylabel("download time")
    if ax.get_lines():
        ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    return fig


RENDERERS = {"rank": render_rank, "traffic": render_traffic, "sweep": render_sweep}


def render(kind, inputs, **kwargs):
    if kind not in RENDERERS:
        raise ValueError(f"unknown figure kind {kind!r}; expected one of {sorted(RENDERERS)}")
    return RENDERERS[kind](inputs, **kwargs)


def save(fig, path):
    fig.savefig(path, dpi=120)
    plt.close(fig)
