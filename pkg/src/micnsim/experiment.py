"""Experiment configuration, network construction, runs, and sweeps.

A run is fully determined by its configuration (topology, protocol, sizes,
loss rate, seed): one seeded generator drives nonces, coding coefficients,
jitter, and loss draws, and the event loop is single-threaded, so repeating
a run reproduces its trace byte for byte.

Sweeps expand a master seed into per-run seeds through numpy's
``SeedSequence(master, spawn_key=(counter,))``, so any single run of a
sweep can be reproduced in isolation from (master seed, counter).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, replace

import numpy as np

from .content import Generation, make_generation
from .engine import Link, LinkParams, Scheduler
from .gf import Field
from .protocols import PROTOCOLS, Node, make_node
from .topology import TopologyGraph, compute_fib, load_topology
from .tracing import (ClientSummary, NetworkSummary, Tracer, format_summary_csv,
                      format_trace_csv, write_text)

BUNDLED_TOPOLOGIES = ("butterfly", "planetlab")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    topology: str = "butterfly"          # bundled name or a file path
    protocol: str = "micn"
    n: int = 100                         # generation size
    q: int = 256                         # field size (power of two)
    pipeline: int = 10
    timeout: float = 10.0
    loss: float = 0.0
    seed: int = 1
    payload_size: int = 64
    prefix: str = "/content"
    generation_id: int = 0
    trace_path: str | None = None
    summary_path: str | None = None
    collect_trace: bool = True
    max_events: int = 5_000_000

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.n < 1:
            raise ConfigError("generation size must be at least 1")
        if self.q not in (2, 256):
            # byte payloads are exact field-element sequences only for these
            raise ConfigError("simulations support field sizes 2 and 256")
        if self.pipeline < 1:
            raise ConfigError("pipeline size must be at least 1")
        if not 0.0 <= self.loss <= 1.0:
            raise ConfigError("loss probability must lie in [0, 1]")
        if self.timeout <= 0:
            raise ConfigError("timeout must be positive")
        if self.payload_size < 1:
            raise ConfigError("payload size must be at least 1")


_BOOL_KEYS = {"collect_trace"}
_INT_KEYS = {"n", "q", "pipeline", "seed", "payload_size", "generation_id", "max_events"}
_FLOAT_KEYS = {"timeout", "loss"}


def config_from_file(path: str, overrides: dict | None = None) -> ExperimentConfig:
    """key=value configuration file; '#' starts a comment."""
    values: dict = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = value
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return config_from_mapping(values)


def config_from_mapping(values: dict) -> ExperimentConfig:
    cfg = ExperimentConfig()
    valid = set(cfg.__dataclass_fields__)
    for key, value in values.items():
        if key not in valid:
            raise ConfigError(f"unknown configuration key {key!r}")
        if isinstance(value, str):
            try:
                if key in _INT_KEYS:
                    value = int(value)
                elif key in _FLOAT_KEYS:
                    value = float(value)
                elif key in _BOOL_KEYS:
                    value = value.lower() in ("1", "true", "yes", "on")
            except ValueError:
                raise ConfigError(f"bad value for {key}: {value!r}")
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


def resolve_topology(name_or_path: str) -> TopologyGraph:
    if name_or_path in BUNDLED_TOPOLOGIES:
        ref = importlib.resources.files("micnsim").joinpath(f"data/{name_or_path}.topo")
        return load_topology(ref.read_text(encoding="utf-8"))
    return load_topology(name_or_path)


class SimContext:
    """What nodes and faces see of a running simulation."""

    def __init__(self, scheduler: Scheduler, rng, tracer: Tracer):
        self.scheduler = scheduler
        self.rng = rng
        self.tracer = tracer

    def trace(self, kind, node, index=None, innovative=None, peer=None):
        self.tracer.emit(kind, node, index=index, innovative=innovative, peer=peer)


@dataclass
class RunResult:
    config: ExperimentConfig
    end_time: float
    clients: dict[str, Node]
    nodes: dict[str, Node]
    summaries: list[ClientSummary]
    network: NetworkSummary
    tracer: Tracer
    generation: Generation
    graph: TopologyGraph

    @property
    def download_times(self) -> dict[str, float | None]:
        return {name: node.done_time for name, node in self.clients.items()}

    def client_summary(self, name: str) -> ClientSummary:
        for s in self.summaries:
            if s.client == name:
                return s
        raise KeyError(name)

    def pit_leftovers(self) -> dict[str, int]:
        return {name: node.pit_live_entries() for name, node in self.nodes.items()}


def build_network(config: ExperimentConfig, graph: TopologyGraph, sim: SimContext,
                  generation: Generation, fld: Field) -> dict[str, Node]:
    nodes: dict[str, Node] = {}
    for name, role in graph.nodes.items():
        nodes[name] = make_node(config.protocol, name, role, sim, field=fld,
                                generation=generation, pipeline=config.pipeline,
                                timeout=config.timeout)
    params = LinkParams(loss=config.loss)
    face_to: dict[tuple[str, str], object] = {}
    for a, b in graph.edges:
        link = Link(nodes[a], nodes[b], params, sim)
        nodes[a].faces.append(link.face_a)
        nodes[b].faces.append(link.face_b)
        face_to[(a, b)] = link.face_a
        face_to[(b, a)] = link.face_b
    for name, neighbors in compute_fib(graph).items():
        nodes[name].fib = [face_to[(name, u)] for u in neighbors]
    return nodes


def run_experiment(config: ExperimentConfig) -> RunResult:
    config.validate()
    graph = resolve_topology(config.topology)
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    scheduler = Scheduler()
    tracer = Tracer(scheduler, enabled=config.collect_trace)
    sim = SimContext(scheduler, rng, tracer)

    fld = Field(config.q.bit_length() - 1)
    generation = make_generation(config.prefix, config.generation_id, config.n,
                                 config.payload_size, rng)
    nodes = build_network(config, graph, sim, generation, fld)

    for name in graph.clients():
        scheduler.schedule_at(0.0, nodes[name].start)
    end_time = scheduler.run(config.max_events)

    clients = {name: nodes[name] for name in graph.clients()}
    summaries = [
        ClientSummary(
            client=name,
            download_time=node.done_time,
            rank=node.rank(),
            interests_sent=node.interests_sent,
            data_rx=node.data_rx,
            data_rx_innovative=node.data_rx_innovative,
        )
        for name, node in clients.items()
    ]
    result = RunResult(config=config, end_time=end_time, clients=clients,
                       nodes=nodes, summaries=summaries,
                       network=tracer.network_summary(), tracer=tracer,
                       generation=generation, graph=graph)
    if config.trace_path:
        write_text(config.trace_path, format_trace_csv(tracer.records))
    if config.summary_path:
        write_text(config.summary_path, format_summary_csv(summaries, result.network))
    return result


def verify_decode(result: RunResult) -> bool:
    """Every finished client must hold the generation byte for byte."""
    gen = result.generation
    for name, node in result.clients.items():
        if not node.done:
            return False
        if hasattr(node, "basis"):
            decoded = node.basis(node.key).decode()
            if not isinstance(decoded, list) or tuple(decoded) != gen.segments:
                return False
        else:
            segs = tuple(node.store.get((gen.prefix, s)) for s in range(1, gen.n + 1))
            if segs != gen.segments:
                return False
    return True


def spawned_seed(master: int, counter: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master, spawn_key=(counter,))


SWEEP_HEADER = ("axis,value,protocol,seed,mean_download_time,max_download_time,"
                "total_data_tx,total_interest_tx")


@dataclass
class SweepRow:
    axis: str
    value: float
    protocol: str
    seed: int
    mean_download_time: float
    max_download_time: float
    total_data_tx: int
    total_interest_tx: int


def run_sweep(base: ExperimentConfig, axis: str, values, protocols=None,
              seeds: int = 1) -> list[SweepRow]:
    """One run per (value, protocol, seed); per-run seeds spawn from the master."""
    if axis not in ("pipeline", "loss"):
        raise ConfigError(f"sweep axis must be 'pipeline' or 'loss', got {axis!r}")
    if not values:
        raise ConfigError("sweep needs at least one axis value")
    protocols = list(protocols) if protocols else [base.protocol]
    rows = []
    counter = 0
    for value in values:
        for protocol in protocols:
            for s in range(seeds):
                run_seed = int(spawned_seed(base.seed, counter).generate_state(1)[0])
                counter += 1
                cfg = replace(base, protocol=protocol, seed=run_seed,
                              trace_path=None, summary_path=None, collect_trace=False)
                if axis == "pipeline":
                    cfg.pipeline = int(value)
                else:
                    cfg.loss = float(value)
                result = run_experiment(cfg)
                times = [t for t in result.download_times.values() if t is not None]
                rows.append(SweepRow(
                    axis=axis, value=value, protocol=protocol, seed=s,
                    mean_download_time=sum(times) / len(times) if times else float("nan"),
                    max_download_time=max(times) if times else float("nan"),
                    total_data_tx=result.network.total_data_tx,
                    total_interest_tx=result.network.total_interest_tx,
                ))
    return rows


def format_sweep_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(f"{r.axis},{r.value},{r.protocol},{r.seed},"
                     f"{r.mean_download_time!r},{r.max_download_time!r},"
                     f"{r.total_data_tx},{r.total_interest_tx}")
    return "\n".join(lines) + "\n"
