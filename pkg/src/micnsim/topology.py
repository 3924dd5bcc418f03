"""Topology files, forwarding-base computation, and max-flow bounds.

Topology files are line-oriented::

    # comment
    node <name> <role>     # role is source, router, or client
    link <a> <b>

Links are bidirectional and all share the standard timing parameters.
The forwarding base of a node v contains the face toward neighbor u
exactly when u can still reach some source after v is removed from the
graph, without transiting a client node (clients consume content, they do
not relay it).  Interests multicast over these faces therefore never need
to loop back through the node that forwarded them.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

ROLES = ("source", "router", "client")


class TopologyError(ValueError):
    pass


@dataclass
class TopologyGraph:
    nodes: dict[str, str] = field(default_factory=dict)   # name -> role
    edges: list[tuple[str, str]] = field(default_factory=list)
    adjacency: dict[str, list[str]] = field(default_factory=dict)

    def add_node(self, name: str, role: str):
        if role not in ROLES:
            raise TopologyError(f"unknown role {role!r} for node {name}")
        if name in self.nodes:
            raise TopologyError(f"duplicate node {name}")
        self.nodes[name] = role
        self.adjacency[name] = []

    def add_link(self, a: str, b: str):
        for name in (a, b):
            if name not in self.nodes:
                raise TopologyError(f"link references unknown node {name}")
        if a == b:
            raise TopologyError(f"self-link at {a}")
        if b in self.adjacency[a]:
            raise TopologyError(f"duplicate link {a} {b}")
        self.edges.append((a, b))
        self.adjacency[a].append(b)
        self.adjacency[b].append(a)

    def sources(self) -> list[str]:
        return [n for n, r in self.nodes.items() if r == "source"]

    def clients(self) -> list[str]:
        return [n for n, r in self.nodes.items() if r == "client"]

    def routers(self) -> list[str]:
        return [n for n, r in self.nodes.items() if r == "router"]

    def validate(self):
        if not self.sources():
            raise TopologyError("topology has no source node")
        if not self.clients():
            raise TopologyError("topology has no client node")
        # Connectivity over all nodes.
        start = next(iter(self.nodes))
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        missing = set(self.nodes) - seen
        if missing:
            raise TopologyError(f"topology is not connected; unreachable: {sorted(missing)}")


def load_topology(source) -> TopologyGraph:
    """Parse a topology from a file path or a string of statements."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except (OSError, ValueError):
            if isinstance(source, str) and ("\n" in source or source.strip().startswith(("#", "node", "link"))):
                text = source
            else:
                raise
    graph = TopologyGraph()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "node":
                if len(parts) != 3:
                    raise TopologyError("expected: node <name> <role>")
                graph.add_node(parts[1], parts[2])
            elif parts[0] == "link":
                if len(parts) != 3:
                    raise TopologyError("expected: link <a> <b>")
                graph.add_link(parts[1], parts[2])
            else:
                raise TopologyError(f"unknown statement {parts[0]!r}")
        except TopologyError as exc:
            raise TopologyError(f"line {lineno}: {exc}") from None
    graph.validate()
    return graph


def _reaches_source(graph: TopologyGraph, start: str, removed: str) -> bool:
    """Can ``start`` reach a source with ``removed`` deleted, not relaying
    through clients?"""
    if graph.nodes[start] == "source":
        return True
    if graph.nodes[start] == "client":
        return False
    seen = {start, removed}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in graph.adjacency[u]:
            if v in seen:
                continue
            if graph.nodes[v] == "source":
                return True
            seen.add(v)
            if graph.nodes[v] == "router":
                queue.append(v)
    return False


def compute_fib(graph: TopologyGraph) -> dict[str, list[str]]:
    """Per-node list of neighbor names that lead to a source without
    looping back through the node itself.  Sources answer everything from
    their own store, so their forwarding base is empty."""
    fib: dict[str, list[str]] = {}
    for v in graph.nodes:
        if graph.nodes[v] == "source":
            fib[v] = []
            continue
        fib[v] = [u for u in graph.adjacency[v] if _reaches_source(graph, u, v)]
    return fib


def max_flow(graph: TopologyGraph, client: str, sources: list[str] | None = None) -> int:
    """Unit-capacity max flow from the sources (jointly) to one client.

    Every link direction carries one data packet per time unit, so this is
    the throughput ceiling for the client.  Client nodes other than the
    target cannot relay.
    """
    if sources is None:
        sources = graph.sources()
    if client not in graph.nodes:
        raise TopologyError(f"unknown client {client}")
    if not sources:
        return 0
    # Edmonds-Karp on the directed residual graph; each undirected link is
    # two independent unit arcs.  A virtual super-source feeds all sources.
    SUPER = object()
    capacity: dict[tuple, int] = {}
    neighbors: dict[object, list] = {SUPER: []}

    def add_arc(u, v, cap):
        capacity[(u, v)] = capacity.get((u, v), 0) + cap
        capacity.setdefault((v, u), 0)
        if v not in neighbors[u]:
            neighbors[u].append(v)
        if u not in neighbors.setdefault(v, []):
            neighbors[v].append(u)

    for name in graph.nodes:
        neighbors.setdefault(name, [])
    for a, b in graph.edges:
        add_arc(a, b, 1)
        add_arc(b, a, 1)
    for s in sources:
        add_arc(SUPER, s, len(graph.edges) + 1)
    # Non-target clients do not relay: remove their outgoing arcs.
    for c in graph.clients():
        if c != client:
            for v in list(neighbors[c]):
                capacity[(c, v)] = 0

    flow = 0
    while True:
        parent = {SUPER: SUPER}
        queue = deque([SUPER])
        while queue and client not in parent:
            u = queue.popleft()
            for v in neighbors[u]:
                if v not in parent and capacity.get((u, v), 0) > 0:
                    parent[v] = u
                    queue.append(v)
        if client not in parent:
            return flow
        v = client
        while v is not SUPER:
            u = parent[v]
            capacity[(u, v)] -= 1
            capacity[(v, u)] += 1
            v = u
        flow += 1


def hop_distance(graph: TopologyGraph, client: str) -> int | None:
    """Fewest hops from any source to the client, relaying only via routers."""
    dist = {s: 0 for s in graph.sources()}
    queue = deque(graph.sources())
    while queue:
        u = queue.popleft()
        if u == client:
            return dist[u]
        for v in graph.adjacency[u]:
            if v in dist:
                continue
            if graph.nodes[v] == "client" and v != client:
                continue
            dist[v] = dist[u] + 1
            queue.append(v)
    return dist.get(client)


@dataclass(frozen=True)
class FlowBound:
    """Max-flow throughput ceiling and the matching download-time bound."""

    max_flow: int
    transfer_time: float        # n / max_flow
    round_trip_offset: float    # first-byte latency along the shortest path

    @property
    def download_bound(self) -> float:
        return self.transfer_time + self.round_trip_offset


def download_bound(graph: TopologyGraph, client: str, n: int,
                   propagation: float = 0.1, data_tx: float = 1.0,
                   interest_tx: float = 2.0 ** -14) -> FlowBound:
    """Lower bound on the client's download time for an n-segment generation."""
    flow = max_flow(graph, client)
    hops = hop_distance(graph, client)
    if flow == 0 or hops is None:
        return FlowBound(0, float("inf"), float("inf"))
    offset = hops * (interest_tx + propagation) + hops * (data_tx + propagation)
    return FlowBound(flow, n / flow, offset)
