"""Topology parsing, FIB computation, and max-flow with a brute-force oracle."""

from itertools import combinations

import pytest

from micnsim.experiment import resolve_topology
from micnsim.topology import (TopologyError, compute_fib, download_bound,
                              hop_distance, load_topology, max_flow)

MINIMAL = """
node S source
node U client
link S U
"""

LINE = """
node S source
node A router
node B router
node U client
link S A
link A B
link B U
"""


class TestLoading:
    def test_butterfly_shipped(self):
        g = resolve_topology("butterfly")
        assert len(g.nodes) == 8
        assert set(g.sources()) == {"S1", "S2"}
        assert set(g.clients()) == {"U1", "U2"}
        assert len(g.edges) == 9

    def test_planetlab_shipped(self):
        g = resolve_topology("planetlab")
        assert len(g.nodes) == 26
        assert len(g.sources()) == 1
        assert len(g.clients()) == 5
        assert len(g.routers()) == 20

    def test_minimal(self):
        g = load_topology(MINIMAL)
        assert g.nodes == {"S": "source", "U": "client"}

    def test_disconnected_rejected(self):
        with pytest.raises(TopologyError, match="not connected"):
            load_topology("""
node S source
node U client
node X router
link S U
""")

    def test_parse_errors_carry_line_numbers(self):
        with pytest.raises(TopologyError, match="line 2"):
            load_topology("node S source\nnode U wizard\nlink S U")
        with pytest.raises(TopologyError, match="line 3"):
            load_topology("node S source\nnode U client\nlink S X")
        with pytest.raises(TopologyError, match="line 1"):
            load_topology("frob S U\nnode U client\n")

    def test_duplicates_rejected(self):
        with pytest.raises(TopologyError, match="duplicate node"):
            load_topology("node S source\nnode S source\nnode U client\nlink S U")
        with pytest.raises(TopologyError, match="duplicate link"):
            load_topology("node S source\nnode U client\nlink S U\nlink U S")

    def test_missing_roles_rejected(self):
        with pytest.raises(TopologyError, match="no source"):
            load_topology("node A router\nnode U client\nlink A U")
        with pytest.raises(TopologyError, match="no client"):
            load_topology("node S source\nnode A router\nlink S A")


class TestFib:
    def test_butterfly_middle_router(self):
        g = resolve_topology("butterfly")
        fib = compute_fib(g)
        # R4 cannot reach a source without relaying through a client once R3
        # is removed, so R3's forwarding base stops at the source-side rows.
        assert sorted(fib["R3"]) == ["R1", "R2"]

    def test_sources_have_empty_fib(self):
        g = resolve_topology("butterfly")
        fib = compute_fib(g)
        assert fib["S1"] == [] and fib["S2"] == []

    def test_line_topology(self):
        g = load_topology(LINE)
        fib = compute_fib(g)
        assert fib["B"] == ["A"]
        assert fib["A"] == ["S"]
        assert fib["U"] == ["B"]

    def test_clients_never_appear_in_fibs(self):
        g = resolve_topology("butterfly")
        fib = compute_fib(g)
        clients = set(g.clients())
        for node, faces in fib.items():
            assert not clients & set(faces)


def brute_force_min_cut(graph, client):
    """Enumerate node bipartitions; min directed arc count crossing any cut
    separating all sources from the client (non-target clients removed,
    since they cannot relay)."""
    nodes = [n for n in graph.nodes
             if graph.nodes[n] != "client" or n == client]
    sources = set(graph.sources())
    others = [n for n in nodes if n not in sources and n != client]
    best = None
    for r in range(len(others) + 1):
        for extra in combinations(others, r):
            side = sources | set(extra)
            cut = 0
            for a, b in graph.edges:
                if a not in nodes or b not in nodes:
                    continue
                if (a in side) != (b in side):
                    cut += 1  # unit arc in the crossing direction
            best = cut if best is None else min(best, cut)
    return best


class TestMaxFlow:
    def test_butterfly_clients(self):
        g = resolve_topology("butterfly")
        assert max_flow(g, "U1") == 2
        assert max_flow(g, "U2") == 2

    def test_single_path(self):
        g = load_topology(LINE)
        assert max_flow(g, "U") == 1

    def test_unknown_client(self):
        g = load_topology(LINE)
        with pytest.raises(TopologyError):
            max_flow(g, "Z")

    def test_matches_brute_force_min_cut(self):
        for name in ("butterfly",):
            g = resolve_topology(name)
            for client in g.clients():
                assert max_flow(g, client) == brute_force_min_cut(g, client)
        g = load_topology(LINE)
        assert max_flow(g, "U") == brute_force_min_cut(g, "U")
        g = load_topology(MINIMAL)
        assert max_flow(g, "U") == brute_force_min_cut(g, "U")

    def test_planetlab_min_cut_two_everywhere(self):
        g = resolve_topology("planetlab")
        for client in g.clients():
            assert max_flow(g, client) == 2

    def test_download_bound(self):
        g = resolve_topology("butterfly")
        b = download_bound(g, "U1", 100)
        assert b.max_flow == 2
        assert b.transfer_time == 50.0
        assert hop_distance(g, "U1") == 2
        assert b.round_trip_offset == pytest.approx(2 * (2 ** -14 + 0.1) + 2 * 1.1)
        assert b.download_bound == pytest.approx(50.0 + b.round_trip_offset)
