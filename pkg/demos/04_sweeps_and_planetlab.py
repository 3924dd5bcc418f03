"""Pipeline and loss sweeps on the butterfly, then the 26-node stand-in
overlay with five concurrent clients.

Run with:  python demos/04_sweeps_and_planetlab.py   (takes a minute or two)
"""

from micnsim.experiment import ExperimentConfig, run_experiment, run_sweep
from micnsim.topology import download_bound

base = ExperimentConfig(topology="butterfly", n=100, seed=1, collect_trace=False)

print("download time vs pipeline size (butterfly, no losses):")
rows = run_sweep(base, "pipeline", [1, 2, 5, 10], protocols=["micn", "ndn"])
for r in rows:
    print(f"  rho={int(r.value):>2} {r.protocol:5s} mean={r.mean_download_time:.1f}")

print("\ndownload time vs loss rate (butterfly, 3 seeds averaged):")
rows = run_sweep(base, "loss", [0.0, 0.05, 0.1, 0.2],
                 protocols=["micn", "netcodccn"], seeds=3)
by_key = {}
for r in rows:
    by_key.setdefault((r.value, r.protocol), []).append(r.mean_download_time)
for (p, protocol), times in sorted(by_key.items()):
    print(f"  p={p:<5} {protocol:10s} mean={sum(times) / len(times):.1f}")

print("\n26-node stand-in overlay, five clients, one source:")
for protocol in ("micn", "micn-ic", "netcodccn"):
    cfg = ExperimentConfig(topology="planetlab", protocol=protocol, n=100, seed=1,
                           max_events=4_000_000, collect_trace=False)
    result = run_experiment(cfg)
    worst = max(s.download_time for s in result.summaries)
    print(f"  {protocol:10s} worst client {worst:.1f}  "
          f"data tx {result.network.total_data_tx}")
graph = result.graph
for client in graph.clients():
    b = download_bound(graph, client, 100)
    print(f"  max-flow to {client}: {b.max_flow}")
