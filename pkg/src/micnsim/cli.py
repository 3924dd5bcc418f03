"""Command-line front door: run, sweep, tables, topo-check.

Exit codes: 0 on success, 1 on configuration/validation errors, 2 when a
run hits the runaway event ceiling.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import milic
from .engine import RunawayError
from .experiment import (BUNDLED_TOPOLOGIES, ConfigError, ExperimentConfig,
                         config_from_file, config_from_mapping, format_sweep_csv,
                         resolve_topology, run_experiment, run_sweep, verify_decode)
from .protocols import PROTOCOLS
from .topology import TopologyError, compute_fib, download_bound
from .tracing import write_text


def _add_config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--topology", help=f"file path or one of {BUNDLED_TOPOLOGIES}")
    p.add_argument("--protocol", choices=PROTOCOLS)
    p.add_argument("--n", type=int, help="generation size")
    p.add_argument("--q", type=int, help="field size (2 or 256)")
    p.add_argument("--pipeline", type=int, help="client pipeline size")
    p.add_argument("--timeout", type=float, help="client interest timeout")
    p.add_argument("--loss", type=float, help="per-packet loss probability")
    p.add_argument("--seed", type=int)
    p.add_argument("--payload-size", type=int, dest="payload_size")
    p.add_argument("--prefix")
    p.add_argument("--max-events", type=int, dest="max_events")


def _config_from_args(args) -> ExperimentConfig:
    overrides = {key: getattr(args, key, None) for key in (
        "topology", "protocol", "n", "q", "pipeline", "timeout", "loss", "seed",
        "payload_size", "prefix", "max_events")}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        return config_from_file(args.config, overrides)
    return config_from_mapping(overrides)


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    cfg.trace_path = args.trace
    cfg.summary_path = args.summary
    result = run_experiment(cfg)
    ok = verify_decode(result)
    print(f"protocol={cfg.protocol} topology={cfg.topology} seed={cfg.seed} "
          f"end={result.end_time:.3f}")
    for s in result.summaries:
        dt = "-" if s.download_time is None else f"{s.download_time:.3f}"
        print(f"  client {s.client}: download_time={dt} rank={s.rank} "
              f"interests={s.interests_sent} data_rx={s.data_rx} "
              f"innovative={s.data_rx_innovative}")
    net = result.network
    print(f"  network: data_tx={net.total_data_tx} interest_tx={net.total_interest_tx} "
          f"drops={net.drops} decode_ok={ok}")
    return 0 if ok else 1


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    values = [float(v) if args.axis == "loss" else int(v)
              for v in args.values.split(",") if v != ""]
    protocols = args.protocols.split(",") if args.protocols else None
    rows = run_sweep(cfg, args.axis, values, protocols, seeds=args.seeds)
    text = format_sweep_csv(rows)
    if args.out:
        write_text(args.out, text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def _fmt_prob(p: float) -> str:
    if p == 0.0:
        return "0"
    return f"{p:.2e}"


def cmd_tables(args) -> int:
    lines = []
    if args.which in ("1", "both"):
        n, q = args.n or 10, args.q or 256
        lines.append(f"Failure probability, single subset (n={n}, q={q})")
        header = ["subset"] + [f"l={l}" for l in range(1, 6)]
        lines.append("  ".join(f"{h:>10}" for h in header))
        for k, row in enumerate(milic.single_subset_table(n, q), start=1):
            cells = [f"A_{k}"] + [_fmt_prob(v) for v in row]
            lines.append("  ".join(f"{c:>10}" for c in cells))
        lines.append("")
    if args.which in ("2", "both"):
        n = args.n or milic.MULTI_TABLE_N
        lines.append(f"Failure probability, subsets 1..k, l vectors each (n={n})")
        header = ["k", "l", "q=2", "q=256"]
        if args.monte_carlo:
            header += ["mc(q=2)", "stderr"]
        lines.append("  ".join(f"{h:>10}" for h in header))
        rng = np.random.default_rng(args.seed)
        for k, l, by_q in milic.multi_subset_table(n):
            cells = [str(k), str(l), _fmt_prob(by_q[2]), _fmt_prob(by_q[256])]
            if args.monte_carlo:
                est = milic.prob_fail_monte_carlo(
                    milic.RankFailureQuery(l, k, n, 2), args.monte_carlo, rng)
                cells += [_fmt_prob(est.estimate), _fmt_prob(est.stderr)]
            lines.append("  ".join(f"{c:>10}" for c in cells))
    text = "\n".join(lines) + "\n"
    if args.out:
        write_text(args.out, _tables_csv(args))
        print(f"wrote {args.out}")
    sys.stdout.write(text)
    return 0


def _tables_csv(args) -> str:
    rows = ["table,k,l,q,value"]
    if args.which in ("1", "both"):
        n, q = args.n or 10, args.q or 256
        for k, row in enumerate(milic.single_subset_table(n, q), start=1):
            for l, v in enumerate(row, start=1):
                rows.append(f"single,{k},{l},{q},{v!r}")
    if args.which in ("2", "both"):
        n = args.n or milic.MULTI_TABLE_N
        for k, l, by_q in milic.multi_subset_table(n):
            for q, v in by_q.items():
                rows.append(f"multi,{k},{l},{q},{v!r}")
    return "\n".join(rows) + "\n"


def cmd_topo_check(args) -> int:
    graph = resolve_topology(args.topology)
    print(f"{len(graph.nodes)} nodes, {len(graph.edges)} links")
    fib = compute_fib(graph)
    for name, role in graph.nodes.items():
        print(f"  {name} ({role}): fib -> {', '.join(fib[name]) or '(empty)'}")
    n = args.n or 100
    for client in graph.clients():
        bound = download_bound(graph, client, n)
        print(f"  max-flow to {client}: {bound.max_flow} "
              f"(download >= {bound.transfer_time:.1f} + {bound.round_trip_offset:.2f} offset "
              f"for n={n})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="micnsim",
        description="Simulator for coded named-data networking with "
                    "leading-index interest subsets.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment")
    _add_config_flags(p_run)
    p_run.add_argument("--trace", help="trace CSV output path")
    p_run.add_argument("--summary", help="summary CSV output path")
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="sweep pipeline size or loss rate")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--axis", choices=("pipeline", "loss"), required=True)
    p_sweep.add_argument("--values", required=True, help="comma-separated axis values")
    p_sweep.add_argument("--protocols", help="comma-separated protocol list")
    p_sweep.add_argument("--seeds", type=int, default=1)
    p_sweep.add_argument("--out", help="CSV output path")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_tab = sub.add_parser("tables", help="print the rank-failure probability tables")
    p_tab.add_argument("--which", choices=("1", "2", "both"), default="both")
    p_tab.add_argument("--n", type=int)
    p_tab.add_argument("--q", type=int)
    p_tab.add_argument("--monte-carlo", type=int, dest="monte_carlo", metavar="TRIALS",
                       help="append a Monte Carlo column for the q=2 rows")
    p_tab.add_argument("--seed", type=int, default=0)
    p_tab.add_argument("--out", help="CSV output path")
    p_tab.set_defaults(fn=cmd_tables)

    p_topo = sub.add_parser("topo-check", help="print FIBs and max-flow bounds")
    p_topo.add_argument("--topology", required=True)
    p_topo.add_argument("--n", type=int)
    p_topo.set_defaults(fn=cmd_topo_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, TopologyError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except RunawayError as exc:
        print(f"runaway: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
