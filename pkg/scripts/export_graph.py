#!/usr/bin/env python3
"""Generate one follow graph and dump it as an edge list for inspection.

    python scripts/export_graph.py --seed 7 --out graph_seed7.txt
"""

import argparse

from misinfosim.domain import RandomSource, SimulationConfig
from misinfosim.netgen import export_edge_list, generate_agents, generate_graph


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--users", type=int, default=200)
    parser.add_argument("--avg-followers", type=float, default=6.0)
    parser.add_argument("--out", default="graph_edges.txt")
    args = parser.parse_args()

    config = SimulationConfig(n_users=args.users, avg_followers=args.avg_followers,
                              rng_seed=args.seed)
    rng = RandomSource(args.seed)
    agents = generate_agents(config, rng.substream(1))
    graph = generate_graph(agents, config, rng.substream(2))
    export_edge_list(graph, args.out)
    print(f"{graph.edge_count} edges written to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
