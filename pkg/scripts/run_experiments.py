#!/usr/bin/env python3
"""Run the full experiment batch (5 algorithms x 5 iterations by default).

Thin wrapper over the package CLI so the experiment entry point lives in
scripts/ alongside the analysis tooling. All flags pass through, e.g.:

    python scripts/run_experiments.py --seed 7 --out results/seed7
    python scripts/run_experiments.py --algorithm popularity --steps 100
"""

import sys

from misinfosim.cli import main

if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
