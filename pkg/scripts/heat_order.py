"""Spatial convergence order of the solver on the cosine-mode Neumann heat solution.

Usage: python3 scripts/heat_order.py [--cells 16] [--d 0.1] [--T 0.5] [--mode 1]
"""

import argparse

from rdmc.config import parse_config
from rdmc.sweep import cosine_heat_exact, grid_refinement


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cells", type=int, default=16)
    ap.add_argument("--d", type=float, default=0.1)
    ap.add_argument("--T", type=float, default=0.5)
    ap.add_argument("--mode", type=int, default=1)
    args = ap.parse_args()

    raw = {
        "grid": {"dim": 1, "lengths": [1.0], "cells": [args.cells]},
        "species": [{"d": args.d, "m": 1.0}],
        "family": {"type": "reversible", "p": [1], "q": [1], "k1": 1.0, "k2": 1.0},
        "init": [[{"type": "constant", "c": 1.0}]],
        "eps": 0.0,
        "T_end": args.T,
    }
    exact = cosine_heat_exact(1.0, 0.5, args.d, 1.0, args.mode)
    for r in grid_refinement(parse_config(raw), factors=(2, 4, 8), exact=exact):
        order = "" if r.order is None else f"{r.order:.3f}"
        print(f"cells={r.cells[0]:5d} h={r.h:.4e} steps={r.steps:7d} L2 error={r.error:.4e} order={order}")


if __name__ == "__main__":
    main()
