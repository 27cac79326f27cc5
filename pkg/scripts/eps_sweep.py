"""Epsilon sweep on the bundled reversible configuration (or any config with an eps_list).

Usage: python3 scripts/eps_sweep.py [config.json] [--threads 4] [--dt-max X]
"""

import argparse

from rdmc.config import load_config, parse_config
from rdmc.fixtures import bundled_raw
from rdmc.sweep import epsilon_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config", nargs="?", default=None)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--dt-max", type=float, default=None, help="cap the shared step size")
    args = ap.parse_args()

    cfg = load_config(args.config) if args.config else parse_config(bundled_raw("reversible_sweep.json"))
    if args.dt_max is not None:
        cfg = cfg.with_overrides(dt_max=args.dt_max)
    res = epsilon_sweep(cfg, threads=args.threads)
    print(f"{len(res.schedule)} shared steps, max dt {max(res.schedule):.3e},"
          f" zeta cutoff {res.zeta_cutoff:.3g}, kappa {res.kappas}")
    for i in range(cfg.system.N):
        print(f"species {i + 1}")
        for r in (r for r in res.rows if r.species == i):
            d = "" if r.D_to_previous is None else f"{r.D_to_previous:.4e}"
            extras = " ".join(f"{k}={v:.4g}" for k, v in r.extras.items())
            print(f"  eps={r.eps:<6g} lp={r.lp_norm:.5g} D={d:>10s} {extras}")
        lp = res.column("lp_norm", i)
        print(f"  lp max/min {max(lp) / min(lp):.3f}; D decreasing: "
              f"{all(b < a for a, b in zip(res.D(i), res.D(i)[1:]))}")


if __name__ == "__main__":
    main()
