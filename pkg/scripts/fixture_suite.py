"""Run every built-in fixture, then report mass, positivity and renormalized residuals.

Usage: python3 scripts/fixture_suite.py [--T 1.0] [--eps 0.1] [--out results/fixtures.csv]
"""

import argparse
import time
from pathlib import Path

from rdmc import io
from rdmc.fixtures import FIXTURES, RENORM_SUITE, fixture
from rdmc.reactions import check_mass_control
from rdmc.solver import run
from rdmc.verify import (
    check_mass_bound,
    mass_subsolution_residual,
    renorm_residual,
    standard_probes,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--out", default=None, help="optional CSV of all estimate records")
    args = ap.parse_args()

    rows = []
    for name in sorted(FIXTURES):
        cfg = fixture(name, T_end=args.T, eps=args.eps)
        with_renorm = name in RENORM_SUITE
        probes = standard_probes(cfg.system, cfg.rho_specs if with_renorm else (),
                                 cfg.phi_specs if with_renorm else ())
        start = time.perf_counter()
        traj = run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end, snapshot_every=1,
                   probes=probes)
        secs = time.perf_counter() - start
        K = check_mass_control(cfg.system.family, cfg.system.a, cfg.samples).estimated_K
        recs = [check_mass_bound(traj, K=max(K, 0.0)), mass_subsolution_residual(traj)]
        if with_renorm:
            recs += [renorm_residual(traj, i, rs, ps, cfg.c_tol) for i in range(cfg.system.N)
                     for rs in cfg.rho_specs for ps in cfg.phi_specs]
        low = min(float(s.u.min()) for s in traj.snapshots)
        worst = max((r.value / r.bound for r in recs if r.estimate_id.startswith("renorm")),
                    default=float("nan"))
        failed = sum(not r.passed for r in recs)
        print(f"{name:20s} steps={traj.n_steps:5d} {secs:5.1f}s min(u)={low:.3g} K={K:.3g}"
              f" worst renorm ratio={worst:.3f} failed={failed}/{len(recs)}")
        rows += [dict(r.to_row(cfg.params_hash), estimate_id=f"{name}:{r.estimate_id}") for r in recs]
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        io.write_csv(args.out, io.ESTIMATE_COLUMNS, rows)


if __name__ == "__main__":
    main()
