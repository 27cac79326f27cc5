"""Command-line entry points: ``rdmc check|run|verify|sweep <config>``.

Exit codes: 0 everything passed, 1 a condition, estimate or run failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io
from .config import RunConfig, load_raw, parse_config, parse_species_family
from .core import ConfigError
from .reactions import (
    SampleSet,
    check_cross_absorption,
    check_mass_control,
    check_quasipositivity,
    validate_family,
)
from .solver import SolverAbort, run
from .sweep import epsilon_sweep
from .verify import (
    EstimateRecord,
    check_mass_bound,
    mass_subsolution_residual,
    phi_functional,
    renorm_residual,
    spacetime_lp,
    standard_probes,
    truncated_dirichlet,
    truncated_reaction,
)

log = logging.getLogger("rdmc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DIAGNOSTICS = "diagnostics.csv"
CONDITIONS = "conditions.csv"
SWEEP_TABLE = "sweep.csv"


class UsageError(Exception):
    pass


def _load(path, seed) -> dict:
    raw = load_raw(path)
    if not isinstance(raw, dict) or not raw:
        raise ConfigError(f"config {path} is empty")
    if seed is not None:
        raw["seed"] = int(seed)
    return raw


def _parse(raw: dict) -> RunConfig:
    try:
        return parse_config(raw)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed config: {exc!r}") from None


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".rdmc_write_test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {out} is not writable: {exc.strerror}") from None
    return out


def _emit(records, params_hash):
    for rec in records:
        who = "" if rec.i is None else f" species {rec.i + 1}"
        bound = "" if rec.bound is None else f" bound={rec.bound:.6g}"
        print(f"[{rec.verdict.upper()}] {rec.estimate_id}{who}: value={rec.value:.6g}{bound}")
    return [r.to_row(params_hash) for r in records]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_check(args) -> int:
    raw = _load(args.config, args.seed)
    try:
        species, family = parse_species_family(raw)
        a = raw.get("a") or [1.0] * len(species)
        m = [sp.m for sp in species]
        verdict = validate_family(family, m, a)
        samples = SampleSet(seed=int(raw.get("seed", 0)), **raw.get("samples", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"malformed config: {exc!r}") from None

    print(f"[{'PASS' if verdict.accept else 'FAIL'}] family admissibility ({type(family).__name__})")
    for reason in verdict.reasons:
        print(f"    {reason}")
    reports = [check_quasipositivity(family, samples),
               check_mass_control(family, a, samples, raw.get("K"))]
    if verdict.accept:
        cfg = _parse(raw)
        reports.append(check_cross_absorption(cfg.system, samples))
    else:
        print("    cross-absorption growth check skipped: growth data require an admissible family")
    default_growth = verdict.accept and "growth" not in raw
    for rep in reports:
        print(rep.to_text())
    if default_growth:
        print("    growth exponents and majorants are built-in defaults (config has no 'growth')")
    if args.out:
        out = _out_dir(args.out)
        rows = [{"condition": "family admissibility",
                 "verdict": "pass" if verdict.accept else "fail",
                 "worst_sample": "", "worst_value": "", "estimated_K": ""}]
        rows += [r.to_row() for r in reports]
        if default_growth:
            rows[-1]["condition"] += " (default growth)"
        io.write_csv(out / CONDITIONS, io.CONDITION_COLUMNS, rows)
    ok = verdict.accept and all(r.passed for r in reports)
    return EXIT_OK if ok else EXIT_FAIL


def _simulate(cfg: RunConfig, probes=()):
    return run(cfg.system, cfg.grid, cfg.init, cfg.eps, cfg.T_end,
               snapshot_every=cfg.snapshot_every, probes=probes,
               safety=cfg.safety, dt_max=cfg.dt_max)


def cmd_run(args) -> int:
    cfg = _parse(_load(args.config, args.seed))
    out = _out_dir(args.out or ".")
    probes = standard_probes(cfg.system)
    status = EXIT_OK
    try:
        traj = _simulate(cfg, probes)
    except SolverAbort as exc:
        print(f"[FAIL] solver aborted: {exc}")
        traj = exc.trajectory
        status = EXIT_FAIL
    io.write_trajectory(out, traj.snapshots, csv_mirror=args.csv)
    records = [check_mass_bound(traj, K=cfg.system.K, tol=cfg.tol_mass)]
    if status == EXIT_OK:
        for i, sp in enumerate(cfg.system.species):
            lp = spacetime_lp(traj, i, sp.m + 1.0)
            records.append(EstimateRecord(f"spacetime_lp[p={sp.m + 1:g}]", i, traj.T, lp, None, True))
    if not records[0].passed:
        status = EXIT_FAIL
    io.write_csv(out / DIAGNOSTICS, io.ESTIMATE_COLUMNS, _emit(records, cfg.params_hash))
    (out / "run.json").write_text(json.dumps(
        {"config": cfg.raw, "params_hash": cfg.params_hash, "steps": traj.n_steps,
         "snapshots": len(traj.snapshots), "T": traj.T, "aborted": traj.aborted},
        indent=2, sort_keys=True) + "\n")
    print(f"{len(traj.snapshots)} snapshots, {traj.n_steps} steps written to {out}")
    return status


def verification_records(cfg: RunConfig, traj) -> list:
    """Every estimate the harness evaluates on a finished trajectory."""
    system = cfg.system
    records = [check_mass_bound(traj, K=system.K, tol=cfg.tol_mass),
               mass_subsolution_residual(traj)]
    for i, sp in enumerate(system.species):
        lp = spacetime_lp(traj, i, sp.m + 1.0)
        records.append(EstimateRecord(f"spacetime_lp[p={sp.m + 1:g}]", i, traj.T, lp, None, True))
        for M in cfg.truncation_levels:
            records.append(EstimateRecord(f"truncated_dirichlet[M={M:g}]", i, traj.T,
                                          truncated_dirichlet(traj, i, M), None, True))
            records.append(EstimateRecord(f"truncated_reaction[M={M:g}]", i, traj.T,
                                          truncated_reaction(traj, i, M), None, True))
        value, ok = phi_functional(i, system.growth[i].phi, traj.final, traj.grid)
        records.append(EstimateRecord("phi_functional", i, traj.T, value, None, ok,
                                      detail="cellwise 0 >= Phi(u) >= -u/phi(1)"))
        for rs in cfg.rho_specs:
            for ps in cfg.phi_specs:
                if ps.T_supp <= traj.T * (1 + 1e-12):
                    records.append(renorm_residual(traj, i, rs, ps, cfg.c_tol))
    return records


def cmd_verify(args) -> int:
    cfg = _parse(_load(args.config, args.seed))
    traj_dir = Path(args.out or ".")
    try:
        stored = io.read_trajectory(traj_dir)
    except (FileNotFoundError, io.SnapshotError) as exc:
        raise UsageError(str(exc)) from None
    probes = standard_probes(cfg.system, cfg.rho_specs, cfg.phi_specs, cfg.truncation_levels)
    try:
        traj = _simulate(cfg, probes)
    except SolverAbort as exc:
        print(f"[FAIL] solver aborted on rerun: {exc}")
        return EXIT_FAIL
    same = len(stored) == len(traj.snapshots) and all(
        a.t == b.t and a.eps == b.eps and np.array_equal(a.u, b.u)
        for a, b in zip(stored, traj.snapshots))
    if not same:
        print("[FAIL] stored snapshots do not match a rerun of this config")
        return EXIT_FAIL
    records = verification_records(cfg, traj)
    rows = _emit(records, cfg.params_hash)
    io.write_csv(_out_dir(traj_dir) / DIAGNOSTICS, io.ESTIMATE_COLUMNS, rows, append=True)
    failed = [r for r in records if not r.passed]
    print(f"{len(records) - len(failed)}/{len(records)} checks passed")
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _parse(_load(args.config, args.seed))
    if cfg.sweep is None:
        raise ConfigError("sweep needs an eps_list in the config")
    out = _out_dir(args.out or ".")
    result = epsilon_sweep(cfg, threads=args.threads)
    io.write_csv(out / SWEEP_TABLE, io.SWEEP_COLUMNS, [r.to_row() for r in result.rows])
    for r in result.rows:
        d = "" if r.D_to_previous is None else f" D={r.D_to_previous:.6g}"
        print(f"eps={r.eps:g} species {r.species + 1}: lp={r.lp_norm:.6g}"
              f" mass_margin={r.mass_margin:.6g}{d} [{r.status}]")
    return EXIT_OK if result.ok else EXIT_FAIL


COMMANDS = {"check": cmd_check, "run": cmd_run, "verify": cmd_verify, "sweep": cmd_sweep}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rdmc",
        description="Simulate and verify mass-controlled reaction-diffusion systems.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("config", help="JSON configuration file")
    p.add_argument("--out", default=None,
                   help="output directory (for verify: the trajectory directory)")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads for sweeps (default: $RDMC_THREADS or 1)")
    p.add_argument("--csv", action="store_true", help="also write CSV mirrors of snapshots")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads is None:
        try:
            args.threads = int(os.environ.get("RDMC_THREADS", "1"))
        except ValueError:
            print("error: RDMC_THREADS must be an integer", file=sys.stderr)
            return EXIT_USAGE
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
