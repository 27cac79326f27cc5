"""Epsilon sweeps and grid-refinement studies."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .config import RunConfig
from .core import GridSpec, SweepSpec, Trajectory, kappa, zeta
from .solver import SolverAbort, run
from .verify import (
    check_mass_bound,
    spacetime_lp,
    standard_probes,
    truncated_dirichlet,
    truncated_reaction,
)


@dataclass
class SweepRow:
    eps: float
    species: int
    lp_norm: float = math.nan
    mass_margin: float = math.nan
    D_to_previous: Optional[float] = None
    runtime_seconds: float = 0.0
    status: str = "ok"
    extras: dict = field(default_factory=dict)

    def to_row(self) -> dict:
        def fmt(x):
            return "" if x is None else repr(float(x))

        return {
            "eps": fmt(self.eps),
            "species": str(self.species + 1),
            "lp_norm": fmt(self.lp_norm),
            "mass_margin": fmt(self.mass_margin),
            "D_to_previous": fmt(self.D_to_previous),
            "runtime_seconds": f"{self.runtime_seconds:.3f}",
            "status": self.status,
        }


@dataclass
class SweepResult:
    rows: list
    trajectories: dict
    zeta_cutoff: float
    kappas: tuple
    schedule: list

    @property
    def ok(self) -> bool:
        return all(r.status == "ok" for r in self.rows)

    def column(self, name: str, species: int) -> list:
        return [getattr(r, name) for r in self.rows if r.species == species]

    def D(self, species: int) -> list:
        """D(eps_j, eps_j+1) for consecutive list entries."""
        return self.column("D_to_previous", species)[1:]


def compactness_probe(s, kappa_i: float, cutoff: float):
    """Truncated power s^kappa * zeta(s)."""
    s = np.asarray(s, dtype=float)
    return s**kappa_i * zeta(s, cutoff)


def probe_distance(ta: Trajectory, tb: Trajectory, i: int, kappa_i: float,
                   cutoff: float) -> float:
    """L2(space-time) distance between the compactness probes of two runs.

    Both runs must share the step schedule and have kept their history.
    """
    if ta.history is None or tb.history is None:
        raise ValueError("both trajectories must keep their step history")
    if len(ta.dts) != len(tb.dts) or not np.allclose(ta.dts, tb.dts, rtol=0, atol=0):
        raise ValueError("trajectories do not share a step schedule")
    total = 0.0
    vol = ta.grid.cell_volume
    for sa, sb, dt in zip(ta.history[:-1], tb.history[:-1], ta.dts):
        diff = compactness_probe(sa.u[i], kappa_i, cutoff) - compactness_probe(sb.u[i], kappa_i, cutoff)
        total += dt * float(np.sum(diff * diff)) * vol
    return math.sqrt(total)


def _member(cfg: RunConfig, eps: float, schedule, probes):
    start = time.perf_counter()
    try:
        traj = run(cfg.system, cfg.grid, cfg.init, eps, cfg.T_end,
                   snapshot_every=cfg.snapshot_every, probes=probes,
                   dt_schedule=schedule, keep_history=True)
        err = None
    except SolverAbort as exc:
        traj, err = exc.trajectory, str(exc)
    return traj, err, time.perf_counter() - start


def epsilon_sweep(cfg: RunConfig, spec: Optional[SweepSpec] = None,
                  threads: int = 1) -> SweepResult:
    """Run the solver once per eps on a shared step schedule and tabulate.

    The schedule is the adaptive one of the smallest eps (pilot run).  Each
    member then replays it; members are independent and may run on
    ``threads`` worker threads.  A member that aborts yields rows marked with
    its failure and no distances.
    """
    spec = spec or cfg.sweep
    if spec is None:
        raise ValueError("config has no eps_list")
    system = cfg.system
    pilot = run(system, cfg.grid, cfg.init, spec.eps_list[-1], cfg.T_end,
                snapshot_every=max(1, cfg.snapshot_every), safety=cfg.safety,
                dt_max=cfg.dt_max)
    schedule = list(pilot.dts)

    def job(eps):
        probes = standard_probes(system, truncation_levels=cfg.truncation_levels)
        return _member(cfg, eps, schedule, probes)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, spec.eps_list))
    else:
        results = [job(e) for e in spec.eps_list]

    kappas = spec.kappas(system)
    coarse = results[0][0]
    cutoff = spec.zeta_cutoff
    if cutoff is None:
        peak = max(float(s.u.max()) for s in (coarse.history or coarse.snapshots))
        cutoff = 2.0 * peak if peak > 0 else 1.0

    rows, trajs = [], {}
    prev = None
    for eps, (traj, err, secs) in zip(spec.eps_list, results):
        trajs[eps] = traj
        mass = None if err else check_mass_bound(traj, K=system.K, tol=cfg.tol_mass)
        for i, sp in enumerate(system.species):
            row = SweepRow(eps, i, runtime_seconds=secs)
            if err:
                row.status = f"aborted: {err}"
            else:
                row.lp_norm = spacetime_lp(traj, i, sp.m + 1.0)
                row.mass_margin = mass.margin
                if not mass.passed:
                    row.status = "mass bound violated"
                T = traj.T if traj.T > 0 else 1.0
                for M in cfg.truncation_levels:
                    row.extras[f"trunc_dirichlet[{M:g}]"] = truncated_dirichlet(traj, i, M) / T
                    row.extras[f"trunc_reaction[{M:g}]"] = truncated_reaction(traj, i, M) / T
                if prev is not None and prev[1] is None:
                    row.D_to_previous = probe_distance(prev[0], traj, i, kappas[i], cutoff)
            rows.append(row)
        prev = (traj, err)
    return SweepResult(rows, trajs, cutoff, kappas, schedule)


# --------------------------------------------------------------------------
# grid refinement
# --------------------------------------------------------------------------


def restrict(fine: np.ndarray, factor: int, dim: int) -> np.ndarray:
    """Average blocks of ``factor`` cells along each of the trailing ``dim`` axes."""
    out = fine
    for ax in range(dim):
        axis = out.ndim - dim + ax
        n = out.shape[axis] // factor
        shape = out.shape[:axis] + (n, factor) + out.shape[axis + 1:]
        out = out.reshape(shape).mean(axis=axis + 1)
    return out


def l2_error(a: np.ndarray, b: np.ndarray, grid: GridSpec) -> float:
    return math.sqrt(float(np.sum((a - b) ** 2)) * grid.cell_volume)


@dataclass
class RefinementRow:
    cells: tuple
    h: float
    steps: int
    error: float
    order: Optional[float]


def grid_refinement(cfg: RunConfig, factors: Sequence[int] = (2, 4),
                    exact: Optional[Callable] = None) -> list:
    """Refine the base grid by each factor and measure convergence.

    With ``exact(coords, t) -> array (N, *shape)`` the initial data are its
    point values at t = 0 and each level is compared with it at T_end.
    Otherwise consecutive levels are compared after restricting the finer one
    by cell averaging; the first level then has no error entry.
    """
    factors = sorted(set(int(f) for f in factors))
    if any(f not in (2, 4, 8) for f in factors):
        raise ValueError("refinement factors must be drawn from {2, 4, 8}")
    levels = [1] + factors
    finals, grids, steps = [], [], []
    for f in levels:
        grid = cfg.grid.refined(f)
        init = exact(grid.centers(), 0.0) if exact is not None else cfg.init
        traj = run(cfg.system, grid, init, cfg.eps, cfg.T_end,
                   snapshot_every=10**9, safety=cfg.safety, dt_max=cfg.dt_max)
        finals.append(traj.final.u)
        grids.append(grid)
        steps.append(traj.n_steps)
    errors = []
    for n, (u, grid) in enumerate(zip(finals, grids)):
        if exact is not None:
            errors.append(l2_error(u, exact(grid.centers(), cfg.T_end), grid))
        elif n == 0:
            errors.append(None)
        else:
            ratio = levels[n] // levels[n - 1]
            errors.append(l2_error(restrict(u, ratio, grid.dim), finals[n - 1], grids[n - 1]))
    rows = []
    for n, grid in enumerate(grids):
        order = None
        e0 = errors[n - 1] if n > 0 else None
        e1 = errors[n]
        if e0 is not None and e1 is not None and e0 > 0 and e1 > 0:
            order = math.log(e0 / e1) / math.log(levels[n] / levels[n - 1])
        rows.append(RefinementRow(grid.cells, max(grid.h), steps[n], e1, order))
    return rows


def cosine_heat_exact(mean: float, amplitude: float, d: float, length: float, mode: int = 1):
    """Closed-form Neumann heat solution mean + amplitude cos(k pi x/L) exp(-d (k pi/L)^2 t)."""
    w = mode * math.pi / length

    def exact(coords, t):
        x = coords[0]
        return (mean + amplitude * np.cos(w * x) * math.exp(-d * w * w * t))[None, ...]

    return exact
