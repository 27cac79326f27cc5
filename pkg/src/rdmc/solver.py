"""Explicit positivity-preserving stepper for the regularized system on a Neumann grid.

One step is forward Euler applied to

    du_i/dt = d_i Lap_h((u_i + eps)^m_i) + f_i(u) / (1 + eps sum_j |f_j(u)|)

with the time step chosen so that diffusion is monotone and the reaction
cannot remove more than a fixed fraction of what is present in a cell.
"""

from __future__ import annotations

import logging
import math
from typing import Optional, Sequence

import numpy as np

from .core import FieldState, GridSpec, InitialData, ReactionSystem, Trajectory
from .reactions import regularized_reaction

log = logging.getLogger(__name__)

ETA = 0.9
CLAMP_TOL = 1e-14


class StabilityError(RuntimeError):
    """Requested step exceeds the stability/positivity bound."""


class SolverAbort(RuntimeError):
    """Run stopped early; ``trajectory`` holds everything up to the failing step."""

    def __init__(self, message: str, trajectory: Trajectory):
        super().__init__(message)
        self.trajectory = trajectory


def discrete_laplacian_neumann(field, grid: GridSpec) -> np.ndarray:
    """Five-point (three-point in 1D) Laplacian with reflecting ghost cells.

    Works on arrays whose trailing ``grid.dim`` axes are the grid; any leading
    axes (species) are carried along.  Computed in flux form so the cell sum
    telescopes to zero.
    """
    field = np.asarray(field, dtype=float)
    out = np.zeros_like(field)
    for ax in range(grid.dim):
        axis = field.ndim - grid.dim + ax
        h = grid.h[ax]
        flux = np.diff(field, axis=axis) / h
        pad = [(0, 0)] * field.ndim
        pad[axis] = (1, 1)
        flux = np.pad(flux, pad)
        out += np.diff(flux, axis=axis) / h
    return out


def diffusion_rate(u, eps: float, system: ReactionSystem, grid: GridSpec) -> np.ndarray:
    """Per-species bound on the monotonicity rate 2 d_i m_i max(u_i+eps)^(m_i-1) sum 1/h^2."""
    inv_h2 = sum(1.0 / h**2 for h in grid.h)
    rates = np.empty(system.N)
    with np.errstate(divide="ignore"):
        for i, sp in enumerate(system.species):
            slope = np.max((u[i] + eps) ** (sp.m - 1.0))
            rates[i] = 2.0 * sp.d * sp.m * slope * inv_h2
    return rates


def _reaction_rate(u, fhat) -> np.ndarray:
    """Per-species max over cells of (-fhat_i)_+ / u_i."""
    loss = np.maximum(0.0, -fhat)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(loss > 0, loss / u, 0.0)
    return r.reshape(r.shape[0], -1).max(axis=1)


def stable_dt(state: FieldState, system: ReactionSystem, grid: GridSpec,
              safety: float = 0.5, dt_max: float = math.inf, fhat=None) -> float:
    """Largest admissible step for the current state.

    min over species of safety / diffusion_rate, eta / reaction_rate and
    1 / (diffusion_rate + reaction_rate); the last term keeps the combined
    update nonnegative cellwise.
    """
    if not 0 < safety <= 1:
        raise ValueError("safety must lie in (0, 1]")
    u = state.u
    if fhat is None:
        fhat = regularized_reaction(system, u, state.eps)
    rd = diffusion_rate(u, state.eps, system, grid)
    rr = _reaction_rate(u, fhat)
    with np.errstate(divide="ignore"):
        bounds = np.concatenate([safety / rd, ETA / rr, 1.0 / (rd + rr)])
    return float(min(dt_max, bounds.min()))


def _advance(u, fhat, eps, system: ReactionSystem, grid: GridSpec, dt: float):
    m = system.m.reshape((-1,) + (1,) * grid.dim)
    d = system.d.reshape(m.shape)
    w = (u + eps) ** m
    new = u + dt * (d * discrete_laplacian_neumann(w, grid) + fhat)
    lowest = float(new.min())
    if lowest < 0.0:
        if lowest < -CLAMP_TOL:
            raise StabilityError(f"update went negative ({lowest:.3e}) beyond clamp tolerance")
        new = np.maximum(new, 0.0)
    return new, max(0.0, -lowest)


def step(state: FieldState, system: ReactionSystem, grid: GridSpec, dt: float,
         fhat=None) -> FieldState:
    """One forward-Euler step; refuses steps beyond the safety-1 bound."""
    if fhat is None:
        fhat = regularized_reaction(system, state.u, state.eps)
    limit = stable_dt(state, system, grid, safety=1.0, fhat=fhat)
    if not (0 < dt <= limit * (1 + 1e-12)):
        raise StabilityError(f"dt = {dt:.6g} exceeds stability bound {limit:.6g}")
    new, _ = _advance(state.u, fhat, state.eps, system, grid, dt)
    return FieldState(state.t + dt, state.eps, new)


def _initial_field(init, grid: GridSpec, n: int) -> np.ndarray:
    u0 = init.sample(grid) if isinstance(init, InitialData) else np.asarray(init, dtype=float)
    if u0.shape != (n,) + grid.shape:
        raise ValueError(f"initial data has shape {u0.shape}, expected {(n,) + grid.shape}")
    if np.any(u0 < 0) or not np.all(np.isfinite(u0)):
        raise ValueError("initial data must be finite and nonnegative")
    return u0


def run(system: ReactionSystem, grid: GridSpec, init, eps: float, T_end: float,
        snapshot_every: int = 1, probes: Sequence = (), safety: float = 0.5,
        dt_max: float = math.inf, dt_schedule: Optional[Sequence[float]] = None,
        keep_history: bool = False, max_steps: Optional[int] = None) -> Trajectory:
    """Integrate from t = 0 to ``T_end``.

    Each probe contributes a space-time integral: at every step its
    ``increment(state, fhat, dt, grid, system)`` is added to a running total,
    whose value is recorded with each snapshot.  Probes that define
    ``settle(new_state, dt, grid, system)`` also get the end-of-step state.
    ``dt_schedule`` replaces the adaptive step by a prescribed sequence (still
    stability-checked).
    """
    if T_end < 0:
        raise ValueError("T_end must be >= 0")
    if snapshot_every < 1:
        raise ValueError("snapshot_every must be >= 1")
    u = _initial_field(init, grid, system.N)
    state = FieldState(0.0, eps, u)
    traj = Trajectory(system, grid, eps, snapshots=[state])
    keys = []
    acc = []
    for pr in probes:
        traj.probes[pr.key] = pr
        traj.integrals[pr.key] = [np.zeros_like(np.asarray(pr.zero(), dtype=float))]
        keys.append(pr.key)
        acc.append(np.zeros_like(traj.integrals[pr.key][0]))
    if keep_history:
        traj.history = [state]

    def record(st):
        traj.snapshots.append(st)
        for key, a in zip(keys, acc):
            traj.integrals[key].append(a.copy())

    t, n = 0.0, 0
    t_tol = 1e-12 * max(T_end, 1.0)
    while T_end - t > t_tol and (max_steps is None or n < max_steps):
        fhat = regularized_reaction(system, state.u, eps)
        if not np.all(np.isfinite(fhat)):
            traj.aborted = f"non-finite reaction at t = {t:.6g}"
            raise SolverAbort(traj.aborted, traj)
        if dt_schedule is not None:
            if n >= len(dt_schedule):
                break
            dt = float(dt_schedule[n])
            limit = stable_dt(state, system, grid, safety=1.0, fhat=fhat)
            if dt > limit * (1 + 1e-12):
                traj.aborted = (f"scheduled dt = {dt:.6g} exceeds stability bound"
                                f" {limit:.6g} at t = {t:.6g}")
                raise SolverAbort(traj.aborted, traj)
        else:
            dt = stable_dt(state, system, grid, safety=safety, dt_max=dt_max, fhat=fhat)
        last = dt >= T_end - t
        if last:
            dt = T_end - t
        if not (dt > 0 and math.isfinite(dt)):
            traj.aborted = f"time step collapsed (dt = {dt!r}) at t = {t:.6g}"
            raise SolverAbort(traj.aborted, traj)
        for a, pr in zip(acc, probes):
            a += pr.increment(state, fhat, dt, grid, system)
        try:
            new, clamp = _advance(state.u, fhat, eps, system, grid, dt)
        except StabilityError as exc:
            traj.aborted = f"{exc} at t = {t:.6g}"
            raise SolverAbort(traj.aborted, traj) from exc
        if not np.all(np.isfinite(new)):
            traj.aborted = f"non-finite state after step at t = {t:.6g}"
            traj.snapshots.append(FieldState(t + dt, eps, new))
            raise SolverAbort(traj.aborted, traj)
        traj.clamp_max = max(traj.clamp_max, clamp)
        t = T_end if last else t + dt
        n += 1
        traj.dts.append(dt)
        state = FieldState(t, eps, new)
        for a, pr in zip(acc, probes):
            if hasattr(pr, "settle"):
                a += pr.settle(state, dt, grid, system)
        if keep_history:
            traj.history.append(state)
        if n % snapshot_every == 0:
            record(state)
    if traj.snapshots[-1] is not state:
        record(state)
    for key in keys:
        traj.integrals[key] = np.array(traj.integrals[key])
    log.debug("run finished: eps=%g T=%g steps=%d", eps, t, n)
    return traj
