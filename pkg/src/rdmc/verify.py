"""Discrete evaluation of the a-priori estimates and solution-concept inequalities.

Space-time integrals are accumulated by *probes* attached to a solver run.  A
probe's ``increment`` returns the contribution of one step: the integrand at
the step start, summed over cells (times the cell volume), times ``dt``.  When
a trajectory kept its full step history, integrals for probes that were not
attached can be replayed from it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .core import (
    FieldState,
    GridSpec,
    Majorant,
    ReactionSystem,
    RenormalizationSpec,
    TestFunctionSpec,
    Trajectory,
)
from .reactions import regularized_reaction

TOL_MASS = 1e-8
C_TOL = 5.0
ROUNDOFF = 1e-12


class QuadratureError(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------


@dataclass
class EstimateRecord:
    estimate_id: str
    i: Optional[int]
    T: float
    value: float
    bound: Optional[float]
    passed: bool
    detail: str = ""

    @property
    def margin(self) -> Optional[float]:
        return None if self.bound is None else self.bound - self.value

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_row(self, params_hash: str = "") -> dict:
        def fmt(x):
            return "" if x is None else repr(float(x))

        return {
            "estimate_id": self.estimate_id,
            "i": "" if self.i is None else str(self.i + 1),
            "T": fmt(self.T),
            "value": fmt(self.value),
            "bound": fmt(self.bound),
            "margin": fmt(self.margin),
            "verdict": self.verdict,
            "params_hash": params_hash,
        }


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------


def adaptive_simpson(f, a: float, b: float, rtol: float = 1e-9,
                     max_depth: int = 60, max_evals: int = 2_000_000) -> float:
    """Adaptive composite Simpson rule with Richardson correction.

    The local tolerance is ``rtol`` times the magnitude of a coarse estimate
    of the whole integral (absolute floor 1e-300).
    """
    if b == a:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, rtol, max_depth, max_evals)
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) / 6.0 * (fa + 4 * fm + fb)
    # coarse magnitude from a 33-point composite rule, robust to cancellation
    xs = np.linspace(a, b, 33)
    ys = np.array([f(x) for x in xs])
    scale = abs((b - a) / 96.0 * (ys[0] + ys[-1] + 4 * ys[1:-1:2].sum()
                                  + 2 * ys[2:-1:2].sum()))
    tol = max(rtol * max(scale, abs(whole)), 1e-300)
    evals = 36
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        evals += 2
        left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15 * eps or (hi - lo) < 1e-15 * max(1.0, abs(hi)):
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth or evals > max_evals:
            raise QuadratureError(f"adaptive Simpson did not converge on [{lo}, {hi}]")
        stack.append((lo, mid, flo, flm, fmid, left, eps / 2, depth + 1))
        stack.append((mid, hi, fmid, frm, fhi, right, eps / 2, depth + 1))
    if not math.isfinite(total):
        raise QuadratureError("non-finite quadrature result")
    return total


# --------------------------------------------------------------------------
# renormalization functions and transformed fluxes
# --------------------------------------------------------------------------


class Renormalizer:
    """Closed-form rho, rho', rho'' for rho(s) = M/(k+1) (1 - s/M)_+^(k+1)."""

    def __init__(self, spec: RenormalizationSpec):
        self.spec = spec
        self.M = float(spec.M)
        self.k = spec.k

    def _x(self, s):
        return np.clip(1.0 - np.asarray(s, dtype=float) / self.M, 0.0, None)

    def rho(self, s):
        if self.M == 0:
            return np.zeros_like(np.asarray(s, dtype=float))
        return self.M / (self.k + 1) * self._x(s) ** (self.k + 1)

    def d1(self, s):
        if self.M == 0:
            return np.zeros_like(np.asarray(s, dtype=float))
        return -self._x(s) ** self.k

    def d2(self, s):
        if self.M == 0:
            return np.zeros_like(np.asarray(s, dtype=float))
        return (self.k / self.M) * self._x(s) ** (self.k - 1)

    # scalar versions for quadrature
    def d1_scalar(self, s: float) -> float:
        if self.M == 0 or s >= self.M:
            return 0.0
        return -((1.0 - s / self.M) ** self.k)

    def d2_scalar(self, s: float) -> float:
        if self.M == 0 or s >= self.M:
            return 0.0
        return (self.k / self.M) * (1.0 - s / self.M) ** (self.k - 1)

    def __repr__(self):
        return f"Renormalizer(M={self.M:g}, k={self.k})"


def build_rho(spec: RenormalizationSpec) -> Renormalizer:
    return Renormalizer(spec)


def _as_renormalizer(rho) -> Renormalizer:
    return rho if isinstance(rho, Renormalizer) else Renormalizer(rho)


def _p_integrand(rho: Renormalizer, m: float, eps: float, which: int):
    """Integrand and coordinate map for P^(1) (which=1) or P^(2) (which=2).

    For m >= 1 the coordinate is sigma itself. For m < 1 the weight
    (sigma + eps)^(m-1) blows up near zero when eps is small, so the integral is
    taken in tau = (sigma + eps)^a, which absorbs the weight exactly.
    Returns (integrand, to_coord) with P(s) = int_{to_coord(0)}^{to_coord(s)} integrand.
    """
    shape = (lambda x: math.sqrt(rho.d2_scalar(x))) if which == 1 else rho.d1_scalar
    if m >= 1:
        e = (m - 1.0) / 2.0 if which == 1 else m - 1.0
        return (lambda x: (x + eps) ** e * shape(x)), (lambda s: s)
    a = (m + 1.0) / 2.0 if which == 1 else m
    inv = 1.0 / a
    return (lambda tau: inv * shape(max(tau**inv - eps, 0.0))), (lambda s: (s + eps) ** a)


def _compute_P(which, rho, m, eps, s, rtol):
    rho = _as_renormalizer(rho)
    if s < 0 or eps < 0:
        raise ValueError("s and eps must be >= 0")
    top = min(s, rho.M)
    if top <= 0:
        return 0.0
    f, coord = _p_integrand(rho, m, eps, which)
    return adaptive_simpson(f, coord(0.0), coord(top), rtol)


def compute_P1(rho, m: float, eps: float, s: float, rtol: float = 1e-9) -> float:
    """int_0^s (sigma + eps)^((m-1)/2) sqrt(rho''(sigma)) dsigma."""
    return _compute_P(1, rho, m, eps, s, rtol)


def compute_P2(rho, m: float, eps: float, s: float, rtol: float = 1e-9) -> float:
    """int_0^s (sigma + eps)^(m-1) rho'(sigma) dsigma."""
    return _compute_P(2, rho, m, eps, s, rtol)


class TabulatedP:
    """Vectorized P^(1) or P^(2) via cubic Hermite interpolation on [0, M].

    Node values come from per-interval adaptive Simpson, node slopes are the
    exact integrands; beyond M the functions are constant. For m < 1 the nodes
    live in the same transformed coordinate that :func:`compute_P2` uses.
    """

    def __init__(self, rho, m: float, eps: float, which: int, nodes: int = 2048):
        self.rho = _as_renormalizer(rho)
        self.m, self.eps, self.which = float(m), float(eps), which
        M = self.rho.M
        if M == 0:
            self._spline, self._cap = None, 0.0
            return
        integrand, self._coord = _p_integrand(self.rho, self.m, self.eps, which)
        x = np.linspace(self._coord(0.0), self._coord(M), nodes + 1)
        pieces = [adaptive_simpson(integrand, x[j], x[j + 1], rtol=1e-11)
                  for j in range(nodes)]
        y = np.concatenate([[0.0], np.cumsum(pieces)])
        dy = np.array([integrand(v) for v in x])
        self._spline = CubicHermiteSpline(x, y, dy)
        self._cap = float(y[-1])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        M = self.rho.M
        if M == 0:
            return np.zeros_like(s)
        if self.m >= 1:
            coord = np.minimum(s, M)
        else:
            a = (self.m + 1.0) / 2.0 if self.which == 1 else self.m
            coord = (np.minimum(s, M) + self.eps) ** a
        return np.where(s >= M, self._cap, self._spline(coord))


@lru_cache(maxsize=256)
def tabulated_P(spec: RenormalizationSpec, m: float, eps: float, which: int) -> TabulatedP:
    return TabulatedP(spec, m, eps, which)


_recent_P: dict = {}


def _P_on_field(spec: RenormalizationSpec, m: float, eps: float, which: int,
                u_all: np.ndarray, i: int) -> np.ndarray:
    """P evaluated on species ``i`` of a state, reused while that state is being probed."""
    key = (spec, m, eps, which, i)
    hit = _recent_P.get(key)
    if hit is not None and hit[0] is u_all:
        return hit[1]
    vals = tabulated_P(spec, m, eps, which)(u_all[i])
    if len(_recent_P) > 64:
        _recent_P.clear()
    _recent_P[key] = (u_all, vals)
    return vals


# --------------------------------------------------------------------------
# growth functional
# --------------------------------------------------------------------------


def Phi(phi: Majorant, s) -> np.ndarray:
    """-int_1^(s+1) dsigma / phi(sigma), elementwise."""
    s = np.asarray(s, dtype=float)
    if phi.kind == "power1p":
        c, r = phi.coef, phi.exponent
        if r == 1.0:
            return -(np.log(2.0 + s) - math.log(2.0)) / c
        return -(2.0 ** (1.0 - r) - (2.0 + s) ** (1.0 - r)) / (c * (r - 1.0))
    flat = s.ravel()
    out = np.empty_like(flat)
    cache = {}
    for n, v in enumerate(flat):
        if v not in cache:
            cache[v] = -adaptive_simpson(lambda x: 1.0 / float(phi(x)), 1.0, v + 1.0, 1e-10)
        out[n] = cache[v]
    return out.reshape(s.shape)


def phi_functional(i: int, phi: Majorant, state: FieldState, grid: GridSpec):
    """Return (int Phi_i(u_i), bounds_ok) with bounds 0 >= Phi_i(u) >= -u / phi_i(1)."""
    u = state.u[i]
    vals = Phi(phi, u)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("non-finite growth functional")
    c1 = 1.0 / float(phi(1.0))
    slack = 1e-12 * (1.0 + np.abs(vals))
    ok = bool(np.all(vals <= slack) and np.all(vals >= -c1 * u - slack))
    return float(vals.sum() * grid.cell_volume), ok


# --------------------------------------------------------------------------
# probes
# --------------------------------------------------------------------------


def _faces(u, grid: GridSpec):
    """Yield (axis, left values, right values, h) over interior faces."""
    for ax in range(grid.dim):
        axis = u.ndim - grid.dim + ax
        n = u.shape[axis]
        lo = np.take(u, np.arange(n - 1), axis=axis)
        hi = np.take(u, np.arange(1, n), axis=axis)
        yield ax, lo, hi, grid.h[ax]


def weighted_mass(state: FieldState, a: Sequence[float], grid: GridSpec) -> float:
    """sum_i a_i int u_i."""
    a = np.asarray(a, dtype=float)
    totals = state.u.reshape(state.N, -1).sum(axis=1)
    return float(a @ totals) * grid.cell_volume


class Probe:
    key: tuple

    def zero(self):
        return 0.0

    def density(self, state: FieldState, fhat, grid: GridSpec, system: ReactionSystem):
        raise NotImplementedError

    def increment(self, state, fhat, dt, grid, system):
        return dt * self.density(state, fhat, grid, system)


class LpProbe(Probe):
    def __init__(self, i: int, p: float):
        if p < 1:
            raise ValueError("p must be >= 1")
        self.i, self.p = i, float(p)
        self.key = ("lp", i, self.p)

    def density(self, state, fhat, grid, system):
        return float(np.sum(state.u[self.i] ** self.p)) * grid.cell_volume


class TruncDirichletProbe(Probe):
    """chi(u <= M) (u + eps)^(m-1) |grad u|^2 on interior faces.

    The indicator uses the larger adjacent cell value and the weight the
    arithmetic face mean.
    """

    def __init__(self, i: int, M: float):
        if M <= 0:
            raise ValueError("M must be positive")
        self.i, self.M = i, float(M)
        self.key = ("trunc_dirichlet", i, self.M)

    def density(self, state, fhat, grid, system):
        u = state.u[self.i]
        m = system.species[self.i].m
        total = 0.0
        for _, lo, hi, h in _faces(u, grid):
            mask = np.maximum(lo, hi) <= self.M
            weight = (0.5 * (lo + hi) + state.eps) ** (m - 1.0)
            total += float(np.sum(np.where(mask, weight * ((hi - lo) / h) ** 2, 0.0)))
        return total * grid.cell_volume


class TruncReactionProbe(Probe):
    def __init__(self, i: int, M: float):
        if M <= 0:
            raise ValueError("M must be positive")
        self.i, self.M = i, float(M)
        self.key = ("trunc_reaction", i, self.M)

    def density(self, state, fhat, grid, system):
        u = state.u[self.i]
        return float(np.sum(np.where(u <= self.M, np.abs(fhat[self.i]), 0.0))) * grid.cell_volume


class ReactionMassProbe(Probe):
    """[int sum_i a_i fhat_i, int sum_i |a_i fhat_i|]."""

    def __init__(self, a: Sequence[float]):
        self.a = tuple(float(x) for x in a)
        self.key = ("reaction_mass", self.a)

    def zero(self):
        return np.zeros(2)

    def density(self, state, fhat, grid, system):
        w = np.asarray(self.a).reshape((-1,) + (1,) * grid.dim) * fhat
        return np.array([w.sum(), np.abs(w).sum()]) * grid.cell_volume


class RenormProbe(Probe):
    """Space-time pieces of the renormalized inequality for one species and rho.

    For each test function in ``phi_specs`` accumulates the row
    [int rho(u) phi_t, int phi |grad P1(u)|^2, int P2(u) Lap phi,
    int rho'(u) fhat phi], so the value has shape (len(phi_specs), 4).
    The phi_t piece integrates phi_t exactly over each step with rho(u) taken
    at the step end (see ``settle``); summed by parts, this pairs every
    increment of rho(u) with phi at the step start, the same time level at
    which the right-hand side is sampled.
    """

    def __init__(self, i: int, rho_spec: RenormalizationSpec, phi_specs):
        if isinstance(phi_specs, TestFunctionSpec):
            phi_specs = (phi_specs,)
        self.i = i
        self.rho_spec, self.phi_specs = rho_spec, tuple(phi_specs)
        self.rho = Renormalizer(rho_spec)
        self.key = ("renorm", i, rho_spec, self.phi_specs)
        self._geom = None

    def zero(self):
        return np.zeros((len(self.phi_specs), 4))

    def index(self, phi_spec: TestFunctionSpec) -> int:
        return self.phi_specs.index(phi_spec)

    def _geometry(self, grid: GridSpec):
        """Stacked phi, Lap phi at centers and phi on interior faces of each axis."""
        if self._geom is None or self._geom[0] != grid:
            centers = grid.centers()
            ones = np.ones(grid.shape)
            X = np.stack([ps.spatial(centers, grid.lengths) * ones for ps in self.phi_specs])
            LX = np.stack([ps.spatial_laplacian(centers, grid.lengths) * ones
                           for ps in self.phi_specs])
            faces = []
            for ax in range(grid.dim):
                coords = [grid.axis_centers(b) if b != ax
                          else np.arange(1, grid.cells[b]) * grid.h[b] for b in range(grid.dim)]
                mesh = np.meshgrid(*coords, indexing="ij")
                faces.append(np.stack([ps.spatial(mesh, grid.lengths) * np.ones(mesh[0].shape)
                                       for ps in self.phi_specs]))
            self._geom = (grid, X, LX, faces)
        return self._geom[1:]

    def _flat_dot(self, stacked, field):
        return stacked.reshape(len(self.phi_specs), -1) @ np.ravel(field)

    def increment(self, state, fhat, dt, grid, system):
        X, LX, Xf = self._geometry(grid)
        out = np.zeros((len(self.phi_specs), 4))
        psi0 = np.array([ps.psi(state.t) for ps in self.phi_specs])
        if not psi0.any() or self.rho.M == 0:
            return out
        u = state.u[self.i]
        m = system.species[self.i].m
        P1 = _P_on_field(self.rho_spec, m, state.eps, 1, state.u, self.i)
        P2 = _P_on_field(self.rho_spec, m, state.eps, 2, state.u, self.i)
        g = 0.0
        for ax, lo, hi, h in _faces(P1, grid):
            g = g + self._flat_dot(Xf[ax], ((hi - lo) / h) ** 2)
        w = dt * psi0 * grid.cell_volume
        out[:, 1] = w * g
        out[:, 2] = w * self._flat_dot(LX, P2)
        out[:, 3] = w * self._flat_dot(X, self.rho.d1(u) * fhat[self.i])
        return out

    def settle(self, new_state, dt, grid, system):
        X, _, _ = self._geometry(grid)
        t = new_state.t
        dpsi = np.array([ps.psi(t) - ps.psi(t - dt) for ps in self.phi_specs])
        out = np.zeros((len(self.phi_specs), 4))
        if dpsi.any():
            rho_u = self.rho.rho(new_state.u[self.i])
            out[:, 0] = dpsi * self._flat_dot(X, rho_u) * grid.cell_volume
        return out


def _replay(traj: Trajectory, probe: Probe) -> np.ndarray:
    """Cumulative probe values at each snapshot, recomputed from the step history."""
    if traj.history is None:
        raise KeyError(f"probe {probe.key!r} was not attached and the run kept no history")
    snap_times = {s.t for s in traj.snapshots}
    acc = np.zeros_like(np.asarray(probe.zero(), dtype=float))
    out = [acc.copy()]
    for n, (st, dt) in enumerate(zip(traj.history[:-1], traj.dts)):
        fhat = regularized_reaction(traj.system, st.u, st.eps)
        acc = acc + probe.increment(st, fhat, dt, traj.grid, traj.system)
        if hasattr(probe, "settle"):
            acc = acc + probe.settle(traj.history[n + 1], dt, traj.grid, traj.system)
        if traj.history[n + 1].t in snap_times:
            out.append(acc.copy())
    return np.array(out)


def integral_series(traj: Trajectory, probe: Probe) -> np.ndarray:
    if probe.key in traj.integrals:
        return np.asarray(traj.integrals[probe.key])
    return _replay(traj, probe)


def renorm_series(traj: Trajectory, i: int, rho_spec: RenormalizationSpec,
                  phi_spec: TestFunctionSpec) -> np.ndarray:
    """Cumulative [A, G, B, R] at each snapshot for one test function."""
    for key, pr in traj.probes.items():
        if (isinstance(pr, RenormProbe) and pr.i == i and pr.rho_spec == rho_spec
                and phi_spec in pr.phi_specs):
            return np.asarray(traj.integrals[key])[:, pr.index(phi_spec)]
    return _replay(traj, RenormProbe(i, rho_spec, phi_spec))[:, 0]


# --------------------------------------------------------------------------
# estimates
# --------------------------------------------------------------------------


def check_mass_bound(traj: Trajectory, a=None, K: Optional[float] = None,
                     tol: float = TOL_MASS) -> EstimateRecord:
    """Weighted mass stays below (mass(0) + |Omega|) e^(K t) at every snapshot."""
    a = traj.system.a if a is None else a
    K = traj.system.K if K is None else K
    if K < 0:
        raise ValueError("K must be >= 0")
    m0 = weighted_mass(traj.snapshots[0], a, traj.grid)
    worst = None
    for st in traj.snapshots:
        value = weighted_mass(st, a, traj.grid)
        bound = (m0 + traj.grid.volume) * math.exp(K * st.t)
        ratio = value / (bound * (1 + tol))
        if worst is None or ratio > worst[0]:
            worst = (ratio, value, bound, st.t)
    _, value, bound, t = worst
    return EstimateRecord("mass_bound", None, traj.T, value, bound,
                          value <= bound * (1 + tol), detail=f"worst at t={t:.6g}")


def spacetime_lp(traj: Trajectory, i: int, p: float) -> float:
    return float(integral_series(traj, LpProbe(i, p))[-1])


def truncated_dirichlet(traj: Trajectory, i: int, M: float) -> float:
    return float(integral_series(traj, TruncDirichletProbe(i, M))[-1])


def truncated_reaction(traj: Trajectory, i: int, M: float) -> float:
    return float(integral_series(traj, TruncReactionProbe(i, M))[-1])


@dataclass
class RenormTerms:
    rho_phi_t: float
    rho_initial: float
    gradient: float
    flux: float
    reaction: float
    dm: float

    @property
    def lhs(self) -> float:
        return -self.rho_phi_t - self.rho_initial

    @property
    def rhs(self) -> float:
        return -self.dm * self.gradient + self.dm * self.flux + self.reaction

    @property
    def residual(self) -> float:
        return self.lhs - self.rhs

    @property
    def rhs_scale(self) -> float:
        return abs(self.dm * self.gradient) + abs(self.dm * self.flux) + abs(self.reaction)

    @property
    def total_scale(self) -> float:
        return self.rhs_scale + abs(self.rho_phi_t) + abs(self.rho_initial)


def renorm_terms(traj: Trajectory, i: int, rho_spec: RenormalizationSpec,
                 phi_spec: TestFunctionSpec) -> RenormTerms:
    if phi_spec.T_supp > traj.T * (1 + 1e-12):
        raise ValueError(f"test function support [0, {phi_spec.T_supp:g}] exceeds"
                         f" trajectory horizon {traj.T:g}")
    A, G, B, R = renorm_series(traj, i, rho_spec, phi_spec)[-1]
    probe = RenormProbe(i, rho_spec, phi_spec)
    X = probe._geometry(traj.grid)[0][0]
    u0 = traj.snapshots[0].u[i]
    init = float(np.sum(probe.rho.rho(u0) * X)) * phi_spec.psi(0.0) * traj.grid.cell_volume
    sp = traj.system.species[i]
    return RenormTerms(float(A), init, float(G), float(B), float(R), sp.d * sp.m)


def renorm_tolerance(traj: Trajectory, terms: RenormTerms, c_tol: float = C_TOL) -> float:
    h2 = max(h * h for h in traj.grid.h)
    return c_tol * (h2 + traj.dt_max) * terms.rhs_scale + ROUNDOFF * terms.total_scale


def renorm_residual(traj: Trajectory, i: int, rho_spec: RenormalizationSpec,
                    phi_spec: TestFunctionSpec, c_tol: float = C_TOL) -> EstimateRecord:
    """LHS - RHS of the renormalized supersolution inequality; passes if <= tolerance."""
    terms = renorm_terms(traj, i, rho_spec, phi_spec)
    tol = renorm_tolerance(traj, terms, c_tol)
    r = terms.residual
    tag = (f"renorm[M={rho_spec.M:g},k={rho_spec.k};"
           f"modes={','.join(map(str, phi_spec.modes))},T={phi_spec.T_supp:g}]")
    return EstimateRecord(tag, i, traj.T, r, tol, r <= tol,
                          detail=f"lhs={terms.lhs:.6g} rhs={terms.rhs:.6g}")


def mass_subsolution_series(traj: Trajectory, a=None):
    """(times, residual(t), tolerance) for mass(t) - mass(0) - int_0^t sum a_i fhat_i."""
    a = traj.system.a if a is None else tuple(a)
    series = integral_series(traj, ReactionMassProbe(a))
    masses = np.array([weighted_mass(s, a, traj.grid) for s in traj.snapshots])
    resid = masses - masses[0] - series[:, 0]
    scale = float(series[-1, 1])
    tol = 10.0 * traj.dt_max * scale + ROUNDOFF * (abs(masses[0]) + scale + traj.grid.volume)
    return traj.times, resid, tol


def mass_subsolution_residual(traj: Trajectory, a=None) -> EstimateRecord:
    _, resid, tol = mass_subsolution_series(traj, a)
    worst = float(resid.max())
    return EstimateRecord("mass_subsolution", None, traj.T, worst, tol, worst <= tol)


def standard_probes(system: ReactionSystem, rho_specs=(), phi_specs=(),
                    truncation_levels=()) -> list:
    """Probe set covering every estimate the verification suite evaluates."""
    probes = [ReactionMassProbe(system.a)]
    for i, sp in enumerate(system.species):
        probes.append(LpProbe(i, sp.m + 1.0))
        for M in truncation_levels:
            probes.append(TruncDirichletProbe(i, M))
            probes.append(TruncReactionProbe(i, M))
        if phi_specs:
            for rs in rho_specs:
                probes.append(RenormProbe(i, rs, tuple(phi_specs)))
    return probes
