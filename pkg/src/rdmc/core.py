"""Domain types shared across the package.

Everything here is an immutable value type.  Numerical work lives in the
``reactions``, ``solver`` and ``verify`` modules; the only behaviour kept on
these classes is cheap closed-form evaluation (scalar functions, test
functions, initial-data generators) and construction-time validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np


class ConfigError(ValueError):
    """Invalid model parameters or configuration."""


def _tuple(x) -> tuple:
    return tuple(float(v) for v in x)


# --------------------------------------------------------------------------
# scalar function registry (reaction ingredients g and growth majorants phi)
# --------------------------------------------------------------------------

G_KINDS = ("power", "expm1", "slog1p")


@dataclass(frozen=True)
class GFunction:
    """Scalar nonlinearity with g(0) = 0 and g > 0 on (0, inf).

    kinds:
        power:  coef * s**rate
        expm1:  coef * (exp(rate * s) - 1)
        slog1p: coef * s * log(1 + s)
    """

    kind: str
    coef: float = 1.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in G_KINDS:
            raise ConfigError(f"unknown g kind {self.kind!r}; expected one of {G_KINDS}")
        if not self.coef > 0:
            raise ConfigError("g coefficient must be positive")
        if self.kind in ("power", "expm1") and not self.rate > 0:
            raise ConfigError(f"{self.kind} g needs a positive rate")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power":
            return self.coef * s**self.rate
        if self.kind == "expm1":
            return self.coef * np.expm1(self.rate * s)
        return self.coef * s * np.log1p(s)


@dataclass(frozen=True)
class Majorant:
    """Positive nondecreasing majorant used in the cross-absorption bound.

    ``power1p``: coef * (1 + s)**exponent
    ``affine_plus``: coef * (1 + s + sum(g(s) for g in terms))
    """

    kind: str
    coef: float = 1.0
    exponent: float = 1.0
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power1p", "affine_plus"):
            raise ConfigError(f"unknown majorant kind {self.kind!r}")
        if not self.coef > 0:
            raise ConfigError("majorant coefficient must be positive")
        if self.kind == "power1p" and self.exponent < 0:
            raise ConfigError("power1p exponent must be >= 0")

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "power1p":
            return self.coef * (1.0 + s) ** self.exponent
        out = 1.0 + s
        for g in self.terms:
            out = out + g(s)
        return self.coef * out

    @property
    def strictly_increasing(self) -> bool:
        return self.kind == "affine_plus" or self.exponent > 0


# --------------------------------------------------------------------------
# species and reaction families
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpeciesParams:
    d: float
    m: float

    def __post_init__(self):
        if not (self.d > 0 and math.isfinite(self.d)):
            raise ConfigError(f"diffusion coefficient must be positive, got {self.d}")
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ConfigError(f"porous-medium exponent must be positive, got {self.m}")


@dataclass(frozen=True)
class Reversible:
    """sum p_j U_j <-> sum q_j U_j with forward rate k1 and backward rate k2."""

    p: tuple
    q: tuple
    k1: float
    k2: float

    def __post_init__(self):
        object.__setattr__(self, "p", _tuple(self.p))
        object.__setattr__(self, "q", _tuple(self.q))
        if len(self.p) != len(self.q) or not self.p:
            raise ConfigError("p and q must be nonempty and of equal length")
        if min(self.p + self.q) < 1:
            raise ConfigError("stoichiometric exponents must be >= 1")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ConfigError("rates must be positive")

    @property
    def n_species(self) -> int:
        return len(self.p)


@dataclass(frozen=True)
class CrossAbsorb2:
    """Two species, f1 = s1^b1 g2(s2) - g1(s1) s2^b2, f2 = -s1^b1 g2(s2) + lam g1(s1) s2^b2."""

    g1: GFunction
    g2: GFunction
    beta1: float
    beta2: float
    lam: float

    def __post_init__(self):
        if not (0.0 <= self.lam <= 1.0):
            raise ConfigError("lambda must lie in [0, 1]")
        if self.beta1 < 1 or self.beta2 < 1:
            raise ConfigError("beta1, beta2 must be >= 1")

    n_species = 2


@dataclass(frozen=True)
class PowerLaw2:
    """Two species, f1 = k2 s1^q1 s2^q2 - k1 s1^p1 s2^p2 = -f2."""

    p1: float
    p2: float
    q1: float
    q2: float
    k1: float
    k2: float

    def __post_init__(self):
        if min(self.p1, self.p2, self.q1, self.q2) < 1:
            raise ConfigError("exponents must be >= 1")
        if not (self.k1 > 0 and self.k2 > 0):
            raise ConfigError("rates must be positive")

    n_species = 2


@dataclass(frozen=True)
class LotkaVolterra:
    """f_i = gamma_i s_i + sum_j A_ij s_j^B_ij s_i^B_ji."""

    gamma: tuple
    A: tuple
    B: tuple

    def __post_init__(self):
        gamma = _tuple(self.gamma)
        A = tuple(_tuple(r) for r in self.A)
        B = tuple(_tuple(r) for r in self.B)
        n = len(gamma)
        if n == 0 or len(A) != n or len(B) != n or any(len(r) != n for r in A + B):
            raise ConfigError("gamma, A, B dimensions do not match")
        if min(min(r) for r in B) <= 0:
            raise ConfigError("all exponents B_ij must be positive")
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n_species(self) -> int:
        return len(self.gamma)


ReactionFamily = Union[Reversible, CrossAbsorb2, PowerLaw2, LotkaVolterra]


@dataclass(frozen=True)
class Growth:
    beta: float
    phi: Majorant


@dataclass(frozen=True)
class ReactionSystem:
    species: tuple
    family: ReactionFamily
    a: tuple
    K: float
    growth: tuple

    def __post_init__(self):
        object.__setattr__(self, "species", tuple(self.species))
        object.__setattr__(self, "a", _tuple(self.a))
        object.__setattr__(self, "growth", tuple(self.growth))
        n = len(self.species)
        if n < 1:
            raise ConfigError("need at least one species")
        if self.family.n_species != n:
            raise ConfigError(
                f"family has {self.family.n_species} species, system has {n}")
        if len(self.a) != n or len(self.growth) != n:
            raise ConfigError("a and growth must have one entry per species")
        if min(self.a) <= 0:
            raise ConfigError("mass weights a_i must be positive")
        if not self.K >= 0:
            raise ConfigError("K must be >= 0")
        for i, (sp, g) in enumerate(zip(self.species, self.growth)):
            if not (0 < g.beta < sp.m + 1):
                raise ConfigError(
                    f"growth exponent beta_{i + 1} = {g.beta} must lie in (0, m_{i + 1} + 1)"
                    f" = (0, {sp.m + 1})")
            if not g.phi.strictly_increasing:
                raise ConfigError(f"phi_{i + 1} must be strictly increasing")

    @property
    def N(self) -> int:
        return len(self.species)

    @property
    def d(self) -> np.ndarray:
        return np.array([s.d for s in self.species])

    @property
    def m(self) -> np.ndarray:
        return np.array([s.m for s in self.species])


# --------------------------------------------------------------------------
# grid, state, initial data, trajectory
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    dim: int
    lengths: tuple
    cells: tuple

    def __post_init__(self):
        object.__setattr__(self, "lengths", _tuple(self.lengths))
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.dim not in (1, 2):
            raise ConfigError("only dim 1 and 2 are supported")
        if len(self.lengths) != self.dim or len(self.cells) != self.dim:
            raise ConfigError("lengths and cells need one entry per axis")
        if min(self.lengths) <= 0 or min(self.cells) < 1:
            raise ConfigError("lengths must be positive and cells >= 1")

    @property
    def h(self) -> tuple:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def shape(self) -> tuple:
        return self.cells

    def axis_centers(self, axis: int) -> np.ndarray:
        return (np.arange(self.cells[axis]) + 0.5) * self.h[axis]

    def centers(self) -> list:
        """Cell-center coordinate arrays, one per axis, broadcast to the grid shape."""
        return list(np.meshgrid(*[self.axis_centers(a) for a in range(self.dim)],
                                indexing="ij"))

    def refined(self, factor: int) -> "GridSpec":
        return GridSpec(self.dim, self.lengths, tuple(c * factor for c in self.cells))


@dataclass(frozen=True)
class FieldState:
    t: float
    eps: float
    u: np.ndarray

    def __post_init__(self):
        if not (0.0 <= self.eps < 1.0):
            raise ConfigError(f"eps must lie in [0, 1), got {self.eps}")
        u = np.array(self.u, dtype=float)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)

    @property
    def N(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class Constant:
    c: float

    def __post_init__(self):
        if self.c < 0:
            raise ConfigError("constant initial value must be >= 0")

    def sample(self, grid: GridSpec) -> np.ndarray:
        return np.full(grid.shape, float(self.c))


@dataclass(frozen=True)
class Bump:
    """Gaussian bump amplitude * exp(-|x - center|^2 / width^2)."""

    center: tuple
    width: float
    amplitude: float

    def __post_init__(self):
        object.__setattr__(self, "center", _tuple(np.atleast_1d(self.center)))
        if self.width <= 0 or self.amplitude < 0:
            raise ConfigError("bump needs width > 0 and amplitude >= 0")

    def sample(self, grid: GridSpec) -> np.ndarray:
        if len(self.center) != grid.dim:
            raise ConfigError("bump center dimension does not match grid")
        r2 = sum((x - c) ** 2 for x, c in zip(grid.centers(), self.center))
        return self.amplitude * np.exp(-r2 / self.width**2)


@dataclass(frozen=True)
class SeededRandom:
    seed: int
    low: float
    high: float

    def __post_init__(self):
        if self.low < 0 or self.high < self.low:
            raise ConfigError("random initial data needs 0 <= low <= high")

    def sample(self, grid: GridSpec) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.low, self.high, size=grid.shape)


@dataclass(frozen=True)
class InitialData:
    """Per species, a tuple of generators whose samples are summed."""

    generators: tuple

    def __post_init__(self):
        object.__setattr__(self, "generators",
                           tuple(tuple(g) for g in self.generators))

    @property
    def N(self) -> int:
        return len(self.generators)

    def sample(self, grid: GridSpec) -> np.ndarray:
        out = np.zeros((self.N,) + grid.shape)
        for i, gens in enumerate(self.generators):
            for g in gens:
                out[i] += g.sample(grid)
        return out


@dataclass
class Trajectory:
    """Snapshots plus running space-time integrals.

    ``integrals[key]`` holds the cumulative value of a probe at each snapshot
    time.  ``history`` holds every step's state when the run was asked to keep
    it, which lets verification replay integrals that were not attached.
    """

    system: ReactionSystem
    grid: GridSpec
    eps: float
    snapshots: list = field(default_factory=list)
    integrals: dict = field(default_factory=dict)
    probes: dict = field(default_factory=dict)
    dts: list = field(default_factory=list)
    history: Optional[list] = None
    aborted: Optional[str] = None
    clamp_max: float = 0.0

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def T(self) -> float:
        return self.snapshots[-1].t if self.snapshots else 0.0

    @property
    def n_steps(self) -> int:
        return len(self.dts)

    @property
    def dt_max(self) -> float:
        return max(self.dts) if self.dts else 0.0

    @property
    def initial(self) -> FieldState:
        return self.snapshots[0]

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]

    def integral(self, key) -> float:
        """Final cumulative value of an attached probe."""
        return self.integrals[key][-1]


# --------------------------------------------------------------------------
# renormalization, test functions, sweep settings
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RenormalizationSpec:
    """rho(s) = M/(k+1) * (1 - s/M)_+^(k+1); M = 0 is the degenerate rho == 0."""

    M: float
    k: int = 3

    def __post_init__(self):
        if self.M < 0:
            raise ConfigError("truncation level M must be >= 0")
        if int(self.k) != self.k or self.k < 2:
            raise ConfigError("degree k must be an integer >= 2")
        object.__setattr__(self, "k", int(self.k))


@dataclass(frozen=True)
class TestFunctionSpec:
    """phi(x, t) = psi(t) * prod_j (1 + cos(k_j pi x_j / L_j)) / 2 with psi(t) = (1 - t/T_supp)_+^2."""

    __test__ = False  # keep pytest from collecting this

    modes: tuple
    T_supp: float

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(k) for k in self.modes))
        if min(self.modes) < 0:
            raise ConfigError("mode indices must be >= 0")
        if not self.T_supp > 0:
            raise ConfigError("T_supp must be positive")

    def psi(self, t: float) -> float:
        x = max(0.0, 1.0 - t / self.T_supp)
        return x * x

    def dpsi(self, t: float) -> float:
        return -2.0 * max(0.0, 1.0 - t / self.T_supp) / self.T_supp

    def _factors(self, coords: Sequence[np.ndarray], lengths: Sequence[float]):
        if len(coords) != len(self.modes):
            raise ConfigError("test function modes do not match grid dimension")
        out = []
        for x, k, L in zip(coords, self.modes, lengths):
            w = k * math.pi / L
            out.append(((1.0 + np.cos(w * x)) / 2.0, -w * w * np.cos(w * x) / 2.0))
        return out

    def spatial(self, coords, lengths) -> np.ndarray:
        val = 1.0
        for f, _ in self._factors(coords, lengths):
            val = val * f
        return np.asarray(val, dtype=float)

    def spatial_laplacian(self, coords, lengths) -> np.ndarray:
        fac = self._factors(coords, lengths)
        total = 0.0
        for j in range(len(fac)):
            term = 1.0
            for l, (f, f2) in enumerate(fac):
                term = term * (f2 if l == j else f)
            total = total + term
        return np.asarray(total, dtype=float)

    def phi(self, coords, lengths, t: float) -> np.ndarray:
        return self.psi(t) * self.spatial(coords, lengths)

    def phi_t(self, coords, lengths, t: float) -> np.ndarray:
        return self.dpsi(t) * self.spatial(coords, lengths)

    def laplacian(self, coords, lengths, t: float) -> np.ndarray:
        return self.psi(t) * self.spatial_laplacian(coords, lengths)


def kappa(m: float) -> float:
    """Exponent of the truncated-power compactness probe."""
    return max((m + 1.0) / 2.0, 2.0)


@dataclass(frozen=True)
class SweepSpec:
    eps_list: tuple
    zeta_cutoff: Optional[float] = None

    def __post_init__(self):
        eps = _tuple(self.eps_list)
        object.__setattr__(self, "eps_list", eps)
        if len(eps) < 3:
            raise ConfigError("eps_list needs at least 3 entries")
        if any(not (0 < e < 1) for e in eps):
            raise ConfigError("every eps must lie in (0, 1)")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_list must be strictly decreasing")
        if self.zeta_cutoff is not None and not self.zeta_cutoff > 0:
            raise ConfigError("zeta cutoff must be positive")

    def kappas(self, system: ReactionSystem) -> tuple:
        return tuple(kappa(sp.m) for sp in system.species)


def zeta(s, cutoff: float):
    """Cubic smoothstep cutoff: 1 on [0, c], 0 beyond 2c, monotone between."""
    x = np.clip((np.asarray(s, dtype=float) - cutoff) / cutoff, 0.0, 1.0)
    return 1.0 - x * x * (3.0 - 2.0 * x)
