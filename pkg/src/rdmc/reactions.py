"""Reaction families, the bounded quotient regularization, and condition checks.

All evaluators are vectorized: a state ``s`` has shape ``(N, ...)`` and the
result has the same shape, species along axis 0.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .core import (
    ConfigError,
    CrossAbsorb2,
    GFunction,
    Growth,
    LotkaVolterra,
    Majorant,
    PowerLaw2,
    ReactionSystem,
    Reversible,
    SpeciesParams,
)

TOL_QP = 1e-10
STOCH_RTOL = 1e-12


class DomainError(ValueError):
    """Reaction evaluated outside the nonnegative orthant."""


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def eval_family(family, s) -> np.ndarray:
    """Evaluate the reaction vector f(s)."""
    s = np.asarray(s, dtype=float)
    n = family.n_species
    if s.shape[:1] != (n,):
        raise ConfigError(f"state has leading dimension {s.shape[:1]}, expected ({n},)")
    if np.any(s < 0):
        raise DomainError("reaction evaluated at a negative concentration")

    if isinstance(family, Reversible):
        p = np.asarray(family.p).reshape((n,) + (1,) * (s.ndim - 1))
        q = np.asarray(family.q).reshape(p.shape)
        flux = family.k2 * np.prod(s**q, axis=0) - family.k1 * np.prod(s**p, axis=0)
        return (p - q) * flux

    if isinstance(family, CrossAbsorb2):
        s1, s2 = s[0], s[1]
        forward = s1**family.beta1 * family.g2(s2)
        backward = family.g1(s1) * s2**family.beta2
        return np.stack([forward - backward, -forward + family.lam * backward])

    if isinstance(family, PowerLaw2):
        s1, s2 = s[0], s[1]
        f1 = (family.k2 * s1**family.q1 * s2**family.q2
              - family.k1 * s1**family.p1 * s2**family.p2)
        return np.stack([f1, -f1])

    if isinstance(family, LotkaVolterra):
        out = np.empty_like(s)
        for i in range(n):
            acc = family.gamma[i] * s[i]
            for j in range(n):
                aij = family.A[i][j]
                if aij != 0.0:
                    acc = acc + aij * s[j] ** family.B[i][j] * s[i] ** family.B[j][i]
            out[i] = acc
        return out

    raise ConfigError(f"unsupported reaction family {type(family).__name__}")


def regularize(f, eps: float) -> np.ndarray:
    """Quotient f_i / (1 + eps * sum_j |f_j|), species along axis 0."""
    if not (0.0 <= eps < 1.0):
        raise ConfigError(f"eps must lie in [0, 1), got {eps}")
    f = np.asarray(f, dtype=float)
    if eps == 0.0:
        return f.copy()
    return f / (1.0 + eps * np.sum(np.abs(f), axis=0))


def regularized_reaction(system: ReactionSystem, u, eps: float) -> np.ndarray:
    return regularize(eval_family(system.family, u), eps)


def power_law_as_cross_absorb(fam: PowerLaw2) -> CrossAbsorb2:
    """The two-exponent mass-action system written as a cross-absorptive one."""
    return CrossAbsorb2(
        g1=GFunction("power", fam.k1, fam.p1),
        g2=GFunction("power", fam.k2, fam.q2),
        beta1=fam.q1,
        beta2=fam.p2,
        lam=1.0,
    )


# --------------------------------------------------------------------------
# sample sets and reports
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SampleSet:
    """Tensor grid over [0, s_max]^N plus seeded uniform points."""

    s_max: float = 10.0
    points_per_axis: int = 9
    n_random: int = 256
    seed: int = 0

    def points(self, n: int) -> np.ndarray:
        axis = np.linspace(0.0, self.s_max, self.points_per_axis)
        grid = np.array(list(itertools.product(axis, repeat=n)), dtype=float)
        rng = np.random.default_rng(self.seed)
        rand = rng.uniform(0.0, self.s_max, size=(self.n_random, n))
        return np.vstack([grid, rand])


DEFAULT_SAMPLES = SampleSet()


@dataclass
class ConditionReport:
    condition: str
    passed: bool
    worst_sample: Optional[tuple] = None
    worst_value: float = float("nan")
    estimated_K: Optional[float] = None
    note: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_text(self) -> str:
        lines = [f"[{self.verdict.upper()}] {self.condition}"]
        if self.worst_sample is not None:
            pt = ", ".join(f"{v:.6g}" for v in self.worst_sample)
            lines.append(f"    worst sample s = ({pt}), value = {self.worst_value:.6g}")
        if self.estimated_K is not None:
            lines.append(f"    sampled lower bound on required K: {self.estimated_K:.6g}")
        if self.note:
            lines.append(f"    {self.note}")
        return "\n".join(lines)

    def to_row(self) -> dict:
        return {
            "condition": self.condition,
            "verdict": self.verdict,
            "worst_sample": "" if self.worst_sample is None
            else " ".join(repr(float(v)) for v in self.worst_sample),
            "worst_value": repr(float(self.worst_value)),
            "estimated_K": "" if self.estimated_K is None else repr(float(self.estimated_K)),
        }


@dataclass
class Verdict:
    accept: bool
    reasons: list = field(default_factory=list)

    def __bool__(self):
        return self.accept


def _samples(samples, n):
    if samples is None:
        samples = DEFAULT_SAMPLES
    if isinstance(samples, SampleSet):
        return samples.points(n)
    pts = np.asarray(samples, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != n:
        raise ConfigError(f"samples must have shape (n, {n})")
    if np.any(pts < 0):
        raise ConfigError("samples must lie in the nonnegative orthant")
    return pts


# --------------------------------------------------------------------------
# structural conditions
# --------------------------------------------------------------------------


def check_quasipositivity(family, samples=None, tol: float = TOL_QP) -> ConditionReport:
    """f_i >= -tol whenever s_i = 0."""
    n = family.n_species
    pts = _samples(samples, n)
    worst, witness = np.inf, None
    for i in range(n):
        s = pts.copy()
        s[:, i] = 0.0
        fi = eval_family(family, s.T)[i]
        k = int(np.argmin(fi))
        if fi[k] < worst:
            worst, witness = float(fi[k]), tuple(s[k])
    return ConditionReport("quasipositivity", worst >= -tol, witness, worst)


def check_mass_control(family, a: Sequence[float], samples=None,
                       K: Optional[float] = None) -> ConditionReport:
    """Sampled lower bound on K in sum a_i f_i <= K (sum a_i s_i + 1).

    Without a reference ``K`` the check passes whenever the estimate is finite;
    with one it passes iff the estimate does not exceed it.
    """
    a = np.asarray(a, dtype=float)
    n = family.n_species
    if a.shape != (n,) or np.any(a <= 0):
        raise ConfigError("a must be a positive vector with one entry per species")
    pts = _samples(samples, n)
    f = eval_family(family, pts.T)
    ratio = (a @ f) / (pts @ a + 1.0)
    k = int(np.argmax(ratio))
    est = max(0.0, float(ratio[k]))
    passed = bool(np.isfinite(est))
    if K is not None:
        passed = passed and est <= K * (1 + 1e-12) + 1e-12
    return ConditionReport("mass control", passed, tuple(pts[k]), float(ratio[k]),
                           estimated_K=est,
                           note="K estimated by sampling; it is a lower bound on the true K")


def check_cross_absorption(system: ReactionSystem, samples=None,
                           tol: float = TOL_QP) -> ConditionReport:
    """f_i(s) >= -phi_i(s_i) (sum_{j != i} s_j^beta_j + 1) at every sample."""
    n = system.N
    pts = _samples(samples, n)
    f = eval_family(system.family, pts.T)
    beta = np.array([g.beta for g in system.growth])
    powers = pts**beta
    total = powers.sum(axis=1)
    worst, witness = np.inf, None
    for i in range(n):
        lower = -system.growth[i].phi(pts[:, i]) * (total - powers[:, i] + 1.0)
        slack = (f[i] - lower) / (1.0 + np.abs(lower) + np.abs(f[i]))
        k = int(np.argmin(slack))
        if slack[k] < worst:
            worst, witness = float(slack[k]), tuple(pts[k])
    return ConditionReport("cross-absorption growth", worst >= -tol, witness, worst,
                           note="worst value is the relative slack f_i - lower bound")


# --------------------------------------------------------------------------
# family-specific admissibility
# --------------------------------------------------------------------------


def validate_reversible(p, q, m, a) -> Verdict:
    """Stoichiometric balance plus the cross-exponent bounds for each unbalanced species."""
    p, q, m, a = (np.asarray(x, dtype=float) for x in (p, q, m, a))
    n = p.size
    if not (q.size == m.size == a.size == n):
        raise ConfigError("p, q, m, a must all have the same length")
    reasons = []
    lhs, rhs = float(a @ p), float(a @ q)
    if abs(lhs - rhs) > STOCH_RTOL * max(abs(lhs), abs(rhs)):
        reasons.append(f"stoichiometric balance violated: sum a_i p_i = {lhs:g}"
                       f" != sum a_i q_i = {rhs:g}")
    for i in range(n):
        if p[i] == q[i]:
            continue
        side, e = ("forward", p) if p[i] > q[i] else ("backward", q)
        total = float(sum(e[j] / (m[j] + 1) for j in range(n) if j != i))
        if not total < 1:
            name = "p" if side == "forward" else "q"
            reasons.append(f"{side} cross-exponent bound violated at i={i + 1}:"
                           f" sum_(j!=i) {name}_j/(m_j+1) = {total:g} >= 1")
    return Verdict(not reasons, reasons)


def validate_lv(A, B, m, gamma=None) -> Verdict:
    """Pairwise non-amplification a_ij + a_ji <= 0 and B_ij < m_i + 1 wherever a_ij < 0."""
    A, B, m = (np.asarray(x, dtype=float) for x in (A, B, m))
    n = m.size
    if A.shape != (n, n) or B.shape != (n, n):
        raise ConfigError("A and B must be N x N with N = len(m)")
    if gamma is not None and np.asarray(gamma).size != n:
        raise ConfigError("gamma must have length N")
    if np.any(B <= 0):
        raise ConfigError("exponents B_ij must be positive")
    reasons = []
    for i in range(n):
        for j in range(i, n):
            if A[i, j] + A[j, i] > 0:
                reasons.append(f"pair ({i + 1},{j + 1}): a_ij + a_ji = {A[i, j] + A[j, i]:g} > 0")
    for i in range(n):
        for j in range(n):
            if A[i, j] < 0 and not B[i, j] < m[i] + 1:
                reasons.append(f"absorptive exponent too large at ({i + 1},{j + 1}):"
                               f" beta_ij = {B[i, j]:g} >= m_i + 1 = {m[i] + 1:g}")
    return Verdict(not reasons, reasons)


def validate_cross_absorb(family: CrossAbsorb2, m) -> Verdict:
    m = np.asarray(m, dtype=float)
    reasons = []
    for idx, (beta, mi) in enumerate(((family.beta1, m[0]), (family.beta2, m[1])), 1):
        if not (1 <= beta < mi + 1):
            reasons.append(f"beta_{idx} = {beta:g} not in [1, m_{idx} + 1) = [1, {mi + 1:g})")
    for idx, g in enumerate((family.g1, family.g2), 1):
        if g.kind == "power" and g.rate < 1:
            reasons.append(f"g_{idx} = s^{g.rate:g} is not C^1 at 0")
    if not 0 <= family.lam <= 1:
        reasons.append(f"lambda = {family.lam:g} not in [0, 1]")
    return Verdict(not reasons, reasons)


def validate_power_law(family: PowerLaw2, m) -> Verdict:
    m = np.asarray(m, dtype=float)
    reasons = []
    if not family.q1 < m[0] + 1:
        reasons.append(f"q_1 = {family.q1:g} >= m_1 + 1 = {m[0] + 1:g}")
    if not family.p2 < m[1] + 1:
        reasons.append(f"p_2 = {family.p2:g} >= m_2 + 1 = {m[1] + 1:g}")
    return Verdict(not reasons, reasons)


def validate_family(family, m, a) -> Verdict:
    if isinstance(family, Reversible):
        return validate_reversible(family.p, family.q, m, a)
    if isinstance(family, LotkaVolterra):
        return validate_lv(family.A, family.B, m, family.gamma)
    if isinstance(family, CrossAbsorb2):
        return validate_cross_absorb(family, m)
    if isinstance(family, PowerLaw2):
        return validate_power_law(family, m)
    raise ConfigError(f"unsupported reaction family {type(family).__name__}")


# --------------------------------------------------------------------------
# default growth data and system assembly
# --------------------------------------------------------------------------


def _reversible_growth(fam: Reversible, m) -> tuple:
    n = fam.n_species
    p, q = np.array(fam.p), np.array(fam.q)
    required = [[] for _ in range(n)]
    for i in range(n):
        if p[i] == q[i]:
            continue
        e = p if p[i] > q[i] else q
        others = [j for j in range(n) if j != i]
        if len(others) == 1:
            required[others[0]].append(e[others[0]])
            continue
        # Young split of prod_j s_j^e_j with theta_j = (m_j+1)/(e_j c), c in (1, 1/total)
        total = sum(e[j] / (m[j] + 1) for j in others)
        c = 0.5 * (1.0 + 1.0 / total) if total < 1 else 1.0
        for j in others:
            required[j].append((m[j] + 1) / c)
    out = []
    kmax = max(fam.k1, fam.k2)
    for i in range(n):
        beta = max(required[i]) if required[i] else (m[i] + 1) / 2
        phi = Majorant("power1p", coef=kmax * (abs(p[i] - q[i]) + 1),
                       exponent=max(p[i], q[i]))
        out.append(Growth(float(beta), phi))
    return tuple(out)


def _lv_growth(fam: LotkaVolterra, m) -> tuple:
    n = fam.n_species
    A, B = np.array(fam.A), np.array(fam.B)
    out = []
    for i in range(n):
        cross = [B[k, i] for k in range(n) if k != i and A[k, i] < 0]
        beta = max(cross) if cross else (m[i] + 1) / 2
        coef = max([abs(fam.gamma[i])] + [abs(x) for x in A[i]])
        terms = [GFunction("power", 1.0, B[j, i]) for j in range(n)]
        if A[i, i] < 0:
            terms.append(GFunction("power", 1.0, 2 * B[i, i]))
        phi = Majorant("affine_plus", coef=coef if coef > 0 else 1.0, terms=tuple(terms))
        out.append(Growth(float(beta), phi))
    return tuple(out)


def default_growth(family, m) -> tuple:
    """Growth exponents and majorants that make the cross-absorption bound hold."""
    m = np.asarray(m, dtype=float)
    if isinstance(family, Reversible):
        return _reversible_growth(family, m)
    if isinstance(family, LotkaVolterra):
        return _lv_growth(family, m)
    if isinstance(family, CrossAbsorb2):
        return (Growth(family.beta1, Majorant("affine_plus", terms=(family.g1,))),
                Growth(family.beta2, Majorant("affine_plus", terms=(family.g2,))))
    if isinstance(family, PowerLaw2):
        return (Growth(family.q1, Majorant("affine_plus",
                                           terms=(GFunction("power", family.k1, family.p1),))),
                Growth(family.p2, Majorant("affine_plus",
                                           terms=(GFunction("power", family.k2, family.q2),))))
    raise ConfigError(f"unsupported reaction family {type(family).__name__}")


def make_system(family, species: Sequence[SpeciesParams], a=None, K=None,
                growth=None, samples=None) -> ReactionSystem:
    """Assemble a ReactionSystem, filling in defaults.

    ``a`` defaults to all ones, ``growth`` to :func:`default_growth`, and ``K``
    to the sampled estimate from :func:`check_mass_control`.
    """
    species = tuple(species)
    n = len(species)
    a = tuple(float(x) for x in (a if a is not None else [1.0] * n))
    m = [sp.m for sp in species]
    if growth is None:
        growth = default_growth(family, m)
    if K is None:
        K = check_mass_control(family, a, samples).estimated_K
    return ReactionSystem(species, family, a, float(K), tuple(growth))
