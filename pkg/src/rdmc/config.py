"""JSON run configurations.

Schema (keys not listed are rejected)::

    {
      "name": str,
      "species": [{"d": float, "m": float}, ...],
      "family": {"type": "reversible", "p": [...], "q": [...], "k1": f, "k2": f}
              | {"type": "cross_absorb", "g1": G, "g2": G, "beta1": f, "beta2": f, "lam": f}
              | {"type": "power_law", "p1": f, "p2": f, "q1": f, "q2": f, "k1": f, "k2": f}
              | {"type": "lotka_volterra", "gamma": [...], "A": [[...]], "B": [[...]]},
      "a": [...],                      optional, default all ones
      "K": float,                      optional, default sampled estimate
      "growth": [{"beta": f, "phi": PHI}, ...],   optional, family default
      "grid": {"dim": 1|2, "lengths": [...], "cells": [...]},
      "init": [[GEN, ...], ...],       one list of summed generators per species
      "eps": float, "eps_list": [...], "T_end": float,
      "snapshot_every": int, "safety": float, "dt_max": float,
      "rho_specs": [{"M": f, "k": int}], "phi_specs": [{"modes": [...], "T_supp": f}],
      "truncation_levels": [...],
      "tolerances": {"c_tol": f, "mass": f},
      "samples": {"s_max": f, "points_per_axis": int, "n_random": int},
      "seed": int
    }

    G   = {"kind": "power"|"expm1"|"slog1p", "coef": f, "rate": f}
    PHI = {"kind": "power1p", "coef": f, "exponent": f}
        | {"kind": "affine_plus", "coef": f, "terms": [G, ...]}
    GEN = {"type": "constant", "c": f}
        | {"type": "bump", "center": [...], "width": f, "amplitude": f}
        | {"type": "random", "low": f, "high": f, "seed": int (optional)}

A ``phi_specs`` entry may give ``"T_supp_fraction"`` instead of ``"T_supp"``;
it is then resolved against ``T_end``.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .core import (
    Bump,
    ConfigError,
    Constant,
    CrossAbsorb2,
    GFunction,
    GridSpec,
    Growth,
    InitialData,
    LotkaVolterra,
    Majorant,
    PowerLaw2,
    ReactionSystem,
    RenormalizationSpec,
    Reversible,
    SeededRandom,
    SpeciesParams,
    SweepSpec,
    TestFunctionSpec,
)
from .reactions import SampleSet, make_system

TOP_KEYS = {
    "name", "species", "family", "a", "K", "growth", "grid", "init", "eps",
    "eps_list", "T_end", "snapshot_every", "safety", "dt_max", "rho_specs",
    "phi_specs", "truncation_levels", "tolerances", "samples", "seed",
    "zeta_cutoff",
}

DEFAULT_RHO = [{"M": 1.0, "k": 3}, {"M": 4.0, "k": 3}, {"M": 8.0, "k": 5}]
DEFAULT_PHI = [
    {"modes": [0], "T_supp_fraction": 1.0},
    {"modes": [1], "T_supp_fraction": 1.0},
    {"modes": [2], "T_supp_fraction": 1.0},
    {"modes": [1], "T_supp_fraction": 0.5},
]


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def params_hash(raw: dict) -> str:
    """First 16 hex digits of sha256 over the canonical JSON of a config."""
    return hashlib.sha256(canonical_json(raw).encode()).hexdigest()[:16]


def _need(d: dict, key: str, where: str):
    if key not in d:
        raise ConfigError(f"{where}: missing key {key!r}")
    return d[key]


def _g(spec: dict) -> GFunction:
    return GFunction(_need(spec, "kind", "g"), float(spec.get("coef", 1.0)),
                     float(spec.get("rate", 1.0)))


def _phi(spec: dict) -> Majorant:
    return Majorant(_need(spec, "kind", "phi"), float(spec.get("coef", 1.0)),
                    float(spec.get("exponent", 1.0)),
                    tuple(_g(t) for t in spec.get("terms", [])))


def parse_family(spec: dict):
    kind = _need(spec, "type", "family")
    try:
        if kind == "reversible":
            return Reversible(tuple(spec["p"]), tuple(spec["q"]),
                              float(spec.get("k1", 1.0)), float(spec.get("k2", 1.0)))
        if kind == "cross_absorb":
            return CrossAbsorb2(_g(spec["g1"]), _g(spec["g2"]), float(spec["beta1"]),
                                float(spec["beta2"]), float(spec.get("lam", 1.0)))
        if kind == "power_law":
            return PowerLaw2(*(float(spec[k]) for k in ("p1", "p2", "q1", "q2")),
                             float(spec.get("k1", 1.0)), float(spec.get("k2", 1.0)))
        if kind == "lotka_volterra":
            return LotkaVolterra(tuple(spec["gamma"]), tuple(map(tuple, spec["A"])),
                                 tuple(map(tuple, spec["B"])))
    except KeyError as exc:
        raise ConfigError(f"family {kind!r}: missing key {exc.args[0]!r}") from None
    raise ConfigError(f"unknown family type {kind!r}")


def _generator(spec: dict, fallback_seed: int):
    kind = _need(spec, "type", "init generator")
    if kind == "constant":
        return Constant(float(spec["c"]))
    if kind == "bump":
        return Bump(tuple(spec["center"]), float(spec["width"]), float(spec["amplitude"]))
    if kind == "random":
        return SeededRandom(int(spec.get("seed", fallback_seed)), float(spec["low"]),
                            float(spec["high"]))
    raise ConfigError(f"unknown init generator {kind!r}")


def parse_species_family(raw: dict):
    """Just the species list and reaction family, without assembling a system."""
    try:
        species = [SpeciesParams(float(s["d"]), float(s["m"]))
                   for s in _need(raw, "species", "config")]
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"species entries need d and m ({exc})") from None
    family = parse_family(_need(raw, "family", "config"))
    if family.n_species != len(species):
        raise ConfigError(f"family has {family.n_species} species, config lists {len(species)}")
    return species, family


@dataclass
class RunConfig:
    """A parsed configuration plus the raw dict it came from."""

    raw: dict
    name: str
    system: ReactionSystem
    grid: GridSpec
    init: InitialData
    eps: float
    T_end: float
    snapshot_every: int
    safety: float
    dt_max: float
    rho_specs: tuple
    phi_specs: tuple
    truncation_levels: tuple
    c_tol: float
    tol_mass: float
    samples: SampleSet
    seed: int
    sweep: Optional[SweepSpec]

    @property
    def params_hash(self) -> str:
        return params_hash(self.raw)

    def with_overrides(self, **changes) -> "RunConfig":
        """Re-parse with top-level raw keys replaced (e.g. ``grid``, ``eps``)."""
        raw = copy.deepcopy(self.raw)
        raw.update(changes)
        return parse_config(raw)


def parse_config(raw: dict, seed: Optional[int] = None) -> RunConfig:
    """Build a RunConfig; ``seed`` (e.g. from the command line) overrides the file."""
    if not isinstance(raw, dict) or not raw:
        raise ConfigError("config must be a nonempty JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    raw = copy.deepcopy(raw)
    if seed is not None:
        raw["seed"] = int(seed)
    seed = int(raw.get("seed", 0))

    species, family = parse_species_family(raw)
    samples = SampleSet(seed=seed, **raw.get("samples", {}))
    growth = None
    if "growth" in raw:
        growth = tuple(Growth(float(g["beta"]), _phi(g["phi"])) for g in raw["growth"])
    system = make_system(family, species, raw.get("a"), raw.get("K"), growth, samples)

    g = _need(raw, "grid", "config")
    grid = GridSpec(int(g["dim"]), tuple(g["lengths"]), tuple(g["cells"]))

    init_spec = _need(raw, "init", "config")
    if len(init_spec) != system.N:
        raise ConfigError("init needs one generator list per species")
    init = InitialData(tuple(
        tuple(_generator(gen, seed + 1000 * i + j) for j, gen in enumerate(gens))
        for i, gens in enumerate(init_spec)))

    T_end = float(raw.get("T_end", 1.0))
    if not (T_end >= 0 and math.isfinite(T_end)):
        raise ConfigError("T_end must be finite and >= 0")
    eps = float(raw.get("eps", 0.1))
    if not 0 <= eps < 1:
        raise ConfigError("eps must lie in [0, 1)")

    rho_specs = tuple(RenormalizationSpec(float(r["M"]), int(r.get("k", 3)))
                      for r in raw.get("rho_specs", DEFAULT_RHO))
    phi_specs = []
    for p in raw.get("phi_specs", DEFAULT_PHI):
        if "T_supp" in p:
            T_supp = float(p["T_supp"])
        else:
            T_supp = float(p.get("T_supp_fraction", 1.0)) * T_end
        if T_supp > 0:
            phi_specs.append(TestFunctionSpec(tuple(p["modes"]), T_supp))

    sweep = None
    if "eps_list" in raw:
        sweep = SweepSpec(tuple(raw["eps_list"]), raw.get("zeta_cutoff"))

    tol = raw.get("tolerances", {})
    dt_max = raw.get("dt_max")
    return RunConfig(
        raw=raw,
        name=str(raw.get("name", "unnamed")),
        system=system,
        grid=grid,
        init=init,
        eps=eps,
        T_end=T_end,
        snapshot_every=int(raw.get("snapshot_every", 50)),
        safety=float(raw.get("safety", 0.5)),
        dt_max=math.inf if dt_max is None else float(dt_max),
        rho_specs=rho_specs,
        phi_specs=tuple(phi_specs),
        truncation_levels=tuple(float(x) for x in raw.get("truncation_levels", [1.0, 4.0])),
        c_tol=float(tol.get("c_tol", 5.0)),
        tol_mass=float(tol.get("mass", 1e-8)),
        samples=samples,
        seed=seed,
        sweep=sweep,
    )


def load_raw(path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    if not text.strip():
        raise ConfigError(f"config {path} is empty")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None


def load_config(path, seed: Optional[int] = None) -> RunConfig:
    return parse_config(load_raw(path), seed)
