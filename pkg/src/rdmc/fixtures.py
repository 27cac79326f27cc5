"""Built-in admissible configurations, one per reaction family variant.

All use a 64-cell unit interval, smooth bump-plus-constant initial data and
moderate diffusion, so the explicit scheme stays well resolved.  The JSON
files under ``rdmc/data`` hold the same dicts (plus the two reversible
validator fixtures used by ``rdmc check``).
"""

from __future__ import annotations

import copy
import json
from importlib import resources

from .config import RunConfig, parse_config


def _bump(center, width, amplitude, base):
    return [{"type": "bump", "center": [center], "width": width, "amplitude": amplitude},
            {"type": "constant", "c": base}]


_GRID = {"dim": 1, "lengths": [1.0], "cells": [64]}
_COMMON = {"grid": _GRID, "eps": 0.1, "T_end": 1.0, "snapshot_every": 50, "seed": 0}

FIXTURES = {
    "reversible": {
        "species": [{"d": 0.1, "m": 1.0}, {"d": 0.1, "m": 1.0}],
        "family": {"type": "reversible", "p": [2, 1], "q": [1, 2], "k1": 1.0, "k2": 1.0},
        "a": [1.0, 1.0],
        "init": [_bump(0.3, 0.25, 2.0, 0.5), _bump(0.7, 0.3, 1.5, 0.5)],
    },
    "cross_absorb_power": {
        "species": [{"d": 0.1, "m": 1.0}, {"d": 0.08, "m": 1.5}],
        "family": {"type": "cross_absorb", "g1": {"kind": "power", "coef": 1.0, "rate": 2.0},
                   "g2": {"kind": "power", "coef": 1.0, "rate": 1.5},
                   "beta1": 1.0, "beta2": 1.5, "lam": 0.5},
        "a": [1.0, 1.0],
        "init": [_bump(0.35, 0.25, 1.5, 0.4), _bump(0.65, 0.3, 1.0, 0.5)],
    },
    "cross_absorb_exp": {
        "species": [{"d": 0.1, "m": 1.0}, {"d": 0.1, "m": 1.0}],
        "family": {"type": "cross_absorb", "g1": {"kind": "expm1", "coef": 1.0, "rate": 1.0},
                   "g2": {"kind": "expm1", "coef": 0.5, "rate": 1.0},
                   "beta1": 1.5, "beta2": 1.0, "lam": 1.0},
        "a": [1.0, 1.0],
        "init": [_bump(0.3, 0.3, 1.5, 0.5), _bump(0.7, 0.25, 1.2, 0.5)],
    },
    "cross_absorb_log": {
        "species": [{"d": 0.05, "m": 2.0}, {"d": 0.1, "m": 1.0}],
        "family": {"type": "cross_absorb", "g1": {"kind": "slog1p", "coef": 1.0},
                   "g2": {"kind": "slog1p", "coef": 2.0},
                   "beta1": 1.0, "beta2": 1.2, "lam": 0.25},
        "a": [1.0, 1.0],
        "init": [_bump(0.4, 0.3, 1.5, 0.5), _bump(0.6, 0.25, 1.0, 0.5)],
    },
    "power_law": {
        "species": [{"d": 0.08, "m": 1.5}, {"d": 0.1, "m": 1.0}],
        "family": {"type": "power_law", "p1": 2.0, "p2": 1.0, "q1": 1.0, "q2": 3.0,
                   "k1": 1.0, "k2": 0.5},
        "a": [1.0, 1.0],
        "init": [_bump(0.3, 0.3, 1.5, 0.5), _bump(0.7, 0.3, 1.2, 0.5)],
    },
    "lotka_volterra": {
        "species": [{"d": 0.1, "m": 1.0}, {"d": 0.1, "m": 1.0}],
        "family": {"type": "lotka_volterra", "gamma": [0.5, -1.0],
                   "A": [[0.0, -1.0], [1.0, 0.0]], "B": [[1.0, 1.5], [1.0, 1.0]]},
        "a": [1.0, 1.0],
        "init": [_bump(0.3, 0.3, 1.5, 0.5), _bump(0.7, 0.3, 1.0, 0.5)],
    },
}

#: the four fixtures used by the renormalized-inequality suite
RENORM_SUITE = ("reversible", "cross_absorb_exp", "power_law", "lotka_volterra")


def fixture_raw(name: str, **overrides) -> dict:
    if name not in FIXTURES:
        raise KeyError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
    raw = {"name": name, **copy.deepcopy(_COMMON), **copy.deepcopy(FIXTURES[name])}
    raw.update(copy.deepcopy(overrides))
    return raw


def fixture(name: str, **overrides) -> RunConfig:
    return parse_config(fixture_raw(name, **overrides))


def bundled_path(filename: str):
    """Path-like handle to a JSON file shipped in ``rdmc/data``."""
    return resources.files("rdmc") / "data" / filename


def bundled_raw(filename: str) -> dict:
    return json.loads(bundled_path(filename).read_text())
