"""Scenario documents: validation and construction of states and baths.

A scenario is a JSON object::

    {
      "state": {"kind": "gfmsv", "params": {"r": 0.6, "theta1": 40, "unit": "deg"}},
      "bath": {"N": 4, "modes": [1, 3]},
      "search": {"tol": 0.001, "tau_max": 0.9999, "grid_step": 0.01},
      "cuts": ["12:34"],
      "tau": 0.55
    }

Only ``state`` is required. Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

import numpy as np

from gaussbound.channel import BathSpec
from gaussbound.states import (
    GwwParams,
    adesso,
    fmsv,
    generalized_werner_wolf,
    gfmsv,
    random_mixed_goe,
    random_pure,
    tmsv_pair,
    werner_wolf,
)
from gaussbound.symplectic import Bipartition


class SchemaError(ValueError):
    """A scenario document does not match the expected structure."""


_STATE_PARAMS = {
    "fmsv": {"r": 0.6},
    "gfmsv": {"r": 0.6, "theta1": None, "theta2": None, "theta3": None, "unit": "rad"},
    "tmsv-pair": {"r": 0.6},
    "adesso": {"s": 0.6, "a": 0.6},
    "werner-wolf": {},
    "gww": {"A": None, "B": None, "C": None, "D": None, "E": None, "F": None},
    "random-pure": {"n": 4, "energy": 12.0},
    "random-mixed": {"n": 4},
}
_TOP_KEYS = {"state", "bath", "search", "cuts", "tau"}
_SEARCH_KEYS = {"tol", "tau_max", "grid_step"}
_BATH_KEYS = {"N", "modes", "gamma"}


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(f"{where} must be a finite number")
    return float(value)


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where} must be an object")
    extra = set(obj) - allowed
    if extra:
        raise SchemaError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def validate(doc: dict) -> dict:
    """Check a scenario document and return a normalized deep copy with defaults filled in.

    Raises:
        SchemaError: on any structural problem.
    """
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    if "state" not in doc:
        raise SchemaError("scenario needs a 'state'")
    out = copy.deepcopy(doc)

    state = out["state"]
    _reject_unknown(state, {"kind", "params", "seed"}, "state")
    kind = state.get("kind")
    if kind not in _STATE_PARAMS:
        raise SchemaError(f"state.kind must be one of {sorted(_STATE_PARAMS)}")
    defaults = _STATE_PARAMS[kind]
    params = state.get("params", {})
    _reject_unknown(params, set(defaults), "state.params")
    full = {}
    for key, default in defaults.items():
        value = params.get(key, default)
        if key == "unit":
            if value not in ("rad", "deg"):
                raise SchemaError("state.params.unit must be 'rad' or 'deg'")
        elif kind == "gfmsv" and key.startswith("theta") and value is None:
            value = 45.0 if full.get("unit", params.get("unit", "rad")) == "deg" else math.pi / 4
        elif value is None:
            raise SchemaError(f"state.params.{key} is required for {kind}")
        elif key == "n":
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise SchemaError("state.params.n must be a positive integer")
        else:
            value = _number(value, f"state.params.{key}")
        full[key] = value
    state["params"] = full
    if kind.startswith("random"):
        seed = state.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
            raise SchemaError("state.seed must be a non-negative integer")
        state["seed"] = seed
    elif "seed" in state:
        raise SchemaError(f"state.seed is not used by {kind}")

    if "bath" in out:
        bath = out["bath"]
        _reject_unknown(bath, _BATH_KEYS, "bath")
        if "N" not in bath or "modes" not in bath:
            raise SchemaError("bath needs 'N' and 'modes'")
        bath["N"] = _number(bath["N"], "bath.N")
        modes = bath["modes"]
        if not isinstance(modes, list) or not modes or not all(
            isinstance(m, int) and not isinstance(m, bool) for m in modes
        ):
            raise SchemaError("bath.modes must be a non-empty list of integers")
        if "gamma" in bath:
            bath["gamma"] = _number(bath["gamma"], "bath.gamma")

    search = out.setdefault("search", {})
    _reject_unknown(search, _SEARCH_KEYS, "search")
    search.setdefault("tol", 1e-3)
    search.setdefault("tau_max", 0.9999)
    search.setdefault("grid_step", 0.01)
    for key in _SEARCH_KEYS:
        search[key] = _number(search[key], f"search.{key}")

    if "cuts" in out:
        cuts = out["cuts"]
        if not isinstance(cuts, list) or not all(isinstance(c, str) for c in cuts):
            raise SchemaError("cuts must be a list of strings such as '12:34'")
    if "tau" in out:
        out["tau"] = _number(out["tau"], "tau")
    return out


def load(path: str | Path) -> dict:
    """Read and validate a scenario file."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return validate(doc)


def build_state(scenario: dict) -> np.ndarray:
    """Covariance matrix described by ``scenario['state']``."""
    state = scenario["state"]
    kind, p = state["kind"], state["params"]
    try:
        if kind == "fmsv":
            return fmsv(p["r"])
        if kind == "gfmsv":
            scale = math.pi / 180 if p["unit"] == "deg" else 1.0
            return gfmsv(p["r"], p["theta1"] * scale, p["theta2"] * scale, p["theta3"] * scale)
        if kind == "tmsv-pair":
            return tmsv_pair(p["r"])
        if kind == "adesso":
            return adesso(p["s"], p["a"])
        if kind == "werner-wolf":
            return werner_wolf()
        if kind == "gww":
            return generalized_werner_wolf(GwwParams(**p))
        if kind == "random-pure":
            return random_pure(p["n"], p["energy"], state["seed"])
        return random_mixed_goe(p["n"], state["seed"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def build_bath(scenario: dict) -> BathSpec | None:
    bath = scenario.get("bath")
    if bath is None:
        return None
    try:
        return BathSpec(bath["N"], tuple(bath["modes"]), bath.get("gamma"))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def build_cuts(scenario: dict, n: int) -> list[Bipartition] | None:
    cuts = scenario.get("cuts")
    if cuts is None:
        return None
    try:
        return [Bipartition.parse(c, n) for c in cuts]
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
