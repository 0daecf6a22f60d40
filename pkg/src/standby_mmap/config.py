"""JSON model configuration: parsing, validation, bundled examples.

A config document has sections ``unit`` (degradation, shocks,
inspections), ``repair``, ``maintenance``, ``vacation`` (either explicit
``{v, V}`` matrices or ``{family, params}``), ``fleet`` ``{n, R}``, and
``economics``.  Matrices are arrays of row arrays.  Parse and validation
failures carry the dotted field path of the offending entry.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .economics import EconomicParams
from .errors import ModelError
from .mmap_builder import SystemModel
from .optimize import vacation_ph
from .ph import DiscretePH
from .unit import OnlineUnitModel

BUNDLED = ("paper-example", "paper-example-no-inspection", "toy-n1")


class ConfigError(ValueError):
    """Invalid configuration; ``path`` holds the dotted field path."""

    def __init__(self, path: str, detail: str):
        self.path = path
        super().__init__(f"{path}: {detail}")


def bundled_config_path(name: str) -> Path:
    """Filesystem path of a bundled example config."""
    stem = name.removesuffix(".json")
    if stem not in BUNDLED:
        raise ConfigError(name, f"unknown bundled config; have {', '.join(BUNDLED)}")
    return Path(str(resources.files("standby_mmap").joinpath(f"configs/{stem}.json")))


def _section(doc: dict, key: str, path: str) -> dict:
    if key not in doc:
        raise ConfigError(f"{path}{key}", "missing section")
    if not isinstance(doc[key], dict):
        raise ConfigError(f"{path}{key}", "must be an object")
    return doc[key]


def _vector(sec: dict, key: str, path: str) -> np.ndarray:
    if key not in sec:
        raise ConfigError(f"{path}.{key}", "missing vector")
    try:
        v = np.asarray(sec[key], dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "not numeric") from None
    if v.ndim != 1:
        raise ConfigError(f"{path}.{key}", f"expected a vector, got shape {v.shape}")
    return v


def _matrix(sec: dict, key: str, path: str) -> np.ndarray:
    if key not in sec:
        raise ConfigError(f"{path}.{key}", "missing matrix")
    try:
        m = np.asarray(sec[key], dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "not numeric") from None
    if m.ndim != 2:
        raise ConfigError(f"{path}.{key}", f"expected a matrix, got shape {m.shape}")
    return m


def _number(sec: dict, key: str, path: str) -> float:
    if key not in sec:
        raise ConfigError(f"{path}.{key}", "missing value")
    try:
        return float(sec[key])
    except (TypeError, ValueError):
        raise ConfigError(f"{path}.{key}", "not numeric") from None


def _ph(sec: dict, alpha_key: str, S_key: str, path: str) -> DiscretePH:
    return DiscretePH(_vector(sec, alpha_key, path), _matrix(sec, S_key, path))


def parse_config(doc: dict) -> tuple[SystemModel, EconomicParams]:
    """Deserialize and validate a config document."""
    u = _section(doc, "unit", "")
    shock = _ph(_section(u, "shock", "unit."), "gamma", "L", "unit.shock")
    insp = _ph(_section(u, "inspection", "unit."), "eta", "M", "unit.inspection")
    unit = OnlineUnitModel(
        alpha=_vector(u, "alpha", "unit"), T=_matrix(u, "T", "unit"),
        T_r0=_vector(u, "T_r0", "unit"), T_nr0=_vector(u, "T_nr0", "unit"),
        m1=int(_number(u, "m1", "unit")),
        W=_matrix(u, "W", "unit"),
        W_r0=_vector(u, "W_r0", "unit"), W_nr0=_vector(u, "W_nr0", "unit"),
        omega0=_number(u, "omega0", "unit"), shock=shock, inspection=insp)

    rep = _ph(_section(doc, "repair", ""), "beta1", "S1", "repair")
    pm = _ph(_section(doc, "maintenance", ""), "beta2", "S2", "maintenance")

    vsec = _section(doc, "vacation", "")
    if "family" in vsec:
        family = vsec["family"]
        params = vsec.get("params")
        if family not in ("geometric", "erlang2"):
            raise ConfigError("vacation.family", f"unknown family {family!r}")
        want = 1 if family == "geometric" else 2
        if not isinstance(params, (list, tuple)) or len(params) != want:
            raise ConfigError("vacation.params", f"{family} needs {want} parameter(s)")
        vac = vacation_ph(family, tuple(float(p) for p in params))
    else:
        vac = _ph(vsec, "v", "V", "vacation")

    fleet = _section(doc, "fleet", "")
    model = SystemModel(unit=unit, repair=rep, maintenance=pm, vacation=vac,
                        n=int(_number(fleet, "n", "fleet")),
                        R=int(_number(fleet, "R", "fleet")))

    e = _section(doc, "economics", "")
    try:
        econ = EconomicParams(
            B=_number(e, "B", "economics"), c0=_vector(e, "c0", "economics"),
            cr1=_vector(e, "cr1", "economics"), cr2=_vector(e, "cr2", "economics"),
            H=_number(e, "H", "economics"), C=_number(e, "C", "economics"),
            G=_number(e, "G", "economics"), fcr=_number(e, "fcr", "economics"),
            fmi=_number(e, "fmi", "economics"), fnu=_number(e, "fnu", "economics"))
    except ModelError as exc:
        raise ConfigError("economics", str(exc)) from None

    verdict = model.validate()
    if not verdict.ok:
        raise ConfigError(_verdict_path(verdict), f"{verdict.kind}: {verdict.detail}")
    if econ.c0.size != unit.m:
        raise ConfigError("economics.c0", f"length {econ.c0.size} != m={unit.m}")
    if econ.cr1.size != rep.order or econ.cr2.size != pm.order:
        raise ConfigError("economics.cr1", "cr1/cr2 lengths must match repair orders")
    return model, econ


_VERDICT_PATHS = {
    "T": "unit.T", "W": "unit.W", "alpha": "unit.alpha",
    "shock": "unit.shock", "inspection": "unit.inspection",
    "repair": "repair", "maintenance": "maintenance", "vacation": "vacation",
    "m1": "unit.m1", "R": "fleet.R",
}


def _verdict_path(verdict) -> str:
    detail = verdict.detail or ""
    for token, path in _VERDICT_PATHS.items():
        if detail.startswith(token) or f" {token} " in f" {detail} ":
            return path
    if verdict.kind == "InvalidThreshold":
        return "fleet.R"
    if verdict.kind == "InvalidMinorCount":
        return "unit.m1"
    return "model"


def load_config(path: str | Path) -> tuple[SystemModel, EconomicParams]:
    p = Path(path)
    try:
        text = p.read_text()
    except FileNotFoundError:
        raise
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(str(p), f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError(str(p), "top level must be an object")
    return parse_config(doc)
