"""Run configuration: a JSON document validated before anything is allocated.

Example::

    {
      "model": {"name": "tilted_ising", "L": 21},
      "evolution": {"delta": "2^-15", "dt": 0.02, "t_max": 10},
      "observables": {"fit_window": [10, 20], "spectrum_max_m": 6},
      "resources": {"max_terms": 50000000, "checkpoint_every": 100},
      "output_dir": "runs/ti21",
      "threads": 1
    }

``model.name`` is one of ``tilted_ising`` (``L``), ``xx_ladder`` (``L``) or
``tfim`` (``extents``, ``h``, optional ``trotter`` = ``first`` | ``symmetrized``).
Thresholds may be numbers or strings such as ``"2^-15"``.
"""

from __future__ import annotations

import copy
import json
import re
from dataclasses import asdict, dataclass, field
from typing import Any

from .pauli_sum import DEFAULT_MAX_TERMS

MODELS = ("tilted_ising", "xx_ladder", "tfim")


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class ModelConfig:
    name: str
    L: int | None = None
    extents: list[int] | None = None
    h: float | None = None
    trotter: str = "first"


@dataclass
class EvolutionSection:
    delta: float
    dt: float
    t_max: float
    x_cutoff: int | None = None
    x_period: int = 5
    record_every: int = 1


@dataclass
class ObservablesSection:
    profile: bool
    msd: bool
    magnetization: bool
    fit_window: list[float] = field(default_factory=lambda: [10.0, 20.0])
    spectrum_max_m: int = 0


@dataclass
class ResourcesSection:
    # "auto" sizes the guard from physical memory at run time.
    max_terms: int | str = "auto"
    checkpoint_every: int = 0


@dataclass
class RunConfig:
    model: ModelConfig
    evolution: EvolutionSection
    observables: ObservablesSection
    resources: ResourcesSection
    output_dir: str = "spd-run"
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


_POW2 = re.compile(r"^\s*2\s*(\^|\*\*)\s*(-?\d+)\s*$")


def parse_threshold(value: Any, path: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _POW2.match(value)
        if m:
            return 2.0 ** int(m.group(2))
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(f"{path}: expected a number or '2^k', got {value!r}")


def _take(d: dict, key: str, path: str, kind, required: bool = False, default=None):
    if key not in d or d[key] is None:
        if required:
            raise ConfigError(f"{path}.{key}: required")
        return default
    v = d[key]
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            if isinstance(v, float) and v.is_integer():
                return int(v)
            raise ConfigError(f"{path}.{key}: expected an integer, got {v!r}")
    elif kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}.{key}: expected a number, got {v!r}")
        v = float(v)
    elif kind is bool:
        if not isinstance(v, bool):
            raise ConfigError(f"{path}.{key}: expected true/false, got {v!r}")
    elif kind is str:
        if not isinstance(v, str):
            raise ConfigError(f"{path}.{key}: expected a string, got {v!r}")
    return v


def _no_extra(d: dict, allowed: set[str], path: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{path}.{sorted(extra)[0]}: unknown field")


def _section(raw: dict, key: str) -> dict:
    v = raw.get(key, {})
    if v is None:
        v = {}
    if not isinstance(v, dict):
        raise ConfigError(f"{key}: expected an object")
    return v


def validate(raw: Any) -> RunConfig:
    """Check a parsed JSON document and return a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>: expected a JSON object")
    _no_extra(raw, {"model", "evolution", "observables", "resources", "output_dir", "threads"}, "<root>")

    m = _section(raw, "model")
    _no_extra(m, {"name", "L", "extents", "h", "trotter"}, "model")
    name = _take(m, "name", "model", str, required=True)
    if not name:
        raise ConfigError("model.name: must not be empty")
    if name not in MODELS:
        raise ConfigError(f"model.name: unknown model {name!r}; choose from {', '.join(MODELS)}")
    model = ModelConfig(name)
    if name in ("tilted_ising", "xx_ladder"):
        model.L = _take(m, "L", "model", int, required=True)
        if model.L < 3 or model.L % 2 == 0:
            raise ConfigError(f"model.L: must be odd and >= 3, got {model.L}")
        for k in ("extents", "h"):
            if m.get(k) is not None:
                raise ConfigError(f"model.{k}: not used by {name}")
    else:
        ext = m.get("extents")
        if not isinstance(ext, list) or not 1 <= len(ext) <= 3:
            raise ConfigError("model.extents: expected a list of 1 to 3 integers")
        for i, e in enumerate(ext):
            if isinstance(e, bool) or not isinstance(e, int) or e < 1:
                raise ConfigError(f"model.extents[{i}]: expected a positive integer, got {e!r}")
            if e % 2 == 0:
                raise ConfigError(f"model.extents[{i}]: must be odd so a central site exists")
        model.extents = list(ext)
        model.h = _take(m, "h", "model", float, required=True)
        model.trotter = _take(m, "trotter", "model", str, default="first")
        if model.trotter not in ("first", "symmetrized"):
            raise ConfigError("model.trotter: expected 'first' or 'symmetrized'")
        if m.get("L") is not None:
            raise ConfigError("model.L: not used by tfim (use extents)")

    e = _section(raw, "evolution")
    _no_extra(e, {"delta", "dt", "t_max", "x_cutoff", "x_period", "record_every"}, "evolution")
    if "delta" not in e:
        raise ConfigError("evolution.delta: required")
    delta = parse_threshold(e["delta"], "evolution.delta")
    if delta < 0:
        raise ConfigError("evolution.delta: must be >= 0")
    dt = _take(e, "dt", "evolution", float, required=True)
    if dt <= 0:
        raise ConfigError("evolution.dt: must be > 0")
    t_max = _take(e, "t_max", "evolution", float, required=True)
    if t_max < 0:
        raise ConfigError("evolution.t_max: must be >= 0")
    steps = round(t_max / dt)
    if abs(steps * dt - t_max) > 1e-9 * max(1.0, t_max):
        raise ConfigError(f"evolution.t_max: {t_max} is not a whole number of dt={dt} steps")
    x_cutoff = _take(e, "x_cutoff", "evolution", int)
    if x_cutoff is not None and x_cutoff < 0:
        raise ConfigError("evolution.x_cutoff: must be >= 0")
    x_period = _take(e, "x_period", "evolution", int, default=5)
    if x_period < 1:
        raise ConfigError("evolution.x_period: must be >= 1")
    record_every = _take(e, "record_every", "evolution", int, default=1)
    if record_every < 1:
        raise ConfigError("evolution.record_every: must be >= 1")
    evo = EvolutionSection(delta, dt, t_max, x_cutoff, x_period, record_every)

    o = _section(raw, "observables")
    _no_extra(o, {"profile", "msd", "magnetization", "fit_window", "spectrum_max_m"}, "observables")
    chain = name != "tfim"
    obs = ObservablesSection(
        profile=_take(o, "profile", "observables", bool, default=chain),
        msd=_take(o, "msd", "observables", bool, default=chain),
        magnetization=_take(o, "magnetization", "observables", bool, default=not chain),
    )
    if not chain and (obs.profile or obs.msd):
        raise ConfigError("observables.profile: correlation profiles need a 1D density model")
    if obs.msd and not obs.profile and chain:
        obs.profile = True
    fw = o.get("fit_window", [10.0, 20.0])
    if (
        not isinstance(fw, list)
        or len(fw) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in fw)
        or not fw[0] < fw[1]
    ):
        raise ConfigError("observables.fit_window: expected [t_lo, t_hi] with t_lo < t_hi")
    obs.fit_window = [float(fw[0]), float(fw[1])]
    obs.spectrum_max_m = _take(o, "spectrum_max_m", "observables", int, default=0)
    if obs.spectrum_max_m < 0:
        raise ConfigError("observables.spectrum_max_m: must be >= 0")

    r = _section(raw, "resources")
    _no_extra(r, {"max_terms", "checkpoint_every"}, "resources")
    mt = r.get("max_terms", "auto")
    if mt is None or mt == "auto":
        mt = "auto"
    else:
        mt = _take(r, "max_terms", "resources", int)
        if not 1 <= mt <= DEFAULT_MAX_TERMS:
            raise ConfigError(f"resources.max_terms: must be 'auto' or in 1..{DEFAULT_MAX_TERMS}")
    res = ResourcesSection(
        max_terms=mt,
        checkpoint_every=_take(r, "checkpoint_every", "resources", int, default=0),
    )
    if res.checkpoint_every < 0:
        raise ConfigError("resources.checkpoint_every: must be >= 0")

    out = _take(raw, "output_dir", "<root>", str, default="spd-run")
    threads = _take(raw, "threads", "<root>", int, default=1)
    if threads < 1:
        raise ConfigError("threads: must be >= 1")
    return RunConfig(model, evo, obs, res, out, threads)


def apply_overrides(raw: dict, assignments: list[str]) -> dict:
    """Apply ``dotted.key=value`` overrides; values are parsed as JSON when possible."""
    raw = copy.deepcopy(raw)
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"--set {item!r}: expected key=value")
        key, text = item.split("=", 1)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = key.strip().split(".")
        for p in parts[:-1]:
            nxt = node.setdefault(p, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"{key}: {p} is not an object")
            node = nxt
        node[parts[-1]] = value
    return raw


def load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"<file>: {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"<file>: {path} is not valid JSON ({exc})") from None
