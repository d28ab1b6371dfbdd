"""Flat INI-style config files for models, estimators and experiment plans.

Sections and keys::

    [model]
    drift = 0                       # constant drift, or
    drift.times = 0, 0.5, 1         # piecewise-linear drift knots
    drift.values = 0, 0.2, 0
    volatility.kind = constant      # constant | piecewise-linear | stochastic
    volatility.value = 1
    volatility.times = ...          # piecewise-linear only
    volatility.values = ...
    volatility.level/kappa/vol_of_vol/floor/cap/initial   # stochastic only
    class.r = 1.6
    class.A = 7.4

    [jump.0]
    kind = symmetric-stable         # compound-poisson | symmetric-stable | truncated-stable
    stable_index = 1.5
    scale = 1
    truncation = 1                  # truncated-stable
    small_jump_cutoff = 0.001       # truncated-stable, optional
    intensity = 1                   # compound-poisson
    jump_law = atoms                # atoms | normal
    jump_law.values = -1, 1
    jump_law.probs = 0.5, 0.5
    jump_law.mean = 0
    jump_law.std = 1

    [estimator.0]
    variant = truncated             # realized | truncated | multipower | spectral
    varpi = 0.49
    trunc_scale = 4
    k = 2
    frequency = 12.5                # spectral: explicit u, or
    frequency.r = 1.6               # spectral: rule from (r, A)
    frequency.A = 7.4

    [plan]
    n_grid = 256, 1024, 4096
    replications = 500
    base_seed = 1
    threads = 1

``jump.<i>`` and ``estimator.<i>`` sections are read in index order.
"""

from __future__ import annotations

import configparser
import io
import math
from pathlib import Path
from typing import Iterable

from .estimators import EstimatorConfig, FrequencyRule
from .harness import ExperimentPlan
from .models import Deterministic, JumpComponent, JumpLaw, ModelSpec, StochasticVolatility

__all__ = [
    "ConfigError",
    "read_config",
    "parse_config",
    "apply_overrides",
    "model_from_config",
    "estimators_from_config",
    "plan_from_config",
    "model_to_config",
    "estimator_to_config",
    "dump_config",
]


class ConfigError(ValueError):
    pass


def _new_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # keys are case-sensitive (class.A)
    return cp


def parse_config(text: str) -> configparser.ConfigParser:
    cp = _new_parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    return cp


def read_config(path: str | Path) -> configparser.ConfigParser:
    return parse_config(Path(path).read_text())


def apply_overrides(cp: configparser.ConfigParser, overrides: Iterable[str]) -> None:
    """Apply ``section.key=value`` overrides; the longest matching section name wins."""
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        key, value = (s.strip() for s in item.split("=", 1))
        parts = key.split(".")
        for cut in range(len(parts) - 1, 0, -1):
            section = ".".join(parts[:cut])
            if cp.has_section(section) or cut == 1:
                break
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, ".".join(parts[cut:]), value)


def _floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _float(sec, key, default=None) -> float | None:
    if key not in sec:
        return default
    try:
        return float(sec[key])
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key} = {sec[key]!r} is not a number") from exc


def _indexed(cp: configparser.ConfigParser, prefix: str) -> list:
    found = []
    for name in cp.sections():
        head, _, idx = name.rpartition(".")
        if head == prefix:
            try:
                found.append((int(idx), cp[name]))
            except ValueError as exc:
                raise ConfigError(f"bad section index in [{name}]") from exc
    return [sec for _, sec in sorted(found, key=lambda t: t[0])]


def _deterministic(sec, name: str, default: float) -> Deterministic:
    if f"{name}.values" in sec:
        values = _floats(sec[f"{name}.values"])
        times = _floats(sec.get(f"{name}.times", "0"))
        return Deterministic(values, times)
    value = _float(sec, f"{name}.value", None)
    if value is None:
        value = _float(sec, name, default)
    return Deterministic.constant(value)


def model_from_config(cp: configparser.ConfigParser) -> ModelSpec:
    if not cp.has_section("model"):
        raise ConfigError("missing [model] section")
    sec = cp["model"]
    try:
        drift = _deterministic(sec, "drift", 0.0)
        kind = sec.get("volatility.kind", "constant")
        if kind == "stochastic":
            vol = StochasticVolatility(
                level=_float(sec, "volatility.level", 1.0),
                kappa=_float(sec, "volatility.kappa", 5.0),
                vol_of_vol=_float(sec, "volatility.vol_of_vol", 0.5),
                floor=_float(sec, "volatility.floor", 0.1),
                cap=_float(sec, "volatility.cap", 2.0),
                initial=_float(sec, "volatility.initial", None),
            )
        elif kind in ("constant", "piecewise-linear"):
            vol = _deterministic(sec, "volatility", 1.0)
        else:
            raise ConfigError(f"unknown volatility.kind {kind!r}")
        jumps = tuple(_jump_from_section(j) for j in _indexed(cp, "jump"))
        return ModelSpec(drift, vol, jumps,
                         _float(sec, "class.r", 0.0), _float(sec, "class.A", math.inf))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _jump_from_section(sec) -> JumpComponent:
    kind = sec.get("kind")
    if kind is None:
        raise ConfigError(f"[{sec.name}] needs a kind")
    if kind == "compound-poisson":
        law_kind = sec.get("jump_law", "atoms")
        if law_kind == "atoms":
            values = _floats(sec.get("jump_law.values", "1"))
            probs = _floats(sec.get("jump_law.probs", ",".join(["%r" % (1 / len(values))] * len(values))))
            law = JumpLaw("atoms", values, probs)
        else:
            law = JumpLaw(law_kind, mean=_float(sec, "jump_law.mean", 0.0),
                          std=_float(sec, "jump_law.std", 1.0))
        return JumpComponent.compound_poisson(_float(sec, "intensity", 1.0), law)
    return JumpComponent(
        kind,
        stable_index=_float(sec, "stable_index", 1.0),
        scale=_float(sec, "scale", 1.0),
        truncation=_float(sec, "truncation", 1.0),
        small_jump_cutoff=_float(sec, "small_jump_cutoff", None),
    )


def _estimator_from_section(sec) -> EstimatorConfig:
    variant = sec.get("variant", "realized")
    freq = None
    if "frequency.r" in sec or "frequency.A" in sec:
        freq = FrequencyRule(_float(sec, "frequency.r", 0.0), _float(sec, "frequency.A", 1.0))
    elif "frequency" in sec:
        freq = _float(sec, "frequency")
    try:
        k = int(sec.get("k", "2"))
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] k must be an integer") from exc
    try:
        return EstimatorConfig(variant, _float(sec, "varpi", 0.4), _float(sec, "trunc_scale", 1.0), k, freq)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def estimators_from_config(cp: configparser.ConfigParser) -> tuple[EstimatorConfig, ...]:
    return tuple(_estimator_from_section(s) for s in _indexed(cp, "estimator"))


def plan_from_config(cp: configparser.ConfigParser) -> ExperimentPlan:
    if not cp.has_section("plan"):
        raise ConfigError("missing [plan] section")
    sec = cp["plan"]
    try:
        n_grid = tuple(int(v) for v in _floats(sec.get("n_grid", "")))
        return ExperimentPlan(
            model_from_config(cp),
            estimators_from_config(cp),
            n_grid,
            int(sec.get("replications", "100")),
            int(sec.get("base_seed", "0")),
            int(sec.get("threads", "1")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _num(v: float) -> str:
    return format(float(v), ".17g")


def _list(vs) -> str:
    return ", ".join(_num(v) for v in vs)


def _put_deterministic(out: dict, name: str, f: Deterministic) -> None:
    if f.is_constant and len(f.values) == 1:
        out[f"{name}.value" if name == "volatility" else name] = _num(f.values[0])
    else:
        out[f"{name}.times"] = _list(f.times)
        out[f"{name}.values"] = _list(f.values)


def model_to_config(model: ModelSpec, cp: configparser.ConfigParser | None = None) -> configparser.ConfigParser:
    cp = cp or _new_parser()
    sec: dict = {}
    _put_deterministic(sec, "drift", model.drift)
    vol = model.volatility
    if isinstance(vol, StochasticVolatility):
        sec["volatility.kind"] = "stochastic"
        for key in ("level", "kappa", "vol_of_vol", "floor", "cap"):
            sec[f"volatility.{key}"] = _num(getattr(vol, key))
        if vol.initial is not None:
            sec["volatility.initial"] = _num(vol.initial)
    else:
        sec["volatility.kind"] = "constant" if len(vol.values) == 1 else "piecewise-linear"
        _put_deterministic(sec, "volatility", vol)
    sec["class.r"] = _num(model.class_r)
    sec["class.A"] = _num(model.class_A)
    cp["model"] = sec
    for i, comp in enumerate(model.jumps):
        js: dict = {"kind": comp.kind}
        if comp.kind == "compound-poisson":
            js["intensity"] = _num(comp.intensity)
            law = comp.jump_law
            js["jump_law"] = law.kind
            if law.kind == "atoms":
                js["jump_law.values"] = _list(law.values)
                js["jump_law.probs"] = _list(law.probs)
            else:
                js["jump_law.mean"] = _num(law.mean)
                js["jump_law.std"] = _num(law.std)
        else:
            js["stable_index"] = _num(comp.stable_index)
            js["scale"] = _num(comp.scale)
            if comp.kind == "truncated-stable":
                js["truncation"] = _num(comp.truncation)
                if comp.small_jump_cutoff is not None:
                    js["small_jump_cutoff"] = _num(comp.small_jump_cutoff)
        cp[f"jump.{i}"] = js
    return cp


def estimator_to_config(cfgs: Iterable[EstimatorConfig], cp: configparser.ConfigParser | None = None
                        ) -> configparser.ConfigParser:
    cp = cp or _new_parser()
    for i, cfg in enumerate(cfgs):
        sec = {"variant": cfg.variant}
        if cfg.variant == "truncated":
            sec["varpi"] = _num(cfg.varpi)
            sec["trunc_scale"] = _num(cfg.trunc_scale)
        elif cfg.variant == "multipower":
            sec["k"] = str(cfg.k)
        elif cfg.variant == "spectral":
            rule = cfg.freq_rule
            if isinstance(rule, FrequencyRule):
                sec["frequency.r"] = _num(rule.r)
                sec["frequency.A"] = _num(rule.A)
            else:
                sec["frequency"] = _num(rule)
        cp[f"estimator.{i}"] = sec
    return cp


def dump_config(cp: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
