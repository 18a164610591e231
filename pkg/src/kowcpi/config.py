"""Run configuration: nested dataclasses loaded from YAML/JSON with dotted overrides.

Precedence is command-line overrides > config file > defaults. Every
section is checked against the preconditions of the module that consumes
it before anything is computed; failures name the offending key path.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import datagen, kernels, predictor, window


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class DataConfig:
    source: str = "generator"
    csv: str | None = None
    kind: str = "nonstationary-seasonal"
    length: int = 2000
    burn_in: int = 200
    phi: float = 0.5
    sigma: float = 1.0


@dataclass
class WindowConfig:
    mode: str = "fixed"
    w: int = 10
    candidates: list[int] = field(default_factory=list)
    p_threshold: float = 0.01


@dataclass
class KernelConfig:
    family: str = "epanechnikov"
    bandwidth: float | None = None
    grid: list[float] = field(default_factory=list)
    grid_size: int = 15
    grid_span: float = 8.0
    reselect_every: int | None = None


@dataclass
class PredictorConfig:
    kind: str = "random-forest"
    d: int | None = None
    ridge: float = 0.0
    trees: int = 10
    max_depth: int = 8
    min_leaf: int = 3
    path: str | None = None


@dataclass
class RunConfig:
    data: DataConfig = field(default_factory=DataConfig)
    alpha: float = 0.1
    beta_step: float = 0.005
    history: int | None = None
    split: list[float] = field(default_factory=lambda: [0.7, 0.1, 0.2])
    window: WindowConfig = field(default_factory=WindowConfig)
    kernel: KernelConfig = field(default_factory=KernelConfig)
    predictor: PredictorConfig = field(default_factory=PredictorConfig)
    methods: list[str] = field(default_factory=lambda: ["kowcpi", "scp", "aci"])
    aci_gamma: float = 0.01
    rolling_m: int = 100
    seeds: list[int] = field(default_factory=lambda: [0])
    output: str = "out"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def window_policy(self) -> window.WindowPolicy:
        return window.WindowPolicy(
            self.window.mode, self.window.w, tuple(self.window.candidates), self.window.p_threshold
        )

    def lag_count(self) -> int:
        """Predictor lag count; defaults to the fixed window, else 10."""
        if self.predictor.d is not None:
            return self.predictor.d
        return self.window.w if self.window.mode == "fixed" else 10

    def predictor_spec(self) -> predictor.PredictorSpec:
        p = self.predictor
        return predictor.PredictorSpec(p.kind, self.lag_count(), p.ridge, p.trees, p.max_depth, p.min_leaf, p.path)

    def generator_spec(self, seed: int) -> datagen.GeneratorSpec:
        d = self.data
        return datagen.GeneratorSpec(d.kind, d.length, seed, d.burn_in, d.phi, d.sigma)


METHODS = ("kowcpi", "plain-nw", "scp", "aci")


def _build(cls, raw: Any, prefix: str):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(prefix or "<root>", f"expected a mapping, got {type(raw).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    kwargs = {}
    for key, value in raw.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in fields:
            raise ConfigError(path, "unknown key")
        section = _SECTION.get((cls, key))
        kwargs[key] = _build(section, value, path) if section else value
    return cls(**kwargs)


_SECTION = {
    (RunConfig, "data"): DataConfig,
    (RunConfig, "window"): WindowConfig,
    (RunConfig, "kernel"): KernelConfig,
    (RunConfig, "predictor"): PredictorConfig,
}


def _set_path(tree: dict, dotted: str, value: Any) -> None:
    parts = dotted.split(".")
    node = tree
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(dotted, "cannot override inside a scalar")
    node[parts[-1]] = value


def parse_override(item: str) -> tuple[str, Any]:
    """``key.path=value`` with the value parsed as YAML (so 0.1, [1,2], null work)."""
    if "=" not in item:
        raise ConfigError(item, "override must look like key.path=value")
    key, text = item.split("=", 1)
    return key.strip(), yaml.safe_load(text)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Read a YAML or JSON config (a run manifest is accepted too) and validate it."""
    tree: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("<file>", str(exc)) from None
        try:
            loaded = yaml.safe_load(text) or {}
        except yaml.YAMLError as exc:
            raise ConfigError("<file>", f"cannot parse {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("<root>", "config file must hold a mapping")
        tree = loaded.get("config", loaded) if "manifest_version" in loaded else loaded
    for key, value in (overrides or {}).items():
        _set_path(tree, key, value)
    try:
        cfg = _build(RunConfig, tree, "")
    except TypeError as exc:
        raise ConfigError("<root>", str(exc)) from None
    validate(cfg)
    return cfg


def _need(cond: bool, key: str, msg: str) -> None:
    if not cond:
        raise ConfigError(key, msg)


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(cfg: RunConfig) -> None:
    d = cfg.data
    _need(d.source in ("generator", "csv"), "data.source", "must be 'generator' or 'csv'")
    if d.source == "csv":
        _need(bool(d.csv), "data.csv", "required when data.source is 'csv'")
    else:
        _need(d.kind in datagen.KINDS, "data.kind", f"must be one of {datagen.KINDS}")
        _need(_is_int(d.length) and d.length > 0, "data.length", "must be a positive integer")
        _need(_is_int(d.burn_in) and d.burn_in >= 0, "data.burn_in", "must be a nonnegative integer")
        _need(_is_num(d.phi), "data.phi", "must be a real number")
        _need(_is_num(d.sigma) and d.sigma >= 0, "data.sigma", "must be >= 0")

    _need(_is_num(cfg.alpha) and 0 < cfg.alpha < 1, "alpha", "must lie in (0, 1)")
    _need(_is_num(cfg.beta_step) and cfg.beta_step > 0, "beta_step", "must be positive")
    if _is_num(cfg.alpha) and _is_num(cfg.beta_step):
        k = round(cfg.alpha / cfg.beta_step)
        _need(k >= 1 and abs(k * cfg.beta_step - cfg.alpha) <= 1e-12, "beta_step", "must divide alpha")
    _need(cfg.history is None or (_is_int(cfg.history) and cfg.history >= 3), "history", "must be an integer >= 3 or null")
    _need(
        isinstance(cfg.split, list) and len(cfg.split) == 3 and all(_is_num(s) and s > 0 for s in cfg.split),
        "split",
        "must be three positive fractions",
    )

    w = cfg.window
    _need(w.mode in window.MODES, "window.mode", f"must be one of {window.MODES}")
    _need(_is_int(w.w) and w.w >= 1, "window.w", "must be a positive integer")
    if cfg.history is not None:
        _need(w.w <= cfg.history - 2, "window.w", f"must lie in [1, history-2 = {cfg.history - 2}]")
    _need(isinstance(w.candidates, list) and all(_is_int(c) for c in w.candidates), "window.candidates", "must be a list of integers")
    try:
        policy = cfg.window_policy()
        if cfg.history is not None:
            policy.validate(cfg.history)
    except ValueError as exc:
        raise ConfigError("window.candidates", str(exc)) from None

    k = cfg.kernel
    _need(k.family in kernels.FAMILIES, "kernel.family", f"must be one of {kernels.FAMILIES}")
    _need(k.bandwidth is None or (_is_num(k.bandwidth) and k.bandwidth > 0), "kernel.bandwidth", "must be positive or null")
    _need(isinstance(k.grid, list) and all(_is_num(h) and h > 0 for h in k.grid), "kernel.grid", "must be a list of positive reals")
    _need(_is_int(k.grid_size) and k.grid_size >= 1, "kernel.grid_size", "must be a positive integer")
    _need(_is_num(k.grid_span) and k.grid_span >= 1, "kernel.grid_span", "must be >= 1")
    _need(k.reselect_every is None or (_is_int(k.reselect_every) and k.reselect_every >= 1), "kernel.reselect_every", "must be a positive integer or null")

    p = cfg.predictor
    _need(p.d is None or (_is_int(p.d) and p.d >= 1), "predictor.d", "must be a positive integer or null")
    try:
        cfg.predictor_spec()
    except ValueError as exc:
        raise ConfigError("predictor", str(exc)) from None

    _need(isinstance(cfg.methods, list) and cfg.methods, "methods", "must be a nonempty list")
    for i, m in enumerate(cfg.methods):
        _need(m in METHODS, f"methods[{i}]", f"must be one of {METHODS}")
    _need(_is_num(cfg.aci_gamma) and cfg.aci_gamma >= 0, "aci_gamma", "must be >= 0")
    _need(_is_int(cfg.rolling_m) and cfg.rolling_m >= 1, "rolling_m", "must be a positive integer")
    _need(isinstance(cfg.seeds, list) and cfg.seeds and all(_is_int(s) for s in cfg.seeds), "seeds", "must be a nonempty list of integers")
