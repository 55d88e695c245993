"""Run configuration and its flat ``key = value`` file format."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Optional

from .core import Bounds, CddoParams


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dataset: Optional[str] = None
    label_column: str = "-1"
    train_fraction: float = 0.70
    fit_fraction: float = 0.80
    population_size: int = 30
    max_iterations: int = 100
    cr: float = 0.1
    sr_init: float = 0.9
    lr_init: float = 0.01
    pattern_size: int = 10
    lower_bound: float = 0.0
    upper_bound: float = 1.0
    threshold: float = 0.5
    weight_a: float = 0.90
    knn_k: int = 5
    gr_tolerance: float = 0.1
    seed: int = 0
    num_seeds: int = 1
    fixed_rates: bool = False
    boundary: str = "reflect"
    normalize_train_only: bool = False
    oracle_limit: int = 20
    output: Optional[str] = None

    def __post_init__(self):
        checks = [
            (0.0 < self.train_fraction < 1.0, "train_fraction must be in (0, 1)"),
            (0.0 < self.fit_fraction < 1.0, "fit_fraction must be in (0, 1)"),
            (0.0 < self.weight_a <= 1.0, "weight_a must be in (0, 1]"),
            (self.knn_k >= 1, "knn_k must be >= 1"),
            (self.num_seeds >= 1, "num_seeds must be >= 1"),
            (self.seed >= 0, "seed must be non-negative"),
            (self.lower_bound < self.upper_bound, "lower_bound must be below upper_bound"),
            (self.oracle_limit >= 1, "oracle_limit must be >= 1"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        try:
            self.cddo_params()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def cddo_params(self, seed: Optional[int] = None) -> CddoParams:
        return CddoParams(
            population_size=self.population_size,
            max_iterations=self.max_iterations,
            cr=self.cr,
            sr_init=self.sr_init,
            lr_init=self.lr_init,
            pattern_size=self.pattern_size,
            bounds=Bounds(self.lower_bound, self.upper_bound),
            gr_tolerance=self.gr_tolerance,
            seed=self.seed if seed is None else seed,
            fixed_rates=self.fixed_rates,
            boundary=self.boundary,
        )

    def with_seed(self, seed: int) -> "RunConfig":
        return replace(self, seed=seed)

    def as_dict(self) -> dict:
        return asdict(self)


_FIELDS = {f.name: f for f in fields(RunConfig)}
_TYPES = {"int": int, "float": float, "bool": bool, "str": str, "Optional[str]": str}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def field_type(name: str):
    return _TYPES[str(_FIELDS[name].type)]


def coerce(name: str, raw):
    """Convert a raw string (or value) to the type of RunConfig.<name>."""
    key = name.replace("-", "_")
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {name!r}")
    if not isinstance(raw, str):
        return raw
    typ = field_type(key)
    text = raw.strip()
    if typ is bool:
        if text.lower() in _TRUE:
            return True
        if text.lower() in _FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if text.lower() in ("", "none") and str(_FIELDS[key].type).startswith("Optional"):
        return None
    try:
        return typ(text)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {raw!r} as {typ.__name__}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = coerce(key, value)
    return out


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config_text(text, str(path))


def dump_config(config: RunConfig) -> str:
    lines = []
    for k, v in config.as_dict().items():
        if v is None:
            v = "none"
        elif isinstance(v, bool):
            v = "true" if v else "false"
        else:
            v = repr(v) if isinstance(v, float) else str(v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"


def build_config(file_values: Optional[dict] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults < config file < explicit overrides (e.g. CLI flags)."""
    values = {}
    values.update(file_values or {})
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
