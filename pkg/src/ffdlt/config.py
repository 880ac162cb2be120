"""Experiment configuration.

Config files are flat ``key = value`` lines; blank lines and lines starting
with ``#`` are ignored. Keys may use ``-`` or ``_``. Command-line overrides
take precedence over file values.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from typing import Any, Mapping, Optional

from .graph import FORMATS, KONECT_TIMESTAMPED, SNAP_SIGNED
from .seeding import StrategyError, canonical_strategy

MAX_DELAY_FRACTION = 0.75


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str
    model: str
    strategy: str
    k: int
    format: Optional[str] = None
    mode: Optional[str] = None
    strategy_b: Optional[str] = None
    delta: float = 0.0
    lam: float = 0.0
    delay_fraction: float = 0.0
    runs: int = 1000
    master_seed: int = 0
    prob_a: float = 1.0
    output: str = "ffdlt-out"
    horizon: Optional[int] = None
    newcomer_inverted: bool = False
    fixed_seeds_from_run: Optional[int] = None
    activation_loss: Optional[bool] = None

    def __post_init__(self):
        fmt = self.format or guess_format(self.dataset)
        object.__setattr__(self, "format", fmt)
        object.__setattr__(self, "mode", self.mode or default_mode(self.dataset))
        try:
            object.__setattr__(self, "strategy", canonical_strategy(self.strategy))
            if self.strategy_b is not None:
                object.__setattr__(self, "strategy_b", canonical_strategy(self.strategy_b))
        except StrategyError as exc:
            raise ConfigError(str(exc)) from None
        if self.activation_loss is None:
            object.__setattr__(self, "activation_loss", self.model == "nc" and self.lam > 0)
        self.validate()

    def validate(self) -> None:
        if self.model not in ("nc", "sp", "np"):
            raise ConfigError(f"model must be one of nc, sp, np (got {self.model!r})")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.mode not in ("full", "lcc"):
            raise ConfigError("mode must be 'full' or 'lcc'")
        if self.model != "nc" and self.strategy_b is None:
            raise ConfigError("competitive models need strategy_b for the second campaign")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if not 0.0 <= self.delay_fraction <= MAX_DELAY_FRACTION:
            raise ConfigError(f"delay_fraction must lie in [0, {MAX_DELAY_FRACTION}]")
        if not 0.0 <= self.prob_a <= 1.0:
            raise ConfigError("prob_a must lie in [0, 1]")
        if self.delta < 0 or self.lam < 0:
            raise ConfigError("delta and lambda must be non-negative")
        if self.horizon is not None and self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.fixed_seeds_from_run is not None and self.fixed_seeds_from_run < 0:
            raise ConfigError("fixed_seeds_from_run must be >= 0")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


# file key -> dataclass field
_KEY_ALIASES = {"lambda": "lam", "prob_A": "prob_a", "strategy_B": "strategy_b", "out": "output"}
_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_TYPES = {
    "dataset": str, "model": str, "strategy": str, "k": int, "format": str, "mode": str,
    "strategy_b": str, "delta": float, "lam": float, "delay_fraction": float, "runs": int,
    "master_seed": int, "prob_a": float, "output": str, "horizon": int,
    "newcomer_inverted": bool, "fixed_seeds_from_run": int, "activation_loss": bool,
}
VALID_KEYS = sorted(
    [k for k in _FIELDS if k != "lam"] + ["lambda"]
)


def guess_format(path: str) -> str:
    name = os.path.basename(path).lower()
    return KONECT_TIMESTAMPED if name.startswith("out.") or "konect" in name else SNAP_SIGNED


def default_mode(path: str) -> str:
    """Largest-SCC restriction except for Wiki-Conflict, which is used whole."""
    return "full" if "conflict" in os.path.basename(path).lower() else "lcc"


def _normalize_key(key: str) -> str:
    key = key.strip().replace("-", "_")
    key = _KEY_ALIASES.get(key, key)
    if key not in _FIELDS:
        raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(VALID_KEYS)}")
    return key


def _coerce(key: str, raw: Any) -> Any:
    if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("", "none", "null")):
        return None
    typ = _TYPES[key]
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"key {key!r}: expected {typ.__name__}, got {raw!r}") from None


def read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            if "=" not in s:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
            key, value = s.split("=", 1)
            values[key.strip()] = value.split(" #", 1)[0].strip()
    return values


def build_config(values: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None,
                 base_dir: Optional[str] = None) -> ExperimentConfig:
    merged: dict[str, Any] = {}
    for key, raw in values.items():
        key = _normalize_key(key)
        merged[key] = _coerce(key, raw)
    if base_dir and merged.get("dataset") and not os.path.isabs(merged["dataset"]):
        merged["dataset"] = os.path.join(base_dir, merged["dataset"])
    for key, raw in (overrides or {}).items():
        key = _normalize_key(key)
        merged[key] = _coerce(key, raw)
    for required in ("dataset", "model", "strategy", "k"):
        if merged.get(required) is None:
            raise ConfigError(f"missing required key {required!r}")
    merged = {k: v for k, v in merged.items() if v is not None}
    try:
        return ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(path: str, overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """Load ``path``, apply ``overrides`` and validate.

    Relative dataset paths resolve against the config file's directory.
    """
    return build_config(read_config_file(path), overrides, base_dir=os.path.dirname(os.path.abspath(path)))
