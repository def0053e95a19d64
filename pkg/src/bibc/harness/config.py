"""Scenario configuration: flat JSON, defaults equal to the reference setup."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from ..metrics import DETECTOR_MODES, PROJECTION_MODES


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ScenarioConfig:
    # geometry
    panA_center: tuple = (0.0, 0.0)
    panB_center: tuple = (6.0, 0.0)
    M: int = 16
    N: int = 16
    d_ant: float = 0.5
    wavelength: float = 0.1
    bd_position: tuple = (3.0, 3.0)
    reflector_y: float = -4.0
    g_smc: float = 0.5
    # slot plan
    J_p: int = 1
    tau_p: int = 16
    J_d: int = 2
    tau_d: int = 16
    # processing
    K: int = 3
    snr_p_db: float = 20.0
    snr_d_db: float = 2.0
    projection_mode: str = "estimated"
    detector_mode: str = "full"
    normalize_backscatter: bool = False
    epsilon: float = 1e-8
    max_iters: int = 50
    # Monte Carlo; trials=None means the preset default
    trials: int | None = None
    seed: int = 0
    theta_grid_deg: tuple | None = None
    bd_y_sweep: tuple | None = None
    thresholds: tuple | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    def theta_grid(self) -> np.ndarray:
        if self.theta_grid_deg is None:
            return np.arange(-90.0, 90.0 + 0.5, 1.0)
        return np.asarray(self.theta_grid_deg, dtype=float)

    def y_sweep(self) -> np.ndarray:
        if self.bd_y_sweep is None:
            return np.round(np.arange(0.0, 30.0 + 0.25, 0.5), 10)
        return np.asarray(self.bd_y_sweep, dtype=float)


_FIELDS = {f.name: f for f in fields(ScenarioConfig)}
_INT_KEYS = {"M", "N", "J_p", "tau_p", "J_d", "tau_d", "K", "max_iters", "trials", "seed"}
_POINT_KEYS = {"panA_center", "panB_center", "bd_position"}
_LIST_KEYS = {"theta_grid_deg", "bd_y_sweep", "thresholds"}


def _coerce(key, value):
    if value is None:
        if key in {"trials", "theta_grid_deg", "bd_y_sweep", "thresholds"}:
            return None
        raise ConfigError(key, "must not be null")
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return int(value)
    if key in _POINT_KEYS:
        if not isinstance(value, (list, tuple)) or len(value) != 2:
            raise ConfigError(key, "expected a 2-element [x, y] list")
        return (float(value[0]), float(value[1]))
    if key in _LIST_KEYS:
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError(key, "expected a non-empty list of numbers")
        return tuple(float(v) for v in value)
    if key == "normalize_backscatter":
        if not isinstance(value, bool):
            raise ConfigError(key, "expected true or false")
        return value
    if key in {"projection_mode", "detector_mode"}:
        return str(value)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def validate(cfg: ScenarioConfig) -> ScenarioConfig:
    positive = ["M", "N", "J_p", "tau_p", "J_d", "tau_d", "max_iters"]
    for key in positive:
        if getattr(cfg, key) < 1:
            raise ConfigError(key, f"must be >= 1, got {getattr(cfg, key)}")
    if cfg.trials is not None and cfg.trials < 1:
        raise ConfigError("trials", f"must be >= 1, got {cfg.trials}")
    if cfg.tau_p < cfg.N:
        raise ConfigError("tau_p", f"tau_p >= N required (tau_p={cfg.tau_p}, N={cfg.N})")
    if cfg.tau_d < cfg.M:
        raise ConfigError("tau_d", f"tau_d >= M required (tau_d={cfg.tau_d}, M={cfg.M})")
    if not 0 <= cfg.K < cfg.M:
        raise ConfigError("K", f"0 <= K < M required (K={cfg.K}, M={cfg.M})")
    if cfg.J_d % 2:
        raise ConfigError("J_d", "must be even for the alternating reflection pattern")
    for key in ("d_ant", "wavelength", "epsilon"):
        if not getattr(cfg, key) > 0:
            raise ConfigError(key, "must be positive")
    if cfg.g_smc < 0:
        raise ConfigError("g_smc", "must be non-negative")
    if cfg.projection_mode not in PROJECTION_MODES:
        raise ConfigError("projection_mode", f"must be one of {PROJECTION_MODES}")
    if cfg.detector_mode not in DETECTOR_MODES:
        raise ConfigError("detector_mode", f"must be one of {DETECTOR_MODES}")
    half = (max(cfg.M, cfg.N) - 1) / 2 * cfg.d_ant * cfg.wavelength
    lowest = min(cfg.panA_center[1] - half, cfg.panB_center[1] - half, cfg.bd_position[1])
    if cfg.bd_y_sweep is not None:
        lowest = min(lowest, min(cfg.bd_y_sweep))
    if not cfg.reflector_y < lowest:
        raise ConfigError("reflector_y", f"must lie below every antenna and BD position (< {lowest})")
    return cfg


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    values = {k: _coerce(k, v) for k, v in data.items()}
    return validate(ScenarioConfig(**values))


def load_config(path) -> ScenarioConfig:
    """Parse and validate a JSON config; an empty file yields the defaults."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    if not text.strip():
        return validate(ScenarioConfig())
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def dump_config(cfg: ScenarioConfig) -> str:
    """Canonical JSON echo: sorted keys, two-space indent, trailing newline."""
    data = {k: (list(v) if isinstance(v, tuple) else v) for k, v in cfg.to_dict().items()}
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
