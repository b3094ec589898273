"""Layered run configuration: defaults < TOML file < environment < flags.

Every key must be known; anything else is a :class:`ConfigError` raised
before a subcommand starts.

    [backend]    endpoint, model, temperature, max_tokens, timeout, retries,
                 max_in_flight, api_key, mock_table, backoff
    [toolchain]  converter, forge_compiler, exec_compiler, runtime,
                 compile_timeout, exec_timeout, compare
    [pipeline]   prompt_max_tokens, workers, skip_shims, instruction_file
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .execharness import COMPARE_MODES, DEFAULT_TIMEOUT
from .pipeline.backend import BackendConfig
from .pipeline.prompt import DEFAULT_MAX_TOKENS, INSTRUCTION
from .wat.convert import DEFAULT_CONVERTER

ENV_VARS = {
    "WATDECOMP_ENDPOINT": ("backend", "endpoint"),
    "WATDECOMP_API_KEY": ("backend", "api_key"),
    "WATDECOMP_MODEL": ("backend", "model"),
    "WATDECOMP_MOCK_TABLE": ("backend", "mock_table"),
}


@dataclass(frozen=True)
class ToolchainConfig:
    converter: str = DEFAULT_CONVERTER
    forge_compiler: str = "emcc"  # preset name or literal template
    exec_compiler: str = "emcc"
    runtime: str = "wasmtime-py"
    compile_timeout: float = 120.0
    exec_timeout: float = DEFAULT_TIMEOUT
    compare: str = "bytes"

    def __post_init__(self):
        if self.compare not in COMPARE_MODES:
            raise ConfigError(f"toolchain.compare must be one of {COMPARE_MODES}")
        if self.compile_timeout <= 0 or self.exec_timeout <= 0:
            raise ConfigError("timeouts must be positive")


@dataclass(frozen=True)
class PipelineConfig:
    prompt_max_tokens: int = DEFAULT_MAX_TOKENS
    workers: int = 1
    skip_shims: bool = True
    instruction_file: str | None = None

    def __post_init__(self):
        if self.workers < 1 or self.prompt_max_tokens < 1:
            raise ConfigError("pipeline.workers and pipeline.prompt_max_tokens must be >= 1")

    def instruction(self) -> str:
        if self.instruction_file is None:
            return INSTRUCTION
        try:
            return Path(self.instruction_file).read_text(encoding="utf-8").strip()
        except OSError as exc:
            raise ConfigError(f"instruction_file: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    backend: BackendConfig = field(default_factory=BackendConfig)
    toolchain: ToolchainConfig = field(default_factory=ToolchainConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)

    def as_dict(self, redact: bool = True) -> dict:
        out = {}
        for sec in ("backend", "toolchain", "pipeline"):
            obj = getattr(self, sec)
            out[sec] = {f.name: getattr(obj, f.name) for f in fields(obj)}
        if redact and out["backend"]["api_key"]:
            out["backend"]["api_key"] = "***"
        return out


_SECTIONS = {"backend": BackendConfig, "toolchain": ToolchainConfig, "pipeline": PipelineConfig}


def _coerce(section: str, key: str, value: Any, default: Any) -> Any:
    where = f"{section}.{key}"
    if value is None:
        return None
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("1", "true", "yes", "0", "false", "no"):
            return value.lower() in ("1", "true", "yes")
        raise ConfigError(f"{where}: expected a boolean, got {value!r}")
    if isinstance(default, (int, float)) and not isinstance(default, bool):
        try:
            return type(default)(value)
        except (TypeError, ValueError):
            raise ConfigError(f"{where}: expected {type(default).__name__}, got {value!r}") from None
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a string, got {value!r}")
    return value


def _apply(cfg: RunConfig, layer: Mapping[str, Mapping[str, Any]], origin: str) -> RunConfig:
    for section, values in layer.items():
        cls = _SECTIONS.get(section)
        if cls is None:
            raise ConfigError(f"{origin}: unknown section [{section}]")
        if not isinstance(values, Mapping):
            raise ConfigError(f"{origin}: [{section}] must be a table")
        current = getattr(cfg, section)
        known = {f.name: f for f in fields(cls)}
        changes = {}
        for key, value in values.items():
            if key not in known:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            changes[key] = _coerce(section, key, value, getattr(cls(), key))
        try:
            cfg = replace(cfg, **{section: replace(current, **changes)})
        except ConfigError as exc:
            raise ConfigError(f"{origin}: {exc}") from None
    return cfg


def load_config(
    path: str | Path | None = None,
    env: Mapping[str, str] | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        cfg = _apply(cfg, data, str(path))
    env = os.environ if env is None else env
    env_layer: dict[str, dict[str, str]] = {}
    for var, (section, key) in ENV_VARS.items():
        if var in env:
            env_layer.setdefault(section, {})[key] = env[var]
    cfg = _apply(cfg, env_layer, "environment")
    if overrides:
        cfg = _apply(cfg, {s: {k: v for k, v in kv.items() if v is not None} for s, kv in overrides.items()}, "flags")
    return cfg
