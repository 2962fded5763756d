"""Pipeline configuration: one YAML file drives every subcommand.

Unknown keys are rejected; flag overrides are applied after file parsing and
the resulting config hash is stamped into every artifact manifest.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

import yaml


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ReasonerConfig:
    hidden_size: int = 256
    epochs: int = 100
    lr: float = 1e-3
    batch: int = 128


@dataclass(frozen=True)
class TransferConfig:
    c: float = 1.0
    kernel_width_mode: str = "scale"  # 1 / (n_features * feature variance)


@dataclass(frozen=True)
class DdmConfig:
    steepness: float = 6.0
    lam: float = 0.5
    f: int = 5


@dataclass(frozen=True)
class PpoSection:
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    lr: float = 3e-4
    update_epochs: int = 10
    minibatch: int = 64
    rollout_steps: int = 1024
    ent_coef: float = 0.0
    total_steps: int = 20000
    pure_feature_dim: int = 128


@dataclass(frozen=True)
class ControllerConfig:
    rt: float = 3.0
    delta_rt: float = 0.0
    accu: float = 0.9
    pc: int = 20
    tc: int = 3


@dataclass(frozen=True)
class PathsConfig:
    dataset: str = "data/trials.csv"
    outputs: str = "outputs"


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    reasoner: ReasonerConfig = field(default_factory=ReasonerConfig)
    transfer: TransferConfig = field(default_factory=TransferConfig)
    ddm: DdmConfig = field(default_factory=DdmConfig)
    ppo: PpoSection = field(default_factory=PpoSection)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(payload).hexdigest()[:16]


_SECTIONS = {
    "reasoner": ReasonerConfig,
    "transfer": TransferConfig,
    "ddm": DdmConfig,
    "ppo": PpoSection,
    "controller": ControllerConfig,
    "paths": PathsConfig,
}


def _build_section(cls, raw: dict, where: str):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {sorted(unknown)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"bad {where} section: {exc}") from exc


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Parse YAML (defaults when path is None) and apply flag overrides.

    Overrides use dotted keys, e.g. ``{"reasoner.epochs": 5, "seed": 1}``.
    """
    raw: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                loaded = yaml.safe_load(fh) or {}
            except yaml.YAMLError as exc:
                raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config root must be a mapping: {path}")
        raw = loaded
    unknown = set(raw) - set(_SECTIONS) - {"seed"}
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    for dotted, value in (overrides or {}).items():
        parts = dotted.split(".")
        if len(parts) == 1:
            raw[parts[0]] = value
        elif len(parts) == 2 and parts[0] in _SECTIONS:
            raw.setdefault(parts[0], {})[parts[1]] = value
        else:
            raise ConfigError(f"bad override key: {dotted}")
    kwargs = {}
    if "seed" in raw:
        kwargs["seed"] = int(raw["seed"])
    for name, cls in _SECTIONS.items():
        section = raw.get(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"section {name} must be a mapping")
        kwargs[name] = _build_section(cls, section, name)
    return PipelineConfig(**kwargs)
