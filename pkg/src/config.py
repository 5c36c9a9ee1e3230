"""
Configuration management for kgcomplete.

Two layers, as before: environment settings (``KGC_*`` variables and ``.env``)
and the YAML pipeline file. YAML sections are validated into pydantic models;
CLI overrides are applied on top of both.
"""

import copy
import hashlib
import json
import os
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.errors import ConfigError

load_dotenv()

STRATEGIES = ("uniform", "node2vec", "metapath", "edge2vec")
Strategy = Literal["uniform", "node2vec", "metapath", "edge2vec"]

_PLACEHOLDER = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)(?::-([^}]*))?\}")


class RuntimeSettings(BaseSettings):
    """Environment-level settings (``KGC_`` prefix)."""
    config: str = "config.yaml"
    log_level: Optional[str] = None
    output_dir: Optional[str] = None
    seed: Optional[int] = None

    model_config = SettingsConfigDict(
        env_prefix="KGC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PathsConfig(_Section):
    triples: Optional[str] = None
    type_rules: Optional[str] = None
    metapath: Optional[str] = None
    test_sets: List[str] = Field(default_factory=list)
    output_dir: str = "artifacts"

    def artifact(self, *parts: str) -> Path:
        """Path of an artifact under the output directory."""
        return Path(self.output_dir).joinpath(*parts)

    @property
    def graph_cache(self) -> Path:
        return self.artifact("graph.kgc")

    def embedding_path(self, strategy: str, binary: bool = True) -> Path:
        return self.artifact("embeddings", f"{strategy}.{'bin' if binary else 'txt'}")

    def corpus_path(self, strategy: str) -> Path:
        return self.artifact("corpus", f"{strategy}.walks")

    def manifest_path(self, name: str) -> Path:
        return self.artifact("manifests", f"{name}.json")


class GraphSettings(_Section):
    skip_literals: bool = False
    type_rules: List[Tuple[str, str]] = Field(default_factory=list)


class WalkConfig(_Section):
    strategy: Strategy = "node2vec"
    strategies: List[Strategy] = Field(default_factory=lambda: ["node2vec"])
    walk_length: int = Field(20, ge=2)
    walks_per_node: int = Field(10, ge=1)
    p: float = Field(1.0, gt=0)
    q: float = Field(1.0, gt=0)
    metapath: List[str] = Field(
        default_factory=lambda: ["pubchem_compound", "gene", "pubchem_compound"]
    )
    em_iterations: int = Field(5, ge=1)
    em_window: int = Field(2, ge=1)
    em_walks_per_node: int = Field(1, ge=1)
    seed: int = Field(42, ge=0)
    workers: int = Field(1, ge=1)

    def for_strategy(self, strategy: str) -> "WalkConfig":
        """Copy of this config bound to one strategy."""
        return self.model_copy(update={"strategy": strategy})


class TrainConfig(_Section):
    dim: int = Field(128, ge=1)
    window: int = Field(5, ge=1)
    negatives: int = Field(5, ge=1)
    epochs: int = Field(5, ge=0)
    learning_rate: float = Field(0.025, gt=0)
    min_lr_fraction: float = Field(1e-4, gt=0, le=1)
    min_count: int = Field(1, ge=1)
    noise_power: float = 0.75
    loss_sample_size: int = Field(10000, ge=1)
    seed: int = Field(42, ge=0)
    workers: int = Field(1, ge=1)
    deterministic: bool = True
    save_context: bool = False


class BaselineConfig(_Section):
    feature_mode: Literal["hadamard", "concat"] = "hadamard"
    relations: Optional[List[str]] = None
    n_pos: int = Field(1000, ge=0)
    n_neg: int = Field(1000, ge=0)
    l2: float = Field(1e-4, ge=0)
    learning_rate: float = Field(0.1, gt=0)
    max_epochs: int = Field(200, ge=1)
    tolerance: float = Field(1e-6, ge=0)
    validation_fraction: float = Field(0.2, ge=0, lt=1)
    seed: int = Field(42, ge=0)


class EvaluationConfig(_Section):
    k_values: List[int] = Field(default_factory=lambda: [10, 50, 100])

    @model_validator(mode="after")
    def _positive_k(self) -> "EvaluationConfig":
        if any(k < 1 for k in self.k_values):
            raise ValueError("every K must be >= 1")
        return self


class RankConfig(_Section):
    k: int = Field(20, ge=1)
    target_type: Optional[str] = None
    exclude_existing: bool = False


class LoggingConfig(_Section):
    level: str = "INFO"


class PipelineConfig(_Section):
    """The validated pipeline configuration."""
    seed: int = Field(42, ge=0)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    graph: GraphSettings = Field(default_factory=GraphSettings)
    walk: WalkConfig = Field(default_factory=WalkConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    baseline: BaselineConfig = Field(default_factory=BaselineConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    rank: RankConfig = Field(default_factory=RankConfig)
    logging: LoggingConfig = Field(default_factory=LoggingConfig)

    @model_validator(mode="after")
    def _propagate_seed(self) -> "PipelineConfig":
        for section in (self.walk, self.train, self.baseline):
            if "seed" not in section.model_fields_set:
                section.seed = self.seed
        return self

    def require_paths(self, *names: str) -> None:
        """
        Check that the named input paths are set and exist.

        Raises:
            ConfigError: a path is unset or missing on disk
        """
        for name in names:
            value = getattr(self.paths, name)
            if value is None or value == []:
                raise ConfigError(f"paths.{name} is not set")
            for item in value if isinstance(value, list) else [value]:
                if not os.path.exists(item):
                    raise ConfigError(f"paths.{name}: file not found: {item}")


def model_hash(model: BaseModel) -> str:
    """Short stable hash of a validated config model."""
    payload = json.dumps(model.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _expand_placeholders(value: Any) -> Any:
    """Expand ``${VAR:-default}`` placeholders in YAML string values."""
    if isinstance(value, dict):
        return {k: _expand_placeholders(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_expand_placeholders(v) for v in value]
    if isinstance(value, str):
        return _PLACEHOLDER.sub(lambda m: os.getenv(m.group(1), m.group(2) or ""), value)
    return value


def _set_dotted(data: Dict[str, Any], key: str, value: Any) -> None:
    parts = key.split(".")
    node = data
    for part in parts[:-1]:
        child = node.get(part)
        if child is None:
            child = node[part] = {}
        elif not isinstance(child, dict):
            raise ConfigError(f"cannot override {key}: {part} is not a section")
        node = child
    node[parts[-1]] = value


def parse_override(text: str) -> Tuple[str, Any]:
    """
    Parse a ``section.key=value`` override; the value is read as YAML.

    Raises:
        ConfigError: the text has no ``=``
    """
    if "=" not in text:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as e:
        raise ConfigError(f"override {key}: cannot parse value {raw!r}") from e
    return key.strip(), value


class Config:
    """Main configuration class."""

    def __init__(self, config_path: Optional[str] = None):
        self.settings = RuntimeSettings()
        self.config_path = config_path or self.settings.config
        self._overrides: Dict[str, Any] = {}
        self._load_yaml_config()
        self._pipeline_config_cache: Optional[PipelineConfig] = None

    def _load_yaml_config(self):
        """Load YAML configuration file."""
        if os.path.exists(self.config_path):
            with open(self.config_path, "r", encoding="utf-8") as f:
                try:
                    raw = yaml.safe_load(f) or {}
                except yaml.YAMLError as e:
                    raise ConfigError(f"{self.config_path}: invalid YAML: {e}") from e
            if not isinstance(raw, dict):
                raise ConfigError(f"{self.config_path}: top level must be a mapping")
            self.yaml_config = _expand_placeholders(raw)
        else:
            self.yaml_config = {}

    def apply_overrides(self, overrides: Dict[str, Any]):
        """Apply dotted-key overrides (CLI flags) on top of file values."""
        self._overrides.update({k: v for k, v in overrides.items() if v is not None})
        self._pipeline_config_cache = None

    def get_pipeline_config(self) -> PipelineConfig:
        """
        Get the validated pipeline configuration.

        Raises:
            ConfigError: validation failed
        """
        if self._pipeline_config_cache is not None:
            return self._pipeline_config_cache

        data = copy.deepcopy(self.yaml_config)
        if self.settings.output_dir:
            _set_dotted(data, "paths.output_dir", self.settings.output_dir)
        if self.settings.seed is not None:
            _set_dotted(data, "seed", self.settings.seed)
        if self.settings.log_level:
            _set_dotted(data, "logging.level", self.settings.log_level)
        for key, value in self._overrides.items():
            _set_dotted(data, key, value)

        try:
            result = PipelineConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration ({self.config_path}):\n{e}") from e

        self._pipeline_config_cache = result
        return result

    @property
    def pipeline_config(self) -> PipelineConfig:
        return self.get_pipeline_config()

    def get_paths_config(self) -> PathsConfig:
        return self.get_pipeline_config().paths

    def get_graph_settings(self) -> GraphSettings:
        return self.get_pipeline_config().graph

    def get_walk_config(self) -> WalkConfig:
        return self.get_pipeline_config().walk

    def get_train_config(self) -> TrainConfig:
        return self.get_pipeline_config().train

    def get_baseline_config(self) -> BaselineConfig:
        return self.get_pipeline_config().baseline

    def get_evaluation_config(self) -> EvaluationConfig:
        return self.get_pipeline_config().evaluation

    def get_rank_config(self) -> RankConfig:
        return self.get_pipeline_config().rank

    def config_hash(self) -> str:
        return model_hash(self.get_pipeline_config())


# Global config instance
config = Config()
