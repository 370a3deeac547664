"""Model configuration and the ``key = value`` config file format."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict

from simast_review.errors import ConfigError


Variant = Literal["full", "nogcn", "concat"]


class ModelConfig(BaseSettings):
    """Hyperparameters of the encoder, classifier and optimizer.

    Only constructor arguments are read: no environment variables and no dotenv files.
    """

    model_config = SettingsConfigDict(frozen=True, extra="forbid", case_sensitive=False)

    # Architecture
    variant: Variant = Field("full", description="full, nogcn (no GCN layers) or concat")
    embedding_dim: int = Field(300, gt=0, description="Embedding size m")
    hidden_dim: int = Field(300, gt=0, description="GRU hidden size h per direction")
    gcn_layers: int = Field(3, ge=0, description="Number of GCN layers")
    leaky_slope: float = Field(0.01, ge=0.0, description="LeakyReLU negative slope")
    normalization: Literal["row", "symmetric"] = Field(
        "row", description="Propagation matrix normalization"
    )
    sparse_threshold: int = Field(
        256, ge=1, description="Use a sparse propagation matrix above this node count"
    )

    # Loss
    l2_lambda: float = Field(1e-5, ge=0.0, description="L2 coefficient over weight matrices")
    weight_original: float | None = Field(
        None, gt=0.0, description="Weight w^O of rejected samples (balanced when unset)"
    )
    weight_revised: float | None = Field(
        None, gt=0.0, description="Weight w^R of accepted samples (balanced when unset)"
    )

    # Optimizer
    learning_rate: float = Field(1e-3, gt=0.0, description="Adam learning rate")
    adam_beta1: float = Field(0.9, ge=0.0, lt=1.0, description="Adam first-moment decay")
    adam_beta2: float = Field(0.999, ge=0.0, lt=1.0, description="Adam second-moment decay")
    adam_epsilon: float = Field(1e-8, gt=0.0, description="Adam epsilon")
    init_seed_offset: int = Field(0, description="Added to the run seed for weight init")

    @model_validator(mode="after")
    def _weights_together(self) -> ModelConfig:
        if (self.weight_original is None) != (self.weight_revised is None):
            raise ValueError("weight_original and weight_revised must be set together")
        return self

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @property
    def uses_gcn(self) -> bool:
        return self.variant != "nogcn"

    @property
    def representation_dim(self) -> int:
        return 2 * self.hidden_dim

    @property
    def class_weights(self) -> tuple[float, float] | None:
        if self.weight_original is None or self.weight_revised is None:
            return None
        return self.weight_original, self.weight_revised


def build_model_config(**values: Any) -> ModelConfig:
    """Construct a :class:`ModelConfig`, turning validation failures into ConfigError."""
    try:
        return ModelConfig(**values)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in error['loc']) or 'config'}: {error['msg']}"
            for error in exc.errors()
        )
        raise ConfigError(problems) from exc


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are ignored."""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().lower()
        if not sep or not key:
            raise ConfigError(f"line {number}: expected 'key = value', got {raw.strip()!r}")
        if key in values:
            raise ConfigError(f"line {number}: duplicate key {key!r}")
        values[key] = value.strip()
    return values


def load_model_config(path: str | Path | None = None, **overrides: Any) -> ModelConfig:
    """Read a config file (optional) and apply keyword overrides on top."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from exc
        except UnicodeDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid UTF-8") from exc
        values.update(parse_config_text(text))
    values.update({key: value for key, value in overrides.items() if value is not None})
    return build_model_config(**values)
