"""
Election configuration.

Values come from, in increasing priority: defaults, VERIVOTE_* environment
variables (or a .env file), a JSON config file, and explicit overrides
such as CLI flags.
"""

import hashlib
import json
import math
from pathlib import Path
from typing import Any, List, Optional, Union

from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from verivote.constants import DEFAULT_TOKEN_MULTIPLE
from verivote.errors import VerivoteError
from verivote.groups import SecurityProfile
from verivote.utils.parallel_executor import ExecutionMode


class ConfigError(VerivoteError):
    """Raised when a configuration file is missing or invalid"""
    pass


class ElectionConfig(BaseSettings):
    """Everything needed to reproduce a simulated election from its seed."""

    model_config = SettingsConfigDict(env_prefix="VERIVOTE_", env_file=".env", extra="ignore")

    booths: int = Field(default=4, ge=1)
    voters_per_booth: int = Field(default=50, ge=1)
    candidates: int = Field(default=5, ge=2)
    token_multiple: float = Field(default=DEFAULT_TOKEN_MULTIPLE, ge=1.0)
    security_profile: SecurityProfile = SecurityProfile.TEST
    seed: str = Field(default="verivote", min_length=1)
    output_dir: Path = Path("election")
    vote_weights: Optional[List[float]] = None
    audit_fraction: float = Field(default=0.05, ge=0.0, lt=1.0)
    publish_bb2: bool = True
    ack_loss_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    execution_mode: ExecutionMode = ExecutionMode.SEQUENTIAL
    max_workers: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_weights(self):
        if self.vote_weights is not None:
            if len(self.vote_weights) != self.candidates:
                raise ValueError("vote_weights needs one weight per candidate")
            if any(w < 0 for w in self.vote_weights) or sum(self.vote_weights) <= 0:
                raise ValueError("vote_weights must be non-negative with a positive sum")
        return self

    @property
    def m(self) -> int:
        return self.candidates

    @property
    def tokens_per_booth(self) -> int:
        return math.ceil(self.voters_per_booth * self.token_multiple)

    @property
    def election_id(self) -> str:
        return hashlib.sha256(self.seed.encode("utf-8")).hexdigest()[:12]

    @classmethod
    def from_file(cls, path: Union[str, Path], **overrides: Any) -> "ElectionConfig":
        """
        Load a JSON config file; overrides that are not None win.

        Raises:
            ConfigError: If the file is missing, not JSON, or fails validation
        """
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}", field="config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}", field="config") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object", field="config")
        return cls.build(**{**data, **{k: v for k, v in overrides.items() if v is not None}})

    @classmethod
    def build(cls, **values: Any) -> "ElectionConfig":
        """Construct from keyword values, dropping those left as None"""
        try:
            return cls(**{k: v for k, v in values.items() if v is not None})
        except ValidationError as exc:
            raise ConfigError(f"invalid configuration: {exc}") from exc

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)
