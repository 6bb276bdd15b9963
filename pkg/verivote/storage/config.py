"""
Artifact storage configuration.
"""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class StorageSettings(BaseSettings):
    """Artifact storage settings"""

    model_config = SettingsConfigDict(env_prefix="VERIVOTE_", env_file=".env", case_sensitive=False,
                                      extra="ignore")

    # 'local' or 'memory'
    storage_type: str = Field(default="local")
    storage_root: str = Field(default="election")


# Global settings instance
storage_settings = StorageSettings()
