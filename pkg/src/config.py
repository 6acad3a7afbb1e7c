import logging

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Parámetros de entorno. Todas las variables usan el prefijo SENTISCOPE_."""

    model_config = SettingsConfigDict(env_prefix="SENTISCOPE_", extra="ignore")

    SERVICE_NAME: str = "sentiscope"
    VERSION: str = "0.1.0"

    # Semilla usada cuando ni el flag --seed ni el archivo de config la definen
    SEED: int = Field(default=42, ge=0, lt=2**64)
    LOG_LEVEL: str = "INFO"

    @field_validator("LOG_LEVEL")
    @classmethod
    def _nivel_valido(cls, v: str) -> str:
        level = v.strip().upper()
        if level not in logging.getLevelNamesMapping():
            raise ValueError(f"nivel de logging desconocido: {v!r}")
        return level


def get_settings() -> Settings:
    # Se relee el entorno en cada llamada (útil en tests con monkeypatch)
    return Settings()
