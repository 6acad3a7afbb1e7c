"""Resolución de configuración para los comandos: defaults → archivo TOML → flags."""
from __future__ import annotations
import logging
import tomllib
from pathlib import Path
from typing import Any, Dict, Optional

from src.config import get_settings
from src.domain.errors import ConfigError
from src.domain.schemas import ClassWeighting, CliConfig, PreprocessConfig, PreprocessSection
from src.infrastructure.infrastructure import load_default_stopwords, load_word_list, read_text

log = logging.getLogger(__name__)

_SEEDED_SECTIONS = ("split", "train")


def read_config_file(path: Optional[str | Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        return tomllib.loads(read_text(path))
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: TOML inválido ({e})") from e


def load_cli_config(path: Optional[str | Path] = None, *, seed: Optional[int] = None,
                    class_weight: Optional[str] = None) -> CliConfig:
    """Config validada. Semilla: --seed → archivo → SENTISCOPE_SEED → 42."""
    data = read_config_file(path)
    for name in _SEEDED_SECTIONS:
        section = data.setdefault(name, {})
        if not isinstance(section, dict):
            raise ConfigError(f"[{name}] debe ser una sección")
        if seed is not None:
            section["seed"] = seed
        elif "seed" not in section:
            section["seed"] = get_settings().SEED
    if class_weight is not None:
        data["train"]["class_weighting"] = ClassWeighting(class_weight).value
    config = CliConfig.model_validate(data)
    log.debug("[CONFIG] %s", config.model_dump(mode="json", by_alias=True))
    return config


def build_preprocess_config(section: PreprocessSection, *, stopwords_path: Optional[str] = None,
                            skip_stemming: bool = False) -> PreprocessConfig:
    path = stopwords_path or section.stopwords_path
    stopwords = load_word_list(path) if path else load_default_stopwords()
    roots = load_word_list(section.root_dictionary_path) if section.root_dictionary_path else None
    return PreprocessConfig(
        lowercase=section.lowercase,
        strip_urls=section.strip_urls,
        strip_mentions=section.strip_mentions,
        min_token_len=section.min_token_len,
        stopwords=stopwords,
        enable_stemming=section.enable_stemming and not skip_stemming,
        root_words=roots,
    )
