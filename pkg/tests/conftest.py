from pathlib import Path

import pytest

from src.domain.models import LabeledCorpus
from src.domain.schemas import FeatureConfig, PreprocessConfig, TrainConfig
from src.services import pipeline_service
from tests.factories import corpus_of, separable_docs, skewed_docs, write_csv_corpus


# --- Fixtures de Datos ---

@pytest.fixture
def preprocess_config() -> PreprocessConfig:
    return PreprocessConfig()


@pytest.fixture
def separable_corpus() -> LabeledCorpus:
    return corpus_of(separable_docs())


@pytest.fixture
def skewed_corpus() -> LabeledCorpus:
    return corpus_of(skewed_docs())


@pytest.fixture
def separable_csv(tmp_path) -> Path:
    return write_csv_corpus(tmp_path / "separable.csv", separable_docs())


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # las pruebas no deben depender del entorno del desarrollador
    monkeypatch.delenv("SENTISCOPE_SEED", raising=False)
    monkeypatch.delenv("SENTISCOPE_LOG_LEVEL", raising=False)


# --- Fixtures de Comandos ---

@pytest.fixture
def fast_config(tmp_path) -> Path:
    """TOML con pocas rondas para que los comandos de entrenamiento sean rápidos."""
    path = tmp_path / "fast.toml"
    path.write_text("[train]\nn_rounds = 20\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def separable_model_path(tmp_path_factory) -> Path:
    """Pipeline entrenado sobre el corpus separable completo y guardado en disco."""
    model, _ = pipeline_service.train_pipeline(
        corpus_of(separable_docs()), PreprocessConfig(), FeatureConfig(), TrainConfig(n_rounds=20)
    )
    return pipeline_service.save(model, tmp_path_factory.mktemp("models") / "separable.json")
