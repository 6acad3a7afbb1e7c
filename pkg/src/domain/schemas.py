# src/domain/schemas.py
from __future__ import annotations
from enum import Enum
from typing import Dict, FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# -------- Split --------
class SplitSpec(FrozenModel):
    test_fraction: float = Field(default=0.2, gt=0.0, lt=1.0)
    seed: int = Field(default=42, ge=0, lt=2**64)
    stratified: bool = True


# -------- Preprocesamiento --------
class PreprocessConfig(FrozenModel):
    lowercase: bool = True
    strip_urls: bool = True
    strip_mentions: bool = True
    min_token_len: int = Field(default=2, ge=1)
    stopwords: FrozenSet[str] = Field(default_factory=lambda: _default_stopwords())
    enable_stemming: bool = True
    # Diccionario opcional de raíces; None = stemming sin diccionario
    root_words: Optional[FrozenSet[str]] = None

    @field_validator("stopwords")
    @classmethod
    def _stopwords_validas(cls, v: FrozenSet[str]) -> FrozenSet[str]:
        malas = sorted(w for w in v if not (w.isalpha() and w == w.lower()))
        if malas:
            raise ValueError(f"stopwords inválidas (solo letras minúsculas): {malas[:5]}")
        return v


def _default_stopwords() -> FrozenSet[str]:
    # import diferido: infraestructura depende de domain, no al revés
    from src.infrastructure.infrastructure import load_default_stopwords

    return load_default_stopwords()


# -------- Features --------
class FeatureConfig(FrozenModel):
    min_df: int = Field(default=2, ge=1)
    max_features: Optional[int] = Field(default=5000, ge=1)
    sublinear_tf: bool = False


# -------- GBDT --------
class ClassWeighting(str, Enum):
    NONE = "none"
    BALANCED = "balanced"


class TrainConfig(FrozenModel):
    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    n_rounds: int = Field(default=200, ge=1)
    learning_rate: float = Field(default=0.1, gt=0.0, le=1.0)
    max_depth: int = Field(default=6, ge=1)
    reg_lambda: float = Field(default=1.0, ge=0.0, alias="lambda")
    gamma: float = Field(default=0.0, ge=0.0)
    min_child_weight: float = Field(default=1.0, ge=0.0)
    class_weighting: ClassWeighting = ClassWeighting.NONE
    seed: int = Field(default=42, ge=0, lt=2**64)


class RoundLog(BaseModel):
    round: int
    log_loss: float


class TrainLog(BaseModel):
    initial_log_loss: float
    rounds: List[RoundLog]
    wall_time_seconds: float = 0.0


# -------- Evaluación --------
class ConfusionMatrix(FrozenModel):
    class_names: List[str]
    counts: List[List[int]]

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


class ClassMetrics(BaseModel):
    name: str
    precision: float
    recall: float
    f1: float
    support: int


class MetricsReport(BaseModel):
    accuracy: float
    per_class: List[ClassMetrics]
    macro_f1: float
    weighted_f1: float


# -------- EDA --------
class LengthSummary(BaseModel):
    count: int
    mean: float
    std: float
    min: float
    q1: float
    median: float
    q3: float
    max: float


class ScopeLengths(BaseModel):
    count: int
    chars: LengthSummary
    tokens: LengthSummary


class LengthStats(BaseModel):
    overall: ScopeLengths
    per_sentiment: Dict[str, ScopeLengths]


class NgramRow(BaseModel):
    ngram: str
    count: int


class NgramTable(BaseModel):
    n: int
    scope: str
    rows: List[NgramRow]


class LabelShare(BaseModel):
    count: int
    fraction: float


class CleansingSample(BaseModel):
    id: str
    raw: str
    cleansed: str
    tokens: List[str]


class CleansingReport(BaseModel):
    samples: List[CleansingSample]
    residual_non_alpha_docs: int
    emptied_docs: int
    raw_chars: int
    cleansed_chars: int


class EdaReport(BaseModel):
    label_distribution: Dict[str, LabelShare]
    emotion_distribution: Optional[Dict[str, LabelShare]] = None
    emotion_sentiment_crosstab: Optional[Dict[str, Dict[str, int]]] = None
    length_stats: LengthStats
    ngram_tables: List[NgramTable]
    word_frequencies: List[NgramTable]
    cleansing: Optional[CleansingReport] = None


# -------- Predicción --------
class Prediction(BaseModel):
    label: str
    probabilities: Dict[str, float]


# -------- CLI --------
class PreprocessSection(FrozenModel):
    """Sección [preprocess] del TOML: igual a PreprocessConfig pero con rutas."""

    lowercase: bool = True
    strip_urls: bool = True
    strip_mentions: bool = True
    min_token_len: int = Field(default=2, ge=1)
    enable_stemming: bool = True
    stopwords_path: Optional[str] = None
    root_dictionary_path: Optional[str] = None


class CliConfig(FrozenModel):
    split: SplitSpec = SplitSpec()
    preprocess: PreprocessSection = PreprocessSection()
    features: FeatureConfig = FeatureConfig()
    train: TrainConfig = TrainConfig()
