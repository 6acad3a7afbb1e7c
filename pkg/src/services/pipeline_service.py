"""Composición preprocesamiento → TF-IDF → GBDT en un único artefacto JSON."""
from __future__ import annotations
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import ValidationError

from src.domain.errors import CorruptPayloadError, VersionMismatchError
from src.domain.models import CLASS_NAMES, LabeledCorpus
from src.domain.schemas import (
    FeatureConfig, PreprocessConfig, Prediction, RoundLog, TrainConfig, TrainLog,
)
from src.infrastructure.infrastructure import read_text, write_text
from src.services import features_service, gbdt_service
from src.services.features_service import TfIdfModel
from src.services.gbdt_service import GbdtModel
from src.services.preprocess_service import preprocess_corpus_texts, preprocess_document

log = logging.getLogger(__name__)

PIPELINE_FORMAT_VERSION = "sentiscope-1"
_SECTIONS = ("format_version", "class_names", "preprocess", "tfidf", "gbdt")


@dataclass(frozen=True)
class PipelineModel:
    class_names: Tuple[str, ...]
    preprocess: PreprocessConfig
    tfidf: TfIdfModel
    gbdt: GbdtModel
    format_version: str = PIPELINE_FORMAT_VERSION


# ---------- Entrenamiento ----------
def train_pipeline(train: LabeledCorpus, preprocess_config: PreprocessConfig,
                   feature_config: FeatureConfig, train_config: TrainConfig) -> Tuple[PipelineModel, TrainLog]:
    started = time.perf_counter()
    docs = preprocess_corpus_texts([d.text for d in train.documents], preprocess_config)
    tfidf, vectors = features_service.fit_transform(docs, feature_config)
    labels = [d.sentiment.index for d in train.documents]
    gbdt = gbdt_service.train(
        vectors, labels, train_config, n_classes=len(CLASS_NAMES), feature_dim=tfidf.size
    )
    elapsed = time.perf_counter() - started

    history = gbdt.loss_history
    train_log = TrainLog(
        initial_log_loss=history[0],
        rounds=[RoundLog(round=i, log_loss=loss) for i, loss in enumerate(history[1:], start=1)],
        wall_time_seconds=elapsed,
    )
    log.info("[TRAIN] pipeline entrenado: docs=%d vocabulario=%d rondas=%d en %.2fs",
             len(train), tfidf.size, len(gbdt.rounds), elapsed)
    model = PipelineModel(
        class_names=CLASS_NAMES,
        preprocess=preprocess_config,
        tfidf=tfidf,
        gbdt=gbdt,
    )
    return model, train_log


# ---------- Predicción ----------
def predict(model: PipelineModel, text: str) -> Prediction:
    tokens = preprocess_document(text, model.preprocess)
    vector = features_service.transform(tokens, model.tfidf)
    margins = gbdt_service.predict_margin(model.gbdt, vector)
    proba = gbdt_service.softmax(margins)
    label = int(np.argmax(margins))
    return Prediction(
        label=model.class_names[label],
        probabilities={name: float(p) for name, p in zip(model.class_names, proba)},
    )


def predict_many(model: PipelineModel, texts: List[str]) -> List[Prediction]:
    return [predict(model, t) for t in texts]


def top_terms(model: PipelineModel, k: int, kind: str = "gain") -> List[Tuple[str, float]]:
    """Términos más importantes (score desc, término asc); se omiten los de score 0."""
    scores = gbdt_service.feature_importance(model.gbdt, kind)
    ranked = sorted(
        ((term, float(scores[i])) for i, term in enumerate(model.tfidf.terms) if scores[i] > 0),
        key=lambda item: (-item[1], item[0]),
    )
    return ranked[:k]


# ---------- Persistencia ----------
def to_payload(model: PipelineModel) -> Dict[str, Any]:
    preprocess = model.preprocess.model_dump(mode="json")
    preprocess["stopwords"] = sorted(model.preprocess.stopwords)
    if model.preprocess.root_words is not None:
        preprocess["root_words"] = sorted(model.preprocess.root_words)
    return {
        "format_version": model.format_version,
        "class_names": list(model.class_names),
        "preprocess": preprocess,
        "tfidf": model.tfidf.to_payload(),
        "gbdt": gbdt_service.model_to_payload(model.gbdt),
    }


def dumps(model: PipelineModel) -> str:
    return json.dumps(to_payload(model), ensure_ascii=False, sort_keys=True)


def from_payload(payload: Any) -> PipelineModel:
    if not isinstance(payload, dict):
        raise CorruptPayloadError("El modelo no es un objeto JSON")
    version = payload.get("format_version")
    if version != PIPELINE_FORMAT_VERSION:
        raise VersionMismatchError(
            f"Versión de modelo {version!r} no soportada (se espera {PIPELINE_FORMAT_VERSION!r})"
        )
    missing = [s for s in _SECTIONS if s not in payload]
    if missing:
        raise CorruptPayloadError(f"Faltan secciones en el modelo: {', '.join(missing)}")

    try:
        preprocess = PreprocessConfig.model_validate(payload["preprocess"])
    except ValidationError as e:
        raise CorruptPayloadError(f"Sección preprocess inválida: {e.errors()[:1]}") from e
    if not isinstance(payload["tfidf"], dict):
        raise CorruptPayloadError("Sección tfidf inválida")
    tfidf = TfIdfModel.from_payload(payload["tfidf"])
    gbdt = gbdt_service.model_from_payload(payload["gbdt"])

    class_names = payload["class_names"]
    if not isinstance(class_names, list) or not all(isinstance(c, str) for c in class_names):
        raise CorruptPayloadError("class_names inválido")
    if gbdt.feature_dim != tfidf.size:
        raise CorruptPayloadError(
            f"feature_dim={gbdt.feature_dim} no coincide con el vocabulario ({tfidf.size})"
        )
    if len(class_names) != gbdt.n_classes:
        raise CorruptPayloadError(
            f"{len(class_names)} clases declaradas pero el gbdt tiene {gbdt.n_classes}"
        )
    return PipelineModel(
        class_names=tuple(class_names),
        preprocess=preprocess,
        tfidf=tfidf,
        gbdt=gbdt,
        format_version=version,
    )


def save(model: PipelineModel, path: str | Path) -> Path:
    path = write_text(path, dumps(model) + "\n")
    log.info("[MODEL] modelo guardado en %s", path)
    return path


def load(path: str | Path) -> PipelineModel:
    text = read_text(path)
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorruptPayloadError(f"{path}: JSON inválido ({e.msg})") from e
    model = from_payload(payload)
    log.info("[MODEL] modelo cargado desde %s (vocabulario=%d)", path, model.tfidf.size)
    return model
