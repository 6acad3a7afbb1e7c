"""Vectorización TF-IDF (idf suavizado + normalización L2) sobre listas de tokens."""
from __future__ import annotations
import logging
import math
from collections import Counter
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from src.domain.errors import CorruptPayloadError, EmptyCorpusError, EmptyVocabularyError
from src.domain.models import SparseVector
from src.domain.schemas import FeatureConfig

log = logging.getLogger(__name__)


class TfIdfModel(BaseModel):
    model_config = ConfigDict(frozen=True)

    vocabulary: Dict[str, int]
    document_frequency: Tuple[int, ...]
    idf: Tuple[float, ...]
    n_train_docs: int
    config: FeatureConfig

    @property
    def size(self) -> int:
        return len(self.vocabulary)

    @property
    def terms(self) -> List[str]:
        """Términos en orden de columna (lexicográfico)."""
        return sorted(self.vocabulary, key=self.vocabulary.__getitem__)

    # ---------- Serialización ----------
    def to_payload(self) -> Dict[str, Any]:
        return {
            "terms": self.terms,
            "document_frequency": list(self.document_frequency),
            "idf": list(self.idf),
            "n_train_docs": self.n_train_docs,
            "config": self.config.model_dump(mode="json"),
        }

    @classmethod
    def from_payload(cls, payload: Dict[str, Any]) -> "TfIdfModel":
        try:
            terms = list(payload["terms"])
            df = tuple(int(x) for x in payload["document_frequency"])
            idf = tuple(float(x) for x in payload["idf"])
            n_docs = int(payload["n_train_docs"])
            config = FeatureConfig.model_validate(payload["config"])
        except (KeyError, TypeError, ValueError) as e:
            raise CorruptPayloadError(f"Sección tfidf inválida: {e}") from e
        if not (len(terms) == len(df) == len(idf)) or terms != sorted(terms) or len(set(terms)) != len(terms):
            raise CorruptPayloadError("Sección tfidf inconsistente: términos, df e idf no cuadran")
        return cls(
            vocabulary={t: i for i, t in enumerate(terms)},
            document_frequency=df,
            idf=idf,
            n_train_docs=n_docs,
            config=config,
        )


def smoothed_idf(n_docs: int, df: np.ndarray) -> np.ndarray:
    return np.log((1.0 + n_docs) / (1.0 + df)) + 1.0


def fit(train_docs: Sequence[Sequence[str]], config: FeatureConfig) -> TfIdfModel:
    if len(train_docs) == 0:
        raise EmptyCorpusError("No hay documentos para ajustar el vocabulario")

    df_counter: Counter[str] = Counter()
    for doc in train_docs:
        df_counter.update(set(doc))

    kept = [(term, df) for term, df in df_counter.items() if df >= config.min_df]
    if not kept:
        raise EmptyVocabularyError(
            f"Ningún término alcanza min_df={config.min_df} en {len(train_docs)} documentos"
        )
    if config.max_features is not None and len(kept) > config.max_features:
        # mayor frecuencia documental primero; empates por orden lexicográfico
        kept.sort(key=lambda item: (-item[1], item[0]))
        kept = kept[: config.max_features]
    kept.sort(key=lambda item: item[0])

    df = np.array([d for _, d in kept], dtype=np.float64)
    idf = smoothed_idf(len(train_docs), df)
    model = TfIdfModel(
        vocabulary={term: i for i, (term, _) in enumerate(kept)},
        document_frequency=tuple(d for _, d in kept),
        idf=tuple(float(x) for x in idf),
        n_train_docs=len(train_docs),
        config=config,
    )
    log.info("[TFIDF] vocabulario=%d términos (docs=%d min_df=%d)", model.size, len(train_docs), config.min_df)
    return model


def transform(doc: Sequence[str], model: TfIdfModel) -> SparseVector:
    counts = Counter(t for t in doc if t in model.vocabulary)
    if not counts:
        return SparseVector()
    items = sorted((model.vocabulary[t], c) for t, c in counts.items())
    idx = [i for i, _ in items]
    tf = np.array([c for _, c in items], dtype=np.float64)
    if model.config.sublinear_tf:
        tf = 1.0 + np.log(tf)
    raw = tf * np.array([model.idf[i] for i in idx], dtype=np.float64)
    norm = float(np.linalg.norm(raw))
    if norm == 0.0 or not math.isfinite(norm):
        return SparseVector()
    values = raw / norm
    return SparseVector(tuple(idx), tuple(float(v) for v in values))


def fit_transform(train_docs: Sequence[Sequence[str]], config: FeatureConfig) -> Tuple[TfIdfModel, List[SparseVector]]:
    model = fit(train_docs, config)
    return model, [transform(doc, model) for doc in train_docs]
