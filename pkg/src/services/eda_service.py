"""Análisis exploratorio: distribuciones, longitudes, n-gramas y frecuencias de palabras.

Los cuantiles usan interpolación por punto medio (numpy method="midpoint") y la
desviación estándar es poblacional.
"""
from __future__ import annotations
import logging
import re
from collections import Counter
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.errors import BadNError, EmptyCorpusError, NoEmotionLabelsError
from src.domain.models import LabeledCorpus, RawComment, Sentiment
from src.domain.schemas import (
    CleansingReport, CleansingSample, EdaReport, LabelShare, LengthStats, LengthSummary,
    NgramRow, NgramTable, PreprocessConfig, ScopeLengths,
)
from src.services import corpus_service
from src.services.preprocess_service import case_fold, cleanse, preprocess_document, tokenize

log = logging.getLogger(__name__)

OVERALL = "overall"
SCOPES = ("overall", "sentiment", "emotion", "cleansed")
_OUTSIDE_ALPHABET = re.compile(r"[^a-z ]")


def _require_docs(corpus: LabeledCorpus) -> None:
    if len(corpus) == 0:
        raise EmptyCorpusError("El corpus está vacío")


# ---------- Distribuciones ----------
def emotion_distribution(corpus: LabeledCorpus) -> Dict[str, LabelShare]:
    emotions = [d.emotion for d in corpus.documents if d.emotion is not None]
    if not emotions:
        raise NoEmotionLabelsError("Ningún documento tiene etiqueta de emoción")
    counts = Counter(emotions)
    return {
        e: LabelShare(count=c, fraction=c / len(emotions))
        for e, c in sorted(counts.items())
    }


def emotion_sentiment_crosstab(corpus: LabeledCorpus) -> Dict[str, Dict[str, int]]:
    """emoción -> sentimiento -> conteo (solo celdas no vacías)."""
    cells: Dict[str, Dict[str, int]] = {}
    for doc in corpus.documents:
        if doc.emotion is None:
            continue
        row = cells.setdefault(doc.emotion, {})
        row[doc.sentiment.value] = row.get(doc.sentiment.value, 0) + 1
    if not cells:
        raise NoEmotionLabelsError("Ningún documento tiene etiqueta de emoción")
    return {
        emotion: {s.value: row[s.value] for s in Sentiment if s.value in row}
        for emotion, row in sorted(cells.items())
    }


# ---------- Longitudes ----------
def summarize(values: Sequence[float]) -> LengthSummary:
    arr = np.asarray(values, dtype=np.float64)
    q1, median, q3 = np.quantile(arr, [0.25, 0.5, 0.75], method="midpoint")
    return LengthSummary(
        count=int(arr.size),
        mean=float(arr.mean()),
        std=float(arr.std()),
        min=float(arr.min()),
        q1=float(q1),
        median=float(median),
        q3=float(q3),
        max=float(arr.max()),
    )


def _scope_lengths(docs: Sequence[RawComment], token_counts: Sequence[int]) -> ScopeLengths:
    return ScopeLengths(
        count=len(docs),
        chars=summarize([len(d.text) for d in docs]),
        tokens=summarize(token_counts),
    )


def length_stats(corpus: LabeledCorpus, config: PreprocessConfig) -> LengthStats:
    _require_docs(corpus)
    n_tokens = [len(preprocess_document(d.text, config)) for d in corpus.documents]

    per_sentiment: Dict[str, ScopeLengths] = {}
    for sentiment in corpus.label_counts:
        pos = [i for i, d in enumerate(corpus.documents) if d.sentiment is sentiment]
        per_sentiment[sentiment.value] = _scope_lengths(
            [corpus.documents[i] for i in pos], [n_tokens[i] for i in pos]
        )
    return LengthStats(
        overall=_scope_lengths(corpus.documents, n_tokens),
        per_sentiment=per_sentiment,
    )


# ---------- N-gramas ----------
def ngrams(tokens: Sequence[str], n: int) -> List[str]:
    return [" ".join(tokens[i:i + n]) for i in range(len(tokens) - n + 1)]


def _ranked(counter: Counter, scope: str, n: int, k: Optional[int]) -> NgramTable:
    rows = sorted(counter.items(), key=lambda item: (-item[1], item[0]))
    if k is not None:
        rows = rows[:k]
    return NgramTable(n=n, scope=scope, rows=[NgramRow(ngram=g, count=c) for g, c in rows])


def _count_by_scope(scoped_docs: Iterable[Tuple[str, List[str]]], n: int) -> Dict[str, Counter]:
    counters: Dict[str, Counter] = {}
    for scope, tokens in scoped_docs:
        counters.setdefault(scope, Counter()).update(ngrams(tokens, n))
    return counters


def top_ngrams(corpus: LabeledCorpus, config: PreprocessConfig, n: int, k: int,
               per_sentiment: bool = False) -> List[NgramTable]:
    """Top-k n-gramas (n=1|2) dentro de cada documento; una tabla por ámbito."""
    if n not in (1, 2):
        raise BadNError(f"n debe ser 1 o 2 (recibido {n})")
    _require_docs(corpus)
    docs = [(d, preprocess_document(d.text, config)) for d in corpus.documents]

    if not per_sentiment:
        counters = _count_by_scope(((OVERALL, toks) for _, toks in docs), n)
        return [_ranked(counters.get(OVERALL, Counter()), OVERALL, n, k)]

    counters = _count_by_scope(((d.sentiment.value, toks) for d, toks in docs), n)
    return [
        _ranked(counters[s.value], s.value, n, k)
        for s in corpus.label_counts
    ]


def _cleansed_tokens(text: str, config: PreprocessConfig) -> List[str]:
    if config.lowercase:
        text = case_fold(text)
    return tokenize(cleanse(text, config), config)


def export_word_frequencies(corpus: LabeledCorpus, config: PreprocessConfig,
                            scope: str = OVERALL) -> List[NgramTable]:
    """Frecuencias de tokens preprocesados para nubes de palabras.

    scope: overall | sentiment | emotion | cleansed (solo limpieza, sin stopwords ni stemming).
    """
    if scope not in SCOPES:
        raise ValueError(f"Ámbito desconocido: {scope}")
    _require_docs(corpus)

    if scope == "cleansed":
        counters = _count_by_scope(
            (("cleansed", _cleansed_tokens(d.text, config)) for d in corpus.documents), 1
        )
        return [_ranked(counters.get("cleansed", Counter()), "cleansed", 1, None)]

    if scope == OVERALL:
        pairs = ((OVERALL, preprocess_document(d.text, config)) for d in corpus.documents)
        counters = _count_by_scope(pairs, 1)
        return [_ranked(counters.get(OVERALL, Counter()), OVERALL, 1, None)]

    if scope == "sentiment":
        pairs = ((d.sentiment.value, preprocess_document(d.text, config)) for d in corpus.documents)
        counters = _count_by_scope(pairs, 1)
        return [_ranked(counters[s.value], s.value, 1, None) for s in corpus.label_counts]

    labeled = [d for d in corpus.documents if d.emotion is not None]
    if not labeled:
        raise NoEmotionLabelsError("Ningún documento tiene etiqueta de emoción")
    counters = _count_by_scope(((d.emotion, preprocess_document(d.text, config)) for d in labeled), 1)
    return [_ranked(counters[e], e, 1, None) for e in sorted(counters)]


# ---------- Verificación de limpieza ----------
def cleansing_report(corpus: LabeledCorpus, config: PreprocessConfig, k: int = 5) -> CleansingReport:
    _require_docs(corpus)
    samples: List[CleansingSample] = []
    residual = emptied = raw_chars = cleansed_chars = 0
    for pos, doc in enumerate(corpus.documents):
        folded = case_fold(doc.text) if config.lowercase else doc.text
        cleansed = cleanse(folded, config)
        tokens = preprocess_document(doc.text, config)
        raw_chars += len(doc.text)
        cleansed_chars += len(cleansed)
        if _OUTSIDE_ALPHABET.search(cleansed):
            residual += 1
        if not tokens:
            emptied += 1
        if pos < k:
            samples.append(CleansingSample(id=doc.id, raw=doc.text, cleansed=cleansed, tokens=tokens))
    return CleansingReport(
        samples=samples,
        residual_non_alpha_docs=residual,
        emptied_docs=emptied,
        raw_chars=raw_chars,
        cleansed_chars=cleansed_chars,
    )


# ---------- Reporte ----------
def build_report(corpus: LabeledCorpus, config: PreprocessConfig, top_n: int) -> EdaReport:
    _require_docs(corpus)
    has_emotion = any(d.emotion is not None for d in corpus.documents)

    ngram_tables: List[NgramTable] = []
    for n in (1, 2):
        ngram_tables.extend(top_ngrams(corpus, config, n, top_n, per_sentiment=False))
        ngram_tables.extend(top_ngrams(corpus, config, n, top_n, per_sentiment=True))

    frequencies = export_word_frequencies(corpus, config, OVERALL)
    frequencies += export_word_frequencies(corpus, config, "sentiment")
    if has_emotion:
        frequencies += export_word_frequencies(corpus, config, "emotion")

    report = EdaReport(
        label_distribution={
            s.value: LabelShare(count=c, fraction=f)
            for s, (c, f) in corpus_service.label_distribution(corpus).items()
        },
        emotion_distribution=emotion_distribution(corpus) if has_emotion else None,
        emotion_sentiment_crosstab=emotion_sentiment_crosstab(corpus) if has_emotion else None,
        length_stats=length_stats(corpus, config),
        ngram_tables=ngram_tables,
        word_frequencies=frequencies,
        cleansing=cleansing_report(corpus, config),
    )
    log.info("[EDA] reporte generado: docs=%d emociones=%s top_n=%d", len(corpus), has_emotion, top_n)
    return report
