from __future__ import annotations
import logging
from typing import List, Sequence

import numpy as np

from src.domain.errors import EmptyCorpusError, EmptyMatrixError, LengthMismatchError, UnknownLabelError
from src.domain.models import CLASS_NAMES, LabeledCorpus
from src.domain.schemas import ClassMetrics, ConfusionMatrix, MetricsReport

log = logging.getLogger(__name__)


def confusion_matrix(true_labels: Sequence[str], predicted_labels: Sequence[str],
                     class_names: Sequence[str]) -> ConfusionMatrix:
    """Filas = clase verdadera, columnas = clase predicha."""
    if len(true_labels) != len(predicted_labels):
        raise LengthMismatchError(
            f"{len(true_labels)} etiquetas verdaderas vs {len(predicted_labels)} predichas"
        )
    if not true_labels:
        raise LengthMismatchError("No hay pares para evaluar")

    index = {name: i for i, name in enumerate(class_names)}
    counts = np.zeros((len(class_names), len(class_names)), dtype=np.int64)
    for t, p in zip(true_labels, predicted_labels):
        if t not in index:
            raise UnknownLabelError(f"Etiqueta verdadera desconocida: {t!r}")
        if p not in index:
            raise UnknownLabelError(f"Etiqueta predicha desconocida: {p!r}")
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(class_names=list(class_names), counts=counts.tolist())


def _safe_ratio(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    # 0/0 se define como 0
    return np.divide(num, den, out=np.zeros_like(num, dtype=np.float64), where=den > 0)


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    counts = np.asarray(cm.counts, dtype=np.float64)
    total = counts.sum()
    if total == 0:
        raise EmptyMatrixError("La matriz de confusión está vacía")

    diag = np.diag(counts)
    support = counts.sum(axis=1)
    precision = _safe_ratio(diag, counts.sum(axis=0))
    recall = _safe_ratio(diag, support)
    f1 = _safe_ratio(2 * precision * recall, precision + recall)

    per_class: List[ClassMetrics] = [
        ClassMetrics(
            name=name,
            precision=float(precision[i]),
            recall=float(recall[i]),
            f1=float(f1[i]),
            support=int(support[i]),
        )
        for i, name in enumerate(cm.class_names)
    ]
    return MetricsReport(
        accuracy=float(diag.sum() / total),
        per_class=per_class,
        macro_f1=float(f1.mean()),
        weighted_f1=float((f1 * support).sum() / total),
    )


def majority_label(corpus: LabeledCorpus) -> str:
    counts = {s.value: c for s, c in corpus.label_counts.items()}
    # mayor frecuencia; empates por orden lexicográfico
    return min(counts, key=lambda name: (-counts[name], name))


def majority_baseline(train: LabeledCorpus, test: LabeledCorpus) -> MetricsReport:
    if len(train) == 0 or len(test) == 0:
        raise EmptyCorpusError("El baseline requiere train y test no vacíos")
    label = majority_label(train)
    truth = [d.sentiment.value for d in test.documents]
    report = compute_metrics(confusion_matrix(truth, [label] * len(truth), CLASS_NAMES))
    log.info("[BASELINE] clase mayoritaria=%s accuracy=%.4f", label, report.accuracy)
    return report


def confusion_rows(cm: ConfusionMatrix) -> List[List[object]]:
    """Filas para el CSV: nombre de clase verdadera seguido de los conteos."""
    return [[name, *row] for name, row in zip(cm.class_names, cm.counts)]


def confusion_header(cm: ConfusionMatrix) -> List[str]:
    return ["true\\pred", *cm.class_names]
