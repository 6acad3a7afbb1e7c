from __future__ import annotations
import csv
import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from src.domain.errors import (
    BadLabelError, DegenerateSplitError, DuplicateIdError, EmptyCorpusError,
    EmptyTextError, MissingColumnError,
)
from src.domain.models import LabeledCorpus, RawComment, Sentiment
from src.domain.schemas import SplitSpec
from src.infrastructure.infrastructure import open_text
from src.infrastructure.prng import SeededShuffler

log = logging.getLogger(__name__)

_REQUIRED_COLUMNS = ["text", "sentiment"]


class CorpusFormat(str, Enum):
    CSV = "csv"
    JSONL = "jsonl"

    @classmethod
    def from_path(cls, path: str | Path) -> "CorpusFormat":
        return cls.CSV if Path(path).suffix.lower() == ".csv" else cls.JSONL


# ---------- Construcción ----------
def _row_to_comment(row: Dict[str, object], line: int) -> RawComment:
    missing = [c for c in _REQUIRED_COLUMNS if c not in row or row[c] is None]
    if missing:
        raise MissingColumnError(f"faltan campos: {', '.join(missing)}", line)

    text = str(row["text"])
    if not text.strip():
        raise EmptyTextError("texto vacío", line)

    raw_label = str(row["sentiment"])
    try:
        sentiment = Sentiment.parse(raw_label)
    except ValueError:
        raise BadLabelError(f"etiqueta de sentimiento inválida: {raw_label!r}", line) from None

    raw_id = row.get("id")
    doc_id = str(raw_id).strip() if raw_id not in (None, "") else ""
    if not doc_id:
        doc_id = f"row-{line}"

    emotion = row.get("emotion")
    emotion = str(emotion).strip() if emotion not in (None, "") else None

    return RawComment(id=doc_id, text=text, sentiment=sentiment, emotion=emotion or None)


def build_corpus(documents: Iterable[RawComment], lines: Optional[List[int]] = None) -> LabeledCorpus:
    """Construye el corpus validando unicidad de ids."""
    docs = list(documents)
    seen: Dict[str, int] = {}
    for pos, doc in enumerate(docs):
        line = lines[pos] if lines else None
        if doc.id in seen:
            raise DuplicateIdError(f"id duplicado: {doc.id!r}", line)
        seen[doc.id] = pos
    return LabeledCorpus(documents=tuple(docs))


def _iter_csv(path: str | Path):
    # utf-8-sig descarta el BOM si existe
    with open_text(path, encoding="utf-8-sig") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise MissingColumnError("CSV sin cabecera", 1)
        headers = [h.strip() for h in reader.fieldnames if h]
        missing = [c for c in _REQUIRED_COLUMNS if c not in headers]
        if missing:
            raise MissingColumnError(f"faltan columnas en el CSV: {', '.join(missing)}", 1)
        reader.fieldnames = [h.strip() if h else h for h in reader.fieldnames]
        for row in reader:
            yield reader.line_num, row


def _iter_jsonl(path: str | Path):
    with open_text(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise MissingColumnError(f"JSON inválido: {e.msg}", line_no) from None
            if not isinstance(obj, dict):
                raise MissingColumnError("se esperaba un objeto JSON", line_no)
            yield line_no, obj


def load_corpus(path: str | Path, format: CorpusFormat | str) -> LabeledCorpus:
    fmt = CorpusFormat(format)
    rows = _iter_csv(path) if fmt is CorpusFormat.CSV else _iter_jsonl(path)

    docs: List[RawComment] = []
    lines: List[int] = []
    for line, row in rows:
        docs.append(_row_to_comment(row, line))
        lines.append(line)

    corpus = build_corpus(docs, lines)
    log.info(
        "[CORPUS] %d documentos cargados desde %s (%s): %s",
        len(corpus), path, fmt.value,
        {s.value: c for s, c in corpus.label_counts.items()},
    )
    return corpus


def to_records(corpus: LabeledCorpus) -> List[dict]:
    """Forma normalizada (JSONL) de cada documento."""
    records = []
    for doc in corpus.documents:
        rec = {"id": doc.id, "text": doc.text, "sentiment": doc.sentiment.value}
        if doc.emotion is not None:
            rec["emotion"] = doc.emotion
        records.append(rec)
    return records


# ---------- Estadísticas ----------
def label_distribution(corpus: LabeledCorpus) -> Dict[Sentiment, Tuple[int, float]]:
    total = len(corpus)
    if total == 0:
        raise EmptyCorpusError("El corpus está vacío")
    return {s: (c, c / total) for s, c in corpus.label_counts.items()}


# ---------- Partición ----------
def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def stratified_test_count(count: int, test_fraction: float) -> int:
    if count < 2:
        return 0
    return max(1, round_half_up(count * test_fraction))


def split(corpus: LabeledCorpus, spec: SplitSpec) -> Tuple[LabeledCorpus, LabeledCorpus]:
    n = len(corpus)
    if n == 0:
        raise EmptyCorpusError("El corpus está vacío")
    if n < 2:
        raise DegenerateSplitError("Se necesitan al menos 2 documentos para particionar")

    rng = SeededShuffler(spec.seed)
    test_positions: set[int] = set()

    if spec.stratified:
        by_class: Dict[Sentiment, List[int]] = {}
        for pos, doc in enumerate(corpus.documents):
            by_class.setdefault(doc.sentiment, []).append(pos)
        for sentiment in Sentiment:
            positions = by_class.get(sentiment)
            if not positions:
                continue
            k = stratified_test_count(len(positions), spec.test_fraction)
            rng.shuffle(positions)
            test_positions.update(positions[:k])
    else:
        k = min(n - 1, max(1, round_half_up(n * spec.test_fraction)))
        test_positions.update(rng.permutation(n)[:k])

    train_docs = [d for i, d in enumerate(corpus.documents) if i not in test_positions]
    test_docs = [d for i, d in enumerate(corpus.documents) if i in test_positions]
    if not train_docs or not test_docs:
        raise DegenerateSplitError(
            f"Partición degenerada: train={len(train_docs)} test={len(test_docs)}"
        )

    log.info("[SPLIT] train=%d test=%d seed=%d estratificado=%s",
             len(train_docs), len(test_docs), spec.seed, spec.stratified)
    return LabeledCorpus(documents=tuple(train_docs)), LabeledCorpus(documents=tuple(test_docs))


# ---------- Balanceo ----------
def oversample(corpus: LabeledCorpus, seed: int) -> LabeledCorpus:
    """Duplica documentos de las clases minoritarias hasta igualar a la mayoritaria."""
    if len(corpus) == 0:
        raise EmptyCorpusError("El corpus está vacío")

    counts = corpus.label_counts
    majority = max(counts.values())
    if all(c == majority for c in counts.values()):
        return corpus

    rng = SeededShuffler(seed)
    taken = set(corpus.ids)
    dup_counter: Dict[str, int] = {}
    extra: List[RawComment] = []

    for sentiment in Sentiment:
        members = [d for d in corpus.documents if d.sentiment is sentiment]
        if not members:
            continue
        for _ in range(majority - len(members)):
            source = members[rng.below(len(members))]
            n = dup_counter.get(source.id, 0)
            while True:
                n += 1
                new_id = f"{source.id}-dup{n}"
                if new_id not in taken:
                    break
            dup_counter[source.id] = n
            taken.add(new_id)
            extra.append(source.model_copy(update={"id": new_id}))

    log.info("[OVERSAMPLE] %d duplicados agregados (mayoría=%d)", len(extra), majority)
    return LabeledCorpus(documents=corpus.documents + tuple(extra))
