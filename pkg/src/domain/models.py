from __future__ import annotations
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


# ---------- Enums ----------
class Sentiment(str, Enum):
    NEGATIVE = "negative"
    NEUTRAL = "neutral"
    POSITIVE = "positive"

    @property
    def index(self) -> int:
        return CLASS_NAMES.index(self.value)

    @classmethod
    def parse(cls, raw: str) -> "Sentiment":
        """Acepta la etiqueta sin distinguir mayúsculas ("Negative" == "negative")."""
        return cls(raw.strip().lower())


# Orden canónico de clases: índice de clase == posición en esta lista
CLASS_NAMES: Tuple[str, ...] = tuple(s.value for s in Sentiment)


# ---------- Corpus ----------
class RawComment(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    text: str
    sentiment: Sentiment
    emotion: Optional[str] = None

    @field_validator("id")
    @classmethod
    def _id_no_vacio(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("id vacío")
        return v

    @field_validator("text")
    @classmethod
    def _texto_no_vacio(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("texto vacío")
        return v


class LabeledCorpus(BaseModel):
    """Corpus inmutable; el orden de documentos es el del archivo de origen."""

    model_config = ConfigDict(frozen=True)

    documents: Tuple[RawComment, ...] = ()

    @cached_property
    def label_counts(self) -> Dict[Sentiment, int]:
        counts: Dict[Sentiment, int] = {}
        for doc in self.documents:
            counts[doc.sentiment] = counts.get(doc.sentiment, 0) + 1
        # orden canónico de clases
        return {s: counts[s] for s in Sentiment if s in counts}

    @property
    def ids(self) -> Tuple[str, ...]:
        return tuple(d.id for d in self.documents)

    def __len__(self) -> int:
        return len(self.documents)


# ---------- Vectores dispersos ----------
@dataclass(frozen=True, slots=True)
class SparseVector:
    """Pares (columna, valor) con índices estrictamente crecientes y valores no nulos."""

    indices: Tuple[int, ...] = ()
    values: Tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices y values deben tener la misma longitud")
        for a, b in zip(self.indices, self.indices[1:]):
            if b <= a:
                raise ValueError("los índices deben ser estrictamente crecientes")
        for v in self.values:
            if v == 0.0 or not math.isfinite(v):
                raise ValueError("los valores deben ser finitos y no nulos")

    @classmethod
    def from_dict(cls, entries: Dict[int, float]) -> "SparseVector":
        items = sorted((int(k), float(v)) for k, v in entries.items() if v != 0.0)
        return cls(tuple(k for k, _ in items), tuple(v for _, v in items))

    @property
    def entries(self) -> Tuple[Tuple[int, float], ...]:
        return tuple(zip(self.indices, self.values))

    def as_dict(self) -> Dict[int, float]:
        return dict(zip(self.indices, self.values))

    def norm(self) -> float:
        return float(np.linalg.norm(np.asarray(self.values, dtype=np.float64)))

    def __len__(self) -> int:
        return len(self.indices)


# ---------- Árboles ----------
@dataclass(frozen=True, slots=True)
class Leaf:
    weight: float


@dataclass(frozen=True, slots=True)
class Split:
    feature: int
    threshold: float
    default_left: bool
    gain: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True, slots=True)
class SplitInfo:
    feature: int
    threshold: float
    default_left: bool
    gain: float
