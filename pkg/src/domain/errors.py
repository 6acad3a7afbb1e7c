"""Errores de dominio.

Todos heredan de ValueError: el código que ya captura ValueError sigue funcionando.
InputError se traduce a exit code 2 en la CLI y DegeneracyError a exit code 3.
"""
from __future__ import annotations
from typing import Optional


class SentiscopeError(ValueError):
    pass


class InputError(SentiscopeError):
    pass


class DegeneracyError(SentiscopeError):
    pass


# ---------- Corpus ----------
class CorpusLineError(InputError):
    """Error asociado a una línea concreta del archivo de entrada."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"línea {line}: {message}"
        super().__init__(message)


class MissingColumnError(CorpusLineError):
    pass


class BadLabelError(CorpusLineError):
    pass


class EmptyTextError(CorpusLineError):
    pass


class DuplicateIdError(CorpusLineError):
    pass


class EmptyCorpusError(InputError):
    pass


class DegenerateSplitError(DegeneracyError):
    pass


# ---------- Features ----------
class EmptyVocabularyError(DegeneracyError):
    pass


# ---------- GBDT ----------
class EmptyTrainingSetError(DegeneracyError):
    pass


class SingleClassTrainingError(DegeneracyError):
    pass


class DegenerateLeafError(DegeneracyError):
    pass


class DimensionMismatchError(InputError):
    pass


# ---------- Evaluación / EDA ----------
class LengthMismatchError(InputError):
    pass


class UnknownLabelError(InputError):
    pass


class EmptyMatrixError(InputError):
    pass


class BadNError(InputError):
    pass


class NoEmotionLabelsError(InputError):
    pass


# ---------- Persistencia ----------
class VersionMismatchError(InputError):
    pass


class CorruptPayloadError(InputError):
    pass


class IoFailureError(InputError):
    pass


class ConfigError(InputError):
    pass
