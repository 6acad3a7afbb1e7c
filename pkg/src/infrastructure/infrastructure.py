"""Lectura y escritura de archivos (UTF-8). Los fallos de E/S se reportan como IoFailureError."""
from __future__ import annotations
import csv
import json
import logging
from contextlib import contextmanager
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, FrozenSet, Iterable, Iterator, List, Sequence, TextIO

from src.domain.errors import IoFailureError

log = logging.getLogger(__name__)

DEFAULT_STOPWORDS_RESOURCE = "stopwords_id.txt"


@contextmanager
def open_text(path: str | Path, mode: str = "r", encoding: str = "utf-8") -> Iterator[TextIO]:
    """Abre un archivo de texto UTF-8 traduciendo OSError/UnicodeDecodeError."""
    try:
        # newline="" para que el módulo csv maneje los saltos de línea (RFC 4180)
        with open(path, mode, encoding=encoding, newline="") as fh:
            yield fh
    except UnicodeDecodeError as e:
        raise IoFailureError(f"{path} no es UTF-8 válido: {e}") from e
    except OSError as e:
        raise IoFailureError(f"No se pudo acceder a {path}: {e}") from e


def read_text(path: str | Path) -> str:
    with open_text(path) as fh:
        return fh.read()


def parse_word_list(text: str) -> FrozenSet[str]:
    """Una palabra por línea; se ignoran líneas vacías y las que empiezan con '#'."""
    words = set()
    for line in text.splitlines():
        w = line.strip()
        if not w or w.startswith("#"):
            continue
        words.add(w.lower())
    return frozenset(words)


def load_word_list(path: str | Path) -> FrozenSet[str]:
    words = parse_word_list(read_text(path))
    log.info("[WORDLIST] %d palabras cargadas desde %s", len(words), path)
    return words


@lru_cache(maxsize=1)
def load_default_stopwords() -> FrozenSet[str]:
    text = resources.files("src.data").joinpath(DEFAULT_STOPWORDS_RESOURCE).read_text(encoding="utf-8")
    return parse_word_list(text)


# ---------- Escritura ----------
def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise IoFailureError(f"No se pudo crear el directorio {path.parent}: {e}") from e


def write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with open_text(path, "w") as fh:
        fh.write(text)
    return path


def dumps_json(data: Any) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2)


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with open_text(path, "w") as fh:
        fh.write(dumps_json(data))
        fh.write("\n")
    log.debug("[IO] JSON escrito en %s", path)
    return path


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with open_text(path, "w") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")
    return path


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    _ensure_parent(path)
    with open_text(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def read_lines(path: str | Path) -> List[str]:
    r"""Líneas separadas solo por \n (se descarta un \r final); conserva las líneas vacías.

    U+2028, U+0085 y similares no cortan la línea.
    """
    lines = read_text(path).split("\n")
    if lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]
