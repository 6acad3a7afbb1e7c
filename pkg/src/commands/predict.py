from __future__ import annotations
import argparse
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

from src.domain.errors import CorruptPayloadError
from src.infrastructure.infrastructure import read_lines
from src.services import pipeline_service

log = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("predict", help="Predice el sentimiento de uno o varios textos")
    p.add_argument("--model", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--text", default=None)
    source.add_argument("--input", default=None, help=".jsonl con {id, text} o un texto por línea")
    p.set_defaults(handler=run)


def read_inputs(path: str) -> List[Tuple[Optional[str], str]]:
    lines = read_lines(path)
    if Path(path).suffix.lower() != ".jsonl":
        return [(None, line) for line in lines]

    items: List[Tuple[Optional[str], str]] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorruptPayloadError(f"línea {line_no}: JSON inválido ({e.msg})") from e
        if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
            raise CorruptPayloadError(f"línea {line_no}: se esperaba un objeto con 'text'")
        doc_id = obj.get("id")
        items.append((None if doc_id is None else str(doc_id), obj["text"]))
    return items


def run(args: argparse.Namespace) -> int:
    model = pipeline_service.load(args.model)
    items = [(None, args.text)] if args.text is not None else read_inputs(args.input)
    for doc_id, text in items:
        prediction = pipeline_service.predict(model, text)
        row = {"label": prediction.label, "probabilities": prediction.probabilities}
        if doc_id is not None:
            row = {"id": doc_id, **row}
        print(json.dumps(row, ensure_ascii=False))
    log.info("[PREDICT] %d predicciones", len(items))
    return 0
