from __future__ import annotations
import argparse
import logging

from src.infrastructure.infrastructure import write_jsonl
from src.services import corpus_service
from src.services.corpus_service import CorpusFormat

log = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("ingest", help="Valida un corpus y lo escribe como JSONL normalizado")
    p.add_argument("--input", required=True, help="CSV o JSONL de entrada")
    p.add_argument("--format", choices=[f.value for f in CorpusFormat], default=None,
                   help="Formato de entrada (por defecto se infiere de la extensión)")
    p.add_argument("--out", required=True, help="Ruta del JSONL normalizado")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    fmt = args.format or CorpusFormat.from_path(args.input)
    corpus = corpus_service.load_corpus(args.input, fmt)
    write_jsonl(args.out, corpus_service.to_records(corpus))
    log.info("[INGEST] %d documentos escritos en %s", len(corpus), args.out)

    print(f"documents\t{len(corpus)}")
    for sentiment, (count, fraction) in corpus_service.label_distribution(corpus).items():
        print(f"{sentiment.value}\t{count}\t{fraction:.3f}")
    return 0
