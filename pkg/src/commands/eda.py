from __future__ import annotations
import argparse
import logging
from pathlib import Path
from typing import Iterable, List

from src.dependencies import build_preprocess_config, load_cli_config
from src.domain.errors import ConfigError
from src.domain.schemas import NgramTable
from src.infrastructure.infrastructure import write_csv, write_json
from src.services import corpus_service, eda_service
from src.services.corpus_service import CorpusFormat

log = logging.getLogger(__name__)

TABLE_HEADER = ("scope", "ngram", "count")


def register(subparsers) -> None:
    p = subparsers.add_parser("eda", help="Análisis exploratorio del corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="Directorio de salida")
    p.add_argument("--top-n", type=int, default=20, dest="top_n")
    p.add_argument("--skip-stemming", action="store_true", dest="skip_stemming")
    p.add_argument("--config", default=None, help="Archivo TOML (se usa la sección [preprocess])")
    p.add_argument("--stopwords", default=None, help="Lista de stopwords (una por línea)")
    p.set_defaults(handler=run)


def _rows(tables: Iterable[NgramTable]) -> List[tuple]:
    return [(t.scope, row.ngram, row.count) for t in tables for row in t.rows]


def run(args: argparse.Namespace) -> int:
    if args.top_n < 1:
        raise ConfigError("--top-n debe ser >= 1")
    config = load_cli_config(args.config)
    preprocess = build_preprocess_config(
        config.preprocess, stopwords_path=args.stopwords, skip_stemming=args.skip_stemming
    )
    corpus = corpus_service.load_corpus(args.corpus, CorpusFormat.from_path(args.corpus))
    report = eda_service.build_report(corpus, preprocess, args.top_n)

    out = Path(args.out)
    write_json(out / "eda_report.json", report.model_dump(mode="json", exclude_none=True))
    for n, name in ((1, "unigrams.csv"), (2, "bigrams.csv")):
        write_csv(out / name, TABLE_HEADER, _rows(t for t in report.ngram_tables if t.n == n))
    write_csv(out / "word_frequencies.csv", TABLE_HEADER, _rows(report.word_frequencies))
    write_csv(
        out / "cleansed_frequencies.csv", TABLE_HEADER,
        _rows(eda_service.export_word_frequencies(corpus, preprocess, "cleansed")),
    )
    log.info("[EDA] artefactos escritos en %s", out)
    return 0
