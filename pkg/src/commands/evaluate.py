from __future__ import annotations
import argparse
import logging
from pathlib import Path

from src.infrastructure.infrastructure import write_csv, write_json
from src.services import corpus_service, eval_service, pipeline_service
from src.services.corpus_service import CorpusFormat

log = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("evaluate", help="Evalúa un modelo guardado sobre un corpus etiquetado")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="JSON de métricas; la matriz va a <out>.confusion.csv")
    p.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    model = pipeline_service.load(args.model)
    corpus = corpus_service.load_corpus(args.corpus, CorpusFormat.from_path(args.corpus))

    truth = [d.sentiment.value for d in corpus.documents]
    predicted = [p.label for p in pipeline_service.predict_many(model, [d.text for d in corpus.documents])]
    cm = eval_service.confusion_matrix(truth, predicted, model.class_names)
    report = eval_service.compute_metrics(cm)

    out = Path(args.out)
    write_json(out, report.model_dump(mode="json"))
    write_csv(out.with_suffix(".confusion.csv"), eval_service.confusion_header(cm), eval_service.confusion_rows(cm))
    log.info("[EVALUATE] docs=%d accuracy=%.4f macro_f1=%.4f", len(corpus), report.accuracy, report.macro_f1)
    return 0
