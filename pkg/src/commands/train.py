from __future__ import annotations
import argparse
import logging
from pathlib import Path

from src.dependencies import build_preprocess_config, load_cli_config
from src.domain.models import CLASS_NAMES
from src.domain.schemas import ClassWeighting
from src.infrastructure.infrastructure import write_csv, write_json
from src.services import corpus_service, eval_service, gbdt_service, pipeline_service
from src.services.corpus_service import CorpusFormat

log = logging.getLogger(__name__)


def register(subparsers) -> None:
    p = subparsers.add_parser("train", help="Entrena el pipeline y reporta métricas de holdout")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", default=None, help="Archivo TOML con [split] [preprocess] [features] [train]")
    p.add_argument("--model-out", required=True, dest="model_out")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--oversample", action="store_true", help="Sobremuestrea las clases minoritarias del train")
    p.add_argument("--class-weight", choices=[c.value for c in ClassWeighting], default=None,
                   dest="class_weight")
    p.add_argument("--stopwords", default=None)
    p.set_defaults(handler=run)


def sidecar(model_path: Path, suffix: str) -> Path:
    """model.json -> model.<suffix>"""
    return model_path.with_suffix(f".{suffix}")


def run(args: argparse.Namespace) -> int:
    config = load_cli_config(args.config, seed=args.seed, class_weight=args.class_weight)
    preprocess = build_preprocess_config(config.preprocess, stopwords_path=args.stopwords)
    corpus = corpus_service.load_corpus(args.corpus, CorpusFormat.from_path(args.corpus))

    train_side, test_side = corpus_service.split(corpus, config.split)
    fit_side = corpus_service.oversample(train_side, config.split.seed) if args.oversample else train_side

    model, train_log = pipeline_service.train_pipeline(fit_side, preprocess, config.features, config.train)
    model_path = pipeline_service.save(model, args.model_out)

    truth = [d.sentiment.value for d in test_side.documents]
    predicted = [pipeline_service.predict(model, d.text).label for d in test_side.documents]
    cm = eval_service.confusion_matrix(truth, predicted, CLASS_NAMES)
    holdout = eval_service.compute_metrics(cm)
    baseline = eval_service.majority_baseline(train_side, test_side)

    write_json(sidecar(model_path, "metrics.json"), {
        "holdout": holdout.model_dump(mode="json"),
        "majority_baseline": baseline.model_dump(mode="json"),
        "confusion_matrix": cm.model_dump(mode="json"),
        "split": {"train": len(train_side), "test": len(test_side), "fit": len(fit_side)},
    })
    # el tiempo de pared solo va al log: los artefactos deben ser reproducibles
    write_json(sidecar(model_path, "trainlog.json"), train_log.model_dump(mode="json", exclude={"wall_time_seconds"}))

    weight = gbdt_service.feature_importance(model.gbdt, "weight")
    ranked = [
        (term, gain, int(weight[model.tfidf.vocabulary[term]]))
        for term, gain in pipeline_service.top_terms(model, k=model.tfidf.size, kind="gain")
    ]
    write_csv(sidecar(model_path, "importance.csv"), ("term", "gain", "weight"), ranked)

    log.info("[TRAIN] holdout=%s baseline_accuracy=%.4f", holdout.accuracy, baseline.accuracy)
    print(f"holdout accuracy={holdout.accuracy:.2f} macro_f1={holdout.macro_f1:.2f}")
    return 0
