from __future__ import annotations
import argparse
import logging
import sys
from typing import Optional, Sequence

from pydantic import ValidationError

from src.commands import COMMANDS
from src.config import Settings, get_settings
from src.domain.errors import DegeneracyError, InputError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DEGENERATE = 3


def configure_logging(level: str) -> None:
    # stdout queda reservado para la salida de los comandos
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    logging.getLogger().setLevel(level)


def build_parser(settings: Optional[Settings] = None) -> argparse.ArgumentParser:
    settings = settings or get_settings()
    parser = argparse.ArgumentParser(
        prog=settings.SERVICE_NAME,
        description="Análisis de sentimiento de comentarios: ingest, eda, train, evaluate, predict.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        settings = get_settings()
    except ValidationError as e:
        print(f"error: entorno SENTISCOPE_* inválido: {e}", file=sys.stderr)
        return EXIT_INPUT
    args = build_parser(settings).parse_args(argv)
    configure_logging(settings.LOG_LEVEL)
    try:
        return args.handler(args)
    except DegeneracyError as e:
        log.error("[%s] datos degenerados: %s", args.command.upper(), e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, ValidationError, OSError) as e:
        log.error("[%s] entrada inválida: %s", args.command.upper(), e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
