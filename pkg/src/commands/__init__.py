"""Sub-comandos de la CLI; cada módulo expone register(subparsers)."""
from src.commands import eda, evaluate, ingest, predict, train

COMMANDS = (ingest, eda, train, evaluate, predict)
