"""CLI module."""

from qmvos.cli.main import app, cli

__all__ = ["app", "cli"]
