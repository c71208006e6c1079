from __future__ import annotations

import argparse
import importlib
import logging
import pkgutil
import sys
from typing import Callable, Sequence

from src.core.config import FORMATS, JobConfig, Settings
from src.core.errors import InputError, QcohomError
from src.core.registry import Registry

log = logging.getLogger("app")

Handler = Callable[[JobConfig], int]

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3


class QcohomApp:
    def __init__(self, settings: Settings, registry: Registry) -> None:
        self.settings = settings
        self.registry = registry
        self.parser = argparse.ArgumentParser(
            prog="qcohom",
            description="Cohomology of point groups acting on lattices: symmetry types, extinctions, diffraction data.",
        )
        self._subparsers = self.parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
        self.handlers: dict[str, Handler] = {}

    def add_command(self, name: str, help: str, handler: Handler) -> argparse.ArgumentParser:
        """Register a subcommand with the shared input and output options."""
        if name in self.handlers:
            raise ValueError(f"command {name!r} registered twice")
        sub = self._subparsers.add_parser(name, help=help, description=help)
        sub.add_argument("--preset", action="append", metavar="NAME", help="preset lattice (repeatable)")
        sub.add_argument("--all", action="store_true", help="every preset in the preset directory")
        sub.add_argument("--group", metavar="FILE", help="group descriptor JSON")
        sub.add_argument("--lattice", metavar="FILE", help="lattice descriptor JSON")
        sub.add_argument("--format", choices=FORMATS, default="table")
        sub.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        self.handlers[name] = handler
        return sub

    def load_all_commands(self, root_pkg: str = "src.modules") -> list[str]:
        try:
            pkg = importlib.import_module(root_pkg)
        except ModuleNotFoundError as e:
            logging.error("Cannot import %s: %s", root_pkg, e)
            return []

        found = [
            mod.name for mod in pkgutil.walk_packages(pkg.__path__, pkg.__name__ + ".")
            if mod.name.endswith(".command")
        ]
        if not found:
            logging.warning("No commands found under %s", root_pkg)

        loaded = []
        for name in sorted(found):
            try:
                module = importlib.import_module(name)
                module.setup(self)
                loaded.append(name)
                logging.info("Loaded command module %s", name)
            except Exception:
                logging.exception("Failed to load %s", name)
        return loaded

    def run(self, argv: Sequence[str] | None = None) -> int:
        try:
            ns = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code or 0) if not isinstance(e.code, str) else EXIT_INPUT
        try:
            job = JobConfig.from_namespace(ns)
            return self.handlers[job.command](job)
        except InputError as e:
            log.error("%s", e)
            print(f"qcohom: {e}", file=sys.stderr)
            return EXIT_INPUT
        except QcohomError as e:
            log.error("%s: %s", type(e).__name__, e)
            print(f"qcohom: {type(e).__name__}: {e}", file=sys.stderr)
            return EXIT_INTERNAL
        except Exception:
            log.exception("unexpected failure in %s", ns.command)
            return EXIT_INTERNAL
