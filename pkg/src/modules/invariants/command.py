# src/modules/invariants/command.py
from __future__ import annotations

import logging

from src.algebra.homology import h1_bar
from src.algebra.lattices import PresetCatalog
from src.algebra.phases import cohomology_classes, pairing_table
from src.core.app import EXIT_OK, QcohomApp
from src.core.config import JobConfig, Settings
from src.core.errors import InputError
from src.core.inputs import single_lattice
from src.core.utils import emit, render

log = logging.getLogger("invariants")

HEADERS = ("cycle", "class", "coordinates", "value")


class Invariants:
    def __init__(self, app: QcohomApp):
        self.app = app

    def __call__(self, job: JobConfig) -> int:
        lattice = single_lattice(job, self.app.registry.get(PresetCatalog), self.app.registry.get(Settings))
        h1 = h1_bar(lattice)
        classes = cohomology_classes(lattice)
        if job.class_index is not None and not 0 <= job.class_index < max(classes.order, 1):
            raise InputError(f"--class {job.class_index} out of range: {lattice.name} has {classes.order} class(es)")
        entries = pairing_table(lattice, h1, classes, job.class_index)
        rows = [[e.cycle, e.class_index, e.coordinates, e.value] for e in entries]
        labels = lattice.group.labels
        records = {
            "lattice": lattice.name,
            "invariant_factors": list(h1.invariant_factors),
            "cycles": [c.to_dict(labels) for c in h1.generators],
            "pairings": [
                {"cycle": e.cycle, "class": e.class_index, "coordinates": list(e.coordinates), "value": e.value}
                for e in entries
            ],
        }
        emit(render(job.format, HEADERS, rows, records), job.out)
        return EXIT_OK


def setup(app: QcohomApp) -> None:
    sub = app.add_command("invariants", "Pair every cohomology class with the generating cycles of H1.", Invariants(app))
    sub.add_argument("--class", dest="class_index", type=int, metavar="INDEX", help="restrict to one class")
