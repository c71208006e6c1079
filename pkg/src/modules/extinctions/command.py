# src/modules/extinctions/command.py
from __future__ import annotations

import logging

from src.algebra.diffraction import box_vectors
from src.algebra.lattices import PresetCatalog
from src.algebra.phases import extinction_set
from src.core.app import EXIT_OK, QcohomApp
from src.core.config import JobConfig, Settings
from src.core.inputs import select_class, single_lattice
from src.core.utils import emit, render

log = logging.getLogger("extinctions")


class Extinctions:
    def __init__(self, app: QcohomApp):
        self.app = app

    def __call__(self, job: JobConfig) -> int:
        lattice = single_lattice(job, self.app.registry.get(PresetCatalog), self.app.registry.get(Settings))
        index, phi = select_class(lattice, job.class_index)
        labels = lattice.group.labels
        extinct = [
            (e.k, labels[e.witness]) for e in extinction_set(phi, box_vectors(lattice.rank, job.kmax))
            if e.witness is not None
        ]
        headers = tuple(f"k{i}" for i in range(lattice.rank)) + ("witness",)
        rows = [[*k, witness] for k, witness in extinct]
        records = {
            "lattice": lattice.name,
            "class": index,
            "kmax": job.kmax,
            "extinct": [{"k": list(k), "witness": witness} for k, witness in extinct],
        }
        log.info("%s class %d: %d extinct spot(s) with |k_i| <= %d", lattice.name, index, len(extinct), job.kmax)
        emit(render(job.format, headers, rows, records), job.out)
        return EXIT_OK


def setup(app: QcohomApp) -> None:
    sub = app.add_command("extinctions", "List systematically extinct lattice vectors in a box.", Extinctions(app))
    sub.add_argument("--class", dest="class_index", type=int, metavar="INDEX")
    sub.add_argument("--kmax", type=int, default=2, help="box half-width (default 2)")
