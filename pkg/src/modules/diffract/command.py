# src/modules/diffract/command.py
from __future__ import annotations

from src.algebra.diffraction import synthesize_spots
from src.algebra.lattices import PresetCatalog
from src.core.app import EXIT_OK, QcohomApp
from src.core.config import JobConfig, Settings
from src.core.inputs import select_class, single_lattice
from src.core.utils import emit, render


class Diffract:
    def __init__(self, app: QcohomApp):
        self.app = app

    def __call__(self, job: JobConfig) -> int:
        lattice = single_lattice(job, self.app.registry.get(PresetCatalog), self.app.registry.get(Settings))
        index, phi = select_class(lattice, job.class_index)
        spots = synthesize_spots(lattice, phi, job.kmax, job.seed)
        dims = len(spots[0].position or ()) if spots else 0
        headers = (
            tuple(f"k{i}" for i in range(lattice.rank))
            + tuple(f"x{i}" for i in range(dims))
            + ("intensity", "extinct", "witness", "phase")
        )
        rows = [[*s.k, *(s.position or ()), s.intensity, int(s.extinct), s.witness, s.phase] for s in spots]
        records = {
            "lattice": lattice.name,
            "class": index,
            "seed": job.seed,
            "spots": [
                {"k": list(s.k), "position": list(s.position or ()), "intensity": s.intensity,
                 "extinct": s.extinct, "witness": s.witness, "phase": s.phase}
                for s in spots
            ],
        }
        emit(render(job.format, headers, rows, records), job.out)
        return EXIT_OK


def setup(app: QcohomApp) -> None:
    sub = app.add_command("diffract", "Synthetic diffraction spots respecting the chosen class.", Diffract(app))
    sub.add_argument("--class", dest="class_index", type=int, metavar="INDEX")
    sub.add_argument("--kmax", type=int, default=2)
    sub.add_argument("--seed", type=int, default=0, help="seed for the amplitude generator")
