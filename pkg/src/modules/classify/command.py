# src/modules/classify/command.py
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

from src.algebra.homology import dihedral_fast_path, h1_bar
from src.algebra.lattices import LatticeModule, PresetCatalog
from src.algebra.phases import cohomology_classes, pair
from src.algebra.products import expressibility_flags
from src.core.app import EXIT_OK, QcohomApp
from src.core.config import JobConfig, Settings
from src.core.errors import QcohomError
from src.core.inputs import resolve_lattices
from src.core.utils import emit, render

log = logging.getLogger("classify")

HEADERS = ("lattice", "group", "order", "rank", "factors", "fingerprints", "expressibility", "fast_path")


class DualityMismatch(QcohomError):
    pass


@dataclass(frozen=True)
class SymmetryTypeRecord:
    """Invariant factors of H¹(G, L̂) plus, per cohomology generator, its pairings with the H1 generators."""

    lattice: str
    group: str
    order: int
    rank: int
    invariant_factors: tuple[int, ...]
    fingerprints: tuple[tuple[Fraction, ...], ...]
    expressibility: tuple[str, ...]
    fast_path: tuple[int, ...] | None = None

    def to_dict(self) -> dict:
        out = {
            "lattice": self.lattice,
            "group": self.group,
            "order": self.order,
            "rank": self.rank,
            "invariant_factors": list(self.invariant_factors),
            "fingerprints": [list(f) for f in self.fingerprints],
            "expressibility": list(self.expressibility),
        }
        if self.fast_path is not None:
            out["fast_path"] = list(self.fast_path)
        return out

    def row(self) -> list:
        return [
            self.lattice,
            self.group,
            self.order,
            self.rank,
            "(" + ",".join(str(d) for d in self.invariant_factors) + ")",
            ";".join(" ".join(f"{x.numerator}/{x.denominator}" for x in f) for f in self.fingerprints),
            " ".join(self.expressibility),
            "" if self.fast_path is None else "(" + ",".join(str(d) for d in self.fast_path) + ")",
        ]


def classify_lattice(lattice: LatticeModule, *, two_d: bool = False) -> SymmetryTypeRecord:
    h1 = h1_bar(lattice)
    classes = cohomology_classes(lattice)
    if classes.invariant_factors != h1.invariant_factors:
        raise DualityMismatch(
            f"{lattice.name}: H1 factors {h1.invariant_factors} vs H^1 factors {classes.invariant_factors}")
    fingerprints = tuple(tuple(pair(phi, c) for c in h1.generators) for phi in classes.generators)
    fast = None
    if two_d:
        fast = dihedral_fast_path(lattice)
        if fast is not None and fast != h1.invariant_factors:
            raise DualityMismatch(f"{lattice.name}: dihedral shortcut gives {fast}, bar complex {h1.invariant_factors}")
    log.info("%s: H1 = %s", lattice.name, h1.invariant_factors)
    return SymmetryTypeRecord(
        lattice=lattice.name,
        group=lattice.group.describe(),
        order=lattice.group.order,
        rank=lattice.rank,
        invariant_factors=h1.invariant_factors,
        fingerprints=fingerprints,
        expressibility=tuple(expressibility_flags(lattice, h1)),
        fast_path=fast,
    )


class Classify:
    def __init__(self, app: QcohomApp):
        self.app = app

    def __call__(self, job: JobConfig) -> int:
        settings = self.app.registry.get(Settings)
        catalog = self.app.registry.get(PresetCatalog)
        records = [classify_lattice(lat, two_d=job.two_d) for lat in resolve_lattices(job, catalog, settings)]
        text = render(job.format, HEADERS, [r.row() for r in records], [r.to_dict() for r in records])
        emit(text, job.out)
        return EXIT_OK


def setup(app: QcohomApp) -> None:
    sub = app.add_command("classify", "Compute H^1(G, L^) for each input lattice.", Classify(app))
    sub.add_argument("--two-d", dest="two_d", action="store_true",
                     help="also run the dihedral shortcut and require agreement")
