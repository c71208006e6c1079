from __future__ import annotations

import logging

from src.algebra.lattices import LatticeModule, PresetCatalog, load_lattice_files, preset_lattice
from src.algebra.phases import PhaseCocycle, class_representative, cohomology_classes
from src.core.config import JobConfig, Settings
from src.core.errors import InputError

log = logging.getLogger("inputs")


def resolve_lattices(job: JobConfig, catalog: PresetCatalog, settings: Settings) -> list[LatticeModule]:
    """Lattices named by a job, in command-line order; --all means every preset, sorted."""
    names = list(job.presets)
    if job.all_presets:
        names.extend(n for n in catalog.names() if n not in names)
    lattices = [preset_lattice(name, catalog.directory, cap=catalog.cap) for name in names]
    if job.group_path is not None and job.lattice_path is not None:
        lattices.append(load_lattice_files(job.group_path, job.lattice_path, cap=settings.group_cap))
    if not lattices:
        raise InputError("no input: give --preset NAME, --all, or --group FILE --lattice FILE")
    log.info("resolved %d lattice(s): %s", len(lattices), ", ".join(lat.name for lat in lattices))
    return lattices


def single_lattice(job: JobConfig, catalog: PresetCatalog, settings: Settings) -> LatticeModule:
    lattices = resolve_lattices(job, catalog, settings)
    if len(lattices) != 1:
        raise InputError(f"{job.command} takes exactly one lattice, got {len(lattices)}")
    return lattices[0]


def select_class(lattice: LatticeModule, index: int | None) -> tuple[int, PhaseCocycle]:
    """Class `index` in mixed-radix order; by default class 1 when it exists, else 0."""
    classes = cohomology_classes(lattice)
    count = max(classes.order, 1)
    if index is None:
        index = 1 if count > 1 else 0
    if not 0 <= index < count:
        raise InputError(f"--class {index} out of range: {lattice.name} has {count} class(es)")
    return index, class_representative(lattice, classes, classes.coords_at(index))
