from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from src.algebra.exactalg import Vector
from src.algebra.lattices import LatticeModule
from src.algebra.phases import PhaseCocycle, extinction_set
from src.core.errors import QcohomError

log = logging.getLogger("diffraction")


class NoEmbedding(QcohomError):
    pass


@dataclass(frozen=True)
class DiffractionSpot:
    k: Vector
    position: tuple[float, ...] | None
    intensity: float
    extinct: bool
    witness: str | None = None
    phase: Fraction | None = None


def box_vectors(rank: int, kmax: int) -> list[Vector]:
    """[-kmax, kmax]^rank in lexicographic order."""
    if kmax < 0:
        raise ValueError("kmax must be non-negative")
    return list(itertools.product(range(-kmax, kmax + 1), repeat=rank))


def orbit(lattice: LatticeModule, k: Vector) -> dict[Vector, int]:
    """k·g -> first g reaching it."""
    out: dict[Vector, int] = {}
    for g in lattice.group.elements():
        out.setdefault(lattice.act(k, g), g)
    return out


def synthesize_spots(
    lattice: LatticeModule,
    phi: PhaseCocycle,
    kmax: int,
    seed: int = 0,
    *,
    positions: bool = True,
) -> list[DiffractionSpot]:
    """Spots over the box with one seeded amplitude per orbit.

    On the orbit of its lexicographically least member k0, ρ̂(k0·g) carries the
    phase Φ_g(k0); orbits whose stabiliser sees a nonzero phase are extinct.
    """
    embedding = None
    if positions:
        if lattice.embedding is None:
            raise NoEmbedding(f"{lattice.name} has no embedding for spot positions")
        embedding = np.asarray(lattice.embedding, dtype=float)

    ks = box_vectors(lattice.rank, kmax)
    in_box = set(ks)
    representative: dict[Vector, Vector] = {}
    orbits: dict[Vector, dict[Vector, int]] = {}
    for k in ks:
        if k in representative:
            continue
        orb = orbit(lattice, k)
        k0 = min(orb)
        orbits[k0] = orbit(lattice, k0)
        for member in orb:
            if member in in_box:
                representative[member] = k0

    rng = np.random.default_rng(seed)
    amplitude: dict[Vector, float] = {}
    for k0 in sorted(orbits):
        amplitude[k0] = float(rng.uniform(0.2, 1.0)) if any(k0) else 1.0
    extinct_orbits = {e.k for e in extinction_set(phi, sorted(orbits)) if e.extinct}
    witnesses = {e.k: e.witness for e in extinction_set(phi, ks) if e.extinct}

    spots = []
    for k in ks:
        k0 = representative[k]
        position = tuple(float(x) for x in np.asarray(k, dtype=float) @ embedding) if embedding is not None else None
        if k0 in extinct_orbits:
            witness = witnesses.get(k)
            label = lattice.group.labels[witness] if witness is not None else None
            spots.append(DiffractionSpot(k, position, 0.0, True, label, None))
            continue
        g = orbits[k0][k]
        spots.append(DiffractionSpot(k, position, amplitude[k0] ** 2, False, None, phi.value(g, k0)))
    log.debug("synthesised %d spots for %s over %d orbits", len(spots), lattice.name, len(orbits))
    return spots

