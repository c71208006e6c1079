"""Exhaustive cocycle enumeration for small groups.

Shares nothing with the Smith-form machinery in `phases`: generator values
are enumerated over (Z/M)^r, extended along a breadth-first word tree and
filtered by the compatibility condition; coboundaries come from gauges in
(1/M²)Z^r.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

from src.algebra.lattices import LatticeModule
from src.core.errors import QcohomError

log = logging.getLogger("oracle")

MAX_ENUMERATION = 100_000

Values = tuple[tuple[int, ...], ...]


class OracleTooLarge(QcohomError):
    pass


def _guard(count: int, what: str) -> None:
    if count > MAX_ENUMERATION:
        raise OracleTooLarge(f"{what}: {count} candidates exceed {MAX_ENUMERATION}")


def _matvec(rows: Sequence[Sequence[int]], v: Sequence[int]) -> tuple[int, ...]:
    return tuple(sum(a * x for a, x in zip(row, v)) for row in rows)


def _extend(lattice: LatticeModule, on_generators: dict[int, tuple[int, ...]], modulus: int) -> Values | None:
    group, r = lattice.group, lattice.rank
    values: list[tuple[int, ...] | None] = [None] * group.order
    values[0] = (0,) * r
    order = [0]
    for y in order:
        for s, vs in on_generators.items():
            x = group.table[y][s]
            if values[x] is None:
                moved = _matvec(group.reps[y].entries, vs)
                values[x] = tuple((a + b) % modulus for a, b in zip(moved, values[y]))  # type: ignore[arg-type]
                order.append(x)
    if any(v is None for v in values):
        return None
    return tuple(v for v in values if v is not None)


def _compatible(lattice: LatticeModule, values: Values, modulus: int) -> bool:
    group = lattice.group
    for g in group.elements():
        rows = group.reps[g].entries
        for h in group.elements():
            moved = _matvec(rows, values[h])
            if any((a - b - c) % modulus for a, b, c in zip(values[group.table[g][h]], moved, values[g])):
                return False
    return True


def enumerate_cocycles(lattice: LatticeModule, modulus: int | None = None) -> list[Values]:
    m = modulus or lattice.group.order
    r = lattice.rank
    gens = lattice.group.generators
    _guard(m ** (r * len(gens)), f"cocycles of {lattice.name}")
    out = []
    for flat in itertools.product(range(m), repeat=r * len(gens)):
        on_gens = {s: tuple(flat[i * r:(i + 1) * r]) for i, s in enumerate(gens)}
        values = _extend(lattice, on_gens, m)
        if values is not None and _compatible(lattice, values, m):
            out.append(values)
    log.debug("oracle: %d cocycles of %s mod %d", len(out), lattice.name, m)
    return out


def enumerate_coboundaries(lattice: LatticeModule, modulus: int | None = None) -> set[Values]:
    """Coboundaries of gauges c/M² whose values land in (1/M)Z."""
    m = modulus or lattice.group.order
    r = lattice.rank
    big = m * m
    _guard(big ** r, f"gauges of {lattice.name}")
    group = lattice.group
    out: set[Values] = set()
    for c in itertools.product(range(big), repeat=r):
        values = []
        for g in group.elements():
            moved = _matvec(group.reps[g].entries, c)
            diff = [a - b for a, b in zip(moved, c)]
            if any(x % m for x in diff):
                break
            values.append(tuple((x // m) % m for x in diff))
        else:
            out.add(tuple(values))
    return out


@dataclass(frozen=True)
class OracleCount:
    cocycles: int
    coboundaries: int

    @property
    def classes(self) -> int:
        return self.cocycles // self.coboundaries


def oracle_class_count(lattice: LatticeModule) -> OracleCount:
    cocycles = enumerate_cocycles(lattice)
    boundaries = enumerate_coboundaries(lattice)
    return OracleCount(len(cocycles), len(boundaries))


def oracle_is_coboundary(lattice: LatticeModule, values: Values, modulus: int | None = None) -> bool:
    m = modulus or lattice.group.order
    reduced = tuple(tuple(x % m for x in v) for v in values)
    return reduced in enumerate_coboundaries(lattice, m)


def oracle_is_feasible(lattice: LatticeModule) -> bool:
    m, r = lattice.group.order, lattice.rank
    return m ** (r * len(lattice.group.generators)) <= MAX_ENUMERATION and (m * m) ** r <= MAX_ENUMERATION
