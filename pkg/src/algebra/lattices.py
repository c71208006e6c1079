from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
from sympy import Poly, Symbol, ZZ, divisors, isprime

from src.algebra.exactalg import F2Matrix, IntMatrix, Vector, hermite_basis, lattice_contains, smith_normal_form
from src.algebra.groups import (
    DEFAULT_GROUP_CAP,
    GroupTableError,
    NotFinite,
    NotNormal,
    PointGroup,
    RelationViolation,
    SubgroupData,
    WrongOrder,
    cyclic_group,
    dihedral_group,
    group_from_descriptor,
)
from src.core.errors import InputError, QcohomError
from src.core.utils import read_json

log = logging.getLogger("lattices")

PRESET_DIR = Path(__file__).resolve().parents[2] / "config" / "presets"

_x = Symbol("x")


class UnknownPreset(InputError):
    pass


class NotAUnit(QcohomError):
    pass


class NotElementary(QcohomError):
    pass


@dataclass(frozen=True)
class LatticeModule:
    """L = Z^r with the right action of `group`; `embedding` (r x d) is for display only."""

    name: str
    group: PointGroup
    embedding: tuple[tuple[float, ...], ...] | None = None
    cyclotomic_order: int | None = None
    description: str = ""

    def __post_init__(self) -> None:
        if self.embedding is None:
            return
        arr = np.asarray(self.embedding, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != self.rank:
            raise InputError(f"{self.name}: embedding must have one row per basis vector ({self.rank})")
        if arr.shape[1] > self.rank or np.linalg.matrix_rank(arr) != arr.shape[1]:
            raise InputError(f"{self.name}: embedding must have full column rank")

    @property
    def rank(self) -> int:
        return self.group.rank

    def rep(self, g: int) -> IntMatrix:
        return self.group.reps[g]

    def act(self, k: Sequence[int], g: int) -> Vector:
        return self.group.reps[g].act(k)

    def presented(self) -> PresentedModule:
        return PresentedModule(self.name, self.group, self.group.reps, (), self.rank)


@dataclass(frozen=True)
class PresentedModule:
    """Z^r / span(relations) with `group` acting through `actions`, exact modulo the relations."""

    name: str
    group: PointGroup
    actions: tuple[IntMatrix, ...]
    relations: tuple[Vector, ...]
    rank: int

    def __post_init__(self) -> None:
        if len(self.actions) != self.group.order:
            raise GroupTableError("one action matrix per element is required")
        if not self.relations:
            return
        for g, a in enumerate(self.actions):
            for rel in self.relations:
                if not lattice_contains(self.relations, a.act(rel)):
                    raise GroupTableError(f"action of {self.group.labels[g]} does not preserve the relations")
        for g in self.group.elements():
            for s in self.group.generators:
                diff = self.actions[self.group.table[g][s]] - self.actions[g] @ self.actions[s]
                if any(not lattice_contains(self.relations, row) for row in diff.entries):
                    raise GroupTableError("actions are not compatible with the table modulo the relations")


# ---------- cyclotomic integers ----------

@lru_cache(maxsize=None)
def cyclotomic_polynomial(order: int) -> Poly:
    """F_N from x^N - 1 = prod_{d | N} F_d(x)."""
    if order < 1:
        raise ValueError("order must be positive")
    p = Poly(_x ** order - 1, _x, domain=ZZ)
    for d in divisors(order)[:-1]:
        p = p.exquo(cyclotomic_polynomial(d))
    return p


def cyclotomic_norm_one_minus_zeta(order: int) -> int:
    if order < 2:
        raise ValueError("order must be at least 2")
    return int(cyclotomic_polynomial(order).eval(1))


def _low_to_high(p: Poly, n: int) -> list[int]:
    coeffs = [int(c) for c in reversed(p.all_coeffs())]
    return (coeffs + [0] * n)[:n]


def multiplication_matrix(order: int, coefficients: Sequence[int]) -> IntMatrix:
    """Matrix of k -> k·a in the power basis 1, ζ, ..., where a = Σ c_i ζ^i; row i is ζ^i·a."""
    f = cyclotomic_polynomial(order)
    n = f.degree()
    a = Poly(list(reversed([int(c) for c in coefficients])) or [0], _x, domain=ZZ)
    rows = [_low_to_high((Poly(_x ** i, _x, domain=ZZ) * a).rem(f), n) for i in range(n)]
    return IntMatrix.from_rows(rows, n)


def conjugation_matrix(order: int) -> IntMatrix:
    """ζ -> ζ^-1 in the power basis."""
    f = cyclotomic_polynomial(order)
    n = f.degree()
    rows = [_low_to_high(Poly(_x ** ((order - i) % order), _x, domain=ZZ).rem(f), n) for i in range(n)]
    return IntMatrix.from_rows(rows, n)


def cyclotomic_embedding(order: int) -> tuple[tuple[float, ...], ...]:
    n = cyclotomic_polynomial(order).degree()
    if n < 2:
        return tuple((1.0,) for _ in range(n))
    return tuple(
        (math.cos(2 * math.pi * i / order), math.sin(2 * math.pi * i / order)) for i in range(n)
    )


def cyclotomic_lattice(order: int, with_mirror: bool = False) -> LatticeModule:
    if order < 2:
        raise ValueError("order must be at least 2")
    rotation = multiplication_matrix(order, (0, 1))
    if with_mirror:
        group = dihedral_group(order, rotation, conjugation_matrix(order))
    else:
        group = cyclic_group(order, rotation)
    name = f"{'D' if with_mirror else 'C'}{order}_zeta{order}"
    return LatticeModule(name, group, embedding=cyclotomic_embedding(order), cyclotomic_order=order)


def scale_automorphism(lattice: LatticeModule, multiplier: Sequence[int]) -> IntMatrix:
    """Multiplication by a unit Σ c_i ζ^i of Z[ζ]; commutes with the rotation."""
    if lattice.cyclotomic_order is None:
        raise InputError(f"{lattice.name} is not a cyclotomic lattice")
    m = multiplication_matrix(lattice.cyclotomic_order, multiplier)
    det = m.det()
    if abs(det) != 1:
        raise NotAUnit(f"multiplier {tuple(multiplier)} has norm {det}")
    return m


def dual_action(lattice: LatticeModule, name: str | None = None) -> LatticeModule:
    """Contragredient action g -> transpose(inverse(rep(g))) on Hom(L, Z).

    The result carries no cyclotomic order: its rotation is no longer multiplication by ζ.
    """
    reps = tuple(m.inverse().transpose() for m in lattice.group.reps)
    group = dataclasses.replace(lattice.group, reps=reps)
    return LatticeModule(
        name or f"{lattice.name}_dual", group, description=lattice.description,
    )


# ---------- coinvariants ----------

def coinvariant_module(lattice: LatticeModule, sub: SubgroupData) -> PresentedModule:
    """L_H = L / <k·h - k> with Q = G/H acting through coset representatives."""
    if not sub.is_normal or sub.quotient is None:
        raise NotNormal("coinvariants need a normal subgroup")
    r = lattice.rank
    ident = IntMatrix.identity(r)
    rows = [row for h in sub.members for row in (lattice.rep(h) - ident).entries]
    relations = tuple(hermite_basis(rows, r))
    actions = tuple(lattice.rep(x) for x in sub.coset_reps)
    return PresentedModule(f"{lattice.name}_H", sub.quotient, actions, relations, r)


@dataclass(frozen=True)
class CoinvariantSpace:
    """L_H as an F_p-space: project(k) = k·basis mod p, with the induced quotient action."""

    prime: int | None
    dimension: int
    basis: IntMatrix
    lifts: tuple[Vector, ...]
    actions: tuple[IntMatrix, ...]

    def project(self, k: Sequence[int]) -> Vector:
        if not self.dimension:
            return ()
        assert self.prime is not None
        return tuple(x % self.prime for x in self.basis.act(k))

    def f2_matrix(self, q: int) -> F2Matrix:
        if self.prime not in (2, None):
            raise NotElementary(f"space is over F_{self.prime}, not F_2")
        return F2Matrix.from_rows(self.actions[q].entries, self.dimension)


def coinvariants_mod(
    lattice: LatticeModule, sub: SubgroupData, ideal_generator: int | str | None = None,
) -> CoinvariantSpace:
    module = coinvariant_module(lattice, sub)
    r = lattice.rank
    if ideal_generator is not None:
        g = lattice.group.index(ideal_generator)
        if g not in sub:
            raise InputError(f"{lattice.group.labels[g]} is not in the subgroup")
        span = hermite_basis((lattice.rep(g) - IntMatrix.identity(r)).entries, r)
        if tuple(span) != module.relations:
            raise NotElementary(f"{lattice.group.labels[g]} does not generate the coinvariant ideal")

    snf = smith_normal_form(IntMatrix.from_rows(module.relations, r))
    factors = [snf.diagonal[i] if i < snf.rank else 0 for i in range(r)]
    kept = [i for i, d in enumerate(factors) if d != 1]
    primes = {factors[i] for i in kept}
    if 0 in primes:
        raise NotElementary("coinvariants have a free part")
    if len(primes) > 1 or any(not isprime(p) for p in primes):
        raise NotElementary(f"coinvariants are not elementary abelian: factors {sorted(primes)}")
    prime = primes.pop() if primes else None

    v = snf.v
    basis = v.select_columns(kept)
    lifts = tuple(snf.v_inv.row(i) for i in kept)
    actions = []
    for a in module.actions:
        rows = [[x % prime for x in basis.act(a.act(lift))] for lift in lifts] if prime else []
        actions.append(IntMatrix.from_rows(rows, len(kept)))
    log.debug("coinvariants of %s: prime %s, dimension %d", lattice.name, prime, len(kept))
    return CoinvariantSpace(prime, len(kept), basis, lifts, tuple(actions))


# ---------- descriptors and presets ----------

def lattice_from_descriptor(
    data: Mapping[str, Any], *, name: str, cap: int = DEFAULT_GROUP_CAP, source: str = "<lattice>",
) -> LatticeModule:
    try:
        if "cyclotomic" in data:
            entry = data["cyclotomic"]
            lattice = cyclotomic_lattice(int(entry["order"]), bool(entry.get("mirror", False)))
            group = lattice.group
            cyclo: int | None = lattice.cyclotomic_order
            default_embedding = lattice.embedding
        else:
            cyclo, default_embedding = None, None
            if "cyclic" in data:
                entry = data["cyclic"]
                group = cyclic_group(int(entry["order"]), IntMatrix.from_rows(entry["rotation"]))
            elif "dihedral" in data:
                entry = data["dihedral"]
                group = dihedral_group(
                    int(entry["order"]), IntMatrix.from_rows(entry["rotation"]), IntMatrix.from_rows(entry["mirror"]))
            elif "group" in data:
                group = group_from_descriptor(data["group"], cap=cap, source=source)
            else:
                raise InputError(f"{source}: descriptor needs one of cyclotomic, cyclic, dihedral, group")
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{source}: malformed lattice descriptor ({e})") from e
    except (WrongOrder, RelationViolation, GroupTableError, NotFinite) as e:
        raise InputError(f"{source}: {e}") from e

    name = str(data.get("name", name))
    description = str(data.get("description", ""))
    lattice = LatticeModule(name, group, cyclotomic_order=cyclo, description=description)
    if data.get("dual"):
        lattice = dual_action(lattice, name)
    raw = data.get("embedding", default_embedding)
    if raw is not None:
        embedding = tuple(tuple(float(x) for x in row) for row in raw)
        lattice = dataclasses.replace(lattice, embedding=embedding)
    return lattice


def load_lattice_files(group_path: Path, lattice_path: Path, *, cap: int = DEFAULT_GROUP_CAP) -> LatticeModule:
    """--group FILE --lattice FILE: group descriptor plus {"rank", "name", "embedding", "dual"}."""
    group = group_from_descriptor(read_json(group_path), cap=cap, source=str(group_path))
    data = read_json(lattice_path)
    try:
        rank = int(data["rank"])
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{lattice_path}: malformed lattice descriptor ({e})") from e
    if rank != group.rank:
        raise InputError(f"{lattice_path}: rank {rank} does not match the group's {group.rank}")
    name = str(data.get("name", lattice_path.stem))
    lattice = LatticeModule(name, group)
    if data.get("dual"):
        lattice = dual_action(lattice, name)
    if data.get("embedding") is not None:
        embedding = tuple(tuple(float(x) for x in row) for row in data["embedding"])
        lattice = dataclasses.replace(lattice, embedding=embedding)
    return lattice


class PresetCatalog:
    """JSON preset descriptors in one directory, addressed by file stem."""

    def __init__(self, directory: Path = PRESET_DIR, *, cap: int = DEFAULT_GROUP_CAP) -> None:
        self.directory = Path(directory)
        self.cap = cap

    def names(self) -> list[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def descriptor(self, name: str) -> dict[str, Any]:
        path = self.directory / f"{name}.json"
        if not path.is_file():
            raise UnknownPreset(f"unknown preset {name!r} (looked in {self.directory})")
        return read_json(path)

    def load(self, name: str) -> LatticeModule:
        path = self.directory / f"{name}.json"
        lattice = lattice_from_descriptor(self.descriptor(name), name=name, cap=self.cap, source=str(path))
        log.debug("loaded preset %s: rank %d, order %d", name, lattice.rank, lattice.group.order)
        return lattice

    def expected_factors(self, name: str) -> tuple[int, ...] | None:
        expected = self.descriptor(name).get("expected")
        if not expected or "invariant_factors" not in expected:
            return None
        return tuple(int(d) for d in expected["invariant_factors"])


def preset_lattice(name: str, directory: Path | None = None, *, cap: int = DEFAULT_GROUP_CAP) -> LatticeModule:
    return PresetCatalog(directory or PRESET_DIR, cap=cap).load(name)
