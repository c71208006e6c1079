from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Literal, Sequence

from src.algebra.exactalg import (
    AbelianGroupStructure,
    IntMatrix,
    Vector,
    kernel_basis,
    quotient_structure,
    smith_normal_form,
    solve_mod,
)
from src.algebra.homology import Chain1, NotACycle, boundary1, h1_bar, tree_reduction
from src.algebra.lattices import LatticeModule
from src.core.errors import QcohomError

log = logging.getLogger("phases")


class NotACocycle(QcohomError):
    pass


class HypothesisFails(QcohomError):
    pass


class NotEquivariant(QcohomError):
    pass


class ModulusTooSmall(QcohomError):
    pass


def _dot(k: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(k, v))


# ---------- cocycles and gauges ----------

@dataclass(frozen=True)
class PhaseCocycle:
    """Φ_g(k) = k·values[g] / modulus (mod 1).

    Values are column vectors reduced mod `modulus`. The group-compatibility
    condition Φ_gh(k) = Φ_h(k·g) + Φ_g(k), i.e. v_gh ≡ rep(g)·v_h + v_g, is
    checked on construction.
    """

    lattice: LatticeModule
    modulus: int
    values: tuple[Vector, ...]

    def __post_init__(self) -> None:
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        group, r = self.lattice.group, self.lattice.rank
        if len(self.values) != group.order or any(len(v) != r for v in self.values):
            raise ValueError(f"need one length-{r} vector per element of {group.describe()}")
        reduced = tuple(tuple(x % self.modulus for x in v) for v in self.values)
        object.__setattr__(self, "values", reduced)
        bad = self.violations()
        if bad:
            g, h = bad[0]
            raise NotACocycle(
                f"compatibility fails at ({group.labels[g]}, {group.labels[h]}) and {len(bad) - 1} other pairs")

    @classmethod
    def zero(cls, lattice: LatticeModule, modulus: int | None = None) -> PhaseCocycle:
        m = modulus or lattice.group.order
        return cls(lattice, m, tuple((0,) * lattice.rank for _ in lattice.group.elements()))

    @classmethod
    def from_fractions(cls, lattice: LatticeModule, values: Sequence[Sequence[Fraction | int]]) -> PhaseCocycle:
        fracs = [[Fraction(x) for x in v] for v in values]
        m = lcm(1, *(x.denominator for v in fracs for x in v))
        return cls(lattice, m, tuple(tuple(int(x * m) for x in v) for v in fracs))

    def violations(self) -> list[tuple[int, int]]:
        group = self.lattice.group
        m = self.modulus
        out = []
        for g in group.elements():
            rep_g = group.reps[g]
            for h in group.elements():
                lhs = self.values[group.table[g][h]]
                rhs = rep_g.apply(self.values[h])
                if any((a - b - c) % m for a, b, c in zip(lhs, rhs, self.values[g])):
                    out.append((g, h))
        return out

    def value(self, g: int, k: Sequence[int]) -> Fraction:
        return Fraction(_dot(k, self.values[g]), self.modulus) % 1

    def component(self, g: int) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self.modulus) for x in self.values[g])

    def with_modulus(self, modulus: int) -> PhaseCocycle:
        if modulus % self.modulus:
            raise ModulusTooSmall(f"modulus {modulus} is not a multiple of {self.modulus}")
        f = modulus // self.modulus
        return PhaseCocycle(self.lattice, modulus, tuple(tuple(f * x for x in v) for v in self.values))

    def simplified(self) -> PhaseCocycle:
        """Same cocycle over the smallest modulus that still represents it."""
        g = gcd(self.modulus, *(x for v in self.values for x in v))
        if g == 1:
            return self
        return PhaseCocycle(self.lattice, self.modulus // g, tuple(tuple(x // g for x in v) for v in self.values))

    def __add__(self, other: PhaseCocycle) -> PhaseCocycle:
        m = lcm(self.modulus, other.modulus)
        a, b = self.with_modulus(m), other.with_modulus(m)
        return PhaseCocycle(self.lattice, m, tuple(
            tuple(x + y for x, y in zip(u, v)) for u, v in zip(a.values, b.values)))

    def __neg__(self) -> PhaseCocycle:
        return self.scale(-1)

    def __sub__(self, other: PhaseCocycle) -> PhaseCocycle:
        return self + (-other)

    def scale(self, n: int) -> PhaseCocycle:
        return PhaseCocycle(self.lattice, self.modulus, tuple(tuple(n * x for x in v) for v in self.values))

    def is_zero(self) -> bool:
        return not any(x for v in self.values for x in v)

    def to_dict(self) -> dict:
        labels = self.lattice.group.labels
        return {"modulus": self.modulus, "values": {labels[g]: list(v) for g, v in enumerate(self.values)}}


@dataclass(frozen=True)
class GaugeFunction:
    """χ(k) = k·vector / modulus (mod 1)."""

    modulus: int
    vector: Vector

    @classmethod
    def from_fractions(cls, values: Sequence[Fraction | int]) -> GaugeFunction:
        fracs = [Fraction(x) for x in values]
        m = lcm(1, *(x.denominator for x in fracs))
        return cls(m, tuple(int(x * m) for x in fracs))

    def __call__(self, k: Sequence[int]) -> Fraction:
        return Fraction(_dot(k, self.vector), self.modulus) % 1


def coboundary(chi: GaugeFunction, lattice: LatticeModule) -> PhaseCocycle:
    """g -> χ∘(rep(g) - I)."""
    ident = IntMatrix.identity(lattice.rank)
    values = tuple((lattice.rep(g) - ident).apply(chi.vector) for g in lattice.group.elements())
    return PhaseCocycle(lattice, chi.modulus, values)


def _rational_coboundary(lattice: LatticeModule, chi: Sequence[Fraction]) -> list[tuple[Fraction, ...]]:
    out = []
    for g in lattice.group.elements():
        rows = lattice.rep(g).entries
        out.append(tuple(sum((a * c for a, c in zip(row, chi)), Fraction(0)) - chi[i] for i, row in enumerate(rows)))
    return out


# ---------- H¹ over Z/M ----------

@dataclass(frozen=True)
class _CocycleSpace:
    """Unknowns w in (Z/M)^n; `unpack(w)` gives per-element values, `pack(Φ)` the inverse."""

    lattice: LatticeModule
    modulus: int
    equations: IntMatrix
    delta: IntMatrix
    unpack: object = field(compare=False)
    pack: object = field(compare=False)


def _reduced_space(lattice: LatticeModule) -> _CocycleSpace:
    group, r = lattice.group, lattice.rank
    tree = tree_reduction(lattice.presented())
    width = tree.width
    rows: list[Vector] = []
    for s in tree.letters:
        rep_s = lattice.rep(s)
        for h in group.elements():
            lhs = tree.fox[group.table[s][h]]
            rhs = rep_s @ tree.fox[h] + tree.fox[s]
            rows.extend((lhs - rhs).entries)
    ident = IntMatrix.identity(r)
    delta = IntMatrix.vstack([lattice.rep(s) - ident for s in tree.letters], r)

    def unpack(w: Sequence[int]) -> tuple[Vector, ...]:
        return tuple(a.apply(w) for a in tree.fox)

    def pack(values: Sequence[Vector]) -> Vector:
        return tuple(x for s in tree.letters for x in values[s])

    return _CocycleSpace(lattice, group.order, IntMatrix.from_rows(rows, width), delta, unpack, pack)


def _full_space(lattice: LatticeModule) -> _CocycleSpace:
    group, r = lattice.group, lattice.rank
    n = group.order
    width = r * n
    rows: list[Vector] = []
    for s in group.generators:
        rep_s = lattice.rep(s).entries
        for h in group.elements():
            sh = group.table[s][h]
            for i in range(r):
                row = [0] * width
                row[sh * r + i] += 1
                row[s * r + i] -= 1
                for j in range(r):
                    row[h * r + j] -= rep_s[i][j]
                rows.append(tuple(row))
    ident = IntMatrix.identity(r)
    delta = IntMatrix.vstack([lattice.rep(g) - ident for g in group.elements()], r)

    def unpack(w: Sequence[int]) -> tuple[Vector, ...]:
        return tuple(tuple(w[g * r:(g + 1) * r]) for g in group.elements())

    def pack(values: Sequence[Vector]) -> Vector:
        return tuple(x for v in values for x in v)

    return _CocycleSpace(lattice, n, IntMatrix.from_rows(rows, width), delta, unpack, pack)


@lru_cache(maxsize=64)
def cohomology_classes(
    lattice: LatticeModule, method: Literal["reduced", "full"] = "reduced",
) -> AbelianGroupStructure[PhaseCocycle]:
    """H¹(G, L̂) as Z/M-cocycles modulo coboundaries of real gauges, M = #G.

    A cocycle w is a coboundary exactly when P·w ≡ 0 (mod M), P being the
    rows of U past the rank in the Smith form U·Δ·V of the stacked (rep(g) - I).
    """
    if method == "reduced":
        space = _reduced_space(lattice)
    elif method == "full":
        space = _full_space(lattice)
    else:
        raise ValueError(f"unknown method {method!r}")
    m = space.modulus
    eq = space.equations
    width = eq.cols

    snf = smith_normal_form(eq)
    scale = [m // gcd(snf.diagonal[i], m) if i < snf.rank else 1 for i in range(width)]
    solutions = IntMatrix.from_columns(
        [tuple(scale[j] * x for x in snf.v.column(j)) for j in range(width)], width)

    dsnf = smith_normal_form(space.delta)
    detect = space.delta.rows - dsnf.rank
    p = dsnf.u.select_rows(range(dsnf.rank, space.delta.rows))
    image = p @ solutions
    modular = IntMatrix.identity(detect).scale(m)
    raw = quotient_structure(IntMatrix.hstack([image, modular], detect), modular)
    log.debug("H1 cocycles of %s (%s): width %d, %d detecting rows, factors %s",
              lattice.name, method, width, detect, raw.invariant_factors)

    gens = []
    for lift in raw.lifts:
        w = solutions.apply(lift[:width])
        gens.append(PhaseCocycle(lattice, m, space.unpack(w)))  # type: ignore[operator]

    def encode(phi: PhaseCocycle) -> Vector:
        if phi.lattice.group != lattice.group:
            raise ValueError("cocycle belongs to a different group")
        if m % phi.modulus:
            phi = reduce_to_torsion(phi, m)
        phi = phi.with_modulus(m)
        return p.apply(space.pack(phi.values))  # type: ignore[operator]

    return AbelianGroupStructure(
        invariant_factors=raw.invariant_factors,
        generators=tuple(gens),
        projection=raw.projection,
        lifts=raw.lifts,
        encoder=encode,
    )


def class_representative(
    lattice: LatticeModule, classes: AbelianGroupStructure[PhaseCocycle], coords: Sequence[int],
) -> PhaseCocycle:
    out = PhaseCocycle.zero(lattice)
    for c, gen in zip(coords, classes.generators):
        if c:
            out = out + gen.scale(c)
    return out


def is_coboundary(phi: PhaseCocycle) -> bool:
    classes = cohomology_classes(phi.lattice)
    return not any(classes.class_of(phi))


# ---------- pairing ----------

def pair(phi: PhaseCocycle, c: Chain1) -> Fraction:
    """<Φ, c> = Σ_g Φ_g(k_g) mod 1 for a 1-cycle c."""
    if any(boundary1(phi.lattice, c)):
        raise NotACycle("chain has nonzero boundary")
    return sum((Fraction(_dot(k, phi.values[g]), phi.modulus) for g, k in c.terms), Fraction(0)) % 1


@dataclass(frozen=True)
class PairingEntry:
    cycle: int
    class_index: int
    coordinates: Vector
    value: Fraction


def pairing_table(
    lattice: LatticeModule,
    h1: AbelianGroupStructure[Chain1] | None = None,
    classes: AbelianGroupStructure[PhaseCocycle] | None = None,
    class_index: int | None = None,
) -> list[PairingEntry]:
    """One entry per (H1 generator, cohomology class); classes in mixed-radix order."""
    h1 = h1 or h1_bar(lattice)
    classes = classes or cohomology_classes(lattice)
    indices = range(max(classes.order, 1)) if class_index is None else [class_index]
    out = []
    for idx in indices:
        coords = classes.coords_at(idx)
        phi = class_representative(lattice, classes, coords)
        for i, cycle in enumerate(h1.generators):
            out.append(PairingEntry(i, idx, coords, pair(phi, cycle)))
    return out


def realize_character(
    lattice: LatticeModule, values: Sequence[Fraction], h1: AbelianGroupStructure[Chain1] | None = None,
) -> PhaseCocycle:
    """A cocycle pairing to values[i] with the i-th generator of H1."""
    h1 = h1 or h1_bar(lattice)
    classes = cohomology_classes(lattice)
    if len(values) != len(h1.generators):
        raise ValueError(f"expected {len(h1.generators)} values")
    m = lattice.group.order
    a = IntMatrix.from_rows(
        [[int(pair(gen, cyc) * m) for gen in classes.generators] for cyc in h1.generators], len(classes.generators))
    b = []
    for v, d in zip(values, h1.invariant_factors):
        v = Fraction(v) % 1
        if (v * d).denominator != 1:
            raise ValueError(f"value {v} is not killed by {d}")
        b.append(int(v * m))
    coeffs = solve_mod(a, b, m)
    if coeffs is None:
        raise ValueError("no cocycle realises these pairing values")
    return class_representative(lattice, classes, coeffs)


# ---------- gauge manipulation ----------

def reduce_to_torsion(phi: PhaseCocycle, modulus: int | None = None) -> PhaseCocycle:
    """Gauge-equivalent cocycle with values in (1/m)Z/Z, m = #G unless given.

    Solves Δ·u ≡ m·v/M (mod Z) over the reals, Δ the stacked (rep(g) - I),
    and subtracts the coboundary of u/m.
    """
    lattice = phi.lattice
    m = modulus or lattice.group.order
    if m % phi.modulus == 0:
        return phi.with_modulus(m)
    r = lattice.rank
    ident = IntMatrix.identity(r)
    delta = IntMatrix.vstack([lattice.rep(g) - ident for g in lattice.group.elements()], r)
    b = [Fraction(m * x, phi.modulus) for v in phi.values for x in v]
    snf = smith_normal_form(delta)
    ub = [sum((Fraction(c) * x for c, x in zip(row, b) if c), Fraction(0)) for row in snf.u.entries]
    if any(x.denominator != 1 for x in ub[snf.rank:]):
        raise ModulusTooSmall(f"class of {lattice.name} cocycle is not killed by {m}")
    residual = [Fraction(0)] * snf.rank + ub[snf.rank:]
    out = [sum((Fraction(c) * x for c, x in zip(row, residual) if c), Fraction(0)) for row in snf.u_inv.entries]
    values = tuple(tuple(int(x) for x in out[g * r:(g + 1) * r]) for g in lattice.group.elements())
    log.debug("reduced %s cocycle from modulus %d to %d", lattice.name, phi.modulus, m)
    return PhaseCocycle(lattice, m, values)


def normalize_gauge_at(phi: PhaseCocycle, g: int | str) -> PhaseCocycle:
    """Gauge-equivalent cocycle with Φ'_g ≡ 0; needs Φ_g to vanish on the vectors fixed by g."""
    lattice = phi.lattice
    gi = lattice.group.index(g)
    b = lattice.rep(gi) - IntMatrix.identity(lattice.rank)
    for k in kernel_basis(b.transpose()).columns():
        if phi.value(gi, k):
            raise HypothesisFails(
                f"Φ_{lattice.group.labels[gi]}{tuple(k)} = {phi.value(gi, k)} on a fixed vector")
    snf = smith_normal_form(b)
    target = phi.component(gi)
    t = [sum((Fraction(c) * x for c, x in zip(row, target) if c), Fraction(0)) for row in snf.u.entries]
    y = [t[i] / snf.diagonal[i] if i < snf.rank else Fraction(0) for i in range(lattice.rank)]
    chi = [sum((Fraction(c) * x for c, x in zip(row, y) if c), Fraction(0)) for row in snf.v.entries]
    shift = _rational_coboundary(lattice, chi)
    values = [tuple(a - s for a, s in zip(phi.component(x), shift[x])) for x in lattice.group.elements()]
    return PhaseCocycle.from_fractions(lattice, values)


# ---------- extinctions ----------

@dataclass(frozen=True)
class Extinction:
    k: Vector
    extinct: bool
    witness: int | None = None


def stabilizer(lattice: LatticeModule, k: Sequence[int]) -> list[int]:
    kt = tuple(k)
    return [g for g in lattice.group.elements() if lattice.act(kt, g) == kt]


def extinction_set(phi: PhaseCocycle, ks: Iterable[Sequence[int]]) -> list[Extinction]:
    """k is extinct when some g with k·g = k has Φ_g(k) ≠ 0; the first such g is the witness."""
    out = []
    for k in ks:
        witness = next((g for g in stabilizer(phi.lattice, k) if phi.value(g, k)), None)
        out.append(Extinction(tuple(k), witness is not None, witness))
    return out


# ---------- automorphisms ----------

def _check_automorphism(lattice: LatticeModule, f: IntMatrix, alpha: Sequence[int]) -> None:
    group = lattice.group
    if sorted(alpha) != list(group.elements()):
        raise NotEquivariant("group map is not a bijection")
    for g in group.elements():
        for h in group.elements():
            if alpha[group.table[g][h]] != group.table[alpha[g]][alpha[h]]:
                raise NotEquivariant("group map does not respect the table")
        if lattice.rep(g) @ f != f @ lattice.rep(alpha[g]):
            raise NotEquivariant(f"f(k·{group.labels[g]}) != f(k)·{group.labels[alpha[g]]}")


def automorphism_from_matrix(lattice: LatticeModule, f: IntMatrix) -> tuple[int, ...]:
    """The group automorphism α with rep(g)·F = F·rep(α(g)), when one exists."""
    group = lattice.group
    f_inv = f.inverse()
    candidates = []
    for s in group.generators:
        target = f_inv @ lattice.rep(s) @ f
        found = [h for h in group.elements() if lattice.rep(h) == target]
        if not found:
            raise NotEquivariant(f"conjugate of {group.labels[s]} is not in the group")
        candidates.append(found)
    for choice in itertools.product(*candidates):
        alpha = _extend_on_words(lattice, dict(zip(group.generators, choice)))
        if alpha is None:
            continue
        try:
            _check_automorphism(lattice, f, alpha)
        except NotEquivariant:
            continue
        return alpha
    raise NotEquivariant("no automorphism of the group is induced by this matrix")


def _extend_on_words(lattice: LatticeModule, on_generators: dict[int, int]) -> tuple[int, ...] | None:
    group = lattice.group
    alpha: list[int | None] = [None] * group.order
    alpha[0] = 0
    frontier = [0]
    while frontier:
        nxt = []
        for y in frontier:
            for s, image in on_generators.items():
                x = group.table[y][s]
                val = group.table[alpha[y]][image]  # type: ignore[index]
                if alpha[x] is None:
                    alpha[x] = val
                    nxt.append(x)
                elif alpha[x] != val:
                    return None
        frontier = nxt
    return tuple(a for a in alpha if a is not None)


def apply_automorphism(phi: PhaseCocycle, f: IntMatrix, alpha: Sequence[int]) -> PhaseCocycle:
    """Transport Φ along k -> k·F and g -> α(g): v'_{α(g)} = F⁻¹·v_g."""
    lattice = phi.lattice
    _check_automorphism(lattice, f, alpha)
    f_inv = f.inverse()
    values: list[Vector] = [()] * lattice.group.order
    for g in lattice.group.elements():
        values[alpha[g]] = f_inv.apply(phi.values[g])
    return PhaseCocycle(lattice, phi.modulus, tuple(values))


def class_permutation(lattice: LatticeModule, f: IntMatrix, alpha: Sequence[int]) -> dict[Vector, Vector]:
    """Class coordinates before -> after transport, over all classes."""
    classes = cohomology_classes(lattice)
    out = {}
    for coords in classes.enumerate():
        phi = class_representative(lattice, classes, coords)
        out[tuple(coords)] = classes.class_of(apply_automorphism(phi, f, alpha))
    return out
