from __future__ import annotations

import dataclasses
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, prod
from typing import Iterator, Literal, Mapping, Sequence

from src.algebra.exactalg import (
    AbelianGroupStructure,
    IntMatrix,
    Vector,
    hermite_basis,
    kernel_basis,
    lattice_contains,
    smith_normal_form,
)
from src.algebra.groups import SubgroupData, generated_subgroup
from src.algebra.homology import Chain1, h1_bar
from src.algebra.lattices import LatticeModule
from src.algebra.phases import PhaseCocycle, pair
from src.core.errors import QcohomError

log = logging.getLogger("products")

MAX_CANDIDATES = 4096


class NotA2Cycle(QcohomError):
    pass


class NonIntegralCoefficients(QcohomError):
    pass


@dataclass(frozen=True)
class TranslationCocycle:
    """Fractional translation q; k_g = q·g - q must be a lattice vector for every g."""

    lattice: LatticeModule
    q: tuple[Fraction, ...]
    shifts: tuple[Vector, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        q = tuple(Fraction(x) for x in self.q)
        if len(q) != self.lattice.rank:
            raise ValueError(f"q must have length {self.lattice.rank}")
        object.__setattr__(self, "q", q)
        den = lcm(1, *(x.denominator for x in q))
        num = tuple(int(x * den) for x in q)
        shifts = []
        for g in self.lattice.group.elements():
            moved = self.lattice.act(num, g)
            diff = [a - b for a, b in zip(moved, num)]
            if any(x % den for x in diff):
                raise NonIntegralCoefficients(
                    f"q·{self.lattice.group.labels[g]} - q is not a lattice vector for q = {q}")
            shifts.append(tuple(x // den for x in diff))
        object.__setattr__(self, "shifts", tuple(shifts))

    def k(self, g: int) -> Vector:
        return self.shifts[g]

    def is_integral(self) -> bool:
        return all(x.denominator == 1 for x in self.q)


@dataclass(frozen=True)
class TwoCycle:
    """Σ n_{g,h} [g|h] with integer coefficients."""

    terms: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def of(cls, terms: Mapping[tuple[int, int], int]) -> TwoCycle:
        acc: dict[tuple[int, int], int] = {}
        for gh, n in terms.items():
            acc[gh] = acc.get(gh, 0) + n
        return cls(tuple((gh, n) for gh, n in sorted(acc.items()) if n))

    @classmethod
    def commutator(cls, g: int, h: int) -> TwoCycle:
        """[g|h] - [h|g]."""
        return cls.of({(g, h): 1, (h, g): -1}) if g != h else cls(())

    def boundary(self, table: Sequence[Sequence[int]]) -> dict[int, int]:
        """∂[g|h] = [h] - [gh] + [g] with trivial coefficients."""
        out: dict[int, int] = {}
        for (g, h), n in self.terms:
            for x, sign in ((h, 1), (table[g][h], -1), (g, 1)):
                out[x] = out.get(x, 0) + sign * n
        return {x: n for x, n in out.items() if n}

    def is_cycle(self, table: Sequence[Sequence[int]]) -> bool:
        return not self.boundary(table)


@dataclass(frozen=True)
class FactorSystem:
    """f(g,h) = values[g][h] / modulus (mod 1), a 2-cocycle with trivial action."""

    modulus: int
    table: tuple[tuple[int, ...], ...]
    values: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        m = self.modulus
        vals = tuple(tuple(x % m for x in row) for row in self.values)
        object.__setattr__(self, "values", vals)
        t = self.table
        n = len(t)
        for g in range(n):
            for h in range(n):
                for l in range(n):
                    if (vals[h][l] - vals[t[g][h]][l] + vals[g][t[h][l]] - vals[g][h]) % m:
                        raise ValueError(f"2-cocycle identity fails at ({g}, {h}, {l})")

    def value(self, g: int, h: int) -> Fraction:
        return Fraction(self.values[g][h], self.modulus)

    def pair(self, c: TwoCycle) -> Fraction:
        if not c.is_cycle(self.table):
            raise NotA2Cycle("chain has nonzero boundary")
        return sum((n * self.value(g, h) for (g, h), n in c.terms), Fraction(0)) % 1


def cup_sigma(phi: PhaseCocycle, sigma: TranslationCocycle) -> FactorSystem:
    """(g,h) -> Φ_h(k_g)."""
    group = phi.lattice.group
    ks = [sigma.k(g) for g in group.elements()]
    values = tuple(
        tuple(sum(a * b for a, b in zip(ks[g], phi.values[h])) for h in group.elements())
        for g in group.elements()
    )
    return FactorSystem(phi.modulus, group.table, values)


def cap_sigma(sigma: TranslationCocycle, c: TwoCycle) -> Chain1:
    """Σ n_{g,h} k_g [h]."""
    lattice = sigma.lattice
    if not c.is_cycle(lattice.group.table):
        raise NotA2Cycle("chain has nonzero boundary")
    return Chain1.of(lattice.rank, [(h, tuple(n * x for x in sigma.k(g))) for (g, h), n in c.terms])


@dataclass(frozen=True)
class ProductCheck:
    lhs: Fraction
    rhs: Fraction

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    @property
    def equal_up_to_sign(self) -> bool:
        return self.lhs == self.rhs or self.lhs == (-self.rhs) % 1


def km_identity_check(phi: PhaseCocycle, sigma: TranslationCocycle, c: TwoCycle, *, sign: int = 1) -> ProductCheck:
    """<Φ, σ∩c> against <Φ∪σ, c>; `sign` scales the left pairing."""
    lhs = (sign * pair(phi, cap_sigma(sigma, c))) % 1
    rhs = cup_sigma(phi, sigma).pair(c)
    return ProductCheck(lhs, rhs)


# ---------- translation search ----------

def restrict(phi: PhaseCocycle, sub: SubgroupData, lattice: LatticeModule | None = None) -> PhaseCocycle:
    """Φ on the subgroup; `lattice` must be L with the subgroup acting."""
    local = lattice or LatticeModule(f"{phi.lattice.name}|H", sub.as_group())
    return PhaseCocycle(local, phi.modulus, tuple(phi.values[g] for g in sub.members))


@dataclass(frozen=True)
class Configuration:
    """Commuting g, h of G with q such that q·g - q and q·h - q lie in L.

    Products are taken over the subgroup <g, h>, where σ is a genuine
    L-valued cocycle.
    """

    g: int
    h: int
    q: tuple[Fraction, ...]
    subgroup: SubgroupData
    local: LatticeModule

    @classmethod
    def build(cls, lattice: LatticeModule, g: int, h: int, q: Sequence[Fraction]) -> Configuration:
        group = lattice.group
        if not group.commutes(g, h):
            raise NotA2Cycle(f"{group.labels[g]} and {group.labels[h]} do not commute")
        sub = generated_subgroup(group, [g, h])
        local = LatticeModule(f"{lattice.name}|<{group.labels[g]},{group.labels[h]}>", sub.as_group())
        return cls(g, h, tuple(Fraction(x) for x in q), sub, local)

    def translation(self) -> TranslationCocycle:
        return TranslationCocycle(self.local, self.q)

    def cycle(self) -> TwoCycle:
        members = self.subgroup.members
        return TwoCycle.commutator(members.index(self.g), members.index(self.h))

    def cap(self) -> Chain1:
        """σ∩c as a chain over G."""
        local = cap_sigma(self.translation(), self.cycle())
        return Chain1.of(local.rank, [(self.subgroup.members[x], k) for x, k in local.terms])

    def check(self, phi: PhaseCocycle, *, sign: int = 1) -> ProductCheck:
        return km_identity_check(restrict(phi, self.subgroup, self.local), self.translation(), self.cycle(), sign=sign)

    def describe(self) -> str:
        labels = self.subgroup.parent.labels
        return f"[{labels[self.g]}|{labels[self.h]}] q=({', '.join(str(x) for x in self.q)})"


def translation_candidates(
    lattice: LatticeModule, g: int, h: int, *, limit: int = MAX_CANDIDATES,
) -> list[tuple[Fraction, ...]]:
    """All q mod Z^r with q·g - q and q·h - q integral, up to directions fixed by both.

    With U·W·V = D for W = [rep(g) - I | rep(h) - I], q = p·U where p_i runs over
    (1/d_i)Z/Z below the rank and is 0 beyond it.
    """
    r = lattice.rank
    ident = IntMatrix.identity(r)
    w = IntMatrix.hstack([lattice.rep(g) - ident, lattice.rep(h) - ident], r)
    snf = smith_normal_form(w)
    ranges = [snf.diagonal[i] if i < snf.rank else 1 for i in range(r)]
    if prod(ranges) > limit:
        raise ValueError(f"{prod(ranges)} translation candidates exceed the limit {limit}")
    out = []
    for numerators in itertools.product(*(range(d) for d in ranges)):
        p = [Fraction(a, d) for a, d in zip(numerators, ranges)]
        q = tuple(sum((p[i] * snf.u.entries[i][j] for i in range(r)), Fraction(0)) % 1 for j in range(r))
        out.append(q)
    return out


def commuting_configurations(lattice: LatticeModule, *, include_integral: bool = False) -> Iterator[Configuration]:
    """(g, h, q) with g < h commuting, neither the identity."""
    group = lattice.group
    for g in range(1, group.order):
        for h in range(g + 1, group.order):
            if not group.commutes(g, h):
                continue
            try:
                candidates = translation_candidates(lattice, g, h)
            except ValueError:
                log.debug("skipping pair (%s, %s): too many translations", group.labels[g], group.labels[h])
                continue
            base = Configuration.build(lattice, g, h, candidates[0])
            for q in candidates:
                if not include_integral and not any(q):
                    continue
                yield dataclasses.replace(base, q=q)


Flag = Literal["k[g]", "sigma_cap_c", "other"]


def _span_contains(factors: Sequence[int], span: Sequence[Sequence[int]], target: Sequence[int]) -> bool:
    n = len(factors)
    rows = [tuple(v) for v in span] + [tuple(d if i == j else 0 for i in range(n)) for j, d in enumerate(factors)]
    return lattice_contains(hermite_basis(rows, n), target)


def fixed_vector_classes(lattice: LatticeModule, h1: AbelianGroupStructure[Chain1]) -> list[Vector]:
    """Classes of the cycles k[g] with k·g = k, over a basis of each fixed lattice."""
    ident = IntMatrix.identity(lattice.rank)
    out = []
    for g in lattice.group.elements()[1:]:
        for k in kernel_basis((lattice.rep(g) - ident).transpose()).columns():
            out.append(h1.class_of(Chain1.single(k, g)))
    return out


def expressibility_flags(lattice: LatticeModule, h1: AbelianGroupStructure[Chain1] | None = None) -> list[Flag]:
    """Per H1 generator: reached by k[g] cycles, by adding σ∩c cycles, or by neither."""
    h1 = h1 or h1_bar(lattice)
    factors = h1.invariant_factors
    units = [tuple(int(i == j) for j in range(len(factors))) for i in range(len(factors))]
    fixed = fixed_vector_classes(lattice, h1)
    flags: list[Flag | None] = ["k[g]" if _span_contains(factors, fixed, u) else None for u in units]

    span = list(fixed)
    if None in flags:
        for conf in commuting_configurations(lattice):
            span.append(h1.class_of(conf.cap()))
            if all(f is not None or _span_contains(factors, span, u) for f, u in zip(flags, units)):
                break
        flags = [f or ("sigma_cap_c" if _span_contains(factors, span, u) else None) for f, u in zip(flags, units)]
    out: list[Flag] = [f or "other" for f in flags]
    log.debug("expressibility of %s: %s", lattice.name, out)
    return out
