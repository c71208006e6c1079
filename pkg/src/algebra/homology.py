from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Mapping, Sequence

from src.algebra.exactalg import (
    AbelianGroupStructure,
    F2Matrix,
    IntMatrix,
    Vector,
    f2_jordan_counts,
    hermite_basis,
    kernel_basis,
    quotient_structure,
)
from src.algebra.groups import NotCyclic, NotNormal, SubgroupData, generated_subgroup
from src.algebra.lattices import LatticeModule, PresentedModule, coinvariant_module, coinvariants_mod
from src.core.errors import QcohomError

log = logging.getLogger("homology")


class NotACycle(QcohomError):
    pass


class InfiniteFactor(QcohomError):
    pass


# ---------- chains ----------

@dataclass(frozen=True)
class Chain1:
    """Σ k_g [g] with k_g in Z^rank; terms sorted by element, zero terms dropped."""

    rank: int
    terms: tuple[tuple[int, Vector], ...] = ()

    @classmethod
    def of(cls, rank: int, terms: Mapping[int, Sequence[int]] | Iterable[tuple[int, Sequence[int]]]) -> Chain1:
        acc: dict[int, list[int]] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for g, k in items:
            if len(k) != rank:
                raise ValueError(f"coefficient {tuple(k)} does not have length {rank}")
            cur = acc.setdefault(g, [0] * rank)
            for i, x in enumerate(k):
                cur[i] += int(x)
        return cls(rank, tuple((g, tuple(v)) for g, v in sorted(acc.items()) if any(v)))

    @classmethod
    def single(cls, k: Sequence[int], g: int) -> Chain1:
        return cls.of(len(k), [(g, k)])

    def __add__(self, other: Chain1) -> Chain1:
        return Chain1.of(self.rank, list(self.terms) + list(other.terms))

    def __neg__(self) -> Chain1:
        return self.scale(-1)

    def __sub__(self, other: Chain1) -> Chain1:
        return self + (-other)

    def scale(self, n: int) -> Chain1:
        return Chain1.of(self.rank, [(g, tuple(n * x for x in k)) for g, k in self.terms])

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, g: int) -> Vector:
        return dict(self.terms).get(g, (0,) * self.rank)

    def to_dict(self, labels: Sequence[str]) -> dict[str, list[int]]:
        return {labels[g]: list(k) for g, k in self.terms}


@dataclass(frozen=True)
class Chain2:
    """Σ q_{g,h} [g|h] with integer vector coefficients."""

    rank: int
    terms: tuple[tuple[tuple[int, int], Vector], ...] = ()

    @classmethod
    def of(cls, rank: int, terms: Mapping[tuple[int, int], Sequence[int]] | Iterable[tuple[tuple[int, int], Sequence[int]]]) -> Chain2:
        acc: dict[tuple[int, int], list[int]] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for gh, q in items:
            if len(q) != rank:
                raise ValueError(f"coefficient {tuple(q)} does not have length {rank}")
            cur = acc.setdefault(gh, [0] * rank)
            for i, x in enumerate(q):
                cur[i] += int(x)
        return cls(rank, tuple((gh, tuple(v)) for gh, v in sorted(acc.items()) if any(v)))


def boundary1(lattice: LatticeModule, c: Chain1) -> Vector:
    """∂(k[g]) = k·g - k."""
    out = [0] * lattice.rank
    for g, k in c.terms:
        for i, (a, b) in enumerate(zip(lattice.act(k, g), k)):
            out[i] += a - b
    return tuple(out)


def boundary2(lattice: LatticeModule, c: Chain2) -> Chain1:
    """∂(q[g|h]) = (q·g)[h] - q[gh] + q[g]."""
    table = lattice.group.table
    terms: list[tuple[int, Sequence[int]]] = []
    for (g, h), q in c.terms:
        terms.append((h, lattice.act(q, g)))
        terms.append((table[g][h], tuple(-x for x in q)))
        terms.append((g, q))
    return Chain1.of(lattice.rank, terms)


def is_cycle(lattice: LatticeModule, c: Chain1) -> bool:
    return not any(boundary1(lattice, c))


# ---------- tree reduction of the bar complex ----------

@dataclass(frozen=True)
class TreeReduction:
    """Chains reduced along the BFS spanning tree: k[x] ≡ Σ_s (k·A_x[s])[s] modulo boundaries.

    `fox[x]` is the r x (r·n) matrix A_x; block s holds A_x[s]. `letters` are the generator elements.
    """

    module: PresentedModule
    letters: tuple[int, ...]
    fox: tuple[IntMatrix, ...]

    @property
    def width(self) -> int:
        return self.module.rank * len(self.letters)

    def project(self, c: Chain1) -> Vector:
        out = [0] * self.width
        for x, k in c.terms:
            for i, v in enumerate(self.fox[x].act(k)):
                out[i] += v
        return tuple(out)

    def lift(self, vector: Sequence[int]) -> Chain1:
        r = self.module.rank
        return Chain1.of(r, [(s, vector[i * r:(i + 1) * r]) for i, s in enumerate(self.letters)])

    def reduced_boundary(self) -> IntMatrix:
        """Column form of x -> Σ_s x_s·(act_s - I)."""
        r = self.module.rank
        ident = IntMatrix.identity(r)
        blocks = [(self.module.actions[s] - ident).transpose() for s in self.letters]
        return IntMatrix.hstack(blocks, r)

    def relation_rows(self) -> list[Vector]:
        """π(∂(k[x|s])) for all x and generators s, plus the module relations in every block."""
        r, n = self.module.rank, len(self.letters)
        table = self.module.group.table
        rows: list[Vector] = []
        for x in self.module.group.elements():
            act_x = self.module.actions[x].entries
            for si, s in enumerate(self.letters):
                a_xs, a_x = self.fox[table[x][s]].entries, self.fox[x].entries
                for i in range(r):
                    row = [a - b for a, b in zip(a_x[i], a_xs[i])]
                    for j in range(r):
                        row[si * r + j] += act_x[i][j]
                    rows.append(tuple(row))
        for si in range(n):
            for rel in self.module.relations:
                row = [0] * (r * n)
                row[si * r:(si + 1) * r] = rel
                rows.append(tuple(row))
        return rows


def tree_reduction(module: PresentedModule) -> TreeReduction:
    group = module.group
    r = module.rank
    letters = group.generators
    width = r * len(letters)
    fox: list[IntMatrix | None] = [None] * group.order
    fox[0] = IntMatrix.zeros(r, width)
    queue = deque([0])
    while queue:
        y = queue.popleft()
        for si, s in enumerate(letters):
            x = group.table[y][s]
            if fox[x] is not None:
                continue
            rows = [list(row) for row in fox[y].entries]  # type: ignore[union-attr]
            act_y = module.actions[y].entries
            for i in range(r):
                for j in range(r):
                    rows[i][si * r + j] += act_y[i][j]
            fox[x] = IntMatrix.from_rows(rows, width)
            queue.append(x)
    return TreeReduction(module, tuple(letters), tuple(f for f in fox if f is not None))


# ---------- H1 ----------

def h1_presented(module: PresentedModule) -> AbelianGroupStructure[Chain1]:
    """H1(G, Z^r/S) as ker(∂̄1 mod S) / π(B1)."""
    tree = tree_reduction(module)
    r, width = module.rank, tree.width
    d1 = tree.reduced_boundary()
    if module.relations:
        rel_cols = IntMatrix.from_columns([tuple(-x for x in rel) for rel in module.relations], r)
        full = IntMatrix.hstack([d1, rel_cols], r)
    else:
        full = d1
    kernel = kernel_basis(full)
    cycles = IntMatrix.from_columns([col[:width] for col in kernel.columns()], width)
    relations = IntMatrix.from_columns(hermite_basis(tree.relation_rows(), width), width)
    log.debug("H1 of %s: %d cycle generators, %d relations in width %d",
              module.name, cycles.cols, relations.cols, width)
    raw = quotient_structure(cycles, relations)
    return AbelianGroupStructure(
        invariant_factors=raw.invariant_factors,
        generators=tuple(tree.lift(v) for v in raw.generators),
        projection=raw.projection,
        lifts=raw.lifts,
        encoder=tree.project,
    )


def _h1_full(lattice: LatticeModule) -> AbelianGroupStructure[Chain1]:
    """Unreduced bar complex C2 -> C1 -> C0 with degenerate simplices kept."""
    group, r = lattice.group, lattice.rank
    n = group.order
    width = r * n
    ident = IntMatrix.identity(r)
    d1 = IntMatrix.hstack([(lattice.rep(g) - ident).transpose() for g in group.elements()], r)

    rows: list[Vector] = []
    for g in group.elements():
        rep_g = lattice.rep(g).entries
        for h in group.elements():
            gh = group.table[g][h]
            for i in range(r):
                row = [0] * width
                for j in range(r):
                    row[h * r + j] += rep_g[i][j]
                row[gh * r + i] -= 1
                row[g * r + i] += 1
                rows.append(tuple(row))
    relations = IntMatrix.from_columns(hermite_basis(rows, width), width)
    raw = quotient_structure(kernel_basis(d1), relations)

    def lift(v: Sequence[int]) -> Chain1:
        return Chain1.of(r, [(g, v[g * r:(g + 1) * r]) for g in group.elements()])

    def encode(c: Chain1) -> Vector:
        out = [0] * width
        for g, k in c.terms:
            out[g * r:(g + 1) * r] = k
        return tuple(out)

    return AbelianGroupStructure(
        invariant_factors=raw.invariant_factors,
        generators=tuple(lift(v) for v in raw.generators),
        projection=raw.projection,
        lifts=raw.lifts,
        encoder=encode,
    )


@lru_cache(maxsize=64)
def h1_bar(lattice: LatticeModule, reduced: bool = True) -> AbelianGroupStructure[Chain1]:
    """H1(G, L) from the bar resolution; `reduced=False` builds the full ∂1, ∂2 matrices."""
    result = h1_presented(lattice.presented()) if reduced else _h1_full(lattice)
    log.debug("H1(%s) = %s", lattice.name, result.invariant_factors)
    return result


def h1_cyclic(lattice: LatticeModule, generator: int | str) -> AbelianGroupStructure[Chain1]:
    """ker(r - 1) / N_r L for G = <r>; generators are k[r] with k·r = k."""
    group = lattice.group
    g = group.index(generator)
    n = group.order
    if group.element_order(g) != n:
        raise NotCyclic(f"{group.labels[g]} does not generate the group")
    r = lattice.rank
    rot = lattice.rep(g)
    ident = IntMatrix.identity(r)
    fixed = kernel_basis((rot - ident).transpose())

    partial = [IntMatrix.zeros(r, r)]
    power = ident
    for _ in range(n):
        partial.append(partial[-1] + power)
        power = power @ rot
    norm = partial[n]
    exponent = {group.power(g, i): i for i in range(n)}

    def encode(c: Chain1) -> Vector:
        out = [0] * r
        for x, k in c.terms:
            for i, v in enumerate(partial[exponent[x]].act(k)):
                out[i] += v
        return tuple(out)

    raw = quotient_structure(fixed, norm.transpose())
    return AbelianGroupStructure(
        invariant_factors=raw.invariant_factors,
        generators=tuple(Chain1.single(k, g) for k in raw.generators),
        projection=raw.projection,
        lifts=raw.lifts,
        encoder=encode,
    )


# ---------- duality ----------

@dataclass(frozen=True)
class Character:
    """Homomorphism H1 -> Q/Z given by its values on the structure's generators."""

    values: tuple[Fraction, ...]


def dual_structure(h: AbelianGroupStructure) -> AbelianGroupStructure[Character]:
    if not h.is_finite:
        raise InfiniteFactor("a free factor has no finite dual")
    factors = h.invariant_factors
    chars = tuple(
        Character(tuple(Fraction(int(i == j), d) for j in range(len(factors)))) for i, d in enumerate(factors)
    )

    def encode(ch: Character) -> Vector:
        return tuple(int(v * d) % d for v, d in zip(ch.values, factors))

    projection = tuple(tuple(Fraction(int(i == j)) for j in range(len(factors))) for i in range(len(factors)))
    return AbelianGroupStructure(factors, chars, projection, encoder=encode)


# ---------- maps between homology groups ----------

@dataclass(frozen=True)
class HomologyMap:
    """Column j holds the target coordinates of the image of source generator j."""

    source: AbelianGroupStructure[Chain1]
    target: AbelianGroupStructure[Chain1]
    matrix: IntMatrix

    def cokernel(self) -> AbelianGroupStructure[Vector]:
        t = len(self.target.invariant_factors)
        diag = [tuple(d if i == j else 0 for i in range(t)) for j, d in enumerate(self.target.invariant_factors)]
        relations = IntMatrix.hstack([self.matrix, IntMatrix.from_columns(diag, t)], t)
        return quotient_structure(IntMatrix.identity(t), relations)

    def image_order(self) -> int:
        return self.target.order // self.cokernel().order

    def kernel_order(self) -> int:
        return self.source.order // self.image_order()

    def is_surjective(self) -> bool:
        return self.cokernel().is_trivial

    def is_zero(self) -> bool:
        return self.image_order() == 1

    def is_isomorphism(self) -> bool:
        return self.is_surjective() and self.source.order == self.target.order


def _map_between(
    source: AbelianGroupStructure[Chain1],
    target: AbelianGroupStructure[Chain1],
    push: Callable[[Chain1], Chain1],
) -> HomologyMap:
    cols = [target.class_of(push(c)) for c in source.generators]
    return HomologyMap(source, target, IntMatrix.from_columns(cols, len(target.invariant_factors)))


def inclusion_map(lattice: LatticeModule, sub: SubgroupData) -> HomologyMap:
    """H1(H, L) -> H1(G, L) induced by H ⊂ G."""
    restricted = LatticeModule(f"{lattice.name}|H", sub.as_group())
    source = h1_bar(restricted)
    target = h1_bar(lattice)

    def push(c: Chain1) -> Chain1:
        return Chain1.of(c.rank, [(sub.members[h], k) for h, k in c.terms])

    return _map_between(source, target, push)


def coinvariant_quotient_map(lattice: LatticeModule, sub: SubgroupData) -> HomologyMap:
    """H1(G, L) -> H1(Q, L_H), k[g] -> (k mod L_H)[gH]."""
    if not sub.is_normal:
        raise NotNormal("the quotient map needs a normal subgroup")
    source = h1_bar(lattice)
    target = h1_presented(coinvariant_module(lattice, sub))

    def push(c: Chain1) -> Chain1:
        return Chain1.of(c.rank, [(sub.coset_of[g], k) for g, k in c.terms])

    return _map_between(source, target, push)


@dataclass(frozen=True)
class ExactnessReport:
    alpha: HomologyMap
    beta: HomologyMap
    composite_zero: bool
    image_alpha: int
    kernel_beta: int

    @property
    def exact(self) -> bool:
        return self.composite_zero and self.image_alpha == self.kernel_beta


def exactness_at_middle(lattice: LatticeModule, sub: SubgroupData) -> ExactnessReport:
    """H1(H,L) -> H1(G,L) -> H1(Q,L_H): β∘α = 0 and |im α| = |ker β|."""
    alpha = inclusion_map(lattice, sub)
    beta = coinvariant_quotient_map(lattice, sub)
    composite = beta.matrix @ alpha.matrix
    factors = beta.target.invariant_factors
    zero = all(x % d == 0 if d else x == 0 for row, d in zip(composite.entries, factors) for x in row)
    return ExactnessReport(alpha, beta, zero, alpha.image_order(), beta.kernel_order())


def rotation_subgroup(lattice: LatticeModule) -> SubgroupData:
    rotation = lattice.group.rotation
    if rotation is None:
        raise NotCyclic(f"{lattice.name} has no distinguished rotation")
    return generated_subgroup(lattice.group, [rotation])


def dihedral_fast_path(lattice: LatticeModule) -> tuple[int, ...] | None:
    """H1(D_N, L) ≅ H1(D_1, L_H) ≅ F_2^j1 when the rotation fixes only 0; None when not applicable."""
    group = lattice.group
    if group.family != "dihedral" or group.rotation is None:
        return None
    rot = lattice.rep(group.rotation)
    if kernel_basis((rot - IntMatrix.identity(lattice.rank)).transpose()).cols:
        return None
    sub = rotation_subgroup(lattice)
    if sub.index != 2:
        return None
    space = coinvariants_mod(lattice, sub)
    if space.prime != 2:
        return ()
    j1, _ = f2_jordan_counts(F2Matrix.from_rows(space.actions[1].entries, space.dimension))
    return (2,) * j1
