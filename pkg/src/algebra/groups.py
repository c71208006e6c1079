from __future__ import annotations

import itertools
import logging
import string
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence, TypeVar

from src.algebra.exactalg import IntMatrix
from src.core.errors import InputError, QcohomError

log = logging.getLogger("groups")

DEFAULT_GROUP_CAP = 1000

K = TypeVar("K", bound=Hashable)


class WrongOrder(QcohomError):
    pass


class RelationViolation(QcohomError):
    pass


class NotFinite(QcohomError):
    pass


class NotSubgroup(QcohomError):
    pass


class NotNormal(QcohomError):
    pass


class NotCyclic(QcohomError):
    pass


class GroupTableError(QcohomError):
    pass


def word_label(word: Sequence[str]) -> str:
    """Shortlex word to label: () -> 'e', (r, r, m) -> 'r^2*m'."""
    if not word:
        return "e"
    parts = []
    for letter, run in itertools.groupby(word):
        n = len(list(run))
        parts.append(letter if n == 1 else f"{letter}^{n}")
    return "*".join(parts)


@dataclass(frozen=True)
class PointGroup:
    """Finite group given by its table, acting on Z^rank from the right: k -> k·rep(g).

    Element 0 is the identity. rep(g·h) = rep(g)·rep(h); the action need not be faithful.
    """

    labels: tuple[str, ...]
    table: tuple[tuple[int, ...], ...]
    reps: tuple[IntMatrix, ...]
    generators: tuple[int, ...]
    rank: int
    family: str = "generic"
    family_order: int = 0
    check_associativity: bool = field(default=True, compare=False, repr=False)
    inverses: tuple[int, ...] = field(init=False, compare=False, repr=False)
    _index: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {label: i for i, label in enumerate(self.labels)})
        object.__setattr__(self, "inverses", self._verify())

    def _verify(self) -> tuple[int, ...]:
        n = len(self.labels)
        if len(self._index) != n:
            raise GroupTableError("element labels are not unique")
        if len(self.table) != n or any(len(row) != n for row in self.table):
            raise GroupTableError(f"table is not {n}x{n}")
        for i in range(n):
            if self.table[0][i] != i or self.table[i][0] != i:
                raise GroupTableError("element 0 is not a two-sided identity")
            if sorted(self.table[i]) != list(range(n)):
                raise GroupTableError(f"row {self.labels[i]} is not a permutation")
        inverses = []
        for i in range(n):
            j = self.table[i].index(0)
            if self.table[j][i] != 0:
                raise GroupTableError(f"{self.labels[i]} has no two-sided inverse")
            inverses.append(j)

        # every element is reachable from the identity through the generators
        seen, queue = {0}, deque([0])
        while queue:
            x = queue.popleft()
            for s in self.generators:
                y = self.table[x][s]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if len(seen) != n:
            raise GroupTableError("generators do not generate the table")

        # (gh)s = g(hs) for generators s implies associativity on all triples
        if self.check_associativity:
            for s in self.generators:
                for g in range(n):
                    row = self.table[g]
                    for h in range(n):
                        if self.table[row[h]][s] != row[self.table[h][s]]:
                            raise GroupTableError(
                                f"({self.labels[g]}·{self.labels[h]})·{self.labels[s]} is not associative")

        if len(self.reps) != n:
            raise GroupTableError("one action matrix per element is required")
        for g, m in enumerate(self.reps):
            if m.shape != (self.rank, self.rank):
                raise GroupTableError(f"action of {self.labels[g]} is not {self.rank}x{self.rank}")
        if not self.reps[0].is_identity():
            raise GroupTableError("identity does not act trivially")
        for s in self.generators:
            if abs(self.reps[s].det()) != 1:
                raise GroupTableError(f"action of {self.labels[s]} is not invertible over Z")
            for g in range(n):
                if self.reps[self.table[g][s]] != self.reps[g] @ self.reps[s]:
                    raise GroupTableError(
                        f"action is not compatible with the table at {self.labels[g]}·{self.labels[s]}")
        return tuple(inverses)

    # ---------- queries ----------
    @property
    def order(self) -> int:
        return len(self.labels)

    @property
    def identity(self) -> int:
        return 0

    def elements(self) -> range:
        return range(self.order)

    def index(self, label: str | int) -> int:
        if isinstance(label, int):
            if not 0 <= label < self.order:
                raise KeyError(label)
            return label
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"no element labelled {label!r}") from None

    def label(self, g: int) -> str:
        return self.labels[g]

    def rep(self, g: int) -> IntMatrix:
        return self.reps[g]

    def multiply(self, g: int, h: int) -> int:
        return self.table[g][h]

    def inverse(self, g: int) -> int:
        return self.inverses[g]

    def power(self, g: int, n: int) -> int:
        out = 0
        base = g if n >= 0 else self.inverse(g)
        for _ in range(abs(n)):
            out = self.table[out][base]
        return out

    def element_order(self, g: int) -> int:
        x, k = g, 1
        while x != 0:
            x = self.table[x][g]
            k += 1
        return k

    def commutes(self, g: int, h: int) -> bool:
        return self.table[g][h] == self.table[h][g]

    def conjugate(self, g: int, by: int) -> int:
        return self.table[self.table[by][g]][self.inverse(by)]

    def is_abelian(self) -> bool:
        return all(self.commutes(g, h) for g in range(self.order) for h in range(g))

    @property
    def rotation(self) -> int | None:
        """The element 'r' of a cyclic or dihedral family, when present."""
        if self.family in ("cyclic", "dihedral") and "r" in self._index:
            return self._index["r"]
        return None

    def describe(self) -> str:
        if self.family in ("cyclic", "dihedral"):
            return f"{'C' if self.family == 'cyclic' else 'D'}{self.family_order}"
        return f"G{self.order}"


# ---------- construction ----------

def _closure(
    letters: Sequence[str],
    gens: Sequence[K],
    identity: K,
    mul: Callable[[K, K], K],
    cap: int,
) -> tuple[list[K], list[tuple[int, ...]], list[list[int]]]:
    """BFS by right multiplication; words come out shortlex in generator order."""
    keys: list[K] = [identity]
    words: list[tuple[int, ...]] = [()]
    index = {identity: 0}
    right: list[list[int]] = []
    queue = deque([0])
    while queue:
        x = queue.popleft()
        row = []
        for si, s in enumerate(gens):
            y = mul(keys[x], s)
            j = index.get(y)
            if j is None:
                if len(keys) >= cap:
                    raise NotFinite(f"closure exceeded {cap} elements")
                j = index[y] = len(keys)
                keys.append(y)
                words.append(words[x] + (si,))
                queue.append(j)
            row.append(j)
        while len(right) <= x:
            right.append([])
        right[x] = row
    log.debug("closure over %s: %d elements", list(letters), len(keys))
    return keys, words, right


def _build(
    letters: Sequence[str],
    carrier: Sequence[K],
    identity: K,
    mul: Callable[[K, K], K],
    gen_reps: Sequence[IntMatrix],
    rank: int,
    *,
    cap: int = DEFAULT_GROUP_CAP,
    family: str = "generic",
    family_order: int = 0,
    check_associativity: bool = True,
) -> PointGroup:
    keys, words, right = _closure(letters, carrier, identity, mul, cap)
    n = len(keys)

    table = []
    for a in range(n):
        row = []
        for b in range(n):
            x = a
            for si in words[b]:
                x = right[x][si]
            row.append(x)
        table.append(tuple(row))

    reps: list[IntMatrix] = [IntMatrix.identity(rank)] * n
    for y in range(1, n):
        word = words[y]
        parent = 0
        for si in word[:-1]:
            parent = right[parent][si]
        reps[y] = reps[parent] @ gen_reps[word[-1]]

    generators = []
    for si in range(len(carrier)):
        g = right[0][si]
        if g != 0 and g not in generators:
            generators.append(g)

    return PointGroup(
        labels=tuple(word_label([letters[i] for i in w]) for w in words),
        table=tuple(table),
        reps=tuple(reps),
        generators=tuple(generators),
        rank=rank,
        family=family,
        family_order=family_order,
        check_associativity=check_associativity,
    )


def _matrix_order(m: IntMatrix, limit: int) -> int | None:
    x = m
    for k in range(1, limit + 1):
        if x.is_identity():
            return k
        x = x @ m
    return None


def cyclic_group(order: int, rep_generator: IntMatrix) -> PointGroup:
    if order < 1:
        raise WrongOrder("order must be positive")
    found = _matrix_order(rep_generator, order)
    if found != order:
        raise WrongOrder(f"generator has order {found or f'> {order}'}, expected {order}")
    return _build(
        ["r"], [1 % order], 0, lambda a, b: (a + b) % order, [rep_generator], rep_generator.rows,
        family="cyclic", family_order=order,
    )


def dihedral_group(order: int, rotation: IntMatrix, mirror: IntMatrix) -> PointGroup:
    """D_N = <r, m | r^N, m^2, m·r·m = r^-1>; the action may identify elements (e.g. D2 on Z)."""
    if order < 1:
        raise RelationViolation("rotation order must be positive")
    if _matrix_order(rotation, order) != order:
        raise RelationViolation(f"rotation does not have order {order}")
    if not (mirror @ mirror).is_identity():
        raise RelationViolation("mirror^2 != I")
    if not (mirror @ rotation @ mirror @ rotation).is_identity():
        raise RelationViolation("mirror·rotation·mirror != rotation^-1")

    def mul(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
        i, j = a
        k, l = b
        return ((i + (-k if j else k)) % order, j ^ l)

    return _build(
        ["r", "m"], [(1 % order, 0), (0, 1)], (0, 0), mul, [rotation, mirror], rotation.rows,
        family="dihedral", family_order=order,
    )


def from_generators(
    mats: Sequence[IntMatrix],
    *,
    labels: Sequence[str] | None = None,
    rank: int | None = None,
    cap: int = DEFAULT_GROUP_CAP,
    check_associativity: bool = True,
) -> PointGroup:
    """Close a set of integer matrices under multiplication."""
    if rank is None:
        if not mats:
            raise ValueError("rank is required when no generators are given")
        rank = mats[0].rows
    if any(m.shape != (rank, rank) for m in mats):
        raise ValueError(f"generators must be {rank}x{rank}")
    names = list(labels) if labels is not None else list(string.ascii_lowercase[:len(mats)])
    if len(names) != len(mats):
        raise ValueError("one label per generator")
    return _build(
        names, list(mats), IntMatrix.identity(rank), IntMatrix.__matmul__, list(mats), rank,
        cap=cap, check_associativity=check_associativity,
    )


def group_from_descriptor(data: Mapping[str, Any], *, cap: int = DEFAULT_GROUP_CAP, source: str = "<group>") -> PointGroup:
    """{"rank": r, "generators": [{"label": str, "matrix": [[int]]}], "relations_check": bool}"""
    try:
        rank = int(data["rank"])
        entries = data["generators"]
        labels = [str(e["label"]) for e in entries]
        mats = [IntMatrix.from_rows(e["matrix"], rank) for e in entries]
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{source}: malformed group descriptor ({e})") from e
    if any(m.rows != rank for m in mats):
        raise InputError(f"{source}: generator matrices must be {rank}x{rank}")
    return from_generators(
        mats, labels=labels, rank=rank, cap=cap,
        check_associativity=bool(data.get("relations_check", True)),
    )


# ---------- subgroups ----------

@dataclass(frozen=True)
class SubgroupData:
    parent: PointGroup
    members: tuple[int, ...]
    is_normal: bool
    quotient: PointGroup | None = None
    coset_of: tuple[int, ...] = ()
    coset_reps: tuple[int, ...] = ()

    def __contains__(self, g: int) -> bool:
        return g in self.members

    @property
    def index(self) -> int:
        return self.parent.order // len(self.members)

    def as_group(self) -> PointGroup:
        """H as a PointGroup in its own right; element i is parent element members[i]."""
        g = self.parent
        local = {p: i for i, p in enumerate(self.members)}
        generators: list[int] = []
        span = {0}
        for p in self.members[1:]:
            if p in span:
                continue
            generators.append(local[p])
            span = _generated(g, [self.members[i] for i in generators])
        return PointGroup(
            labels=tuple(g.labels[p] for p in self.members),
            table=tuple(tuple(local[g.table[a][b]] for b in self.members) for a in self.members),
            reps=tuple(g.reps[p] for p in self.members),
            generators=tuple(generators),
            rank=g.rank,
            family="subgroup",
        )


def _generated(g: PointGroup, elements: Iterable[int]) -> set[int]:
    gens = list(elements)
    span, queue = {0}, deque([0])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = g.table[x][s]
            if y not in span:
                span.add(y)
                queue.append(y)
    return span


def subgroup(g: PointGroup, members: Iterable[int | str]) -> SubgroupData:
    idx = sorted({g.index(m) for m in members})
    if not idx or idx[0] != 0:
        raise NotSubgroup("subgroup must contain the identity")
    chosen = set(idx)
    for a in idx:
        for b in idx:
            if g.table[a][b] not in chosen:
                raise NotSubgroup(f"{g.labels[a]}·{g.labels[b]} leaves the subset")
    normal = all(g.conjugate(h, x) in chosen for x in g.elements() for h in idx)
    if not normal:
        return SubgroupData(parent=g, members=tuple(idx), is_normal=False)

    coset_of = [-1] * g.order
    reps: list[int] = []
    for x in g.elements():
        if coset_of[x] >= 0:
            continue
        for h in idx:
            coset_of[g.table[x][h]] = len(reps)
        reps.append(x)
    q_table = tuple(tuple(coset_of[g.table[a][b]] for b in reps) for a in reps)
    q_gens = []
    for s in g.generators:
        c = coset_of[s]
        if c != 0 and c not in q_gens:
            q_gens.append(c)
    quotient = PointGroup(
        labels=tuple(g.labels[x] for x in reps),
        table=q_table,
        reps=tuple(IntMatrix.identity(0) for _ in reps),
        generators=tuple(q_gens),
        rank=0,
        family="quotient",
    )
    return SubgroupData(
        parent=g, members=tuple(idx), is_normal=True,
        quotient=quotient, coset_of=tuple(coset_of), coset_reps=tuple(reps),
    )


def normal_subgroup(g: PointGroup, members: Iterable[int | str]) -> SubgroupData:
    data = subgroup(g, members)
    if not data.is_normal:
        raise NotNormal(f"subgroup {{{', '.join(g.labels[m] for m in data.members)}}} is not normal")
    return data


def generated_subgroup(g: PointGroup, elements: Iterable[int | str]) -> SubgroupData:
    return subgroup(g, _generated(g, [g.index(e) for e in elements]))
