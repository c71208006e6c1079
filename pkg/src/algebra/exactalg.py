from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm, prod
from typing import Callable, Generic, Iterable, Iterator, Sequence, TypeVar

import numpy as np
from sympy import Matrix, ZZ
from sympy.polys.matrices import DomainMatrix

from src.core.errors import QcohomError

log = logging.getLogger("exactalg")

T = TypeVar("T")
Vector = tuple[int, ...]


class RelationNotInSpan(QcohomError):
    pass


class NotInvolution(QcohomError):
    pass


class NotUnimodular(QcohomError):
    pass


class NotInLattice(QcohomError):
    pass


def _transpose(entries: Sequence[Sequence[int]], rows: int, cols: int) -> tuple[tuple[int, ...], ...]:
    if rows == 0:
        return tuple(() for _ in range(cols))
    return tuple(tuple(col) for col in zip(*entries))


@dataclass(frozen=True)
class IntMatrix:
    """Exact integer matrix, row-major. Empty shapes are legal values."""

    rows: int
    cols: int
    entries: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != self.rows or any(len(r) != self.cols for r in self.entries):
            raise ValueError(f"entries do not match shape {self.rows}x{self.cols}")

    # ---------- construction ----------
    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: int | None = None) -> IntMatrix:
        entries = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        return cls(len(entries), cols, entries)

    @classmethod
    def from_columns(cls, columns: Iterable[Sequence[int]], rows: int) -> IntMatrix:
        cols = [tuple(int(x) for x in c) for c in columns]
        if any(len(c) != rows for c in cols):
            raise ValueError(f"every column must have length {rows}")
        return cls(rows, len(cols), tuple(tuple(c[i] for c in cols) for i in range(rows)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def block_diagonal(cls, *blocks: IntMatrix) -> IntMatrix:
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        out = [[0] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b.entries):
                out[r0 + i][c0:c0 + b.cols] = row
            r0 += b.rows
            c0 += b.cols
        return cls.from_rows(out, cols)

    @classmethod
    def vstack(cls, blocks: Sequence[IntMatrix], cols: int) -> IntMatrix:
        if any(b.cols != cols for b in blocks):
            raise ValueError("column counts differ")
        return cls(sum(b.rows for b in blocks), cols, tuple(r for b in blocks for r in b.entries))

    @classmethod
    def hstack(cls, blocks: Sequence[IntMatrix], rows: int) -> IntMatrix:
        if any(b.rows != rows for b in blocks):
            raise ValueError("row counts differ")
        entries = tuple(tuple(x for b in blocks for x in b.entries[i]) for i in range(rows))
        return cls(rows, sum(b.cols for b in blocks), entries)

    # ---------- access ----------
    def __getitem__(self, index: tuple[int, int]) -> int:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def columns(self) -> list[Vector]:
        return list(_transpose(self.entries, self.rows, self.cols))

    def select_columns(self, indices: Iterable[int]) -> IntMatrix:
        idx = list(indices)
        return IntMatrix(self.rows, len(idx), tuple(tuple(r[j] for j in idx) for r in self.entries))

    def select_rows(self, indices: Iterable[int]) -> IntMatrix:
        idx = list(indices)
        return IntMatrix(len(idx), self.cols, tuple(self.entries[i] for i in idx))

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.entries]

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    # ---------- arithmetic ----------
    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows, _transpose(self.entries, self.rows, self.cols))

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        other_cols = _transpose(other.entries, other.rows, other.cols)
        entries = tuple(
            tuple(sum(a * b for a, b in zip(row, col) if a) for col in other_cols)
            for row in self.entries
        )
        return IntMatrix(self.rows, other.cols, entries)

    def __add__(self, other: IntMatrix) -> IntMatrix:
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r, s)) for r, s in zip(self.entries, other.entries)))

    def __sub__(self, other: IntMatrix) -> IntMatrix:
        return self + (-other)

    def __neg__(self) -> IntMatrix:
        return self.scale(-1)

    def scale(self, k: int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(tuple(k * x for x in r) for r in self.entries))

    def mod(self, modulus: int) -> IntMatrix:
        return IntMatrix(self.rows, self.cols, tuple(tuple(x % modulus for x in r) for r in self.entries))

    def apply(self, vector: Sequence[int]) -> Vector:
        """Column action A·x."""
        if len(vector) != self.cols:
            raise ValueError(f"vector of length {len(vector)} for {self.shape} matrix")
        return tuple(sum(a * x for a, x in zip(r, vector) if a) for r in self.entries)

    def act(self, vector: Sequence[int]) -> Vector:
        """Row action k·A."""
        if len(vector) != self.rows:
            raise ValueError(f"row vector of length {len(vector)} for {self.shape} matrix")
        out = [0] * self.cols
        for k, r in zip(vector, self.entries):
            if k:
                for j, a in enumerate(r):
                    out[j] += k * a
        return tuple(out)

    def power(self, n: int) -> IntMatrix:
        if self.rows != self.cols:
            raise ValueError("power of a non-square matrix")
        base = self if n >= 0 else self.inverse()
        out = IntMatrix.identity(self.rows)
        for _ in range(abs(n)):
            out = out @ base
        return out

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.entries for x in r)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == IntMatrix.identity(self.rows)

    def det(self) -> int:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        if self.rows == 0:
            return 1
        dm = DomainMatrix([[ZZ(x) for x in r] for r in self.entries], self.shape, ZZ)
        return int(dm.det())

    def inverse(self) -> IntMatrix:
        if self.rows != self.cols:
            raise NotUnimodular("non-square matrix has no inverse")
        if self.rows == 0:
            return self
        if abs(self.det()) != 1:
            raise NotUnimodular(f"determinant {self.det()} is not a unit")
        inv = Matrix(self.to_list()).inv()
        return IntMatrix.from_rows([[int(inv[i, j]) for j in range(self.cols)] for i in range(self.rows)])


# ---------- Smith normal form ----------

@dataclass(frozen=True)
class SmithDecomposition:
    """U·A·V = D with unimodular U, V; inverses are tracked alongside."""

    u: IntMatrix
    d: IntMatrix
    v: IntMatrix
    u_inv: IntMatrix
    v_inv: IntMatrix
    rank: int

    @property
    def diagonal(self) -> Vector:
        return tuple(self.d.entries[i][i] for i in range(min(self.d.rows, self.d.cols)))

    @property
    def invariant_factors(self) -> Vector:
        return self.diagonal[:self.rank]


def _eye(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _smallest_entry(d: list[list[int]], t: int, m: int, n: int) -> tuple[int, int] | None:
    best: tuple[int, int] | None = None
    best_abs = 0
    for i in range(t, m):
        row = d[i]
        for j in range(t, n):
            x = row[j]
            if x and (best is None or abs(x) < best_abs):
                best, best_abs = (i, j), abs(x)
                if best_abs == 1:
                    return best
    return best


def smith_normal_form(a: IntMatrix) -> SmithDecomposition:
    """Pivot on the smallest nonzero |entry| (row-major tie-break) until diagonal with d_i | d_i+1."""
    m, n = a.rows, a.cols
    d = [list(r) for r in a.entries]
    u, u_inv, v, v_inv = _eye(m), _eye(m), _eye(n), _eye(n)

    def swap_rows(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]
        for row in u_inv:
            row[i], row[j] = row[j], row[i]

    def swap_cols(i: int, j: int) -> None:
        for mat in (d, v):
            for row in mat:
                row[i], row[j] = row[j], row[i]
        v_inv[i], v_inv[j] = v_inv[j], v_inv[i]

    def add_row(src: int, dst: int, q: int) -> None:
        d[dst] = [x + q * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]
        for row in u_inv:
            row[src] -= q * row[dst]

    def add_col(src: int, dst: int, q: int) -> None:
        for mat in (d, v):
            for row in mat:
                row[dst] += q * row[src]
        v_inv[src] = [x - q * y for x, y in zip(v_inv[src], v_inv[dst])]

    t = 0
    while t < min(m, n):
        pivot = _smallest_entry(d, t, m, n)
        if pivot is None:
            break
        while True:
            i, j = pivot
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            p = d[t][t]
            clean = True
            for i in range(t + 1, m):
                if d[i][t]:
                    add_row(t, i, -(d[i][t] // p))
                    clean = clean and d[i][t] == 0
            for j in range(t + 1, n):
                if d[t][j]:
                    add_col(t, j, -(d[t][j] // p))
                    clean = clean and d[t][j] == 0
            if clean:
                bad = next((i for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % p), None)
                if bad is None:
                    break
                add_row(bad, t, 1)
            pivot = _smallest_entry(d, t, m, n)
            assert pivot is not None
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
            for row in u_inv:
                row[t] = -row[t]
        t += 1

    return SmithDecomposition(
        u=IntMatrix.from_rows(u, m),
        d=IntMatrix.from_rows(d, n),
        v=IntMatrix.from_rows(v, n),
        u_inv=IntMatrix.from_rows(u_inv, m),
        v_inv=IntMatrix.from_rows(v_inv, n),
        rank=t,
    )


# ---------- Hermite bases and lattices ----------

def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def hermite_basis(vectors: Iterable[Sequence[int]], ncols: int) -> list[Vector]:
    """Reduced echelon basis of the Z-span of `vectors`, pivots positive, entries above pivots in [0, pivot)."""
    pivots: dict[int, list[int]] = {}
    for vec in vectors:
        w = [int(x) for x in vec]
        if len(w) != ncols:
            raise ValueError(f"vector of length {len(w)}, expected {ncols}")
        while True:
            lead = next((i for i, x in enumerate(w) if x), None)
            if lead is None:
                break
            row = pivots.get(lead)
            if row is None:
                pivots[lead] = w if w[lead] > 0 else [-x for x in w]
                break
            a, b = row[lead], w[lead]
            if b % a == 0:
                q = b // a
                w = [y - q * x for x, y in zip(row, w)]
                continue
            g, x, y = _xgcd(a, b)
            pivots[lead] = [x * r + y * s for r, s in zip(row, w)]
            w = [(b // g) * r - (a // g) * s for r, s in zip(row, w)]

    keys = sorted(pivots)
    ordered = [pivots[k] for k in keys]
    for idx, col in enumerate(keys):
        p = ordered[idx]
        for above in range(idx):
            q = ordered[above][col] // p[col]
            if q:
                ordered[above] = [x - q * y for x, y in zip(ordered[above], p)]
    return [tuple(r) for r in ordered]


def lattice_contains(basis: Sequence[Sequence[int]], vector: Sequence[int]) -> bool:
    """Membership test against a basis produced by hermite_basis."""
    w = list(vector)
    for row in basis:
        col = next(i for i, x in enumerate(row) if x)
        if w[col] % row[col]:
            return False
        q = w[col] // row[col]
        if q:
            w = [x - q * y for x, y in zip(w, row)]
    return not any(w)


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Columns form a primitive Z-basis of {x : A·x = 0}, canonicalised by hermite_basis."""
    snf = smith_normal_form(a)
    free = [snf.v.column(j) for j in range(snf.rank, a.cols)]
    return IntMatrix.from_columns(hermite_basis(free, a.cols), a.cols)


# ---------- finite abelian groups ----------

@dataclass(frozen=True)
class AbelianGroupStructure(Generic[T]):
    """Product of cyclic factors Z/d_i (d_i = 0 meaning Z) with explicit generators.

    `projection` maps an ambient vector lying in the generator span to class
    coordinates; `encoder` turns a generator-typed element into such a vector.
    """

    invariant_factors: tuple[int, ...]
    generators: tuple[T, ...]
    projection: tuple[tuple[Fraction, ...], ...]
    lifts: tuple[Vector, ...] = ()
    encoder: Callable[[T], Sequence[int]] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not (len(self.invariant_factors) == len(self.generators) == len(self.projection)):
            raise ValueError("factors, generators and projection rows must have equal length")

    @property
    def order(self) -> int:
        """Group order, 0 when a free factor is present."""
        if any(d == 0 for d in self.invariant_factors):
            return 0
        return prod(self.invariant_factors)

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    @property
    def is_finite(self) -> bool:
        return all(self.invariant_factors)

    def coordinates(self, vector: Sequence[int]) -> Vector:
        out = []
        for row, d in zip(self.projection, self.invariant_factors):
            val = sum((c * x for c, x in zip(row, vector) if x and c), Fraction(0))
            if val.denominator != 1:
                raise NotInLattice(f"vector {tuple(vector)} is outside the generator lattice")
            out.append(val.numerator % d if d else val.numerator)
        return tuple(out)

    def class_of(self, element: T) -> Vector:
        if self.encoder is None:
            raise TypeError("structure has no encoder for its elements")
        return self.coordinates(self.encoder(element))

    def element_order(self, coords: Sequence[int]) -> int:
        out = 1
        for c, d in zip(coords, self.invariant_factors):
            if d == 0:
                if c:
                    return 0
                continue
            out = lcm(out, d // gcd(c, d))
        return out

    def enumerate(self) -> Iterator[Vector]:
        if not self.is_finite:
            raise ValueError("cannot enumerate an infinite group")
        return itertools.product(*(range(d) for d in self.invariant_factors))

    def coords_at(self, index: int) -> Vector:
        if not 0 <= index < max(self.order, 1):
            raise IndexError(f"class index {index} out of range for order {self.order}")
        out = []
        for d in reversed(self.invariant_factors):
            out.append(index % d)
            index //= d
        return tuple(reversed(out))


def quotient_structure(generators: IntMatrix, relations: IntMatrix) -> AbelianGroupStructure[Vector]:
    """span(generators) / span(relations), both given as columns in a common Z^r."""
    r = generators.rows
    if relations.rows != r:
        raise ValueError("generators and relations live in different ambient spaces")
    gsnf = smith_normal_form(generators)
    s = gsnf.rank
    diag = gsnf.diagonal

    coords = []
    for col in relations.columns():
        ux = gsnf.u.apply(col)
        if any(ux[i] for i in range(s, r)) or any(ux[i] % diag[i] for i in range(s)):
            raise RelationNotInSpan(f"relation {col} is not in the span of the generators")
        coords.append(tuple(ux[i] // diag[i] for i in range(s)))

    reduced = IntMatrix.from_columns(hermite_basis(coords, s), s)
    rsnf = smith_normal_form(reduced)
    factors = [rsnf.d.entries[i][i] if i < rsnf.rank else 0 for i in range(s)]
    keep = [i for i, d in enumerate(factors) if d != 1]
    log.debug("quotient of %d generators by %d relations: factors %s", generators.cols, relations.cols, factors)

    v_head = gsnf.v.select_columns(range(s))
    basis = generators @ v_head
    gens = tuple(basis.apply(rsnf.u_inv.column(i)) for i in keep)
    lifts = tuple(v_head.apply(rsnf.u_inv.column(i)) for i in keep)

    projection = []
    for i in keep:
        row = [Fraction(0)] * r
        for j in range(s):
            c = rsnf.u.entries[i][j]
            if c:
                scale = Fraction(c, diag[j])
                for col, x in enumerate(gsnf.u.entries[j]):
                    if x:
                        row[col] += scale * x
        projection.append(tuple(row))

    return AbelianGroupStructure(
        invariant_factors=tuple(factors[i] for i in keep),
        generators=gens,
        projection=tuple(projection),
        lifts=lifts,
    )


def solve_mod(a: IntMatrix, b: Sequence[int], modulus: int) -> Vector | None:
    """Some x with A·x ≡ b (mod modulus), or None when the system has no solution."""
    if modulus < 1:
        raise ValueError("modulus must be positive")
    snf = smith_normal_form(a)
    c = snf.u.apply(b)
    y = [0] * a.cols
    for i in range(a.rows):
        d = snf.d.entries[i][i] if i < snf.rank else 0
        if d == 0:
            if c[i] % modulus:
                return None
            continue
        g = gcd(d, modulus)
        if c[i] % g:
            return None
        m = modulus // g
        if m > 1:
            y[i] = (c[i] // g) * pow(d // g, -1, m) % m
    return tuple(x % modulus for x in snf.v.apply(y))


# ---------- F2 ----------

@dataclass(frozen=True)
class F2Matrix:
    rows: int
    cols: int
    bits: tuple[tuple[int, ...], ...]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[int]], cols: int | None = None) -> F2Matrix:
        bits = tuple(tuple(int(x) % 2 for x in r) for r in rows)
        if cols is None:
            cols = len(bits[0]) if bits else 0
        return cls(len(bits), cols, bits)

    def to_array(self) -> np.ndarray:
        return np.array(self.bits, dtype=np.uint8).reshape(self.rows, self.cols)


def f2_rank(a: np.ndarray) -> int:
    work = (np.asarray(a, dtype=np.uint8) & 1).copy()
    rows, cols = work.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        hits = np.nonzero(work[rank:, col])[0]
        if hits.size == 0:
            continue
        pivot = rank + int(hits[0])
        if pivot != rank:
            work[[rank, pivot]] = work[[pivot, rank]]
        mask = work[:, col].astype(bool)
        mask[rank] = False
        work[mask] ^= work[rank]
        rank += 1
    return rank


def f2_jordan_counts(m: F2Matrix) -> tuple[int, int]:
    """(j1, j2) block counts of an involution over F2: j2 = rank(M - I), j1 = n - 2*j2."""
    if m.rows != m.cols:
        raise NotInvolution(f"{m.rows}x{m.cols} matrix is not square")
    arr = m.to_array().astype(np.int64)
    eye = np.eye(m.rows, dtype=np.int64)
    if np.any((arr @ arr) % 2 != eye):
        raise NotInvolution("M^2 != I over F2")
    j2 = f2_rank((arr + eye) % 2)
    return m.rows - 2 * j2, j2
