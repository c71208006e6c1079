import itertools
import random
from math import gcd, prod

import pytest
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from src.algebra.exactalg import (
    F2Matrix,
    IntMatrix,
    NotInvolution,
    NotUnimodular,
    RelationNotInSpan,
    f2_jordan_counts,
    f2_rank,
    hermite_basis,
    kernel_basis,
    lattice_contains,
    quotient_structure,
    smith_normal_form,
    solve_mod,
)

SEEDS = range(100)


def random_matrix(rng: random.Random, max_rows: int = 4, max_cols: int = 5) -> IntMatrix:
    m, n = rng.randint(1, max_rows), rng.randint(1, max_cols)
    rows = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
    if m > 1 and rng.random() < 0.3:
        a, b = rng.sample(range(m), 2)
        c = rng.randint(-3, 3)
        rows[b] = [c * x for x in rows[a]]
    return IntMatrix.from_rows(rows, n)


def unimodular(rng: random.Random, n: int) -> IntMatrix:
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2) if n > 1 else (0, 0)
        if i == j:
            rows[i] = [-x for x in rows[i]]
            continue
        q = rng.randint(-2, 2)
        rows[j] = [y + q * x for x, y in zip(rows[i], rows[j])]
    return IntMatrix.from_rows(rows, n)


def minors_gcd(a: IntMatrix, k: int) -> int:
    out = 0
    for rows in itertools.combinations(range(a.rows), k):
        for cols in itertools.combinations(range(a.cols), k):
            out = gcd(out, a.select_rows(rows).select_columns(cols).det())
    return out


@pytest.mark.parametrize("seed", SEEDS)
def test_smith_identities(seed):
    a = random_matrix(random.Random(seed))
    snf = smith_normal_form(a)
    assert snf.u @ a @ snf.v == snf.d
    assert (snf.u @ snf.u_inv).is_identity()
    assert (snf.v @ snf.v_inv).is_identity()
    assert abs(snf.u.det()) == 1 and abs(snf.v.det()) == 1
    for i in range(a.rows):
        for j in range(a.cols):
            if i != j:
                assert snf.d[i, j] == 0
    factors = snf.invariant_factors
    assert all(d > 0 for d in factors)
    assert all(factors[i + 1] % factors[i] == 0 for i in range(len(factors) - 1))
    assert all(x == 0 for x in snf.diagonal[snf.rank:])


@pytest.mark.parametrize("seed", SEEDS)
def test_smith_matches_determinantal_divisors(seed):
    a = random_matrix(random.Random(1000 + seed), max_rows=3, max_cols=3)
    factors = smith_normal_form(a).invariant_factors
    for k in range(1, min(a.rows, a.cols) + 1):
        expected = minors_gcd(a, k)
        got = prod(factors[:k]) if k <= len(factors) else 0
        assert got == expected


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], (2, 6, 12)),
        ([[12, 6, 4], [3, 9, 6], [2, 16, 14]], (1, 10, 30)),
        ([[1, 1, 0], [0, 1, 1], [1, 0, 1]], (1, 1, 2)),
    ],
)
def test_smith_against_sympy(rows, expected):
    ours = smith_normal_form(IntMatrix.from_rows(rows)).invariant_factors
    theirs = sympy_snf(Matrix(rows), domain=ZZ)
    assert ours == expected
    assert tuple(sorted(abs(theirs[i, i]) for i in range(3))) == expected


@pytest.mark.parametrize("seed", SEEDS)
def test_kernel_basis_is_primitive_kernel(seed):
    a = random_matrix(random.Random(2000 + seed))
    kernel = kernel_basis(a)
    assert kernel.cols == a.cols - smith_normal_form(a).rank
    for col in kernel.columns():
        assert not any(a.apply(col))
    if kernel.cols:
        # primitive: the columns extend to a basis, so their maximal minors have gcd 1
        assert minors_gcd(kernel, kernel.cols) == 1


@pytest.mark.parametrize("seed", SEEDS)
def test_hermite_basis_spans_inputs(seed):
    rng = random.Random(3000 + seed)
    a = random_matrix(rng)
    basis = hermite_basis(a.entries, a.cols)
    for row in a.entries:
        assert lattice_contains(basis, row)
    pivots = [next(i for i, x in enumerate(r) if x) for r in basis]
    assert pivots == sorted(pivots)
    for idx, (r, p) in enumerate(zip(basis, pivots)):
        assert r[p] > 0
        for above in basis[:idx]:
            assert 0 <= above[p] < r[p]


@pytest.mark.parametrize("seed", SEEDS)
def test_inverse_of_unimodular(seed):
    rng = random.Random(4000 + seed)
    a = unimodular(rng, rng.randint(1, 4))
    assert (a @ a.inverse()).is_identity()
    assert (a.inverse() @ a).is_identity()


def test_inverse_rejects_non_unit():
    with pytest.raises(NotUnimodular):
        IntMatrix.from_rows([[2, 0], [0, 1]]).inverse()


@pytest.mark.parametrize("seed", SEEDS)
def test_solve_mod_finds_planted_solution(seed):
    rng = random.Random(5000 + seed)
    a = random_matrix(rng)
    modulus = rng.choice([2, 3, 4, 6, 8, 12])
    x = [rng.randrange(modulus) for _ in range(a.cols)]
    b = [v % modulus for v in a.apply(x)]
    sol = solve_mod(a, b, modulus)
    assert sol is not None
    assert [v % modulus for v in a.apply(sol)] == b


def test_solve_mod_reports_no_solution():
    assert solve_mod(IntMatrix.from_rows([[2]]), [1], 4) is None
    assert solve_mod(IntMatrix.from_rows([[2]]), [2], 4) in {(1,), (3,)}


@pytest.mark.parametrize("seed", SEEDS)
def test_solve_mod_agrees_with_exhaustive_search(seed):
    rng = random.Random(6000 + seed)
    a = random_matrix(rng, max_rows=3, max_cols=3)
    modulus = rng.randint(2, 6)
    b = [rng.randrange(modulus) for _ in range(a.rows)]
    solvable = any(
        [v % modulus for v in a.apply(x)] == b for x in itertools.product(range(modulus), repeat=a.cols)
    )
    sol = solve_mod(a, b, modulus)
    assert (sol is not None) == solvable
    if sol is not None:
        assert [v % modulus for v in a.apply(sol)] == b


def test_quotient_structure_factors_and_orders():
    q = quotient_structure(IntMatrix.identity(2), IntMatrix.from_columns([(2, 0), (0, 4)], 2))
    assert q.invariant_factors == (2, 4)
    assert q.order == 8
    assert q.element_order(q.coordinates((1, 1))) == 4
    assert not any(q.coordinates((2, 4)))
    assert len(list(q.enumerate())) == 8
    assert q.coords_at(5) == list(q.enumerate())[5]


def test_quotient_structure_with_free_part():
    q = quotient_structure(IntMatrix.identity(2), IntMatrix.from_columns([(3, 0)], 2))
    assert sorted(q.invariant_factors) == [0, 3]
    assert q.order == 0 and not q.is_finite


def test_quotient_structure_drops_trivial_factors():
    gens = IntMatrix.from_columns([(2, 0), (0, 2)], 2)
    q = quotient_structure(gens, IntMatrix.from_columns([(2, 0), (0, 2)], 2))
    assert q.is_trivial and q.order == 1


def test_relation_outside_span():
    gens = IntMatrix.from_columns([(2, 0), (0, 2)], 2)
    with pytest.raises(RelationNotInSpan):
        quotient_structure(gens, IntMatrix.from_columns([(1, 0)], 2))


def test_f2_rank_and_jordan_counts():
    assert f2_rank(F2Matrix.from_rows([[1, 1], [1, 1]]).to_array()) == 1
    assert f2_rank(F2Matrix.from_rows([[2, 4], [6, 8]]).to_array()) == 0
    assert f2_jordan_counts(F2Matrix.from_rows([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == (3, 0)
    assert f2_jordan_counts(F2Matrix.from_rows([[0, 1], [1, 0]])) == (0, 1)
    assert f2_jordan_counts(F2Matrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]])) == (1, 1)


def test_jordan_counts_need_an_involution():
    with pytest.raises(NotInvolution):
        f2_jordan_counts(F2Matrix.from_rows([[0, 1, 0], [0, 0, 1], [1, 0, 0]]))
