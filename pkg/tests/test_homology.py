import random

import pytest

from src.algebra.exactalg import IntMatrix, quotient_structure
from src.algebra.groups import NotCyclic, NotNormal, cyclic_group, dihedral_group, generated_subgroup, subgroup
from src.algebra.homology import (
    Chain1,
    Chain2,
    InfiniteFactor,
    boundary1,
    boundary2,
    coinvariant_quotient_map,
    dihedral_fast_path,
    dual_structure,
    exactness_at_middle,
    h1_bar,
    h1_cyclic,
    h1_presented,
    inclusion_map,
    is_cycle,
    rotation_subgroup,
)
from src.algebra.lattices import LatticeModule, coinvariant_module, cyclotomic_lattice

SMALL = ["rectangular_mirror", "rectangular", "square_axis_mirror", "centered_mirror", "oblique",
         "D3_zeta3", "D4_zeta4", "I212121", "trigonal_pair"]
DIHEDRAL = ["D2_zeta2", "D3_zeta3", "D4_zeta4", "D5_zeta5", "D6_zeta6", "D8_zeta8", "D12_zeta12", "D16_zeta16",
            "square_axis_mirror", "square_diagonal_mirror", "square_modulated_fixed", "square_modulated_swapped",
            "rectangular", "triangular_mirror_through", "triangular_mirror_between"]


def random_chain2(rng: random.Random, lattice: LatticeModule, terms: int = 4) -> Chain2:
    n = lattice.group.order
    return Chain2.of(lattice.rank, [
        ((rng.randrange(n), rng.randrange(n)), tuple(rng.randint(-3, 3) for _ in range(lattice.rank)))
        for _ in range(terms)
    ])


def test_boundary1_row_convention():
    lat = cyclotomic_lattice(4)
    assert boundary1(lat, Chain1.single((1, 0), lat.group.index("r"))) == (-1, 1)


@pytest.mark.parametrize("seed", range(100))
def test_boundary_of_boundary_vanishes(preset, seed):
    rng = random.Random(seed)
    lat = preset(SMALL[seed % len(SMALL)])
    c = random_chain2(rng, lat)
    assert not any(boundary1(lat, boundary2(lat, c)))


def test_chain_arithmetic():
    a = Chain1.of(2, {1: (1, 0), 2: (0, 3)})
    b = Chain1.of(2, [(1, (-1, 0)), (3, (2, 2))])
    s = a + b
    assert s.coefficient(1) == (0, 0)
    assert s.terms == ((2, (0, 3)), (3, (2, 2)))
    assert (a - a).is_zero()
    assert a.scale(2).coefficient(2) == (0, 6)
    assert (-a).coefficient(1) == (-1, 0)
    with pytest.raises(ValueError):
        Chain1.of(2, {0: (1,)})


@pytest.mark.parametrize("name", SMALL)
def test_generators_are_cycles(preset, name):
    lat = preset(name)
    for c in h1_bar(lat).generators:
        assert is_cycle(lat, c)


@pytest.mark.parametrize("name", SMALL)
def test_reduced_and_full_bar_complexes_agree(preset, name):
    lat = preset(name)
    reduced, full = h1_bar(lat), h1_bar(lat, reduced=False)
    assert reduced.invariant_factors == full.invariant_factors
    for c in reduced.generators:
        assert full.element_order(full.class_of(c)) == reduced.element_order(reduced.class_of(c))


@pytest.mark.parametrize("seed", range(100))
def test_classes_ignore_boundaries(preset, seed):
    rng = random.Random(seed)
    lat = preset(SMALL[seed % len(SMALL)])
    h1 = h1_bar(lat)
    if h1.is_trivial:
        return
    c = h1.generators[rng.randrange(len(h1.generators))]
    moved = c + boundary2(lat, random_chain2(rng, lat))
    assert h1.class_of(moved) == h1.class_of(c)


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 7, 8, 12, 16])
def test_rotations_alone_give_nothing(n):
    lat = cyclotomic_lattice(n)
    assert h1_bar(lat).is_trivial
    assert h1_cyclic(lat, "r").is_trivial


def test_cyclic_shortcut_matches_bar_complex():
    rot = IntMatrix.block_diagonal(IntMatrix.identity(1), IntMatrix.from_rows([[0, 1], [-1, 0]]))
    lat = LatticeModule("Z+Z[i]", cyclic_group(4, rot))
    bar, short = h1_bar(lat), h1_cyclic(lat, "r")
    assert bar.invariant_factors == short.invariant_factors == (4,)
    k_r = Chain1.single((1, 0, 0), lat.group.index("r"))
    assert bar.element_order(bar.class_of(k_r)) == 4
    assert short.element_order(short.class_of(k_r)) == 4
    k_r2 = Chain1.single((1, 0, 0), lat.group.index("r^2"))
    assert short.class_of(k_r2) == tuple(2 * x % 4 for x in short.class_of(k_r))


def test_cyclic_shortcut_on_a_single_mirror(pg):
    h1 = h1_cyclic(pg, "m")
    assert h1.invariant_factors == (2,)
    (gen,) = h1.generators
    m = pg.group.index("m")
    assert gen.terms in (((m, (1, 0)),), ((m, (-1, 0)),))
    assert h1.element_order(h1.class_of(Chain1.single((1, 0), m))) == 2


def test_cyclic_shortcut_with_trivial_action():
    one = IntMatrix.identity(1)
    lat = LatticeModule("Z", dihedral_group(1, one, one))
    assert h1_cyclic(lat, "m").invariant_factors == (2,)
    assert h1_bar(lat).invariant_factors == (2,)


def test_cyclic_shortcut_needs_a_generator(preset):
    lat = preset("square_axis_mirror")
    with pytest.raises(NotCyclic):
        h1_cyclic(lat, "r")


@pytest.mark.parametrize("name", DIHEDRAL)
def test_exact_at_the_middle(preset, name):
    lat = preset(name)
    report = exactness_at_middle(lat, rotation_subgroup(lat))
    assert report.composite_zero
    assert report.exact
    assert report.beta.is_surjective()


@pytest.mark.parametrize("name", ["D4_zeta4", "D8_zeta8", "D16_zeta16", "D3_zeta3", "square_axis_mirror",
                                  "square_modulated_fixed", "rectangular"])
def test_rotation_fixing_only_zero(preset, name):
    lat = preset(name)
    report = exactness_at_middle(lat, rotation_subgroup(lat))
    assert report.alpha.source.is_trivial
    assert report.beta.is_isomorphism()


@pytest.mark.parametrize("name", DIHEDRAL)
def test_dihedral_shortcut_agrees(preset, name):
    lat = preset(name)
    fast = dihedral_fast_path(lat)
    assert fast is not None
    assert fast == h1_bar(lat).invariant_factors


def test_dihedral_shortcut_declines(preset):
    assert dihedral_fast_path(preset("rectangular_mirror")) is None
    assert dihedral_fast_path(preset("I213")) is None


def test_inclusion_of_the_axis_mirror(preset):
    axis = preset("D4_zeta4")
    assert inclusion_map(axis, subgroup(axis.group, ["e", "m"])).is_surjective()
    diagonal = preset("square_diagonal_mirror")
    assert inclusion_map(diagonal, subgroup(diagonal.group, ["e", "m"])).is_zero()


def test_quotient_map_needs_normality(preset):
    lat = preset("D4_zeta4")
    with pytest.raises(NotNormal):
        coinvariant_quotient_map(lat, subgroup(lat.group, ["e", "m"]))


def test_homology_of_presented_coinvariants(preset):
    lat = preset("rectangular")
    module = coinvariant_module(lat, generated_subgroup(lat.group, ["r"]))
    assert h1_presented(module).invariant_factors == (2, 2)


def test_dual_structure(preset):
    h1 = h1_bar(preset("rectangular"))
    dual = dual_structure(h1)
    assert dual.invariant_factors == h1.invariant_factors
    for i, ch in enumerate(dual.generators):
        assert dual.class_of(ch) == tuple(int(i == j) for j in range(len(h1.invariant_factors)))


def test_dual_of_infinite_group():
    with pytest.raises(InfiniteFactor):
        dual_structure(quotient_structure(IntMatrix.identity(1), IntMatrix.zeros(1, 0)))
