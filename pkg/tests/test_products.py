from fractions import Fraction

import pytest

from src.algebra.homology import h1_bar
from src.algebra.phases import PhaseCocycle, cohomology_classes, pair
from src.algebra.products import (
    Configuration,
    FactorSystem,
    NonIntegralCoefficients,
    NotA2Cycle,
    TranslationCocycle,
    TwoCycle,
    cap_sigma,
    commuting_configurations,
    cup_sigma,
    expressibility_flags,
    fixed_vector_classes,
    km_identity_check,
    restrict,
    translation_candidates,
)

CHECKED = ["square_axis_mirror", "D4_zeta4", "I212121", "I213", "rectangular", "trigonal_pair"]


def test_glide_commutator_cycle(pg):
    glide = PhaseCocycle(pg, 2, ((0, 0), (1, 0)))
    sigma = TranslationCocycle(pg, (0, Fraction(1, 2)))
    assert sigma.k(1) == (0, -1)
    assert not sigma.is_integral()
    c = TwoCycle.commutator(0, 1)
    assert c.is_cycle(pg.group.table)
    assert cap_sigma(sigma, c).terms == ((0, (0, 1)),)
    check = km_identity_check(glide, sigma, c)
    assert check.holds and check.lhs == 0


def test_non_cycles_are_rejected(pg):
    glide = PhaseCocycle(pg, 2, ((0, 0), (1, 0)))
    sigma = TranslationCocycle(pg, (0, Fraction(1, 2)))
    square = TwoCycle.of({(1, 1): 1})
    assert square.boundary(pg.group.table) == {1: 2, 0: -1}
    with pytest.raises(NotA2Cycle):
        cap_sigma(sigma, square)
    with pytest.raises(NotA2Cycle):
        cup_sigma(glide, sigma).pair(square)


def test_translation_must_be_compatible(preset):
    with pytest.raises(NonIntegralCoefficients):
        TranslationCocycle(preset("square_axis_mirror"), (Fraction(1, 3), 0))
    with pytest.raises(ValueError):
        TranslationCocycle(preset("square_axis_mirror"), (0,))


def test_factor_system_identity():
    table = ((0, 1), (1, 0))
    with pytest.raises(ValueError):
        FactorSystem(4, table, ((0, 1), (0, 0)))
    f = FactorSystem(2, table, ((0, 0), (0, 1)))
    assert f.pair(TwoCycle.of({(0, 1): 1, (1, 0): -1})) == 0
    assert f.value(1, 1) == Fraction(1, 2)


@pytest.mark.parametrize("name", CHECKED)
def test_cup_products_are_factor_systems(preset, name):
    lat = preset(name)
    for conf in commuting_configurations(lat):
        for phi in cohomology_classes(lat).generators:
            local = restrict(phi, conf.subgroup, conf.local)
            assert cup_sigma(local, conf.translation()).modulus == phi.modulus


def test_candidates_are_compatible(preset):
    lat = preset("D4_zeta4")
    g, h = lat.group.index("r^2"), lat.group.index("m")
    candidates = translation_candidates(lat, g, h)
    assert len(set(candidates)) == len(candidates)
    assert (0, 0) in candidates
    conf = Configuration.build(lat, g, h, candidates[0])
    for q in candidates:
        assert all(0 <= x < 1 for x in q)
        TranslationCocycle(conf.local, q)
    with pytest.raises(ValueError):
        translation_candidates(lat, g, h, limit=1)


def test_configuration_needs_commuting_elements(preset):
    lat = preset("D4_zeta4")
    with pytest.raises(NotA2Cycle):
        Configuration.build(lat, lat.group.index("r"), lat.group.index("m"), (0, 0))


def test_product_identity_on_many_configurations(preset):
    checked = 0
    for name in CHECKED:
        lat = preset(name)
        gens = cohomology_classes(lat).generators
        for conf in commuting_configurations(lat, include_integral=True):
            for phi in gens:
                assert conf.check(phi).holds, (name, conf.describe())
                checked += 1
    assert checked >= 10


def test_sign_matters_for_order_three(preset):
    lat = preset("trigonal_pair")
    results = [conf.check(phi, sign=-1) for conf in commuting_configurations(lat)
               for phi in cohomology_classes(lat).generators]
    assert not all(r.holds for r in results)
    assert all(r.equal_up_to_sign for r in results)


def test_sign_is_invisible_for_order_two(preset):
    lat = preset("I212121")
    (phi,) = cohomology_classes(lat).generators
    for conf in commuting_configurations(lat):
        assert conf.check(phi, sign=-1).holds


@pytest.mark.parametrize("name", ["I212121", "I213"])
def test_body_centred_class_needs_cap_cycles(preset, name):
    lat = preset(name)
    h1 = h1_bar(lat)
    (phi,) = cohomology_classes(lat).generators
    assert not any(any(c) for c in fixed_vector_classes(lat, h1))
    assert any(pair(phi, conf.cap()) == Fraction(1, 2) for conf in commuting_configurations(lat))
    assert expressibility_flags(lat, h1) == ["sigma_cap_c"]


def test_glide_is_seen_by_a_fixed_vector(pg, preset):
    assert expressibility_flags(pg) == ["k[g]"]
    assert expressibility_flags(preset("oblique")) == []


def test_restrict_keeps_values(preset):
    lat = preset("I212121")
    (phi,) = cohomology_classes(lat).generators
    conf = next(iter(commuting_configurations(lat)))
    local = restrict(phi, conf.subgroup, conf.local)
    assert local.values == tuple(phi.values[g] for g in conf.subgroup.members)
