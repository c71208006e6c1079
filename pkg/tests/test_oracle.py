import pytest

from src.algebra.homology import h1_bar
from src.algebra.oracle import (
    OracleTooLarge,
    enumerate_coboundaries,
    enumerate_cocycles,
    oracle_class_count,
    oracle_is_coboundary,
    oracle_is_feasible,
)
from src.algebra.phases import GaugeFunction, coboundary, cohomology_classes

FEASIBLE = ["rectangular_mirror", "rectangular", "square_axis_mirror", "D4_zeta4", "D3_zeta3", "D6_zeta6",
            "I212121", "oblique"]


@pytest.mark.parametrize("name", FEASIBLE)
def test_enumeration_agrees_with_smith_forms(preset, name):
    lat = preset(name)
    assert oracle_is_feasible(lat)
    count = oracle_class_count(lat)
    assert count.cocycles % count.coboundaries == 0
    assert count.classes == h1_bar(lat).order == cohomology_classes(lat).order


def test_glide_counts(pg):
    cocycles = enumerate_cocycles(pg)
    assert ((0, 0), (1, 0)) in cocycles
    assert ((0, 0), (0, 0)) in cocycles
    assert ((0, 0), (0, 1)) in enumerate_coboundaries(pg)


def test_membership_matches_the_fast_check(preset):
    lat = preset("rectangular")
    for phi in cohomology_classes(lat).generators:
        assert not oracle_is_coboundary(lat, phi.values)
    trivial = coboundary(GaugeFunction(lat.group.order, (1, 3)), lat)
    assert oracle_is_coboundary(lat, trivial.values)


def test_large_groups_are_refused(preset):
    lat = preset("D12_zeta12")
    assert not oracle_is_feasible(lat)
    with pytest.raises(OracleTooLarge):
        oracle_class_count(lat)
