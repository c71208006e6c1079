from fractions import Fraction

import pytest

from src.algebra.diffraction import NoEmbedding, box_vectors, orbit, synthesize_spots
from src.algebra.phases import PhaseCocycle, cohomology_classes, extinction_set


@pytest.fixture
def glide(pg):
    return PhaseCocycle(pg, 2, ((0, 0), (1, 0)))


def test_box_vectors():
    assert len(box_vectors(2, 1)) == 9
    assert box_vectors(1, 1) == [(-1,), (0,), (1,)]
    with pytest.raises(ValueError):
        box_vectors(2, -1)


def test_orbit_records_first_element(pg):
    assert orbit(pg, (1, 1)) == {(1, 1): 0, (1, -1): 1}
    assert orbit(pg, (2, 0)) == {(2, 0): 0}


def test_glide_extinctions(pg, glide):
    spots = synthesize_spots(pg, glide, kmax=4, seed=3)
    extinct = {s.k for s in spots if s.extinct}
    assert extinct == {(-3, 0), (-1, 0), (1, 0), (3, 0)}
    for s in spots:
        if s.extinct:
            assert s.intensity == 0.0
            assert s.witness == "m"
            assert s.phase is None
        else:
            assert s.intensity > 0.0


def test_intensity_is_constant_on_orbits(pg, glide):
    spots = {s.k: s for s in synthesize_spots(pg, glide, kmax=3, seed=11)}
    for k, s in spots.items():
        for other in orbit(pg, k):
            if other in spots:
                assert spots[other].intensity == s.intensity


@pytest.mark.parametrize("name", ["D4_zeta4", "square_axis_mirror", "rectangular"])
def test_phases_follow_the_cocycle(preset, name):
    lat = preset(name)
    (phi, *_) = cohomology_classes(lat).generators
    spots = {s.k: s for s in synthesize_spots(lat, phi, kmax=2, seed=5)}
    for k, s in spots.items():
        if s.extinct:
            continue
        for h in lat.group.elements():
            moved = lat.act(k, h)
            if moved in spots:
                assert spots[moved].phase == (s.phase + phi.value(h, k)) % 1


def test_same_seed_same_pattern(pg, glide):
    a = synthesize_spots(pg, glide, kmax=3, seed=7)
    assert a == synthesize_spots(pg, glide, kmax=3, seed=7)
    b = synthesize_spots(pg, glide, kmax=3, seed=8)
    assert [s.intensity for s in a] != [s.intensity for s in b]


def test_origin_spot(pg, glide):
    spots = {s.k: s for s in synthesize_spots(pg, glide, kmax=1)}
    assert spots[(0, 0)].intensity == 1.0
    assert spots[(0, 0)].phase == Fraction(0)


def test_positions_use_the_embedding(pg, glide):
    spots = {s.k: s for s in synthesize_spots(pg, glide, kmax=1)}
    assert spots[(1, 1)].position == pytest.approx((1.0, 1.5))


def test_positions_need_an_embedding(preset):
    lat = preset("I212121")
    (phi,) = cohomology_classes(lat).generators
    with pytest.raises(NoEmbedding):
        synthesize_spots(lat, phi, kmax=1)
    spots = synthesize_spots(lat, phi, kmax=1, positions=False)
    assert len(spots) == 27
    assert all(s.position is None for s in spots)


@pytest.mark.parametrize("name", ["oblique", "square_axis_mirror", "D8_zeta8"])
def test_trivial_class_has_no_extinctions(preset, name):
    lat = preset(name)
    spots = synthesize_spots(lat, PhaseCocycle.zero(lat), kmax=2)
    assert not any(s.extinct for s in spots)
    assert all(s.phase == 0 for s in spots)


@pytest.mark.parametrize("name", ["rectangular_mirror", "D4_zeta4", "square_modulated_swapped"])
def test_extinct_spots_match_the_extinction_set(preset, name):
    lat = preset(name)
    labels = lat.group.labels
    for phi in cohomology_classes(lat).generators:
        expected = {e.k: labels[e.witness] for e in extinction_set(phi, box_vectors(lat.rank, 2)) if e.extinct}
        spots = synthesize_spots(lat, phi, kmax=2, positions=False)
        assert {s.k: s.witness for s in spots if s.extinct} == expected
