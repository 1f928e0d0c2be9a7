import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahlfors_lab import carleson, curves
from ahlfors_lab.geometry import (
    AtomicMeasure,
    GeometryError,
    ResolutionError,
    discretize_arclength,
    dyadic_radii,
)

from oracles import circle_arc_in_disk, lens_area


@pytest.fixture(scope="module")
def unit_circle():
    return curves.circle(1024)


@pytest.fixture(scope="module")
def area_measure():
    x = np.linspace(-1, 1, 601)
    h = x[1] - x[0]
    X, Y = np.meshgrid(x, x)
    z = (X + 1j * Y).ravel()
    z = z[np.abs(z) < 1]
    return AtomicMeasure(z, np.full(z.size, h * h), "area-density", h)


def test_zero_measure(unit_circle):
    zero = AtomicMeasure.zero(0.001)
    b = carleson.boundary_norm(zero, unit_circle)
    s = carleson.sector_norm(zero)
    assert b.norm == 0 and s.norm == 0
    assert np.all(b.rho == 0)
    d = carleson.vanishing_diagnosis(b)
    assert d.vanishing


def test_gamma1_against_unit_circle_matches_oracle(unit_circle):
    g = discretize_arclength(curves.internal_circle(1, 4096), 2)
    radii = dyadic_radii(2 * (1 - 1e-9), 0.05, 24)
    rep = carleson.boundary_norm(g, unit_circle, radii)
    oracle = max(circle_arc_in_disk(0.5, 1.0, r) / r for r in radii)
    assert rep.norm == pytest.approx(oracle, rel=0.01)
    assert 2 <= rep.norm <= 2 * math.pi


def test_area_measure_profile_matches_cap_area(unit_circle, area_measure):
    rep = carleson.boundary_norm(area_measure, unit_circle)
    for r, rho in zip(rep.scales, rep.rho):
        if 0.05 <= r <= 0.5:
            assert rho == pytest.approx(lens_area(r) / r, rel=0.05)
    d = carleson.vanishing_diagnosis(rep)
    assert d.vanishing
    assert 0.7 <= d.exponent <= 1.2


def test_diameter_arclength_is_not_vanishing(unit_circle):
    dia = discretize_arclength(curves.segment(4096, -1, 1), 2)
    d = carleson.vanishing_diagnosis(carleson.boundary_norm(dia, unit_circle))
    assert not d.vanishing
    assert abs(d.exponent) < 0.2


def test_vanishing_needs_four_scales(unit_circle):
    rep = carleson.boundary_norm(AtomicMeasure([0j], [1.0]), unit_circle, [0.5, 1.0, 1.5])
    with pytest.raises(GeometryError):
        carleson.vanishing_diagnosis(rep)


def test_radius_range_errors(unit_circle):
    m = AtomicMeasure([0j], [1.0], "custom", 0.1)
    with pytest.raises(ResolutionError):
        carleson.boundary_norm(m, unit_circle, [0.1, 0.5])
    with pytest.raises(ResolutionError):
        carleson.boundary_norm(m, unit_circle, [0.5, 3.0])
    with pytest.raises(ResolutionError):
        carleson.boundary_norm(m, unit_circle, r_min=0.05)


def test_point_mass_at_origin_has_zero_sector_norm():
    rep = carleson.sector_norm(AtomicMeasure([0j], [1.0]))
    assert rep.norm == 0.0


def test_radial_segment_sector_norm_is_one():
    seg = discretize_arclength(curves.segment(4096, 0, 1), 4)
    assert carleson.sector_norm(seg).norm == pytest.approx(1.0, rel=0.05)


@pytest.mark.parametrize("n", range(1, 7))
def test_gamma_n_sector_norm(n):
    g = discretize_arclength(curves.internal_circle(n, 4096), 4)
    rep = carleson.sector_norm(g)
    assert rep.norm == pytest.approx(2 * (1 - 2.0**-n), rel=0.02)
    if n >= 4:
        assert rep.norm == pytest.approx(2.0, rel=0.10)


def test_sector_rejects_atoms_outside_disk():
    with pytest.raises(GeometryError):
        carleson.sector_norm(AtomicMeasure([1.01 + 0j], [1.0]))
    with pytest.raises(ResolutionError):
        carleson.sector_norm(AtomicMeasure([0.5 + 0j], [1.0], "custom", 0.25), [0.5])


def _random_measure(rng, n=80, base=1e-3):
    r = np.sqrt(rng.uniform(0, 1, n))
    return AtomicMeasure(r * np.exp(2j * np.pi * rng.random(n)), rng.uniform(0.01, 1, n), "custom", base)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_boundary_norm_subadditive(seed):
    rng = np.random.default_rng(seed)
    bnd = curves.circle(128)
    radii = dyadic_radii(1.9, 0.05)
    m1, m2 = _random_measure(rng), _random_measure(rng)
    a = carleson.boundary_norm(m1, bnd, radii).norm
    b = carleson.boundary_norm(m2, bnd, radii).norm
    ab = carleson.boundary_norm(m1 + m2, bnd, radii).norm
    assert ab <= (a + b) * (1 + 1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), k=st.integers(0, 3), shift=st.complex_numbers(max_magnitude=4))
def test_boundary_norm_rigid_motion_invariant(seed, k, shift):
    rng = np.random.default_rng(seed)
    bnd = curves.circle(128)
    m = _random_measure(rng)
    radii = dyadic_radii(1.9, 0.05)
    rot = 1j**k
    a = carleson.boundary_norm(m, bnd, radii).norm
    b = carleson.boundary_norm(m.moved(rot, shift), bnd.transformed(rot, shift), radii).norm
    assert b == pytest.approx(a, rel=1e-9)


@pytest.mark.parametrize("make", [
    lambda: discretize_arclength(curves.internal_circle(3, 4096), 2),
    lambda: discretize_arclength(curves.segment(4096, 0, 1 - 1e-9), 2),
    lambda: discretize_arclength(curves.segment(4096, -0.99, 0.99), 2),
])
def test_sector_and_disk_norms_comparable(make, unit_circle):
    m = make()
    s = carleson.sector_norm(m).norm
    b = carleson.boundary_norm(m, unit_circle).norm
    assert 0.25 <= b / s <= 4


def test_sector_and_disk_norms_comparable_area(unit_circle, area_measure):
    s = carleson.sector_norm(area_measure).norm
    b = carleson.boundary_norm(area_measure, unit_circle).norm
    assert 0.25 <= b / s <= 4


def test_report_serialization(unit_circle):
    rep = carleson.boundary_norm(AtomicMeasure([0.5 + 0j], [1.0]), unit_circle)
    d = rep.to_dict()
    assert d["form"] == "boundary-disk"
    assert d["norm"] == max(d["profile"]["rho"])
