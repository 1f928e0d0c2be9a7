import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahlfors_lab import conformal, curves, transport
from ahlfors_lab.conformal import ConformalMap
from ahlfors_lab.geometry import AtomicMeasure, GeometryError, discretize_arclength
from ahlfors_lab.transport import TransportError, norm_ratio, pull_back, push_forward


def _atoms(n, seed=0, r_max=0.9):
    rng = np.random.default_rng(seed)
    z = conformal.random_disk_points(n, rng, r_max)
    return AtomicMeasure(z, rng.uniform(0.1, 2.0, n), "custom", 1e-4)


def test_identity_transport_is_exact():
    nu = _atoms(100)
    f = ConformalMap.identity()
    out = push_forward(nu, f)
    np.testing.assert_array_equal(out.locations, nu.locations)
    np.testing.assert_array_equal(out.masses, nu.masses)
    back = pull_back(out, f)
    np.testing.assert_array_equal(back.masses, nu.masses)


def test_mobius_example_both_directions():
    # phi(z) = (z + a) / (1 + a z), a = 1/2: phi(0) = 1/2, |phi'(0)| = 1 - a^2
    f = ConformalMap.mobius(1, 0.5, 0.5, 1)
    out = push_forward(AtomicMeasure([0j], [1.0]), f)
    assert out.locations[0] == pytest.approx(0.5, abs=1e-15)
    assert out.masses[0] == pytest.approx(0.75, rel=1e-15)
    back = pull_back(AtomicMeasure([0.5 + 0j], [0.75]), f)
    assert abs(back.locations[0]) < 1e-15
    assert back.masses[0] == pytest.approx(1.0, rel=1e-15)


def test_inverse_law_on_fitted_maps(corpus_maps):
    nu = _atoms(1000, seed=3)
    for name, f in corpus_maps.items():
        back = pull_back(push_forward(nu, f), f)
        assert np.max(np.abs(back.locations - nu.locations)) <= 1e-8, name
        assert np.max(np.abs(back.masses - nu.masses) / nu.masses) <= 1e-6, name


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), i=st.integers(-8, 8), j=st.integers(-8, 8))
def test_push_forward_is_linear_exactly_for_dyadic_weights(seed, i, j):
    # power-of-two weights scale without rounding, so equality is bitwise
    a, b = 2.0**i, 2.0**j
    f = ConformalMap.mobius(1, 0.3j, -0.3j, 1)
    n1, n2 = _atoms(30, seed), _atoms(30, seed + 1)
    lhs = push_forward(n1.scaled(a) + n2.scaled(b), f)
    rhs = push_forward(n1, f).scaled(a) + push_forward(n2, f).scaled(b)
    np.testing.assert_array_equal(lhs.locations, rhs.locations)
    np.testing.assert_array_equal(lhs.masses, rhs.masses)


# zero or normal-range weights: subnormal masses carry no relative precision
_weights = st.one_of(st.just(0.0), st.floats(1e-3, 3))


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), a=_weights, b=_weights)
def test_push_forward_is_linear_to_rounding(seed, a, b):
    f = ConformalMap.mobius(1, 0.3j, -0.3j, 1)
    n1, n2 = _atoms(30, seed), _atoms(30, seed + 1)
    lhs = push_forward(n1.scaled(a) + n2.scaled(b), f)
    rhs = push_forward(n1, f).scaled(a) + push_forward(n2, f).scaled(b)
    np.testing.assert_array_equal(np.sort_complex(lhs.locations), np.sort_complex(rhs.locations))
    np.testing.assert_allclose(np.sort(lhs.masses), np.sort(rhs.masses), rtol=4 * np.finfo(float).eps)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_mass_law(seed):
    f = ConformalMap.mobius(2, 0.5, 0.25, 1)
    nu = _atoms(50, seed)
    out = push_forward(nu, f)
    want = math.fsum(nu.masses * np.abs(f.derivative(nu.locations)))
    assert math.fsum(out.masses) == want


def test_inadmissible_atoms_raise_with_index(ellipse_map):
    nu = AtomicMeasure([0.1 + 0j, 0.2j, 1 - 1e-6 + 0j], [1.0, 1.0, 1.0])
    with pytest.raises(TransportError) as exc:
        push_forward(nu, ellipse_map)
    assert exc.value.index == 2
    assert isinstance(exc.value, GeometryError)
    far = AtomicMeasure([0j, 5.0 + 0j], [1.0, 1.0])
    with pytest.raises(TransportError) as exc:
        pull_back(far, ellipse_map)
    assert exc.value.index == 1


def test_empty_measures_pass_through(ellipse_map):
    z = AtomicMeasure.zero(0.01)
    assert len(push_forward(z, ellipse_map)) == 0
    assert len(pull_back(z, ellipse_map)) == 0


@pytest.mark.parametrize("n", range(1, 7))
def test_functoriality_on_internal_circles(n, corpus_maps):
    # pushed arclength on gamma_n vs the length of phi(gamma_n) sampled 8x finer
    g = curves.internal_circle(n, 2048)
    nu = discretize_arclength(g, 2)
    for name, f in corpus_maps.items():
        img = push_forward(nu, f)
        curve = curves.SampledCurve(f(curves.internal_circle(n, 16384).points), closed=True)
        assert img.total_mass == pytest.approx(curve.length, rel=1e-4), (name, n)


def test_norm_ratio_identity_within_factor_four():
    nu = discretize_arclength(curves.internal_circle(3, 2048), 2)
    rep = norm_ratio(nu, ConformalMap.identity(), curves.circle(1024), "gamma3")
    assert 0.25 <= rep.ratio <= 4
    assert not rep.flagged
    assert rep.to_dict()["probe_id"] == "gamma3"


def test_norm_ratio_flags_zero_source():
    rep = norm_ratio(AtomicMeasure([0j], [1.0]), ConformalMap.identity(), curves.circle(256))
    assert rep.flagged
    assert rep.to_dict()["ratio"] is None


def test_transport_error_is_exported():
    assert transport.TransportError is TransportError
