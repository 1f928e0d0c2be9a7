import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ahlfors_lab import curves
from ahlfors_lab.curves import CurveSpec, generate
from ahlfors_lab.geometry import GeometryError, SampledCurve


def test_circle_and_internal_circle():
    c = curves.circle(256, 2.0, 1 + 1j)
    np.testing.assert_allclose(np.abs(c.points - (1 + 1j)), 2.0)
    g = curves.internal_circle(3, 128)
    np.testing.assert_allclose(np.abs(g.points), 1 - 2**-3)
    with pytest.raises(GeometryError):
        curves.internal_circle(0)


def test_ellipse_points_lie_on_ellipse_at_equal_spacing():
    c = curves.ellipse(1024, 1.5, 0.5)
    p = c.points
    np.testing.assert_allclose((p.real / 1.5) ** 2 + (p.imag / 0.5) ** 2, 1.0, atol=1e-12)
    seg = c.segment_lengths
    assert seg.max() / seg.min() < 1.01


def test_closed_families_are_counter_clockwise():
    for c in [curves.circle(64), curves.ellipse(64), curves.square(64),
              curves.polygon([0, 1j, 1 + 1j, 1]), curves.snowflake(2, samples=48),
              curves.perturbed_circle(64)]:
        assert c.signed_area() > 0


def test_square_keeps_corners():
    c = curves.square(64, 2.0)
    for corner in [1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j]:
        assert np.min(np.abs(c.points - corner)) < 1e-15
    assert c.length == pytest.approx(8.0)


@pytest.mark.parametrize("depth", range(0, 6))
def test_snowflake_side_count_and_perimeter(depth):
    v = curves.snowflake_vertices(depth)
    assert v.size == curves.snowflake_side_count(depth) == 3 * 4**depth
    perim = np.abs(np.diff(np.append(v, v[0]))).sum()
    assert perim == pytest.approx(3 * (4 / 3) ** depth, rel=1e-12)


@pytest.mark.parametrize("depth", range(0, 6))
def test_left_fixed_snowflake_side_count(depth):
    v = curves.snowflake_vertices(depth, "left-fixed")
    assert v.size == curves.snowflake_side_count(depth, "left-fixed")


def test_snowflakes_are_simple():
    for policy in curves.SNOWFLAKE_POLICIES:
        assert not curves.self_intersects(curves.snowflake(4, policy, samples=1024))


def test_snowflake_rejects_bad_arguments():
    with pytest.raises(GeometryError):
        curves.snowflake_vertices(11)
    with pytest.raises(GeometryError):
        curves.snowflake_vertices(2, "middle")


def test_figure_eight_self_intersects():
    c = curves.figure_eight()
    assert curves.self_intersects(c)
    assert curves.self_intersects_bruteforce(c)


def _random_polygon(rng, n):
    return SampledCurve(rng.normal(size=n) + 1j * rng.normal(size=n), closed=True)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), n=st.integers(4, 9))
def test_self_intersection_agrees_with_bruteforce(seed, n):
    c = _random_polygon(np.random.default_rng(seed), n)
    assert curves.self_intersects(c) == curves.self_intersects_bruteforce(c)


def test_star_shaped_polygon_is_simple():
    t = np.sort(np.random.default_rng(3).uniform(0, 2 * np.pi, 40))
    c = SampledCurve((1 + 0.3 * np.cos(5 * t)) * np.exp(1j * t), closed=True)
    assert not curves.self_intersects(c) and not curves.self_intersects_bruteforce(c)


@pytest.mark.parametrize("x_max", [1.0, 2.0, 5.0])
def test_graph_length_matches_quadrature(x_max):
    c = curves.graph_sin_x2(8192, x_max)
    assert c.length == pytest.approx(curves.graph_sin_x2_length(x_max), rel=1e-4)
    np.testing.assert_allclose(c.points.imag, np.sin(c.points.real ** 2), atol=1e-12)


def test_graph_length_oracle_small_window():
    # for small x the graph is y = x^2 + O(x^6): length of a parabola arc
    x = 0.05
    parabola = 0.5 * x * math.sqrt(1 + 4 * x * x) + 0.25 * math.asinh(2 * x)
    assert curves.graph_sin_x2_length(x) == pytest.approx(parabola, rel=10 * x**6)


def test_spiral_is_open_and_growing():
    c = curves.logarithmic_spiral(512, 2.0, 0.2)
    assert not c.closed
    assert abs(c.points[-1]) == pytest.approx(math.exp(0.2 * 4 * math.pi), rel=1e-9)


def test_generate_dispatch_and_errors():
    assert generate(CurveSpec("square", 64, {"side": 2})).length == pytest.approx(8)
    assert generate(CurveSpec("circle", 64, {"center": [1, 0]})).points.real.mean() == pytest.approx(1)
    with pytest.raises(GeometryError):
        CurveSpec("hexagon")
    with pytest.raises(GeometryError):
        generate(CurveSpec("polygon", 64, {}))
    with pytest.raises(GeometryError):
        curves.graph_sin_x2(64, x_max=100)
