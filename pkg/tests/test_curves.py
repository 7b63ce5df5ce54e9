import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import PARABOLA_LENGTH, brute_length
from transbend.curves import (CurveSpec, arc_length_reparam, cumulative_cross_integral,
                              integrate_sides, sample_curve, tangent_set, total_length)
from transbend.errors import InvalidSpecError, SingularCurveError


def circle(n=5, interval=(0.0, 2 * np.pi), bounds=()):
    return sample_curve(CurveSpec("circular-arc", {"radius": 1.0}, interval, bounds), n)


def test_circle_tangents_exact():
    c = circle()
    u = c.params
    assert np.allclose(c.points, np.stack([np.cos(u), np.sin(u), 0 * u], 1), atol=1e-15)
    assert np.allclose(c.side_tangents, np.stack([-np.sin(u), np.cos(u), 0 * u], 1), atol=1e-15)


def test_polyline_two_pieces():
    spec = CurveSpec("polyline", {"vertices": [[0, 0, 0], [1, 1, 0], [2, 0, 0]]}, (0, 2), (1.0,))
    c = arc_length_reparam(sample_curve(spec, 4))
    assert c.n_pieces == 2
    assert np.allclose(c.tangents[0], np.array([1, 1, 0]) / np.sqrt(2))
    assert np.allclose(c.tangents[1], np.array([1, -1, 0]) / np.sqrt(2))
    # the shared vertex appears once per side
    assert c.n_sides == c.n_samples + 1


def test_helix_tangent_at_zero():
    c = sample_curve(CurveSpec("helix", {}, (-1, 1)), 5)
    assert np.allclose(c.side_tangents[2], [0, 1, 1])


@pytest.mark.parametrize("family,params", [
    ("circular-arc", {"radius": 0.0}),
    ("polyline", {"vertices": [[0, 0, 0], [0, 0, 0], [1, 0, 0]]}),
    ("helix", {"radius": -1.0}),
    ("parabola", {"e1": [1, 0, 0], "e2": [1, 0, 0]}),
    ("nurbs", {}),
])
def test_invalid_specs(family, params):
    with pytest.raises(InvalidSpecError):
        sample_curve(CurveSpec(family, params, (0, 1)), 3)


def test_invalid_interval_and_samples():
    with pytest.raises(InvalidSpecError, match="interval"):
        CurveSpec("helix", {}, (1, 0))
    with pytest.raises(InvalidSpecError, match="samples_per_piece"):
        sample_curve(CurveSpec("helix", {}, (0, 1)), 1)


def test_unit_speed_circle_is_fixed_by_reparam():
    c = circle(41)
    r = arc_length_reparam(c)
    assert np.allclose(r.params, c.params, atol=1e-10)
    assert np.allclose(r.side_tangents, c.side_tangents, atol=1e-10)


def test_stretched_line():
    c = sample_curve(CurveSpec("parabola", {"curvature": 0.0, "e1": [1, 0, 0], "e2": [0, 0, 1],
                                            "origin": [0, 0, 0]}, (0, 1)), 5)
    c = c.transformed(np.diag([2.0, 1.0, 1.0]))
    r = arc_length_reparam(c)
    assert np.allclose(r.params, 2 * c.params)
    assert np.allclose(r.side_tangents, [1, 0, 0])


def test_parabola_length_against_brute_quadrature():
    assert brute_length(lambda u: np.sqrt(1 + u * u), 0, 1) == pytest.approx(PARABOLA_LENGTH, abs=1e-12)
    spec = CurveSpec("parabola", {}, (0, 1))
    err = [abs(total_length(sample_curve(spec, n)) - PARABOLA_LENGTH) for n in (101, 201)]
    assert err[1] < 1e-5
    assert err[0] / err[1] == pytest.approx(4, rel=0.05)
    assert total_length(sample_curve(spec, 101), "simpson") == pytest.approx(PARABOLA_LENGTH, abs=1e-9)


def test_arc_length_keeps_length_and_boundaries():
    spec = CurveSpec("sinusoid", {"amplitude": 0.3}, (0, 3), (1.0, 2.0))
    c = sample_curve(spec, 51)
    r = arc_length_reparam(c)
    assert r.pieces == c.pieces
    assert r.params[-1] == pytest.approx(total_length(c))
    assert np.allclose(np.linalg.norm(r.side_tangents, axis=1), 1.0)


def test_singular_curve_rejected():
    spec = CurveSpec("tabulated", {"parameters": [0, 1, 2, 3], "points": [[0, 0, 0]] * 4}, (0, 3))
    with pytest.raises(SingularCurveError):
        sample_curve(spec, 2)


def test_tabulated_second_order():
    errs = []
    for n in (21, 41):
        u = np.linspace(0, 1, n)
        pts = np.stack([u, np.sin(u), u**2], axis=1)
        c = sample_curve(CurveSpec("tabulated", {"parameters": u.tolist(), "points": pts.tolist()}, (0, 1)), 2)
        exact = np.stack([np.ones_like(u), np.cos(u), 2 * u], axis=1)
        errs.append(np.abs(c.side_tangents - exact).max())
    assert errs[0] / errs[1] > 3.5


def test_cross_integral_circle():
    c = circle(9)
    vals = cumulative_cross_integral(c, 0.0).values
    # c x c' = e_z for the unit circle
    assert np.allclose(vals[:, 2], c.params, atol=1e-13)
    assert np.allclose(vals[:, :2], 0)


def test_cross_integral_line_through_origin_vanishes():
    c = sample_curve(CurveSpec("parabola", {"curvature": 0.0}, (-1, 1)), 7)
    assert np.allclose(cumulative_cross_integral(c).values, 0)


def test_integrate_sides_is_continuous_across_jumps():
    spec = CurveSpec("polyline", {"vertices": [[0, 0, 0], [1, 0, 0], [1, 2, 0]]}, (0, 2))
    c = sample_curve(spec, 3)
    acc = integrate_sides(c, c.side_tangents)
    assert np.allclose(acc + c.points[0], c.points)


def test_tangent_set_counts():
    zig = CurveSpec("polyline", {"vertices": [[0, 0, 0], [1, 1, 0], [2, 0, 0], [3, 1, 0]]}, (0, 3))
    assert len(tangent_set(sample_curve(zig, 3))) == 2
    line = CurveSpec("parabola", {"curvature": 0.0}, (0, 1))
    assert len(tangent_set(sample_curve(line, 5))) == 1
    # a quarter arc with n samples has n distinct slopes
    assert len(tangent_set(circle(6, (0, np.pi / 2)))) == 6
    assert len(tangent_set(circle(6, (0, np.pi / 2)), dedup_tol=0.5)) < 6


@given(st.floats(0.2, 5.0), st.floats(-2.0, 2.0), st.floats(0.5, 3.0))
def test_helix_arc_length_is_unit_speed(radius, pitch, span):
    spec = CurveSpec("helix", {"radius": radius, "pitch": pitch}, (0, span))
    r = arc_length_reparam(sample_curve(spec, 9))
    assert np.allclose(np.linalg.norm(r.side_tangents, axis=1), 1.0)
    assert r.params[-1] == pytest.approx(span * np.hypot(radius, pitch), rel=1e-12)


def test_from_dict_roundtrip():
    data = {"family": "helix", "params": {"radius": 2}, "interval": [0, 1], "piece_boundaries": [0.5]}
    spec = CurveSpec.from_dict(data)
    assert spec.piece_boundaries == (0.5,)
    with pytest.raises(InvalidSpecError, match="interval"):
        CurveSpec.from_dict({"family": "helix"})
