"""Reference surfaces used by the tests and the command-line examples.

Each fixture is a pair of curve specifications in the JSON layout accepted by
the command line, so the same data can be written to disk and fed to
``transbend``.
"""

from __future__ import annotations

import numpy as np

from .curves import CurveSpec, sample_curve
from .surface import assemble_surface

R2 = np.sqrt(0.5)


def _line(direction, interval, n=5, origin=(0, 0, 0)):
    return {"family": "parabola", "interval": list(interval), "samples_per_piece": n,
            "params": {"curvature": 0.0, "origin": list(origin), "e1": list(direction),
                       "e2": list(_perp(direction))}}


def _perp(d):
    d = np.asarray(d, dtype=float)
    other = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    p = other - (other @ d) * d
    return (p / np.linalg.norm(p)).tolist()


def _polyline(edges, reps=1, n=2, period=None, start=0.0):
    """Polyline through the partial sums of ``edges`` repeated ``reps`` times,
    one parameter unit per edge."""
    steps = np.tile(np.asarray(edges, dtype=float), (reps, 1))
    vertices = np.vstack([np.zeros(3), np.cumsum(steps, axis=0)])
    lengths = np.linalg.norm(steps, axis=1)
    knots = start + np.concatenate([[0.0], np.cumsum(lengths)])
    return {"family": "polyline", "interval": [float(knots[0]), float(knots[-1])],
            "samples_per_piece": n, "period": period,
            "params": {"vertices": vertices.tolist(), "vertex_params": knots.tolist()}}


def _helix(interval, n, **params):
    return {"family": "helix", "interval": list(interval), "samples_per_piece": n, "params": params}


def _parabola(e1, e2, interval, n, curvature=1.0):
    return {"family": "parabola", "interval": list(interval), "samples_per_piece": n,
            "params": {"curvature": curvature, "e1": list(e1), "e2": list(e2)}}


def _zigzag(a, b, count):
    return [a if k % 2 == 0 else b for k in range(count)]


def fixture_specs(name):
    """``(path_spec, profile_spec)`` dictionaries of a named fixture."""
    x, y, z = (1, 0, 0), (0, 1, 0), (0, 0, 1)
    if name == "plane":
        return _line(x, (0, 1)), _line(y, (0, 1))
    if name == "helicoid":
        return _helix((-0.5, 0.5), 11), _helix((np.pi / 2, np.pi), 11)
    if name == "degenerate-helicoid":
        return _helix((0.0, 1.0), 11), _helix((0.5, 1.5), 11)
    if name == "parabolic":
        return _parabola(x, z, (-1, 1), 21), _parabola(y, z, (-1, 1), 21)
    if name == "tilted-planes":
        e = (1 / np.sqrt(5), 2 / np.sqrt(5), 0.0)
        return _parabola(x, z, (-1, 1), 21), _parabola(e, z, (-1, 1), 21)
    if name == "circular-cone":
        return (_helix((0.0, 1.2), 21, radius=1.0, pitch=1.0),
                _helix((2.0, 3.0), 21, radius=2.0, pitch=2.0))
    if name == "elliptic-cone":
        edges = [(1, 0, 1), (0, 0.5, -1), (-1, 0, 1), (0, -0.5, -1)]
        return (_helix((0.2, 1.2), 21, radius=1.0, radius2=0.5, pitch=1.0),
                _polyline(edges, n=5))
    if name == "miura":
        return (_polyline(_zigzag((R2, 0, R2), (R2, 0, -R2), 2), reps=4, period=2),
                _polyline(_zigzag((R2, R2, 0), (R2, -R2, 0), 2), reps=4, period=2))
    if name == "eggbox":
        return (_polyline(_zigzag((R2, 0, R2), (R2, 0, -R2), 2), reps=4, period=2),
                _polyline(_zigzag((0, R2, R2), (0, R2, -R2), 2), reps=4, period=2))
    if name == "miura-closed":
        b1, b2 = (R2, R2, 0), (R2, -R2, 0)
        edges = [b1, b2, tuple(-c for c in b1), tuple(-c for c in b2)]
        return (_polyline(_zigzag((R2, 0, R2), (R2, 0, -R2), 2), reps=4, period=2),
                _polyline(edges, n=3))
    if name == "koko-crease":
        path = _polyline([(1, 0, 0), (R2, 0, R2)], n=5)
        return path, _polyline(_zigzag((R2, R2, 0), (R2, -R2, 0), 2), reps=2, period=2)
    if name == "bianchi-arc":
        arc = {"family": "circular-arc", "interval": [-np.pi / 4, np.pi / 4], "samples_per_piece": 21,
               "params": {"radius": 1.0, "e1": [0, 0, -1], "e2": [1, 0, 0]}}
        return arc, _line(y, (0, 1))
    if name == "bianchi-crease":
        arc = {"family": "circular-arc", "interval": [0.0, np.pi], "samples_per_piece": 21,
               "piece_boundaries": [np.pi / 2],
               "params": {"radius": 1.0, "e1": [0, 0, -1], "e2": [1, 0, 0]}}
        return arc, _line(y, (0, 1))
    if name == "bianchi-hexagon":
        edges = np.array([(0, 1, 0.3), (0, 0.2, 1), (0, -1, 0.4)], dtype=float)
        edges /= np.linalg.norm(edges, axis=1)[:, None]
        edges = np.vstack([edges, -edges])
        return _parabola(x, z, (-0.5, 0.5), 11), _polyline(edges, n=3)
    if name == "planar-normal":
        return (_parabola(x, z, (-1, 1), 11),
                _polyline([(0, 1, 0), (0, 0.6, 0.8), (0, 0, 1), (0, 1, 0)], n=5))
    if name == "non-cone":
        return _helix((0.0, 1.0), 11), _parabola(x, z, (-1, 1), 11)
    if name == "three-slope":
        return (_parabola(x, z, (-1, 1), 5),
                _polyline([(0, R2, R2), (0, R2, -R2), (0, 1, 0)], n=3))
    raise KeyError(f"unknown fixture {name!r}")


FIXTURES = ("plane", "helicoid", "degenerate-helicoid", "parabolic", "tilted-planes",
            "circular-cone", "elliptic-cone", "miura", "eggbox", "miura-closed", "koko-crease",
            "bianchi-arc", "bianchi-crease", "bianchi-hexagon", "planar-normal", "non-cone",
            "three-slope")


def curve_from_dict(data, n_per_piece=None):
    n = n_per_piece if n_per_piece is not None else data.get("samples_per_piece", 5)
    return sample_curve(CurveSpec.from_dict(data), n)


def fixture_surface(name, n_per_piece=None):
    """Assembled surface of a named fixture; ``n_per_piece`` overrides the
    sampling density of both curves."""
    path, prof = fixture_specs(name)
    return assemble_surface(curve_from_dict(path, n_per_piece), curve_from_dict(prof, n_per_piece))
