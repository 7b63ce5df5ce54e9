"""Piecewise-smooth space curves sampled on a parameter grid.

A curve is split into pieces; neighbouring pieces share their boundary sample
but carry their own (one-sided) tangent there, so creases survive sampling.
Quantities that live on "sides" are stored piece by piece and can be
flattened into side arrays: a boundary sample then appears twice, once per
adjacent piece.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import InvalidSpecError, SingularCurveError

FAMILIES = ("polyline", "circular-arc", "helix", "parabola", "sinusoid", "tabulated")

_FRAME_TOL = 1e-9


def _vec(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise InvalidSpecError(f"{name}: expected a finite 3-vector, got {value!r}")
    return arr


def _orthonormal(vectors, names):
    for vec, name in zip(vectors, names):
        if abs(np.linalg.norm(vec) - 1.0) > _FRAME_TOL:
            raise InvalidSpecError(f"{name}: frame vector must have unit length")
    for i in range(len(vectors)):
        for j in range(i + 1, len(vectors)):
            if abs(vectors[i] @ vectors[j]) > _FRAME_TOL:
                raise InvalidSpecError(f"{names[i]}, {names[j]}: frame vectors must be orthogonal")


def _positive(params, key, default=None):
    value = params.get(key, default)
    if value is None:
        raise InvalidSpecError(f"params.{key}: missing")
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidSpecError(f"params.{key}: must be positive, got {value!r}")
    return value


@dataclass(frozen=True)
class CurveSpec:
    """Declarative description of a curve family on a parameter interval.

    ``params`` holds the family coefficients (see :func:`sample_curve` for the
    keys each family understands). ``period`` optionally states how many pieces
    make up one period of the tangent field; it is only used to validate sign
    choices of finite bendings.
    """

    family: str
    params: dict
    interval: tuple
    piece_boundaries: tuple = ()
    period: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InvalidSpecError(f"family: unknown family {self.family!r}, expected one of {FAMILIES}")
        try:
            a, b = (float(x) for x in self.interval)
        except (TypeError, ValueError):
            raise InvalidSpecError(f"interval: expected two numbers, got {self.interval!r}") from None
        if not (np.isfinite(a) and np.isfinite(b) and a < b):
            raise InvalidSpecError(f"interval: must be bounded and non-empty, got {self.interval!r}")
        object.__setattr__(self, "interval", (a, b))
        bounds = tuple(float(x) for x in self.piece_boundaries)
        if any(not (a < x < b) for x in bounds):
            raise InvalidSpecError("piece_boundaries: must lie strictly inside the interval")
        if any(x >= y for x, y in zip(bounds, bounds[1:])):
            raise InvalidSpecError("piece_boundaries: must be strictly increasing")
        object.__setattr__(self, "piece_boundaries", bounds)
        if self.period is not None and int(self.period) < 1:
            raise InvalidSpecError("period: must be a positive number of pieces")
        self._validate_family()

    def _validate_family(self):
        p = self.params
        if self.family == "polyline":
            verts = np.asarray(p.get("vertices", ()), dtype=float)
            if verts.ndim != 2 or verts.shape[1] != 3 or len(verts) < 2:
                raise InvalidSpecError("params.vertices: need at least two 3-vectors")
            if np.any(np.linalg.norm(np.diff(verts, axis=0), axis=1) == 0.0):
                raise InvalidSpecError("params.vertices: consecutive vertices coincide")
            knots = self.vertex_params()
            if len(knots) != len(verts) or np.any(np.diff(knots) <= 0):
                raise InvalidSpecError("params.vertex_params: must be strictly increasing, one per vertex")
            if not (np.isclose(knots[0], self.interval[0]) and np.isclose(knots[-1], self.interval[1])):
                raise InvalidSpecError("params.vertex_params: must span the interval")
            if self.piece_boundaries and not np.allclose(self.piece_boundaries, knots[1:-1], rtol=0, atol=1e-12):
                raise InvalidSpecError("piece_boundaries: must coincide with interior vertex parameters")
        elif self.family == "circular-arc":
            _positive(p, "radius")
            e1 = _vec(p.get("e1", (1, 0, 0)), "params.e1")
            e2 = _vec(p.get("e2", (0, 1, 0)), "params.e2")
            _orthonormal([e1, e2], ["params.e1", "params.e2"])
            _vec(p.get("center", (0, 0, 0)), "params.center")
        elif self.family == "helix":
            _positive(p, "radius", 1.0)
            _positive(p, "radius2", p.get("radius", 1.0))
            pitch = float(p.get("pitch", 1.0))
            if not np.isfinite(pitch):
                raise InvalidSpecError("params.pitch: must be finite")
            frame = [_vec(p.get(k, d), f"params.{k}") for k, d in
                     (("e1", (1, 0, 0)), ("e2", (0, 1, 0)), ("e3", (0, 0, 1)))]
            _orthonormal(frame, ["params.e1", "params.e2", "params.e3"])
            _vec(p.get("center", (0, 0, 0)), "params.center")
        elif self.family == "parabola":
            float(p.get("curvature", 1.0))
            e1 = _vec(p.get("e1", (1, 0, 0)), "params.e1")
            e2 = _vec(p.get("e2", (0, 0, 1)), "params.e2")
            _orthonormal([e1, e2], ["params.e1", "params.e2"])
            _vec(p.get("origin", (0, 0, 0)), "params.origin")
        elif self.family == "sinusoid":
            _positive(p, "frequency", 1.0)
            float(p.get("amplitude", 1.0))
            e1 = _vec(p.get("e1", (1, 0, 0)), "params.e1")
            e2 = _vec(p.get("e2", (0, 0, 1)), "params.e2")
            _orthonormal([e1, e2], ["params.e1", "params.e2"])
            _vec(p.get("origin", (0, 0, 0)), "params.origin")
        elif self.family == "tabulated":
            knots = np.asarray(p.get("parameters", ()), dtype=float)
            pts = np.asarray(p.get("points", ()), dtype=float)
            if knots.ndim != 1 or len(knots) < 2 or np.any(np.diff(knots) <= 0):
                raise InvalidSpecError("params.parameters: need a strictly increasing list")
            if pts.shape != (len(knots), 3):
                raise InvalidSpecError("params.points: need one 3-vector per parameter")
            if not (np.isclose(knots[0], self.interval[0]) and np.isclose(knots[-1], self.interval[1])):
                raise InvalidSpecError("params.parameters: must span the interval")
            for x in self.piece_boundaries:
                if not np.any(np.isclose(knots, x, rtol=0, atol=1e-12)):
                    raise InvalidSpecError(f"piece_boundaries: {x} is not a tabulated parameter")

    def vertex_params(self):
        verts = self.params.get("vertices", ())
        if "vertex_params" in self.params:
            return np.asarray(self.params["vertex_params"], dtype=float)
        return np.linspace(self.interval[0], self.interval[1], len(verts))

    @classmethod
    def from_dict(cls, data):
        """Build a spec from the JSON object layout used by the command line."""
        if not isinstance(data, dict):
            raise InvalidSpecError("curve spec: expected a JSON object")
        for key in ("family", "interval"):
            if key not in data:
                raise InvalidSpecError(f"{key}: missing")
        return cls(
            family=data["family"],
            params=dict(data.get("params", {})),
            interval=tuple(data["interval"]),
            piece_boundaries=tuple(data.get("piece_boundaries", ())),
            period=data.get("period"),
        )


@dataclass(frozen=True, eq=False)
class SampledCurve:
    """A curve sampled on a grid with explicit pieces.

    ``pieces`` are inclusive index ranges ``(start, stop)`` into ``params``;
    consecutive pieces share one sample. ``tangents`` and ``accelerations``
    hold one array per piece, covering that piece's samples.
    """

    params: np.ndarray
    points: np.ndarray
    pieces: tuple
    tangents: tuple
    accelerations: tuple
    period: int | None = None
    family: str = "tabulated"
    meta: dict = field(default_factory=dict)

    @property
    def n_pieces(self):
        return len(self.pieces)

    @property
    def n_samples(self):
        return len(self.params)

    @property
    def boundary_params(self):
        """Parameters of the interior piece boundaries."""
        return self.params[[start for start, _ in self.pieces[1:]]]

    @cached_property
    def side_index(self):
        return np.concatenate([np.arange(a, b + 1) for a, b in self.pieces])

    @cached_property
    def side_piece(self):
        return np.concatenate([np.full(b - a + 1, k) for k, (a, b) in enumerate(self.pieces)])

    @property
    def side_params(self):
        return self.params[self.side_index]

    @property
    def side_points(self):
        return self.points[self.side_index]

    @cached_property
    def side_tangents(self):
        return np.concatenate(self.tangents)

    @cached_property
    def side_accelerations(self):
        return np.concatenate(self.accelerations)

    @property
    def n_sides(self):
        return len(self.side_index)

    def piece_sides(self, k):
        """Slice of the side arrays belonging to piece ``k``."""
        offset = sum(b - a + 1 for a, b in self.pieces[:k])
        a, b = self.pieces[k]
        return slice(offset, offset + b - a + 1)

    def split_sides(self, side_values):
        """Cut a side array back into per-piece arrays."""
        return tuple(side_values[self.piece_sides(k)] for k in range(self.n_pieces))

    def is_closed(self, tol=1e-10):
        scale = max(1.0, float(np.ptp(self.points, axis=0).max()))
        return bool(np.linalg.norm(self.points[-1] - self.points[0]) <= tol * scale)

    def transformed(self, matrix, shift=None):
        """Image of the curve under ``x -> matrix @ x + shift``."""
        matrix = np.asarray(matrix, dtype=float)
        shift = np.zeros(3) if shift is None else np.asarray(shift, dtype=float)
        return SampledCurve(
            params=self.params,
            points=self.points @ matrix.T + shift,
            pieces=self.pieces,
            tangents=tuple(t @ matrix.T for t in self.tangents),
            accelerations=tuple(t @ matrix.T for t in self.accelerations),
            period=self.period,
            family=self.family,
        )

    def with_tangents(self, tangents, accelerations=None, method="trapezoid"):
        """Curve sharing this grid whose tangent field is replaced.

        Positions are ``points + integral(new - old)``, so an unchanged tangent
        field reproduces the points exactly.
        """
        tangents = tuple(np.asarray(t, dtype=float) for t in tangents)
        delta = np.concatenate(tangents) - self.side_tangents
        points = self.points + integrate_sides(self, delta, method=method)
        if accelerations is None:
            accelerations = _piecewise_gradient(self, tangents)
        return SampledCurve(self.params, points, self.pieces, tangents,
                            tuple(accelerations), self.period, self.family)


@dataclass(frozen=True, eq=False)
class VectorSeries:
    """Single-valued 3-vector samples over a curve's parameter grid."""

    params: np.ndarray
    values: np.ndarray


def _piece_grid(a, b, bounds, n):
    knots = np.concatenate([[a], bounds, [b]])
    segs = [np.linspace(knots[k], knots[k + 1], n) for k in range(len(knots) - 1)]
    params = np.concatenate([segs[0]] + [s[1:] for s in segs[1:]])
    pieces = tuple((k * (n - 1), (k + 1) * (n - 1)) for k in range(len(segs)))
    return params, pieces


def _evaluate(spec, u):
    """Points, first and second derivatives of an analytic family at ``u``."""
    p = spec.params
    u = np.asarray(u, dtype=float)[:, None]
    if spec.family == "circular-arc":
        r = float(p["radius"])
        c = np.asarray(p.get("center", (0, 0, 0)), dtype=float)
        e1 = np.asarray(p.get("e1", (1, 0, 0)), dtype=float)
        e2 = np.asarray(p.get("e2", (0, 1, 0)), dtype=float)
        cu, su = np.cos(u), np.sin(u)
        return (c + r * (cu * e1 + su * e2),
                r * (-su * e1 + cu * e2),
                -r * (cu * e1 + su * e2))
    if spec.family == "helix":
        r1 = float(p.get("radius", 1.0))
        r2 = float(p.get("radius2", r1))
        pitch = float(p.get("pitch", 1.0))
        c = np.asarray(p.get("center", (0, 0, 0)), dtype=float)
        e1 = np.asarray(p.get("e1", (1, 0, 0)), dtype=float)
        e2 = np.asarray(p.get("e2", (0, 1, 0)), dtype=float)
        e3 = np.asarray(p.get("e3", (0, 0, 1)), dtype=float)
        cu, su = np.cos(u), np.sin(u)
        return (c + r1 * cu * e1 + r2 * su * e2 + pitch * u * e3,
                -r1 * su * e1 + r2 * cu * e2 + pitch * np.ones_like(u) * e3,
                -r1 * cu * e1 - r2 * su * e2)
    if spec.family == "parabola":
        k = float(p.get("curvature", 1.0))
        o = np.asarray(p.get("origin", (0, 0, 0)), dtype=float)
        e1 = np.asarray(p.get("e1", (1, 0, 0)), dtype=float)
        e2 = np.asarray(p.get("e2", (0, 0, 1)), dtype=float)
        return (o + u * e1 + 0.5 * k * u**2 * e2,
                e1 + k * u * e2,
                k * np.ones_like(u) * e2)
    if spec.family == "sinusoid":
        amp = float(p.get("amplitude", 1.0))
        w = float(p.get("frequency", 1.0))
        phase = float(p.get("phase", 0.0))
        o = np.asarray(p.get("origin", (0, 0, 0)), dtype=float)
        e1 = np.asarray(p.get("e1", (1, 0, 0)), dtype=float)
        e2 = np.asarray(p.get("e2", (0, 0, 1)), dtype=float)
        arg = w * u + phase
        return (o + u * e1 + amp * np.sin(arg) * e2,
                e1 + amp * w * np.cos(arg) * e2,
                -amp * w**2 * np.sin(arg) * e2)
    raise InvalidSpecError(f"family: {spec.family!r} has no analytic evaluator")


def _gradient(values, params):
    if len(params) == 2:
        slope = (values[1] - values[0]) / (params[1] - params[0])
        return np.stack([slope, slope])
    return np.gradient(values, params, axis=0, edge_order=2)


def _piecewise_gradient(curve, per_piece):
    return tuple(_gradient(vals, curve.params[a:b + 1])
                 for vals, (a, b) in zip(per_piece, curve.pieces))


def finite_difference_tangents(curve):
    """Second-order difference tangents, never stencilling across a piece boundary."""
    return _piecewise_gradient(curve, [curve.points[a:b + 1] for a, b in curve.pieces])


def sample_curve(spec, n_per_piece):
    """Sample ``spec`` with ``n_per_piece`` samples on every piece.

    Family parameters:

    * ``polyline``: ``vertices``, optional ``vertex_params``; every vertex is a
      piece boundary and ``n_per_piece`` samples are placed on each segment.
    * ``circular-arc``: ``radius``, ``center``, in-plane frame ``e1``, ``e2``.
    * ``helix``: ``radius``, ``radius2`` (elliptic helices), ``pitch``,
      ``center``, frame ``e1``, ``e2``, ``e3``.
    * ``parabola``: ``origin + u e1 + curvature u^2/2 e2``.
    * ``sinusoid``: ``origin + u e1 + amplitude sin(frequency u + phase) e2``.
    * ``tabulated``: ``parameters`` and ``points``; ``n_per_piece`` is ignored
      and tangents are second-order differences inside each piece.
    """
    if int(n_per_piece) < 2:
        raise InvalidSpecError("samples_per_piece: must be at least 2")
    n = int(n_per_piece)
    a, b = spec.interval
    if spec.family == "polyline":
        verts = np.asarray(spec.params["vertices"], dtype=float)
        knots = spec.vertex_params()
        params, pieces = _piece_grid(a, b, knots[1:-1], n)
        points, tangents = [], []
        for k in range(len(verts) - 1):
            lo, hi = pieces[k]
            s = (params[lo:hi + 1] - knots[k]) / (knots[k + 1] - knots[k])
            points.append(verts[k] + s[:, None] * (verts[k + 1] - verts[k]))
            slope = (verts[k + 1] - verts[k]) / (knots[k + 1] - knots[k])
            tangents.append(np.tile(slope, (hi - lo + 1, 1)))
        points = np.concatenate([points[0]] + [p[1:] for p in points[1:]])
        points[[lo for lo, _ in pieces] + [pieces[-1][1]]] = verts
        accelerations = tuple(np.zeros_like(t) for t in tangents)
        return SampledCurve(params, points, pieces, tuple(tangents), accelerations,
                            spec.period, spec.family)
    if spec.family == "tabulated":
        params = np.asarray(spec.params["parameters"], dtype=float)
        points = np.asarray(spec.params["points"], dtype=float)
        cuts = [0] + [int(np.argmin(np.abs(params - x))) for x in spec.piece_boundaries] + [len(params) - 1]
        pieces = tuple((cuts[k], cuts[k + 1]) for k in range(len(cuts) - 1))
        if any(hi - lo < 1 for lo, hi in pieces):
            raise InvalidSpecError("piece_boundaries: empty piece")
        shell = SampledCurve(params, points, pieces, (), (), spec.period, spec.family)
        tangents = finite_difference_tangents(shell)
        accelerations = _piecewise_gradient(shell, tangents)
        curve = SampledCurve(params, points, pieces, tangents, accelerations, spec.period, spec.family)
        _check_regular(curve)
        return curve
    params, pieces = _piece_grid(a, b, spec.piece_boundaries, n)
    points, d1, d2 = _evaluate(spec, params)
    tangents = tuple(d1[lo:hi + 1] for lo, hi in pieces)
    accelerations = tuple(d2[lo:hi + 1] for lo, hi in pieces)
    curve = SampledCurve(params, points, pieces, tangents, accelerations, spec.period, spec.family)
    _check_regular(curve)
    return curve


def _check_regular(curve, rel_tol=1e-10):
    norms = np.linalg.norm(curve.side_tangents, axis=1)
    scale = norms.max() if norms.size else 0.0
    bad = np.flatnonzero(norms <= rel_tol * max(scale, np.finfo(float).tiny))
    if scale == 0.0 or bad.size:
        at = curve.side_params[bad[0]] if bad.size else curve.params[0]
        raise SingularCurveError(f"tangent vanishes at parameter {at:.6g}")
    return norms


def integrate_sides(curve, side_values, base_index=0, method="trapezoid"):
    """Cumulative integral of a two-sided integrand over the whole curve.

    Each piece is integrated with its own one-sided values, so jumps at piece
    boundaries do not leak into neighbours. The result is single-valued on the
    global grid and vanishes at ``base_index``.
    """
    side_values = np.asarray(side_values, dtype=float)
    out = np.zeros((curve.n_samples,) + side_values.shape[1:])
    for k, (lo, hi) in enumerate(curve.pieces):
        x = curve.params[lo:hi + 1]
        y = side_values[curve.piece_sides(k)]
        if method == "simpson" and len(x) >= 3:
            acc = cumulative_simpson(y, x=x, axis=0, initial=0.0)
        elif method in ("trapezoid", "simpson"):
            acc = cumulative_trapezoid(y, x=x, axis=0, initial=0.0)
        else:
            raise ValueError(f"unknown quadrature method {method!r}")
        out[lo:hi + 1] = out[lo] + acc
    return out - out[base_index]


def sample_index(curve, parameter):
    """Index of the sample located at ``parameter``."""
    idx = int(np.argmin(np.abs(curve.params - parameter)))
    scale = max(1.0, abs(float(parameter)))
    if abs(curve.params[idx] - parameter) > 1e-12 * scale:
        raise ValueError(f"parameter {parameter!r} is not a sample of the curve")
    return idx


def cumulative_cross_integral(curve, basepoint=None, method="trapezoid"):
    """Running integral of ``c(s) x c'(s)`` from ``basepoint``."""
    base = 0 if basepoint is None else sample_index(curve, basepoint)
    integrand = np.cross(curve.side_points, curve.side_tangents)
    return VectorSeries(curve.params, integrate_sides(curve, integrand, base, method))


def arc_length_reparam(curve, method="trapezoid"):
    """Reparametrize by arc length measured from the first sample.

    Sample positions are kept; parameters become cumulative lengths, tangents
    are normalized and accelerations follow the chain rule.
    """
    norms = _check_regular(curve)
    lengths = integrate_sides(curve, norms, 0, method)
    if np.any(np.diff(lengths) <= 0):
        raise SingularCurveError("arc length is not strictly increasing")
    tangents, accelerations = [], []
    for t, acc in zip(curve.tangents, curve.accelerations):
        speed = np.linalg.norm(t, axis=1)[:, None]
        unit = t / speed
        normal_part = acc - np.sum(acc * unit, axis=1)[:, None] * unit
        tangents.append(unit)
        accelerations.append(normal_part / speed**2)
    return SampledCurve(lengths, curve.points, curve.pieces, tuple(tangents),
                        tuple(accelerations), curve.period, curve.family,
                        {"arc_length": True})


def total_length(curve, method="trapezoid"):
    norms = _check_regular(curve)
    return float(integrate_sides(curve, norms, 0, method)[-1])


def tangent_set(curve, dedup_tol=1e-8, up_to_sign=True):
    """Distinct tangent directions of the curve, in order of first appearance.

    Two unit tangents are merged when the angle between them (between their
    lines when ``up_to_sign``) is at most ``dedup_tol`` radians.
    """
    units = curve.side_tangents / np.linalg.norm(curve.side_tangents, axis=1)[:, None]
    found = []
    for t in units:
        if found:
            arr = np.asarray(found)
            dots = arr @ t
            if up_to_sign:
                dots = np.abs(dots)
            sines = np.linalg.norm(np.cross(arr, t), axis=1)
            if np.any(np.arctan2(sines, dots) <= dedup_tol):
                continue
        found.append(t)
    return found
