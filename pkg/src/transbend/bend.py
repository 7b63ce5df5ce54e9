"""Finite isometric bendings of surfaces of translation.

Two families are provided. ``bianchi`` bends a surface whose path and profile
lie in perpendicular planes; ``koko`` bends a surface whose profile has
exactly two slopes. Every member of either family is again a surface of
translation, which is why quad faces stay planar along a sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curves import arc_length_reparam, tangent_set
from .errors import HypothesisError, ParameterRangeError
from .infbend import HYPOTHESIS_TOL, perp_planes_frame, slope_coefficients
from .surface import TranslationSurface, assemble_surface

DEFAULT_T_MAX = 10.0


@dataclass(frozen=True)
class SignChoice:
    """Per-piece sign of the component that the bending must square-root.

    ``forced[k]`` is True where the component is nonzero on piece ``k`` so
    its sign is dictated by the geometry; elsewhere the sign is free.
    """

    values: tuple
    forced: tuple

    def __post_init__(self):
        if any(v not in (1, -1) for v in self.values):
            raise ValueError("signs must be +1 or -1")
        if len(self.values) != len(self.forced):
            raise ValueError("one sign per piece is required")


@dataclass(frozen=True, eq=False)
class BendingFamily:
    base: TranslationSurface
    kind: str
    interval: tuple
    t0: float
    signs: dict
    crease_ledger: tuple
    data: dict = field(default_factory=dict)
    t_max: float = DEFAULT_T_MAX

    @property
    def unbounded(self):
        return np.isinf(self.interval[1])

    @property
    def sweep_interval(self):
        """Admissible interval with an infinite right end capped at ``t_max``."""
        lo, hi = self.interval
        return lo, min(hi, self.t_max) if self.unbounded else hi

    def contains(self, t, eps=1e-12):
        lo, hi = self.interval
        return lo - eps <= t <= hi + eps

    def is_endpoint(self, t, eps=1e-12):
        lo, hi = self.interval
        return abs(t - lo) <= eps or abs(t - hi) <= eps

    def evaluate(self, t):
        if self.kind == "bianchi":
            return bianchi_bending(self, t)
        return koko_bending(self, t)


def flatness_predicates(x1, x2, x3, coplanar_tol=1e-8, unit_tol=1e-10):
    """Flat-folded / flat-unfolded tests and the gaps of the triangle inequality
    ``c1 c2 - s1 s2 <= c3 <= c1 c2 + s1 s2``."""
    x1, x2, x3 = (np.asarray(x, dtype=float) for x in (x1, x2, x3))
    for name, x in (("x1", x1), ("x2", x2), ("x3", x3)):
        if abs(np.linalg.norm(x) - 1.0) > unit_tol:
            raise ValueError(f"{name} must be a unit vector")
    left, right = triangle_gaps(x1, x2, x3)
    eps = 1e-10
    c3 = x1 @ x2
    if np.linalg.norm(np.cross(x1, x2)) <= coplanar_tol:
        along = np.linalg.norm(np.cross(x1, x3)) <= coplanar_tol
        folded = c3 > 0 or along
        unfolded = c3 < 0 or along
    elif abs(np.linalg.det(np.vstack([x1, x2, x3]))) <= coplanar_tol:
        gram = np.array([[1.0, c3], [c3, 1.0]])
        a, b = np.linalg.solve(gram, [x1 @ x3, x2 @ x3])
        folded, unfolded = a * b <= eps, a * b >= -eps
    else:
        folded = unfolded = False
    return {"flat_folded": bool(folded), "flat_unfolded": bool(unfolded),
            "gaps": (float(left), float(right))}


def triangle_gaps(x1, x2, x3):
    """Vectorized ``(c3 - (c1c2 - s1s2), (c1c2 + s1s2) - c3)`` for unit vectors
    stacked on the last axis."""
    c1 = np.sum(x2 * x3, -1)
    c2 = np.sum(x3 * x1, -1)
    c3 = np.sum(x1 * x2, -1)
    s1 = np.linalg.norm(np.cross(x2, x3), axis=-1)
    s2 = np.linalg.norm(np.cross(x3, x1), axis=-1)
    return c3 - (c1 * c2 - s1 * s2), (c1 * c2 + s1 * s2) - c3


def _sign_structure(curve, component, tol, label):
    """Forced signs per piece and the loci where ``component`` vanishes.

    The zero set must be a union of whole pieces and piece boundaries.
    """
    forced, zero_pieces = [], []
    for k in range(curve.n_pieces):
        vals = component[curve.piece_sides(k)]
        zero = np.abs(vals) <= tol
        if zero.all():
            forced.append(None)
            zero_pieces.append(k)
            continue
        signs = np.sign(vals[~zero])
        if np.any(signs != signs[0]) or zero[1:-1].any():
            lo, hi = curve.pieces[k]
            raise HypothesisError(f"{label} vanishes inside piece {k} "
                                  f"(parameters {curve.params[lo]:.6g}..{curve.params[hi]:.6g}); "
                                  "its zero set must be a union of pieces and piece boundaries")
        forced.append(int(signs[0]))
    loci = []
    for k in zero_pieces:
        lo, hi = curve.pieces[k]
        loci.append({"param": float(curve.params[lo]), "end": float(curve.params[hi]),
                     "pieces": (k, k), "where": "piece"})
    for k in range(curve.n_pieces - 1):
        left, right = curve.piece_sides(k).stop - 1, curve.piece_sides(k + 1).start
        if min(abs(component[left]), abs(component[right])) <= tol:
            loci.append({"param": float(curve.params[curve.pieces[k][1]]),
                         "pieces": (k, k + 1), "where": "boundary"})
    return forced, loci


def make_sign_choice(forced, signs=None, period=None):
    """Fill free pieces with ``signs`` (default +1) and validate the result."""
    n = len(forced)
    if signs is None:
        values = [f if f is not None else 1 for f in forced]
    else:
        values = [int(s) for s in signs]
        if len(values) != n:
            raise HypothesisError(f"expected {n} signs, one per piece, got {len(values)}")
        for k, (f, s) in enumerate(zip(forced, values)):
            if f is not None and f != s:
                raise HypothesisError(f"sign of piece {k} is forced to {f:+d}")
    if period:
        for k in range(n - period):
            if values[k] != values[k + period]:
                raise HypothesisError(f"sign choice is not periodic with period {period} pieces")
    return SignChoice(tuple(values), tuple(f is not None for f in forced))


def _ledger(loci, label, choice):
    """Zero loci annotated with the signs chosen on either side."""
    return tuple(dict(locus, curve=label,
                      signs=(choice.values[locus["pieces"][0]], choice.values[locus["pieces"][1]]))
                 for locus in loci)


def _arc_length_surface(surface):
    path = surface.path if surface.path.meta.get("arc_length") else arc_length_reparam(surface.path)
    prof = surface.profile if surface.profile.meta.get("arc_length") else arc_length_reparam(surface.profile)
    return TranslationSurface(path, prof)


def _bianchi_data(surface, frame):
    a = surface.path.side_tangents @ frame.T
    b = surface.profile.side_tangents @ frame.T
    return a[:, 0], a[:, 2], b[:, 1], b[:, 2]


def bianchi_interval(surface, frame=None, tol=HYPOTHESIS_TOL):
    """Admissible parameter interval ``[max|z_a|, 1/max|z_b|]`` and the frame.

    The surface is reparametrized by arc length first. The right end is
    ``inf`` when the profile tangents have no component along the planes'
    intersection.
    """
    surface = _arc_length_surface(surface)
    frame = perp_planes_frame(surface, tol) if frame is None else np.asarray(frame, dtype=float)
    xa, za, yb, zb = _bianchi_data(surface, frame)
    ya = surface.path.side_tangents @ frame[1]
    xb = surface.profile.side_tangents @ frame[0]
    if max(np.abs(ya).max(), np.abs(xb).max()) > tol:
        raise HypothesisError("path and profile do not lie in the perpendicular planes of the frame")
    za_max, zb_max = float(np.abs(za).max()), float(np.abs(zb).max())
    if za_max >= 1 - tol and zb_max >= 1 - tol:
        raise HypothesisError("|z_alpha| and |z_beta| cannot both reach 1: the interval has empty interior")
    lo = za_max
    hi = 1.0 / zb_max if zb_max > tol else np.inf
    if not lo < hi:
        raise HypothesisError(f"empty admissible interval [{lo:.6g}, {hi:.6g}]")
    return (lo, hi), frame


def bianchi_family(surface, path_signs=None, profile_signs=None, frame=None,
                   t_max=DEFAULT_T_MAX, tol=HYPOTHESIS_TOL):
    surface = _arc_length_surface(surface)
    interval, frame = bianchi_interval(surface, frame, tol)
    xa, za, yb, zb = _bianchi_data(surface, frame)
    forced_a, loci_a = _sign_structure(surface.path, xa, tol, "x_alpha")
    forced_b, loci_b = _sign_structure(surface.profile, yb, tol, "y_beta")
    sign_a = make_sign_choice(forced_a, path_signs, surface.path.period)
    sign_b = make_sign_choice(forced_b, profile_signs, surface.profile.period)
    ledger = _ledger(loci_a, "path", sign_a) + _ledger(loci_b, "profile", sign_b)
    data = {"frame": frame, "z_alpha": za, "z_beta": zb}
    return BendingFamily(surface, "bianchi", interval, 1.0, {"path": sign_a, "profile": sign_b},
                         ledger, data, t_max)


def _safe_sqrt(radicand, eps=1e-14):
    """Square root with radicands at rounding level treated as zero, so that
    endpoint evaluations do not pick up noise of order ``sqrt(eps)``."""
    radicand = np.asarray(radicand, dtype=float)
    return np.sqrt(np.where(radicand <= eps, 0.0, radicand))


def _check_t(family, t):
    if not family.contains(t):
        lo, hi = family.interval
        raise ParameterRangeError(f"t = {t!r} outside the admissible interval [{lo:.12g}, {hi:.12g}]")


def _side_signs(curve, choice):
    return np.asarray(choice.values, dtype=float)[curve.side_piece]


def bianchi_tangents(family, t):
    """New path and profile tangents (side arrays) at parameter ``t``."""
    _check_t(family, t)
    base, frame = family.base, family.data["frame"]
    za, zb = family.data["z_alpha"], family.data["z_beta"]
    sa = _side_signs(base.path, family.signs["path"])
    sb = _side_signs(base.profile, family.signs["profile"])
    xu = sa * _safe_sqrt(1.0 - (za / t) ** 2)
    yv = sb * _safe_sqrt(1.0 - (t * zb) ** 2)
    yu = np.stack([xu, np.zeros_like(xu), za / t], axis=1) @ frame
    vv = np.stack([np.zeros_like(yv), yv, t * zb], axis=1) @ frame
    return yu, vv


def bianchi_bending(family, t):
    """Surface of the perpendicular-planes family at parameter ``t``."""
    yu, yv = bianchi_tangents(family, t)
    path = family.base.path.with_tangents(family.base.path.split_sides(yu))
    prof = family.base.profile.with_tangents(family.base.profile.split_sides(yv))
    return assemble_surface(path, prof)


def koko_interval(surface, tol=HYPOTHESIS_TOL):
    """Admissible interval ``[max(c1c2 - s1s2), min(c1c2 + s1s2)]`` and the
    per-sample data of the two-slope family."""
    surface = _arc_length_surface(surface)
    slopes = tangent_set(surface.profile, tol)
    if len(slopes) != 2:
        raise HypothesisError(f"'has exactly two slopes' violated: profile has {len(slopes)} slopes")
    b1, b2 = slopes
    a = surface.path.side_tangents
    c1, c2 = a @ b1, a @ b2
    s1 = np.linalg.norm(np.cross(a, b1), axis=1)
    s2 = np.linalg.norm(np.cross(a, b2), axis=1)
    c = float(b1 @ b2)
    left = c - (c1 * c2 - s1 * s2)
    right = (c1 * c2 + s1 * s2) - c
    unfolded = left <= tol
    folded = right <= tol
    if unfolded.any() and folded.any():
        u_f = surface.path.side_params[np.flatnonzero(folded)[0]]
        u_u = surface.path.side_params[np.flatnonzero(unfolded)[0]]
        raise HypothesisError(f"triplet is flat-folded at u={u_f:.6g} and flat-unfolded at u={u_u:.6g}")
    jac = a @ np.cross(b1, b2)
    lo = float(np.max(c1 * c2 - s1 * s2))
    hi = float(np.min(c1 * c2 + s1 * s2))
    if not lo < hi:
        raise HypothesisError(f"empty admissible interval [{lo:.6g}, {hi:.6g}]")
    data = {"slopes": (b1, b2), "c1": c1, "c2": c2, "s1": s1, "s2": s2, "c": c, "J": jac,
            "surface": surface}
    return (lo, hi), data


def koko_family(surface, signs=None, tol=HYPOTHESIS_TOL):
    interval, data = koko_interval(surface, tol)
    surface = data.pop("surface")
    forced, loci = _sign_structure(surface.path, data["J"], tol, "J")
    choice = make_sign_choice(forced, signs, surface.path.period)
    idx, coeff = slope_coefficients(surface.profile, data["slopes"])
    data.update(slope_index=idx, slope_coeff=coeff)
    return BendingFamily(surface, "koko", interval, data["c"], {"path": choice},
                         _ledger(loci, "path", choice), data)


def koko_slopes(family, t):
    """Unit slopes with inner product ``t``; the first slope stays fixed and the
    second turns about their common normal."""
    b1, b2 = family.data["slopes"]
    c = family.data["c"]
    m = b2 - c * b1
    m /= np.linalg.norm(m)
    return b1, t * b1 + np.sqrt(max(0.0, 1.0 - t * t)) * m


def koko_jacobian(family, t):
    d = family.data
    sj = _side_signs(family.base.path, family.signs["path"])
    prod = (d["c1"] * d["c2"] + d["s1"] * d["s2"] - t) * (t - d["c1"] * d["c2"] + d["s1"] * d["s2"])
    return sj * _safe_sqrt(prod)


def koko_tangents(family, t):
    _check_t(family, t)
    d = family.data
    b1, b2 = koko_slopes(family, t)
    bt = np.cross(b1, b2)
    nb2 = float(bt @ bt)
    if nb2 < 1e-14:
        raise ParameterRangeError(f"t = {t!r}: the two slopes coincide and the bending is singular")
    a = np.outer(d["c1"], b2) - np.outer(d["c2"], b1)
    jt = koko_jacobian(family, t)
    yu = (np.cross(a, bt) + jt[:, None] * bt) / nb2
    yv = d["slope_coeff"][:, None] * np.where(d["slope_index"][:, None] == 0, b1, b2)
    return yu, yv


def koko_bending(family, t):
    """Surface of the two-slope family at parameter ``t``."""
    yu, yv = koko_tangents(family, t)
    path = family.base.path.with_tangents(family.base.path.split_sides(yu))
    prof = family.base.profile.with_tangents(family.base.profile.split_sides(yv))
    return assemble_surface(path, prof)


def crease_events(family, t, tol=1e-10):
    """Parameters where a crease can appear at ``t``.

    Ledger loci whose adjacent pieces carry different signs open into creases
    as soon as ``t`` leaves the identity; in addition, samples where the
    signed square root vanishes at ``t`` are reported.
    """
    if abs(t - family.t0) <= tol:
        return []
    events = []
    for entry in family.crease_ledger:
        signs = entry.get("signs")
        if entry["where"] == "piece" or (signs is not None and signs[0] != signs[1]):
            events.append((entry["curve"], entry["param"]))
    base = family.base
    if family.kind == "bianchi":
        za = family.data["z_alpha"]
        vanish = np.abs(np.abs(za) - abs(t)) <= tol
        events += [("path", float(u)) for u in base.path.side_params[vanish]]
        zb = family.data["z_beta"]
        vanish = np.abs(np.abs(t * zb) - 1.0) <= tol
        events += [("profile", float(v)) for v in base.profile.side_params[vanish]]
    else:
        vanish = np.abs(koko_jacobian(family, t)) <= tol
        events += [("path", float(u)) for u in base.path.side_params[vanish]]
    return sorted(set(events))
