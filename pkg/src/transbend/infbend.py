"""Closed-form infinitesimal bendings of surfaces of translation.

Every constructor returns a :class:`VelocityField` whose partial derivatives
are evaluated in closed form on the side grid, and whose values are obtained
by integrating those partials piece by piece from the lower-left corner.
Integration constants are a rigid-motion gauge and are set to zero.
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .cone import ConeBasis
from .curves import cumulative_cross_integral, integrate_sides, tangent_set
from .errors import GridMismatchError, HypothesisError, InconsistentVelocityError

HYPOTHESIS_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class VelocityField:
    """Velocity ``values`` on the sample grid and partials on the side grid.

    Optional analytic second partials ``duu``, ``dvv``, ``duv`` are stored when
    the construction provides them.
    """

    values: np.ndarray
    du: np.ndarray
    dv: np.ndarray
    kind: str
    duu: np.ndarray | None = None
    dvv: np.ndarray | None = None
    duv: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def transported(self, matrix):
        """Field ``A^{-T} v``, which bends ``A x`` whenever ``v`` bends ``x``."""
        inv = np.linalg.inv(np.asarray(matrix, dtype=float))
        opt = {k: None if getattr(self, k) is None else getattr(self, k) @ inv
               for k in ("duu", "dvv", "duv")}
        return VelocityField(self.values @ inv, self.du @ inv, self.dv @ inv,
                             self.kind, meta=dict(self.meta), **opt)


@dataclass(frozen=True, eq=False)
class RotationField:
    w: np.ndarray
    residual: float


def _unit_rows(a):
    return a / np.linalg.norm(a, axis=-1, keepdims=True)


def _sign_fixed(vec):
    return -vec if vec[np.argmax(np.abs(vec))] < 0 else vec


def _grid(surface, du_path, dv_profile, kind, meta, method="trapezoid"):
    """Assemble a conjugacy-preserving field from u-only and v-only partials."""
    shape = surface.side_shape + (3,)
    left = integrate_sides(surface.path, du_path, method=method)
    right = integrate_sides(surface.profile, dv_profile, method=method)
    values = left[:, None, :] + right[None, :, :]
    du = np.broadcast_to(du_path[:, None, :], shape)
    dv = np.broadcast_to(dv_profile[None, :, :], shape)
    return VelocityField(values, du, dv, kind, duv=np.zeros(shape), meta=meta)


def curve_rank(curve, tol=HYPOTHESIS_TOL):
    """Dimension of the span of a curve's tangents and its defining direction.

    Returns ``(1, direction)`` for a straight line, ``(2, normal)`` for a
    planar curve and ``(3, None)`` otherwise.
    """
    units = _unit_rows(curve.side_tangents)
    _, _, vt = np.linalg.svd(units, full_matrices=False)
    direction = _sign_fixed(vt[0])
    if np.max(np.linalg.norm(np.cross(units, direction), axis=1)) <= tol:
        return 1, direction
    normal = _sign_fixed(vt[2])
    if np.max(np.abs(units @ normal)) <= tol:
        return 2, normal
    return 3, None


def _axis_in_plane(normal):
    """Deterministic unit vector orthogonal to ``normal``."""
    for axis in np.eye(3):
        if abs(axis @ normal) < 0.9:
            proj = axis - (axis @ normal) * normal
            return proj / np.linalg.norm(proj)
    raise AssertionError("unreachable")


def perp_planes_frame(surface, tol=HYPOTHESIS_TOL):
    """Rotation whose rows ``(p, q, r)`` put the path tangents in the ``xz``
    plane and the profile tangents in the ``yz`` plane."""
    rank_a, dir_a = curve_rank(surface.path, tol)
    rank_b, dir_b = curve_rank(surface.profile, tol)
    if rank_a == 3 or rank_b == 3:
        raise HypothesisError("path and profile must each be planar")
    if rank_a == 1 and rank_b == 1:
        raise HypothesisError("path and profile are both straight lines")
    if rank_a == 2 and rank_b == 2:
        q, p = dir_a, dir_b
        if abs(p @ q) > tol:
            raise HypothesisError(f"planes of path and profile are not perpendicular (cos = {p @ q:.3e})")
        p = p - (p @ q) * q
        p /= np.linalg.norm(p)
    elif rank_a == 2:
        q = dir_a
        p = np.cross(q, dir_b)
        p = _axis_in_plane(q) if np.linalg.norm(p) <= tol else _sign_fixed(p / np.linalg.norm(p))
    else:
        p = dir_b
        q = np.cross(p, dir_a)
        q = _axis_in_plane(p) if np.linalg.norm(q) <= tol else _sign_fixed(q / np.linalg.norm(q))
    return np.vstack([p, q, np.cross(p, q)])


def universal_infinitesimal(surface, method="trapezoid"):
    """Torsional bending ``a(u) x b(v) + int a x a' - int b x b'`` of any
    surface of translation, with rotation field ``a(u) - b(v)``."""
    path, prof = surface.path, surface.profile
    ia = cumulative_cross_integral(path, path.params[0], method).values
    ib = cumulative_cross_integral(prof, prof.params[0], method).values
    values = np.cross(path.points[:, None, :], prof.points[None, :, :]) + ia[:, None, :] - ib[None, :, :]
    shape = surface.side_shape + (3,)
    w = path.side_points[:, None, :] - prof.side_points[None, :, :]
    a1 = np.broadcast_to(path.side_tangents[:, None, :], shape)
    b1 = np.broadcast_to(prof.side_tangents[None, :, :], shape)
    a2 = np.broadcast_to(path.side_accelerations[:, None, :], shape)
    b2 = np.broadcast_to(prof.side_accelerations[None, :, :], shape)
    duv = np.cross(a1, b1)
    meta = {"nontriviality": float(np.linalg.norm(duv, axis=-1).min()), "rotation": w}
    return VelocityField(values, np.cross(w, a1), np.cross(w, b1), "universal",
                         duu=np.cross(w, a2), dvv=np.cross(w, b2), duv=duv, meta=meta)


def _not_both_straight(surface, tol):
    if curve_rank(surface.path, tol)[0] == 1 and curve_rank(surface.profile, tol)[0] == 1:
        raise HypothesisError("path and profile are both straight lines; the field would be Euclidean")


def perp_planes_infinitesimal(surface, frame=None, tol=HYPOTHESIS_TOL, method="trapezoid"):
    """Torsion-free bending for a path and a profile in perpendicular planes."""
    _not_both_straight(surface, tol)
    frame = perp_planes_frame(surface, tol) if frame is None else np.asarray(frame, dtype=float)
    a = surface.path.side_tangents @ frame.T
    b = surface.profile.side_tangents @ frame.T
    xa, za = a[:, 0], a[:, 2]
    yb, zb = b[:, 1], b[:, 2]
    if np.max(np.abs(a[:, 1]) / np.linalg.norm(a, axis=1)) > tol or \
            np.max(np.abs(b[:, 0]) / np.linalg.norm(b, axis=1)) > tol:
        raise HypothesisError("tangents do not lie in the planes of the given frame")
    if np.min(np.abs(xa) / np.linalg.norm(a, axis=1)) <= tol or \
            np.min(np.abs(yb) / np.linalg.norm(b, axis=1)) <= tol:
        raise HypothesisError("singular hypothesis: a tangent lies in the intersection of the two planes; "
                              "use the finite perpendicular-planes sweep instead")
    zero_a, zero_b = np.zeros_like(xa), np.zeros_like(yb)
    du = np.stack([za**2 / xa, zero_a, -za], axis=1) @ frame
    dv = np.stack([zero_b, -zb**2 / yb, zb], axis=1) @ frame
    w_local = np.stack(np.broadcast_arrays(
        (zb / yb)[None, :], (za / xa)[:, None], (za / xa)[:, None] * (zb / yb)[None, :]), axis=-1)
    meta = {"frame": frame, "rotation": w_local @ frame}
    return _grid(surface, du, dv, "perp-planes", meta, method)


def _cone_coordinates(surface, basis, tol):
    dirs = np.vstack([surface.path.side_tangents, surface.profile.side_tangents])
    residual = basis.cone_residual(dirs)
    if residual > tol:
        raise HypothesisError(f"tangents are not on the cone: residual {residual:.3e}")
    return basis.coordinates(surface.path.side_tangents), basis.coordinates(surface.profile.side_tangents)


def cone_infinitesimal(surface, basis: ConeBasis, tol=HYPOTHESIS_TOL, method="trapezoid"):
    """Torsion-free bending when all tangents lie on the cone ``x y = s z^2``."""
    _not_both_straight(surface, tol)
    ca, cb = _cone_coordinates(surface, basis, tol)
    na = np.linalg.norm(surface.path.side_tangents, axis=1)
    nb = np.linalg.norm(surface.profile.side_tangents, axis=1)
    if abs(basis.s) > tol:
        branch = "nondegenerate"
        xb, yb, zb = cb.T
        xa, ya, za = ca.T
        du = np.outer(ya / basis.s, basis.p_star) - np.outer(za, basis.r_star)
        dv = -np.outer(xb / basis.s, basis.q_star) + np.outer(zb, basis.r_star)
    else:
        branch = "degenerate"
        if np.max(np.abs(ca[:, 1]) / na) > tol:
            if np.max(np.abs(ca[:, 0]) / na) > tol:
                raise HypothesisError("path tangents do not stay on one of the two planes")
            basis = basis.swapped()
            ca, cb = ca[:, [1, 0, 2]], cb[:, [1, 0, 2]]
        if np.max(np.abs(cb[:, 0]) / nb) > tol:
            raise HypothesisError("profile tangents do not stay on the plane not holding the path")
        xa, ya, za = ca.T
        xb, yb, zb = cb.T
        if np.min(np.abs(xa) / na) <= tol or np.min(np.abs(yb) / nb) <= tol:
            raise HypothesisError("a tangent lies on both planes (their intersection)")
        du = np.outer(za**2 / xa, basis.p_star) - np.outer(za, basis.r_star)
        dv = -np.outer(zb**2 / yb, basis.q_star) + np.outer(zb, basis.r_star)
    meta = {"basis": basis, "branch": branch}
    return _grid(surface, du, dv, "cone", meta, method)


def cone_rotation_closed_form(surface, basis: ConeBasis, tol=HYPOTHESIS_TOL):
    """Rotation field of the cone bending from its closed form.

    The closed form is written for a basis with ``det(p, q, r) = 1``; for a
    general mirror basis the field is divided by that determinant.
    """
    ca, cb = _cone_coordinates(surface, basis, tol)
    xa, _, za = ca.T
    _, yb, zb = cb.T
    if np.min(np.abs(xa)) <= tol or np.min(np.abs(yb)) <= tol:
        raise HypothesisError("closed-form rotation needs nonzero x_alpha and y_beta")
    ka = (za / xa)[:, None]
    kb = (zb / yb)[None, :]
    scale = 1.0 / ((1.0 - basis.s * ka * kb) * basis.det)
    vec = (kb[..., None] * basis.p + ka[..., None] * basis.q + (ka * kb)[..., None] * basis.r)
    return scale[..., None] * vec


def _two_slopes(profile, tol):
    slopes = tangent_set(profile, tol)
    if len(slopes) != 2:
        raise HypothesisError(f"'has exactly two slopes' violated: profile has {len(slopes)} slopes")
    return slopes


def slope_coefficients(profile, slopes):
    """For each profile side: which slope it follows and the signed speed along it."""
    t = profile.side_tangents
    dots = t @ np.asarray(slopes).T
    idx = np.argmax(np.abs(dots), axis=1)
    coeff = dots[np.arange(len(t)), idx]
    return idx, coeff


def two_slope_infinitesimal(surface, tol=HYPOTHESIS_TOL, method="trapezoid"):
    """Torsion-free bending for a profile with exactly two slopes."""
    b1, b2 = _two_slopes(surface.profile, tol)
    n = np.cross(b1, b2)
    a = surface.path.side_tangents
    jac = a @ n
    if np.min(np.abs(jac) / (np.linalg.norm(a, axis=1) * np.linalg.norm(n))) <= tol:
        raise HypothesisError("path tangent lies in the plane of the profile")
    db1 = np.cross(n, b1)
    db2 = -np.cross(n, b2)
    idx, coeff = slope_coefficients(surface.profile, (b1, b2))
    dv = coeff[:, None] * np.where(idx[:, None] == 0, db1, db2)
    lead = np.outer(a @ db2, b1) - np.outer(a @ db1, b2)
    du = np.cross(lead, a) / jac[:, None]
    meta = {"slopes": (b1, b2)}
    return _grid(surface, du, dv, "two-slope", meta, method)


def parallel_pieces(surface, tol=HYPOTHESIS_TOL):
    """Plane normal of a planar, non-straight path and the profile pieces whose
    tangents are parallel to that plane."""
    rank, normal = curve_rank(surface.path, tol)
    if rank != 2:
        raise HypothesisError("path must be planar and not straight")
    prof = surface.profile
    cosines = np.abs(_unit_rows(prof.side_tangents) @ normal)
    pieces = []
    for k in range(prof.n_pieces):
        par = cosines[prof.piece_sides(k)] <= tol
        if par.all():
            pieces.append(k)
        elif par[1:-1].any():
            raise HypothesisError(f"profile is parallel to the path plane on part of piece {k} only")
    return normal, pieces


def planar_normal_infinitesimal(surface, constants, tol=HYPOTHESIS_TOL,
                                require_closure=False, method="trapezoid"):
    """Normal bending localized on profile pieces parallel to the path plane.

    ``constants`` gives one scalar per parallel piece, either as a sequence in
    piece order or as a mapping from piece index to scalar.
    """
    normal, pieces = parallel_pieces(surface, tol)
    if isinstance(constants, Mapping):
        if set(constants) != set(pieces):
            raise HypothesisError(f"constants must be given for pieces {pieces}, got {sorted(constants)}")
        consts = {int(k): float(v) for k, v in constants.items()}
    else:
        constants = list(constants)
        if len(constants) != len(pieces):
            raise HypothesisError(f"expected {len(pieces)} constants for parallel pieces {pieces}")
        consts = dict(zip(pieces, map(float, constants)))
    prof = surface.profile
    per_side = np.zeros(prof.n_sides)
    for k, c in consts.items():
        per_side[prof.piece_sides(k)] = c
    dv = per_side[:, None] * normal
    du = np.zeros((surface.path.n_sides, 3))
    gap = None
    if prof.is_closed():
        gap = float(np.linalg.norm(integrate_sides(prof, dv, method=method)[-1]))
        if require_closure and gap > tol:
            raise HypothesisError(f"constants break the closure of the profile (gap {gap:.3e})")
    meta = {"normal": normal, "pieces": pieces, "constants": consts,
            "trivial": all(c == 0.0 for c in consts.values()), "closure_gap": gap}
    return _grid(surface, du, dv, "planar-normal", meta, method)


def euclidean_velocity(surface, translation, rotation):
    """Velocity ``v + w x x`` of a rigid motion."""
    v = np.asarray(translation, dtype=float)
    w = np.asarray(rotation, dtype=float)
    shape = surface.side_shape + (3,)
    return VelocityField(v + np.cross(w, surface.points), np.cross(w, surface.xu),
                         np.cross(w, surface.xv), "euclidean", duv=np.zeros(shape))


def rotation_field(surface, vel, tol=1e-6):
    """Least-squares ``w`` with ``du = w x x_u`` and ``dv = w x x_v`` per side sample."""
    if vel.du.shape != surface.side_shape + (3,) or vel.values.shape != surface.shape + (3,):
        raise GridMismatchError("velocity field does not live on this surface's grid")
    a, b = surface.xu, surface.xv
    eye = np.eye(3)
    normal = (np.sum(a * a, -1)[..., None, None] * eye - a[..., :, None] * a[..., None, :]
              + np.sum(b * b, -1)[..., None, None] * eye - b[..., :, None] * b[..., None, :])
    rhs = np.cross(a, vel.du) + np.cross(b, vel.dv)
    w = np.linalg.solve(normal, rhs[..., None])[..., 0]
    err = np.sqrt(np.sum((np.cross(w, a) - vel.du) ** 2, -1) + np.sum((np.cross(w, b) - vel.dv) ** 2, -1))
    scale = (np.sqrt(np.sum(vel.du**2, -1) + np.sum(vel.dv**2, -1))
             + np.linalg.norm(w, axis=-1) * np.sqrt(np.sum(a * a, -1) + np.sum(b * b, -1)))
    rel = err / np.maximum(scale, np.finfo(float).tiny)
    residual = float(rel.max())
    if residual > tol:
        raise InconsistentVelocityError(f"velocity is not an infinitesimal rotation of the frame "
                                        f"(relative residual {residual:.3e})")
    return RotationField(w, residual)


def is_nonconstant(rot, rel_tol=1e-6):
    """True when the rotation field varies over the grid, i.e. the field bends."""
    w = rot.w.reshape(-1, 3)
    spread = np.linalg.norm(w - w.mean(axis=0), axis=1).max()
    return bool(spread > rel_tol * max(1.0, np.linalg.norm(w, axis=1).max()))
