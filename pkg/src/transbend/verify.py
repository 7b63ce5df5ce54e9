"""Numerical certificates for bendings and the surfaces they produce.

Each check returns the worst residual with its grid location, so a report
row can say where a tolerance was missed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .curves import _gradient, integrate_sides, sample_index
from .errors import GridMismatchError, HypothesisError
from .surface import fmt, fundamental_forms, mesh_edges, planarity_residual

ANALYTIC_TOL = 1e-9
FD_TOL = 1e-6


@dataclass(frozen=True)
class IsometryReport:
    name: str
    maxima: dict
    location: tuple
    tolerance: float
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "passed", all(v <= self.tolerance for v in self.maxima.values()))

    @property
    def max_residual(self):
        return max(self.maxima.values())

    def row(self):
        return (self.name, self.max_residual, self.location[0], self.location[1], self.tolerance, self.passed)


@dataclass(frozen=True)
class BurgersVector:
    b: np.ndarray
    interval: tuple
    kind: str
    method: str = "trapezoid"


@dataclass(frozen=True, eq=False)
class SecondFormRates:
    edot: np.ndarray
    fdot: np.ndarray
    gdot: np.ndarray


def _diff_path(surface, side_arr):
    """d/du of an array indexed by path sides on axis 0, within pieces."""
    path = surface.path
    out = np.empty_like(side_arr)
    for k, (lo, hi) in enumerate(path.pieces):
        sl = path.piece_sides(k)
        out[sl] = _gradient(side_arr[sl], path.params[lo:hi + 1])
    return out


def _diff_profile(surface, side_arr):
    swapped = np.swapaxes(side_arr, 0, 1)
    prof = surface.profile
    out = np.empty_like(swapped)
    for k, (lo, hi) in enumerate(prof.pieces):
        sl = prof.piece_sides(k)
        out[sl] = _gradient(swapped[sl], prof.params[lo:hi + 1])
    return np.swapaxes(out, 0, 1)


def fd_partials(surface, vel):
    """Second-order difference partials of the velocity values on the side grid."""
    path, prof = surface.path, surface.profile
    on_path = vel.values[path.side_index]
    du = _diff_path(surface, on_path)[:, prof.side_index]
    on_prof = vel.values[:, prof.side_index]
    dv = _diff_profile(surface, on_prof)[path.side_index]
    return du, dv


def _argmax_location(surface, arr):
    i, j = np.unravel_index(np.argmax(arr), arr.shape)
    return float(surface.path.side_params[i]), float(surface.profile.side_params[j])


def strain_residual(surface, vel, partials="analytic", tol=None):
    """Linearized strains of ``vel``, normalized by ``sqrt(E G)``."""
    if vel.values.shape != surface.shape + (3,) or vel.du.shape != surface.side_shape + (3,):
        raise GridMismatchError("velocity field and surface have different grids or pieces")
    if partials == "analytic":
        du, dv = vel.du, vel.dv
        tol = ANALYTIC_TOL if tol is None else tol
    elif partials == "fd":
        du, dv = fd_partials(surface, vel)
        tol = FD_TOL if tol is None else tol
    else:
        raise ValueError(f"partials must be 'analytic' or 'fd', got {partials!r}")
    xu, xv = surface.xu, surface.xv
    scale = np.linalg.norm(xu, axis=-1) * np.linalg.norm(xv, axis=-1)
    e11 = np.abs(np.sum(du * xu, -1)) / scale
    e22 = np.abs(np.sum(dv * xv, -1)) / scale
    e12 = np.abs(np.sum(du * xv, -1) + np.sum(dv * xu, -1)) / scale
    worst = np.maximum(np.maximum(e11, e22), e12)
    maxima = {"e11": float(e11.max()), "e22": float(e22.max()), "e12": float(e12.max())}
    return IsometryReport(f"strain[{vel.kind},{partials}]", maxima, _argmax_location(surface, worst), tol)


def metric_deviation(a, b, tol=1e-10):
    """Largest change of ``E, F, G`` between two surfaces on the same grid."""
    if not a.same_grid(b):
        raise GridMismatchError("surfaces do not share grid and pieces")
    fa, fb = fundamental_forms(a), fundamental_forms(b)
    scale = np.sqrt(fa.E * fa.G)
    dE = np.abs(fb.E - fa.E) / scale
    dF = np.abs(fb.F - fa.F) / scale
    dG = np.abs(fb.G - fa.G) / scale
    worst = np.maximum(np.maximum(dE, dF), dG)
    maxima = {"dE": float(dE.max()), "dF": float(dF.max()), "dG": float(dG.max())}
    return IsometryReport("metric", maxima, _argmax_location(a, worst), tol)


def second_form_rates(surface, vel, rot=None):
    """Rates of ``e, f, g`` with the normal rotating as ``n' = w x n``."""
    from .infbend import rotation_field

    if rot is None:
        rot = rotation_field(surface, vel)
    forms = fundamental_forms(surface)
    n = forms.normal
    ndot = np.cross(rot.w, n)
    duu = vel.duu if vel.duu is not None else _diff_path(surface, vel.du)
    dvv = vel.dvv if vel.dvv is not None else _diff_profile(surface, vel.dv)
    duv = vel.duv if vel.duv is not None else _diff_profile(surface, vel.du)
    xuu = np.broadcast_to(surface.path.side_accelerations[:, None, :], n.shape)
    xvv = np.broadcast_to(surface.profile.side_accelerations[None, :, :], n.shape)
    edot = np.sum(duu * n, -1) + np.sum(xuu * ndot, -1)
    gdot = np.sum(dvv * n, -1) + np.sum(xvv * ndot, -1)
    fdot = np.sum(duv * n, -1)
    return SecondFormRates(edot, fdot, gdot)


def burgers_vector(curve, kind, v1=None, v2=None, basis=None, method="trapezoid", tol=1e-8):
    """Closure defect of a bending field along the profile between ``v1`` and ``v2``.

    ``kind="universal"`` integrates ``-b x b'``. ``kind="cone"`` integrates the
    ``q*`` part of the cone bending's ``v`` derivative and needs ``basis``.
    """
    i1 = 0 if v1 is None else sample_index(curve, v1)
    i2 = curve.n_samples - 1 if v2 is None else sample_index(curve, v2)
    if kind == "universal":
        integrand = -np.cross(curve.side_points, curve.side_tangents)
    elif kind == "cone":
        if basis is None:
            raise ValueError("cone Burgers vector needs a mirror basis")
        x, y, z = basis.coordinates(curve.side_tangents).T
        if abs(basis.s) > tol:
            coeff = -x / basis.s
        else:
            lo, hi = min(i1, i2), max(i1, i2)
            inside = (curve.side_index >= lo) & (curve.side_index <= hi)
            if np.any(np.abs(y[inside]) <= tol * np.linalg.norm(curve.side_tangents[inside], axis=1)):
                raise HypothesisError("y_beta vanishes on the interval")
            coeff = -np.divide(z**2, y, out=np.zeros_like(z), where=np.abs(y) > 0)
        integrand = np.outer(coeff, basis.q_star)
    else:
        raise ValueError(f"unknown Burgers kind {kind!r}")
    acc = integrate_sides(curve, integrand, method=method)
    return BurgersVector(acc[i2] - acc[i1], (float(curve.params[i1]), float(curve.params[i2])), kind, method)


@dataclass(frozen=True)
class FrameCheck:
    edge_deviation: float
    planarity: float
    periodicity_gap: float | None
    closure_gap: float | None


def discrete_checks(meshes, u_period=None, v_period=None, closed_profile=False):
    """Per-frame edge-length drift, face planarity, periodicity and closure gaps."""
    meshes = list(meshes)
    if not meshes:
        return []
    ref = meshes[0]
    edges = mesh_edges(ref)
    ref_len = np.linalg.norm(ref.vertices[edges[:, 0]] - ref.vertices[edges[:, 1]], axis=1)
    out = []
    for mesh in meshes:
        if mesh.vertices.shape != ref.vertices.shape or not np.array_equal(mesh.faces, ref.faces):
            raise GridMismatchError("meshes do not share combinatorics")
        length = np.linalg.norm(mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]], axis=1)
        dev = float(np.max(np.abs(length - ref_len) / ref_len))
        plan = float(planarity_residual(mesh).max())
        period_gap = closure = None
        if mesh.grid_shape is not None:
            grid = mesh.vertices.reshape(*mesh.grid_shape, 3)
            gaps = []
            if u_period:
                eu = np.diff(grid, axis=0)
                gaps.append(np.linalg.norm(eu[u_period:] - eu[:-u_period], axis=-1).max(initial=0.0))
            if v_period:
                ev = np.diff(grid, axis=1)
                gaps.append(np.linalg.norm(ev[:, v_period:] - ev[:, :-v_period], axis=-1).max(initial=0.0))
            period_gap = float(max(gaps)) if gaps else None
            if closed_profile:
                closure = float(np.linalg.norm(grid[:, -1] - grid[:, 0], axis=-1).max())
        out.append(FrameCheck(dev, plan, period_gap, closure))
    return out


def doubly_ruled_residual(surface, rot, min_norm=1e-9):
    """Largest sine of the angles between ``w_u`` and ``x_v`` and between
    ``w_v`` and ``x_u`` at interior samples of each piece."""
    wu = _diff_path(surface, rot.w)
    wv = _diff_profile(surface, rot.w)
    interior_u = np.ones(surface.path.n_sides, bool)
    interior_v = np.ones(surface.profile.n_sides, bool)
    for curve, mask in ((surface.path, interior_u), (surface.profile, interior_v)):
        for k in range(curve.n_pieces):
            sl = curve.piece_sides(k)
            mask[sl.start] = mask[sl.stop - 1] = False
    mask = interior_u[:, None] & interior_v[None, :]
    worst = 0.0
    for d, x in ((wu, surface.xv), (wv, surface.xu)):
        dn = np.linalg.norm(d, axis=-1)
        keep = mask & (dn > min_norm * max(1.0, dn.max(initial=0.0)))
        if not keep.any():
            continue
        sines = np.linalg.norm(np.cross(d, x), axis=-1) / (dn * np.linalg.norm(x, axis=-1) + 1e-300)
        worst = max(worst, float(sines[keep].max()))
    return worst


def _mixed_difference(surface, grid_values):
    """Largest norm of the central mixed difference inside each piece block."""
    worst = 0.0
    for lo_u, hi_u in surface.path.pieces:
        for lo_v, hi_v in surface.profile.pieces:
            if hi_u - lo_u < 2 or hi_v - lo_v < 2:
                continue
            block = grid_values[lo_u:hi_u + 1, lo_v:hi_v + 1]
            u = surface.path.params[lo_u:hi_u + 1]
            v = surface.profile.params[lo_v:hi_v + 1]
            mixed = (block[2:, 2:] - block[2:, :-2] - block[:-2, 2:] + block[:-2, :-2])
            mixed /= ((u[2:] - u[:-2])[:, None] * (v[2:] - v[:-2])[None, :])[..., None]
            worst = max(worst, float(np.linalg.norm(mixed, axis=-1).max()))
    return worst


def _tangent_scale(surface):
    ta = np.linalg.norm(surface.path.side_tangents, axis=1).max()
    tb = np.linalg.norm(surface.profile.side_tangents, axis=1).max()
    return ta * tb


def conjugacy_residual(surface):
    """Largest mixed central difference of the positions inside each piece
    block, relative to ``sqrt(E G)``."""
    return _mixed_difference(surface, surface.points) / _tangent_scale(surface)


def velocity_mixed_residual(surface, vel):
    """Mixed central difference of the velocity values, relative to
    ``sqrt(E G)``; zero iff the bending keeps the net conjugate."""
    return _mixed_difference(surface, vel.values) / _tangent_scale(surface)


def convergence_order(steps, errors):
    """Least-squares slope of ``log2(error)`` against ``log2(step)``."""
    return float(np.polyfit(np.log2(steps), np.log2(errors), 1)[0])


def write_report_csv(rows, path):
    """Rows of ``(check, max_residual, location_u, location_v, tolerance, pass)``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["check", "max_residual", "location_u", "location_v", "tolerance", "pass"])
        for name, res, u, v, tol, ok in rows:
            loc = [fmt(u) if u is not None else "", fmt(v) if v is not None else ""]
            writer.writerow([name, fmt(res), *loc, fmt(tol), "true" if ok else "false"])
