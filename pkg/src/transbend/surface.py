"""Surfaces of translation with their fundamental forms and quad meshes."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DegenerateSurfaceError, TransbendError

MIN_ANGLE = 1e-6


def fmt(x):
    """Fixed 17-significant-digit scientific formatting used in every CSV."""
    return f"{float(x):.16e}"


@dataclass(frozen=True, eq=False)
class TranslationSurface:
    """``x(u, v) = path(u) + profile(v)`` on the tensor grid of both curves.

    Quantities indexed by "sides" live on the ``path.n_sides x profile.n_sides``
    grid where samples on a crease appear once per adjacent piece.
    """

    path: object
    profile: object

    @cached_property
    def points(self):
        return self.path.points[:, None, :] + self.profile.points[None, :, :]

    @property
    def shape(self):
        return (self.path.n_samples, self.profile.n_samples)

    @property
    def side_shape(self):
        return (self.path.n_sides, self.profile.n_sides)

    @property
    def side_points(self):
        return self.points[np.ix_(self.path.side_index, self.profile.side_index)]

    @cached_property
    def xu(self):
        """Path tangents broadcast over the side grid."""
        return np.broadcast_to(self.path.side_tangents[:, None, :], self.side_shape + (3,))

    @cached_property
    def xv(self):
        return np.broadcast_to(self.profile.side_tangents[None, :, :], self.side_shape + (3,))

    def same_grid(self, other):
        return (np.array_equal(self.path.params, other.path.params)
                and np.array_equal(self.profile.params, other.profile.params)
                and self.path.pieces == other.path.pieces
                and self.profile.pieces == other.profile.pieces)


@dataclass(frozen=True, eq=False)
class FundamentalForms:
    """First and second fundamental form coefficients on the side grid."""

    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    normal: np.ndarray


@dataclass(frozen=True, eq=False)
class QuadMesh:
    vertices: np.ndarray
    faces: np.ndarray
    crease_edges: np.ndarray
    grid_shape: tuple | None = None


def assemble_surface(path, profile, min_angle=MIN_ANGLE):
    """Sum a path and a profile, rejecting grids where the tangents are parallel."""
    ta = path.side_tangents / np.linalg.norm(path.side_tangents, axis=1)[:, None]
    tb = profile.side_tangents / np.linalg.norm(profile.side_tangents, axis=1)[:, None]
    sines = np.linalg.norm(np.cross(ta[:, None, :], tb[None, :, :]), axis=2)
    i, j = np.unravel_index(np.argmin(sines), sines.shape)
    if sines[i, j] < np.sin(min_angle):
        u, v = path.side_params[i], profile.side_params[j]
        raise DegenerateSurfaceError(
            f"degenerate-surface: x_u and x_v are parallel at (u, v) = ({u:.12g}, {v:.12g})", u, v)
    return TranslationSurface(path, profile)


def fundamental_forms(surface):
    a1, b1 = surface.path.side_tangents, surface.profile.side_tangents
    a2, b2 = surface.path.side_accelerations, surface.profile.side_accelerations
    cross = np.cross(a1[:, None, :], b1[None, :, :])
    normal = cross / np.linalg.norm(cross, axis=2)[..., None]
    shape = surface.side_shape
    E = np.broadcast_to(np.sum(a1 * a1, axis=1)[:, None], shape).copy()
    G = np.broadcast_to(np.sum(b1 * b1, axis=1)[None, :], shape).copy()
    F = a1 @ b1.T
    e = np.einsum("ik,ijk->ij", a2, normal)
    g = np.einsum("jk,ijk->ij", b2, normal)
    # x_uv vanishes identically for a sum of two curves
    f = np.zeros(shape)
    return FundamentalForms(E, F, G, e, f, g, normal)


def to_quad_mesh(surface):
    """One vertex per grid sample (row-major in u), one quad per grid cell."""
    nu, nv = surface.shape
    vertices = surface.points.reshape(-1, 3).copy()
    idx = np.arange(nu * nv).reshape(nu, nv)
    faces = np.stack([idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]], axis=-1).reshape(-1, 4)
    creases = []
    for lo, _ in surface.path.pieces[1:]:
        creases.extend(zip(idx[lo, :-1], idx[lo, 1:]))
    for lo, _ in surface.profile.pieces[1:]:
        creases.extend(zip(idx[:-1, lo], idx[1:, lo]))
    crease_edges = np.asarray(creases, dtype=int).reshape(-1, 2)
    return QuadMesh(vertices, faces, crease_edges, (nu, nv))


def mesh_edges(mesh):
    """Unique undirected edges of the quad faces, sorted."""
    ring = np.concatenate([mesh.faces[:, [k, (k + 1) % 4]] for k in range(4)])
    return np.unique(np.sort(ring, axis=1), axis=0)


def planarity_residual(mesh):
    """Distance of each face's fourth vertex to the plane of the first three,
    divided by the face's longest edge."""
    p = mesh.vertices[mesh.faces]
    n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    norm = np.linalg.norm(n, axis=1)
    dist = np.abs(np.sum((p[:, 3] - p[:, 0]) * n, axis=1)) / np.where(norm > 0, norm, 1.0)
    edges = np.linalg.norm(p - np.roll(p, -1, axis=1), axis=2).max(axis=1)
    return dist / np.where(edges > 0, edges, 1.0)


def export_obj(mesh, path):
    """Write ``v`` lines then 1-based ``f`` lines; quads stay quads."""
    if len(mesh.vertices) == 0 or len(mesh.faces) == 0:
        raise TransbendError("refusing to export an empty mesh")
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
    lines += ["f " + " ".join(str(int(i) + 1) for i in face) for face in mesh.faces]
    Path(path).write_text("\n".join(lines) + "\n")


def load_obj(path):
    vertices, faces = [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            vertices.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append([int(tok.split("/")[0]) - 1 for tok in parts[1:]])
    return QuadMesh(np.asarray(vertices, dtype=float).reshape(-1, 3),
                    np.asarray(faces, dtype=int).reshape(-1, 4),
                    np.zeros((0, 2), dtype=int))


def write_forms_csv(surface, forms, path):
    """Rows ``u, v, x, y, z, E, F, G, e, f, g`` over the side grid."""
    us, vs = surface.path.side_params, surface.profile.side_params
    pts = surface.side_points
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["u", "v", "x", "y", "z", "E", "F", "G", "e", "f", "g"])
        for i, u in enumerate(us):
            for j, v in enumerate(vs):
                row = [u, v, *pts[i, j], forms.E[i, j], forms.F[i, j], forms.G[i, j],
                       forms.e[i, j], forms.f[i, j], forms.g[i, j]]
                writer.writerow([fmt(x) for x in row])
