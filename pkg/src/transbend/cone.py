"""Homogeneous quadric cones through a set of directions.

Fits ``d^T Q d = 0`` to tangent directions and classifies the cone by the
signs of its eigenvalues. The mirror basis ``(p, q, r)`` is the frame in
which the cone reads ``x y = s z^2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisConstructionError, TransbendError

ELLIPTIC = "nondegenerate-elliptic-cone"
TWO_PLANES = "two-planes"
OTHER = "other"

ZERO_EIGENVALUE = 1e-8


def jacobi_eigh(a, tol=1e-14, max_sweeps=50):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi sweeps.

    Returns eigenvalues in descending order and the matching unit
    eigenvectors as columns. Each eigenvector is signed so that its
    largest-magnitude component is positive.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n) or not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("jacobi_eigh expects a symmetric square matrix")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                a[p, q] = a[q, p] = 0.0
                v = v @ rot
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    for k in range(n):
        col = v[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            v[:, k] = -col
    return w, v


def _sign_fixed(vec):
    vec = np.asarray(vec, dtype=float)
    return -vec if vec[np.argmax(np.abs(vec))] < 0 else vec


def _unit(vec):
    return vec / np.linalg.norm(vec)


def dedup_directions(directions, tol=1e-8):
    """Unit directions with duplicates (up to sign) removed, order preserved."""
    out = []
    for d in np.asarray(directions, dtype=float).reshape(-1, 3):
        norm = np.linalg.norm(d)
        if norm == 0.0:
            continue
        d = d / norm
        if out:
            arr = np.asarray(out)
            ang = np.arctan2(np.linalg.norm(np.cross(arr, d), axis=1), np.abs(arr @ d))
            if np.any(ang <= tol):
                continue
        out.append(d)
    return np.asarray(out).reshape(-1, 3)


def quadric_rows(directions):
    """Rows ``(x^2, y^2, z^2, yz, zx, xy)`` of the cone constraint system."""
    x, y, z = np.asarray(directions, dtype=float).T
    return np.stack([x * x, y * y, z * z, y * z, z * x, x * y], axis=1)


def quadric_matrix(coeffs):
    a, b, c, d, e, f = coeffs
    return np.array([[a, f / 2, e / 2], [f / 2, b, d / 2], [e / 2, d / 2, c]])


@dataclass(frozen=True, eq=False)
class QuadricCone:
    """Normalized symmetric form ``Q`` (Frobenius norm 1, dominant eigenvalue
    positive) with its classification and fit residual."""

    matrix: np.ndarray
    tag: str
    residual: float
    directions: np.ndarray
    unique: bool = True

    @classmethod
    def from_matrix(cls, matrix, directions=(), unique=True):
        q = normalize_form(matrix)
        dirs = np.asarray(directions, dtype=float).reshape(-1, 3)
        res = float(np.max(np.abs(np.einsum("ni,ij,nj->n", dirs, q, dirs)))) if len(dirs) else 0.0
        return cls(q, _classify_matrix(q), res, dirs, unique)

    @property
    def eigen(self):
        return jacobi_eigh(self.matrix)


def normalize_form(matrix):
    q = np.asarray(matrix, dtype=float)
    q = 0.5 * (q + q.T)
    norm = np.linalg.norm(q)
    if norm == 0.0:
        raise TransbendError("quadratic form is identically zero")
    q = q / norm
    w, _ = jacobi_eigh(q)
    mags = np.abs(w)
    top = mags.max()
    ties = w[mags >= top * (1 - 1e-9)]
    if ties.min() < 0 < ties.max():
        # dominant magnitude shared by both signs: make the trace nonnegative
        flip = np.trace(q) < -1e-12
    else:
        flip = ties[0] < 0
    return -q if flip else q


def _signature(w, zero=ZERO_EIGENVALUE):
    pos = int(np.sum(w > zero))
    neg = int(np.sum(w < -zero))
    return pos, neg, len(w) - pos - neg


def _classify_matrix(q, zero=ZERO_EIGENVALUE):
    w, _ = jacobi_eigh(q)
    pos, neg, nul = _signature(w, zero)
    if nul == 0 and {pos, neg} == {1, 2}:
        return ELLIPTIC
    if pos == 1 and neg == 1 and nul == 1:
        return TWO_PLANES
    return OTHER


def classify_cone(cone, zero=ZERO_EIGENVALUE):
    """Tag a cone (or raw symmetric matrix) by eigenvalue signature."""
    q = cone.matrix if isinstance(cone, QuadricCone) else normalize_form(cone)
    return _classify_matrix(q, zero)


def fit_cone(directions, unique_tol=1e-10):
    """Least-squares homogeneous quadric through the given directions.

    The coefficients are the right singular vector of the smallest singular
    value of the ``N x 6`` constraint matrix. ``unique`` is False when the
    null space is more than one-dimensional (e.g. four or fewer directions).
    """
    dirs = dedup_directions(directions)
    if len(dirs) == 0:
        raise TransbendError("fit_cone needs at least one nonzero direction")
    rows = quadric_rows(dirs)
    _, sing, vt = np.linalg.svd(rows, full_matrices=True)
    sing = np.concatenate([sing, np.zeros(6 - len(sing))])
    unique = bool(sing[-2] > unique_tol * max(sing[0], 1.0))
    return QuadricCone.from_matrix(quadric_matrix(vt[-1]), dirs, unique)


@dataclass(frozen=True, eq=False)
class ConeBasis:
    """Mirror basis of a cone: ``x p + y q + z r`` is on the cone iff ``x y = s z^2``."""

    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    s: float
    tag: str
    residual: float = 0.0

    @property
    def matrix(self):
        return np.column_stack([self.p, self.q, self.r])

    @property
    def dual(self):
        """Rows are ``p*, q*, r*``."""
        return np.linalg.inv(self.matrix)

    @property
    def p_star(self):
        return self.dual[0]

    @property
    def q_star(self):
        return self.dual[1]

    @property
    def r_star(self):
        return self.dual[2]

    @property
    def det(self):
        return float(np.linalg.det(self.matrix))

    def coordinates(self, vectors):
        return np.asarray(vectors, dtype=float) @ self.dual.T

    def swapped(self):
        """Same cone with the roles of ``p`` and ``q`` exchanged."""
        return ConeBasis(self.q, self.p, self.r, self.s, self.tag, self.residual)

    def cone_residual(self, directions):
        d = np.asarray(directions, dtype=float).reshape(-1, 3)
        if len(d) == 0:
            return 0.0
        d = d / np.linalg.norm(d, axis=1)[:, None]
        x, y, z = self.coordinates(d).T
        return float(np.max(np.abs(x * y - self.s * z * z)))


def mirror_basis(cone, tol=1e-8):
    """Mirror basis of a nondegenerate elliptic cone or a pair of planes."""
    tag = cone.tag
    if tag not in (ELLIPTIC, TWO_PLANES):
        raise BasisConstructionError(f"no mirror basis for a cone tagged {tag!r}")
    q = cone.matrix
    w, _ = jacobi_eigh(q)
    if tag == ELLIPTIC and _signature(w)[0] == 1:
        q = -q
    w, vecs = jacobi_eigh(q)
    l1, l2, l3 = w
    e1, e2, e3 = vecs.T
    r = e2
    if tag == ELLIPTIC:
        a, b = np.sqrt(-l3), np.sqrt(l1)
        p = (a * e1 + b * e3) / np.sqrt(l1 - l3)
        qv = (-a * e1 + b * e3) / np.sqrt(l1 - l3)
        s = float(-(r @ q @ r) / (2.0 * (p @ q @ qv)))
    else:
        n_a = _unit(np.sqrt(l1) * e1 - np.sqrt(-l3) * e3)
        n_b = _unit(np.sqrt(l1) * e1 + np.sqrt(-l3) * e3)
        p = _unit(np.cross(n_a, r))
        qv = _unit(np.cross(r, n_b))
        s = 0.0
    basis = ConeBasis(p, qv, r, s, tag)
    residual = basis.cone_residual(cone.directions)
    if residual > tol:
        raise BasisConstructionError(f"mirror basis misses the input directions: residual {residual:.3e}")
    return ConeBasis(p, qv, r, s, tag, residual)
