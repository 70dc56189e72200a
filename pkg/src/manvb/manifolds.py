"""Geometry of the Stiefel and Grassmann manifolds.

Points are m x p matrices with orthonormal columns.  A Stiefel point is
the matrix itself; a Grassmann point is the subspace spanned by the
columns, represented by any orthonormal basis.  The module provides the
four operations a Riemannian first-order method needs: tangent
projection, retraction, vector transport, and random initialization.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRetractionError, DimensionError, GeometryError

ORTH_TOL = 1e-10
TANGENT_TOL = 1e-9

# Grassmann polar retraction needs B + U to keep full column rank.
_MIN_SINGULAR_VALUE = 1e-12


class ManifoldKind(enum.Enum):
    STIEFEL = "stiefel"
    GRASSMANN = "grassmann"


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d matrix, got shape {a.shape}")
    return a


def orthonormality_residual(matrix: np.ndarray) -> float:
    """Frobenius norm of B^T B - I."""
    b = _as_matrix(matrix)
    p = b.shape[1]
    return float(np.linalg.norm(b.T @ b - np.eye(p)))


@dataclass(frozen=True, eq=False)
class ManifoldPoint:
    """An orthonormal m x p matrix together with its manifold kind."""

    matrix: np.ndarray
    kind: ManifoldKind

    def __post_init__(self):
        b = _as_matrix(self.matrix).copy()
        b.setflags(write=False)
        object.__setattr__(self, "matrix", b)
        m, p = b.shape
        if not (1 <= p <= m):
            raise DimensionError(f"need 1 <= p <= m, got m={m}, p={p}")
        res = orthonormality_residual(b)
        if not res <= ORTH_TOL:
            raise GeometryError(
                f"columns are not orthonormal: ||B^T B - I||_F = {res:.3e}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def orth_residual(self) -> float:
        return orthonormality_residual(self.matrix)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """An m x p matrix lying in the tangent space at ``base``.

    Stiefel tangents satisfy sym(B^T U) = 0; Grassmann tangents satisfy
    B^T U = 0.
    """

    matrix: np.ndarray
    base: ManifoldPoint

    def __post_init__(self):
        u = _as_matrix(self.matrix).copy()
        u.setflags(write=False)
        object.__setattr__(self, "matrix", u)
        if u.shape != self.base.shape:
            raise DimensionError(
                f"tangent shape {u.shape} != base shape {self.base.shape}"
            )
        res = tangency_residual(self.base, u)
        # The tolerance is relative to the vector's own magnitude: the
        # rounding floor of one projection scales with ||U||, so an
        # absolute bound would reject exact projections of large
        # gradients.  At unit scale this is the plain absolute check.
        if not res <= TANGENT_TOL * max(1.0, float(np.linalg.norm(u))):
            raise GeometryError(
                f"matrix is not tangent at base: residual {res:.3e}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def tangency_residual(point: ManifoldPoint, u: np.ndarray) -> float:
    """How far ``u`` is from the tangent space at ``point``."""
    btu = point.matrix.T @ u
    if point.kind is ManifoldKind.STIEFEL:
        return float(np.linalg.norm(0.5 * (btu + btu.T)))
    return float(np.linalg.norm(btu))


def project_array(kind: ManifoldKind, b: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Tangent projection acting on raw arrays.

    Computed as Z - B sym(B^T Z) (Stiefel) or Z - B (B^T Z) (Grassmann);
    the m x m projector is never materialized.
    """
    btz = b.T @ z
    if kind is ManifoldKind.STIEFEL:
        return z - b @ (0.5 * (btz + btz.T))
    return z - b @ btz


def project(point: ManifoldPoint, z) -> TangentVector:
    """Project an ambient matrix onto the tangent space at ``point``."""
    z = _as_matrix(z)
    if z.shape != point.shape:
        raise DimensionError(f"ambient shape {z.shape} != point shape {point.shape}")
    return TangentVector(project_array(point.kind, point.matrix, z), point)


def retract_array(kind: ManifoldKind, b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Retraction acting on raw arrays, returning an orthonormal matrix."""
    x = b + u
    if kind is ManifoldKind.STIEFEL:
        # (B + U)(I + U^T U)^(-1/2); the p x p Gram matrix is SPD with
        # eigenvalues >= 1, so the eigendecomposition is safe.
        p = b.shape[1]
        gram = np.eye(p) + u.T @ u
        w, v = np.linalg.eigh(gram)
        inv_sqrt = (v / np.sqrt(w)) @ v.T
        out = x @ inv_sqrt
        # The closed form assumes sym(B^T U) = 0 exactly; for very large
        # tangents its float evaluation can sit right at the tolerance.
        # One polar pass then restores orthonormality without moving the
        # point beyond rounding level.
        if orthonormality_residual(out) > 0.5 * ORTH_TOL:
            left, _, right_t = np.linalg.svd(out, full_matrices=False)
            out = left @ right_t
        return out
    # Grassmann: polar factor of B + U via thin SVD.
    left, sing, right_t = np.linalg.svd(x, full_matrices=False)
    if not sing[-1] >= _MIN_SINGULAR_VALUE:
        raise DegenerateRetractionError(
            f"B + U is rank deficient (smallest singular value {sing[-1]:.3e})"
        )
    return left @ right_t


def retract(point: ManifoldPoint, u: TangentVector) -> ManifoldPoint:
    """Map a tangent vector back onto the manifold."""
    if u.base is not point and (
        u.base.kind is not point.kind
        or not np.array_equal(u.base.matrix, point.matrix)
    ):
        raise GeometryError("tangent vector is not based at the given point")
    return ManifoldPoint(retract_array(point.kind, point.matrix, u.matrix), point.kind)


def transport(
    b_from: ManifoldPoint, b_to: ManifoldPoint, u: TangentVector
) -> TangentVector:
    """Carry a tangent vector from ``b_from`` to ``b_to``.

    Realized as projection at the destination, which is the standard
    vector transport on both manifolds.
    """
    if b_from.kind is not b_to.kind:
        raise GeometryError(
            f"cannot transport between {b_from.kind.value} and {b_to.kind.value}"
        )
    if b_from.shape != b_to.shape:
        raise DimensionError(
            f"point shapes differ: {b_from.shape} vs {b_to.shape}"
        )
    if u.base.kind is not b_from.kind or u.shape != b_from.shape:
        raise GeometryError("tangent vector does not live at the source point")
    return project(b_to, u.matrix)


def random_point(
    m: int, p: int, kind: ManifoldKind, rng: np.random.Generator
) -> ManifoldPoint:
    """Draw a uniformly random orthonormal m x p matrix.

    Thin QR of a standard normal draw, with the sign of each column fixed
    so the R factor has a nonnegative diagonal.  Deterministic for a given
    generator state.
    """
    if not (1 <= p <= m):
        raise DimensionError(f"need 1 <= p <= m, got m={m}, p={p}")
    a = rng.standard_normal((m, p))
    q, r = np.linalg.qr(a)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return ManifoldPoint(q * signs, kind)


def zero_tangent(point: ManifoldPoint) -> TangentVector:
    return TangentVector(np.zeros(point.shape), point)
