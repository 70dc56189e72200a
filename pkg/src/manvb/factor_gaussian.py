"""Gaussian variational family with an orthonormal factor covariance.

Three parameterizations of the covariance are supported, all of the form
"low rank plus diagonal" with the factor constrained to a manifold:

  S   Sigma = B D1^2 B^T + D2^2   (B Stiefel, d1 of length p)
  G1  Sigma = B B^T + D2^2        (B Grassmann, no d1)
  G2  Sigma = D1 B B^T D1 + D2^2  (B Grassmann, d1 of length m)

Sampling goes through the reparameterization trick; log determinants and
inverse applications use the low-rank structure so no m x m matrix is
ever formed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, IllConditionedCovarianceError
from .manifolds import ManifoldKind, ManifoldPoint

D2_FLOOR = 1e-8


class Parameterization(enum.Enum):
    S = "S"
    G1 = "G1"
    G2 = "G2"

    @property
    def manifold_kind(self) -> ManifoldKind:
        return ManifoldKind.STIEFEL if self is Parameterization.S else ManifoldKind.GRASSMANN


@dataclass(frozen=True, eq=False)
class NoiseDraw:
    """One standard normal draw (z in R^p, eps in R^m)."""

    z: np.ndarray
    eps: np.ndarray

    @classmethod
    def sample(cls, m: int, p: int, rng: np.random.Generator) -> "NoiseDraw":
        return cls(rng.standard_normal(p), rng.standard_normal(m))


@dataclass(frozen=True, eq=False)
class VariationalParams:
    """The variational parameter tuple (mu, B, d1, d2).

    d1 is length p for S, length m for G2 and must be None for G1.  The
    entries of d1 and d2 are unconstrained reals; only their squares enter
    the covariance.  |d2_i| must stay above D2_FLOOR so the diagonal part
    keeps the covariance invertible.
    """

    mu: np.ndarray
    b: ManifoldPoint
    d1: np.ndarray | None
    d2: np.ndarray
    param: Parameterization

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        d2 = np.asarray(self.d2, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "d2", d2)
        m, p = self.b.shape
        if mu.shape != (m,):
            raise DimensionError(f"mu has shape {mu.shape}, expected ({m},)")
        if d2.shape != (m,):
            raise DimensionError(f"d2 has shape {d2.shape}, expected ({m},)")
        if self.b.kind is not self.param.manifold_kind:
            raise DimensionError(
                f"{self.param.value} requires a {self.param.manifold_kind.value} point"
            )
        if self.param is Parameterization.G1:
            if self.d1 is not None:
                raise DimensionError("G1 has no d1 slot")
        else:
            d1 = np.asarray(self.d1, dtype=float)
            object.__setattr__(self, "d1", d1)
            want = p if self.param is Parameterization.S else m
            if d1.shape != (want,):
                raise DimensionError(f"d1 has shape {d1.shape}, expected ({want},)")
        if not np.min(np.abs(d2)) >= D2_FLOOR:
            raise DimensionError(
                f"|d2| entries must be >= {D2_FLOOR:g} (got min {np.min(np.abs(d2)):g})"
            )

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def n_factors(self) -> int:
        return self.b.shape[1]


def clamp_d2(d2: np.ndarray, floor: float = D2_FLOOR) -> np.ndarray:
    """Push |d2| entries up to the floor, keeping their signs."""
    signs = np.where(d2 < 0, -1.0, 1.0)
    return signs * np.maximum(np.abs(d2), floor)


def factor_matrix(lam: VariationalParams) -> np.ndarray:
    """The m x p matrix A with Sigma = A A^T + D2^2."""
    b = lam.b.matrix
    if lam.param is Parameterization.S:
        return b * lam.d1[np.newaxis, :]
    if lam.param is Parameterization.G2:
        return b * lam.d1[:, np.newaxis]
    return b


def sample_theta(lam: VariationalParams, noise: NoiseDraw) -> np.ndarray:
    """theta = mu + (factor term) z + d2 * eps."""
    z = np.asarray(noise.z, dtype=float)
    eps = np.asarray(noise.eps, dtype=float)
    m, p = lam.b.shape
    if z.shape != (p,) or eps.shape != (m,):
        raise DimensionError(
            f"noise shapes {z.shape}/{eps.shape} do not match (p={p}, m={m})"
        )
    b = lam.b.matrix
    if lam.param is Parameterization.S:
        low_rank = b @ (lam.d1 * z)
    elif lam.param is Parameterization.G2:
        low_rank = lam.d1 * (b @ z)
    else:
        low_rank = b @ z
    return lam.mu + low_rank + lam.d2 * eps


def cov_matrix(lam: VariationalParams) -> np.ndarray:
    """Dense covariance; for tests and small m only."""
    a = factor_matrix(lam)
    return a @ a.T + np.diag(lam.d2**2)


def _capacitance_cholesky(lam: VariationalParams):
    """Lower Cholesky factor of C = I_p + A^T D2^(-2) A, plus D2^(-2) A.

    C is the p x p matrix the Woodbury identity and the determinant lemma
    both reduce to.
    """
    a = factor_matrix(lam)
    w = 1.0 / lam.d2**2
    wa = a * w[:, np.newaxis]
    c = np.eye(a.shape[1]) + a.T @ wa
    try:
        chol = scipy.linalg.cholesky(c, lower=True)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        # ValueError covers non-finite input rejected by the factorization
        raise IllConditionedCovarianceError(
            f"capacitance matrix could not be factorized: {exc}"
        ) from exc
    if not np.all(np.isfinite(chol)):
        raise IllConditionedCovarianceError("capacitance factor is not finite")
    return chol, a, wa, w


def log_det_sigma(lam: VariationalParams) -> float:
    """log |Sigma| via the matrix determinant lemma.

    log|A A^T + D2^2| = log|I_p + A^T D2^(-2) A| + sum_i log d2_i^2.
    """
    chol, _, _, _ = _capacitance_cholesky(lam)
    return 2.0 * float(np.sum(np.log(np.diag(chol)))) + 2.0 * float(
        np.sum(np.log(np.abs(lam.d2)))
    )


def _apply_inverse_factored(chol, wa, w, v: np.ndarray) -> np.ndarray:
    wv = v * w[:, np.newaxis]
    inner = scipy.linalg.cho_solve((chol, True), wa.T @ v)
    return wv - wa @ inner


def sigma_inverse_apply(lam: VariationalParams, v: np.ndarray) -> np.ndarray:
    """Sigma^(-1) V via the Woodbury identity.

    Sigma^(-1) = D2^(-2) - D2^(-2) A C^(-1) A^T D2^(-2) with
    C = I_p + A^T D2^(-2) A.  Cost O(m p k + p^3) for an m x k input.
    """
    v = np.asarray(v, dtype=float)
    squeeze = v.ndim == 1
    if squeeze:
        v = v[:, np.newaxis]
    if v.shape[0] != lam.dim:
        raise DimensionError(f"V has {v.shape[0]} rows, expected {lam.dim}")
    chol, _, wa, w = _capacitance_cholesky(lam)
    out = _apply_inverse_factored(chol, wa, w, v)
    return out[:, 0] if squeeze else out


def sigma_inverse_diag(lam: VariationalParams) -> np.ndarray:
    """diag(Sigma^(-1)) without forming any m x m matrix.

    diag(D2^(-2) A C^(-1) A^T D2^(-2))_i is the squared norm of the i-th
    column of L^(-1) (D2^(-2) A)^T, so the whole diagonal costs O(m p^2).
    """
    chol, _, wa, w = _capacitance_cholesky(lam)
    y = scipy.linalg.solve_triangular(chol, wa.T, lower=True)
    return w - np.einsum("ij,ij->j", y, y)


def elbo_estimate(lam: VariationalParams, model, noise: NoiseDraw) -> float:
    """Single-draw estimate of the lower bound, constants dropped.

    Additive constants independent of the variational parameters, namely
    -(m/2)(log 2pi + 1) from the entropy, are omitted throughout.
    """
    theta = sample_theta(lam, noise)
    return float(model.log_h(theta)) + 0.5 * log_det_sigma(lam)
