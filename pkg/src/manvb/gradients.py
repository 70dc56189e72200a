"""Euclidean gradients of the stochastic lower bound.

The bound splits as L = L1 + L2 where L1 is the reparameterized
expectation of log h and L2 = (1/2) log|Sigma|.  grad_L1 is a one-draw
unbiased estimator; grad_L2 is exact.  All gradients are for the
maximization of L; the optimizers apply them with the ascent sign.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

import scipy.linalg

from .errors import NumericalError
from .factor_gaussian import (
    NoiseDraw,
    Parameterization,
    VariationalParams,
    _apply_inverse_factored,
    _capacitance_cholesky,
    sample_theta,
)


@dataclass
class EuclideanGrad:
    """Gradient blocks matching the layout of VariationalParams."""

    g_mu: np.ndarray
    g_b: np.ndarray
    g_d1: np.ndarray | None
    g_d2: np.ndarray

    def __add__(self, other: "EuclideanGrad") -> "EuclideanGrad":
        if (self.g_d1 is None) != (other.g_d1 is None):
            raise ValueError("cannot add gradients with mismatched d1 blocks")
        g_d1 = None if self.g_d1 is None else self.g_d1 + other.g_d1
        return EuclideanGrad(
            self.g_mu + other.g_mu,
            self.g_b + other.g_b,
            g_d1,
            self.g_d2 + other.g_d2,
        )

    def is_finite(self) -> bool:
        blocks = [self.g_mu, self.g_b, self.g_d2]
        if self.g_d1 is not None:
            blocks.append(self.g_d1)
        return all(np.all(np.isfinite(x)) for x in blocks)


def grad_L1_from_model_grad(
    lam: VariationalParams, noise: NoiseDraw, g: np.ndarray
) -> EuclideanGrad:
    """Assemble the L1 gradient blocks from g = grad_theta log h(theta).

    The d2 block is the elementwise product g * eps in every
    parameterization; writing it as diag(g eps^T) would build an m x m
    outer product for no benefit.
    """
    z, eps = noise.z, noise.eps
    b = lam.b.matrix
    if lam.param is Parameterization.S:
        g_b = np.outer(g, z * lam.d1)
        g_d1 = (b.T @ g) * z
    elif lam.param is Parameterization.G2:
        g_b = np.outer(g * lam.d1, z)
        g_d1 = g * (b @ z)
    else:
        g_b = np.outer(g, z)
        g_d1 = None
    return EuclideanGrad(g.copy(), g_b, g_d1, g * eps)


def grad_L1(lam: VariationalParams, model, noise: NoiseDraw) -> EuclideanGrad:
    """One-draw estimator of the gradient of E_f[log h(theta(lambda))]."""
    theta = sample_theta(lam, noise)
    g = np.asarray(model.grad_log_h(theta), dtype=float)
    if not np.all(np.isfinite(g)):
        raise NumericalError("model gradient is not finite", value=theta)
    return grad_L1_from_model_grad(lam, noise, g)


def grad_L2_and_logdet(lam: VariationalParams) -> tuple[EuclideanGrad, float]:
    """Exact gradient of (1/2) log|Sigma| plus log|Sigma| itself.

    Shares one capacitance factorization between the two, which the
    driver exploits every iteration.  Every Sigma^(-1) application goes
    through the Woodbury form, and the diagonal of Sigma^(-1) uses the
    O(m p^2) low-rank path, so nothing here scales with m^2.
    """
    b = lam.b.matrix
    m, _ = lam.b.shape
    chol, a, wa, w = _capacitance_cholesky(lam)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol)))) + 2.0 * float(
        np.sum(np.log(np.abs(lam.d2)))
    )
    y = scipy.linalg.solve_triangular(chol, wa.T, lower=True)
    diag_inv = w - np.einsum("ij,ij->j", y, y)
    if lam.param is Parameterization.S:
        si_b = _apply_inverse_factored(chol, wa, w, b)
        g_b = si_b * (lam.d1**2)[np.newaxis, :]
        g_d1 = np.einsum("ij,ij->j", b, si_b) * lam.d1
    elif lam.param is Parameterization.G2:
        si_d1b = _apply_inverse_factored(chol, wa, w, a)
        g_b = lam.d1[:, np.newaxis] * si_d1b
        g_d1 = np.einsum("ij,ij->i", si_d1b, b)
    else:
        g_b = _apply_inverse_factored(chol, wa, w, b)
        g_d1 = None
    grad = EuclideanGrad(np.zeros(m), g_b, g_d1, diag_inv * lam.d2)
    return grad, logdet


def grad_L2(lam: VariationalParams) -> EuclideanGrad:
    """Exact gradient of (1/2) log|Sigma|."""
    return grad_L2_and_logdet(lam)[0]


def grad_total(lam: VariationalParams, model, noise: NoiseDraw) -> EuclideanGrad:
    """Gradient of the full one-draw bound estimate, L1 + L2."""
    return grad_L1(lam, model, noise) + grad_L2(lam)
