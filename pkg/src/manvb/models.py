"""Target posteriors: log h(theta) = log p(theta) + log p(y | theta).

Two logistic regression models (Gaussian prior and horseshoe prior) plus
a Gaussian target used as an exact-posterior oracle in tests.  Each model
exposes log_h, grad_log_h, and a fused log_h_and_grad so the driver can
reuse one likelihood evaluation per iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix with the intercept column already included, labels in {0,1}."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "y", y)
        if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
            raise DimensionError(
                f"inconsistent dataset shapes X={x.shape}, y={y.shape}"
            )
        if x.shape[0] < 1:
            raise DimensionError("dataset is empty")
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
            raise DimensionError("dataset contains non-finite entries")
        if not set(np.unique(y)) <= {0.0, 1.0}:
            raise DimensionError(f"labels must be 0/1, got {np.unique(y)}")

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]


class Model:
    """Interface: an unnormalized log posterior over a theta vector."""

    dim: int

    def log_h(self, theta: np.ndarray) -> float:
        return self.log_h_and_grad(theta)[0]

    def grad_log_h(self, theta: np.ndarray) -> np.ndarray:
        return self.log_h_and_grad(theta)[1]

    def log_h_and_grad(self, theta: np.ndarray) -> tuple[float, np.ndarray]:
        raise NotImplementedError


def _sigmoid(eta: np.ndarray) -> np.ndarray:
    out = np.empty_like(eta)
    pos = eta >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-eta[pos]))
    ex = np.exp(eta[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log1p_exp(eta: np.ndarray) -> np.ndarray:
    """log(1 + exp(eta)), branching on the sign so nothing overflows."""
    return np.maximum(eta, 0.0) + np.log1p(np.exp(-np.abs(eta)))


def _logistic_loglik_and_grad(data: Dataset, beta: np.ndarray):
    eta = data.X @ beta
    loglik = float(np.sum(data.y * eta - _log1p_exp(eta)))
    grad = data.X.T @ (data.y - _sigmoid(eta))
    return loglik, grad


def logistic_gaussian_log_h(
    data: Dataset, prior_sd: float, theta: np.ndarray
) -> tuple[float, np.ndarray]:
    """Logistic regression with an isotropic N(0, prior_sd^2 I) prior.

    Returns log h(theta) up to the prior's normalizing constant, together
    with its gradient.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (data.n_features,):
        raise DimensionError(
            f"theta has shape {theta.shape}, expected ({data.n_features},)"
        )
    loglik, grad = _logistic_loglik_and_grad(data, theta)
    var = prior_sd**2
    return loglik - 0.5 * float(theta @ theta) / var, grad - theta / var


def logistic_horseshoe_log_h(
    data: Dataset, theta_aug: np.ndarray
) -> tuple[float, np.ndarray]:
    """Horseshoe logistic regression in log-scale coordinates.

    theta_aug = (beta in R^m, kappa in R^m, omega), length 2m + 1, where
    the local scales are exp(kappa) and the global scale is exp(omega).
    The hierarchy is

        beta_j | kappa_j, omega ~ N(0, exp(2 kappa_j + 2 omega)),
        exp(kappa_j) ~ half-Cauchy(0, 1),   exp(omega) ~ half-Cauchy(0, 1),

    with the log-scale change of variables adding +kappa_j and +omega to
    the log density.  All variance terms are handled in log space so the
    result stays finite for kappa, omega well beyond [-30, 30].
    """
    m = data.n_features
    theta_aug = np.asarray(theta_aug, dtype=float)
    if theta_aug.shape != (2 * m + 1,):
        raise DimensionError(
            f"augmented theta has shape {theta_aug.shape}, expected ({2 * m + 1},)"
        )
    beta = theta_aug[:m]
    kappa = theta_aug[m : 2 * m]
    omega = theta_aug[2 * m]

    loglik, grad_beta_lik = _logistic_loglik_and_grad(data, beta)

    # log N(beta_j | 0, v_j) with log v_j = 2 kappa_j + 2 omega; the ratio
    # beta_j^2 / v_j is formed from logs to dodge overflow.
    log_v = 2.0 * kappa + 2.0 * omega
    with np.errstate(divide="ignore"):
        log_beta_sq = 2.0 * np.log(np.abs(beta))
    ratio = np.exp(np.clip(log_beta_sq - log_v, -np.inf, 700.0))
    log_normal = -0.5 * np.log(2.0 * np.pi) - 0.5 * log_v - 0.5 * ratio

    # log half-Cauchy density of exp(s) plus the Jacobian term s, for
    # s = kappa_j and s = omega: log(2/pi) - log(1 + exp(2s)) + s.
    def half_cauchy_logscale(s):
        return np.log(2.0 / np.pi) - np.logaddexp(0.0, 2.0 * s) + s

    def half_cauchy_grad(s):
        # d/ds [s - log(1 + exp(2s))] = 1 - 2 sigmoid(2s)
        return 1.0 - 2.0 * _sigmoid(np.atleast_1d(2.0 * s))

    log_h = (
        loglik
        + float(np.sum(log_normal))
        + float(np.sum(half_cauchy_logscale(kappa)))
        + float(half_cauchy_logscale(np.array(omega)))
    )

    grad_beta = grad_beta_lik - beta * np.exp(
        np.clip(-log_v, -np.inf, 700.0)
    )
    grad_kappa = (ratio - 1.0) + half_cauchy_grad(kappa)
    grad_omega = float(np.sum(ratio - 1.0)) + float(half_cauchy_grad(omega)[0])

    grad = np.concatenate([grad_beta, grad_kappa, [grad_omega]])
    return log_h, grad


def gaussian_target_log_h(
    mu0: np.ndarray, sigma0: np.ndarray, theta: np.ndarray
) -> tuple[float, np.ndarray]:
    """Unnormalized Gaussian log density, the exact-posterior test oracle."""
    mu0 = np.asarray(mu0, dtype=float)
    theta = np.asarray(theta, dtype=float)
    diff = theta - mu0
    solved = np.linalg.solve(sigma0, diff)
    return -0.5 * float(diff @ solved), -solved


class LogisticGaussianModel(Model):
    def __init__(self, data: Dataset, prior_sd: float = 10.0):
        if prior_sd <= 0:
            raise ValueError("prior_sd must be positive")
        self.data = data
        self.prior_sd = float(prior_sd)
        self.dim = data.n_features

    def log_h_and_grad(self, theta):
        return logistic_gaussian_log_h(self.data, self.prior_sd, theta)


class LogisticHorseshoeModel(Model):
    def __init__(self, data: Dataset):
        self.data = data
        self.dim = 2 * data.n_features + 1

    def log_h_and_grad(self, theta):
        return logistic_horseshoe_log_h(self.data, theta)

    def beta_mean(self, mu: np.ndarray) -> np.ndarray:
        """The regression-coefficient slice of a variational mean."""
        return mu[: self.data.n_features]


class GaussianTargetModel(Model):
    def __init__(self, mu0, sigma0):
        self.mu0 = np.asarray(mu0, dtype=float)
        self.sigma0 = np.asarray(sigma0, dtype=float)
        self.dim = self.mu0.shape[0]
        # symmetry + positive definiteness check up front
        scipy.linalg.cholesky(self.sigma0)

    def log_h_and_grad(self, theta):
        return gaussian_target_log_h(self.mu0, self.sigma0, theta)


def predict_error(data: Dataset, mu: np.ndarray) -> float:
    """Misclassification rate of the plug-in classifier sigma(x^T mu) >= 1/2.

    Ties at exactly 1/2 predict class 1, so mu = 0 labels everything 1.
    """
    mu = np.asarray(mu, dtype=float)
    if data.n_samples == 0:
        raise DimensionError("cannot score an empty dataset")
    if mu.shape != (data.n_features,):
        raise DimensionError(
            f"mu has shape {mu.shape}, expected ({data.n_features},)"
        )
    predicted = (data.X @ mu >= 0.0).astype(float)
    return float(np.mean(predicted != data.y))
