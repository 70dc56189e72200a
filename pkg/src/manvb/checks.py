"""Self-check utilities: finite-difference validation of the gradients.

dense_bound evaluates the one-draw objective from raw arrays using dense
linear algebra, with no orthonormality assumption, so it can be finite-
differenced in every coordinate of (mu, B, d1, d2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .factor_gaussian import NoiseDraw, Parameterization
from .gradients import grad_L2, grad_total
from .models import Model


def dense_bound(mu, b, d1, d2, param: Parameterization, model: Model, noise: NoiseDraw):
    """log h(theta(lambda, noise)) + (1/2) log|Sigma| from raw arrays."""
    b = np.asarray(b, dtype=float)
    if param is Parameterization.S:
        a = b * np.asarray(d1)[np.newaxis, :]
    elif param is Parameterization.G2:
        a = b * np.asarray(d1)[:, np.newaxis]
    else:
        a = b
    theta = mu + a @ noise.z + np.asarray(d2) * noise.eps
    sigma = a @ a.T + np.diag(np.asarray(d2) ** 2)
    _, logdet = np.linalg.slogdet(sigma)
    return model.log_h(theta) + 0.5 * logdet


def dense_logdet_half(b, d1, d2, param: Parameterization):
    b = np.asarray(b, dtype=float)
    if param is Parameterization.S:
        a = b * np.asarray(d1)[np.newaxis, :]
    elif param is Parameterization.G2:
        a = b * np.asarray(d1)[:, np.newaxis]
    else:
        a = b
    sigma = a @ a.T + np.diag(np.asarray(d2) ** 2)
    _, logdet = np.linalg.slogdet(sigma)
    return 0.5 * logdet


def _fd_blocks(fn, blocks: dict, step: float):
    """Central finite differences of a scalar function of named arrays."""
    out = {}
    for name, value in blocks.items():
        if value is None:
            out[name] = None
            continue
        value = np.asarray(value, dtype=float)
        grad = np.zeros_like(value)
        flat = grad.ravel()
        for idx in range(value.size):
            bumped = value.copy().ravel()
            bumped[idx] += step
            hi = fn(**{**blocks, name: bumped.reshape(value.shape)})
            bumped[idx] -= 2 * step
            lo = fn(**{**blocks, name: bumped.reshape(value.shape)})
            flat[idx] = (hi - lo) / (2 * step)
        out[name] = grad
    return out


def _rel_err(analytic, numeric) -> float:
    if analytic is None and numeric is None:
        return 0.0
    denom = max(float(np.max(np.abs(numeric))), 1e-10)
    return float(np.max(np.abs(analytic - numeric))) / denom


@dataclass
class CheckResult:
    name: str
    rel_err: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol


def gradient_check(
    lam, model: Model, noise: NoiseDraw, step: float = 1e-5,
    tol_stochastic: float = 1e-5, tol_exact: float = 1e-7,
) -> list[CheckResult]:
    """Compare analytic gradients with finite differences at one lambda."""
    blocks = {"mu": lam.mu, "b": lam.b.matrix, "d1": lam.d1, "d2": lam.d2}

    def total_fn(mu, b, d1, d2):
        return dense_bound(mu, b, d1, d2, lam.param, model, noise)

    def l2_fn(mu, b, d1, d2):
        return dense_logdet_half(b, d1, d2, lam.param)

    fd_total = _fd_blocks(total_fn, blocks, step)
    fd_l2 = _fd_blocks(l2_fn, blocks, step)
    analytic_total = grad_total(lam, model, noise)
    analytic_l2 = grad_L2(lam)

    tag = lam.param.value
    results = [
        CheckResult(f"{tag}/total/mu", _rel_err(analytic_total.g_mu, fd_total["mu"]), tol_stochastic),
        CheckResult(f"{tag}/total/B", _rel_err(analytic_total.g_b, fd_total["b"]), tol_stochastic),
        CheckResult(f"{tag}/total/d2", _rel_err(analytic_total.g_d2, fd_total["d2"]), tol_stochastic),
        CheckResult(f"{tag}/logdet/B", _rel_err(analytic_l2.g_b, fd_l2["b"]), tol_exact),
        CheckResult(f"{tag}/logdet/d2", _rel_err(analytic_l2.g_d2, fd_l2["d2"]), tol_exact),
    ]
    if lam.d1 is not None:
        results.insert(
            3, CheckResult(f"{tag}/total/d1", _rel_err(analytic_total.g_d1, fd_total["d1"]), tol_stochastic)
        )
        results.append(
            CheckResult(f"{tag}/logdet/d1", _rel_err(analytic_l2.g_d1, fd_l2["d1"]), tol_exact)
        )
    return results
