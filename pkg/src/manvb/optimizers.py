"""Update rules for the factor matrix and the unconstrained parameters.

Four manifold rules for B (plain Riemannian ascent, momentum, a revised
RMSProp, and a learning-rate-free ADADELTA analogue) plus classical
Euclidean ADADELTA for mu, d1, d2.  Every rule here performs ASCENT on
the lower bound; gradients arriving from the gradients module are ascent
gradients, so no caller ever negates anything.

The RMSProp squared-gradient average lives in tangent coordinates and is
transported (projected at the new base) every step.  Transport can make
entries negative, so square roots are taken as sgn(x) * sqrt(|x|), kept
in that form rather than "fixed" by clamping.  The ADADELTA accumulators
are the exception and stay in ambient coordinates; see
step_rgd_adadelta for why transporting them diverges.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import NumericalError
from .factor_gaussian import VariationalParams
from .manifolds import (
    ManifoldPoint,
    TangentVector,
    project,
    project_array,
    retract_array,
)


class RuleKind(enum.Enum):
    RGD_BASIC = "rgd-basic"
    CRGD_M = "crgd-m"
    RMSPROP = "rmsprop"
    RGD_ADADELTA = "rgd-adadelta"


@dataclass(frozen=True)
class HyperParams:
    eta: float = 0.05
    zeta: float = 0.95
    epsilon: float = 1e-6
    adadelta_rho: float = 0.95
    adadelta_eps: float = 1e-6

    def __post_init__(self):
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if not 0 < self.zeta < 1:
            raise ValueError("zeta must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 < self.adadelta_rho < 1:
            raise ValueError("adadelta_rho must lie in (0, 1)")
        if self.adadelta_eps <= 0:
            raise ValueError("adadelta_eps must be positive")


@dataclass(frozen=True)
class AdadeltaState:
    """Accumulators for one Euclidean parameter block."""

    sq_grad: np.ndarray
    sq_step: np.ndarray

    @classmethod
    def zeros(cls, shape) -> "AdadeltaState":
        return cls(np.zeros(shape), np.zeros(shape))


@dataclass(frozen=True)
class OptimizerState:
    """Everything carried across iterations.

    The B accumulators are stored as raw matrices; momentum and sq_grad_avg
    are tangent at prev_point, sq_step_avg is tangent at prev_prev_point's
    successor (it is updated with projections at the lagged base, exactly
    following the update equations).
    """

    momentum: np.ndarray | None = None
    sq_grad_avg: np.ndarray | None = None
    sq_step_avg: np.ndarray | None = None
    prev_point: ManifoldPoint | None = None
    prev_prev_point: ManifoldPoint | None = None
    step_count: int = 0
    euclid_mu: AdadeltaState | None = None
    euclid_d1: AdadeltaState | None = None
    euclid_d2: AdadeltaState | None = None

    @classmethod
    def initial(cls, lam: VariationalParams) -> "OptimizerState":
        return cls(
            euclid_mu=AdadeltaState.zeros(lam.mu.shape),
            euclid_d1=None if lam.d1 is None else AdadeltaState.zeros(lam.d1.shape),
            euclid_d2=AdadeltaState.zeros(lam.d2.shape),
        )


def _signed_sqrt(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.sqrt(np.abs(x))


def riemann_grad(point: ManifoldPoint, g_b: np.ndarray) -> TangentVector:
    """Riemannian gradient: projection of the Euclidean gradient."""
    return project(point, g_b)


def step_rgd_basic(
    point: ManifoldPoint, rgrad: TangentVector, eta: float
) -> ManifoldPoint:
    """One fixed-step Riemannian ascent step."""
    return ManifoldPoint(
        retract_array(point.kind, point.matrix, eta * rgrad.matrix), point.kind
    )


def step_crgd_m(
    point: ManifoldPoint,
    rgrad: TangentVector,
    state: OptimizerState,
    hyper: HyperParams,
) -> tuple[ManifoldPoint, OptimizerState]:
    """Momentum ascent; the momentum is transported to the current point.

    With zero stored momentum (first call) this reduces to the basic step
    whatever zeta is.
    """
    if state.momentum is None:
        carried = np.zeros(point.shape)
    else:
        carried = project_array(point.kind, point.matrix, state.momentum)
    m_new = hyper.zeta * carried + hyper.eta * rgrad.matrix
    new_point = ManifoldPoint(
        retract_array(point.kind, point.matrix, m_new), point.kind
    )
    new_state = replace(
        state,
        momentum=m_new,
        prev_point=point,
        prev_prev_point=state.prev_point,
        step_count=state.step_count + 1,
    )
    return new_point, new_state


def step_rmsprop(
    point: ManifoldPoint,
    g_b: np.ndarray,
    state: OptimizerState,
    hyper: HyperParams,
) -> tuple[ManifoldPoint, OptimizerState]:
    """Ascent with the elementwise-normalized Euclidean gradient.

    The squared-gradient average is transported (projected) each step, so
    its entries can go negative; the signed square root keeps the
    normalization defined.  A non-finite normalized entry raises.
    """
    zeta = hyper.zeta
    if state.sq_grad_avg is None:
        carried = np.zeros(point.shape)
    else:
        carried = project_array(point.kind, point.matrix, state.sq_grad_avg)
    accum = zeta * carried + (1.0 - zeta) * project_array(
        point.kind, point.matrix, g_b * g_b
    )
    normalized = g_b / (_signed_sqrt(accum) + hyper.epsilon)
    if not np.all(np.isfinite(normalized)):
        raise NumericalError("normalized gradient is not finite", value=normalized)
    step = hyper.eta * project_array(point.kind, point.matrix, normalized)
    new_point = ManifoldPoint(
        retract_array(point.kind, point.matrix, step), point.kind
    )
    new_state = replace(
        state,
        sq_grad_avg=accum,
        prev_point=point,
        prev_prev_point=state.prev_point,
        step_count=state.step_count + 1,
    )
    return new_point, new_state


def step_rgd_adadelta(
    point: ManifoldPoint,
    g_b: np.ndarray,
    state: OptimizerState,
    hyper: HyperParams,
) -> tuple[ManifoldPoint, OptimizerState]:
    """Learning-rate-free rule with self-scaled steps.

    Update order: squared-gradient average, then the step scaled by the
    PREVIOUS squared-step average, then the squared-step average itself,
    and finally the projected step is retracted.

    The two averages are plain entrywise accumulators over the ambient
    matrix coordinates.  Transporting them between tangent spaces (the
    signed square root below exists to tolerate exactly that) makes the
    rule diverge: projecting an entrywise-positive matrix cancels entries
    by O(1), the projected squared-gradient average then underestimates
    the gradient scale wherever the cancellation hits, and the squared-
    step recursion compounds the overestimated ratio geometrically until
    it overflows, on either manifold, within a few thousand iterations.
    Keeping the accumulators ambient restores the classical contraction
    argument while the update itself stays constrained: only the
    projected step reaches the retraction, so the iterate never leaves
    the manifold.
    """
    zeta = hyper.zeta
    zeros = np.zeros(point.shape)
    g2_old = state.sq_grad_avg if state.sq_grad_avg is not None else zeros
    dx2_old = state.sq_step_avg if state.sq_step_avg is not None else zeros

    g2_new = zeta * g2_old + (1.0 - zeta) * g_b * g_b

    numer = _signed_sqrt(dx2_old) + hyper.epsilon
    denom = _signed_sqrt(g2_new) + hyper.epsilon
    delta = (numer / denom) * g_b
    if not np.all(np.isfinite(delta)):
        raise NumericalError("self-scaled step is not finite", value=delta)

    dx2_new = zeta * dx2_old + (1.0 - zeta) * delta * delta

    step = project_array(point.kind, point.matrix, delta)
    new_point = ManifoldPoint(
        retract_array(point.kind, point.matrix, step), point.kind
    )
    new_state = replace(
        state,
        sq_grad_avg=g2_new,
        sq_step_avg=dx2_new,
        prev_point=point,
        prev_prev_point=state.prev_point,
        step_count=state.step_count + 1,
    )
    return new_point, new_state


def step_euclidean_adadelta(
    value: np.ndarray,
    grad: np.ndarray,
    state: AdadeltaState,
    hyper: HyperParams,
) -> tuple[np.ndarray, AdadeltaState]:
    """Classical ADADELTA, ascent orientation."""
    rho, eps = hyper.adadelta_rho, hyper.adadelta_eps
    sq_grad = rho * state.sq_grad + (1.0 - rho) * grad * grad
    step = np.sqrt((state.sq_step + eps) / (sq_grad + eps)) * grad
    sq_step = rho * state.sq_step + (1.0 - rho) * step * step
    return value + step, AdadeltaState(sq_grad, sq_step)


def step_b(
    rule: RuleKind,
    point: ManifoldPoint,
    g_b: np.ndarray,
    state: OptimizerState,
    hyper: HyperParams,
) -> tuple[ManifoldPoint, OptimizerState]:
    """Dispatch one B update by rule, given the Euclidean ascent gradient."""
    if rule is RuleKind.RGD_BASIC:
        new_point = step_rgd_basic(point, riemann_grad(point, g_b), hyper.eta)
        return new_point, replace(
            state,
            prev_point=point,
            prev_prev_point=state.prev_point,
            step_count=state.step_count + 1,
        )
    if rule is RuleKind.CRGD_M:
        return step_crgd_m(point, riemann_grad(point, g_b), state, hyper)
    if rule is RuleKind.RMSPROP:
        return step_rmsprop(point, g_b, state, hyper)
    if rule is RuleKind.RGD_ADADELTA:
        return step_rgd_adadelta(point, g_b, state, hyper)
    raise ValueError(f"unknown rule {rule}")
