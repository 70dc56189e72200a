"""Experiment driver: the optimization loop, data loading, CV, traces.

The loop follows one fixed recipe per iteration: draw noise, estimate the
Euclidean gradients for the chosen parameterization, update mu/d1/d2 with
Euclidean ADADELTA, project the B gradient, and update B with the chosen
manifold rule.  Iterations with a non-finite objective or gradient leave
the parameters untouched; fifty bad iterations in a row abort the run
with the last good parameters attached.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import os
import struct
import time
import warnings
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateRetractionError,
    DimensionError,
    DivergenceError,
    GeometryError,
    IllConditionedCovarianceError,
    ManvbError,
    NumericalError,
)
from .factor_gaussian import (
    D2_FLOOR,
    NoiseDraw,
    Parameterization,
    VariationalParams,
    clamp_d2,
    sample_theta,
)
from .gradients import grad_L1_from_model_grad, grad_L2_and_logdet
from .manifolds import (
    ManifoldKind,
    ManifoldPoint,
    orthonormality_residual,
    random_point,
)
from .models import (
    Dataset,
    LogisticGaussianModel,
    LogisticHorseshoeModel,
    Model,
    predict_error,
)
from .optimizers import (
    AdadeltaState,
    HyperParams,
    OptimizerState,
    RuleKind,
    step_b,
    step_euclidean_adadelta,
)

MAX_BAD_ITERS = 50


class ParseError(ManvbError, ValueError):
    """A dataset file could not be read; message includes the line number."""


class StratificationError(ManvbError, ValueError):
    """Cross-validation folds cannot be stratified for this label vector."""


@dataclass(frozen=True)
class StoppingRule:
    """Either a fixed iteration budget or a relative-change plateau rule."""

    kind: str = "fixed_iters"  # "fixed_iters" | "rel_change"
    window: int = 5
    tol: float = 0.1
    floor: float = 1e-12
    max_iters: int | None = None

    def __post_init__(self):
        if self.kind not in ("fixed_iters", "rel_change"):
            raise ValueError(f"unknown stopping kind {self.kind!r}")
        if self.window < 1:
            raise ValueError("stopping window must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    parameterization: Parameterization = Parameterization.G1
    rule: RuleKind = RuleKind.RMSPROP
    p: int = 4
    max_iters: int = 5000
    mc_samples: int = 1
    hyper: HyperParams = field(default_factory=HyperParams)
    seed: int = 0
    cv_folds: int = 5
    stopping: StoppingRule = field(default_factory=StoppingRule)
    dataset: str | None = None
    test_dataset: str | None = None
    prior: str = "gaussian"  # "gaussian" | "horseshoe"
    prior_sd: float = 10.0
    trace_path: str | None = None
    trace_every: int = 10
    smooth_window: int = 100
    standardize: bool = True
    label_col: int = -1
    header: str = "auto"  # "auto" | "yes" | "no"
    predict: str = "mean"  # "mean" | "mc:K"
    checkpoint: str | None = None
    summary_path: str | None = None
    wall_clock: bool = True
    workers: int | None = None
    baseline_vafc: bool = False

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.smooth_window < 1:
            raise ValueError("smooth_window must be >= 1")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.prior not in ("gaussian", "horseshoe"):
            raise ValueError(f"unknown prior {self.prior!r}")


@dataclass(frozen=True)
class TraceRecord:
    iter: int
    elbo_sample: float
    elbo_smooth: float
    wall_ms: int
    orth_residual: float


@dataclass
class RunResult:
    lam: VariationalParams
    trace: list[TraceRecord]
    metrics: dict
    elbo_history: np.ndarray
    smooth_history: np.ndarray
    iterations: int
    stopped_early: bool


# --------------------------------------------------------------------
# Baseline mode: B kept as a plain unconstrained matrix.  These stand-ins
# satisfy just enough of the ManifoldPoint/VariationalParams surface for
# the sampling, determinant, and gradient code to run on them.


@dataclass(frozen=True, eq=False)
class _LoosePoint:
    matrix: np.ndarray
    kind: ManifoldKind = ManifoldKind.GRASSMANN

    @property
    def shape(self):
        return self.matrix.shape

    def orth_residual(self) -> float:
        return orthonormality_residual(self.matrix)


@dataclass(frozen=True, eq=False)
class _LooseParams:
    mu: np.ndarray
    b: _LoosePoint
    d1: np.ndarray | None
    d2: np.ndarray
    param: Parameterization

    @property
    def dim(self) -> int:
        return self.mu.shape[0]

    @property
    def n_factors(self) -> int:
        return self.b.shape[1]


def init_lambda(model_dim: int, p: int, parameterization: Parameterization, seed):
    """Starting point: mu = 0, random orthonormal B, d1 = 1, d2 = 0.1."""
    if p > model_dim:
        raise DimensionError(f"p={p} exceeds model dimension {model_dim}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    b = random_point(model_dim, p, parameterization.manifold_kind, rng)
    if parameterization is Parameterization.S:
        d1 = np.ones(p)
    elif parameterization is Parameterization.G2:
        d1 = np.ones(model_dim)
    else:
        d1 = None
    return VariationalParams(
        mu=np.zeros(model_dim),
        b=b,
        d1=d1,
        d2=np.full(model_dim, 0.1),
        param=parameterization,
    )


def check_stopping(smoothed, criterion: StoppingRule) -> bool:
    """Decide whether the smoothed objective series says to stop.

    rel_change: true when the last `window` relative changes of the
    smoothed series all fall below `tol`.  fixed_iters: true once the
    series contains `max_iters` entries.
    """
    n = len(smoothed)
    if criterion.kind == "fixed_iters":
        return criterion.max_iters is not None and n >= criterion.max_iters
    if n < criterion.window + 1:
        return False
    latest = smoothed[-1]
    for k in range(1, criterion.window + 1):
        ref = smoothed[-1 - k]
        change = abs(latest - ref) / max(abs(ref), criterion.floor)
        if not change < criterion.tol:
            return False
    return True


class _Smoother:
    """Trailing moving average that ignores non-finite samples."""

    def __init__(self, window: int):
        self.window = window
        self._buf = deque()
        self._sum = 0.0
        self._count = 0

    def push(self, value: float) -> float:
        finite = np.isfinite(value)
        self._buf.append((value, finite))
        if finite:
            self._sum += value
            self._count += 1
        if len(self._buf) > self.window:
            old, old_finite = self._buf.popleft()
            if old_finite:
                self._sum -= old
                self._count -= 1
        return self._sum / self._count if self._count else float("nan")


def _beta_mean(model: Model, mu: np.ndarray) -> np.ndarray:
    if isinstance(model, LogisticHorseshoeModel):
        return model.beta_mean(mu)
    return mu


def run_model(
    config: RunConfig,
    model: Model,
    train_data: Dataset | None = None,
    test_data: Dataset | None = None,
) -> RunResult:
    """Run the optimization loop against an already-built model."""
    rng = np.random.default_rng(config.seed)
    dim = model.dim
    if config.p > dim:
        raise DimensionError(f"p={config.p} exceeds model dimension {dim}")

    lam = init_lambda(dim, config.p, config.parameterization, rng)
    if config.baseline_vafc:
        if config.parameterization is not Parameterization.G1:
            raise ValueError("the baseline mode uses the G1 covariance form")
        lam = _LooseParams(lam.mu, _LoosePoint(np.array(lam.b.matrix)), None, lam.d2, lam.param)
    state = OptimizerState.initial(lam)
    euclid_b = AdadeltaState.zeros(lam.b.shape) if config.baseline_vafc else None

    smoother = _Smoother(config.smooth_window)
    elbo_hist: list[float] = []
    smooth_hist: list[float] = []
    trace: list[TraceRecord] = []
    hyper = config.hyper
    m, p = lam.b.shape
    bad_streak = 0
    last_good = lam
    stopped_early = False
    iterations = 0
    start = time.perf_counter()

    def wall_ms() -> int:
        if not config.wall_clock:
            return -1
        return int((time.perf_counter() - start) * 1000)

    def emit(t: int, sample: float, smooth: float, point):
        trace.append(
            TraceRecord(t, sample, smooth, wall_ms(), point.orth_residual())
        )

    # Overflow inside a single iteration is handled by the finiteness
    # checks and the bad-iteration path; the warnings would only add noise.
    old_err = np.seterr(over="ignore", invalid="ignore", divide="ignore")

    try:
        for t in range(config.max_iters):
            lam_t = lam  # the iterate this iteration's sample describes
            elbo_sample = float("nan")
            try:
                grads = None
                logh_sum = 0.0
                g2, logdet = grad_L2_and_logdet(lam)
                for _ in range(config.mc_samples):
                    noise = NoiseDraw.sample(m, p, rng)
                    theta = sample_theta(lam, noise)
                    logh, g = model.log_h_and_grad(theta)
                    if not np.isfinite(logh) or not np.all(np.isfinite(g)):
                        raise NumericalError("model evaluation is not finite", value=theta)
                    g1 = grad_L1_from_model_grad(lam, noise, g)
                    grads = g1 if grads is None else grads + g1
                    logh_sum += logh
                if config.mc_samples > 1:
                    inv = 1.0 / config.mc_samples
                    grads = dataclasses.replace(
                        grads,
                        g_mu=grads.g_mu * inv,
                        g_b=grads.g_b * inv,
                        g_d1=None if grads.g_d1 is None else grads.g_d1 * inv,
                        g_d2=grads.g_d2 * inv,
                    )
                total = grads + g2
                elbo_sample = logh_sum / config.mc_samples + 0.5 * logdet
                if not np.isfinite(elbo_sample) or not total.is_finite():
                    raise NumericalError("objective estimate is not finite")

                new_mu, st_mu = step_euclidean_adadelta(
                    lam.mu, total.g_mu, state.euclid_mu, hyper
                )
                if lam.d1 is not None:
                    new_d1, st_d1 = step_euclidean_adadelta(
                        lam.d1, total.g_d1, state.euclid_d1, hyper
                    )
                else:
                    new_d1, st_d1 = None, None
                new_d2, st_d2 = step_euclidean_adadelta(
                    lam.d2, total.g_d2, state.euclid_d2, hyper
                )
                new_d2 = clamp_d2(new_d2, D2_FLOOR)

                if config.baseline_vafc:
                    flat, new_euclid_b = step_euclidean_adadelta(
                        lam.b.matrix.ravel(), total.g_b.ravel(), euclid_b, hyper
                    )
                    new_lam = _LooseParams(
                        new_mu, _LoosePoint(flat.reshape(m, p)), None, new_d2, lam.param
                    )
                    new_state = state
                else:
                    new_euclid_b = None
                    new_b, new_state = step_b(config.rule, lam.b, total.g_b, state, hyper)
                    new_lam = VariationalParams(new_mu, new_b, new_d1, new_d2, lam.param)
            except (
                NumericalError,
                IllConditionedCovarianceError,
                DegenerateRetractionError,
                GeometryError,
                np.linalg.LinAlgError,
                FloatingPointError,
            ):
                # Leave every parameter untouched for this iteration.
                bad_streak += 1
                if bad_streak >= MAX_BAD_ITERS:
                    raise DivergenceError(
                        f"{MAX_BAD_ITERS} consecutive failed iterations at t={t}",
                        last_good=last_good,
                        iteration=t,
                    ) from None
            else:
                bad_streak = 0
                last_good = lam
                lam = new_lam
                euclid_b = new_euclid_b
                state = dataclasses.replace(
                    new_state, euclid_mu=st_mu, euclid_d1=st_d1, euclid_d2=st_d2
                )

            smooth = smoother.push(elbo_sample)
            elbo_hist.append(elbo_sample)
            smooth_hist.append(smooth)
            if t % config.trace_every == 0:
                emit(t, elbo_sample, smooth, lam_t.b)
            iterations = t + 1
            if (
                np.isfinite(elbo_sample)
                and config.stopping.kind == "rel_change"
                and check_stopping(smooth_hist, config.stopping)
            ):
                stopped_early = True
                break

    finally:
        np.seterr(**old_err)
    if iterations and (iterations - 1) % config.trace_every != 0:
        emit(iterations - 1, elbo_hist[-1], smooth_hist[-1], lam.b)

    metrics = {
        "iterations": iterations,
        "wall_ms": int((time.perf_counter() - start) * 1000),
        "stopped_early": stopped_early,
        "final_elbo_smooth": smooth_hist[-1] if smooth_hist else float("nan"),
        "final_orth_residual": lam.b.orth_residual(),
    }
    if train_data is not None:
        metrics["train_error"] = _scored_error(config, lam, model, train_data, rng)
    if test_data is not None:
        metrics["test_error"] = _scored_error(config, lam, model, test_data, rng)

    return RunResult(
        lam=lam,
        trace=trace,
        metrics=metrics,
        elbo_history=np.asarray(elbo_hist),
        smooth_history=np.asarray(smooth_hist),
        iterations=iterations,
        stopped_early=stopped_early,
    )


def _scored_error(config, lam, model, data: Dataset, rng) -> float:
    if config.predict == "mean":
        return predict_error(data, _beta_mean(model, lam.mu))
    if config.predict.startswith("mc:"):
        k = int(config.predict.split(":", 1)[1])
        return predictive_error_mc(data, lam, model, k, rng)
    raise ValueError(f"unknown predict mode {config.predict!r}")


def predictive_error_mc(
    data: Dataset, lam, model: Model, n_draws: int, rng: np.random.Generator
) -> float:
    """Misclassification of the Monte Carlo averaged predictive probability."""
    m, p = lam.b.shape
    probs = np.zeros(data.n_samples)
    for _ in range(n_draws):
        theta = sample_theta(lam, NoiseDraw.sample(m, p, rng))
        eta = data.X @ _beta_mean(model, theta)
        probs += 1.0 / (1.0 + np.exp(-np.clip(eta, -500, 500)))
    probs /= n_draws
    predicted = (probs >= 0.5).astype(float)
    return float(np.mean(predicted != data.y))


def build_model(config: RunConfig, data: Dataset) -> Model:
    if config.prior == "horseshoe":
        return LogisticHorseshoeModel(data)
    return LogisticGaussianModel(data, prior_sd=config.prior_sd)


def run(config: RunConfig) -> RunResult:
    """Load data per config, run the loop, and write any requested outputs."""
    if config.dataset is None:
        raise ValueError("config.dataset is required; use run_model for in-memory models")
    data = load_csv(
        config.dataset,
        header=config.header,
        label_col=config.label_col,
        standardize=config.standardize,
    )
    test = None
    if config.test_dataset is not None:
        test = load_csv(
            config.test_dataset,
            header=config.header,
            label_col=config.label_col,
            standardize=config.standardize,
        )
    model = build_model(config, data)
    try:
        result = run_model(config, model, train_data=data, test_data=test)
    except DivergenceError as exc:
        if config.checkpoint and exc.last_good is not None:
            save_checkpoint(config.checkpoint, exc.last_good)
        raise
    _write_outputs(config, result)
    return result


def _write_outputs(config: RunConfig, result: RunResult):
    if config.trace_path:
        write_trace_csv(config.trace_path, result.trace)
    if config.summary_path:
        write_summary_json(config.summary_path, config, result.metrics)
    if config.checkpoint:
        save_checkpoint(config.checkpoint, result.lam)


# --------------------------------------------------------------------
# Cross-validation


@dataclass
class CVResult:
    fold_metrics: list[dict]
    mean_train_error: float
    sd_train_error: float
    mean_test_error: float
    sd_test_error: float
    mean_wall_ms: float
    fold_sizes: list[int]


def stratified_folds(y: np.ndarray, n_folds: int, rng: np.random.Generator):
    """Split indices into label-stratified folds; deterministic given rng."""
    if n_folds < 2:
        raise StratificationError("need at least 2 folds")
    test_sets = [[] for _ in range(n_folds)]
    for label in np.unique(y):
        idx = np.flatnonzero(y == label)
        if len(idx) < n_folds:
            raise StratificationError(
                f"class {label:g} has {len(idx)} samples, fewer than {n_folds} folds"
            )
        idx = idx.copy()
        rng.shuffle(idx)
        for k, part in enumerate(np.array_split(idx, n_folds)):
            test_sets[k].append(part)
    folds = []
    all_idx = np.arange(len(y))
    for parts in test_sets:
        test_idx = np.sort(np.concatenate(parts))
        train_idx = np.setdiff1d(all_idx, test_idx)
        folds.append((train_idx, test_idx))
    return folds


def _run_fold(args):
    config, data, train_idx, test_idx, fold = args
    train = Dataset(data.X[train_idx], data.y[train_idx])
    test = Dataset(data.X[test_idx], data.y[test_idx])
    # Each fold owns an independent stream derived from (seed, fold); fold
    # runs never write files of their own.
    fold_seed = int(np.random.SeedSequence([config.seed, fold]).generate_state(1)[0])
    fold_config = dataclasses.replace(
        config,
        seed=fold_seed,
        trace_path=None,
        summary_path=None,
        checkpoint=None,
    )
    model = build_model(config, train)
    result = run_model(fold_config, model, train_data=train, test_data=test)
    metrics = dict(result.metrics)
    metrics["fold"] = fold
    return metrics


def worker_count(config: RunConfig, n_tasks: int) -> int:
    if config.workers is not None:
        limit = config.workers
    else:
        limit = int(os.environ.get("MANVB_THREADS", "1"))
    return max(1, min(limit, n_tasks))


def cross_validate(config: RunConfig, data: Dataset | None = None) -> CVResult:
    """Stratified k-fold evaluation of one configuration."""
    if config.cv_folds < 2:
        raise StratificationError("cv_folds must be >= 2")
    if data is None:
        if config.dataset is None:
            raise ValueError("config.dataset is required")
        data = load_csv(
            config.dataset,
            header=config.header,
            label_col=config.label_col,
            standardize=config.standardize,
        )
    rng = np.random.default_rng(config.seed)
    folds = stratified_folds(data.y, config.cv_folds, rng)
    tasks = [
        (config, data, train_idx, test_idx, fold)
        for fold, (train_idx, test_idx) in enumerate(folds)
    ]
    workers = worker_count(config, len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            fold_metrics = list(pool.map(_run_fold, tasks))
    else:
        fold_metrics = [_run_fold(task) for task in tasks]
    train_errors = np.array([fm["train_error"] for fm in fold_metrics])
    test_errors = np.array([fm["test_error"] for fm in fold_metrics])
    walls = np.array([fm["wall_ms"] for fm in fold_metrics], dtype=float)
    return CVResult(
        fold_metrics=fold_metrics,
        mean_train_error=float(train_errors.mean()),
        sd_train_error=float(train_errors.std(ddof=1)),
        mean_test_error=float(test_errors.mean()),
        sd_test_error=float(test_errors.std(ddof=1)),
        mean_wall_ms=float(walls.mean()),
        fold_sizes=[len(test_idx) for _, test_idx in folds],
    )


# --------------------------------------------------------------------
# Dataset ingestion


def _looks_like_header(row: list[str]) -> bool:
    for cell in row:
        try:
            float(cell)
        except ValueError:
            return True
    return False


def load_csv(
    path,
    header: str | bool = "auto",
    label_col: int = -1,
    standardize: bool = True,
) -> Dataset:
    """Read a rectangular numeric CSV into a modeling-ready Dataset.

    The label column (default: last) must hold 0/1 or -1/+1 labels.
    Feature columns are standardized to zero mean and unit variance when
    enabled; constant columns are dropped with a warning either way.  An
    intercept column of ones is prepended and never standardized.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [
            (lineno, row)
            for lineno, row in enumerate(csv.reader(fh), start=1)
            if row and any(cell.strip() for cell in row)
        ]
    if not rows:
        raise ParseError(f"{path}: file contains no data rows")
    if header == "auto":
        skip_first = _looks_like_header(rows[0][1])
    else:
        skip_first = header in (True, "yes")
    if skip_first:
        rows = rows[1:]
        if not rows:
            raise ParseError(f"{path}: no data rows after header")

    width = len(rows[0][1])
    values = np.empty((len(rows), width))
    for i, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(
                f"{path}: line {lineno}: expected {width} fields, got {len(row)}"
            )
        try:
            values[i] = [float(cell) for cell in row]
        except ValueError:
            bad = next(c for c in row if not _is_float(c))
            raise ParseError(
                f"{path}: line {lineno}: could not parse {bad!r} as a number"
            ) from None

    col = label_col if label_col >= 0 else width + label_col
    if not 0 <= col < width:
        raise ParseError(f"{path}: label column {label_col} out of range for width {width}")
    y = values[:, col]
    x = np.delete(values, col, axis=1)

    labels = set(np.unique(y))
    if labels <= {-1.0, 1.0} and -1.0 in labels:
        warnings.warn(f"{path}: mapping -1/+1 labels to 0/1")
        y = (y + 1.0) / 2.0
    elif not labels <= {0.0, 1.0}:
        raise ParseError(f"{path}: labels must be 0/1 or -1/+1, found {sorted(labels)}")

    keep = np.std(x, axis=0) > 0.0
    if not np.all(keep):
        warnings.warn(
            f"{path}: dropping {int((~keep).sum())} constant column(s)"
        )
        x = x[:, keep]
    if standardize and x.shape[1]:
        x = (x - x.mean(axis=0)) / x.std(axis=0)
    x = np.hstack([np.ones((x.shape[0], 1)), x])
    return Dataset(x, y)


def _is_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


# --------------------------------------------------------------------
# Output files


def write_trace_csv(path, trace: list[TraceRecord]):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("iter,elbo_sample,elbo_smooth,wall_ms,orth_residual\n")
        for r in trace:
            fh.write(
                f"{r.iter},{float(r.elbo_sample)!r},{float(r.elbo_smooth)!r},"
                f"{r.wall_ms},{float(r.orth_residual)!r}\n"
            )


def read_trace_csv(path) -> list[TraceRecord]:
    out = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            out.append(
                TraceRecord(
                    iter=int(row["iter"]),
                    elbo_sample=float(row["elbo_sample"]),
                    elbo_smooth=float(row["elbo_smooth"]),
                    wall_ms=int(row["wall_ms"]),
                    orth_residual=float(row["orth_residual"]),
                )
            )
    return out


def config_to_dict(config: RunConfig) -> dict:
    out = dataclasses.asdict(config)
    out["parameterization"] = config.parameterization.value
    out["rule"] = config.rule.value
    return out


def write_summary_json(path, config: RunConfig, metrics: dict):
    payload = {
        "config": config_to_dict(config),
        "metrics": metrics,
        "seed": config.seed,
        # Reported objective values drop the additive constant
        # -(m/2)(log 2pi + 1), so absolute levels are comparable across
        # runs of this package but not across other conventions.
        "elbo_constant_dropped": "-(m/2)*(log(2*pi)+1)",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


_CHECKPOINT_MAGIC = b"MVB1"
_PARAM_TAGS = {Parameterization.S: 0, Parameterization.G1: 1, Parameterization.G2: 2}
_TAG_PARAMS = {v: k for k, v in _PARAM_TAGS.items()}


def save_checkpoint(path, lam):
    """Binary layout: magic 'MVB1', u8 parameterization tag, u64 m, u64 p,
    u64 len(d1), then little-endian float64 runs: mu[m], B[m*p] row-major,
    d1[len], d2[m]."""
    m, p = lam.b.shape
    d1 = np.zeros(0) if lam.d1 is None else lam.d1
    with open(path, "wb") as fh:
        fh.write(_CHECKPOINT_MAGIC)
        fh.write(struct.pack("<BQQQ", _PARAM_TAGS[lam.param], m, p, d1.size))
        for arr in (lam.mu, lam.b.matrix, d1, lam.d2):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> VariationalParams:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _CHECKPOINT_MAGIC:
            raise ParseError(f"{path}: not a checkpoint file")
        tag, m, p, d1_len = struct.unpack("<BQQQ", fh.read(25))
        param = _TAG_PARAMS[tag]

        def read(n):
            return np.frombuffer(fh.read(8 * n), dtype="<f8").astype(float)

        mu = read(m)
        b = read(m * p).reshape(m, p)
        d1 = read(d1_len) if d1_len else None
        d2 = read(m)
    return VariationalParams(
        mu=mu,
        b=ManifoldPoint(b, param.manifold_kind),
        d1=d1,
        d2=d2,
        param=param,
    )
