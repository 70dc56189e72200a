"""Synthetic benchmark problems and the covariate interaction expansion.

The radar-return surrogate mirrors the shape of the UCI ionosphere file
(351 rows, 34 raw columns with the second one identically zero, binary
labels roughly 64/36) and is calibrated so that penalized logistic
regression on the expanded covariates reaches a few-percent test error
with near-zero training error.  It exists because this environment has
no network access to the UCI repository; any preprocessed real CSV can
be fed to the CLI instead.
"""

from __future__ import annotations

import itertools

import numpy as np

N_RAW_COLUMNS = 34
N_EXPANDED = 111
_N_INTERACT = 13  # pairwise products among the first 13 kept columns


def expand_with_interactions(x_raw: np.ndarray, n_interact: int = _N_INTERACT):
    """Main effects plus pairwise interactions of the leading columns.

    Constant columns are removed first.  The kept main effects are
    followed by products x_i * x_j (i < j) over the first ``n_interact``
    kept columns, in lexicographic order.  For a 34-column input with one
    constant column this yields 33 + C(13, 2) = 111 features.
    """
    x_raw = np.asarray(x_raw, dtype=float)
    keep = np.std(x_raw, axis=0) > 0.0
    mains = x_raw[:, keep]
    k = min(n_interact, mains.shape[1])
    pairs = [
        mains[:, i] * mains[:, j] for i, j in itertools.combinations(range(k), 2)
    ]
    if pairs:
        return np.column_stack([mains] + pairs)
    return mains


def radar_returns(seed: int = 2024):
    """Surrogate for the 351 x 34 radar-return classification task.

    Returns (x_raw, y) where x_raw keeps the quirks of the original file:
    column 0 is binary, column 1 is identically zero, the rest are
    bounded continuous values.  The two classes form separated clusters
    in a latent space, a thin corridor between them carries coin-flip
    labels, and easy points are pushed away from the corridor.  That
    combination reproduces the characteristic error split of the real
    data: near-zero training error with a moderate test error, since the
    corridor labels can be memorized in sample but not predicted out of
    sample.
    """
    rng = np.random.default_rng(seed)
    n = 351
    n_latent = 26
    class_sep = 2.0
    ambiguous_frac = 0.12
    corridor_gap = 1.5

    base = (rng.random(n) < 0.64).astype(float)
    latent = rng.standard_normal((n, n_latent))
    v = np.zeros(n_latent)
    v[:5] = 1.0 / np.sqrt(5.0)
    latent += class_sep * np.outer(2.0 * base - 1.0, v)
    s = latent @ v
    cut = np.quantile(np.abs(s), ambiguous_frac)
    ambiguous = np.abs(s) <= cut
    latent += corridor_gap * np.outer(np.where(ambiguous, 0.0, np.sign(s)), v)

    mix = rng.standard_normal((n_latent, 32)) * 0.9
    cont = np.tanh(latent @ mix + 0.35 * rng.standard_normal((n, 32)))
    binary = (latent[:, 0] + 0.4 * rng.standard_normal(n) > 0).astype(float)
    x_raw = np.column_stack([binary, np.zeros(n), cont])
    y = np.where(ambiguous, rng.random(n) < 0.5, base).astype(float)
    return x_raw, y


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -500, 500)))


def sparse_logistic_problem(
    seed: int = 7,
    n_features: int = 500,
    n_train: int = 40,
    n_test: int = 34,
    n_signal: int = 5,
    signal_scale: float = 4.0,
    noise_rank: int = 20,
    margin_gap: float = 0.8,
):
    """High-dimensional sparse classification with known support.

    Returns (x_train, y_train, x_test, y_test, support) where ``support``
    indexes the nonzero coefficients.  Labels are deterministic in the
    latent margin and the margin distribution has a gap around zero, so
    the Bayes error is zero and direction-estimation error does not cost
    test points.  The inactive features share a low-rank factor structure;
    with 40 one-bit observations against 495 independent decoys, support
    recovery is information-theoretically out of reach for any method, so
    the decoy set carries ~noise_rank effective dimensions instead.
    """
    rng = np.random.default_rng(seed)
    n = n_train + n_test
    coef = signal_scale * np.where(np.arange(n_signal) % 2 == 0, 1.0, -1.0)
    cnorm = np.linalg.norm(coef)
    rows = []
    while len(rows) < n:
        cand = rng.standard_normal((4 * n, n_signal))
        keep = np.abs(cand @ coef / cnorm) >= margin_gap
        rows.extend(cand[keep][: n - len(rows)])
    signal = np.asarray(rows)

    factors = rng.standard_normal((n, noise_rank))
    loading = rng.standard_normal((noise_rank, n_features - n_signal))
    noise = (factors @ loading) / np.sqrt(noise_rank)
    noise += 0.3 * rng.standard_normal((n, n_features - n_signal))

    x = np.column_stack([signal, noise])
    perm = rng.permutation(n_features)
    x = x[:, perm]
    support = np.sort(np.argsort(perm)[:n_signal])
    y = (signal @ coef > 0).astype(float)
    return x[:n_train], y[:n_train], x[n_train:], y[n_train:], support


def write_csv(path, x: np.ndarray, y: np.ndarray, header: bool = False):
    """Write features plus a final label column, no quoting needed."""
    x = np.asarray(x, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            cols = [f"x{j}" for j in range(x.shape[1])] + ["label"]
            fh.write(",".join(cols) + "\n")
        for row, label in zip(x, y):
            fh.write(",".join(repr(float(v)) for v in row) + f",{label:g}\n")
