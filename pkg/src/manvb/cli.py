"""Command line interface.

Subcommands:
  fit    run one configuration on a CSV dataset
  cv     stratified k-fold cross-validation of one configuration
  sweep  grid over parameterizations x rules, one CV table
  check  finite-difference validation of the analytic gradients

Exit codes: 0 success, 2 optimizer divergence, 3 input error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

import numpy as np

from .checks import gradient_check
from .errors import DimensionError, DivergenceError, ManvbError
from .factor_gaussian import NoiseDraw, Parameterization
from .models import Dataset, LogisticGaussianModel
from .optimizers import HyperParams, RuleKind
from .runner import (
    ParseError,
    RunConfig,
    StoppingRule,
    StratificationError,
    config_to_dict,
    cross_validate,
    init_lambda,
    run,
    save_checkpoint,
)

EXIT_OK = 0
EXIT_DIVERGED = 2
EXIT_INPUT = 3

_RULES = {r.value: r for r in RuleKind}
_PARAMS = {p.value: p for p in Parameterization}


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--data", required=True, help="training CSV (label column included)")
    parser.add_argument("--test-data", default=None, help="optional held-out CSV")
    parser.add_argument("--param", default="G1", choices=sorted(_PARAMS))
    parser.add_argument("--rule", default="rmsprop", choices=sorted(_RULES))
    parser.add_argument("--vafc", action="store_true",
                        help="baseline mode: unconstrained B, Euclidean ADADELTA")
    parser.add_argument("-p", "--factors", type=int, default=4, metavar="P")
    parser.add_argument("--iters", type=int, default=5000)
    parser.add_argument("--mc-samples", type=int, default=1)
    parser.add_argument("--eta", type=float, default=0.05)
    parser.add_argument("--zeta", type=float, default=0.95)
    parser.add_argument("--epsilon", type=float, default=1e-6)
    parser.add_argument("--adadelta-rho", type=float, default=0.95)
    parser.add_argument("--adadelta-eps", type=float, default=1e-6)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--stopping", default="fixed", choices=["fixed", "rel-change"])
    parser.add_argument("--stop-window", type=int, default=5)
    parser.add_argument("--stop-tol", type=float, default=0.1)
    parser.add_argument("--prior", default="gaussian", choices=["gaussian", "horseshoe"])
    parser.add_argument("--prior-sd", type=float, default=10.0)
    parser.add_argument("--trace", default=None, help="trace CSV output path")
    parser.add_argument("--trace-every", type=int, default=10)
    parser.add_argument("--smooth-window", type=int, default=100)
    parser.add_argument("--no-standardize", action="store_true")
    parser.add_argument("--label-col", type=int, default=-1)
    parser.add_argument("--header", default="auto", choices=["auto", "yes", "no"])
    parser.add_argument("--predict", default="mean",
                        help="'mean' or 'mc:K' for K-draw predictive averaging")
    parser.add_argument("--checkpoint", default=None, help="binary parameter dump path")
    parser.add_argument("--summary", default=None, help="summary JSON path")
    parser.add_argument("--no-wall-clock", action="store_true",
                        help="write -1 in the wall_ms trace column (byte-stable traces)")
    parser.add_argument("--workers", type=int, default=None,
                        help="worker pool size; default from MANVB_THREADS")


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        parameterization=_PARAMS[args.param],
        rule=_RULES[args.rule],
        p=args.factors,
        max_iters=args.iters,
        mc_samples=args.mc_samples,
        hyper=HyperParams(
            eta=args.eta,
            zeta=args.zeta,
            epsilon=args.epsilon,
            adadelta_rho=args.adadelta_rho,
            adadelta_eps=args.adadelta_eps,
        ),
        seed=args.seed,
        cv_folds=getattr(args, "folds", 5),
        stopping=StoppingRule(
            kind="rel_change" if args.stopping == "rel-change" else "fixed_iters",
            window=args.stop_window,
            tol=args.stop_tol,
        ),
        dataset=args.data,
        test_dataset=args.test_data,
        prior=args.prior,
        prior_sd=args.prior_sd,
        trace_path=args.trace,
        trace_every=args.trace_every,
        smooth_window=args.smooth_window,
        standardize=not args.no_standardize,
        label_col=args.label_col,
        header=args.header,
        predict=args.predict,
        checkpoint=args.checkpoint,
        summary_path=args.summary,
        wall_clock=not args.no_wall_clock,
        workers=args.workers,
        baseline_vafc=args.vafc,
    )


def _cmd_fit(args) -> int:
    config = _config_from_args(args)
    result = run(config)
    out = {k: v for k, v in result.metrics.items()}
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_cv(args) -> int:
    config = _config_from_args(args)
    cv = cross_validate(config)
    print(
        f"folds={config.cv_folds} sizes={cv.fold_sizes} "
        f"train={cv.mean_train_error:.4f}+-{cv.sd_train_error:.4f} "
        f"test={cv.mean_test_error:.4f}+-{cv.sd_test_error:.4f} "
        f"wall_ms={cv.mean_wall_ms:.0f}"
    )
    if args.summary:
        payload = {
            "config": config_to_dict(config),
            "fold_metrics": cv.fold_metrics,
            "mean_train_error": cv.mean_train_error,
            "sd_train_error": cv.sd_train_error,
            "mean_test_error": cv.mean_test_error,
            "sd_test_error": cv.sd_test_error,
            "mean_wall_ms": cv.mean_wall_ms,
        }
        with open(args.summary, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    params = [p.strip() for p in args.params.split(",")] if args.params else sorted(_PARAMS)
    rules = [r.strip() for r in args.rules.split(",")] if args.rules else sorted(_RULES)
    base = _config_from_args(args)
    rows = []
    print(f"{'method':28s} {'train':>8s} {'test':>8s} {'wall_ms':>10s}")
    for param in params:
        for rule in rules:
            config = dataclasses.replace(
                base,
                parameterization=_PARAMS[param],
                rule=_RULES[rule],
                trace_path=None,
                summary_path=None,
                checkpoint=None,
            )
            cv = cross_validate(config)
            name = f"{param}-{rule}"
            rows.append(
                {
                    "method": name,
                    "parameterization": param,
                    "rule": rule,
                    "mean_train_error": cv.mean_train_error,
                    "mean_test_error": cv.mean_test_error,
                    "sd_test_error": cv.sd_test_error,
                    "mean_wall_ms": cv.mean_wall_ms,
                }
            )
            print(
                f"{name:28s} {cv.mean_train_error:8.4f} "
                f"{cv.mean_test_error:8.4f} {cv.mean_wall_ms:10.0f}"
            )
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"config": config_to_dict(base), "rows": rows}, fh,
                      indent=2, sort_keys=True, default=str)
            fh.write("\n")
    return EXIT_OK


def _cmd_check(args) -> int:
    rng = np.random.default_rng(args.seed)
    n, m = 20, args.m
    x = np.hstack([np.ones((n, 1)), rng.standard_normal((n, m - 1))])
    y = (rng.random(n) < 0.5).astype(float)
    model = LogisticGaussianModel(Dataset(x, y), prior_sd=10.0)
    failures = 0
    for tag, param in sorted(_PARAMS.items()):
        for case in range(args.cases):
            lam = init_lambda(m, args.factors, param, rng)
            lam = dataclasses.replace(
                lam,
                mu=0.3 * rng.standard_normal(m),
                d1=None if lam.d1 is None else 0.5 + rng.random(lam.d1.shape),
                d2=0.3 + rng.random(m),
            )
            noise = NoiseDraw.sample(m, args.factors, rng)
            for res in gradient_check(lam, model, noise):
                status = "PASS" if res.passed else "FAIL"
                failures += not res.passed
                print(f"[{status}] case {case} {res.name}: rel err {res.rel_err:.3e} (tol {res.tol:g})")
    print(f"gradient check: {'OK' if failures == 0 else f'{failures} failures'}")
    return EXIT_OK if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="manvb",
        description="Variational approximation with manifold-constrained factor covariance",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="run one configuration")
    _add_common(fit)
    fit.set_defaults(func=_cmd_fit)

    cv = sub.add_parser("cv", help="cross-validate one configuration")
    _add_common(cv)
    cv.add_argument("--folds", type=int, default=5)
    cv.set_defaults(func=_cmd_cv)

    sweep = sub.add_parser("sweep", help="grid over parameterizations and rules")
    _add_common(sweep)
    sweep.add_argument("--folds", type=int, default=5)
    sweep.add_argument("--params", default=None, help="comma list, default all of S,G1,G2")
    sweep.add_argument("--rules", default=None, help="comma list, default all four rules")
    sweep.add_argument("--out", default=None, help="JSON output for the sweep table")
    sweep.set_defaults(func=_cmd_sweep)

    check = sub.add_parser("check", help="finite-difference gradient validation")
    check.add_argument("--m", type=int, default=6)
    check.add_argument("-p", "--factors", type=int, default=2)
    check.add_argument("--cases", type=int, default=3)
    check.add_argument("--seed", type=int, default=0)
    check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DivergenceError as exc:
        print(f"error: optimization diverged: {exc}", file=sys.stderr)
        if getattr(args, "checkpoint", None) and exc.last_good is not None:
            save_checkpoint(args.checkpoint, exc.last_good)
            print(f"last good parameters written to {args.checkpoint}", file=sys.stderr)
        return EXIT_DIVERGED
    except (ParseError, StratificationError, DimensionError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ManvbError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
