"""``ipm-pacbayes`` command line.

Exit codes: 0 success, 1 usage or I/O error, 2 mathematically undefined result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds
from .divergences import (
    kl_gaussian_isotropic,
    tv_discrete,
    w1_discrete_exact,
    w1_projected_gaussian_upper,
    w2_gaussian,
    DivergenceKind,
    DivergenceValue,
)
from .exceptions import InvalidArgumentError, PreconditionError, UndefinedDivergenceError
from .experiment import PRESETS, ExperimentConfig, run_experiment, write_outputs
from .measures import DiscreteMeasure, FiniteMetricSpace, GaussianMeasure, ProjectedGaussianMeasure
from .suites import SUITES, _jsonable, run_suite

EXIT_OK, EXIT_USAGE, EXIT_UNDEFINED = 0, 1, 2

DIVERGENCE_KINDS = ("kl-gaussian", "tv", "w1-finite", "w2-gaussian", "w1-proj-gauss")
BOUND_NAMES = ("klpb-classic", "ipm-template", "tvpb", "tvpb-vc", "wpb-template", "wpb-finite",
               "wpb-grad-uc", "seeger-tv", "uc-linreg", "ucg-linreg", "wpb-linreg", "klpb-linreg")

VC_CONSTANT_HELP = (
    "tvpb-vc needs --c: the universal constant of the VC uniform-convergence bound has no "
    "known explicit value, so it must be supplied by the caller")


class UsageError(Exception):
    pass


def _parse_array(text: str, name: str):
    """Comma list, JSON literal, or ``@path`` to a JSON file."""
    if text is None:
        raise UsageError(f"missing --{name}")
    try:
        if text.startswith("@"):
            with open(text[1:], encoding="utf-8") as fh:
                value = json.load(fh)
        elif text.lstrip().startswith("["):
            value = json.loads(text)
        else:
            value = [float(t) for t in text.split(",") if t.strip()]
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read --{name}: {exc}") from exc
    return np.asarray(value, dtype=float)


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"missing --{name.replace('_', '-')}")


def _emit(payload: dict):
    json.dump(_jsonable(payload), sys.stdout, indent=2)
    sys.stdout.write("\n")


def _gaussians(args):
    _require(args, "sigma_q", "sigma_p")
    Q = GaussianMeasure(_parse_array(args.mean_q, "mean-q"), args.sigma_q)
    P = GaussianMeasure(_parse_array(args.mean_p, "mean-p"), args.sigma_p)
    return Q, P


def cmd_divergence(args) -> int:
    inputs = {k: v for k, v in vars(args).items()
              if k in ("mean_q", "mean_p", "sigma_q", "sigma_p", "radius", "q", "p", "dist")
              and v is not None}
    try:
        if args.kind == "kl-gaussian":
            value = kl_gaussian_isotropic(*_gaussians(args))
        elif args.kind == "w2-gaussian":
            value = w2_gaussian(*_gaussians(args))
        elif args.kind == "w1-proj-gauss":
            Q, P = _gaussians(args)
            value = w1_projected_gaussian_upper(ProjectedGaussianMeasure(Q, args.radius),
                                                ProjectedGaussianMeasure(P, args.radius))
        elif args.kind == "tv":
            value = tv_discrete(DiscreteMeasure(_parse_array(args.q, "q")),
                                DiscreteMeasure(_parse_array(args.p, "p")))
        else:
            space = FiniteMetricSpace(_parse_array(args.dist, "dist"))
            value = w1_discrete_exact(DiscreteMeasure(_parse_array(args.q, "q")),
                                      DiscreteMeasure(_parse_array(args.p, "p")), space)
    except UndefinedDivergenceError as exc:
        _emit({"kind": args.kind, "value": "undefined", "reason": str(exc), "inputs": inputs})
        return EXIT_UNDEFINED
    payload = {"kind": args.kind, "value": value.value, "inputs": inputs}
    details = {k: v for k, v in value.details.items() if k != "coupling"}
    if details:
        payload["details"] = details
    _emit(payload)
    return EXIT_OK


def _div(value, kind):
    return None if value is None else DivergenceValue(value, kind)


def cmd_bound(args) -> int:
    name = args.name
    m, delta = args.m, args.delta
    try:
        if name == "uc-linreg":
            _require(args, "m", "d")
            _emit({"name": name, "value": bounds.uc_linreg(m, delta, args.d),
                   "inputs": {"m": m, "delta": delta, "d": args.d}})
            return EXIT_OK
        if name == "ucg-linreg":
            _require(args, "m", "d")
            _emit({"name": name, "value": bounds.ucg_linreg(m, delta, args.d, args.r),
                   "inputs": {"m": m, "delta": delta, "d": args.d, "r": args.r}})
            return EXIT_OK
        _require(args, "m")
        if name == "klpb-classic":
            _require(args, "kl")
            report = bounds.klpb_classic(_div(args.kl, DivergenceKind.KL), m, delta)
        elif name == "ipm-template":
            _require(args, "gamma")
            report = bounds.ipm_pb_template(args.gamma, m, delta)
        elif name == "tvpb":
            _require(args, "uc", "tv")
            report = bounds.tvpb_from_uc(args.uc, _div(args.tv, DivergenceKind.TV), m, delta)
        elif name == "tvpb-vc":
            if args.c is None:
                raise UsageError(VC_CONSTANT_HELP)
            _require(args, "vc", "tv")
            report = bounds.tvpb_vc(args.vc, args.c, _div(args.tv, DivergenceKind.TV), m, delta)
        elif name == "wpb-template":
            _require(args, "K", "w1")
            report = bounds.wpb_template(args.K, _div(args.w1, DivergenceKind.W1_EXACT), m, delta)
        elif name == "wpb-finite":
            _require(args, "class_size", "G", "w1")
            report = bounds.wpb_finite(args.class_size, args.G,
                                       _div(args.w1, DivergenceKind.W1_EXACT), m, delta)
        elif name == "wpb-grad-uc":
            _require(args, "uc", "ucg", "w1")
            report = bounds.wpb_grad_uc(args.uc, args.ucg, _div(args.w1, DivergenceKind.W1_EXACT),
                                        m, delta)
        elif name == "seeger-tv":
            _require(args, "emp_risk", "class_size", "tv")
            report = bounds.seeger_tv_finite(args.emp_risk, args.class_size,
                                             _div(args.tv, DivergenceKind.TV), m, delta)
        elif name == "wpb-linreg":
            _require(args, "jhat", "w_bound", "d")
            report = bounds.wpb_linreg(args.jhat,
                                       _div(args.w_bound, DivergenceKind.W1_PROJ_GAUSS_UPPER),
                                       m, delta, args.d, args.r)
        else:  # klpb-linreg
            _require(args, "jhat")
            Q, P = _gaussians(args)
            try:
                report = bounds.klpb_linreg(args.jhat, Q, P, m, delta)
            except UndefinedDivergenceError as exc:
                _emit({"name": name, "bound_value": "undefined", "reason": str(exc)})
                return EXIT_UNDEFINED
    except UndefinedDivergenceError as exc:
        _emit({"name": name, "bound_value": "undefined", "reason": str(exc)})
        return EXIT_UNDEFINED
    _emit({"name": name, **report.to_dict()})
    return EXIT_OK


def cmd_experiment(args) -> int:
    if args.config is not None:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
    else:
        data = {}
    if args.preset:
        data = {**data, **PRESETS[args.preset]}
    if args.seed is not None:
        data["master_seed"] = args.seed
    config = ExperimentConfig.from_dict(data)
    result = run_experiment(config)
    out_dir = Path(args.out_dir or ".")
    try:
        paths = write_outputs(result, out_dir)
    except OSError as exc:
        raise UsageError(f"cannot write outputs to {out_dir}: {exc}") from exc
    _emit({"outputs": {k: str(v) for k, v in paths.items()},
           "rows": result.to_dict()["rows"]})
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suite(args.suite, seed=args.seed or 0, delta=args.delta, trials=args.trials)
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="master seed")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON experiment config")

    parser = argparse.ArgumentParser(prog="ipm-pacbayes", parents=[common],
                                     description="IPM PAC-Bayes bounds and the regression experiment")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("divergence", parents=[common], help="evaluate a divergence")
    p.add_argument("kind", choices=DIVERGENCE_KINDS)
    p.add_argument("--mean-q")
    p.add_argument("--mean-p")
    p.add_argument("--sigma-q", type=float)
    p.add_argument("--sigma-p", type=float)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--q", help="weights of Q (comma list, JSON, or @file)")
    p.add_argument("--p", help="weights of P")
    p.add_argument("--dist", help="distance matrix (JSON or @file)")
    p.set_defaults(func=cmd_divergence)

    b = sub.add_parser("bound", parents=[common], help="evaluate a bound")
    b.add_argument("name", choices=BOUND_NAMES)
    b.add_argument("--m", type=int)
    b.add_argument("--delta", type=float, default=0.05)
    for flag in ("kl", "gamma", "uc", "ucg", "tv", "w1", "K", "G", "c", "jhat", "w-bound",
                 "emp-risk", "sigma-q", "sigma-p"):
        b.add_argument(f"--{flag}", type=float)
    b.add_argument("--vc", type=int)
    b.add_argument("--class-size", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--r", type=float, default=1.0)
    b.add_argument("--mean-q")
    b.add_argument("--mean-p")
    b.set_defaults(func=cmd_bound)

    e = sub.add_parser("experiment", parents=[common], help="run the regression experiment")
    e.add_argument("action", nargs="?", choices=("run",), default="run")
    e.add_argument("--preset", choices=sorted(PRESETS))
    e.set_defaults(func=cmd_experiment)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=SUITES)
    v.add_argument("--delta", type=float)
    v.add_argument("--trials", type=int)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    for name in ("seed", "out_dir", "config"):
        if not hasattr(args, name):
            setattr(args, name, None)
    try:
        return args.func(args)
    except (UsageError, InvalidArgumentError, PreconditionError) as exc:
        print(f"ipm-pacbayes: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
