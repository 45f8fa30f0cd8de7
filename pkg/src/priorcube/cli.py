"""Command-line interface: ``priorcube {constants,optimize,evaluate,cube,mc-check}``.

Exit codes: 0 success, 1 usage/invalid parameters, 2 I/O or parse failure,
3 optimization did not converge to a feasible improvement.
"""
from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import critical_constants
from .cube import DataError, FactorialDataset, fit, general_cube, naive_cube, standard_cube
from .mc import mc_coverage, mc_sev
from .model import ConfigurationError, ModelConfig
from .optimizer import OptimizationProblem, optimize
from .performance import performance_curve
from .stats import ScaledChi
from .tuning import BSFunctions, RecordError, TuningSpec

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def parse_df(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    try:
        value = int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"degrees of freedom must be a positive integer or 'inf', got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"degrees of freedom must be positive, got {value}")
    return value


def _level(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


# -- optimize config file ------------------------------------------------

@dataclass
class RunConfig:
    alpha: float = 0.05
    replicates: int | None = None
    external_df: float | None = None
    r: float = 8.0
    lam: float = 0.08
    knots: tuple[float, ...] | None = None
    m: int = 7
    budget: int = 5000
    seed: int = 0
    grid_step: float = 0.25
    grid_margin: float = 3.0

    def model_config(self) -> ModelConfig:
        if (self.replicates is None) == (self.external_df is None):
            raise UsageError("config: give exactly one of 'replicates' or 'external_df'")
        try:
            if self.replicates is not None:
                return ModelConfig.internal(self.replicates, self.alpha)
            return ModelConfig.external(self.external_df, alpha=self.alpha)
        except ConfigurationError as exc:
            raise UsageError(f"config: {exc}") from None

    def tuning_spec(self) -> TuningSpec:
        try:
            if self.knots is not None:
                return TuningSpec(self.r, self.lam, self.knots)
            return TuningSpec.evenly_spaced(self.r, self.lam, self.m)
        except ValueError as exc:
            raise UsageError(f"config: {exc}") from None


_KEYS = {
    "alpha": ("alpha", _level),
    "replicates": ("replicates", int),
    "external_df": ("external_df", parse_df),
    "r": ("r", float),
    "lambda": ("lam", float),
    "m": ("m", int),
    "knots": ("knots", lambda v: tuple(float(x) for x in v.split(","))),
    "budget": ("budget", int),
    "seed": ("seed", int),
    "grid_step": ("grid_step", float),
    "grid_margin": ("grid_margin", float),
}


def read_run_config(path) -> RunConfig:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KEYS:
            raise InputError(f"{path}:{lineno}: unknown field {key!r}")
        attr, conv = _KEYS[key]
        try:
            setattr(cfg, attr, conv(value))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config field {key!r}: {exc}") from None
    if cfg.budget < 100:
        raise UsageError("config field 'budget': must be at least 100")
    if cfg.grid_margin < 3:
        raise UsageError("config field 'grid_margin': must be at least 3")
    if not cfg.grid_step > 0:
        raise UsageError("config field 'grid_step': must be positive")
    if cfg.m < 3:
        raise UsageError("config field 'm': at least 3 knots required")
    return cfg


def _load_fns(path) -> BSFunctions:
    try:
        return BSFunctions.load(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except RecordError as exc:
        raise InputError(f"{path}: bad field {exc.field!r}: {exc}") from None


# -- subcommands -----------------------------------------------------------

def cmd_constants(args) -> int:
    if (args.replicates is None) == (args.external_df is None):
        raise UsageError("give exactly one of --replicates or --external-df")
    try:
        if args.replicates is not None:
            config = ModelConfig.internal(args.replicates, args.alpha)
        else:
            config = ModelConfig.external(args.external_df, alpha=args.alpha)
    except ConfigurationError as exc:
        raise UsageError(str(exc)) from None
    cc = critical_constants(args.alpha, config.dist, args.test_level)
    nu = "inf" if config.nu == math.inf else str(int(config.nu))
    print(f"alpha   = {args.alpha:g}")
    print(f"nu      = {nu}")
    print(f"d       = {cc.d:.6f}")
    print(f"d_tilde = {cc.d_tilde:.6f}")
    print(f"q       = {cc.q:.6f}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    run = read_run_config(args.config)
    config = run.model_config()
    spec = run.tuning_spec()
    cc = critical_constants(config.alpha, config.dist)
    problem = OptimizationProblem(spec, config, cc, budget=run.budget, seed=run.seed,
                                  grid_step=run.grid_step, grid_margin=run.grid_margin)
    stream = None if args.quiet else sys.stderr
    result = optimize(problem, stream=stream)
    try:
        result.fns.save(args.output)
    except OSError as exc:
        raise InputError(f"cannot write {args.output}: {exc.strerror}") from None
    curve = performance_curve(result.fns, config, gamma_max=spec.r + 6.0, step=0.05)
    print(f"criterion        = {result.criterion_value:.6f}")
    print(f"min coverage     = {result.min_coverage:.6f} (gamma = {result.worst_gamma:.4f})")
    print(f"sqrt e(0)        = {curve.points[0].sqrt_sev:.6f}")
    print(f"max sqrt e       = {curve.sqrt_sevs.max():.6f}")
    print(f"evaluations      = {result.evaluations_used}")
    print(f"converged        = {str(result.converged).lower()}")
    return EXIT_OK if result.converged else EXIT_INFEASIBLE


def cmd_evaluate(args) -> int:
    fns = _load_fns(args.bs)
    gamma_max = args.gamma_max if args.gamma_max is not None else (fns.cutoff or 6.0) + 6.0
    curve = performance_curve(fns, None, gamma_max=gamma_max, step=args.step)
    if args.output in (None, "-"):
        print("gamma,coverage,sqrt_sev")
        for p in curve.points:
            print(f"{p.gamma!r},{p.coverage!r},{p.sqrt_sev!r}")
    else:
        try:
            curve.to_csv(args.output)
        except OSError as exc:
            raise InputError(f"cannot write {args.output}: {exc.strerror}") from None
    return EXIT_OK


def _format_cube(cube) -> str:
    return " x ".join(f"[{c:.6f} ± {h:.6f}]" for c, h in cube.intervals)


def cmd_cube(args) -> int:
    fns = _load_fns(args.bs)
    try:
        data = FactorialDataset.read_csv(args.data, external_sigma_hat=args.sigma)
    except OSError as exc:
        raise InputError(f"cannot read {args.data}: {exc.strerror}") from None
    except DataError as exc:
        raise InputError(str(exc)) from None
    try:
        if args.sigma is not None:
            config = ModelConfig.external(args.sigma_df, c=data.c, alpha=fns.alpha)
        else:
            config = ModelConfig.internal(data.c, fns.alpha)
    except ConfigurationError as exc:
        raise UsageError(f"{exc}; supply --sigma for an external estimate") from None
    if fns.nu != config.nu:
        raise UsageError(f"{args.bs} was built for nu={fns.nu} but the data give nu={config.nu}")

    est = fit(data, config)
    cc = critical_constants(config.alpha, config.dist, args.test_level)
    std = standard_cube(est, cc, config)
    naive = naive_cube(est, cc, config)
    new = general_cube(est, fns, config)
    print(f"beta_hat   = ({', '.join(f'{b:.6f}' for b in est.beta_hat)})")
    print(f"sigma_hat  = {est.sigma_hat:.6f}    t = {est.t_stat:.6f}")
    print(f"standard   {_format_cube(std)}")
    branch = "pretest accepted" if naive.accepted else "pretest rejected"
    print(f"naive      {_format_cube(naive)}   ({branch})")
    print(f"new        {_format_cube(new)}")
    print(f"sqrt volume ratio naive/standard = {naive.sqrt_volume_ratio:.6f}")
    print(f"sqrt volume ratio new/standard   = {new.sqrt_volume_ratio:.6f}")
    return EXIT_OK


def cmd_mc_check(args) -> int:
    fns = _load_fns(args.bs)
    cov = mc_coverage(args.gamma, fns, None, n=args.n, seed=args.seed)
    sev = mc_sev(args.gamma, fns, None, n=args.n, seed=args.seed)
    print(f"coverage = {cov.value:.6f} (se {cov.std_error:.6f})")
    print(f"sev      = {sev.value:.6f} (se {sev.std_error:.6f})")
    print(f"n = {args.n}, seed = {args.seed}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="priorcube", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="critical constants d, d_tilde and q")
    p.add_argument("--alpha", type=_level, default=0.05)
    p.add_argument("--replicates", type=int)
    p.add_argument("--external-df", type=parse_df)
    p.add_argument("--test-level", type=_level, default=0.05)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("optimize", help="optimize b and s from a key=value config file")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("-q", "--quiet", action="store_true", help="suppress progress lines")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("evaluate", help="tabulate coverage and sqrt scaled expected volume")
    p.add_argument("bs")
    p.add_argument("--gamma-max", type=_positive)
    p.add_argument("--step", type=_positive, default=0.1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("cube", help="standard, naive and new cubes for a data set")
    p.add_argument("data")
    p.add_argument("bs")
    p.add_argument("--sigma", type=_positive, help="external estimate of sigma")
    p.add_argument("--sigma-df", type=parse_df, default=math.inf)
    p.add_argument("--test-level", type=_level, default=0.05)
    p.set_defaults(func=cmd_cube)

    p = sub.add_parser("mc-check", help="Monte Carlo coverage and scaled expected volume")
    p.add_argument("bs")
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--n", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_mc_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "mc-check" and args.n < 10_000:
            raise UsageError("--n must be at least 10000")
        return args.func(args)
    except UsageError as exc:
        print(f"priorcube: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"priorcube: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
