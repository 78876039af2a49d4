"""Command-line interface.

Subcommands: ``sketch`` (apply an operator to a vector file), ``corrupt``
(add calibrated noise), ``nu`` (norm statistics of a vector file),
``bounds`` (all closed-form calculators as JSON), ``experiment`` (run a
named Monte Carlo experiment and write its report files).

Exit codes: 0 success, 2 bad flags/parameters, 3 dimension mismatch,
4 I/O failure, 5 failed acceptance comparison under ``--check``.
All randomness enters through ``--seed``; repeated invocations are
byte-identical.
"""

import argparse
import json
import math
import os
import sys

from . import bounds as bnd
from .errors import BadDimensions, BadParams, DimensionMismatch, TooLarge, ZeroVector
from .experiments import (
    EXPERIMENT_NAMES,
    NORMALIZATIONS,
    acceptance_check,
    default_config,
    run_experiment,
    write_outputs,
)
from .noise import NOISY_STATS_CSV_HEADER, NoiseModel, corrupt, corrupt_streaming, stats_csv_row, vector_stats
from .sketch import KINDS, apply, make_operator
from .vectors import norm2_sq, read_vector, write_vector


class CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _load_vector(path):
    try:
        return read_vector(path)
    except OSError as e:
        raise CliFailure(4, f"cannot read {path}: {e}")
    except ValueError as e:
        raise CliFailure(4, f"bad vector file {path}: {e}")


def _cmd_sketch(args):
    v = _load_vector(args.in_path)
    if v.n != args.n:
        raise DimensionMismatch(f"--n {args.n} does not match vector file dimension {v.n}")
    op = make_operator(args.kind, args.m, args.n, args.seed, args.s)
    out = apply(op, v)
    write_vector(out, args.out_path)
    norm_in_sq = norm2_sq(v)
    norm_out_sq = norm2_sq(out)
    distortion = norm_out_sq / norm_in_sq if norm_in_sq > 0 else math.nan
    print("norm_in,norm_out,distortion")
    print(f"{math.sqrt(norm_in_sq)!r},{math.sqrt(norm_out_sq)!r},{distortion!r}")
    return 0


def _cmd_corrupt(args):
    if args.streaming and args.out_path:
        raise BadParams("--streaming computes statistics only; drop --out or --streaming")
    v = _load_vector(args.in_path)
    nm = NoiseModel(args.sigma, args.seed)
    if args.streaming:
        stats = corrupt_streaming(v, nm)
    else:
        noisy = corrupt(v, nm)
        if args.out_path:
            write_vector(noisy, args.out_path)
        stats = vector_stats(noisy)
    print(NOISY_STATS_CSV_HEADER)
    print(stats_csv_row(stats, nm))
    return 0


def _cmd_nu(args):
    v = _load_vector(args.in_path)
    stats = vector_stats(v)
    print("n,norm2sq,norminf,nu")
    print(f"{stats.n},{stats.norm2_sq_noisy!r},{stats.norm_inf_noisy!r},{stats.nu_noisy!r}")
    return 0


def _cmd_bounds(args):
    p = bnd.EmbeddingParams(args.eps_s, args.delta_s, args.E, args.C2)
    q = bnd.NoiseTailParams(args.eps, args.t, args.C1, args.sigma)
    tails = bnd.tail_bounds(args.n, q)
    doc = {
        "nu_bar": bnd.nu_bar(p),
        "n0_solved": bnd.solve_n0(args.nu_x, p, q),
        "hashing_m": bnd.hashing_m(p),
        "sampling_m": bnd.sampling_m(args.nu_x, args.n, p, q),
        "interval": list(bnd.noisy_norm_interval(args.norm2sq, args.n, q)),
        "tails": {"max_gauss": tails.max_gauss, "chi_sq": tails.chi_sq,
                  "combined": tails.combined},
        "noisy_nu_bound": bnd.noisy_nu_bound(args.nu_x, args.n, q),
    }
    print(json.dumps(doc, sort_keys=True, indent=2))
    return 0


_CONFIG_KEYS = {
    "trials": int, "master_seed": int, "seed": int, "n": int, "m": int,
    "signal": str, "signal_k": int, "sigma": float, "operator": str,
    "hash_s": int, "eps_s": float, "delta_s": float, "E": float, "C2": float,
    "eps": float, "t": float, "C1": float, "normalization": str,
    "noisy": lambda s: s.lower() in ("1", "true", "yes"),
    "grid_min": int, "grid_max": int, "grid_points": int,
}


def _parse_config_file(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as e:
        raise CliFailure(4, f"cannot read {path}: {e}")
    overrides = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _CONFIG_KEYS:
            raise BadParams(f"{path}:{lineno}: unknown config entry {line!r}")
        overrides["master_seed" if key == "seed" else key] = _CONFIG_KEYS[key](value)
    return overrides


def _cmd_experiment(args):
    overrides = _parse_config_file(args.config) if args.config else {}
    flag_overrides = {
        "trials": args.trials, "master_seed": args.seed, "n": args.n, "m": args.m,
        "sigma": args.sigma, "operator": args.operator, "signal": args.signal,
        "signal_k": args.signal_k, "hash_s": args.hash_s, "eps_s": args.eps_s,
        "delta_s": args.delta_s, "E": args.E, "C2": args.C2, "eps": args.eps,
        "t": args.t, "C1": args.C1, "normalization": args.normalization,
        "noisy": args.noisy, "grid_min": args.grid_min, "grid_max": args.grid_max,
        "grid_points": args.grid_points,
    }
    overrides.update({k: v for k, v in flag_overrides.items() if v is not None})
    if args.full:
        overrides["grid_max"] = 10**8
    cfg = default_config(args.name, **overrides)
    report = run_experiment(cfg, threads=args.threads)
    write_outputs(report, args.out_dir, render_figure=not args.no_figure)
    summary = " ".join(
        f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
        for k, v in sorted(report.aggregates.items())
    )
    print(f"{cfg.name} {summary}")
    if args.check:
        ok, detail = acceptance_check(report)
        print(f"check: {'PASS' if ok else 'FAIL'} {detail}")
        if not ok:
            return 5
    return 0


def _uint64(text):
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned integer")
    return value


def _add_param_flags(sub):
    sub.add_argument("--eps-s", dest="eps_s", type=float, default=None)
    sub.add_argument("--delta-s", dest="delta_s", type=float, default=None)
    sub.add_argument("--E", dest="E", type=float, default=None)
    sub.add_argument("--C2", dest="C2", type=float, default=None)
    sub.add_argument("--eps", type=float, default=None)
    sub.add_argument("--t", type=float, default=None)
    sub.add_argument("--C1", dest="C1", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="noisysketch",
        description="Norm-preserving sketches of noisy vectors: operators, bounds, experiments.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    sk = subs.add_parser("sketch", help="apply a sketch operator to a vector file")
    sk.add_argument("--kind", choices=KINDS, required=True)
    sk.add_argument("--s", type=int, default=None, help="nonzeros per column (hashing)")
    sk.add_argument("--m", type=int, required=True)
    sk.add_argument("--n", type=int, required=True)
    sk.add_argument("--seed", type=_uint64, required=True)
    sk.add_argument("--in", dest="in_path", required=True)
    sk.add_argument("--out", dest="out_path", required=True)
    sk.set_defaults(func=_cmd_sketch)

    co = subs.add_parser("corrupt", help="add calibrated gaussian noise to a vector file")
    co.add_argument("--sigma", type=float, required=True)
    co.add_argument("--seed", type=_uint64, required=True)
    co.add_argument("--in", dest="in_path", required=True)
    co.add_argument("--out", dest="out_path", default=None)
    co.add_argument("--streaming", action="store_true",
                    help="single-pass statistics without materializing the vector")
    co.set_defaults(func=_cmd_corrupt)

    nu_p = subs.add_parser("nu", help="norms and max-to-norm ratio of a vector file")
    nu_p.add_argument("--in", dest="in_path", required=True)
    nu_p.set_defaults(func=_cmd_nu)

    bo = subs.add_parser("bounds", help="closed-form calculators as JSON")
    bo.add_argument("--nu-x", dest="nu_x", type=float, default=1.0)
    bo.add_argument("--n", type=int, required=True)
    bo.add_argument("--sigma", type=float, required=True)
    bo.add_argument("--norm2sq", type=float, default=1.0)
    _add_param_flags(bo)
    bo.set_defaults(eps_s=0.5, delta_s=0.1, E=math.e, C2=1.0, eps=0.1, t=3.0, C1=2.0)
    bo.set_defaults(func=_cmd_bounds)

    ex = subs.add_parser("experiment", help="run a named Monte Carlo experiment")
    ex.add_argument("--name", choices=EXPERIMENT_NAMES, required=True)
    ex.add_argument("--trials", type=int, default=None)
    ex.add_argument("--seed", type=_uint64, default=None)
    ex.add_argument("--config", default=None, help="flat key=value config file")
    ex.add_argument("--out-dir", dest="out_dir", default=".")
    ex.add_argument("--check", action="store_true",
                    help="exit 5 if the experiment's acceptance comparison fails")
    ex.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    ex.add_argument("--full", action="store_true",
                    help="extend the appendix grid to its full top dimension 1e8")
    ex.add_argument("--no-figure", dest="no_figure", action="store_true")
    ex.add_argument("--n", type=int, default=None)
    ex.add_argument("--m", type=int, default=None)
    ex.add_argument("--sigma", type=float, default=None)
    ex.add_argument("--operator", choices=KINDS, default=None)
    ex.add_argument("--signal", choices=("one_hot", "k_sparse_equal"), default=None)
    ex.add_argument("--signal-k", dest="signal_k", type=int, default=None)
    ex.add_argument("--hash-s", dest="hash_s", type=int, default=None)
    ex.add_argument("--normalization", choices=NORMALIZATIONS, default=None)
    ex.add_argument("--noisy", action=argparse.BooleanOptionalAction, default=None)
    ex.add_argument("--grid-min", dest="grid_min", type=int, default=None)
    ex.add_argument("--grid-max", dest="grid_max", type=int, default=None)
    ex.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    _add_param_flags(ex)
    ex.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except (BadDimensions, DimensionMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except (BadParams, TooLarge, ZeroVector, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
