"""Command-line entry point.

Subcommands: simulate, lyapunov, coeffs, marginal, bk, experiment,
summarize, plot.  Exit codes: 0 success, 2 usage error, 3 numeric or
stationarity error, 4 I/O error.  Every command validates its inputs before
touching the filesystem and writes outputs atomically, so a failed run
leaves no partial files.  When GARCHBK_OUTPUT_DIR is set, relative output
paths resolve against it.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import harness, svgplot
from .bahadur import bk_remainder
from .garch import (
    GarchParams,
    PathSample,
    arch_infinity_coeffs,
    is_stationary,
    lyapunov_exponent,
    simulate,
)
from .innovations import InnovationModel
from .marginal import MarginalModel, build_marginal

OUTPUT_DIR_ENV = "GARCHBK_OUTPUT_DIR"


def _formatter(prog):
    # fixed width keeps --help output stable across terminals
    return argparse.HelpFormatter(prog, width=79)


def _resolve_out(path: str) -> str:
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _write_atomic(path: str, text: str):
    parent = os.path.dirname(path) or "."
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_atomic_bytes(path: str, blob: bytes):
    parent = os.path.dirname(path) or "."
    if not os.path.isdir(parent):
        raise FileNotFoundError(f"output directory does not exist: {parent}")
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)


def _params_from_args(args) -> GarchParams:
    return GarchParams(delta=args.delta, beta=tuple(args.beta),
                       alpha=tuple(args.alpha))


def _innovation_from_args(args) -> InnovationModel:
    return InnovationModel(family=args.family.replace("-", "_"), df=args.df)


def _add_model_flags(p, need_alpha_default=True):
    p.add_argument("--delta", type=float, required=True,
                   help="constant term of the volatility recursion, > 0")
    p.add_argument("--beta", type=float, nargs="*", default=[],
                   help="volatility-lag coefficients beta_1..beta_p")
    p.add_argument("--alpha", type=float, nargs="+",
                   default=[0.0] if need_alpha_default else None,
                   help="squared-observation coefficients alpha_1..alpha_q")
    p.add_argument("--family", choices=["gaussian", "student-t"],
                   default="gaussian", help="innovation family")
    p.add_argument("--df", type=float, default=None,
                   help="degrees of freedom for student-t (must exceed 4)")


def write_path_csv(path_sample: PathSample, out: str):
    """Path file: provenance comment, then index,x,sigma2 rows."""
    lines = [
        f"# garchbk path seed={path_sample.seed} burn_in={path_sample.burn_in}",
        "index,x,sigma2",
    ]
    for i, (x, s2) in enumerate(zip(path_sample.x, path_sample.sigma2)):
        lines.append(f"{i},{float(x)!r},{float(s2)!r}")
    _write_atomic(out, "\n".join(lines) + "\n")


def read_path_csv(path: str) -> PathSample:
    seed, burn_in = 0, 0
    xs, s2s = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                for tok in line[1:].split():
                    if tok.startswith("seed="):
                        seed = int(tok[5:])
                    elif tok.startswith("burn_in="):
                        burn_in = int(tok[8:])
                continue
            if line.startswith("index,"):
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"malformed path row: {line!r}")
            xs.append(float(parts[1]))
            s2s.append(float(parts[2]))
    if not xs:
        raise ValueError(f"no data rows in path file {path}")
    return PathSample(x=np.array(xs), sigma2=np.array(s2s), seed=seed,
                      burn_in=burn_in)


def _cmd_simulate(args) -> int:
    params = _params_from_args(args)
    model = _innovation_from_args(args)
    out = _resolve_out(args.out)
    path = simulate(params, model, n=args.n, seed=args.seed,
                    burn_in=args.burn_in,
                    check_stationarity=not args.allow_nonstationary)
    write_path_csv(path, out)
    return 0


def _cmd_lyapunov(args) -> int:
    params = _params_from_args(args)
    model = _innovation_from_args(args)
    est = lyapunov_exponent(params, model, iterations=args.iterations,
                            seed=args.seed)
    verdict = is_stationary(params, model, iterations=args.iterations,
                            seed=args.seed)
    payload = {
        "gamma_hat": est.gamma_hat,
        "std_error": est.std_error,
        "iterations": est.iterations,
        "verdict": verdict.verdict,
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(_resolve_out(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_coeffs(args) -> int:
    params = _params_from_args(args)
    a, b = arch_infinity_coeffs(params, m=args.m)
    text = json.dumps({"a": a, "b": list(b)}, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(_resolve_out(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_marginal(args) -> int:
    if not args.dump and not args.save:
        raise ValueError("nothing to do: pass --dump and/or --save")
    params = _params_from_args(args)
    model = _innovation_from_args(args)
    marg = build_marginal(params, model, m_draws=args.m_draws, gap=args.gap,
                          seed=args.seed, burn_in=args.burn_in)
    if args.dump:
        lines = ["x,F,f"]
        for x, F, f in zip(marg.grid_x, marg.grid_cdf, marg.grid_pdf):
            lines.append(f"{float(x)!r},{float(F)!r},{float(f)!r}")
        _write_atomic(_resolve_out(args.dump), "\n".join(lines) + "\n")
    if args.save:
        import io

        buf = io.BytesIO()
        marg.save(buf)
        _write_atomic_bytes(_resolve_out(args.save), buf.getvalue())
    return 0


def _cmd_bk(args) -> int:
    path = read_path_csv(args.path)
    marg = MarginalModel.load(args.marginal)
    out = _resolve_out(args.out)
    res = bk_remainder(path, marg, interval=tuple(args.interval))
    payload = {
        "n": res.n,
        "seed": res.seed,
        "r_uniform": res.r_uniform,
        "r_general": res.r_general,
        "r_general_full": res.r_general_full,
        "sup_beta": res.sup_beta,
        "oscillation": res.oscillation,
        "lil": res.lil,
        "interval": list(args.interval),
    }
    _write_atomic(out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def _cmd_experiment(args) -> int:
    config = harness.load_config(args.config)
    out_dir = args.output_dir or config.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    if out_dir is None:
        raise ValueError(
            "no output directory: pass --output-dir, set output_dir in the "
            f"config, or set {OUTPUT_DIR_ENV}"
        )
    config = harness.ExperimentConfig(
        params=config.params, innovation=config.innovation,
        n_grid=config.n_grid, replications=config.replications,
        master_seed=config.master_seed, interval=config.interval,
        marginal=config.marginal, burn_in=config.burn_in,
        output_dir=out_dir,
    )
    result = harness.run_experiment(config, workers=args.threads)
    sys.stdout.write(
        f"wrote {len(result.rows)} rows to {os.path.join(out_dir, 'results.csv')} "
        f"in {result.elapsed_seconds:.1f}s\n"
    )
    return 0


def _cmd_summarize(args) -> int:
    summary = harness.summarize(getattr(args, "in"))
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write_atomic(_resolve_out(args.out), text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_plot(args) -> int:
    with open(args.summary) as fh:
        summary = json.load(fh)
    ns = [int(n) for n in summary["n_values"]]
    if len(ns) < 2:
        raise ValueError("plotting needs a summary with at least 2 n values")
    per_n = summary["per_n"]
    out = _resolve_out(args.out)
    if args.kind == "loglog-rate":
        medians = [per_n[str(n)][args.stat]["median"] for n in ns]
        fit = summary.get("fits", {}).get(args.stat)
        if fit is not None:
            slope, intercept = fit["exponent"], fit["intercept"]
        else:  # two-point summaries carry no stored fit
            slope, intercept = np.polyfit(np.log(ns), np.log(medians), 1)
        svg = svgplot.rate_figure(ns, medians, float(slope), float(intercept),
                                  reference=not args.no_reference,
                                  stat=args.stat)
    elif args.kind == "ratio":
        table = summary["ratios"][f"{args.stat}_over_r_n"]
        ratios = [table[str(n)] for n in ns]
        svg = svgplot.ratio_figure(ns, ratios, stat=args.stat)
    else:
        osc = [summary["ratios"]["oscillation_over_b_n_star"][str(n)] for n in ns]
        lil = [per_n[str(n)]["lil"]["median"] for n in ns]
        svg = svgplot.diagnostics_figure(ns, osc, lil)
    _write_atomic(out, svg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="garchbk",
        formatter_class=_formatter,
        description="GARCH(p,q) simulation and Bahadur-Kiefer remainder "
                    "Monte Carlo.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p = sub.add_parser("simulate", formatter_class=_formatter,
                       help="simulate a path and write it as CSV")
    _add_model_flags(p)
    p.add_argument("--n", type=int, required=True, help="points to keep")
    p.add_argument("--burn-in", type=int, default=10_000,
                   help="steps discarded before the kept window")
    p.add_argument("--seed", type=int, required=True, help="path seed")
    p.add_argument("--allow-nonstationary", action="store_true",
                   help="skip the stationarity check")
    p.add_argument("--out", required=True,
                   help="output CSV (columns index,x,sigma2)")
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("lyapunov", formatter_class=_formatter,
                       help="estimate the top Lyapunov exponent")
    _add_model_flags(p)
    p.add_argument("--iterations", type=int, default=200_000,
                   help="matrix-product steps")
    p.add_argument("--seed", type=int, default=0, help="estimator seed")
    p.add_argument("--out", default=None,
                   help="write JSON here instead of stdout")
    p.set_defaults(fn=_cmd_lyapunov)

    p = sub.add_parser("coeffs", formatter_class=_formatter,
                       help="ARCH(infinity) expansion coefficients")
    p.add_argument("--delta", type=float, required=True,
                   help="constant term of the volatility recursion, > 0")
    p.add_argument("--beta", type=float, nargs="*", default=[],
                   help="volatility-lag coefficients")
    p.add_argument("--alpha", type=float, nargs="+", default=[0.0],
                   help="squared-observation coefficients")
    p.add_argument("--m", type=int, default=200,
                   help="number of coefficients to emit")
    p.add_argument("--out", default=None,
                   help="write JSON here instead of stdout")
    p.set_defaults(fn=_cmd_coeffs)

    p = sub.add_parser("marginal", formatter_class=_formatter,
                       help="build the stationary marginal model")
    _add_model_flags(p)
    p.add_argument("-M", "--m-draws", type=int, default=100_000,
                   help="volatility draws in the mixture")
    p.add_argument("--gap", type=int, default=50,
                   help="thinning gap between draws")
    p.add_argument("--seed", type=int, default=0, help="build seed")
    p.add_argument("--burn-in", type=int, default=10_000,
                   help="steps discarded before drawing")
    p.add_argument("--dump", default=None,
                   help="write the (x, F, f) grid as CSV")
    p.add_argument("--save", default=None,
                   help="serialize the model to .npz for reuse")
    p.set_defaults(fn=_cmd_marginal)

    p = sub.add_parser("bk", formatter_class=_formatter,
                       help="remainder statistics of one path")
    p.add_argument("--path", required=True,
                   help="path CSV written by simulate")
    p.add_argument("--marginal", required=True,
                   help="marginal model .npz written by marginal --save")
    p.add_argument("--interval", type=float, nargs=2, default=[0.05, 0.95],
                   metavar=("Y0", "Y1"),
                   help="working interval for the general remainder")
    p.add_argument("--out", required=True, help="output JSON")
    p.set_defaults(fn=_cmd_bk)

    p = sub.add_parser("experiment", formatter_class=_formatter,
                       help="run a replication experiment from a config file")
    p.add_argument("--config", required=True, help="TOML experiment config")
    p.add_argument("--threads", type=int, default=1,
                   help="worker processes for the cell grid")
    p.add_argument("--output-dir", default=None,
                   help="override the config output directory")
    p.set_defaults(fn=_cmd_experiment)

    p = sub.add_parser("summarize", formatter_class=_formatter,
                       help="summarize a results CSV")
    p.add_argument("--in", required=True, help="results CSV")
    p.add_argument("--out", default=None,
                   help="write JSON here instead of stdout")
    p.set_defaults(fn=_cmd_summarize)

    p = sub.add_parser("plot", formatter_class=_formatter,
                       help="render an SVG figure from a summary")
    p.add_argument("--summary", required=True, help="summary JSON")
    p.add_argument("--kind", choices=["loglog-rate", "ratio", "diagnostics"],
                   default="loglog-rate", help="figure kind")
    p.add_argument("--stat", choices=["r_uniform", "r_general"],
                   default="r_general", help="statistic to plot")
    p.add_argument("--no-reference", action="store_true",
                   help="omit the slope -1/4 reference line")
    p.add_argument("--out", required=True, help="output SVG")
    p.set_defaults(fn=_cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (RuntimeError, ArithmeticError) as exc:
        # covers stationarity rejections and numeric divergence
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
