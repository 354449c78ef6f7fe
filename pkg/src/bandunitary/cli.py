"""Experiment runner: ``bandunitary <command> [flags]`` or ``--config run.json``.

Every command writes plot-ready CSV tables, a JSON summary and a run
manifest into the output directory (``--out``, else ``$BANDUNITARY_OUT``,
else ``./bandunitary_out``). Exit codes: 0 success, 2 invalid configuration,
3 numerical failure, 4 selftest failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigurationError, DomainError, NumericError, UsageError
from .model import Coefficients, DistributionSpec, PhaseModel

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_SELFTEST = 0, 2, 3, 4
ENV_OUT = "BANDUNITARY_OUT"

COMMANDS = ("dos", "lyapunov", "thouless-scan", "free-exact", "paths",
            "support-check", "analyticity", "selftest")

CLAIMS = {
    "dos": "density of states of truncations; uniform phases give d lambda/2pi, zero phases the free band",
    "lyapunov": "Lyapunov exponent of the transfer-matrix cocycle (per two-site step)",
    "thouless-scan": "Thouless formula: gamma(z) = 2 int ln|z-e^{il}| dk + ln(1/t^2) - ln|z|",
    "free-exact": "free operator: band spectrum |l| <= arccos(r^2-t^2), closed-form N0, dk0, gamma0",
    "paths": "path sums S_{n-1}(j) from the generating-function transfer matrix",
    "support-check": "almost sure spectrum = exp(i supp mu) times the free band",
    "analyticity": "analytic density of states when B > ln(1+2rt) + ln A",
    "selftest": "fast subset of the acceptance checks",
}


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(message)


def _add_common(p, phases=True):
    p.add_argument("--config", help="JSON file whose keys mirror the flags")
    p.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./bandunitary_out)")
    p.add_argument("--r", type=float, default=math.sqrt(0.5), help="reflexion coefficient r")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: machine parallelism)")
    if phases:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--uniform", dest="phases", action="store_const", const="uniform")
        g.add_argument("--free", dest="phases", action="store_const", const="free")
        g.add_argument("--phases", choices=["uniform", "free", "arc", "fourier"])
        p.set_defaults(phases="uniform")
        p.add_argument("--half-width", type=float, default=0.3,
                       help="half-width of the arc law of eta (phases=arc)")
        p.add_argument("--A", type=float, default=1.0, help="Fourier bound constant A")
        p.add_argument("--B", type=float, default=1.0, help="Fourier decay rate B")


def build_parser():
    parser = _Parser(prog="bandunitary", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("dos", help=CLAIMS["dos"])
    _add_common(p)
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--bins", type=int, default=256)
    p.add_argument("--moments", type=int, default=8, help="largest moment order")

    p = sub.add_parser("lyapunov", help=CLAIMS["lyapunov"])
    _add_common(p)
    p.add_argument("--grid", default="circle:8", help="circle:N, ring:RADIUS:N or comma list of lambdas")
    p.add_argument("--steps", type=int, default=100000)
    p.add_argument("--realizations", type=int, default=32)
    p.add_argument("--norm", choices=["op", "fro"], default="op")

    p = sub.add_parser("thouless-scan", help=CLAIMS["thouless-scan"])
    _add_common(p)
    p.add_argument("--grid", default="circle:16")
    p.add_argument("--steps", type=int, default=20000)
    p.add_argument("--realizations", type=int, default=8)
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--dos-realizations", type=int, default=40)

    p = sub.add_parser("free-exact", help=CLAIMS["free-exact"])
    _add_common(p, phases=False)
    p.add_argument("--size", type=int, default=2000)
    p.add_argument("--points", type=int, default=64)
    p.add_argument("--steps", type=int, default=20000)

    p = sub.add_parser("paths", help=CLAIMS["paths"])
    _add_common(p, phases=False)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--exact", action="store_true", help="rational arithmetic (requires r = t)")
    p.add_argument("--convergence", default="", help="comma list of n for the ratio table")

    p = sub.add_parser("support-check", help=CLAIMS["support-check"])
    _add_common(p)
    p.set_defaults(phases="arc")
    p.add_argument("--size", type=int, default=500)
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--tol", type=float, default=0.05)

    p = sub.add_parser("analyticity", help=CLAIMS["analyticity"])
    _add_common(p)
    p.set_defaults(phases="fourier")
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--realizations", type=int, default=20000)

    p = sub.add_parser("selftest", help=CLAIMS["selftest"])
    _add_common(p, phases=False)
    return parser


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def parse_config(argv):
    """Parse flags, merging a JSON config file; flags given explicitly win."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise _ArgError("a command is required: " + ", ".join(COMMANDS))
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigurationError("config must be a JSON object")
        cmd = cfg.pop("command", args.command)
        if cmd != args.command:
            raise ConfigurationError(f"config is for {cmd!r}, not {args.command!r}")
        sp = _subparser(parser, args.command)
        known = {a.dest for a in sp._actions} - {"help", "config"}
        bad = sorted(k for k in (key.replace("-", "_") for key in cfg) if k not in known)
        if bad:
            raise ConfigurationError(
                f"unknown config keys {bad}; allowed: {sorted(known)}")
        sp.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
        args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args):
    for name in ("size", "realizations", "steps", "n", "bins", "dos_realizations", "nmax"):
        v = getattr(args, name, None)
        if v is not None and (not isinstance(v, int) or v < 1):
            raise ConfigurationError(f"{name} must be a positive integer, got {v!r}")
    Coefficients.from_r(args.r)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        raise ConfigurationError("workers must be positive")


def _params(args):
    return Coefficients.from_r(args.r)


def _model(args):
    kind = args.phases
    if kind == "uniform":
        return PhaseModel.uniform()
    if kind == "free":
        return PhaseModel.free()
    if kind == "arc":
        return PhaseModel.iid(DistributionSpec.arc(0.0, args.half_width))
    if kind == "fourier":
        if args.A != 1.0:
            raise ConfigurationError("the built-in Fourier law is wrapped Cauchy, which has A = 1")
        return PhaseModel.iid(DistributionSpec.wrapped_cauchy(args.B))
    raise ConfigurationError(f"unknown phase model {kind!r}")


def parse_grid(spec):
    """``circle:N`` | ``ring:RADIUS:N`` | comma-separated lambdas on the circle."""
    parts = str(spec).split(":")
    try:
        if parts[0] == "circle":
            n = int(parts[1])
            return np.exp(1j * (-np.pi + 2 * np.pi * (np.arange(n) + 0.5) / n))
        if parts[0] == "ring":
            rad, n = float(parts[1]), int(parts[2])
            return rad * np.exp(1j * (-np.pi + 2 * np.pi * (np.arange(n) + 0.5) / n))
        return np.exp(1j * np.array([float(x) for x in spec.split(",")]))
    except (IndexError, ValueError) as exc:
        raise ConfigurationError(f"bad grid specification {spec!r}") from exc


class _Run:
    def __init__(self, args):
        self.args = args
        out = args.out or os.environ.get(ENV_OUT) or "bandunitary_out"
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.t0 = time.time()

    def csv(self, name, body_rows, columns):
        path = self.out / name
        with open(path, "w", newline="") as f:
            f.write(f"# claim: {CLAIMS[self.args.command]}\n")
            w = csv.writer(f, lineterminator="\n")
            w.writerow(columns)
            for row in body_rows:
                w.writerow([_fmt(v) for v in row])
        self.files.append(name)

    def text(self, name, text):
        path = self.out / name
        body = text if text.startswith("#") else f"# claim: {CLAIMS[self.args.command]}\n" + text
        path.write_text(body)
        self.files.append(name)

    def summary(self, data):
        data = {"claim": CLAIMS[self.args.command], **data}
        (self.out / "summary.json").write_text(json.dumps(data, indent=2, default=_jsonable))
        self.files.append("summary.json")

    def manifest(self):
        cfg = {k: v for k, v in vars(self.args).items() if k not in ("config",)}
        man = {
            "claim": CLAIMS[self.args.command],
            "config": cfg,
            "seed": self.args.seed,
            "version": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "wall_time_s": time.time() - self.t0,
            "finished_utc": datetime.now(timezone.utc).isoformat(),
            "files": self.files,
        }
        (self.out / "manifest.json").write_text(json.dumps(man, indent=2, default=_jsonable))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


def _workers(args):
    from ._parallel import default_workers
    return args.workers or default_workers()


def cmd_dos(args, run):
    from .spectrum import FreeMeasure, ks_distance, pooled_measure, dos_moments
    params, model = _params(args), _model(args)
    n_real = 1 if model.is_free else args.realizations
    mu = pooled_measure(model, params, args.size, n_real, args.seed, workers=_workers(args))
    edges, dens = mu.histogram(args.bins)
    run.csv("dos_histogram.csv",
            [(edges[i], edges[i + 1], dens[i]) for i in range(args.bins)],
            ["lambda_lo", "lambda_hi", "density_per_dlambda_over_2pi"])
    mom = dos_moments(model, params, args.moments, max(n_real, 2), args.seed,
                      workers=_workers(args))
    run.csv("dos_moments.csv",
            [(s, mom.m[s].real, mom.m[s].imag, mom.stderr[s]) for s in range(args.moments + 1)],
            ["s", "re", "im", "stderr"])
    summary = {"pool_size": mu.size, "moments_from_phases": mu.moments(args.moments)}
    if args.phases == "uniform":
        summary["ks_uniform"] = ks_distance(mu, "uniform")
        summary["max_bin_deviation"] = float(np.max(np.abs(dens - 1.0)))
        summary["flatness_tolerance"] = 4.0 * math.sqrt(args.bins / mu.size)
        summary["flat"] = summary["max_bin_deviation"] <= summary["flatness_tolerance"]
    elif args.phases == "free":
        summary["ks_free_closed_form"] = ks_distance(mu, FreeMeasure(params).cdf)
    run.summary(summary)
    print(json.dumps({k: v for k, v in summary.items() if k != "moments_from_phases"},
                     default=_jsonable))
    return EXIT_OK


def cmd_lyapunov(args, run):
    from .thouless import gamma_uniform
    from .transfer import lyapunov_estimate, lyapunov_free
    params, model = _params(args), _model(args)
    z = parse_grid(args.grid)
    est = lyapunov_estimate(z, model, params, args.steps, args.realizations, args.seed,
                            norm=args.norm, workers=_workers(args))
    if args.phases == "free":
        ref = lyapunov_free(z, params)
    elif args.phases == "uniform":
        ref = gamma_uniform(z, params)
    else:
        ref = np.full(len(z), np.nan)
    run.csv("lyapunov.csv",
            [(zz.real, zz.imag, g, s, f) for zz, g, s, f in zip(z, est.gamma, est.stderr, ref)],
            ["z_re", "z_im", "gamma", "stderr", "closed_form"])
    gap = np.nanmax(np.abs(est.gamma - ref)) if np.isfinite(ref).any() else None
    run.summary({"max_gap_closed_form": gap, "n_steps": args.steps})
    print(f"max |gamma - closed form| = {gap}")
    return EXIT_OK


def cmd_thouless(args, run):
    from .thouless import thouless_scan
    params, model = _params(args), _model(args)
    z = parse_grid(args.grid)
    rep = thouless_scan(z, model, params, n_steps=args.steps, n_lyap_realizations=args.realizations,
                        size=args.size, n_dos_realizations=args.dos_realizations,
                        seed=args.seed, workers=_workers(args))
    run.text("thouless.csv", rep.to_csv(header=f"claim: {CLAIMS[args.command]}"))
    run.summary(json.loads(rep.to_json()))
    print(f"max |gamma_cocycle - gamma_thouless| = {rep.max_abs_gap:.6g}")
    return EXIT_OK


def cmd_free_exact(args, run):
    from .spectrum import FreeMeasure, eigenphases, truncate, band_functions
    from .transfer import lyapunov_estimate, lyapunov_free
    params = _params(args)
    F = FreeMeasure(params)
    block = truncate(params, PhaseModel.free().sample((-4, args.size + 4), args.seed), 0, args.size)
    mu = eigenphases(block)
    lam = -np.pi + 2 * np.pi * (np.arange(args.points) + 0.5) / args.points
    dens, n0 = F.density(lam), F.cdf(lam)
    g0 = lyapunov_free(np.exp(1j * lam), params)
    est = lyapunov_estimate(np.exp(1j * lam), PhaseModel.free(), params, args.steps, 1, args.seed)
    run.csv("free_closed_forms.csv",
            [(l, d, n, mu.cdf(l), g, e) for l, d, n, g, e in zip(lam, dens, n0, g0, est.gamma)],
            ["lambda", "dk0_density", "N0", "N_empirical", "gamma0", "gamma_cocycle"])
    x = -np.pi + 2 * np.pi * np.arange(args.points) / args.points
    lp, lm, _ = band_functions(x, params)
    run.csv("band_functions.csv", [(xx, np.angle(a), np.angle(b)) for xx, a, b in zip(x, lp, lm)],
            ["x", "alpha_plus", "alpha_minus"])
    grid = np.linspace(-np.pi, np.pi, 20001)
    summary = {
        "band_edge": params.band_edge,
        "sup_gap_N": float(np.max(np.abs(mu.cdf(grid) - F.cdf(grid)))),
        "max_gamma_gap": float(np.max(np.abs(est.gamma - g0))),
        "max_phase_beyond_edge": float(np.max(np.abs(mu.phases)) - params.band_edge),
    }
    run.summary(summary)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_paths(args, run):
    from .combinatorics import convergence_table_csv, gen_poly_sequence, path_sum_bruteforce
    params = _params(args)
    rows, worst = [], 0.0
    for n, (plus, minus) in enumerate(gen_poly_sequence(args.n, params, args.exact), start=1):
        coeffs = {**plus.as_dict(), **minus.as_dict()}
        for j in sorted(coeffs):
            c = coeffs[j]
            value = float(c) if args.exact else float(c.real)
            brute = path_sum_bruteforce(n, j, params) if n <= 10 else float("nan")
            if n <= 10:
                worst = max(worst, abs(value - brute))
            rows.append((n, j, str(c) if args.exact else value, brute))
    run.csv("paths.csv", rows, ["n", "j", "S", "bruteforce"])
    summary = {"max_abs_diff_bruteforce": worst, "exact": args.exact}
    if args.convergence:
        ns = [int(x) for x in args.convergence.split(",")]
        run.text("convergence.csv", convergence_table_csv(
            ns, params, header=f"claim: {CLAIMS[args.command]}"))
    run.summary(summary)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_support(args, run):
    from .spectrum import coverage, pooled_measure, predicted_support, support_check
    params, model = _params(args), _model(args)
    arcs = predicted_support(model.eta_law(), params)
    mu = pooled_measure(model, params, args.size, args.realizations, args.seed,
                        workers=_workers(args))
    rep = support_check(mu, arcs, args.tol)
    cov = coverage(mu, arcs, args.tol)
    run.csv("support_arcs.csv", arcs.intervals(), ["start", "end"])
    summary = {"arcs": arcs.intervals(), "outlier_fraction": rep.outlier_fraction,
               "max_signed_distance": rep.max_signed_distance, "coverage": cov, "tol": args.tol}
    run.summary(summary)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_analyticity(args, run):
    from .combinatorics import analyticity_margin, moment_bound
    from .spectrum import dos_moments
    params, model = _params(args), _model(args)
    v = analyticity_margin(args.A, args.B, params)
    mom = dos_moments(model, params, args.nmax, args.realizations, args.seed,
                      workers=_workers(args))
    rows = []
    for n in range(1, args.nmax + 1):
        b = moment_bound(n, args.A, args.B, params)
        rows.append((n, abs(mom.m[n]), mom.stderr[n], b, abs(mom.m[n]) <= b + 3 * mom.stderr[n]))
    run.csv("moment_bound.csv", rows, ["n", "abs_m", "stderr", "bound", "within"])
    summary = {"margin": v.margin, "verdict": v.verdict, "all_r": v.all_r,
               "r_minus": v.r_minus, "r_plus": v.r_plus,
               "moment_bound_holds": all(r[4] for r in rows)}
    run.summary(summary)
    print(json.dumps(summary))
    return EXIT_OK


def cmd_selftest(args, run):
    from .selftest import run_selftest
    results = run_selftest()
    run.csv("selftest.csv", [(r.name, r.passed, r.detail) for r in results],
            ["check", "passed", "detail"])
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
    ok = all(r.passed for r in results)
    run.summary({"passed": ok, "n_checks": len(results)})
    return EXIT_OK if ok else EXIT_SELFTEST


HANDLERS = {
    "dos": cmd_dos,
    "lyapunov": cmd_lyapunov,
    "thouless-scan": cmd_thouless,
    "free-exact": cmd_free_exact,
    "paths": cmd_paths,
    "support-check": cmd_support,
    "analyticity": cmd_analyticity,
    "selftest": cmd_selftest,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_config(argv)
    except (_ArgError, ConfigurationError, UsageError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run = _Run(args)
    try:
        code = HANDLERS[args.command](args, run)
    except NumericError as exc:
        print(f"numerical failure in {args.command}: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigurationError, UsageError, DomainError) as exc:
        print(f"configuration error in {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    run.manifest()
    return code
