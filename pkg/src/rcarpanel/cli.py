"""Command-line interface: ``rcarpanel {simulate,estimate,test,density,study}``.

Exit status is 0 on success, 1 on a domain or estimation error (message on
stderr) and 2 on bad usage.
"""
import argparse
from dataclasses import replace
import logging
import sys

import numpy as np

from . import estimators, gof, rcar_sim, study
from .errors import ConfigurationError, RcarError
from .special_fn import BetaParams


def _parse_innov(text):
    if text == "normal":
        return rcar_sim.StandardNormal()
    kind, _, df = text.partition(":")
    if kind == "t" and df:
        return rcar_sim.StudentT(float(df))
    raise ConfigurationError(f"bad innovation law {text!r} (use 'normal' or 't:DF')")


def cmd_simulate(args):
    cfg = rcar_sim.PanelConfig(
        N=args.N,
        n=args.n,
        coeff=rcar_sim.parse_coeff_dist(args.coeff),
        shock_b=args.shock_b,
        innov=_parse_innov(args.innov),
        burnin_eps=args.burnin_eps,
        burnin_cap=args.burnin_cap,
        seed=args.seed,
        panel_id=args.panel_id,
    )
    panel = rcar_sim.simulate_panel(cfg)
    for w in panel.warnings:
        print(f"warning: {w}", file=sys.stderr)
    rcar_sim.write_panel_csv(panel, args.out)
    return 0


def cmd_estimate(args):
    panel = rcar_sim.read_panel_csv(args.panel)
    estimators.write_coeffs_csv(estimators.estimate_coeffs(panel), args.out)
    return 0


def _theta(args):
    if args.alpha is None or args.beta is None:
        raise ConfigurationError(f"--null {args.null} needs --alpha and --beta")
    return BetaParams(args.alpha, args.beta)


def cmd_test(args):
    e = estimators.read_coeffs_csv(args.coeffs)
    if args.null == "beta":
        gof.check_support(e)
        res = gof.t1_simple(e, gof.Simple(rcar_sim.BetaOn01(_theta(args))), args.level)
    elif args.null == "sqrt-beta":
        gof.check_support(e)
        res = gof.t1_simple(e, gof.Simple(rcar_sim.SqrtBeta(_theta(args))), args.level)
    elif args.null == "uniform":
        res = gof.t1_simple(e, gof.Simple(rcar_sim.Uniform(args.lo, args.hi)), args.level)
    elif args.null == "composite":
        res = gof.t1_composite(e, args.level, args.mc_reps, args.seed)
    else:
        kappa = args.kappa if args.kappa is not None else gof.default_kappa(args.n)
        res = gof.t2_parametric(e, _theta(args).require_above_one(), kappa, args.level)
    lines = [gof.CSV_HEADER, res.to_csv_row()]
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_density(args):
    e = estimators.read_coeffs_csv(args.coeffs)
    kernel = estimators.KERNELS[args.kernel]
    h = args.bandwidth if args.bandwidth is not None else estimators.bandwidth_rule(e.N, args.bw_const)
    grid = np.linspace(args.lo, args.hi, args.points)
    estimators.write_kde_csv(grid, estimators.kde_eval(e, kernel, h, grid), args.out)
    return 0


def cmd_study(args):
    cfg = study.read_study_config(args.config)
    if args.full:
        cfg = study.full_preset(cfg)
    if args.out_dir:
        cfg = replace(cfg, out_dir=args.out_dir)
    if cfg.out_dir is None:
        raise ConfigurationError("study needs out_dir (config key or --out-dir)")
    workers = 1 if args.serial else args.workers
    res = study.run_study(cfg, workers=workers)
    for s in res.summary:
        print(
            f"beta_alt={s['beta_alt']:g} level={s['level']:g} "
            f"T1={s['size_or_power_t1']:.3f} T2={s['size_or_power_t2']:.3f} "
            f"ok={s['reps_ok']} failed={s['reps_failed']}"
        )
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="rcarpanel", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate a panel to CSV")
    s.add_argument("--N", type=int, required=True, help="number of series")
    s.add_argument("--n", type=int, required=True, help="series length")
    s.add_argument("--coeff", required=True, help="beta:A,B | sqrtbeta:A,B | point:A | uniform:LO,HI")
    s.add_argument("--shock-b", type=float, default=0.0, help="common-shock weight b in [0, 1]")
    s.add_argument("--innov", default="normal", help="normal | t:DF (DF > 4)")
    s.add_argument("--burnin-eps", type=float, default=1e-9)
    s.add_argument("--burnin-cap", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--panel-id", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("estimate", help="lag-1 autocorrelation of every series")
    s.add_argument("--panel", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_estimate)

    s = sub.add_parser("test", help="goodness-of-fit test on estimated coefficients")
    s.add_argument("--coeffs", required=True)
    s.add_argument("--null", required=True, choices=["beta", "sqrt-beta", "uniform", "composite", "parametric"])
    s.add_argument("--alpha", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--lo", type=float, default=-1 + 1e-9)
    s.add_argument("--hi", type=float, default=1 - 1e-9)
    s.add_argument("--level", type=float, default=0.05)
    s.add_argument("--mc-reps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--kappa", type=float, help="truncation for the parametric test")
    s.add_argument("--n", type=int, help="series length, used for the default kappa")
    s.add_argument("--out")
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("density", help="kernel density estimate on a grid")
    s.add_argument("--coeffs", required=True)
    s.add_argument("--kernel", default="epanechnikov", choices=sorted(estimators.KERNELS))
    s.add_argument("--bandwidth", type=float, help="fixed bandwidth h")
    s.add_argument("--bw-const", type=float, default=1.0, help="c in h = c N^(-1/5)")
    s.add_argument("--lo", type=float, default=-1.0)
    s.add_argument("--hi", type=float, default=1.0)
    s.add_argument("--points", type=int, default=201)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_density)

    s = sub.add_parser("study", help="run the size/power simulation study")
    s.add_argument("--config", required=True)
    s.add_argument("--full", action="store_true", help="5000 replications per cell")
    s.add_argument("--workers", type=int, help="worker processes (default: RCAR_WORKERS or CPU count)")
    s.add_argument("--serial", action="store_true", help="run in-process on one worker")
    s.add_argument("--out-dir")
    s.set_defaults(func=cmd_study)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (RcarError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
