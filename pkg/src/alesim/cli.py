"""Command-line interface: simulate / sweep / analyze / oracle / trace."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, chain, harness, limits
from .conformal import boundary_trace
from .errors import AleError, ConfigError, DomainError


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="alesim",
                                description="Aggregation-model simulation lab")
    sub = p.add_subparsers(dest="command")

    sim = sub.add_parser("simulate", help="run a replica batch")
    sim.add_argument("--config", help="JSON config file")
    sim.add_argument("--preset", choices=sorted(harness.PRESETS),
                     help="named preset instead of a config file")
    sim.add_argument("--out", required=True, help="run directory")
    sim.add_argument("--seed", type=int, help="override master seed")
    sim.add_argument("--replicas", type=int, help="override replica count")
    sim.add_argument("--parallelism", type=int, default=1)

    swp = sub.add_parser("sweep", help="capacity convergence sweep")
    swp.add_argument("--config", help="base JSON config file")
    swp.add_argument("--preset", choices=sorted(harness.PRESETS))
    swp.add_argument("--c-list", default="1e-2,1e-3,1e-4",
                     help="comma-separated decreasing capacities")
    swp.add_argument("--replicas", type=int, default=20)
    swp.add_argument("--sigma-exponent", type=float, default=0.2)
    swp.add_argument("--seed", type=int)
    swp.add_argument("--out", required=True, help="output CSV path")

    ana = sub.add_parser("analyze", help="replica statistics vs the oracle")
    ana.add_argument("--runs", nargs="+", required=True,
                     help="run directories from `simulate`")
    ana.add_argument("--oracle", action="store_true",
                     help="compare against the exact limit covariances")
    ana.add_argument("--t", type=float, help="analysis time (default horizon)")
    ana.add_argument("--force", action="store_true",
                     help="allow mixed config hashes")
    ana.add_argument("--out", help="mode-report CSV path (default stdout)")

    orc = sub.add_parser("oracle", help="print exact limit quantities as CSV")
    orc.add_argument("--tau", action="store_true")
    orc.add_argument("--nu", action="store_true")
    orc.add_argument("--q", action="store_true")
    orc.add_argument("--cov", choices=["mode", "cap", "disc"])
    orc.add_argument("--zeta", type=float, default=0.0)
    orc.add_argument("--alpha", type=float, default=0.0)
    orc.add_argument("--eta", type=float, default=0.0)
    orc.add_argument("--sigma", type=float, default=0.0)
    orc.add_argument("--t", type=float, default=1.0)
    orc.add_argument("--k", type=int, default=0)
    orc.add_argument("--kmax", type=int,
                     help="emit modes 0..kmax instead of a single k")
    orc.add_argument("--variant", default="Q",
                     choices=[v.value for v in limits.Variant])

    trc = sub.add_parser("trace", help="simulate once, write a boundary polyline")
    trc.add_argument("--config", help="JSON config file")
    trc.add_argument("--preset", choices=sorted(harness.PRESETS))
    trc.add_argument("--seed", type=int)
    trc.add_argument("--samples", type=int, default=1024)
    trc.add_argument("--rho", type=float, default=1.0 + 1e-6)
    trc.add_argument("--out", required=True, help="output CSV path")
    return p


def _config_from_args(args) -> "harness.SimConfig":
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.config:
        cfg = harness.load_config(args.config)
    elif args.preset:
        cfg = harness.preset_config(args.preset)
    else:
        raise ConfigError("one of --config or --preset is required")
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    if getattr(args, "replicas", None) is not None:
        overrides["replicas"] = args.replicas
    if overrides:
        d = cfg.to_dict()
        d.update(overrides)
        cfg = harness.SimConfig.from_dict(d)
    return cfg


def _cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    out = harness.run_batch(cfg, args.out, parallelism=args.parallelism)
    print(f"run directory: {out}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    c_list = [float(x) for x in args.c_list.split(",") if x]
    table = analysis.convergence_sweep(cfg, c_list, args.replicas,
                                       sigma_exponent=args.sigma_exponent,
                                       seed=args.seed)
    table.to_csv(args.out)
    for metric, slope in sorted(table.slopes.items()):
        print(f"{metric} slope: {slope:.4f}")
    return 0


def _cmd_analyze(args) -> int:
    report_modes, report_cap = harness.analyze_runs(args.runs, t=args.t,
                                                    force=args.force)
    if args.out:
        report_modes.to_csv(args.out)
        print(f"mode report: {args.out}")
    else:
        for s in report_modes.stats:
            print(f"k={s.k} var={s.variance:.6g} oracle={s.oracle_var:.6g} "
                  f"verdict={'pass' if s.passed else 'fail'}")
    cap = report_cap.stats[0]
    print(f"cap var={cap.variance:.6g} oracle={cap.oracle_var:.6g} "
          f"verdict={'pass' if cap.passed else 'fail'}")
    return 0


class _OracleParams:
    def __init__(self, alpha, eta, sigma):
        self.alpha, self.eta, self.sigma = alpha, eta, sigma


def _cmd_oracle(args) -> int:
    alpha, eta = args.alpha, args.eta
    zeta = args.zeta if (alpha == 0.0 and eta == 0.0 and args.zeta != 0.0) \
        else alpha + eta
    rows = []
    if args.tau:
        rows.append(("tau", args.t, limits.tau(args.t, zeta)))
    if args.nu:
        rows.append(("nu", args.t, limits.nu(args.t, alpha, zeta)))
    if args.q:
        variant = limits.Variant(args.variant)
        ks = range(args.kmax + 1) if args.kmax is not None else [args.k]
        for k in ks:
            rows.append((f"q[{variant.value}]", k,
                         limits.multiplier_q(k, zeta, args.sigma, variant)))
    if args.cov:
        params = _OracleParams(alpha, eta, args.sigma)
        ks = range(args.kmax + 1) if args.kmax is not None else [args.k]
        for k in ks:
            rows.append((f"cov[{args.cov}] k={k}", args.t,
                         limits.ou_covariance(k, args.t, params,
                                              flavor=args.cov)))
    if not rows:
        raise ConfigError("nothing requested: pass --tau/--nu/--q/--cov")
    print("quantity,argument,value")
    for name, arg, val in rows:
        print(f"{name},{arg},{val:.9g}")
    return 0


def _cmd_trace(args) -> int:
    cfg = _config_from_args(args)
    runner = chain.run if cfg.mode == "continuous" else chain.run_discrete
    traj = runner(cfg, seed=cfg.master_seed, replica=0)
    pts = boundary_trace(traj.cluster, M=args.samples, rho=args.rho)
    with open(args.out, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash()}\n")
        fh.write("re,im\n")
        for w in pts:
            fh.write(f"{w.real:.12g},{w.imag:.12g}\n")
    print(f"boundary trace: {args.out} ({pts.shape[0]} points)")
    return 0


_COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep,
             "analyze": _cmd_analyze, "oracle": _cmd_oracle,
             "trace": _cmd_trace}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AleError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
