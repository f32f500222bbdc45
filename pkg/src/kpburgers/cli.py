"""Command-line entry point ``kpb``."""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import asymptotics as asy
from .config import load_config, output_root
from .errors import KPBError
from .evolution import build_w, nonlinear_evolve
from .experiments import REGISTRY, default_config, get_experiment, merged_rows, run_experiment
from .fieldio import read_csv, write_csv, write_field, write_trajectory
from .kernels import ModelParams, QuadConfig, SampledProfile, eval_K, eval_Kstar, eval_leading_profile, eval_S


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _add_model_args(p):
    p.add_argument("--nu", type=float, default=1.0)
    p.add_argument("--eps", type=int, default=1, choices=(-1, 1))
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--tol", type=float, default=1e-10)


def _kernel(what, x, y, t, l, params, quad, profile=None):
    if what == "Kstar":
        return eval_Kstar(x, y, params, quad, l)
    if what == "K":
        return eval_K(x, y, t, l, params, quad)
    if what == "S":
        return eval_S(x, y, t, l, params, quad)
    return eval_leading_profile(x, y, t, l, profile, params, quad)


def _profile_from_args(args):
    if args.what != "profile":
        return None
    if args.mass_profile:
        rows = read_csv(args.mass_profile)
        y = np.array([float(r["y"]) for r in rows])
        m = np.array([float(r["M"]) for r in rows])
    else:
        # Gaussian mass profile of u0 = d_x exp(-x^2 - y^2)
        y = np.linspace(-10, 10, 401)
        m = np.sqrt(np.pi) * np.exp(-y * y)
    return SampledProfile(y, m)


def cmd_kernel_eval(args):
    params = ModelParams(args.p, args.eps, args.nu)
    quad = QuadConfig(tol=args.tol)
    prof = _profile_from_args(args)
    xs, ys, ts = _floats(args.x), _floats(args.y), _floats(args.t)
    n = max(len(xs), len(ys), len(ts))
    xs, ys, ts = [(v * n if len(v) == 1 else v) for v in (xs, ys, ts)]
    if not len(xs) == len(ys) == len(ts):
        raise SystemExit("--x, --y and --t must have equal lengths or length 1")
    for x, y, t in zip(xs, ys, ts):
        print(repr(float(_kernel(args.what, x, y, t, args.l, params, quad, prof))))
    return 0


def cmd_kernel_table(args):
    params = ModelParams(args.p, args.eps, args.nu)
    quad = QuadConfig(tol=args.tol)
    prof = _profile_from_args(args)
    xs = np.linspace(*_floats(args.x_range)[:2], int(_floats(args.x_range)[2]))
    ys = np.linspace(*_floats(args.y_range)[:2], int(_floats(args.y_range)[2]))
    rows = []
    for t in _floats(args.t):
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        vals = np.asarray(_kernel(args.what, X, Y, t, args.l, params, quad, prof))
        rows += [(x, y, t, args.l, v) for x, y, v in zip(X.ravel(), Y.ravel(), vals.ravel())]
    header = ["x", "y", "t", "l", "value"]
    if args.out:
        write_csv(args.out, header, rows)
    else:
        import csv

        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows([[repr(float(c)) if isinstance(c, float) else c for c in r] for r in rows])
    return 0


def _solve_from_config(path):
    cfg = load_config(path)
    u0 = cfg.data.sample(cfg.grid)
    traj = nonlinear_evolve(u0, cfg.model, cfg.solve, free_background=cfg.data.bump())
    return cfg, traj


def cmd_evolve(args):
    cfg, traj = _solve_from_config(args.config)
    out = write_trajectory(traj, cfg.output_dir / "trajectory", every=args.dump_every)
    print(f"wrote {len(traj.times)} snapshots to {out}")
    return 0


def cmd_build_w(args):
    cfg, traj = _solve_from_config(args.config)
    times = _floats(args.times) if args.times else [traj.times[-1]]
    outdir = cfg.output_dir / "w"
    outdir.mkdir(parents=True, exist_ok=True)
    rows = []
    for t in times:
        k = traj.index_of(t)
        w = build_w(traj, traj.times[k])
        u = traj.u_snapshots[k]
        write_field(outdir / f"w_{k:05d}.kpbf", w, traj.times[k])
        rows.append((k, traj.times[k], float(np.abs(w.values).max()),
                     float(np.abs(u.values - w.values).max())))
    write_csv(outdir / "index.csv", ["step", "t", "linf_w", "linf_u_minus_w"], rows)
    for r in rows:
        print(f"t={r[1]:g} sup|w|={r[2]:.6e} sup|u-w|={r[3]:.6e}")
    return 0


def cmd_fit_decay(args):
    rows = read_csv(args.series)
    if not rows:
        raise SystemExit(f"{args.series}: empty series")
    cols = list(rows[0].keys())
    tcol = args.t_column or cols[0]
    vcol = args.value_column or cols[1]
    series = asy.DecaySeries([float(r[tcol]) for r in rows], [float(r[vcol]) for r in rows], vcol)
    window = _floats(args.window) if args.window else None
    fit = asy.fit_decay(series, window)
    print(f"slope={fit.slope!r}")
    print(f"log_amplitude={fit.log_amplitude!r}")
    print(f"residual_rms={fit.residual_rms!r}")
    print(f"window={fit.window[0]!r},{fit.window[1]!r}")
    return 0


def cmd_verify(args):
    if args.config:
        cfgs = [load_config(args.config)]
    elif args.all:
        cfgs = [default_config(name) for name in REGISTRY]
    elif args.experiment:
        get_experiment(args.experiment)
        cfgs = [default_config(args.experiment)]
    else:
        raise SystemExit("verify needs --experiment NAME, --all or --config FILE")
    reports = []
    for cfg in cfgs:
        rep = run_experiment(cfg)
        reports.append(rep)
        print(rep.summary(), end="")
    if args.all:
        rows = merged_rows(reports)
        root = output_root()
        root.mkdir(parents=True, exist_ok=True)
        write_csv(root / "report_all.csv",
                  ["criterion", "claim", "target", "measured", "tolerance", "passed", "runtime_s"],
                  [(r.criterion, r.claim, r.target, r.measured, r.tolerance,
                    "pass" if r.passed else "fail", f"{r.runtime:.2f}") for r in rows])
    return 0 if all(r.passed for r in reports) else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="kpb", description="KP-Burgers numerical laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn in (("kernel-eval", cmd_kernel_eval), ("kernel-table", cmd_kernel_table)):
        p = sub.add_parser(name)
        p.add_argument("--what", choices=("Kstar", "K", "S", "profile"), default="K")
        p.add_argument("--l", type=int, default=0)
        p.add_argument("--mass-profile", help="CSV with columns y,M for --what profile")
        _add_model_args(p)
        if name == "kernel-eval":
            p.add_argument("--x", default="0")
            p.add_argument("--y", default="0")
            p.add_argument("--t", default="1")
        else:
            p.add_argument("--x-range", default="-5,5,11", help="start,stop,count")
            p.add_argument("--y-range", default="-5,5,11", help="start,stop,count")
            p.add_argument("--t", default="1", help="comma-separated times")
            p.add_argument("--out", help="CSV path (default stdout)")
        p.set_defaults(func=fn)

    p = sub.add_parser("evolve")
    p.add_argument("--config", required=True)
    p.add_argument("--dump-every", type=int, default=1)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("build-w")
    p.add_argument("--config", required=True)
    p.add_argument("--times", help="comma-separated snapshot times (default: final)")
    p.set_defaults(func=cmd_build_w)

    p = sub.add_parser("fit-decay")
    p.add_argument("--series", required=True)
    p.add_argument("--window", help="tmin,tmax")
    p.add_argument("--t-column")
    p.add_argument("--value-column")
    p.set_defaults(func=cmd_fit_decay)

    p = sub.add_parser("verify")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--experiment")
    g.add_argument("--all", action="store_true")
    g.add_argument("--config")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KPBError as exc:
        print(f"kpb {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
