"""Command-line interface.

Subcommands: simulate, linear-propagate, besov, measure, campaign, kernel,
verify.  Run ``anisob <subcommand> --help`` for per-command options.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np


def _parse_p(text):
    return np.inf if text in ("inf", "Inf", "INF") else float(text)


def _parse_alpha(text):
    if len(text) != 3 or any(c not in "01" for c in text):
        raise argparse.ArgumentTypeError("alpha must be three digits like 000 or 100")
    return tuple(int(c) for c in text)


def cmd_simulate(args):
    from .campaign import build_box, build_data_spec, default_channel_grid, write_norms_csv
    from .configfile import load_config
    from .initial import make_initial_data
    from .snapshot import write_snapshot
    from .solver import SolverConfig, run

    cfg = load_config(args.config)
    box = build_box(cfg)
    state0 = make_initial_data(build_data_spec(cfg), box)
    solver_cfg = SolverConfig(
        dt=cfg["dt"],
        t_end=cfg["t_end"],
        dealias=cfg["dealias"],
        scheme=cfg["scheme"],
        snapshot_stride=cfg["snapshot_stride"],
        nonlinear=cfg["mode"] == "nonlinear",
    )
    traj = run(state0, solver_cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, state in enumerate(traj.states):
        write_snapshot(out / f"snap_{i:05d}.bin", state)
    write_norms_csv(out / "norms.csv", traj.states, default_channel_grid())
    print(f"wrote {len(traj.states)} snapshots and norms.csv to {out}")
    return 0


def cmd_linear_propagate(args):
    from .linear import propagate_linear
    from .snapshot import read_snapshot, write_snapshot

    state = read_snapshot(getattr(args, "in"))
    write_snapshot(args.out, propagate_linear(state, args.t))
    print(f"propagated to t = {state.time + args.t:g}")
    return 0


def cmd_besov(args):
    from .dyadic import BesovSpec, besov_norm
    from .snapshot import read_snapshot

    state = read_snapshot(args.field)
    field = getattr(state, args.component)
    value = besov_norm(field, BesovSpec(args.p, args.q, args.s1, args.s2))
    print(f"{value:.12g}")
    return 0


def cmd_measure(args):
    from .measure import Channel, measure_decay
    from .snapshot import read_snapshot

    paths = sorted(Path(args.traj).glob("snap_*.bin"))
    if not paths:
        print(f"no snapshots under {args.traj}", file=sys.stderr)
        return 2
    states = sorted((read_snapshot(p) for p in paths), key=lambda s: s.time)
    channel = Channel(args.channel, args.alpha, args.p)
    fit = measure_decay(
        states, channel, t0=args.t0, t1=args.t1, regime=args.regime, epsilon=args.epsilon
    )
    print(
        f"{channel.label}: slope {fit.slope:+.4f} (theory {fit.theory:+.4f}, "
        f"stderr {fit.stderr:.4f}, window [{fit.t0:g}, {fit.t1:g}], "
        f"{fit.n_samples} samples) -> {fit.verdict}"
    )
    return 0 if fit.verdict != "FAIL" else 1


def cmd_campaign(args):
    from .campaign import run_campaign
    from .configfile import load_config

    cfg = load_config(args.config)
    result = run_campaign(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(result.report_csv, encoding="utf-8")
    (out / "summary.txt").write_text(result.summary + "\n", encoding="utf-8")
    print(result.summary)
    print(f"report written to {out / 'report.csv'}")
    return result.exit_code


def cmd_kernel(args):
    from .kernel import KernelSpec, eval_kernel, probe_points

    rows = []
    times = np.linspace(0.0, args.tmax, args.nt)
    for t in times:
        rho, x3 = probe_points(args.m, t, count=args.probes)
        for r, z in zip(rho, x3):
            out = eval_kernel(KernelSpec(m=args.m, t=float(t), x=(r, 0.0, z), resolution=args.res))
            rows.append((args.m, t, r, 0.0, z, out.value.real, out.value.imag, abs(out.value)))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("m,t,x1,x2,x3,re,im,abs\n")
        for row in rows:
            fh.write(",".join(f"{v:.10g}" for v in row) + "\n")
    print(f"wrote {len(rows)} kernel samples to {args.out}")
    return 0


def cmd_verify(args):
    from .verification import SUITES

    ok = SUITES[args.suite]()
    print(f"verify {args.suite}: {'all checks passed' if ok else 'FAILURES detected'}")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="anisob",
        description="Spectral lab for stratified flow with horizontal dissipation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="time-integrate a configured run")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("linear-propagate", help="apply the exact linear propagator")
    p.add_argument("--in", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_linear_propagate)

    p = sub.add_parser("besov", help="anisotropic Besov norm of one component")
    p.add_argument("--field", required=True)
    p.add_argument("--component", choices=("v1", "v2", "v3", "theta"), required=True)
    p.add_argument("--p", type=_parse_p, required=True)
    p.add_argument("--q", type=_parse_p, required=True)
    p.add_argument("--s1", type=float, required=True)
    p.add_argument("--s2", type=float, required=True)
    p.set_defaults(func=cmd_besov)

    p = sub.add_parser("measure", help="fit a decay exponent from stored snapshots")
    p.add_argument("--traj", required=True)
    p.add_argument("--channel", required=True)
    p.add_argument("--alpha", type=_parse_alpha, default=(0, 0, 0))
    p.add_argument("--p", type=_parse_p, default=2.0)
    p.add_argument("--t0", type=float, default=5.0)
    p.add_argument("--t1", type=float, default=None)
    p.add_argument("--regime", choices=("linear", "nonlinear"), default="linear")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("campaign", help="run a decay campaign and write report.csv")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("kernel", help="sample the dispersive kernel to CSV")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--res", type=int, default=64)
    p.add_argument("--nt", type=int, default=5)
    p.add_argument("--probes", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", help="run a property suite")
    p.add_argument("suite", choices=("lp", "linear", "nonlinear", "kernel"))
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
