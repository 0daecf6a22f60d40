"""Command-line front end.

Subcommands: ``validate`` (config check + state-space summary),
``measures`` (stationary/transient reports), ``optimize`` (vacation
sweeps), ``simulate`` (Monte Carlo with analytic comparison).

Exit codes: 0 success, 2 invalid configuration, 3 I/O failure,
4 computation failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import measures as ms
from . import report as rpt
from .config import ConfigError, bundled_config_path, load_config
from .economics import build_vectors, stationary_profits, transient_profits
from .errors import ModelError
from .mmap_builder import build
from .optimize import (SweepSpec, default_workers, disable_inspections,
                       erlang_refined_sweep, sweep)
from .simulate import SimConfig, simulate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_COMPUTE = 4


def _load(path_arg: str):
    p = Path(path_arg)
    if not p.exists() and not p.suffix:
        bundled = bundled_config_path(path_arg)
        if bundled.exists():
            p = bundled
    return load_config(p)


def _parse_grid(text: str) -> np.ndarray:
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        return np.round(np.arange(lo, hi + 1e-12, step), 10)
    return np.array([float(x) for x in text.split(",")])


def _parse_ints(text: str) -> tuple[int, ...]:
    if ":" in text:
        lo, hi = (int(x) for x in text.split(":"))
        return tuple(range(lo, hi + 1))
    return tuple(int(x) for x in text.split(","))


def cmd_validate(args) -> int:
    model, econ = _load(args.config)
    lay = model.make_layout()
    print(f"config OK: n={model.n} R={model.R} "
          f"dims(m={lay.dims.m}, t={lay.dims.t}, eps={lay.dims.eps}, "
          f"ups={lay.dims.ups}, z1={lay.dims.z1}, z2={lay.dims.z2})")
    print(f"state space: {lay.total} states in {len(lay.blocks)} blocks")
    for blk in lay.blocks:
        print(f"  E_{blk.s}^({blk.k},{blk.mode}): offset {blk.offset:5d} dim {blk.dim}")
    if args.layout_csv:
        lay.to_csv(args.layout_csv)
        print(f"layout written to {args.layout_csv}")
    return EXIT_OK


def cmd_measures(args) -> int:
    model, econ = _load(args.config)
    out = Path(args.out)
    kern = build(model)
    st = ms.stationary(kern, model=model)
    lay = kern.layout
    rates = ms.event_rates_stationary(kern, st.pi)
    vecs = build_vectors(model, lay, econ)
    profit = stationary_profits(kern, vecs, econ, st.pi, rates)
    A = ms.availability(lay, st.pi)
    props = ms.repairperson_proportions(lay, st.pi)

    try:
        repl = ms.replacement_time(kern, model=model,
                                   horizon=args.reliability_horizon)
        repl_mean = repl.mean
        reliability = repl.reliability
    except ModelError:
        # fleet loss impossible: the system is never replaced
        repl_mean = math.inf
        reliability = np.ones(args.reliability_horizon + 1)

    report = rpt.build_measure_report(st, A, props, rates, repl_mean, profit)
    report.write(out / "stationary_report.csv", out / "stationary_report.txt")
    rpt.write_profit_csv(out / "profit_breakdown.csv", profit)
    rpt.write_reliability_csv(out / "reliability.csv", reliability)
    rpt.plot_reliability(out / "reliability.png", reliability)

    path = ms.transient(kern, args.horizon, model=model)
    avail = ms.availability_series(lay, path)
    _, psi_k, _ = ms.mean_times_transient(lay, path)
    rates_cum = ms.event_rates_transient(kern, path)
    rpt.write_transient_csv(out / "transient.csv", avail, psi_k, rates_cum)
    rpt.plot_transient(out / "transient_availability.png", avail, A)
    tp = transient_profits(kern, vecs, econ, path, rates_cum)
    conv = float(np.abs(path.probs[-1] @ kern.D - path.probs[-1]).max())

    print(report.to_text(), end="")
    print(f"transient horizon {args.horizon}: final availability "
          f"{avail[-1]:.10g}, convergence residual {conv:.3g}")
    print(f"cumulative net profit at horizon: {tp['phi'][-1]:.10g}")
    print(f"reports in {out}/")
    return EXIT_OK


def cmd_optimize(args) -> int:
    model, econ = _load(args.config)
    out = Path(args.out)
    pm = args.pm == "on"
    workers = args.workers or default_workers()
    R_values = _parse_ints(args.R) if args.R else tuple(range(1, model.n + 1))

    if args.family == "erlang2" and args.refine:
        coarse, fine = erlang_refined_sweep(
            model, econ, R_values, pm=pm,
            coarse_step=args.coarse_step, refine_step=args.refine_step,
            workers=workers)
        rpt.write_sweep_csv(out / "sweep_coarse.csv", coarse)
        rpt.write_sweep_csv(out / "sweep.csv", fine)
        rpt.plot_sweep(out / "sweep.png", fine)
        best = fine.best
    else:
        grid = _parse_grid(args.grid) if args.grid else np.round(
            np.arange(0.05, 0.951, 0.05), 10)
        grids = (grid,) if args.family == "geometric" else (grid, grid)
        result = sweep(model, econ, SweepSpec(args.family, grids, R_values, pm),
                       workers=workers)
        rpt.write_sweep_csv(out / "sweep.csv", result)
        rpt.plot_sweep(out / "sweep.png", result)
        best = result.best

    if args.family == "geometric":
        line = f"argmax: p={best['p']:.2f} R={best['R']} phi={best['phi']:.10g}"
    else:
        line = (f"argmax: p1={best['p1']:.2f} p2={best['p2']:.2f} "
                f"R={best['R']} phi={best['phi']:.10g}")
    rpt.atomic_write_text(out / "argmax.txt", line + "\n")
    print(line)
    print(f"sweep table in {out}/")
    return EXIT_OK


def cmd_simulate(args) -> int:
    model, econ = _load(args.config)
    out = Path(args.out)
    cfg = SimConfig(steps=args.steps, reps=args.reps, warmup=args.warmup,
                    seed=args.seed)
    rep = simulate(model, econ, cfg, trace_steps=args.trace)
    rpt.write_csv(out / "sim_report.csv", ["measure", "mean", "se"], rep.rows())

    kern = build(model)
    st = ms.stationary(kern, model=model)
    lay = kern.layout
    rates = ms.event_rates_stationary(kern, st.pi)
    vecs = build_vectors(model, lay, econ)
    profit = stationary_profits(kern, vecs, econ, st.pi, rates)
    props = ms.repairperson_proportions(lay, st.pi)
    analytic = {"A": ms.availability(lay, st.pi), "Y_nv": props[0],
                "Y_v": props[1], "Y_w": props[2], "Y_i": props[3],
                "phi": profit.phi}
    analytic.update({f"L_{k}": rates[k]
                     for k in ("rep", "mi", "nr", "rejoined", "NS", "rb")})
    analytic.update({f"pi_U{k}": st.macro[k] for k in sorted(st.macro)})
    rows = []
    for key, ana in analytic.items():
        mean, se = rep.measure(key)
        z = (mean - ana) / se if se and se > 0 else float("nan")
        rows.append({"measure": key, "analytic": ana, "simulated": mean,
                     "se": se, "z": z})
    rpt.write_csv(out / "comparison.csv",
                  ["measure", "analytic", "simulated", "se", "z"], rows)
    if args.trace and rep.trace is not None:
        rpt.write_csv(out / "trace.csv",
                      ["step", "k", "s", "mode", "i", "j", "u", "v", "r"],
                      [dict(zip(["step", "k", "s", "mode", "i", "j", "u", "v", "r"],
                                row)) for row in rep.trace.tolist()])
    worst = max((abs(r["z"]) for r in rows if np.isfinite(r["z"])), default=0.0)
    print(f"simulated {cfg.reps} x {cfg.steps} steps (warmup {cfg.warmup}), "
          f"worst |z| = {worst:.2f}")
    print(f"reports in {out}/")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="standby-mmap",
        description="Cold-standby fleet model with repairperson vacations: "
                    "marked-arrival Markov engine, measures, optimization, "
                    "and a Monte Carlo oracle.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config and print the state space")
    p.add_argument("config")
    p.add_argument("--layout-csv", default=None)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("measures", help="stationary and transient reports")
    p.add_argument("config")
    p.add_argument("--horizon", type=int, default=2000)
    p.add_argument("--reliability-horizon", type=int, default=1000)
    p.add_argument("--out", default="reports")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("optimize", help="vacation-policy grid sweep")
    p.add_argument("config")
    p.add_argument("--family", choices=("geometric", "erlang2"),
                   default="geometric")
    p.add_argument("--grid", default=None,
                   help="lo:hi:step or comma list (both stages for erlang2)")
    p.add_argument("--R", default=None, help="comma list or lo:hi")
    p.add_argument("--pm", choices=("on", "off"), default="on")
    p.add_argument("--refine", action=argparse.BooleanOptionalAction,
                   default=True, help="two-stage erlang2 sweep")
    p.add_argument("--coarse-step", type=float, default=0.05)
    p.add_argument("--refine-step", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default="reports")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("simulate", help="Monte Carlo run with analytic comparison")
    p.add_argument("config")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--warmup", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=20240801)
    p.add_argument("--trace", type=int, default=0,
                   help="dump the first replication's first N steps")
    p.add_argument("--out", default="reports")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ModelError, np.linalg.LinAlgError) as exc:
        print(f"error: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
