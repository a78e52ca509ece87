"""Command-line entry point: ``anisope <command> [options]``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure,
4 failed verification verdict.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys

import numpy as np
import scipy.fft as sfft

from .errors import AnisopeError, NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4
STRUCTURE_TOL = 1e-10

log = logging.getLogger("anisope")


def _outdir(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _verdict(label: str, ok: bool, detail: str = "") -> bool:
    print(f"{'PASS' if ok else 'FAIL'}  {label}{'  ' + detail if detail else ''}")
    return ok


# ---------------------------------------------------------------------------
# run / diagnose


def _load(args):
    from .config import RunConfig, load_config

    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.until is not None:
        changes["t_end"] = args.until
    if getattr(args, "out", None) is not None:
        changes["out"] = args.out
    return cfg.replace(**changes) if changes else cfg


def cmd_run(args) -> int:
    from .diagnostics import growth_verdict, max_principle_series
    from .initial import build_initial
    from .persistence import write_snapshot, write_timeseries
    from .timestepper import run

    cfg = _load(args)
    args.out = cfg.out
    out = _outdir(args)
    with open(os.path.join(out, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_text())
    state0 = build_initial(cfg)
    try:
        final, records = run(
            state0, cfg.params(), cfg.controls(), cadence=cfg.cadence,
            diagnostics_options={"monitor": cfg.monitor},
        )
    except NumericalFailure as err:
        if err.state is not None:
            write_snapshot(err.state, os.path.join(out, "failure.snap"))
        raise
    write_timeseries(records, os.path.join(out, "timeseries.csv"))
    write_snapshot(final, os.path.join(out, "final.snap"))
    print(f"t = {final.t:.6g} after {records[-1].step} steps; wrote {out}")

    ok = True
    worst_c = max(r.constraint_residual for r in records)
    worst_p = max(r.parity_drift for r in records)
    ok &= _verdict("constraint residual", worst_c <= STRUCTURE_TOL, f"max {worst_c:.3e}")
    ok &= _verdict("parity drift", worst_p <= STRUCTURE_TOL, f"max {worst_p:.3e}")
    if len(records) >= 2:
        mp = max_principle_series(records)
        ok &= _verdict("T* L^q monotone", mp.passed, f"worst excess {mp.worst_excess:.3e} (q={mp.q})")
    g_ok, top = growth_verdict(records)
    ok &= _verdict("L^q growth ratio", g_ok, f"max {top:.4g}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_diagnose(args) -> int:
    from .diagnostics import record
    from .persistence import read_snapshot, write_timeseries

    cfg = _load(args)
    args.out = cfg.out
    params = cfg.params()
    states = sorted((read_snapshot(p) for p in args.snapshots), key=lambda s: s.t)
    records = []
    for i, s in enumerate(states):
        prev = states[i - 1] if i else None
        dt = s.t - prev.t if prev is not None and s.t > prev.t else None
        records.append(record(s, states[0], params, prev=prev if dt else None, dt=dt, step=i,
                              monitor=cfg.monitor))
    path = os.path.join(_outdir(args), "diagnostics.csv")
    write_timeseries(records, path)
    for r in records:
        print(f"t = {r.t:.6g}  energy = {r.energy:.6g}  constraint = {r.constraint_residual:.2e}"
              f"  parity = {r.parity_drift:.2e}")
    print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# inequalities


def cmd_verify_inequalities(args) -> int:
    from .domain import Grid, Parity, ScalarField
    from .inequalities import (
        R_SAMPLES, ladyzhenskaya_ratio, ladyzhenskaya_sup, log_sobolev_rhs,
        oscillatory_curve, oscillatory_family,
    )
    from .svgplot import write_chart

    out = _outdir(args)
    ok = True
    g = Grid(8, 8, 8)
    one = ScalarField(g, Parity.EVEN, np.ones(g.shape))
    r1 = ladyzhenskaya_ratio(one, one, one)
    ok &= _verdict("Ladyzhenskaya constant fields", abs(r1 - math.sqrt(2)) <= 1e-12, f"ratio {r1:.15g}")

    sups = []
    for n in args.grids:
        sup, _ = ladyzhenskaya_sup(Grid(n, n, n), args.count, seed=args.seed)
        sups.append(sup)
        print(f"Ladyzhenskaya sup ratio at {n}^3 over {args.count} triples: {sup:.6g}")
    if len(sups) >= 2:
        change = abs(sups[-1] - sups[0]) / sups[0]
        ok &= _verdict("Ladyzhenskaya sup resolution-stable", change < 0.1, f"change {change:.3%}")

    F = next(oscillatory_family([3]))[1]
    worst = 0.0
    for R in (2.0, 4.0):
        a = log_sobolev_rhs(F, 6.0, 0.5, R, R_SAMPLES)
        b = log_sobolev_rhs(F.rescaled(R), 6.0, 0.5, 1.0, R_SAMPLES)
        worst = max(worst, abs(a - b))
    ok &= _verdict("log-Sobolev scaling invariance", worst <= 1e-10, f"max diff {worst:.2e}")

    ks, ratios = oscillatory_curve(range(1, args.kmax + 1))
    slope = float(np.polyfit(np.log(ks), ratios, 1)[0])
    ok &= _verdict("log-Sobolev ratio without growth trend", slope <= 0.0,
                   f"max ratio {ratios.max():.4g}, slope vs log k {slope:.3g}")
    with open(os.path.join(out, "log_sobolev_curve.csv"), "w", encoding="utf-8") as fh:
        fh.write("k,ratio\n")
        for k, r in zip(ks, ratios):
            fh.write(f"{int(k)},{r:.17g}\n")
    write_chart(os.path.join(out, "log_sobolev_curve.svg"), {"ratio": (ks, ratios)},
                title="log-Sobolev ratio, oscillatory family", xlabel="k", ylabel="ratio")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_gronwall(args) -> int:
    from .inequalities import (
        GronwallSpec, gronwall_bound, gronwall_verify, random_spec, saturated_trajectories,
    )

    A0 = args.A0 if args.A0 else [math.e] * args.n
    spec = GronwallSpec(args.n, args.alpha, args.zeta, A0, args.K, args.t)
    b = gronwall_bound(spec, args.t)
    print(f"calA_N(0) = {b.cascade_A[-1]:.17g}")
    print(f"q0 = {b.q0:.17g}")
    print(f"log q1 = {b.log_q1:.17g}" + ("" if b.overflow else f"   q1 = {b.q1:.17g}"))
    print(f"log Q = {b.log_Q:.17g}" + ("" if b.overflow else f"   Q = {b.Q:.17g}"))
    if b.degenerate:
        print("note: int K = 0, so Q vanishes and is not a bound; q1 still is")
    if not args.verify:
        return EXIT_OK
    rng = np.random.default_rng(args.seed)
    counts = dict(q=0, corrected=0, pointwise=0)
    for _ in range(args.verify):
        s, beta = random_spec(rng)
        v = gronwall_verify(s, saturated_trajectories(s, beta), slack=args.slack)
        counts["q"] += v.holds_q
        counts["corrected"] += v.holds_corrected
        counts["pointwise"] += v.holds_pointwise
    ok = _verdict("Q(t) bounds sum A_i + sum int B_i", counts["q"] == args.verify,
                  f"{counts['q']}/{args.verify} specs")
    _verdict("calA_N(0) + Q(t) bounds sum A_i + sum int B_i", counts["corrected"] == args.verify,
             f"{counts['corrected']}/{args.verify} specs")
    _verdict("calA_N(t) <= q1(t)", counts["pointwise"] == args.verify,
             f"{counts['pointwise']}/{args.verify} specs")
    ok &= counts["corrected"] == counts["pointwise"] == args.verify
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# extend / plot


def cmd_extend(args) -> int:
    """Half-depth data (npz with v1, v2, T of shape (nx, ny, nz/2+1), optional h, t) -> snapshot."""
    from .diagnostics import constraint_residual
    from .domain import Grid, Parity, State, extend, make_state
    from .persistence import write_snapshot

    data = np.load(args.input)
    for key in ("v1", "v2", "T"):
        if key not in data:
            raise AnisopeError(f"{args.input} lacks array {key!r}")
    nx, ny, nzh = data["v1"].shape
    h = float(data["h"]) if "h" in data else 1.0
    t = float(data["t"]) if "t" in data else 0.0
    grid = Grid(nx, ny, 2 * (nzh - 1), h)
    v1 = extend(data["v1"], Parity.EVEN, grid)
    v2 = extend(data["v2"], Parity.EVEN, grid)
    T = extend(data["T"], Parity.ODD, grid)
    before = constraint_residual(State((v1, v2), T, t))
    state = make_state(v1, v2, T, t)
    write_snapshot(state, args.output)
    print(f"extended to {grid.shape}; constraint residual {before:.3e} before projection; wrote {args.output}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .persistence import read_timeseries
    from .svgplot import write_chart

    data = read_timeseries(args.csv)
    missing = [c for c in [args.x] + args.y if c not in data]
    if missing:
        raise AnisopeError(f"unknown columns {missing}; available: {', '.join(data)}")
    series = {c: (data[args.x], data[c]) for c in args.y}
    write_chart(args.output, series, title=args.title or os.path.basename(args.csv),
                xlabel=args.x, ylabel=", ".join(args.y), logy=args.logy)
    print(f"wrote {args.output}")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="anisope", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def sim_opts(sp):
        sp.add_argument("--config", help="key = value configuration file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="overrides the configured seed")
        sp.add_argument("--until", type=float, default=None, help="overrides t_end")

    sp = sub.add_parser("run", help="simulate per configuration")
    sim_opts(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("diagnose", help="recompute diagnostics from snapshots")
    sim_opts(sp)
    sp.add_argument("snapshots", nargs="+")
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("verify-inequalities", help="Ladyzhenskaya and log-Sobolev studies")
    sp.add_argument("--out", default="out")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--count", type=int, default=1000)
    sp.add_argument("--grids", type=int, nargs="+", default=[32, 64])
    sp.add_argument("--kmax", type=int, default=64)
    sp.set_defaults(func=cmd_verify_inequalities)

    sp = sub.add_parser("gronwall", help="evaluate or verify the system Gronwall bound")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--zeta", type=float, default=1.0)
    sp.add_argument("--A0", type=float, nargs="+")
    sp.add_argument("--K", type=float, default=1.0, help="constant coefficient K")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--verify", type=int, default=0, help="number of random specs to check")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--slack", type=float, default=1e-6)
    sp.set_defaults(func=cmd_gronwall)

    sp = sub.add_parser("extend", help="half-depth npz data -> full-box snapshot")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.set_defaults(func=cmd_extend)

    sp = sub.add_parser("plot", help="SVG line chart of CSV columns")
    sp.add_argument("csv")
    sp.add_argument("output")
    sp.add_argument("--x", default="t")
    sp.add_argument("--y", nargs="+", required=True)
    sp.add_argument("--logy", action="store_true")
    sp.add_argument("--title", default="")
    sp.set_defaults(func=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with sfft.set_workers(args.threads):
            return args.func(args)
    except NumericalFailure as err:
        print(f"numerical failure at t={err.t}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (AnisopeError, OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
