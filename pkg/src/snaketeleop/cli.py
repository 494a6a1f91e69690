"""Command-line entry point: experiment runners and the session service.

Exit codes: 0 success, 1 configuration/usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .params import CONFIG_ENV_VAR, load_params


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="snaketeleop",
                     description="Shape-fitting experiments and teleoperation service "
                                 "for a tube-fed snake robot.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None,
                       help=f"JSON parameter file (default: ${CONFIG_ENV_VAR} or built-ins)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=Path, default=Path("results"))

    p_fit = sub.add_parser("fit", help="batch shape fitting against random target shapes")
    common(p_fit)
    p_fit.add_argument("--shapes", type=int, default=100)
    p_fit.add_argument("--iters", type=int, default=550)
    p_fit.add_argument("--ee-task", choices=["3T", "3T2R", "3T3R"], default="3T")
    p_fit.add_argument("--jobs", type=int, default=1)

    p_loc = sub.add_parser("locomotion", help="scripted follow-the-leader runs along bundled paths")
    common(p_loc)
    p_loc.add_argument("--ticks", type=int, default=400)

    p_piv = sub.add_parser("pivot", help="pivot reorientation sweep over a cone of directions")
    common(p_piv)
    p_piv.add_argument("--method", choices=["frechet", "point", "both"], default="both")
    p_piv.add_argument("--pivot-iters", type=int, default=120)
    p_piv.add_argument("--thetas", type=int, default=11, help="cone opening-angle steps")
    p_piv.add_argument("--phis", type=int, default=11, help="azimuth steps")

    p_srv = sub.add_parser("serve", help="run the WebSocket session service")
    p_srv.add_argument("--config", type=Path, default=None)
    p_srv.add_argument("--host", default="127.0.0.1")
    p_srv.add_argument("--port", type=int, default=8700)
    p_srv.add_argument("--tick-hz", type=float, default=30.0)
    return parser


def _load(args) -> "SnakeParams":
    try:
        return load_params(args.config)
    except (OSError, ValueError) as e:
        print(f"config error: {e}", file=sys.stderr)
        raise SystemExit(1)


def _config_from_args(args, params) -> "ExperimentConfig":
    from .experiments import ExperimentConfig

    kw = dict(seed=args.seed, n=params.n, h=params.h)
    if getattr(args, "shapes", None) is not None and args.command == "fit":
        kw.update(n_shapes=args.shapes, n_iter=args.iters, ee_task=args.ee_task,
                  jobs=args.jobs)
    return ExperimentConfig(**kw)


def cmd_fit(args) -> int:
    from .experiments import SHAPE_FITTING_HEADER, run_shape_fitting_experiment, write_csv
    from .figures import render_shape_fitting

    params = _load(args)
    config = _config_from_args(args, params)
    t0 = time.perf_counter()
    rows = run_shape_fitting_experiment(config)
    elapsed = time.perf_counter() - t0
    csv_path = args.out / "shape_fitting.csv"
    write_csv(csv_path, SHAPE_FITTING_HEADER, rows)
    fig_path = render_shape_fitting(rows, args.out / "shape_fitting.png")
    last = {m: [r for r in rows if r["method"] == m][-1] for m in config.methods}
    for m, row in last.items():
        print(f"{m}: final mean d_F/h = {row['mean_frechet_over_h']:.3f}, "
              f"EE err/h = {row['mean_x3t_over_h']:.2e}, "
              f"{row['ms_per_iter']:.2f} ms/iter")
    print(f"wrote {csv_path} and {fig_path} ({elapsed:.1f}s)")
    return 0


def cmd_locomotion(args) -> int:
    from .experiments import (LOCOMOTION_HEADER, run_locomotion_experiment,
                              straight_policy, pursuit_policy, synthetic_paths, write_csv)
    from .figures import render_locomotion

    params = _load(args)
    config = _config_from_args(args, params)
    paths = synthetic_paths(config.params())
    results = []
    for name, path in paths.items():
        policy = straight_policy if name == "straight" else pursuit_policy
        res = run_locomotion_experiment(config, path, policy, n_ticks=args.ticks, path_name=name)
        results.append(res)
        print(f"{name}: final d_F/h = {res.final_frechet_over_h:.3f} "
              f"({res.ticks} ticks, limits {'ok' if res.limits_ok else 'VIOLATED'})")
    rows = [{"path": r.path_name, "final_frechet_over_h": r.final_frechet_over_h,
             "ticks": r.ticks} for r in results]
    csv_path = args.out / "locomotion.csv"
    write_csv(csv_path, LOCOMOTION_HEADER, rows)
    fig_path = render_locomotion(results, args.out / "locomotion.png")
    print(f"wrote {csv_path} and {fig_path}")
    return 0


def cmd_pivot(args) -> int:
    from .experiments import PIVOT_HEADER, run_pivot_experiment, write_csv
    from .figures import render_pivot

    params = _load(args)
    config = _config_from_args(args, params)
    rows = run_pivot_experiment(config, n_theta=args.thetas, n_phi=args.phis,
                                pivot_iter=args.pivot_iters)
    if args.method != "both":
        rows = [r for r in rows if r["method"] == args.method]
    csv_path = args.out / "pivot.csv"
    write_csv(csv_path, PIVOT_HEADER, rows)
    fig_path = render_pivot(rows, args.out / "pivot.png")
    print(f"wrote {csv_path} ({len(rows)} rows) and {fig_path}")
    return 0


def cmd_serve(args) -> int:
    from .server import serve

    params = _load(args)
    print(f"serving on ws://{args.host}:{args.port}/session (tick {args.tick_hz} Hz)")
    serve(params, host=args.host, port=args.port, tick_hz=args.tick_hz)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "fit": cmd_fit,
        "locomotion": cmd_locomotion,
        "pivot": cmd_pivot,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except SystemExit:
        raise
    except KeyboardInterrupt:
        return 0
    except Exception as e:  # runtime failure contract
        print(f"runtime error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
