"""Command line entry point: run, verify, analyze, serve.

Exit codes: 0 success, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .consensus import spread, trajectory_from_csv, trajectory_to_csv
from .graphs import scc_analyze, suggest_repair
from .scenarios import BUILTIN_NAMES, EngineKind, load_scenario
from .session import execute_scenario


def _scenario_or_die(name: str):
    try:
        return load_scenario(name)
    except KeyError as e:
        print(f"error: {e.args[0]}; built-ins: {', '.join(BUILTIN_NAMES)}",
              file=sys.stderr)
        raise SystemExit(2)


def cmd_run(args) -> int:
    config = _scenario_or_die(args.scenario)
    engine = EngineKind(args.engine) if args.engine else None
    traj = execute_scenario(config, iterations=args.iterations,
                            until_converged=args.until_converged,
                            engine=engine, seed=args.seed)
    csv_text = trajectory_to_csv(traj)
    if args.out:
        try:
            Path(args.out).write_text(csv_text)
        except OSError as e:
            print(f"error: cannot write {args.out}: {e}", file=sys.stderr)
            return 2
    if args.plot:
        _write_plot(traj, args.plot)
    final = traj.final
    verdict = "converged" if traj.converged else "not converged"
    print(f"{config.name}: {traj.iterations_run} iterations, {verdict} "
          f"(spread {spread(final):.3g})")
    print("final state:", " ".join(f"{v:.6f}" for v in final))
    return 0


def _write_plot(traj, path: str):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    arr = traj.as_array()
    fig, ax = plt.subplots(figsize=(7, 4))
    for j in range(arr.shape[1]):
        ax.plot(range(arr.shape[0]), arr[:, j], marker="o", ms=3,
                label=f"node {j + 1}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("value")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_verify(args) -> int:
    config = _scenario_or_die(args.scenario)
    try:
        golden = trajectory_from_csv(Path(args.golden).read_text())
    except (OSError, ValueError, IndexError) as e:
        print(f"error: bad golden CSV {args.golden}: {e}", file=sys.stderr)
        return 2
    engine = EngineKind(args.engine) if args.engine else None
    traj = execute_scenario(config, iterations=golden.shape[0] - 1,
                            engine=engine, seed=args.seed)
    got = traj.as_array()
    if got.shape != golden.shape:
        print(f"shape mismatch: ran {got.shape[0]} rows x {got.shape[1]} nodes, "
              f"golden has {golden.shape[0]} x {golden.shape[1]}")
        return 1
    delta = np.abs(got - golden)
    worst = np.unravel_index(np.argmax(delta), delta.shape)
    if delta[worst] > args.tol:
        print(f"FAIL: iteration {worst[0]}, node {worst[1] + 1}: "
              f"|{got[worst]:.9g} - {golden[worst]:.9g}| = {delta[worst]:.3g} "
              f"> tol {args.tol:g}")
        return 1
    print(f"OK: all {delta.size} values within {args.tol:g} "
          f"(worst {delta[worst]:.3g})")
    return 0


def cmd_analyze(args) -> int:
    config = _scenario_or_die(args.scenario)
    report = scc_analyze(config.graph)
    comps = [sorted(n + 1 for n in c) for c in report.components]
    print(f"{config.name}: {len(comps)} strongly connected component(s)")
    for c in sorted(comps, key=min):
        print(f"  component: {c}")
    if report.is_strongly_connected:
        print("strongly connected: yes")
    else:
        print("strongly connected: NO")
        for c in report.closed_components:
            print(f"  closed component (reads only itself): {sorted(n + 1 for n in c)}")
        repairs = suggest_repair(config.graph, report)
        for i, j in repairs:
            print(f"  suggested repair edge: {i + 1} -> {j + 1}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever
    config = _scenario_or_die(args.scenario) if args.scenario else None
    loaded = config.name if config else "empty session"
    print(f"serving {loaded} at ws://{args.host}:{args.port}/")
    try:
        serve_forever(config, host=args.host, port=args.port,
                      tick_interval_s=args.tick_interval,
                      iteration_interval_s=args.iteration_interval,
                      autostart=args.autostart)
    except OSError as e:
        print(f"error: cannot bind port {args.port}: {e}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridswarm",
                                description="Consensus swarm testbed")
    sub = p.add_subparsers(dest="subcommand", required=True)

    run = sub.add_parser("run", help="execute a scenario and export the trajectory")
    run.add_argument("--scenario", required=True)
    group = run.add_mutually_exclusive_group()
    group.add_argument("--iterations", type=int, default=None)
    group.add_argument("--until-converged", action="store_true")
    run.add_argument("--engine", choices=[e.value for e in EngineKind], default=None)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="trajectory CSV path")
    run.add_argument("--plot", default=None, help="line chart SVG path")
    run.set_defaults(func=cmd_run)

    verify = sub.add_parser("verify", help="compare a re-run against golden CSV")
    verify.add_argument("--scenario", required=True)
    verify.add_argument("--golden", required=True)
    verify.add_argument("--tol", type=float, default=5e-7)
    verify.add_argument("--engine", choices=[e.value for e in EngineKind], default=None)
    verify.add_argument("--seed", type=int, default=None)
    verify.set_defaults(func=cmd_verify)

    analyze = sub.add_parser("analyze", help="connectivity report")
    analyze.add_argument("--scenario", required=True)
    analyze.set_defaults(func=cmd_analyze)

    serve = sub.add_parser("serve", help="start the websocket session service")
    serve.add_argument("--scenario", default=None)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--tick-interval", type=float, default=1 / 30)
    serve.add_argument("--iteration-interval", type=float, default=1.0)
    serve.add_argument("--autostart", action="store_true")
    serve.set_defaults(func=cmd_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
