"""Command-line entry points: serve, replay, simulate, report."""

from __future__ import annotations

import argparse
import json
import statistics
import sys

from .config import PipelineConfig


def _load_config(path: str | None) -> PipelineConfig:
    return PipelineConfig.load(path) if path else PipelineConfig()


def cmd_serve(args) -> int:
    from .service import serve

    serve(
        bind=args.bind,
        config=_load_config(args.config),
        sessions_dir=args.sessions_dir,
        tcp_bind=args.tcp_bind,
        static_dir=args.static_dir,
    )
    return 0


def cmd_replay(args) -> int:
    from .replay import ReplayError, replay_file

    speed = args.speed if args.speed == "max" else float(args.speed)
    try:
        frames = replay_file(
            args.file,
            speed=speed,
            config=_load_config(args.config) if args.config else None,
            out=args.out,
        )
    except ReplayError as exc:
        print(f"replay failed: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        for frame in frames:
            print(json.dumps(frame, separators=(",", ":")))
    else:
        print(f"replayed {len(frames)} outbound frames -> {args.out}")
    return 0


def cmd_simulate(args) -> int:
    from .sim import (
        default_script_for,
        load_scenario,
        run_trials,
        write_reports_jsonl,
    )

    scenario = load_scenario(args.scene)
    scene = scenario["scene"]
    if not scene.defects:
        print("scene has no defects", file=sys.stderr)
        return 1

    reports = []
    if scenario["script"] is not None:
        reports.extend(
            run_trials(
                scene,
                scenario["script"],
                scenario["noise"],
                scenario["camera"],
                n_trials=args.trials,
                seed=args.seed,
                rate_hz=scenario["rate_hz"],
            )
        )
    else:
        viewpoint = tuple(
            c - n * 2.0
            for c, n in zip(scene.wall.center, scene.wall.normal)
        )
        for k, defect in enumerate(scene.defects):
            script = default_script_for(scene, defect.defect_id, viewpoint)
            reports.extend(
                run_trials(
                    scene,
                    script,
                    scenario["noise"],
                    scenario["camera"],
                    n_trials=args.trials,
                    seed=args.seed + 1000 * k,
                    rate_hz=scenario["rate_hz"],
                )
            )

    write_reports_jsonl(reports, args.out)
    ok = [r for r in reports if not r.failed]
    print(f"{len(reports)} trials ({len(reports) - len(ok)} failed) -> {args.out}")
    if ok:
        print(
            "mean dA={:.2f}%  mean d_z={:.2f}%  mean d_xy={:.2f}%  mean t={:.2f}s".format(
                statistics.mean(r.delta_area_pct for r in ok),
                statistics.mean(r.delta_depth_pct for r in ok),
                statistics.mean(r.delta_plane_pct for r in ok),
                statistics.mean(r.collection_time_s for r in ok),
            )
        )
    return 0


def cmd_report(args) -> int:
    from .replay import ReplayError, session_report

    try:
        report = session_report(args.file)
    except ReplayError as exc:
        print(f"report failed: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(report, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazeinspect",
        description="Gaze-driven inspection analytics: stream service, replay, simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the WebSocket + TCP session service")
    p.add_argument("--bind", default="127.0.0.1:8734", help="host:port for HTTP/WebSocket")
    p.add_argument("--config", default=None, help="pipeline config JSON file")
    p.add_argument("--sessions-dir", default="sessions", help="directory for session logs")
    p.add_argument("--tcp-bind", default=None, help="host:port for raw TCP (default: ws port + 1)")
    p.add_argument("--static-dir", default=None, help="serve this directory at / (demo UI)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="re-run a recorded session log")
    p.add_argument("file")
    p.add_argument("--speed", default="max", help="real-time multiplier or 'max'")
    p.add_argument("--out", default=None, help="write outbound frames to this file")
    p.add_argument("--config", default=None, help="override the recorded config")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("simulate", help="run simulated inspection trials")
    p.add_argument("--scene", required=True, help="scenario JSON document")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="trial reports JSONL output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", help="summarize a session log")
    p.add_argument("file")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
