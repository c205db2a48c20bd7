"""Command-line entry points: bench runs, tracking sessions, replays.

Every run writes a manifest first, then its artifacts, all inside the
chosen output directory. Identical configuration and seed produce
byte-identical tables, logs, and GeoJSON (simulated clocks start from a
fixed epoch).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import yaml

from . import __version__
from .bench import (
    RangeScenario,
    RangeSummary,
    antenna_walk_scenarios,
    export_geojson,
    furthest_success_distance,
    match_transmissions,
    reference_payload,
    report_tables,
    run_latency_test,
    run_range_scenario,
    run_throughput_test,
    straight_walk_scenario,
    stub_range_scenario,
)
from .calibration import Calibration, load_calibration
from .geo import write_nmea_log
from .simulation import SessionDriver, load_track_scenario, run_tracking_session
from .station import JournalCorrupt, StationSnapshot, journal_replay

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def write_manifest(out_dir: Path, subcommand: str, args: argparse.Namespace) -> None:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "seed": getattr(args, "seed", 0),
        "config_paths": [
            str(p)
            for p in [getattr(args, "config", None), getattr(args, "scenario", None)]
            if p
        ],
        "output_dir": str(out_dir),
        "started_at": datetime.now(timezone.utc).isoformat(),
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _load_custom_link(cal: Calibration, path: str):
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    return cal.link_config(
        doc["mode"],
        doc["baud"],
        tx_antenna=doc.get("tx_antenna", "stub"),
        rx_antenna=doc.get("rx_antenna", "stub"),
        buffer_capacity_bytes=doc.get("buffer_capacity_bytes"),
        stochastic=doc.get("stochastic", False),
        config_id=doc.get("config_id", ""),
    )


def _load_range_scenario(cal: Calibration, path: str, seed: int) -> RangeScenario:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    link = cal.link_config(
        doc["mode"],
        doc["baud"],
        tx_antenna=doc.get("tx_antenna", "stub"),
        rx_antenna=doc.get("rx_antenna", "stub"),
        stochastic=doc.get("stochastic", False),
    )
    return straight_walk_scenario(
        link,
        max_distance_m=doc.get("max_distance_m", 100.0),
        step_m=doc.get("step_m", 0.5),
        bearing_deg=doc.get("bearing_deg", 0.0),
        fix_interval_s=doc.get("fix_interval_s", 5.0),
        tx_off_boresight_deg=doc.get("tx_off_boresight_deg", 0.0),
        rx_off_boresight_deg=doc.get("rx_off_boresight_deg", 0.0),
        sentence_type=doc.get("sentence_type", "GGA"),
        seed=doc.get("seed", seed),
        scenario_id=doc.get("scenario_id", Path(path).stem),
    )


def _selected_rows(cal: Calibration, args: argparse.Namespace, rows):
    if args.all_paper_configs:
        return list(rows)
    selected = [
        r
        for r in rows
        if (args.mode is None or r.mode == args.mode)
        and (args.baud is None or r.baud == args.baud)
    ]
    if not selected:
        raise ValueError("no calibrated rows match the given --mode/--baud")
    return selected


def cmd_bench(args: argparse.Namespace) -> int:
    cal = load_calibration()
    out_dir = Path(args.output_dir)
    write_manifest(out_dir, f"bench {args.kind}", args)
    payload = reference_payload()
    results = []
    failed = False

    if args.kind == "throughput":
        if args.config:
            configs = [_load_custom_link(cal, args.config)]
        else:
            configs = [
                cal.throughput_config(row)
                for row in _selected_rows(cal, args, cal.throughput_rows)
            ]
        for cfg in configs:
            result = run_throughput_test(cfg, payload, wired=cal.wired(cfg.uart_baud))
            results.append(result)
            failed |= not result.passed

    elif args.kind == "latency":
        if args.config:
            configs = [_load_custom_link(cal, args.config)]
        else:
            configs = [
                cal.latency_config(row)
                for row in _selected_rows(cal, args, cal.latency_rows)
            ]
        for cfg in configs:
            result = run_latency_test(cfg)
            results.append(result)
            failed |= not result.valid

    else:  # range
        if args.config:
            scenarios: list[RangeScenario] = [
                _load_range_scenario(cal, args.config, args.seed)
            ]
        else:
            scenarios = [
                stub_range_scenario(cal, row.mode, row.baud, seed=args.seed)
                for row in _selected_rows(cal, args, cal.range_rows)
            ]
            if args.all_paper_configs:
                scenarios.extend(antenna_walk_scenarios(cal, seed=args.seed).values())
        logs_dir = out_dir / "logs"
        geo_dir = out_dir / "geojson"
        logs_dir.mkdir(parents=True, exist_ok=True)
        geo_dir.mkdir(parents=True, exist_ok=True)
        for scenario in scenarios:
            sent, received = run_range_scenario(scenario)
            match = match_transmissions(sent, received)
            furthest = (
                furthest_success_distance(match, scenario.base_position)
                if match.successful
                else None
            )
            summary = RangeSummary(scenario.scenario_id, furthest, len(sent), len(received))
            results.append(summary)
            stem = summary.config_id.replace(" ", "_").replace("@", "at")
            (logs_dir / f"{stem}_sent.nmea").write_text(write_nmea_log(sent))
            (logs_dir / f"{stem}_received.nmea").write_text(write_nmea_log(received))
            doc = export_geojson(match, scenario.base_position)
            (geo_dir / f"{stem}.geojson").write_text(
                json.dumps(doc, indent=2, sort_keys=True) + "\n"
            )

    text = report_tables(results)
    (out_dir / "tables.txt").write_text(text, encoding="utf-8")
    print(text)
    return EXIT_FAILURE if failed else EXIT_OK


def render_snapshot_summary(snapshot: StationSnapshot) -> str:
    lines = [
        f"session:        {snapshot.session_id}",
        f"mode:           {snapshot.mode}",
        f"gimbal az/el:   {snapshot.gimbal.azimuth_deg:.3f} / {snapshot.gimbal.elevation_deg:.3f}",
        f"link:           {snapshot.link_mode} @ {snapshot.link_baud}",
        f"fix interval:   {snapshot.fix_interval_s:.1f} s",
        f"telemetry kept: {len(snapshot.telemetry)}",
        f"sent/ok/lost:   {snapshot.counters.sent}/{snapshot.counters.delivered}/{snapshot.counters.lost}",
        f"success ratio:  {snapshot.success_ratio:.4f}",
        f"sweeps:         {snapshot.sweep_completions}",
    ]
    return "\n".join(lines) + "\n"


def cmd_track(args: argparse.Namespace) -> int:
    cal = load_calibration()
    try:
        scenario = load_track_scenario(args.scenario)
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: cannot load scenario: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        scenario = dataclasses.replace(scenario, seed=args.seed)
    out_dir = Path(args.output_dir)
    write_manifest(out_dir, "track", args)
    journal = out_dir / "sessions" / f"{scenario.session_id}.jsonl"

    if args.serve:
        import asyncio

        from .server import serve_session

        driver = SessionDriver(scenario, cal, journal_path=journal)
        static = Path(args.static_dir) if args.static_dir else None
        asyncio.run(serve_session(driver, port=args.port, static_dir=static))
        result = driver.finish()
    else:
        result = run_tracking_session(scenario, cal, journal_path=journal)

    (out_dir / "pointing_trace.csv").write_text(
        "t_s,pointing_error_deg\n"
        + "".join(f"{t:.3f},{err:.6f}\n" for t, err in result.pointing_trace),
        encoding="utf-8",
    )
    (out_dir / "fixes.geojson").write_text(
        json.dumps(export_geojson(result.match, scenario.base), indent=2, sort_keys=True)
        + "\n",
        encoding="utf-8",
    )
    summary = render_snapshot_summary(result.snapshot)
    (out_dir / "summary.txt").write_text(summary, encoding="utf-8")
    print(summary, end="")
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    cal = load_calibration()
    from .station import read_journal

    try:
        _, truncated = read_journal(args.journal)
        snapshot = journal_replay(args.journal, cal)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JournalCorrupt as exc:
        print(f"error: journal corrupt: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    if truncated:
        print("warning: dropped truncated final record", file=sys.stderr)
    print(render_snapshot_summary(snapshot), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trackstation",
        description="Simulated HC-12 ground-station toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run a measurement harness")
    bench.add_argument("kind", choices=["throughput", "latency", "range"])
    bench.add_argument("--all-paper-configs", action="store_true",
                       help="run every calibrated configuration row")
    bench.add_argument("--mode", choices=["FU1", "FU2", "FU3", "FU4"])
    bench.add_argument("--baud", type=int)
    bench.add_argument("--config", help="custom link config YAML")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--output-dir", default="out")
    bench.set_defaults(func=cmd_bench)

    track = sub.add_parser("track", help="run a closed-loop tracking session")
    track.add_argument("--scenario", required=True, help="scenario YAML")
    track.add_argument("--seed", type=int, default=None)
    track.add_argument("--output-dir", default="out")
    track.add_argument("--serve", action="store_true",
                       help="serve the web gateway while the session runs")
    track.add_argument("--port", type=int, default=8871)
    track.add_argument("--static-dir", default=None,
                       help="operator UI assets to serve at /")
    track.set_defaults(func=cmd_track)

    replay = sub.add_parser("replay", help="rebuild a session from its journal")
    replay.add_argument("journal")
    replay.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
