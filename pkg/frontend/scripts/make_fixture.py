"""Regenerates tests/fixtures/session.json from a recorded station session.

The fixture is a 200-frame prefix of a tracking-session journal plus the
station snapshot after exactly those events, so the UI reducer can be
checked frame-for-frame against the backend. Run from the repo root:

    python frontend/scripts/make_fixture.py
"""

import json
import sys
from pathlib import Path
from tempfile import TemporaryDirectory

from trackstation.calibration import load_calibration
from trackstation.geo import destination_point
from trackstation.simulation import TrackScenario, run_tracking_session
from trackstation.station import journal_replay

FRAME_COUNT = 200
OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "session.json"


def main() -> int:
    cal = load_calibration()
    scenario = TrackScenario(
        kind="circular",
        radius_m=100.0,
        speed_m_s=1.4,
        duration_s=90.0,
        dt_s=0.5,
        fix_interval_s=5.0,
        session_id="ui-fixture",
    )
    with TemporaryDirectory() as tmp:
        journal = Path(tmp) / "session.jsonl"
        run_tracking_session(scenario, cal, journal_path=journal)
        lines = journal.read_text().splitlines()
        if len(lines) < FRAME_COUNT:
            print(f"session too short: {len(lines)} frames", file=sys.stderr)
            return 1
        prefix = lines[:FRAME_COUNT]
        prefix_path = Path(tmp) / "prefix.jsonl"
        prefix_path.write_text("\n".join(prefix) + "\n")
        snapshot = journal_replay(prefix_path, cal)

    base = scenario.base
    east_100m = destination_point(base, 90.0, 100.0)
    fixture = {
        "frames": [json.loads(line) for line in prefix],
        "expected": {
            "gimbalAz": snapshot.gimbal.azimuth_deg,
            "gimbalMode": snapshot.gimbal.mode,
            "sent": snapshot.counters.sent,
            "delivered": snapshot.counters.delivered,
            "lost": snapshot.counters.lost,
            "trailLength": len(snapshot.telemetry),
        },
        "projection": {
            "base": {"lat": base.lat_deg, "lon": base.lon_deg},
            "eastPoint": {"lat": east_100m.lat_deg, "lon": east_100m.lon_deg},
            "expectedXY": [100.0, 0.0],
        },
    }
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(fixture, indent=1) + "\n")
    print(f"wrote {OUT} ({len(prefix)} frames)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
