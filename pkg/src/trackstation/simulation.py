"""Closed-loop tracking sessions: a moving portable, the link, the tracker.

The loop couples the pieces the way the deployed system does: the
portable walks a path and radios GPS fixes; delivery depends on the
base antenna's pointing error at that instant; delivered fixes update
the tracker's estimate, which steers the antenna, which changes the next
fix's delivery odds. Time is simulated throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .bench import match_transmissions, sentence_delivered, TransmissionMatch
from .calibration import Calibration
from .geo import (
    GeoPoint,
    build_gga,
    destination_point,
    haversine_distance,
    initial_bearing,
)
from .station import (
    Command,
    DEFAULT_START_TIME,
    Station,
    StationConfig,
    StationSnapshot,
)
from .tracker import pointing_error

SENTENCE_UTC_BASE = 43_200.0  # 12:00 UTC, matching the session epoch


@dataclass(frozen=True)
class TrackScenario:
    """A closed-loop run: target motion plus link and tracker settings."""

    kind: str  # "circular" | "stationary" | "straight"
    base: GeoPoint = GeoPoint(52.9500, -1.1500)
    radius_m: float = 100.0  # circular: orbit radius; others: start distance
    speed_m_s: float = 1.4
    duration_s: float = 300.0
    dt_s: float = 0.5
    fix_interval_s: float = 5.0
    start_bearing_deg: float = 90.0
    link_mode: str = "FU3"
    link_baud: int = 9600
    tx_antenna: str = "omni_unity"  # portable
    rx_antenna: str = "yagi"  # base, steered
    stochastic: bool = False
    max_az_rate_deg_s: float = 60.0
    initial_azimuth_deg: float | None = None  # None = boresighted at start
    staleness_limit_s: float | None = None
    drift_deg_per_rev: float = 0.0
    frozen_offset_deg: float | None = None  # manual-point offset from start bearing
    seed: int = 0
    session_id: str = "track"

    def __post_init__(self) -> None:
        if self.kind not in ("circular", "stationary", "straight"):
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        steps = self.fix_interval_s / self.dt_s
        if abs(steps - round(steps)) > 1e-9:
            raise ValueError("fix_interval_s must be a multiple of dt_s")

    def target_position(self, t: float) -> GeoPoint:
        if self.kind == "stationary":
            return destination_point(self.base, self.start_bearing_deg, self.radius_m)
        if self.kind == "circular":
            omega_deg = math.degrees(self.speed_m_s / self.radius_m)
            bearing = (self.start_bearing_deg + omega_deg * t) % 360.0
            return destination_point(self.base, bearing, self.radius_m)
        return destination_point(
            self.base, self.start_bearing_deg, self.radius_m + self.speed_m_s * t
        )


@dataclass
class TrackResult:
    snapshot: StationSnapshot
    sent_log: list[str]
    received_log: list[str]
    match: TransmissionMatch
    pointing_trace: list[tuple[float, float]] = field(default_factory=list)

    @property
    def delivery_ratio(self) -> float:
        return self.snapshot.success_ratio


class SessionDriver:
    """Advances one closed-loop session tick at a time.

    Shared by the fast headless loop and the real-time serve mode; both
    walk the same deterministic tick sequence.
    """

    def __init__(
        self,
        scenario: TrackScenario,
        calibration: Calibration,
        journal_path: str | Path | None = None,
    ):
        self.scenario = scenario
        start_bearing = initial_bearing(scenario.base, scenario.target_position(0.0))
        initial_az = (
            start_bearing
            if scenario.initial_azimuth_deg is None
            else scenario.initial_azimuth_deg
        )
        config = StationConfig(
            base_position=scenario.base,
            link_mode=scenario.link_mode,
            link_baud=scenario.link_baud,
            tx_antenna=scenario.tx_antenna,
            rx_antenna=scenario.rx_antenna,
            stochastic=scenario.stochastic,
            fix_interval_s=scenario.fix_interval_s,
            staleness_limit_s=scenario.staleness_limit_s,
            max_az_rate_deg_s=scenario.max_az_rate_deg_s,
            initial_azimuth_deg=initial_az,
            drift_deg_per_rev=scenario.drift_deg_per_rev,
            seed=scenario.seed,
            session_id=scenario.session_id,
        )
        self.station = Station(calibration, config, journal_path=journal_path)
        self.t0 = DEFAULT_START_TIME
        if scenario.frozen_offset_deg is not None:
            frozen_az = (start_bearing + scenario.frozen_offset_deg) % 360.0
            self.station.handle_command(
                Command("manual_point", {"az": frozen_az, "el": 0.0}, "freeze", self.t0),
                self.t0,
            )
        else:
            self.station.activate_tracking()

        self.sent_log: list[str] = []
        self.received_log: list[str] = []
        self.trace: list[tuple[float, float]] = []
        self.total_ticks = int(round(scenario.duration_s / scenario.dt_s)) + 1
        self._fix_every = int(round(scenario.fix_interval_s / scenario.dt_s))
        self._fix_index = 0

    def step(self, k: int) -> None:
        scn = self.scenario
        station = self.station
        rel = k * scn.dt_s
        now = self.t0 + rel
        position = scn.target_position(rel)
        bearing = initial_bearing(scn.base, position)

        if k % self._fix_every == 0:
            raw = build_gga(position, SENTENCE_UTC_BASE + rel)
            self.sent_log.append(raw)
            steer_error = pointing_error(station.controller.state, bearing)
            delivered = sentence_delivered(
                station.link,
                raw,
                haversine_distance(scn.base, position),
                0.0,  # portable omni: orientation-independent
                steer_error,
                scn.seed,
                self._fix_index,
            )
            self._fix_index += 1
            if delivered:
                self.received_log.append(raw)
                station.ingest_telemetry(raw, now)
            else:
                station.record_lost_transmission(raw, position, now)

        station.tick_controller(now, scn.dt_s)
        station.poll_timeouts(now)
        station.service_feeds(now)
        self.trace.append((rel, pointing_error(station.controller.state, bearing)))

    def finish(self) -> TrackResult:
        snapshot = self.station.snapshot()
        self.station.close()
        return TrackResult(
            snapshot=snapshot,
            sent_log=self.sent_log,
            received_log=self.received_log,
            match=match_transmissions(self.sent_log, self.received_log),
            pointing_trace=self.trace,
        )


def run_tracking_session(
    scenario: TrackScenario,
    calibration: Calibration,
    journal_path: str | Path | None = None,
) -> TrackResult:
    """Drive one session tick by tick and return its artifacts."""
    driver = SessionDriver(scenario, calibration, journal_path)
    for k in range(driver.total_ticks):
        driver.step(k)
    return driver.finish()


def load_track_scenario(path: str | Path) -> TrackScenario:
    """Read a scenario definition from a YAML file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    base = doc.get("base", {})
    link = doc.get("link", {})
    tracker = doc.get("tracker", {})
    return TrackScenario(
        kind=doc["kind"],
        base=GeoPoint(base.get("lat", 52.95), base.get("lon", -1.15)),
        radius_m=doc.get("radius_m", 100.0),
        speed_m_s=doc.get("speed_m_s", 1.4),
        duration_s=doc.get("duration_s", 300.0),
        dt_s=doc.get("dt_s", 0.5),
        fix_interval_s=doc.get("fix_interval_s", 5.0),
        start_bearing_deg=doc.get("start_bearing_deg", 90.0),
        link_mode=link.get("mode", "FU3"),
        link_baud=link.get("baud", 9600),
        tx_antenna=link.get("tx_antenna", "omni_unity"),
        rx_antenna=link.get("rx_antenna", "yagi"),
        stochastic=link.get("stochastic", False),
        max_az_rate_deg_s=tracker.get("max_az_rate_deg_s", 60.0),
        initial_azimuth_deg=tracker.get("initial_azimuth_deg"),
        staleness_limit_s=tracker.get("staleness_limit_s"),
        drift_deg_per_rev=tracker.get("drift_deg_per_rev", 0.0),
        frozen_offset_deg=doc.get("frozen_offset_deg"),
        seed=doc.get("seed", 0),
        session_id=doc.get("session_id", Path(path).stem),
    )
