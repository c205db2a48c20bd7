"""Base-unit service: event bus, journal, station state, gateway schema.

The station is event-sourced: every state change is expressed as a
LinkEvent that is journalled first, then folded into station state, then
fanned out to bus subscribers. Replaying a journal therefore rebuilds
the exact snapshot the live session ended with, which is also what makes
offline operation trivial: the journal is the only persistence.

Gateway frames and journal records share one JSON schema:
``{"type": <topic>, "time": <ISO-8601 UTC>, "body": {...}}``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Iterator

from .calibration import Calibration
from .geo import (
    ChecksumMismatch,
    GeoPoint,
    MalformedSentence,
    NmeaError,
    UnsupportedType,
    parse_nmea,
    validate_fix,
)
from .linkmodel import (
    ChannelState,
    LinkConfig,
    derive_packet_seed,
    packet_outcome,
    round_trip_latency,
)
from .tracker import (
    MODE_IDLE,
    GimbalState,
    TargetEstimate,
    TrackingController,
    pointing_error,
    update_estimate,
)

# Topics carried on the bus, over the gateway, and in journals.
TOPIC_TELEMETRY = "telemetry"
TOPIC_GIMBAL = "gimbal"
TOPIC_COMMAND = "command"
TOPIC_ACK = "ack"
TOPIC_STATS = "stats"
TOPIC_SWEEP_COMPLETE = "sweep_complete"
TOPIC_REJECTION = "rejection"
TOPIC_SENSOR = "sensor"
TOPIC_SESSION = "session"
TOPICS = (
    TOPIC_TELEMETRY,
    TOPIC_GIMBAL,
    TOPIC_COMMAND,
    TOPIC_ACK,
    TOPIC_STATS,
    TOPIC_SWEEP_COMPLETE,
    TOPIC_REJECTION,
    TOPIC_SENSOR,
    TOPIC_SESSION,
)

TELEMETRY_WINDOW = 500

# 2024-05-15T12:00:00Z: fixed epoch for reproducible simulated sessions.
DEFAULT_START_TIME = datetime(2024, 5, 15, 12, 0, 0, tzinfo=timezone.utc).timestamp()

COMMAND_KINDS = (
    "set_radio_mode",
    "set_fix_interval",
    "manual_point",
    "start_sweep",
    "resume_tracking",
    "start_bench",
)

ACK_OK = "ok"
ACK_UNDELIVERED = "undelivered"


class SchemaViolation(ValueError):
    """A gateway frame failed validation; carries the offending path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownCommand(ValueError):
    pass


class DuplicateCommand(ValueError):
    pass


class JournalCorrupt(RuntimeError):
    pass


@dataclass(frozen=True)
class LinkEvent:
    topic: str
    time: float
    body: dict

    def __post_init__(self) -> None:
        if self.topic not in TOPICS:
            raise ValueError(f"unknown topic {self.topic!r}")


@dataclass(frozen=True)
class Command:
    kind: str
    params: dict
    id: str
    issued_at: float


@dataclass(frozen=True)
class TelemetryRecord:
    seq: int
    fix: GeoPoint
    raw_nmea: str
    received_at: float
    pressure_hpa: float | None = None


@dataclass(frozen=True)
class Counters:
    sent: int = 0
    delivered: int = 0
    lost: int = 0
    rejected_checksum: int = 0
    rejected_no_fix: int = 0
    rejected_unsupported: int = 0


@dataclass(frozen=True)
class StationSnapshot:
    session_id: str
    gimbal: GimbalState
    estimate: TargetEstimate | None
    telemetry: tuple[TelemetryRecord, ...]
    counters: Counters
    success_ratio: float
    mode: str
    base_position: GeoPoint
    pressure_hpa: float | None
    pending_commands: frozenset[str]
    link_mode: str
    link_baud: int
    fix_interval_s: float
    sweep_completions: int


# --- time & frame codec -------------------------------------------------------


def epoch_to_iso(t: float) -> str:
    return datetime.fromtimestamp(t, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def iso_to_epoch(text: str) -> float:
    return (
        datetime.strptime(text, "%Y-%m-%dT%H:%M:%S.%fZ")
        .replace(tzinfo=timezone.utc)
        .timestamp()
    )


def gateway_encode(event: LinkEvent) -> str:
    """One JSON text frame per event; also the journal record format."""
    return json.dumps(
        {"type": event.topic, "time": epoch_to_iso(event.time), "body": event.body},
        sort_keys=True,
        separators=(",", ":"),
    )


def decode_frame(text: str) -> LinkEvent:
    """Parse any gateway/journal frame back into an event."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaViolation("$", f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaViolation("$", "frame must be a JSON object")
    topic = doc.get("type")
    if topic not in TOPICS:
        raise SchemaViolation("type", f"unknown frame type {topic!r}")
    if not isinstance(doc.get("body"), dict):
        raise SchemaViolation("body", "missing or not an object")
    try:
        t = iso_to_epoch(doc["time"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaViolation("time", f"bad timestamp: {exc}") from exc
    return LinkEvent(topic=topic, time=t, body=doc["body"])


def _require_number(body: dict, key: str, lo: float, hi: float, path: str) -> float:
    value = body.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaViolation(f"{path}.{key}", "must be a number")
    if not (lo <= value < hi):
        raise SchemaViolation(f"{path}.{key}", f"out of range [{lo}, {hi})")
    return float(value)


def validate_command_body(kind: str, params: dict) -> None:
    """Range checks matching the target subsystems; raises SchemaViolation."""
    if kind == "manual_point":
        _require_number(params, "az", 0.0, 360.0, "body")
        el = params.get("el", 0.0)
        if not isinstance(el, (int, float)) or not -10.0 <= el <= 90.0:
            raise SchemaViolation("body.el", "out of range [-10, 90]")
    elif kind == "set_fix_interval":
        seconds = params.get("seconds")
        if not isinstance(seconds, (int, float)) or seconds <= 0:
            raise SchemaViolation("body.seconds", "must be > 0")
    elif kind == "set_radio_mode":
        if params.get("mode") not in ("FU1", "FU2", "FU3", "FU4"):
            raise SchemaViolation("body.mode", "must be one of FU1..FU4")
    elif kind == "start_sweep":
        if params.get("direction", "cw") not in ("cw", "ccw"):
            raise SchemaViolation("body.direction", "must be cw or ccw")
    elif kind == "start_bench":
        if params.get("kind") not in ("throughput", "latency", "range"):
            raise SchemaViolation("body.kind", "must be throughput|latency|range")
    elif kind == "resume_tracking":
        pass
    else:
        raise SchemaViolation("body.kind", f"unknown command kind {kind!r}")


def gateway_decode(frame: str) -> Command:
    """Decode and validate an inbound command frame."""
    event = decode_frame(frame)
    if event.topic != TOPIC_COMMAND:
        raise SchemaViolation("type", f"expected a command frame, got {event.topic!r}")
    body = event.body
    kind = body.get("kind")
    cmd_id = body.get("id")
    if not isinstance(cmd_id, str) or not cmd_id:
        raise SchemaViolation("body.id", "must be a non-empty string")
    params = body.get("params", {})
    if not isinstance(params, dict):
        raise SchemaViolation("body.params", "must be an object")
    validate_command_body(kind, params)
    return Command(kind=kind, params=params, id=cmd_id, issued_at=event.time)


def command_event(command: Command) -> LinkEvent:
    return LinkEvent(
        TOPIC_COMMAND,
        command.issued_at,
        {
            "id": command.id,
            "kind": command.kind,
            "params": command.params,
            "issued_at": command.issued_at,
        },
    )


# --- bus ----------------------------------------------------------------------


class EventBus:
    """In-process publish/subscribe: synchronous, ordered per publisher,
    at-most-once per subscriber."""

    def __init__(self) -> None:
        self._subscribers: dict[str, list[Callable[[LinkEvent], None]]] = {}

    def subscribe(self, topic: str, handler: Callable[[LinkEvent], None]) -> None:
        if topic != "*" and topic not in TOPICS:
            raise ValueError(f"unknown topic {topic!r}")
        self._subscribers.setdefault(topic, []).append(handler)

    def unsubscribe(self, topic: str, handler: Callable[[LinkEvent], None]) -> None:
        handlers = self._subscribers.get(topic, [])
        if handler in handlers:
            handlers.remove(handler)

    def publish(self, event: LinkEvent) -> None:
        for handler in self._subscribers.get(event.topic, []):
            handler(event)
        for handler in self._subscribers.get("*", []):
            handler(event)


# --- journal --------------------------------------------------------------------


class Journal:
    """Append-only newline-delimited JSON event log."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh = open(self.path, "a", encoding="utf-8")

    def append(self, event: LinkEvent) -> None:
        self._fh.write(gateway_encode(event) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def read_journal(path: str | Path) -> tuple[list[LinkEvent], bool]:
    """Read a journal, tolerating a truncated final record.

    Returns (events, truncated_tail). Corruption anywhere before the last
    line is fatal.
    """
    text = Path(path).read_text(encoding="utf-8")
    lines = text.split("\n")
    # A well-formed file ends with a newline, so the final element is "".
    complete = lines[:-1]
    tail = lines[-1] if lines[-1] != "" else None
    events: list[LinkEvent] = []
    for i, line in enumerate(complete):
        if not line.strip():
            continue
        try:
            events.append(decode_frame(line))
        except SchemaViolation as exc:
            raise JournalCorrupt(f"record {i + 1} unreadable: {exc}") from exc
    truncated = False
    if tail is not None and tail.strip():
        try:
            events.append(decode_frame(tail))
        except SchemaViolation:
            truncated = True  # partial final record: dropped
    return events, truncated


# --- station ----------------------------------------------------------------------


@dataclass
class StationConfig:
    """Construction parameters; serialized into the session event."""

    base_position: GeoPoint = GeoPoint(52.9500, -1.1500)
    link_mode: str = "FU3"
    link_baud: int = 9600
    tx_antenna: str = "omni_unity"  # portable side
    rx_antenna: str = "yagi"  # base side, steered by the tracker
    stochastic: bool = False
    fix_interval_s: float = 5.0
    staleness_limit_s: float | None = None  # default: 3 x fix interval
    max_az_rate_deg_s: float = 60.0
    max_el_rate_deg_s: float = 30.0
    initial_azimuth_deg: float = 0.0
    drift_deg_per_rev: float = 0.0
    seed: int = 0
    session_id: str = "session"
    start_time: float = DEFAULT_START_TIME

    def resolved_staleness(self) -> float:
        return (
            3.0 * self.fix_interval_s
            if self.staleness_limit_s is None
            else self.staleness_limit_s
        )

    def to_body(self) -> dict:
        return {
            "session_id": self.session_id,
            "base": {"lat": self.base_position.lat_deg, "lon": self.base_position.lon_deg},
            "link": {
                "mode": self.link_mode,
                "baud": self.link_baud,
                "tx_antenna": self.tx_antenna,
                "rx_antenna": self.rx_antenna,
                "stochastic": self.stochastic,
            },
            "fix_interval_s": self.fix_interval_s,
            "staleness_limit_s": self.resolved_staleness(),
            "max_az_rate_deg_s": self.max_az_rate_deg_s,
            "max_el_rate_deg_s": self.max_el_rate_deg_s,
            "initial_azimuth_deg": self.initial_azimuth_deg,
            "drift_deg_per_rev": self.drift_deg_per_rev,
            "seed": self.seed,
        }

    @classmethod
    def from_body(cls, body: dict, start_time: float) -> "StationConfig":
        link = body["link"]
        return cls(
            base_position=GeoPoint(body["base"]["lat"], body["base"]["lon"]),
            link_mode=link["mode"],
            link_baud=link["baud"],
            tx_antenna=link["tx_antenna"],
            rx_antenna=link["rx_antenna"],
            stochastic=link["stochastic"],
            fix_interval_s=body["fix_interval_s"],
            staleness_limit_s=body["staleness_limit_s"],
            max_az_rate_deg_s=body["max_az_rate_deg_s"],
            max_el_rate_deg_s=body["max_el_rate_deg_s"],
            initial_azimuth_deg=body["initial_azimuth_deg"],
            drift_deg_per_rev=body["drift_deg_per_rev"],
            seed=body["seed"],
            session_id=body["session_id"],
            start_time=start_time,
        )


class Station:
    """The base unit: ties the link, tracker, journal, and gateway together.

    All mutation flows through ``_publish`` -> journal -> ``_apply`` ->
    bus, so live state and journal replay cannot diverge.
    """

    def __init__(
        self,
        calibration: Calibration,
        config: StationConfig | None = None,
        journal_path: str | Path | None = None,
        _defer_session_event: bool = False,
    ):
        self.calibration = calibration
        self.config = config or StationConfig()
        self.bus = EventBus()
        self._journal = Journal(journal_path) if journal_path else None

        cfg = self.config
        self.base_position = cfg.base_position
        self.link: LinkConfig = calibration.link_config(
            cfg.link_mode,
            cfg.link_baud,
            tx_antenna=cfg.tx_antenna,
            rx_antenna=cfg.rx_antenna,
            stochastic=cfg.stochastic,
        )
        self.fix_interval_s = cfg.fix_interval_s
        self.controller = TrackingController(
            GimbalState(
                azimuth_deg=cfg.initial_azimuth_deg,
                max_az_rate_deg_s=cfg.max_az_rate_deg_s,
                max_el_rate_deg_s=cfg.max_el_rate_deg_s,
                mode=MODE_IDLE,
            ),
            staleness_limit_s=cfg.resolved_staleness(),
            drift_deg_per_rev=cfg.drift_deg_per_rev,
        )

        self.gimbal = self.controller.state
        self.estimate: TargetEstimate | None = None
        self.pressure_hpa: float | None = None
        self.counters = Counters()
        self.sweep_completions = 0
        self._telemetry: deque[TelemetryRecord] = deque(maxlen=TELEMETRY_WINDOW)
        self._seq = 0
        self._seen_command_ids: set[str] = set()
        self._commands_by_id: dict[str, Command] = {}
        self._pending_acks: list[tuple[float, LinkEvent]] = []
        self._pending_ids: set[str] = set()
        self._command_counter = 0
        self._feeds: list[tuple[str, Iterator]] = []

        if not _defer_session_event:
            self._publish(TOPIC_SESSION, cfg.to_body(), cfg.start_time)

    # --- event plumbing ---------------------------------------------------

    def _publish(self, topic: str, body: dict, now: float) -> LinkEvent:
        event = LinkEvent(topic, now, body)
        if self._journal is not None:
            self._journal.append(event)  # durable before any effect
        self._apply(event)
        self.bus.publish(event)
        return event

    def _apply(self, event: LinkEvent) -> None:
        """Fold one event into station state (also the replay path)."""
        body = event.body
        if event.topic == TOPIC_TELEMETRY:
            fix = GeoPoint(
                body["lat"], body["lon"], body.get("alt_m"), body.get("time_utc")
            )
            record = TelemetryRecord(
                seq=body["seq"],
                fix=fix,
                raw_nmea=body["raw"],
                received_at=event.time,
                pressure_hpa=body.get("pressure_hpa"),
            )
            self._telemetry.append(record)
            self._seq = record.seq
            if (fix.lat_deg, fix.lon_deg) != (
                self.base_position.lat_deg,
                self.base_position.lon_deg,
            ):
                self.estimate = update_estimate(self.base_position, fix, event.time)
        elif event.topic == TOPIC_STATS:
            self.counters = replace(
                self.counters,
                sent=body["sent"],
                delivered=body["delivered"],
                lost=body["lost"],
            )
        elif event.topic == TOPIC_REJECTION:
            key = {
                "checksum": "rejected_checksum",
                "no_fix": "rejected_no_fix",
                "unsupported": "rejected_unsupported",
            }[body["reason"]]
            self.counters = replace(
                self.counters, **{key: getattr(self.counters, key) + 1}
            )
        elif event.topic == TOPIC_GIMBAL:
            self.gimbal = GimbalState(
                azimuth_deg=body["az"],
                elevation_deg=body["el"],
                max_az_rate_deg_s=self.config.max_az_rate_deg_s,
                max_el_rate_deg_s=self.config.max_el_rate_deg_s,
                mode=body["mode"],
                sweep_progress_deg=body.get("sweep_progress_deg", 0.0),
            )
        elif event.topic == TOPIC_SWEEP_COMPLETE:
            self.sweep_completions += 1
        elif event.topic == TOPIC_COMMAND:
            command = Command(
                kind=body["kind"],
                params=body["params"],
                id=body["id"],
                issued_at=body["issued_at"],
            )
            self._seen_command_ids.add(command.id)
            self._commands_by_id[command.id] = command
            self._pending_ids.add(command.id)
        elif event.topic == TOPIC_ACK:
            self._pending_ids.discard(body["id"])
            if body["status"] == ACK_OK:
                self._apply_command_effect(self._commands_by_id.get(body["id"]))
        elif event.topic == TOPIC_SENSOR:
            if body["source"] == "gps":
                self.base_position = GeoPoint(body["lat"], body["lon"])
            elif body["source"] == "barometric":
                self.pressure_hpa = body["pressure_hpa"]
        elif event.topic == TOPIC_SESSION:
            pass  # construction parameters; consumed by from_journal

    def _apply_command_effect(self, command: Command | None) -> None:
        if command is None:
            return
        if command.kind == "set_radio_mode":
            self.link = self.calibration.link_config(
                command.params["mode"],
                self.link.uart_baud,
                tx_antenna=self.config.tx_antenna,
                rx_antenna=self.config.rx_antenna,
                stochastic=self.config.stochastic,
            )
        elif command.kind == "set_fix_interval":
            self.fix_interval_s = float(command.params["seconds"])

    # --- telemetry ingestion ------------------------------------------------

    def ingest_telemetry(self, line: str, now: float) -> TelemetryRecord | None:
        """Fold one received NMEA line in; rejections become events.

        Rejections are categorized so a GPS-side fault (no fix) is never
        mistaken for a link-side fault (checksum).
        """
        try:
            fix = validate_fix(parse_nmea(line))
        except (MalformedSentence, ChecksumMismatch):
            self._publish(TOPIC_REJECTION, {"reason": "checksum", "line": line}, now)
            return None
        except UnsupportedType:
            self._publish(TOPIC_REJECTION, {"reason": "unsupported", "line": line}, now)
            return None
        except NmeaError:
            # NoFix plus checksummed-but-garbage fields: source-side faults
            self._publish(TOPIC_REJECTION, {"reason": "no_fix", "line": line}, now)
            return None
        body = {
            "seq": self._seq + 1,
            "lat": fix.lat_deg,
            "lon": fix.lon_deg,
            "alt_m": fix.alt_m,
            "time_utc": fix.time_utc,
            "raw": line,
            "pressure_hpa": self.pressure_hpa,
        }
        self._publish(TOPIC_TELEMETRY, body, now)
        self._publish_stats(now, delivered=True, position=fix)
        return self._telemetry[-1]

    def record_lost_transmission(
        self, line: str, position: GeoPoint, now: float
    ) -> None:
        """The driver observed a transmission that never arrived."""
        self._publish_stats(now, delivered=False, position=position)

    def _publish_stats(self, now: float, delivered: bool, position: GeoPoint) -> None:
        sent = self.counters.sent + 1
        ok = self.counters.delivered + (1 if delivered else 0)
        lost = self.counters.lost + (0 if delivered else 1)
        self._publish(
            TOPIC_STATS,
            {
                "sent": sent,
                "delivered": ok,
                "lost": lost,
                "success_ratio": ok / sent,
                "avg_latency_ms": round_trip_latency(self.link) * 1000.0,
                "last": {
                    "lat": position.lat_deg,
                    "lon": position.lon_deg,
                    "delivered": delivered,
                },
            },
            now,
        )

    # --- commands ---------------------------------------------------------------

    def handle_command(self, command: Command, now: float) -> LinkEvent | None:
        """Route one command; returns the ack event if it acks immediately.

        Antenna commands act locally and ack at once. Portable-bound
        commands travel over the radio: their ack arrives after the
        modelled round trip, or with status ``undelivered`` after the
        timeout when the link drops them (collect via poll_timeouts).
        """
        if command.kind not in COMMAND_KINDS:
            raise UnknownCommand(command.kind)
        if command.id in self._seen_command_ids:
            raise DuplicateCommand(command.id)
        validate_command_body(command.kind, command.params)
        self._publish(*_event_parts(command), now)

        if command.kind == "manual_point":
            self.controller.point_manually(
                float(command.params["az"]), float(command.params.get("el", 0.0)), now
            )
            self._emit_gimbal(now)
            return self._ack(command, ACK_OK, now)
        if command.kind == "start_sweep":
            self.controller.start_sweep(command.params.get("direction", "cw"))
            self._emit_gimbal(now)
            return self._ack(command, ACK_OK, now)
        if command.kind == "resume_tracking":
            self.controller.resume_tracking()
            self._emit_gimbal(now)
            return self._ack(command, ACK_OK, now)
        if command.kind == "start_bench":
            return self._ack(
                command, ACK_OK, now, detail=self._run_bench(command.params["kind"])
            )

        # set_radio_mode / set_fix_interval travel to the portable.
        delivered = self._command_delivered(command)
        rtt = round_trip_latency(self.link)
        if delivered:
            due = now + rtt
            status = ACK_OK
        else:
            due = now + 3.0 * rtt + 1.0
            status = ACK_UNDELIVERED
        ack = LinkEvent(TOPIC_ACK, due, {"id": command.id, "status": status})
        self._pending_acks.append((due, ack))
        return None

    def _ack(
        self, command: Command, status: str, now: float, detail: str | None = None
    ) -> LinkEvent:
        body = {"id": command.id, "status": status}
        if detail is not None:
            body["detail"] = detail
        return self._publish(TOPIC_ACK, body, now)

    def _run_bench(self, kind: str) -> str:
        """Run a bench over the current link; simulated time, so instant."""
        from . import bench  # local import: bench has no station dependency

        if kind == "throughput":
            result = bench.run_throughput_test(self.link)
            return f"duration {result.duration_s:.3f}s passed={result.passed}"
        if kind == "latency":
            result = bench.run_latency_test(self.link)
            return f"avg {result.avg_ms:.3f}ms over {len(result.samples_ms)} samples"
        scenario = bench.straight_walk_scenario(
            self.link,
            max_distance_m=100.0,
            step_m=0.5,
            base=self.base_position,
            seed=self.config.seed,
        )
        summary, _ = bench.summarize_scenario(scenario)
        furthest = "-" if summary.furthest_m is None else f"{summary.furthest_m:.2f}m"
        return f"furthest {furthest} ({summary.delivered}/{summary.sent} delivered)"

    def _command_delivered(self, command: Command) -> bool:
        """Radio the command to the portable through the link model."""
        payload = json.dumps({"kind": command.kind, "params": command.params}).encode()
        if self.estimate is None:
            distance = 0.0  # portable assumed at the bench before first fix
            steer_off = 0.0
        else:
            distance = self.estimate.distance_m
            steer_off = pointing_error(self.gimbal, self.estimate.bearing_deg)
        self._command_counter += 1
        limit = self.link.mode.max_packet_bytes
        chunks = (
            [payload]
            if limit is None
            else [payload[i : i + limit] for i in range(0, len(payload), limit)]
        )
        return all(
            packet_outcome(
                self.link,
                ChannelState(
                    distance,
                    0.0,
                    steer_off,
                    derive_packet_seed(self.config.seed, -self._command_counter, j),
                ),
                len(chunk),
            )
            for j, chunk in enumerate(chunks)
        )

    def poll_timeouts(self, now: float) -> list[LinkEvent]:
        """Publish any deferred acks whose time has come."""
        due = [entry for entry in self._pending_acks if entry[0] <= now]
        self._pending_acks = [e for e in self._pending_acks if e[0] > now]
        published = []
        for when, ack in sorted(due, key=lambda e: e[0]):
            published.append(self._publish(ack.topic, ack.body, when))
        return published

    # --- tracker drive -------------------------------------------------------

    def tick_controller(self, now: float, dt: float) -> GimbalState:
        """Advance the antenna controller one period and publish its state."""
        state, completed = self.controller.tick(self.estimate, now, dt)
        if completed:
            self._publish(
                TOPIC_SWEEP_COMPLETE,
                {"direction": self.controller.sweep_direction},
                now,
            )
        self._emit_gimbal(now)
        return state

    def activate_tracking(self) -> None:
        self.controller.resume_tracking()

    def _emit_gimbal(self, now: float) -> None:
        state = self.controller.state
        self._publish(
            TOPIC_GIMBAL,
            {
                "az": state.azimuth_deg,
                "el": state.elevation_deg,
                "mode": state.mode,
                "sweep_progress_deg": state.sweep_progress_deg,
            },
            now,
        )

    # --- sensor feeds ----------------------------------------------------------

    def sensor_feed_attach(self, source: str, readings: Iterable) -> None:
        """Attach a GPS or barometric feed; absent feeds degrade gracefully."""
        if source not in ("gps", "barometric"):
            raise ValueError(f"unknown feed source {source!r}")
        self._feeds.append((source, iter(readings)))

    def service_feeds(self, now: float) -> None:
        """Pull one reading from each attached feed (driver-clocked)."""
        for source, feed in self._feeds:
            reading = next(feed, None)
            if reading is None:
                continue
            if source == "gps":
                body = {"source": "gps", "lat": reading.lat_deg, "lon": reading.lon_deg}
            else:
                body = {"source": "barometric", "pressure_hpa": float(reading)}
            self._publish(TOPIC_SENSOR, body, now)

    # --- snapshot & replay -----------------------------------------------------

    def snapshot(self) -> StationSnapshot:
        c = self.counters
        return StationSnapshot(
            session_id=self.config.session_id,
            gimbal=self.gimbal,
            estimate=self.estimate,
            telemetry=tuple(self._telemetry),
            counters=c,
            success_ratio=(c.delivered / c.sent) if c.sent else 0.0,
            mode=self.gimbal.mode,
            base_position=self.base_position,
            pressure_hpa=self.pressure_hpa,
            pending_commands=frozenset(self._pending_ids),
            link_mode=self.link.mode.name,
            link_baud=self.link.uart_baud,
            fix_interval_s=self.fix_interval_s,
            sweep_completions=self.sweep_completions,
        )

    def close(self) -> None:
        if self._journal is not None:
            self._journal.close()

    @classmethod
    def from_journal(
        cls, path: str | Path, calibration: Calibration
    ) -> tuple["Station", bool]:
        """Rebuild a station by folding a journal; returns (station, truncated)."""
        events, truncated = read_journal(path)
        if not events:
            return cls(calibration, _defer_session_event=True), truncated
        first = events[0]
        if first.topic != TOPIC_SESSION:
            raise JournalCorrupt("journal does not start with a session event")
        config = StationConfig.from_body(first.body, first.time)
        station = cls(calibration, config, _defer_session_event=True)
        for event in events[1:]:
            station._apply(event)
        return station, truncated


def journal_replay(path: str | Path, calibration: Calibration) -> StationSnapshot:
    """Fold a journal into the snapshot its live session ended with."""
    station, _ = Station.from_journal(path, calibration)
    return station.snapshot()


def _event_parts(command: Command) -> tuple[str, dict]:
    event = command_event(command)
    return event.topic, event.body
