"""Station service tests: ingestion, commands, journal replay, gateway codec."""

import json

import pytest

from trackstation.calibration import load_calibration
from trackstation.geo import GeoPoint, build_gga, destination_point
from trackstation.linkmodel import round_trip_latency
from trackstation.station import (
    ACK_OK,
    ACK_UNDELIVERED,
    Command,
    DuplicateCommand,
    EventBus,
    JournalCorrupt,
    LinkEvent,
    SchemaViolation,
    Station,
    StationConfig,
    TOPIC_ACK,
    TOPIC_GIMBAL,
    TOPIC_TELEMETRY,
    UnknownCommand,
    command_event,
    decode_frame,
    gateway_decode,
    gateway_encode,
    journal_replay,
    read_journal,
)

T0 = 1_715_774_400.0  # matches the fixed session epoch


@pytest.fixture(scope="module")
def cal():
    return load_calibration()


def make_station(cal, tmp_path=None, **overrides) -> Station:
    config = StationConfig(**overrides) if overrides else StationConfig()
    journal = tmp_path / "session.jsonl" if tmp_path else None
    return Station(cal, config, journal_path=journal)


def fix_line(base: GeoPoint, bearing: float, distance: float, utc: float) -> str:
    return build_gga(destination_point(base, bearing, distance), utc)


class TestIngestTelemetry:
    def test_valid_line_updates_record_and_estimate(self, cal):
        st = make_station(cal)
        line = fix_line(st.base_position, 90.0, 50.0, 43_200.0)
        record = st.ingest_telemetry(line, T0 + 5.0)
        assert record is not None
        assert record.seq == 1
        assert st.estimate is not None
        assert st.estimate.bearing_deg == pytest.approx(90.0, abs=0.01)
        assert st.counters.delivered == 1

    def test_checksum_corrupt_line_rejected(self, cal):
        st = make_station(cal)
        line = fix_line(st.base_position, 90.0, 50.0, 43_200.0)
        bad = line[:-2] + ("00" if line[-2:] != "00" else "11")
        assert st.ingest_telemetry(bad, T0) is None
        assert st.counters.rejected_checksum == 1
        assert st.estimate is None

    def test_no_fix_line_rejected_distinctly(self, cal):
        st = make_station(cal)
        line = build_gga(
            destination_point(st.base_position, 0.0, 10.0), 43_200.0, fix_quality=0
        )
        assert st.ingest_telemetry(line, T0) is None
        assert st.counters.rejected_no_fix == 1
        assert st.counters.rejected_checksum == 0

    def test_garbage_fields_categorized_as_source_fault(self, cal):
        from trackstation.geo import nmea_checksum

        st = make_station(cal)
        body = "GPGGA,123519,48xy.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,"
        line = f"${body}*{nmea_checksum(body):02X}"
        assert st.ingest_telemetry(line, T0) is None
        assert st.counters.rejected_no_fix == 1
        assert st.counters.rejected_checksum == 0

    def test_seq_strictly_increasing(self, cal):
        st = make_station(cal)
        for i in range(10):
            st.ingest_telemetry(
                fix_line(st.base_position, 45.0, 10.0 + i, 43_200.0 + i), T0 + i
            )
        seqs = [r.seq for r in st.snapshot().telemetry]
        assert seqs == sorted(set(seqs))
        assert len(seqs) == 10


class TestCommands:
    def test_manual_point_acks_and_switches_mode(self, cal):
        st = make_station(cal)
        ack = st.handle_command(
            Command("manual_point", {"az": 90.0, "el": 0.0}, "c1", T0), T0
        )
        assert ack is not None and ack.body["status"] == ACK_OK
        assert st.controller.state.mode == "manual"
        assert st.snapshot().pending_commands == frozenset()

    def test_unknown_command(self, cal):
        st = make_station(cal)
        with pytest.raises(UnknownCommand):
            st.handle_command(Command("warp_drive", {}, "c1", T0), T0)

    def test_duplicate_command_rejected(self, cal):
        st = make_station(cal)
        cmd = Command("start_sweep", {}, "c1", T0)
        st.handle_command(cmd, T0)
        with pytest.raises(DuplicateCommand):
            st.handle_command(cmd, T0 + 1)

    def test_portable_command_acks_after_round_trip(self, cal):
        st = make_station(cal)
        line = fix_line(st.base_position, 0.0, 10.0, 43_200.0)
        st.ingest_telemetry(line, T0)
        st.handle_command(Command("set_fix_interval", {"seconds": 10.0}, "c2", T0), T0)
        assert st.snapshot().pending_commands == {"c2"}
        rtt = round_trip_latency(st.link)
        acks = st.poll_timeouts(T0 + rtt + 0.001)
        assert len(acks) == 1
        assert acks[0].body["status"] == ACK_OK
        assert st.fix_interval_s == 10.0
        assert st.snapshot().pending_commands == frozenset()

    def test_out_of_range_portable_command_undelivered(self, cal):
        # Manual-point the antenna away, then park the portable beyond reach.
        st = make_station(cal, initial_azimuth_deg=0.0)
        st.ingest_telemetry(fix_line(st.base_position, 0.0, 500.0, 43_200.0), T0)
        st.handle_command(Command("set_fix_interval", {"seconds": 1.0}, "c3", T0), T0)
        rtt = round_trip_latency(st.link)
        acks = st.poll_timeouts(T0 + 3 * rtt + 1.001)
        assert len(acks) == 1
        assert acks[0].body["status"] == ACK_UNDELIVERED
        assert st.fix_interval_s == 5.0  # unchanged

    def test_set_radio_mode_swaps_link(self, cal):
        st = make_station(cal)
        st.ingest_telemetry(fix_line(st.base_position, 0.0, 5.0, 43_200.0), T0)
        st.handle_command(Command("set_radio_mode", {"mode": "FU4"}, "c4", T0), T0)
        st.poll_timeouts(T0 + 10.0)
        assert st.link.mode.name == "FU4"
        assert st.snapshot().link_mode == "FU4"

    def test_start_bench_runs_and_reports(self, cal):
        st = make_station(cal)
        ack = st.handle_command(Command("start_bench", {"kind": "latency"}, "b1", T0), T0)
        assert ack is not None and ack.body["status"] == ACK_OK
        assert "avg" in ack.body["detail"]
        ack2 = st.handle_command(Command("start_bench", {"kind": "range"}, "b2", T0), T0)
        assert "delivered" in ack2.body["detail"]

    def test_command_ack_bijection(self, cal):
        st = make_station(cal)
        acks = []
        st.bus.subscribe(TOPIC_ACK, lambda e: acks.append(e.body["id"]))
        st.ingest_telemetry(fix_line(st.base_position, 0.0, 5.0, 43_200.0), T0)
        issued = []
        for i, kind in enumerate(
            ["manual_point", "start_sweep", "resume_tracking", "set_fix_interval"]
        ):
            params = (
                {"az": 10.0 * i, "el": 0.0}
                if kind == "manual_point"
                else {"seconds": 2.0}
                if kind == "set_fix_interval"
                else {}
            )
            cmd = Command(kind, params, f"id-{i}", T0 + i)
            st.handle_command(cmd, T0 + i)
            issued.append(cmd.id)
        st.poll_timeouts(T0 + 1000.0)
        assert sorted(acks) == sorted(issued)
        assert st.snapshot().pending_commands == frozenset()


class TestSnapshot:
    def test_fresh_station(self, cal):
        snap = make_station(cal).snapshot()
        assert snap.telemetry == ()
        assert snap.mode == "idle"
        assert snap.counters.sent == 0
        assert snap.success_ratio == 0.0
        assert snap.pressure_hpa is None

    def test_success_ratio_after_mixed_attempts(self, cal):
        st = make_station(cal)
        base = st.base_position
        for i in range(7):
            st.ingest_telemetry(fix_line(base, 10.0, 5.0 + i, 43_200.0 + i), T0 + i)
        for i in range(3):
            st.record_lost_transmission(
                "lost", destination_point(base, 10.0, 200.0 + i), T0 + 7 + i
            )
        snap = st.snapshot()
        assert snap.counters.sent == 10
        assert snap.counters.delivered == 7
        assert snap.success_ratio == pytest.approx(0.7)

    def test_snapshot_is_stable_between_events(self, cal):
        st = make_station(cal)
        st.ingest_telemetry(fix_line(st.base_position, 10.0, 5.0, 43_200.0), T0)
        assert st.snapshot() == st.snapshot()


class TestSensorFeeds:
    def test_no_feeds_uses_config_base(self, cal):
        st = make_station(cal)
        st.service_feeds(T0)
        assert st.base_position == st.config.base_position

    def test_gps_feed_moves_base(self, cal):
        st = make_station(cal)
        new_base = GeoPoint(52.96, -1.14)
        st.sensor_feed_attach("gps", [new_base])
        st.service_feeds(T0)
        assert st.base_position == new_base
        # bearings from now on use the new base
        st.ingest_telemetry(fix_line(new_base, 90.0, 40.0, 43_200.0), T0 + 1)
        assert st.estimate.bearing_deg == pytest.approx(90.0, abs=0.01)

    def test_barometric_reading_lands_in_snapshot(self, cal):
        st = make_station(cal)
        st.sensor_feed_attach("barometric", [1013.25])
        st.service_feeds(T0)
        assert st.snapshot().pressure_hpa == 1013.25


class TestJournal:
    def test_empty_journal_replays_fresh(self, cal, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        snap = journal_replay(path, cal)
        assert snap.telemetry == ()
        assert snap.counters.sent == 0

    def test_live_equals_replay(self, cal, tmp_path):
        st = make_station(cal, tmp_path)
        base = st.base_position
        st.activate_tracking()
        now = T0
        for i in range(12):
            now = T0 + i * 1.0
            if i % 3 == 0:
                delivered = i % 6 == 0
                line = fix_line(base, 30.0 + i, 20.0 + i, 43_200.0 + i)
                if delivered:
                    st.ingest_telemetry(line, now)
                else:
                    st.record_lost_transmission(
                        line, destination_point(base, 30.0 + i, 20.0 + i), now
                    )
            st.tick_controller(now, 1.0)
        st.handle_command(Command("manual_point", {"az": 45.0, "el": 0.0}, "m1", now), now)
        st.tick_controller(now + 1.0, 1.0)
        live = st.snapshot()
        st.close()
        replayed = journal_replay(tmp_path / "session.jsonl", cal)
        assert replayed == live

    def test_replay_reproduces_command_effects(self, cal, tmp_path):
        st = make_station(cal, tmp_path)
        st.ingest_telemetry(fix_line(st.base_position, 0.0, 5.0, 43_200.0), T0)
        st.handle_command(Command("set_radio_mode", {"mode": "FU4"}, "m1", T0), T0)
        st.handle_command(Command("set_fix_interval", {"seconds": 8.0}, "m2", T0), T0)
        st.poll_timeouts(T0 + 60.0)
        live = st.snapshot()
        st.close()
        assert live.link_mode == "FU4"
        assert live.fix_interval_s == 8.0
        assert journal_replay(tmp_path / "session.jsonl", cal) == live

    def test_truncated_tail_tolerated(self, cal, tmp_path):
        st = make_station(cal, tmp_path)
        st.ingest_telemetry(fix_line(st.base_position, 10.0, 5.0, 43_200.0), T0)
        expected = st.snapshot()
        st.close()
        path = tmp_path / "session.jsonl"
        with open(path, "a", encoding="utf-8") as fh:
            fh.write('{"type":"stats","time":"2024-05-15T12:0')  # torn write
        events, truncated = read_journal(path)
        assert truncated
        assert journal_replay(path, cal) == expected

    def test_mid_file_corruption_fatal(self, cal, tmp_path):
        st = make_station(cal, tmp_path)
        st.ingest_telemetry(fix_line(st.base_position, 10.0, 5.0, 43_200.0), T0)
        st.close()
        path = tmp_path / "session.jsonl"
        lines = path.read_text().splitlines()
        lines[1] = lines[1][: len(lines[1]) // 2]  # corrupt a non-final record
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(JournalCorrupt):
            read_journal(path)


class TestGatewayCodec:
    def test_gimbal_frame_schema(self, cal):
        st = make_station(cal)
        frames = []
        st.bus.subscribe(TOPIC_GIMBAL, lambda e: frames.append(gateway_encode(e)))
        st.tick_controller(T0, 1.0)
        doc = json.loads(frames[0])
        assert doc["type"] == "gimbal"
        assert set(doc["body"]) >= {"az", "el", "mode"}
        assert doc["time"].endswith("Z")

    def test_az_out_of_range_names_field(self):
        frame = json.dumps(
            {
                "type": "command",
                "time": "2024-05-15T12:00:00.000000Z",
                "body": {"id": "x", "kind": "manual_point", "params": {"az": 400}},
            }
        )
        with pytest.raises(SchemaViolation) as err:
            gateway_decode(frame)
        assert err.value.path == "body.az"

    def test_encode_decode_identity_for_all_command_kinds(self):
        samples = {
            "set_radio_mode": {"mode": "FU2"},
            "set_fix_interval": {"seconds": 5.0},
            "manual_point": {"az": 123.5, "el": 10.0},
            "start_sweep": {"direction": "ccw"},
            "resume_tracking": {},
            "start_bench": {"kind": "latency"},
        }
        for kind, params in samples.items():
            cmd = Command(kind, params, f"cmd-{kind}", T0)
            frame = gateway_encode(command_event(cmd))
            assert gateway_decode(frame) == cmd

    def test_every_topic_is_encodable(self, cal, tmp_path):
        st = make_station(cal, tmp_path)
        st.ingest_telemetry(fix_line(st.base_position, 10.0, 5.0, 43_200.0), T0)
        st.handle_command(Command("start_sweep", {}, "s1", T0), T0)
        for _ in range(7):
            st.tick_controller(T0, 1.0)
        st.sensor_feed_attach("barometric", [1000.0])
        st.service_feeds(T0)
        st.close()
        for event in read_journal(tmp_path / "session.jsonl")[0]:
            assert decode_frame(gateway_encode(event)) == event

    def test_non_command_frame_rejected_by_decoder(self):
        frame = json.dumps(
            {"type": "stats", "time": "2024-05-15T12:00:00.000000Z", "body": {}}
        )
        with pytest.raises(SchemaViolation):
            gateway_decode(frame)


class TestEventBus:
    def test_topic_and_wildcard_dispatch_in_order(self):
        bus = EventBus()
        seen = []
        bus.subscribe(TOPIC_TELEMETRY, lambda e: seen.append(("t", e.body["n"])))
        bus.subscribe("*", lambda e: seen.append(("*", e.body["n"])))
        for n in range(3):
            bus.publish(LinkEvent(TOPIC_TELEMETRY, T0 + n, {"n": n}))
        assert seen == [("t", 0), ("*", 0), ("t", 1), ("*", 1), ("t", 2), ("*", 2)]

    def test_unknown_topic_rejected(self):
        with pytest.raises(ValueError):
            EventBus().subscribe("nope", lambda e: None)
