"""Geodesy and NMEA tests, including the randomized property suites."""

import math
import random
from functools import reduce

import pytest

from trackstation.geo import (
    ChecksumMismatch,
    CoincidentPoints,
    GeoPoint,
    MalformedSentence,
    NoFix,
    UnsupportedType,
    build_gga,
    build_rmc,
    destination_point,
    haversine_distance,
    initial_bearing,
    nmea_checksum,
    parse_nmea,
    read_nmea_log,
    validate_fix,
    write_nmea_log,
)

GGA_BODY = "GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,"
GGA_LINE = f"${GGA_BODY}*47"


def xor_oracle(text: str) -> int:
    return reduce(lambda a, b: a ^ b, text.encode(), 0)


# --- independent spherical-trig oracle (unit-sphere vectors) --------------

def _unit_vector(p: GeoPoint):
    la, lo = math.radians(p.lat_deg), math.radians(p.lon_deg)
    return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))


def oracle_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Spherical law of cosines over cartesian vectors."""
    dot = sum(x * y for x, y in zip(_unit_vector(a), _unit_vector(b)))
    return 6_371_000.0 * math.acos(max(-1.0, min(1.0, dot)))


def oracle_bearing(a: GeoPoint, b: GeoPoint) -> float:
    """Departure direction of the chord projected on the local tangent plane.

    The great circle through a and b lies in the plane spanned by their
    position vectors, so the tangent-plane projection of (b - a) at a points
    exactly along the initial great-circle direction.
    """
    va, vb = _unit_vector(a), _unit_vector(b)
    la, lo = math.radians(a.lat_deg), math.radians(a.lon_deg)
    north = (-math.sin(la) * math.cos(lo), -math.sin(la) * math.sin(lo), math.cos(la))
    east = (-math.sin(lo), math.cos(lo), 0.0)
    d = tuple(vb[i] - va[i] for i in range(3))
    e = sum(d[i] * east[i] for i in range(3))
    n = sum(d[i] * north[i] for i in range(3))
    return math.degrees(math.atan2(e, n)) % 360.0


def circular_delta(a_deg: float, b_deg: float) -> float:
    return abs((a_deg - b_deg + 180.0) % 360.0 - 180.0)


class TestChecksum:
    def test_empty_body_is_zero(self):
        assert nmea_checksum("") == 0x00

    def test_single_byte(self):
        assert nmea_checksum("A") == 0x41

    def test_reference_gga_body(self):
        assert xor_oracle(GGA_BODY) == 0x47
        assert nmea_checksum(GGA_BODY) == 0x47

    def test_rejects_framing_characters(self):
        with pytest.raises(ValueError):
            nmea_checksum("GP$GGA")

    def test_xor_homomorphism_random_bodies(self):
        rng = random.Random(11)
        alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789,.-"
        for _ in range(1000):
            b1 = "".join(rng.choices(alphabet, k=rng.randrange(0, 40)))
            b2 = "".join(rng.choices(alphabet, k=rng.randrange(0, 40)))
            assert nmea_checksum(b1 + b2) == nmea_checksum(b1) ^ nmea_checksum(b2)


class TestParse:
    def test_well_formed_gga(self):
        s = parse_nmea(GGA_LINE)
        assert s.talker == "GP"
        assert s.sentence_type == "GGA"
        assert s.checksum == 0x47
        assert s.fields[0] == "123519"
        assert s.raw == GGA_LINE

    def test_accepts_terminators(self):
        assert parse_nmea(GGA_LINE + "\r\n").raw == GGA_LINE
        assert parse_nmea(GGA_LINE + "\n").raw == GGA_LINE

    def test_single_bit_corruption_is_checksum_mismatch(self):
        corrupted = GGA_LINE.replace("4807", "4806")
        with pytest.raises(ChecksumMismatch):
            parse_nmea(corrupted)

    def test_missing_star_is_malformed(self):
        with pytest.raises(MalformedSentence):
            parse_nmea("$" + GGA_BODY + "47")

    def test_missing_dollar_is_malformed(self):
        with pytest.raises(MalformedSentence):
            parse_nmea(GGA_BODY + "*47")

    def test_bad_hex_is_malformed(self):
        with pytest.raises(MalformedSentence):
            parse_nmea(f"${GGA_BODY}*4G")

    def test_lowercase_checksum_accepted(self):
        body = "GPGGA,0,1"
        line = f"${body}*{nmea_checksum(body):02x}"
        assert parse_nmea(line).checksum == nmea_checksum(body)

    def test_unknown_type_parses_generically(self):
        body = "PSRF103,00,6,00,0"
        s = parse_nmea(f"${body}*{nmea_checksum(body):02X}")
        assert s.talker == "PS"
        assert s.fields == ("00", "6", "00", "0")

    def test_roundtrip_random_sentences(self):
        rng = random.Random(23)
        for _ in range(1000):
            point = GeoPoint(rng.uniform(-89, 89), rng.uniform(-179, 179))
            utc = rng.uniform(0, 86399)
            line = (
                build_gga(point, utc, num_satellites=rng.randrange(4, 13))
                if rng.random() < 0.5
                else build_rmc(point, utc)
            )
            assert parse_nmea(line).serialize() == line


class TestValidateFix:
    def test_gga_zero_quality_is_no_fix(self):
        line = build_gga(GeoPoint(48.0, 11.0), 0.0, fix_quality=0)
        with pytest.raises(NoFix):
            validate_fix(parse_nmea(line))

    def test_gga_latitude_conversion(self):
        p = validate_fix(parse_nmea(GGA_LINE))
        assert p.lat_deg == pytest.approx(48 + 7.038 / 60, abs=1e-4)
        assert p.alt_m == pytest.approx(545.4)

    def test_rmc_longitude_conversion(self):
        body = "GPRMC,123519,A,4807.038,N,01131.000,E,022.4,084.4,230394,,,A"
        p = validate_fix(parse_nmea(f"${body}*{nmea_checksum(body):02X}"))
        assert p.lon_deg == pytest.approx(11 + 31.0 / 60, abs=1e-4)

    def test_rmc_void_status_is_no_fix(self):
        body = "GPRMC,123519,V,4807.038,N,01131.000,E,,,230394,,,N"
        with pytest.raises(NoFix):
            validate_fix(parse_nmea(f"${body}*{nmea_checksum(body):02X}"))

    def test_unsupported_type(self):
        body = "GPGSV,3,1,11,03,03,111,00"
        with pytest.raises(UnsupportedType):
            validate_fix(parse_nmea(f"${body}*{nmea_checksum(body):02X}"))

    def test_garbage_fields_raise_nmea_error(self):
        body = "GPGGA,123519,48xy.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,"
        line = f"${body}*{nmea_checksum(body):02X}"
        from trackstation.geo import NmeaError

        with pytest.raises(NmeaError):
            validate_fix(parse_nmea(line))

    def test_utc_rounding_never_emits_sixty_seconds(self):
        p = GeoPoint(48.0, 11.0)
        line = build_gga(p, 59.9999)  # would round to 60.00 naively
        assert ",000100.00," in line
        line = build_gga(p, 86399.9999)  # end-of-day wraps to midnight
        assert ",000000.00," in line
        validate_fix(parse_nmea(line))

    def test_never_returns_invalid_points(self):
        rng = random.Random(37)
        for _ in range(200):
            point = GeoPoint(rng.uniform(-89.9, 89.9), rng.uniform(-180, 179.9))
            got = validate_fix(parse_nmea(build_gga(point, rng.uniform(0, 86399))))
            assert -90 <= got.lat_deg <= 90
            assert -180 <= got.lon_deg < 180
            assert got.lat_deg == pytest.approx(point.lat_deg, abs=2e-7)
            assert got.lon_deg == pytest.approx(point.lon_deg, abs=2e-7)


class TestGeoPoint:
    def test_latitude_out_of_range_is_error(self):
        with pytest.raises(ValueError):
            GeoPoint(90.0001, 0.0)
        with pytest.raises(ValueError):
            GeoPoint(-91.0, 0.0)

    def test_longitude_normalized(self):
        assert GeoPoint(0.0, 180.0).lon_deg == -180.0
        assert GeoPoint(0.0, 190.0).lon_deg == pytest.approx(-170.0)
        assert GeoPoint(0.0, -180.0).lon_deg == -180.0

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            GeoPoint(float("nan"), 0.0)


class TestHaversine:
    def test_identity(self):
        p = GeoPoint(51.5, -0.12)
        assert haversine_distance(p, p) == 0.0

    def test_one_degree_on_equator(self):
        d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, 1))
        assert d == pytest.approx(111_195, abs=1.0)

    def test_antipodal(self):
        d = haversine_distance(GeoPoint(0, 0), GeoPoint(0, 180))
        assert d == pytest.approx(math.pi * 6_371_000, abs=10.0)

    def test_symmetry_and_triangle_inequality(self):
        rng = random.Random(5)
        for _ in range(300):
            pts = [GeoPoint(rng.uniform(-89, 89), rng.uniform(-179, 179)) for _ in range(3)]
            a, b, c = pts
            ab = haversine_distance(a, b)
            assert ab == haversine_distance(b, a)
            ac = haversine_distance(a, c)
            cb = haversine_distance(c, b)
            assert ab <= (ac + cb) * (1 + 1e-6)


class TestBearing:
    def test_due_north(self):
        assert initial_bearing(GeoPoint(0, 0), GeoPoint(1, 0)) == pytest.approx(0.0)

    def test_due_east_on_equator(self):
        assert initial_bearing(GeoPoint(0, 0), GeoPoint(0, 1)) == pytest.approx(90.0)

    def test_london_to_paris(self):
        london = GeoPoint(51.5074, -0.1278)
        paris = GeoPoint(48.8566, 2.3522)
        expected = oracle_bearing(london, paris)  # 148.116 deg
        assert expected == pytest.approx(148.116, abs=0.01)
        assert initial_bearing(london, paris) == pytest.approx(expected, abs=0.5)

    def test_coincident_points(self):
        p = GeoPoint(10, 10)
        with pytest.raises(CoincidentPoints):
            initial_bearing(p, p)

    def test_reciprocal_bearings_on_equator(self):
        rng = random.Random(7)
        for _ in range(200):
            a = GeoPoint(0.0, rng.uniform(-179, 179))
            b = GeoPoint(0.0, a.lon_deg + rng.uniform(0.001, 1.0))
            fwd = initial_bearing(a, b)
            back = initial_bearing(b, a)
            assert circular_delta(fwd + 180.0, back) <= 0.01


class TestAgainstOracle:
    def test_thousand_random_pairs(self):
        rng = random.Random(99)
        for _ in range(1000):
            a = GeoPoint(rng.uniform(-85, 85), rng.uniform(-179, 179))
            b = GeoPoint(
                min(85.0, max(-85.0, a.lat_deg + rng.uniform(-0.5, 0.5))),
                a.lon_deg + rng.uniform(-0.5, 0.5),
            )
            if (a.lat_deg, a.lon_deg) == (b.lat_deg, b.lon_deg):
                continue
            d = haversine_distance(a, b)
            ref_d = oracle_distance(a, b)
            if ref_d > 1.0:
                assert abs(d - ref_d) / ref_d < 1e-3
            assert circular_delta(initial_bearing(a, b), oracle_bearing(a, b)) < 0.36


class TestDestinationPoint:
    def test_roundtrip_with_distance_and_bearing(self):
        rng = random.Random(13)
        base = GeoPoint(52.95, -1.15)
        for _ in range(200):
            bearing = rng.uniform(0, 360)
            dist = rng.uniform(1, 5000)
            p = destination_point(base, bearing, dist)
            assert haversine_distance(base, p) == pytest.approx(dist, rel=1e-9, abs=1e-6)
            assert circular_delta(initial_bearing(base, p), bearing) < 1e-6


class TestLogIo:
    def test_write_emits_crlf(self):
        assert write_nmea_log([GGA_LINE]) == GGA_LINE + "\r\n"

    def test_read_accepts_both_terminators(self):
        text = GGA_LINE + "\r\n" + GGA_LINE + "\n"
        assert read_nmea_log(text) == [GGA_LINE, GGA_LINE]
