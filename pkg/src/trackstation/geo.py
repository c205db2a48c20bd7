"""Geodesy and NMEA-0183 support.

Coordinates are WGS-84 latitude/longitude treated on a sphere of mean
radius 6,371,000 m; at the link distances this stack deals in (tens of
metres) the ellipsoidal error is far below every tolerance. Bearings are
true-north, clockwise, degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

EARTH_RADIUS_M = 6_371_000.0


class NmeaError(ValueError):
    """Base class for NMEA parsing/validation failures."""


class MalformedSentence(NmeaError):
    """Framing is broken: no '$', no single '*', bad checksum field, etc."""


class ChecksumMismatch(NmeaError):
    """Framing is fine but the declared checksum does not match.

    Kept distinct from MalformedSentence so the log-analysis pipeline can
    attribute the fault to the link rather than the source device.
    """


class NoFix(NmeaError):
    """Sentence parsed but reports an invalid fix (GPS-side fault)."""


class UnsupportedType(NmeaError):
    """Sentence type carries no position fix we know how to read."""


class CoincidentPoints(ValueError):
    """Bearing requested between two identical positions."""


@dataclass(frozen=True)
class GeoPoint:
    """A (possibly timestamped) position.

    Latitude outside [-90, 90] is rejected outright; longitude is wrapped
    into [-180, 180). ``time_utc`` is UTC seconds-of-day as reported by the
    source sentence (GGA carries no date).
    """

    lat_deg: float
    lon_deg: float
    alt_m: float | None = None
    time_utc: float | None = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.lat_deg) or not math.isfinite(self.lon_deg):
            raise ValueError(f"non-finite coordinates: {self.lat_deg}, {self.lon_deg}")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise ValueError(f"latitude out of range: {self.lat_deg}")
        if not -180.0 <= self.lon_deg < 180.0:  # wrap only when needed: keeps in-range values bit-exact
            lon = ((self.lon_deg + 180.0) % 360.0) - 180.0
            object.__setattr__(self, "lon_deg", lon)


@dataclass(frozen=True)
class NmeaSentence:
    """One parsed NMEA-0183 sentence with its checksum verified."""

    raw: str
    talker: str
    sentence_type: str
    fields: tuple[str, ...]
    checksum: int

    def serialize(self) -> str:
        """Rebuild the sentence text (no line terminator, uppercase hex)."""
        body = ",".join((self.talker + self.sentence_type, *self.fields))
        return f"${body}*{self.checksum:02X}"


def nmea_checksum(body: str) -> int:
    """XOR-fold of the characters strictly between '$' and '*'."""
    if "$" in body or "*" in body:
        raise ValueError("checksum body must not contain '$' or '*'")
    cs = 0
    for ch in body.encode("ascii"):
        cs ^= ch
    return cs


def parse_nmea(line: str) -> NmeaSentence:
    """Parse one NMEA line (CRLF/LF terminators accepted).

    Raises MalformedSentence for framing faults and ChecksumMismatch when
    the declared checksum differs from the computed one; the two are
    deliberately distinguishable.
    """
    raw = line.rstrip("\r\n")
    if not raw.startswith("$"):
        raise MalformedSentence(f"missing '$' start: {raw!r}")
    if raw.count("*") != 1:
        raise MalformedSentence(f"expected exactly one '*': {raw!r}")
    body, declared = raw[1:].split("*")
    if len(declared) != 2 or any(c not in "0123456789abcdefABCDEF" for c in declared):
        raise MalformedSentence(f"checksum field is not two hex digits: {raw!r}")
    if not body:
        raise MalformedSentence("empty sentence body")
    try:
        computed = nmea_checksum(body)
    except ValueError as exc:
        raise MalformedSentence(str(exc)) from exc
    if computed != int(declared, 16):
        raise ChecksumMismatch(
            f"declared {declared.upper()} != computed {computed:02X}: {raw!r}"
        )
    address, _, rest = body.partition(",")
    if len(address) < 3:
        raise MalformedSentence(f"address field too short: {address!r}")
    fields = tuple(rest.split(",")) if rest or "," in body else ()
    return NmeaSentence(
        raw=raw,
        talker=address[:2],
        sentence_type=address[2:],
        fields=fields,
        checksum=computed,
    )


def _parse_ddmm(value: str, hemisphere: str, width: int) -> float:
    """Convert a ddmm.mmmm / dddmm.mmmm field to signed decimal degrees."""
    if not value or len(value) <= width:
        raise NmeaError(f"bad coordinate field: {value!r}")
    degrees = int(value[:width])
    minutes = float(value[width:])
    if minutes >= 60.0:
        raise NmeaError(f"minutes out of range: {value!r}")
    decimal = degrees + minutes / 60.0
    if hemisphere in ("S", "W"):
        decimal = -decimal
    elif hemisphere not in ("N", "E"):
        raise NmeaError(f"bad hemisphere: {hemisphere!r}")
    return decimal


def _parse_utc(field: str) -> float | None:
    if len(field) < 6:
        return None
    return int(field[0:2]) * 3600 + int(field[2:4]) * 60 + float(field[4:])


def validate_fix(sentence: NmeaSentence) -> GeoPoint:
    """Extract a position from a GGA or RMC sentence iff the fix is valid.

    GGA requires fix quality > 0, RMC requires status 'A'. Anything else
    raises NoFix; other sentence types raise UnsupportedType.
    """
    stype = sentence.sentence_type
    f = sentence.fields
    try:
        if stype == "GGA":
            if len(f) < 10:
                raise NmeaError(f"GGA sentence too short: {sentence.raw!r}")
            if not f[5] or int(f[5]) <= 0:
                raise NoFix(f"GGA fix quality {f[5]!r}")
            lat = _parse_ddmm(f[1], f[2], 2)
            lon = _parse_ddmm(f[3], f[4], 3)
            alt = float(f[8]) if f[8] else None
            return GeoPoint(lat, lon, alt_m=alt, time_utc=_parse_utc(f[0]))
        if stype == "RMC":
            if len(f) < 6:
                raise NmeaError(f"RMC sentence too short: {sentence.raw!r}")
            if f[1] != "A":
                raise NoFix(f"RMC status {f[1]!r}")
            lat = _parse_ddmm(f[2], f[3], 2)
            lon = _parse_ddmm(f[4], f[5], 3)
            return GeoPoint(lat, lon, time_utc=_parse_utc(f[0]))
    except NmeaError:
        raise
    except ValueError as exc:
        # checksummed but garbage fields: a source fault, never a link fault
        raise NmeaError(f"bad field in {stype}: {exc}") from exc
    raise UnsupportedType(stype)


def _format_ddmm(decimal_deg: float, is_latitude: bool) -> tuple[str, str]:
    hemis = ("N", "S") if is_latitude else ("E", "W")
    hemi = hemis[0] if decimal_deg >= 0 else hemis[1]
    mag = abs(decimal_deg)
    degrees = int(mag)
    minutes = (mag - degrees) * 60.0
    if minutes >= 59.999995:  # avoid rolling over to 60.00000 when rounding
        degrees += 1
        minutes = 0.0
    width = 2 if is_latitude else 3
    return f"{degrees:0{width}d}{minutes:08.5f}", hemi


def _format_utc(seconds_of_day: float) -> str:
    # quantize to centiseconds first so rounding can never emit ":60.00"
    cs = int(round((seconds_of_day % 86400) * 100)) % 8_640_000
    h, rem = divmod(cs, 360_000)
    m, rem = divmod(rem, 6_000)
    return f"{h:02d}{m:02d}{rem // 100:02d}.{rem % 100:02d}"


def build_gga(
    point: GeoPoint,
    utc_seconds: float,
    fix_quality: int = 1,
    num_satellites: int = 8,
    hdop: float = 0.9,
    talker: str = "GP",
) -> str:
    """Render a GGA sentence (no terminator) for a position."""
    lat, ns = _format_ddmm(point.lat_deg, True)
    lon, ew = _format_ddmm(point.lon_deg, False)
    alt = f"{point.alt_m:.1f}" if point.alt_m is not None else "0.0"
    body = (
        f"{talker}GGA,{_format_utc(utc_seconds)},{lat},{ns},{lon},{ew},"
        f"{fix_quality},{num_satellites:02d},{hdop:.1f},{alt},M,0.0,M,,"
    )
    return f"${body}*{nmea_checksum(body):02X}"


def build_rmc(
    point: GeoPoint,
    utc_seconds: float,
    date_ddmmyy: str = "150524",
    status: str = "A",
    talker: str = "GP",
) -> str:
    """Render an RMC sentence (no terminator) for a position."""
    lat, ns = _format_ddmm(point.lat_deg, True)
    lon, ew = _format_ddmm(point.lon_deg, False)
    body = (
        f"{talker}RMC,{_format_utc(utc_seconds)},{status},{lat},{ns},{lon},{ew},"
        f"0.0,0.0,{date_ddmmyy},,,A"
    )
    return f"${body}*{nmea_checksum(body):02X}"


def write_nmea_log(lines: Sequence[str]) -> str:
    """Join sentences into file form: one per record, CRLF terminated."""
    return "".join(line + "\r\n" for line in lines)


def read_nmea_log(text: str) -> list[str]:
    """Split a log file into raw sentences, accepting CRLF or LF."""
    return [line.rstrip("\r") for line in text.split("\n") if line.strip()]


def haversine_distance(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in metres."""
    la1, la2 = math.radians(a.lat_deg), math.radians(b.lat_deg)
    dlat = la2 - la1
    dlon = math.radians(b.lon_deg - a.lon_deg)
    h = math.sin(dlat / 2) ** 2 + math.cos(la1) * math.cos(la2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.atan2(math.sqrt(h), math.sqrt(1 - h))


def initial_bearing(origin: GeoPoint, target: GeoPoint) -> float:
    """Forward azimuth of the great circle at ``origin``, in [0, 360)."""
    if origin.lat_deg == target.lat_deg and origin.lon_deg == target.lon_deg:
        raise CoincidentPoints("bearing is undefined for coincident points")
    la1, la2 = math.radians(origin.lat_deg), math.radians(target.lat_deg)
    dlon = math.radians(target.lon_deg - origin.lon_deg)
    y = math.sin(dlon) * math.cos(la2)
    x = math.cos(la1) * math.sin(la2) - math.sin(la1) * math.cos(la2) * math.cos(dlon)
    return math.degrees(math.atan2(y, x)) % 360.0


def destination_point(origin: GeoPoint, bearing_deg: float, distance_m: float) -> GeoPoint:
    """Position reached from ``origin`` along a bearing for a distance."""
    delta = distance_m / EARTH_RADIUS_M
    theta = math.radians(bearing_deg)
    la1 = math.radians(origin.lat_deg)
    lo1 = math.radians(origin.lon_deg)
    la2 = math.asin(
        math.sin(la1) * math.cos(delta) + math.cos(la1) * math.sin(delta) * math.cos(theta)
    )
    lo2 = lo1 + math.atan2(
        math.sin(theta) * math.sin(delta) * math.cos(la1),
        math.cos(delta) - math.sin(la1) * math.sin(la2),
    )
    return GeoPoint(math.degrees(la2), math.degrees(lo2))
