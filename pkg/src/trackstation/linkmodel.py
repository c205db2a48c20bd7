"""Deterministic model of an HC-12-class point-to-point radio link.

Timing follows a max-of-bottlenecks rule: a transfer can go no faster
than the UART leg or the air leg, whichever is slower, plus a calibrated
per-transfer processing overhead. Range follows a log-distance model
around per-configuration base ranges measured with the stub antennas.

Everything here is a pure function of its arguments; the stochastic
packet mode draws from a hash of the channel seed so identical inputs
always give identical outcomes.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, replace

FRAMING_BITS_PER_BYTE = 10  # 8N1
SUPPORTED_BAUDS = (1200, 2400, 4800, 9600, 38400, 115200)

# Slack on the deterministic range threshold so a fix placed exactly at
# the calibrated maximum is not dropped by float roundoff.
RANGE_EPSILON_M = 1e-6


@dataclass(frozen=True)
class AirRateRule:
    """How a mode's over-the-air payload rate relates to the UART baud."""

    kind: str  # "fixed" | "scales_with_uart" | "calibrated"
    bytes_per_s: float | None = None

    def rate(self, uart_baud: int) -> float:
        if self.kind == "scales_with_uart":
            return uart_baud / FRAMING_BITS_PER_BYTE
        assert self.bytes_per_s is not None
        return self.bytes_per_s


@dataclass(frozen=True)
class RadioMode:
    name: str
    air_rate_rule: AirRateRule
    max_packet_bytes: int | None = None  # None = unlimited
    min_packet_gap_s: float = 0.0


@dataclass(frozen=True)
class AntennaPattern:
    """Gain pattern: flat for stub/omni, a sine-shaped rolloff for yagi."""

    kind: str  # "stub" | "omni_unity" | "yagi"
    boresight_gain_dbi: float
    perpendicular_deficit_db: float = 0.0
    pattern_exponent: float = 2.0


@dataclass(frozen=True)
class LinkConfig:
    """One radio configuration under test, with its calibration constants."""

    mode: RadioMode
    uart_baud: int
    tx_antenna: AntennaPattern
    rx_antenna: AntennaPattern
    per_direction_overhead_s: float = 0.0
    per_transfer_overhead_s: float = 0.0
    buffer_capacity_bytes: int = 60
    base_range_m: float | None = None
    reference_gain_dbi: float = 0.0
    path_loss_exponent: float = 2.0
    stochastic: bool = False
    stochastic_sigma_m: float = 10.0
    config_id: str = ""

    def __post_init__(self) -> None:
        if self.uart_baud not in SUPPORTED_BAUDS:
            raise ValueError(f"unsupported UART baud {self.uart_baud}")
        if self.per_direction_overhead_s < 0 or self.per_transfer_overhead_s < 0:
            raise ValueError("overheads must be >= 0")

    def with_antennas(self, tx: AntennaPattern, rx: AntennaPattern) -> "LinkConfig":
        return replace(self, tx_antenna=tx, rx_antenna=rx)


@dataclass(frozen=True)
class WiredReference:
    """Direct UART-to-UART comparison link (no radio in the path)."""

    uart_baud: int
    throughput_factor: float = 1.01

    def transfer_time(self, n_bytes: int) -> float:
        return uart_transfer_time(n_bytes, self.uart_baud) * self.throughput_factor

    def round_trip_latency(self) -> float:
        # 1 byte each way at the UART rate; no module processing.
        return 2.0 * FRAMING_BITS_PER_BYTE / self.uart_baud


@dataclass(frozen=True)
class ChannelState:
    """Instantaneous geometry between the two ends of the link."""

    distance_m: float
    tx_off_boresight_deg: float = 0.0
    rx_off_boresight_deg: float = 0.0
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.distance_m < 0:
            raise ValueError("distance must be >= 0")
        for angle in (self.tx_off_boresight_deg, self.rx_off_boresight_deg):
            if not 0.0 <= angle <= 180.0:
                raise ValueError(f"off-boresight angle out of [0, 180]: {angle}")


@dataclass(frozen=True)
class Paced:
    """Datasheet-compliant pacing: bounded bursts with a minimum gap."""

    burst_bytes: int
    gap_s: float


@dataclass(frozen=True)
class TransferResult:
    duration_s: float
    bytes_lost: int
    overflowed: bool


def uart_transfer_time(n_bytes: int, uart_baud: int) -> float:
    """Seconds to move ``n_bytes`` over the serial leg (8N1 framing)."""
    if n_bytes < 0:
        raise ValueError("byte count must be >= 0")
    if uart_baud <= 0:
        raise ValueError("baud must be > 0")
    return n_bytes * FRAMING_BITS_PER_BYTE / uart_baud


def air_payload_rate(mode: RadioMode, uart_baud: int) -> float:
    """Over-the-air payload rate in bytes/s for a mode at a UART baud."""
    return mode.air_rate_rule.rate(uart_baud)


def simulate_transfer(
    cfg: LinkConfig, n_bytes: int, pacing: Paced | None = None
) -> TransferResult:
    """Fluid-model transfer of ``n_bytes`` through the link.

    Continuous sending into a mode whose air leg is slower than the UART
    leg fills the module buffer; bytes arriving once it is full are lost
    (``overflowed`` set). Pacing that respects the mode's packet bound and
    gap lets the buffer drain between bursts, so nothing is lost.
    """
    if n_bytes < 0:
        raise ValueError("byte count must be >= 0")
    if n_bytes == 0:
        return TransferResult(0.0, 0, False)

    uart_rate = cfg.uart_baud / FRAMING_BITS_PER_BYTE  # bytes/s
    air_rate = air_payload_rate(cfg.mode, cfg.uart_baud)

    if pacing is None:
        if air_rate >= uart_rate - 1e-12:
            duration = uart_transfer_time(n_bytes, cfg.uart_baud)
            return TransferResult(duration + cfg.per_transfer_overhead_s, 0, False)
        uart_time = n_bytes / uart_rate
        peak_queue = n_bytes - air_rate * uart_time
        if peak_queue <= cfg.buffer_capacity_bytes:
            duration = n_bytes / air_rate
            return TransferResult(duration + cfg.per_transfer_overhead_s, 0, False)
        lost = math.ceil(peak_queue - cfg.buffer_capacity_bytes)
        duration = uart_time + cfg.buffer_capacity_bytes / air_rate
        return TransferResult(duration + cfg.per_transfer_overhead_s, lost, True)

    # Paced: walk the burst timeline with a fluid queue.
    t = 0.0
    queue = 0.0
    lost = 0.0
    sent = 0
    last_arrival_end = 0.0
    while sent < n_bytes:
        burst = min(pacing.burst_bytes, n_bytes - sent)
        arrival = burst / uart_rate
        net = (uart_rate - air_rate) * arrival
        if net > 0:
            overflow = max(0.0, queue + net - cfg.buffer_capacity_bytes)
            lost += overflow
            queue = min(queue + net, float(cfg.buffer_capacity_bytes))
        else:
            queue = max(0.0, queue + net)
        t += arrival
        last_arrival_end = t
        sent += burst
        if sent < n_bytes:
            queue = max(0.0, queue - air_rate * pacing.gap_s)
            t += pacing.gap_s
    duration = last_arrival_end + queue / air_rate
    lost_bytes = math.ceil(lost - 1e-9) if lost > 1e-9 else 0
    return TransferResult(
        duration + cfg.per_transfer_overhead_s, lost_bytes, lost_bytes > 0
    )


def round_trip_latency(cfg: LinkConfig | WiredReference) -> float:
    """Modelled 1-byte echo round trip in seconds.

    Each direction pays the UART byte time, the air byte time, and the
    calibrated per-direction module overhead for this configuration row.
    """
    if isinstance(cfg, WiredReference):
        return cfg.round_trip_latency()
    air_rate = air_payload_rate(cfg.mode, cfg.uart_baud)
    one_way = (
        FRAMING_BITS_PER_BYTE / cfg.uart_baud
        + FRAMING_BITS_PER_BYTE / (8.0 * air_rate)
        + cfg.per_direction_overhead_s
    )
    return 2.0 * one_way


def antenna_gain(pattern: AntennaPattern, off_boresight_deg: float) -> float:
    """Gain in dBi at an off-boresight angle.

    Stub and omni patterns are angle-independent. The yagi rolls off as
    deficit * sin(theta)^exponent out to 90 degrees; behind that the
    walks measured nothing, so the perpendicular deficit is held flat.
    """
    if not 0.0 <= off_boresight_deg <= 180.0:
        raise ValueError(f"off-boresight angle out of [0, 180]: {off_boresight_deg}")
    if pattern.kind != "yagi":
        return pattern.boresight_gain_dbi
    theta = math.radians(min(off_boresight_deg, 90.0))
    deficit = pattern.perpendicular_deficit_db * math.sin(theta) ** pattern.pattern_exponent
    return pattern.boresight_gain_dbi - deficit


def effective_max_range(
    cfg: LinkConfig, tx_angle_deg: float = 0.0, rx_angle_deg: float = 0.0
) -> float:
    """Deterministic delivery range for the configured antenna pair.

    Log-distance model: the calibrated stub<->stub base range scaled by
    10^(gain delta / (10 n)).
    """
    if cfg.base_range_m is None:
        raise ValueError(f"no range calibration for {cfg.mode.name} @ {cfg.uart_baud}")
    gain = antenna_gain(cfg.tx_antenna, tx_angle_deg) + antenna_gain(
        cfg.rx_antenna, rx_angle_deg
    )
    exponent = (gain - cfg.reference_gain_dbi) / (10.0 * cfg.path_loss_exponent)
    return cfg.base_range_m * 10.0**exponent


def _unit_draw(*parts: object) -> float:
    """Stable uniform draw in [0, 1) from a tuple of hashable parts."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return struct.unpack(">Q", digest[:8])[0] / 2.0**64


def derive_packet_seed(base_seed: int, *indices: int) -> int:
    """Per-packet seed for scenario streams; stable across runs."""
    digest = hashlib.sha256(repr((base_seed, *indices)).encode()).digest()
    return struct.unpack(">Q", digest[8:16])[0]


def packet_outcome(cfg: LinkConfig, channel: ChannelState, n_bytes: int) -> bool:
    """Whether one packet makes it across; True = delivered.

    Oversize packets in the packet-bounded modes are always lost. In
    deterministic mode delivery is a hard range threshold; in stochastic
    mode success probability is logistic in (range - distance) with the
    configured steepness, drawn reproducibly from the channel seed.
    """
    limit = cfg.mode.max_packet_bytes
    if limit is not None and n_bytes > limit:
        return False
    reach = effective_max_range(
        cfg, channel.tx_off_boresight_deg, channel.rx_off_boresight_deg
    )
    if not cfg.stochastic:
        return channel.distance_m <= reach + RANGE_EPSILON_M
    margin = (reach - channel.distance_m) / cfg.stochastic_sigma_m
    p_success = 1.0 / (1.0 + math.exp(-margin))
    draw = _unit_draw(
        channel.rng_seed,
        round(channel.distance_m, 9),
        round(channel.tx_off_boresight_deg, 9),
        round(channel.rx_off_boresight_deg, 9),
        n_bytes,
    )
    return draw < p_success
