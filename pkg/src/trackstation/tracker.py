"""Autonomous antenna-orientation controller.

A rate-limited gimbal is steered at the bearing of the last good GPS fix;
when telemetry goes stale the controller falls back to a full-circle
acquisition sweep. Everything is a pure state transition driven by an
external clock, so trajectories are reproducible tick for tick.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .geo import GeoPoint, haversine_distance, initial_bearing

ELEVATION_MIN_DEG = -10.0
ELEVATION_MAX_DEG = 90.0

MODE_TRACKING = "tracking"
MODE_SWEEPING = "sweeping"
MODE_MANUAL = "manual"
MODE_IDLE = "idle"
MODES = (MODE_TRACKING, MODE_SWEEPING, MODE_MANUAL, MODE_IDLE)


@dataclass(frozen=True)
class GimbalState:
    """Snapshot of the mount. Immutable; transitions return new values."""

    azimuth_deg: float = 0.0
    elevation_deg: float = 0.0
    max_az_rate_deg_s: float = 60.0
    max_el_rate_deg_s: float = 30.0
    mode: str = MODE_IDLE
    sweep_progress_deg: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_az_rate_deg_s <= 0 or self.max_el_rate_deg_s <= 0:
            raise ValueError("rate limits must be > 0")
        if not ELEVATION_MIN_DEG <= self.elevation_deg <= ELEVATION_MAX_DEG:
            raise ValueError(f"elevation out of limits: {self.elevation_deg}")
        object.__setattr__(self, "azimuth_deg", self.azimuth_deg % 360.0)


@dataclass(frozen=True)
class TargetEstimate:
    """Where the portable last reported itself, seen from the base."""

    last_fix: GeoPoint
    received_at: float
    bearing_deg: float
    distance_m: float


@dataclass(frozen=True)
class ServoCommand:
    target_azimuth_deg: float
    target_elevation_deg: float
    issue_time: float

    def __post_init__(self) -> None:
        if not ELEVATION_MIN_DEG <= self.target_elevation_deg <= ELEVATION_MAX_DEG:
            raise ValueError(f"elevation target out of limits: {self.target_elevation_deg}")
        object.__setattr__(self, "target_azimuth_deg", self.target_azimuth_deg % 360.0)


def update_estimate(base: GeoPoint, fix: GeoPoint, now: float) -> TargetEstimate:
    """Fold a fresh fix into a bearing/distance estimate."""
    return TargetEstimate(
        last_fix=fix,
        received_at=now,
        bearing_deg=initial_bearing(base, fix),
        distance_m=haversine_distance(base, fix),
    )


def shortest_delta(current_deg: float, target_deg: float) -> float:
    """Minimal signed rotation from current to target, in (-180, 180]."""
    delta = (target_deg - current_deg + 180.0) % 360.0 - 180.0
    return 180.0 if delta == -180.0 else delta


def slew_step(state: GimbalState, command: ServoCommand, dt: float) -> GimbalState:
    """Advance toward the commanded angles, rate-limited, no overshoot."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    az_delta = shortest_delta(state.azimuth_deg, command.target_azimuth_deg)
    az_step = max(-state.max_az_rate_deg_s * dt, min(state.max_az_rate_deg_s * dt, az_delta))
    azimuth = (
        command.target_azimuth_deg
        if abs(az_delta) <= state.max_az_rate_deg_s * dt
        else (state.azimuth_deg + az_step) % 360.0
    )
    el_delta = command.target_elevation_deg - state.elevation_deg
    el_step = max(-state.max_el_rate_deg_s * dt, min(state.max_el_rate_deg_s * dt, el_delta))
    elevation = (
        command.target_elevation_deg
        if abs(el_delta) <= state.max_el_rate_deg_s * dt
        else state.elevation_deg + el_step
    )
    return replace(state, azimuth_deg=azimuth, elevation_deg=elevation)


def sweep_step(
    state: GimbalState, dt: float, direction: str = "cw"
) -> tuple[GimbalState, bool]:
    """Advance the acquisition sweep; True when a revolution completes."""
    if state.mode != MODE_SWEEPING:
        raise ValueError("sweep_step requires sweeping mode")
    if direction not in ("cw", "ccw"):
        raise ValueError(f"direction must be cw or ccw, got {direction!r}")
    if dt < 0:
        raise ValueError("dt must be >= 0")
    step = state.max_az_rate_deg_s * dt
    sign = 1.0 if direction == "cw" else -1.0
    progress = state.sweep_progress_deg + step
    completed = progress >= 360.0 - 1e-9
    if completed:
        progress -= 360.0
    return (
        replace(
            state,
            azimuth_deg=(state.azimuth_deg + sign * step) % 360.0,
            sweep_progress_deg=progress,
        ),
        completed,
    )


def tracking_tick(
    state: GimbalState,
    estimate: TargetEstimate | None,
    now: float,
    staleness_limit_s: float,
) -> tuple[GimbalState, ServoCommand | None]:
    """One decision step of the mode state machine.

    Manual and idle modes ignore estimates. A fresh estimate puts (or
    keeps) the controller in tracking and commands the target bearing; a
    stale or absent one falls back to sweeping. Motion itself happens in
    slew_step/sweep_step, driven by the owner of the clock.
    """
    if state.mode in (MODE_MANUAL, MODE_IDLE):
        return state, None
    fresh = estimate is not None and (now - estimate.received_at) <= staleness_limit_s
    if not fresh:
        if state.mode != MODE_SWEEPING:
            state = replace(state, mode=MODE_SWEEPING, sweep_progress_deg=0.0)
        return state, None
    if state.mode != MODE_TRACKING:
        state = replace(state, mode=MODE_TRACKING, sweep_progress_deg=0.0)
    command = ServoCommand(
        target_azimuth_deg=estimate.bearing_deg,
        target_elevation_deg=0.0,
        issue_time=now,
    )
    return state, command


def pointing_error(state: GimbalState, true_bearing_deg: float) -> float:
    """Absolute angular error between boresight and the true bearing."""
    return abs(shortest_delta(state.azimuth_deg, true_bearing_deg))


@dataclass
class TrackingController:
    """Owns the tick loop plumbing: sweep direction, drift, last command.

    The optional azimuth-reference drift (degrees per completed sweep
    revolution) reproduces the slow misalignment observed with repeated
    full-circle sweeps; it defaults to off.
    """

    state: GimbalState
    staleness_limit_s: float
    sweep_direction: str = "cw"
    drift_deg_per_rev: float = 0.0
    manual_command: ServoCommand | None = None
    _last_command: ServoCommand | None = None

    def point_manually(self, az_deg: float, el_deg: float, now: float) -> None:
        self.manual_command = ServoCommand(az_deg, el_deg, now)
        self.state = replace(self.state, mode=MODE_MANUAL)

    def start_sweep(self, direction: str = "cw") -> None:
        self.sweep_direction = direction
        self.state = replace(self.state, mode=MODE_SWEEPING, sweep_progress_deg=0.0)

    def resume_tracking(self) -> None:
        self.manual_command = None
        self.state = replace(self.state, mode=MODE_TRACKING)

    def tick(
        self, estimate: TargetEstimate | None, now: float, dt: float
    ) -> tuple[GimbalState, bool]:
        """Advance one control period; returns (state, sweep_completed)."""
        state, command = tracking_tick(self.state, estimate, now, self.staleness_limit_s)
        completed = False
        if state.mode == MODE_MANUAL and self.manual_command is not None:
            state = slew_step(state, self.manual_command, dt)
        elif state.mode == MODE_TRACKING and (command or self._last_command):
            self._last_command = command or self._last_command
            state = slew_step(state, self._last_command, dt)
        elif state.mode == MODE_SWEEPING:
            state, completed = sweep_step(state, dt, self.sweep_direction)
            if completed:
                # Alternate direction each revolution (cable-wrap relief)
                # and apply the optional reference drift.
                self.sweep_direction = "ccw" if self.sweep_direction == "cw" else "cw"
                if self.drift_deg_per_rev:
                    state = replace(
                        state,
                        azimuth_deg=(state.azimuth_deg + self.drift_deg_per_rev) % 360.0,
                    )
        self.state = state
        return state, completed
