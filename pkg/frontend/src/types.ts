// Shared types for the operator dashboard. The frame schema mirrors the
// station gateway: {"type": <topic>, "time": <ISO-8601 UTC>, "body": {...}}.

export interface Frame {
    type: string;
    time: string;
    body: Record<string, unknown>;
}

export interface LatLon {
    lat: number;
    lon: number;
}

export type FixStatus = 'successful' | 'lost';

export interface FixPoint {
    lat: number;
    lon: number;
    status: FixStatus;
}

export interface GimbalView {
    az: number;
    el: number;
    mode: string;
}

export interface StatsView {
    sent: number;
    delivered: number;
    lost: number;
    successRatio: number;
    avgLatencyMs: number;
}

export type ConnectionState = 'live' | 'reconnecting' | 'offline';

export interface ViewModel {
    sessionId: string | null;
    base: LatLon | null;
    gimbal: GimbalView;
    target: { lat: number; lon: number; ageS: number } | null;
    stats: StatsView;
    fixTrail: FixPoint[]; // delivered fixes, ring capped at 500
    lostMarkers: FixPoint[]; // failed transmissions reported via stats
    pendingCommands: Record<string, string>; // command id -> kind
    commandCounter: number;
    sweepCompletions: number;
    pressureHpa: number | null;
    connection: ConnectionState;
    lastFrameTime: string | null;
    lastFixTime: string | null;
}

export type CommandAction =
    | { kind: 'manual_point'; az: number; el: number }
    | { kind: 'start_sweep'; direction?: 'cw' | 'ccw' }
    | { kind: 'resume_tracking' }
    | { kind: 'set_radio_mode'; mode: string }
    | { kind: 'set_fix_interval'; seconds: number }
    | { kind: 'start_bench'; benchKind: string };

export interface IssueResult {
    vm: ViewModel;
    frame?: Frame;
    error?: string;
}
