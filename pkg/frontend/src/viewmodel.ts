// Pure view-model reducer: rendered state is produced exclusively by
// folding gateway frames, so a recorded frame sequence always rebuilds
// the identical ViewModel (snapshot-testable without a live station).

import {
    CommandAction,
    ConnectionState,
    Frame,
    IssueResult,
    ViewModel,
} from './types';

const TRAIL_CAP = 500;

export function initialViewModel(): ViewModel {
    return {
        sessionId: null,
        base: null,
        gimbal: { az: 0, el: 0, mode: 'idle' },
        target: null,
        stats: { sent: 0, delivered: 0, lost: 0, successRatio: 0, avgLatencyMs: 0 },
        fixTrail: [],
        lostMarkers: [],
        pendingCommands: {},
        commandCounter: 0,
        sweepCompletions: 0,
        pressureHpa: null,
        connection: 'offline',
        lastFrameTime: null,
        lastFixTime: null,
    };
}

function isFrame(value: unknown): value is Frame {
    if (typeof value !== 'object' || value === null) return false;
    const frame = value as Frame;
    return (
        typeof frame.type === 'string' &&
        typeof frame.time === 'string' &&
        typeof frame.body === 'object' &&
        frame.body !== null
    );
}

function num(value: unknown, fallback = 0): number {
    return typeof value === 'number' && Number.isFinite(value) ? value : fallback;
}

function fixAgeS(vm: ViewModel, frame: Frame): number {
    if (vm.lastFixTime === null) return 0;
    const age = (Date.parse(frame.time) - Date.parse(vm.lastFixTime)) / 1000;
    return Number.isFinite(age) ? Math.max(0, age) : 0;
}

export function applyFrame(vm: ViewModel, raw: unknown): ViewModel {
    if (!isFrame(raw)) {
        // schema-invalid frames are dropped; connection state untouched
        return vm;
    }
    const frame = raw;
    const body = frame.body;
    switch (frame.type) {
        case 'session':
            return {
                ...vm,
                sessionId: typeof body.session_id === 'string' ? body.session_id : null,
                base:
                    typeof body.base === 'object' && body.base !== null
                        ? {
                              lat: num((body.base as Record<string, unknown>).lat),
                              lon: num((body.base as Record<string, unknown>).lon),
                          }
                        : vm.base,
                lastFrameTime: frame.time,
            };
        case 'gimbal':
            return {
                ...vm,
                gimbal: {
                    az: num(body.az),
                    el: num(body.el),
                    mode: typeof body.mode === 'string' ? body.mode : vm.gimbal.mode,
                },
                target: vm.target
                    ? { ...vm.target, ageS: fixAgeS(vm, frame) }
                    : null,
                lastFrameTime: frame.time,
            };
        case 'telemetry':
            return {
                ...vm,
                fixTrail: [
                    ...vm.fixTrail,
                    { lat: num(body.lat), lon: num(body.lon), status: 'successful' as const },
                ].slice(-TRAIL_CAP),
                target: { lat: num(body.lat), lon: num(body.lon), ageS: 0 },
                lastFrameTime: frame.time,
                lastFixTime: frame.time,
            };
        case 'stats': {
            const last = body.last as
                | { lat?: unknown; lon?: unknown; delivered?: unknown }
                | null
                | undefined;
            const lostMarkers =
                last && last.delivered === false
                    ? [
                          ...vm.lostMarkers,
                          { lat: num(last.lat), lon: num(last.lon), status: 'lost' as const },
                      ].slice(-TRAIL_CAP)
                    : vm.lostMarkers;
            return {
                ...vm,
                stats: {
                    sent: num(body.sent),
                    delivered: num(body.delivered),
                    lost: num(body.lost),
                    successRatio: num(body.success_ratio),
                    avgLatencyMs: num(body.avg_latency_ms),
                },
                lostMarkers,
                lastFrameTime: frame.time,
            };
        }
        case 'ack': {
            const id = body.id;
            if (typeof id !== 'string' || !(id in vm.pendingCommands)) return vm;
            const pendingCommands = { ...vm.pendingCommands };
            delete pendingCommands[id];
            return { ...vm, pendingCommands, lastFrameTime: frame.time };
        }
        case 'sweep_complete':
            return {
                ...vm,
                sweepCompletions: vm.sweepCompletions + 1,
                lastFrameTime: frame.time,
            };
        case 'sensor':
            if (body.source === 'barometric') {
                return { ...vm, pressureHpa: num(body.pressure_hpa), lastFrameTime: frame.time };
            }
            if (body.source === 'gps') {
                return {
                    ...vm,
                    base: { lat: num(body.lat), lon: num(body.lon) },
                    lastFrameTime: frame.time,
                };
            }
            return vm;
        case 'rejection':
        case 'command':
            return { ...vm, lastFrameTime: frame.time };
        default:
            console.info(`ignoring unknown frame type: ${frame.type}`);
            return vm;
    }
}

export function setConnection(vm: ViewModel, state: ConnectionState): ViewModel {
    return vm.connection === state ? vm : { ...vm, connection: state };
}

// Range checks mirror the gateway's own validation, so anything we let
// through will not bounce server-side.
function validate(action: CommandAction): string | null {
    switch (action.kind) {
        case 'manual_point':
            if (!Number.isFinite(action.az) || action.az < 0 || action.az >= 360) {
                return 'azimuth must be in [0, 360)';
            }
            if (!Number.isFinite(action.el) || action.el < -10 || action.el > 90) {
                return 'elevation must be in [-10, 90]';
            }
            return null;
        case 'set_fix_interval':
            return Number.isFinite(action.seconds) && action.seconds > 0
                ? null
                : 'interval must be > 0 seconds';
        case 'set_radio_mode':
            return ['FU1', 'FU2', 'FU3', 'FU4'].includes(action.mode)
                ? null
                : 'mode must be FU1..FU4';
        case 'start_sweep':
            return action.direction === undefined || ['cw', 'ccw'].includes(action.direction)
                ? null
                : 'direction must be cw or ccw';
        case 'start_bench':
            return ['throughput', 'latency', 'range'].includes(action.benchKind)
                ? null
                : 'bench kind must be throughput|latency|range';
        case 'resume_tracking':
            return null;
    }
}

function actionParams(action: CommandAction): Record<string, unknown> {
    switch (action.kind) {
        case 'manual_point':
            return { az: action.az, el: action.el };
        case 'set_fix_interval':
            return { seconds: action.seconds };
        case 'set_radio_mode':
            return { mode: action.mode };
        case 'start_sweep':
            return action.direction ? { direction: action.direction } : {};
        case 'start_bench':
            return { kind: action.benchKind };
        case 'resume_tracking':
            return {};
    }
}

export function issueCommand(
    vm: ViewModel,
    action: CommandAction,
    nowIso: string = new Date().toISOString(),
): IssueResult {
    const error = validate(action);
    if (error !== null) {
        return { vm, error };
    }
    const id = `ui-${vm.commandCounter + 1}`;
    const frame: Frame = {
        type: 'command',
        time: nowIso,
        body: { id, kind: action.kind, params: actionParams(action) },
    };
    return {
        vm: {
            ...vm,
            commandCounter: vm.commandCounter + 1,
            pendingCommands: { ...vm.pendingCommands, [id]: action.kind },
        },
        frame,
    };
}

export function isKindPending(vm: ViewModel, kind: string): boolean {
    return Object.values(vm.pendingCommands).includes(kind);
}
