// Dashboard wiring: one websocket in, one reducer, DOM out.

import { renderDial } from './dial';
import { renderMap } from './map';
import { CommandAction, ViewModel } from './types';
import {
    applyFrame,
    initialViewModel,
    isKindPending,
    issueCommand,
    setConnection,
} from './viewmodel';
import { ReconnectingSocket } from './ws';

let vm: ViewModel = initialViewModel();

const $ = <T extends HTMLElement>(id: string): T => {
    const el = document.getElementById(id);
    if (el === null) throw new Error(`missing element #${id}`);
    return el as T;
};

const socket = new ReconnectingSocket(`ws://${location.host}/ws`, {
    onFrame(doc) {
        vm = applyFrame(vm, doc);
        render();
    },
    onState(state) {
        vm = setConnection(vm, state);
        render();
    },
});

function submit(action: CommandAction): void {
    const result = issueCommand(vm, action);
    const messageBox = $('command-message');
    if (result.error !== undefined) {
        messageBox.textContent = result.error;
        messageBox.className = 'message error';
        return;
    }
    if (!socket.send(JSON.stringify(result.frame))) {
        messageBox.textContent = 'not connected';
        messageBox.className = 'message error';
        return;
    }
    vm = result.vm;
    messageBox.textContent = `sent ${action.kind}`;
    messageBox.className = 'message';
    render();
}

function render(): void {
    renderDial($('dial'), vm.gimbal);
    renderMap($<HTMLCanvasElement>('map'), vm);

    $('connection').textContent = vm.connection;
    $('connection').className = `pill ${vm.connection}`;
    $('session').textContent = vm.sessionId ?? '-';
    const s = vm.stats;
    $('stat-sent').textContent = String(s.sent);
    $('stat-delivered').textContent = String(s.delivered);
    $('stat-lost').textContent = String(s.lost);
    $('stat-ratio').textContent = `${(s.successRatio * 100).toFixed(1)}%`;
    $('stat-latency').textContent = `${s.avgLatencyMs.toFixed(1)} ms`;
    $('stat-pressure').textContent =
        vm.pressureHpa === null ? '-' : `${vm.pressureHpa.toFixed(2)} hPa`;
    $('target').textContent = vm.target
        ? `${vm.target.lat.toFixed(5)}, ${vm.target.lon.toFixed(5)} (age ${vm.target.ageS.toFixed(0)}s)`
        : 'no fix yet';

    // controls show pending state until the matching ack arrives
    $<HTMLButtonElement>('btn-point').disabled = isKindPending(vm, 'manual_point');
    $<HTMLButtonElement>('btn-sweep').disabled = isKindPending(vm, 'start_sweep');
    $<HTMLButtonElement>('btn-track').disabled = isKindPending(vm, 'resume_tracking');
    $<HTMLButtonElement>('btn-mode').disabled = isKindPending(vm, 'set_radio_mode');
    $<HTMLButtonElement>('btn-interval').disabled = isKindPending(vm, 'set_fix_interval');
    $('pending-count').textContent = String(Object.keys(vm.pendingCommands).length);
}

function wireControls(): void {
    $('btn-point').addEventListener('click', () => {
        submit({
            kind: 'manual_point',
            az: Number($<HTMLInputElement>('input-az').value),
            el: Number($<HTMLInputElement>('input-el').value),
        });
    });
    $('btn-sweep').addEventListener('click', () => submit({ kind: 'start_sweep' }));
    $('btn-track').addEventListener('click', () => submit({ kind: 'resume_tracking' }));
    $('btn-mode').addEventListener('click', () => {
        submit({
            kind: 'set_radio_mode',
            mode: $<HTMLSelectElement>('input-mode').value,
        });
    });
    $('btn-interval').addEventListener('click', () => {
        submit({
            kind: 'set_fix_interval',
            seconds: Number($<HTMLInputElement>('input-interval').value),
        });
    });
}

wireControls();
render();
socket.connect();
