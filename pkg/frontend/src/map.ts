// Target map: a canvas scatter in station-relative metres (no tile
// service; the whole dashboard must work with no internet at all).
// Green dots are delivered fixes, red dots lost ones, with the antenna
// bearing drawn as a ray from the base marker.

import { localXY } from './projection';
import { ViewModel } from './types';

const PADDING_M = 20;

export function renderMap(canvas: HTMLCanvasElement, vm: ViewModel): void {
    const ctx = canvas.getContext('2d');
    if (ctx === null) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = '#10141a';
    ctx.fillRect(0, 0, width, height);
    if (vm.base === null) {
        ctx.fillStyle = '#8899aa';
        ctx.fillText('waiting for session frame', 12, 20);
        return;
    }

    const points = [...vm.fixTrail, ...vm.lostMarkers].map((fix) => ({
        xy: localXY(vm.base!, fix),
        status: fix.status,
    }));
    const extent = Math.max(
        50,
        ...points.map(({ xy }) => Math.max(Math.abs(xy[0]), Math.abs(xy[1]))),
    );
    const scale = Math.min(width, height) / 2 / (extent + PADDING_M);
    const toPx = ([x, y]: [number, number]): [number, number] => [
        width / 2 + x * scale,
        height / 2 - y * scale,
    ];

    // range rings every 50 m
    ctx.strokeStyle = '#26303d';
    for (let r = 50; r <= extent + PADDING_M; r += 50) {
        ctx.beginPath();
        ctx.arc(width / 2, height / 2, r * scale, 0, 2 * Math.PI);
        ctx.stroke();
    }

    // antenna bearing ray
    const az = (vm.gimbal.az * Math.PI) / 180;
    const rayLen = (extent + PADDING_M) * scale;
    ctx.strokeStyle = '#e8c35a';
    ctx.beginPath();
    ctx.moveTo(width / 2, height / 2);
    ctx.lineTo(width / 2 + Math.sin(az) * rayLen, height / 2 - Math.cos(az) * rayLen);
    ctx.stroke();

    for (const { xy, status } of points) {
        const [px, py] = toPx(xy);
        ctx.fillStyle = status === 'successful' ? '#52c46b' : '#d4574e';
        ctx.beginPath();
        ctx.arc(px, py, 3, 0, 2 * Math.PI);
        ctx.fill();
    }

    // base marker
    ctx.fillStyle = '#5aa9e8';
    ctx.beginPath();
    ctx.arc(width / 2, height / 2, 5, 0, 2 * Math.PI);
    ctx.fill();
}
