// Antenna bearing dial. The needle angle is exactly the last gimbal
// frame's azimuth; the CSS transition on the needle is presentation only.

import { GimbalView } from './types';

export function renderDial(root: HTMLElement, gimbal: GimbalView): void {
    let needle = root.querySelector<SVGLineElement>('#dial-needle');
    if (needle === null) {
        root.innerHTML = `
            <svg viewBox="-110 -110 220 220" class="dial">
              <circle r="100" class="dial-face"/>
              ${[0, 90, 180, 270]
                  .map(
                      (deg) => `
                <g transform="rotate(${deg})">
                  <line y1="-100" y2="-88" class="dial-tick"/>
                  <text y="-72" text-anchor="middle" transform="rotate(${-deg})">
                    ${['N', 'E', 'S', 'W'][deg / 90]}
                  </text>
                </g>`,
                  )
                  .join('')}
              <line id="dial-needle" y1="10" y2="-86" class="dial-needle"/>
              <circle r="4" class="dial-hub"/>
            </svg>
            <div class="dial-readout">
              <span id="dial-az"></span>
              <span id="dial-mode"></span>
            </div>`;
        needle = root.querySelector('#dial-needle')!;
    }
    needle.setAttribute('transform', `rotate(${gimbal.az})`);
    needle.dataset.az = String(gimbal.az);
    root.querySelector('#dial-az')!.textContent = `${gimbal.az.toFixed(1)}°`;
    root.querySelector('#dial-mode')!.textContent = gimbal.mode;
}
