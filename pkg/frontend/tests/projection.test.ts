import { describe, expect, it } from 'vitest';

import { localXY } from '../src/projection';
import fixture from './fixtures/session.json';

describe('localXY', () => {
    it('places a 100 m due-east fix at (+100, 0) within a metre', () => {
        const { base, eastPoint, expectedXY } = fixture.projection;
        const [x, y] = localXY(base, eastPoint);
        expect(Math.abs(x - expectedXY[0])).toBeLessThan(1.0);
        expect(Math.abs(y - expectedXY[1])).toBeLessThan(1.0);
    });

    it('is zero at the base itself', () => {
        const base = { lat: 52.95, lon: -1.15 };
        expect(localXY(base, base)).toEqual([0, 0]);
    });

    it('points north along +y', () => {
        const base = { lat: 52.95, lon: -1.15 };
        const [x, y] = localXY(base, { lat: 52.9509, lon: -1.15 });
        expect(x).toBe(0);
        expect(y).toBeGreaterThan(99);
        expect(y).toBeLessThan(101);
    });
});
