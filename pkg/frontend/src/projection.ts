// Offline-safe local map projection: metres east/north of the base
// station via an equirectangular projection about the base latitude.
// At the link's working radius (<1 km) the distortion is negligible.

import { LatLon } from './types';

const EARTH_RADIUS_M = 6371000;

const toRad = (deg: number): number => (deg * Math.PI) / 180;

export function localXY(base: LatLon, point: LatLon): [number, number] {
    const x = toRad(point.lon - base.lon) * Math.cos(toRad(base.lat)) * EARTH_RADIUS_M;
    const y = toRad(point.lat - base.lat) * EARTH_RADIUS_M;
    return [x, y];
}
