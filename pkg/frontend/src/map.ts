import type { Frame } from './types.js'

// Plain 2-D projection over the search-area polygon: everything lands
// in the unit square, y growing downward so canvas drawing is direct.

export interface MapPoint {
  x: number
  y: number
}

export interface MapMarker extends MapPoint {
  uav: string
  color: string
  altitude: number
  battery: number
  health: string
}

export interface MapSighting extends MapPoint {
  session: string
  objectClass: string
}

export interface MapView {
  outline: MapPoint[]
  uavs: MapMarker[]
  sightings: MapSighting[]
}

interface Box {
  minLat: number
  maxLat: number
  minLon: number
  maxLon: number
}

const MARGIN = 0.08 // keep markers off the canvas edge

function boxOf(area: [number, number][]): Box {
  const lats = area.map(p => p[0])
  const lons = area.map(p => p[1])
  return {
    minLat: Math.min(...lats),
    maxLat: Math.max(...lats),
    minLon: Math.min(...lons),
    maxLon: Math.max(...lons),
  }
}

function project(box: Box, lat: number, lon: number): MapPoint {
  const spanLat = box.maxLat - box.minLat
  const spanLon = box.maxLon - box.minLon
  const fx = spanLon > 0 ? (lon - box.minLon) / spanLon : 0.5
  const fy = spanLat > 0 ? (lat - box.minLat) / spanLat : 0.5
  const scale = 1 - 2 * MARGIN
  return { x: MARGIN + fx * scale, y: MARGIN + (1 - fy) * scale }
}

export function renderMap(frame: Frame, area: [number, number][]): MapView {
  const box = boxOf(area)
  const outline = area.map(([lat, lon]) => project(box, lat, lon))
  const uavs = Object.entries(frame.telemetry).map(([uav, t]) => ({
    uav,
    color: frame.fleet.colors[uav] ?? 'gray',
    altitude: t.altitude,
    battery: t.battery,
    health: t.health,
    ...project(box, t.position[0], t.position[1]),
  }))
  const sightings = frame.sessions.map(s => ({
    session: s.id,
    objectClass: s.detection.object_class,
    ...project(box, s.detection.location[0], s.detection.location[1]),
  }))
  return { outline, uavs, sightings }
}
