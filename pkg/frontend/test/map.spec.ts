import { describe, expect, it } from 'vitest'
import { renderMap } from '../src/map.js'
import { emptyFrame, loadFrame } from './helpers.js'
import type { Telemetry } from '../src/types.js'

const SQUARE: [number, number][] = [
  [41.0, -86.0],
  [41.002, -86.0],
  [41.002, -85.998],
  [41.0, -85.998],
]

function telemetryAt(lat: number, lon: number): Telemetry {
  return { position: [lat, lon], altitude: 30, battery: 90, health: 'nominal', at: 1000 }
}

describe('search area map', () => {
  it('projects the area corners onto the unit square with a margin', () => {
    const view = renderMap(emptyFrame(), SQUARE)
    expect(view.outline).toHaveLength(4)
    const xs = view.outline.map(p => p.x)
    const ys = view.outline.map(p => p.y)
    expect(Math.min(...xs)).toBeCloseTo(0.08)
    expect(Math.max(...xs)).toBeCloseTo(0.92)
    expect(Math.min(...ys)).toBeCloseTo(0.08)
    expect(Math.max(...ys)).toBeCloseTo(0.92)
  })

  it('draws north upward: higher latitude lands higher on the canvas', () => {
    const frame = emptyFrame({
      telemetry: {
        'uav-1': telemetryAt(41.002, -85.999),
        'uav-2': telemetryAt(41.0, -85.999),
      },
    })
    const view = renderMap(frame, SQUARE)
    const north = view.uavs.find(u => u.uav === 'uav-1')
    const south = view.uavs.find(u => u.uav === 'uav-2')
    if (!north || !south) throw new Error('markers missing')
    expect(north.y).toBeLessThan(south.y)
    expect(north.x).toBeCloseTo(south.x)
  })

  it('centers everything when the area degenerates to a point', () => {
    const dot: [number, number][] = [[41.0, -86.0]]
    const frame = emptyFrame({ telemetry: { 'uav-1': telemetryAt(41.0, -86.0) } })
    const view = renderMap(frame, dot)
    expect(view.uavs[0].x).toBeCloseTo(0.5)
    expect(view.uavs[0].y).toBeCloseTo(0.5)
  })

  it('carries telemetry and palette onto each marker', () => {
    const frame = loadFrame('midmission')
    const positions = Object.values(frame.telemetry).map(t => t.position)
    const lats = positions.map(p => p[0])
    const lons = positions.map(p => p[1])
    const covering: [number, number][] = [
      [Math.min(...lats), Math.min(...lons)],
      [Math.max(...lats), Math.max(...lons)],
    ]
    const view = renderMap(frame, covering)
    expect(view.uavs.length).toBe(Object.keys(frame.telemetry).length)
    for (const marker of view.uavs) {
      expect(marker.color).toBe(frame.fleet.colors[marker.uav])
      expect(marker.battery).toBeGreaterThan(0)
      expect(marker.x).toBeGreaterThanOrEqual(0.08)
      expect(marker.x).toBeLessThanOrEqual(0.92)
      expect(marker.y).toBeGreaterThanOrEqual(0.08)
      expect(marker.y).toBeLessThanOrEqual(0.92)
    }
  })

  it('marks each open sighting where it was reported', () => {
    const frame = loadFrame('midmission')
    const view = renderMap(frame, SQUARE)
    expect(view.sightings).toHaveLength(1)
    expect(view.sightings[0]).toMatchObject({ session: 'cs-0001', objectClass: 'person' })
  })
})
