import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'
import type { Frame, SessionView } from '../src/types.js'

// Fixtures are recorded from seeded reference runs, so they are stable
// across regenerations and safe to snapshot against.

const here = dirname(fileURLToPath(import.meta.url))

function load(name: string): unknown {
  return JSON.parse(readFileSync(join(here, 'fixtures', `${name}.json`), 'utf8'))
}

export function loadFrame(name: string): Frame {
  return load(name) as Frame
}

export function loadFramePair(name: string): { before: Frame; after: Frame } {
  return load(name) as { before: Frame; after: Frame }
}

export function emptyFrame(overrides: Partial<Frame> = {}): Frame {
  return {
    type: 'frame',
    version: 1,
    at: 0,
    mission: { name: 'bench', lifecycle: 'running' },
    fleet: {
      graph: { nodes: [], edges: [], inactive_nodes: [] },
      placement: { tokens: {}, as_of: 0 },
      colors: {},
    },
    alerts: {},
    alert_details: {},
    sessions: [],
    affordances: {},
    autonomy: {},
    trust: {},
    telemetry: {},
    explanations: [],
    watermarks: {},
    ...overrides,
  }
}

export function makeSession(overrides: Partial<SessionView> = {}): SessionView {
  return {
    id: 'cs-0001',
    uav: { name: 'uav-1', color: 'blue' },
    detection: {
      object_class: 'person',
      confidence: 0.92,
      reliability: 0.61,
      location: [41.0009, -85.9988],
      frame: 204,
      uav: { name: 'uav-1', color: 'blue' },
    },
    waiting_period: 10000,
    opened_at: 20000,
    state: 'help_requested',
    closed_at: null,
    outcome: null,
    remaining_ms: 9800,
    ...overrides,
  }
}
