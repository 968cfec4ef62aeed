// Message and frame shapes mirrored from the ground-control console API.
// A frame is self-contained: everything on screen derives from the
// latest one, and every outgoing command carries its version stamp.

export interface UavRef {
  name: string
  color: string
}

export interface GraphEdge {
  source: string
  event: string
  target: string
  uavs: string[]
  active: boolean
}

export interface FleetSnapshot {
  graph: { nodes: string[]; edges: GraphEdge[]; inactive_nodes: string[] }
  placement: { tokens: Record<string, string>; as_of: number }
  colors: Record<string, string>
}

export interface ViewAlerts {
  view: string
  max_threshold: number
  displayed: string[]
  suppressed: string[]
}

export interface AlertDetail {
  id: string
  alert_type: string
  source: string
  message: string
  raised_at: number
  expires_at: number | null
}

export interface Detection {
  object_class: string
  confidence: number
  reliability: number
  location: [number, number]
  frame: number
  uav: UavRef
}

export interface SessionView {
  id: string
  uav: UavRef
  detection: Detection
  waiting_period: number
  opened_at: number
  state: string
  closed_at: number | null
  outcome: string | null
  remaining_ms: number
}

export interface AutonomyStatus {
  uav: string
  mode: 'full' | 'curtailed'
  dimensions: Record<string, { reason: string; since: number }>
}

export interface TrustEntry {
  capability: string
  score: number
  updates: number
}

export interface Telemetry {
  position: [number, number]
  altitude: number
  battery: number
  health: string
  at: number
}

export interface ExplanationEntry {
  text: string
  rendered_at: number
  source: {
    uav: UavRef
    trigger: string
    initiator: string
    event_snippet: string
    rationale_snippet: string
    at: number
    [extra: string]: unknown
  }
}

export interface Frame {
  type: 'frame'
  version: number
  at: number
  mission: { name: string; lifecycle: string }
  fleet: FleetSnapshot
  alerts: Record<string, ViewAlerts>
  alert_details: Record<string, AlertDetail>
  sessions: SessionView[]
  affordances: Record<string, string[]>
  autonomy: Record<string, AutonomyStatus>
  trust: Record<string, TrustEntry>
  telemetry: Record<string, Telemetry>
  explanations: ExplanationEntry[]
  watermarks: Record<string, number>
}

export type ConsoleCommand =
  | { kind: 'resolve_session'; session: string; decision: 'confirm' | 'reject'; stamp: number }
  | { kind: 'directive'; uav: string; directive: { kind: string; params?: Record<string, unknown> }; stamp: number }
  | { kind: 'dismiss_alert'; view: string; alert: string; stamp: number }
  | { kind: 'update_rule'; view: string; alert_type: string; essential?: boolean; priority?: number | null; stamp: number }

export interface CommandResult {
  type: 'command_result'
  seq: number | null
  result: { accepted: boolean; reason?: string; [extra: string]: unknown }
}

export type ServerMessage = Frame | CommandResult

export interface MissionMeta {
  name: string
  lifecycle: string
  clock: string
  seed: number
  duration_ms: number
  ui_refresh_ms: number
  origin: [number, number]
  search_area: [number, number][]
  uavs: { id: string; color: string }[]
  views: Record<string, number>
  coordination: { waiting_period_ms: number; alternation_threshold: number; window_ms: number }
  service_classes: Record<string, number>
  teaming: string[]
}
