import type { ConsoleCommand, Frame } from './types.js'

// Full catalog of manual directive kinds, in display order. Disabled
// controls stay visible but inert; the enabled set mirrors the frame's
// affordances exactly.
export const DIRECTIVE_CATALOG = [
  'confirm_detection',
  'reject_detection',
  'return_to_launch',
  'altitude_change',
  'goal_update',
  'manual_override',
  'restore_autonomy',
  'video_request',
] as const

export type DirectiveKind = (typeof DIRECTIVE_CATALOG)[number]

export interface ControlView {
  kind: DirectiveKind
  enabled: boolean
}

export interface DirectivePanelView {
  uav: string
  color: string
  mode: 'full' | 'curtailed'
  curtailed: { dimension: string; reason: string; since: number }[]
  controls: ControlView[]
  showRestore: boolean
}

export function renderDirectivePanel(frame: Frame, uav: string): DirectivePanelView {
  const allowed = new Set(frame.affordances[uav] ?? [])
  const status = frame.autonomy[uav] ?? { uav, mode: 'full' as const, dimensions: {} }
  const curtailed = Object.entries(status.dimensions).map(([dimension, d]) => ({
    dimension,
    reason: d.reason,
    since: d.since,
  }))
  return {
    uav,
    color: frame.fleet.colors[uav] ?? 'gray',
    mode: status.mode,
    curtailed,
    controls: DIRECTIVE_CATALOG.map(kind => ({ kind, enabled: allowed.has(kind) })),
    showRestore: status.mode === 'curtailed',
  }
}

export function directiveCommand(
  frame: Frame,
  uav: string,
  kind: DirectiveKind,
  params: Record<string, unknown> = {},
): ConsoleCommand {
  return { kind: 'directive', uav, directive: { kind, params }, stamp: frame.version }
}

export function restoreCommand(frame: Frame, uav: string, dimension: string): ConsoleCommand {
  return directiveCommand(frame, uav, 'restore_autonomy', { dimension })
}
