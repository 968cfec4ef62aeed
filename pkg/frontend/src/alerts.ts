import type { ConsoleCommand, Frame } from './types.js'

export interface AlertRow {
  id: string
  alert_type: string
  source: string
  message: string
  raised_at: number
}

export interface AlertsView {
  view: string
  cap: number
  rows: AlertRow[]
  overflow: number
  suppressedCount: number
}

// Capped alert list in exactly the order the backend triaged it; no
// client-side re-sorting. Essentials arrive first and may spill past
// the cap, which shows up as `overflow`; everything triaged away is
// just a counter.
export function renderAlerts(frame: Frame, view: string): AlertsView {
  const state = frame.alerts[view]
  if (!state) throw new Error(`unknown view ${view}`)
  const rows = state.displayed.map(id => {
    const d = frame.alert_details[id]
    return d
      ? { id, alert_type: d.alert_type, source: d.source, message: d.message, raised_at: d.raised_at }
      : { id, alert_type: 'unknown', source: '', message: '(details pending)', raised_at: 0 }
  })
  return {
    view,
    cap: state.max_threshold,
    rows,
    overflow: Math.max(0, rows.length - state.max_threshold),
    suppressedCount: state.suppressed.length,
  }
}

export function dismissCommand(frame: Frame, view: string, alert: string): ConsoleCommand {
  // the stamp names the frame that showed the alert being dismissed
  return { kind: 'dismiss_alert', view, alert, stamp: frame.version }
}
