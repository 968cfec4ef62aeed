import { describe, expect, it } from 'vitest'
import { dismissCommand, renderAlerts } from '../src/alerts.js'
import { emptyFrame, loadFrame } from './helpers.js'

describe('alert panels', () => {
  it('keeps the backend ordering verbatim, essentials spilling past the cap', () => {
    const frame = loadFrame('alerts_live')
    const view = renderAlerts(frame, 'alerts')

    expect(view.rows.map(r => r.id)).toEqual(frame.alerts.alerts.displayed)
    expect(view.cap).toBe(4)
    expect(view.rows.length).toBe(6)
    expect(view.overflow).toBe(2)
    expect(view.suppressedCount).toBe(0)
  })

  it('shows three displayed alerts and counts the two suppressed ones', () => {
    const detail = (id: string) => ({
      id,
      alert_type: 'detection',
      source: 'uav-1',
      message: `alert ${id}`,
      raised_at: 100,
      expires_at: null,
    })
    const frame = emptyFrame({
      alerts: {
        alerts: {
          view: 'alerts',
          max_threshold: 4,
          displayed: ['a', 'b', 'c'],
          suppressed: ['d', 'e'],
        },
      },
      alert_details: Object.fromEntries(['a', 'b', 'c'].map(id => [id, detail(id)])),
    })
    const view = renderAlerts(frame, 'alerts')
    expect(view.rows.map(r => r.id)).toEqual(['a', 'b', 'c'])
    expect(view.suppressedCount).toBe(2)
    expect(view.overflow).toBe(0)
  })

  it('counts what triage suppressed without showing it', () => {
    const frame = loadFrame('alerts_live')
    const view = renderAlerts(frame, 'map')
    expect(view.rows.length).toBe(3)
    expect(view.overflow).toBe(0)
    expect(view.suppressedCount).toBe(3)
    const shown = new Set(view.rows.map(r => r.id))
    for (const hidden of frame.alerts.map.suppressed) {
      expect(shown.has(hidden)).toBe(false)
    }
  })

  it('fills in alert details from the frame', () => {
    const frame = loadFrame('midmission')
    const view = renderAlerts(frame, 'alerts')
    for (const row of view.rows) {
      const detail = frame.alert_details[row.id]
      expect(row.alert_type).toBe(detail.alert_type)
      expect(row.message).toBe(detail.message)
    }
  })

  it('shows a placeholder when a detail record is missing', () => {
    const frame = loadFrame('midmission')
    const first = frame.alerts.alerts.displayed[0]
    delete frame.alert_details[first]
    const view = renderAlerts(frame, 'alerts')
    expect(view.rows[0]).toMatchObject({ id: first, alert_type: 'unknown', message: '(details pending)' })
  })

  it('refuses a view the mission does not define', () => {
    expect(() => renderAlerts(loadFrame('midmission'), 'radar')).toThrow('unknown view')
  })

  it('stamps a dismissal with the version of the frame that showed it', () => {
    const frame = loadFrame('midmission')
    const command = dismissCommand(frame, 'alerts', 'al-0002')
    expect(command).toEqual({ kind: 'dismiss_alert', view: 'alerts', alert: 'al-0002', stamp: frame.version })
  })
})
