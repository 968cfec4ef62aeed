import { dismissCommand, renderAlerts } from './alerts.js'
import { ConsoleClient, type ClientStatus, type SocketLike } from './client.js'
import { DIRECTIVE_CATALOG, directiveCommand, renderDirectivePanel, restoreCommand } from './directives.js'
import { renderMap } from './map.js'
import { resolveCommand, SessionTracker } from './sessions.js'
import { ConsoleStore } from './state.js'
import { renderTracking, trackingText } from './tracking.js'
import type { ConsoleCommand, Frame, MissionMeta } from './types.js'

const params = new URLSearchParams(location.search)
const apiHost = params.get('api') ?? location.host
const httpBase = `${location.protocol === 'https:' ? 'https' : 'http'}://${apiHost}`
const wsUrl = `${location.protocol === 'https:' ? 'wss' : 'ws'}://${apiHost}/ws`

const store = new ConsoleStore()
const tracker = new SessionTracker()
let meta: MissionMeta | null = null
let previousFrame: Frame | null = null
let frameReceivedAt = 0 // wall clock, for countdown animation only

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing element #${id}`)
  return node as T
}

function esc(text: string): string {
  return text.replace(/[&<>"']/g, c =>
    c === '&' ? '&amp;' : c === '<' ? '&lt;' : c === '>' ? '&gt;' : c === '"' ? '&quot;' : '&#39;',
  )
}

const client = new ConsoleClient(
  () => new WebSocket(wsUrl) as unknown as SocketLike,
  {
    onFrame: frame => {
      const had = store.frame
      if (!store.applyFrame(frame)) return
      previousFrame = had
      frameReceivedAt = Date.now()
      tracker.onFrame(frame)
      renderAll()
    },
    onResult: result => {
      store.applyResult(result)
      tracker.onResult(result.seq, result.result)
      renderAll()
    },
    onStatus: showStatus,
  },
)

function showStatus(status: ClientStatus): void {
  const badge = el('link-status')
  badge.textContent = status
  badge.className = `status ${status}`
}

function send(command: ConsoleCommand): number {
  return client.send(command)
}

// ---- per-panel rendering, all driven from store.frame ----

function renderHeader(frame: Frame): void {
  el('mission-name').textContent = meta ? meta.name : frame.mission.name
  el('mission-phase').textContent = `${frame.mission.lifecycle} @ ${(frame.at / 1000).toFixed(1)} s`
  const trust = Object.entries(frame.trust)
    .map(([uav, t]) => `${uav} ${t.capability} ${(t.score * 100).toFixed(0)}%`)
    .join(' | ')
  el('trust-line').textContent = trust || 'no trust samples yet'
}

function renderBanner(frame: Frame): void {
  const banner = el('autonomy-banner')
  const curtailed = Object.values(frame.autonomy).filter(a => a.mode === 'curtailed')
  if (!curtailed.length) {
    banner.hidden = true
    return
  }
  banner.hidden = false
  banner.innerHTML = curtailed
    .map(a => {
      const dims = Object.entries(a.dimensions)
        .map(
          ([dim, d]) =>
            `${esc(dim)} (${esc(d.reason)}) ` +
            `<button data-restore="${esc(a.uav)}" data-dimension="${esc(dim)}">restore</button>`,
        )
        .join(' ')
      return `<span>${esc(a.uav)} curtailed: ${dims}</span>`
    })
    .join('<br>')
}

function renderMapPanel(frame: Frame): void {
  const canvas = el<HTMLCanvasElement>('map-canvas')
  const ctx = canvas.getContext('2d')
  if (!ctx || !meta) return
  const view = renderMap(frame, meta.search_area)
  const w = canvas.width
  const h = canvas.height
  ctx.clearRect(0, 0, w, h)
  ctx.strokeStyle = '#4a5568'
  ctx.beginPath()
  view.outline.forEach((p, i) => (i ? ctx.lineTo(p.x * w, p.y * h) : ctx.moveTo(p.x * w, p.y * h)))
  ctx.closePath()
  ctx.stroke()
  for (const s of view.sightings) {
    ctx.strokeStyle = '#f6e05e'
    ctx.beginPath()
    ctx.moveTo(s.x * w - 5, s.y * h - 5)
    ctx.lineTo(s.x * w + 5, s.y * h + 5)
    ctx.moveTo(s.x * w + 5, s.y * h - 5)
    ctx.lineTo(s.x * w - 5, s.y * h + 5)
    ctx.stroke()
  }
  ctx.font = '10px sans-serif'
  for (const u of view.uavs) {
    ctx.fillStyle = u.color
    ctx.beginPath()
    ctx.arc(u.x * w, u.y * h, 5, 0, Math.PI * 2)
    ctx.fill()
    ctx.fillStyle = '#e2e8f0'
    ctx.fillText(`${u.uav} ${u.altitude.toFixed(0)}m ${u.battery.toFixed(0)}%`, u.x * w + 8, u.y * h + 3)
  }
}

function renderTrackingPanel(frame: Frame): void {
  const view = renderTracking(frame, previousFrame)
  el('tracking-pre').textContent = trackingText(view)
  el('tracking-moved').textContent = view.moved.length
    ? `moving: ${view.moved.join(', ')}`
    : ''
}

function renderAlertPanels(frame: Frame): void {
  const host = el('alert-views')
  host.innerHTML = Object.keys(frame.alerts)
    .sort()
    .map(name => {
      const view = renderAlerts(frame, name)
      const rows = view.rows
        .map(
          (row, i) =>
            `<li class="${i >= view.cap ? 'over-cap' : ''}">` +
            `<b>${esc(row.alert_type)}</b> ${esc(row.message)} ` +
            `<button data-dismiss="${esc(row.id)}" data-view="${esc(view.view)}">dismiss</button></li>`,
        )
        .join('')
      const suppressed = view.suppressedCount
        ? `<p class="muted">${view.suppressedCount} more triaged away</p>`
        : ''
      return `<section><h3>${esc(view.view)} (cap ${view.cap})</h3><ol>${rows}</ol>${suppressed}</section>`
    })
    .join('')
}

function renderSessionsPanel(): void {
  const host = el('session-dialogs')
  const dialogs = tracker.dialogs()
  if (!dialogs.length) {
    host.innerHTML = '<p class="muted">no open help requests</p>'
    return
  }
  // between frames the countdown keeps moving on the wall clock; the
  // frame stays the source of truth for everything else
  const elapsed = Date.now() - frameReceivedAt
  host.innerHTML = dialogs
    .map(d => {
      const remaining = Math.max(0, d.remainingMs - (d.phase === 'awaiting' || d.phase === 'sent' ? elapsed : 0))
      const disabled = d.controlsEnabled && remaining > 0 ? '' : 'disabled'
      return (
        `<div class="dialog"><h3><span class="dot" style="background:${esc(d.color)}"></span>` +
        `${esc(d.uav)}: ${esc(d.objectClass)} sighted</h3>` +
        `<p>confidence ${esc(d.confidence)}, context reliability ${esc(d.reliability)}, ` +
        `video frame ${d.videoFrame} @ ${d.location[0].toFixed(5)}, ${d.location[1].toFixed(5)}</p>` +
        `<p class="countdown">${(remaining / 1000).toFixed(1)} s left · ${esc(d.status)}</p>` +
        `<button data-session="${esc(d.id)}" data-decision="confirm" ${disabled}>confirm</button> ` +
        `<button data-session="${esc(d.id)}" data-decision="reject" ${disabled}>reject</button></div>`
      )
    })
    .join('')
}

function renderDirectivePanels(frame: Frame): void {
  const host = el('directive-panels')
  host.innerHTML = Object.keys(frame.fleet.colors)
    .sort()
    .map(uav => {
      const panel = renderDirectivePanel(frame, uav)
      const buttons = panel.controls
        .map(
          c =>
            `<button data-directive="${c.kind}" data-uav="${esc(uav)}" ${c.enabled ? '' : 'disabled'}>` +
            `${c.kind.replace(/_/g, ' ')}</button>`,
        )
        .join(' ')
      const badge = panel.mode === 'curtailed' ? ' <em>(curtailed)</em>' : ''
      return (
        `<section><h3><span class="dot" style="background:${esc(panel.color)}"></span>` +
        `${esc(uav)}${badge}</h3>${buttons}</section>`
      )
    })
    .join('')
}

function renderFeeds(frame: Frame): void {
  el('explanations').innerHTML = frame.explanations
    .slice()
    .reverse()
    .map(e => `<li>${esc(e.text)}</li>`)
    .join('')
  el('notices').innerHTML = store.notices
    .slice(-6)
    .reverse()
    .map(n => `<li>${esc(n.text)}</li>`)
    .join('')
}

function renderAll(): void {
  const frame = store.frame
  if (!frame) return
  renderHeader(frame)
  renderBanner(frame)
  renderMapPanel(frame)
  renderTrackingPanel(frame)
  renderAlertPanels(frame)
  renderSessionsPanel()
  renderDirectivePanels(frame)
  renderFeeds(frame)
}

// ---- command wiring: clicks only ever emit stamped commands ----

function openSessionOf(frame: Frame, uav: string): string | null {
  const s = frame.sessions.find(s => s.uav.name === uav)
  return s ? s.id : null
}

document.addEventListener('click', event => {
  const target = event.target as HTMLElement
  const frame = store.frame
  if (!frame || target.tagName !== 'BUTTON') return

  const dismiss = target.dataset.dismiss
  if (dismiss && target.dataset.view) {
    send(dismissCommand(frame, target.dataset.view, dismiss))
    return // the list updates on the next frame, never locally
  }
  const session = target.dataset.session
  if (session && (target.dataset.decision === 'confirm' || target.dataset.decision === 'reject')) {
    const seq = send(resolveCommand(frame, session, target.dataset.decision))
    tracker.clicked(session, seq)
    renderSessionsPanel()
    return
  }
  const restore = target.dataset.restore
  if (restore && target.dataset.dimension) {
    send(restoreCommand(frame, restore, target.dataset.dimension))
    return
  }
  const directive = target.dataset.directive
  const uav = target.dataset.uav
  if (directive && uav && (DIRECTIVE_CATALOG as readonly string[]).includes(directive)) {
    const kind = directive as (typeof DIRECTIVE_CATALOG)[number]
    const sessionId = openSessionOf(frame, uav)
    const dims = Object.keys(frame.autonomy[uav]?.dimensions ?? {})
    const params: Record<string, unknown> =
      kind === 'altitude_change'
        ? { delta_m: -10 }
        : kind === 'goal_update'
          ? { goal: 'searching' }
          : kind === 'manual_override'
            ? { command: 'hold' }
            : kind === 'confirm_detection' || kind === 'reject_detection'
              ? { session: sessionId }
              : kind === 'restore_autonomy'
                ? { dimension: dims[0] ?? 'altitude' }
                : {}
    send(directiveCommand(frame, uav, kind, params))
  }
})

// countdowns tick between frames without touching any state
setInterval(() => {
  if (store.frame && tracker.dialogs().length) renderSessionsPanel()
}, 100)

async function boot(): Promise<void> {
  try {
    const resp = await fetch(`${httpBase}/mission`)
    meta = (await resp.json()) as MissionMeta
    el('mission-name').textContent = meta.name
    el('teaming').innerHTML = meta.teaming.map(line => `<li>${esc(line)}</li>`).join('')
  } catch {
    el('mission-phase').textContent = 'mission metadata unavailable'
  }
  client.connect()
}

void boot()
