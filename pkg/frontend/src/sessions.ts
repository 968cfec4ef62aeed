import type { ConsoleCommand, Frame, SessionView } from './types.js'

// Dialog lifecycle, advanced only by frames and command results:
//   awaiting -> sent      operator clicked, command on the wire
//   sent     -> resolved  a later frame no longer lists the session
//   awaiting -> reverted  session vanished untouched (deadline passed)
//   sent     -> reverted  the click lost the race to the deadline
//   sent     -> stale     the enabling frame was outdated; close quietly
export type DialogPhase = 'awaiting' | 'sent' | 'resolved' | 'reverted' | 'stale'

const TERMINAL: DialogPhase[] = ['resolved', 'reverted', 'stale']

export interface SessionDialogView {
  id: string
  uav: string
  color: string
  objectClass: string
  confidence: string
  reliability: string
  location: [number, number]
  videoFrame: number
  remainingMs: number
  countdown: string
  phase: DialogPhase
  controlsEnabled: boolean
  status: string
}

function pct(score: number): string {
  return `${Math.round(score * 100)}%`
}

// Pure render of one confirm/reject prompt. The detection's score panel
// stands in for the video stream; the countdown disables the controls
// the moment it hits zero, even before the backend says anything.
export function renderSessionDialog(session: SessionView, phase: DialogPhase): SessionDialogView {
  const live = phase === 'awaiting' || phase === 'sent'
  const remaining = live ? Math.max(0, session.remaining_ms) : 0
  const status =
    phase === 'awaiting'
      ? 'awaiting decision'
      : phase === 'sent'
        ? 'decision sent'
        : phase === 'resolved'
          ? 'decision recorded'
          : phase === 'reverted'
            ? 'responsibility reverted'
            : 'view was stale'
  return {
    id: session.id,
    uav: session.uav.name,
    color: session.uav.color,
    objectClass: session.detection.object_class,
    confidence: pct(session.detection.confidence),
    reliability: pct(session.detection.reliability),
    location: session.detection.location,
    videoFrame: session.detection.frame,
    remainingMs: remaining,
    countdown: `${(remaining / 1000).toFixed(1)} s`,
    phase,
    controlsEnabled: phase === 'awaiting' && remaining > 0,
    status,
  }
}

export function resolveCommand(
  frame: Frame,
  session: string,
  decision: 'confirm' | 'reject',
): ConsoleCommand {
  return { kind: 'resolve_session', session, decision, stamp: frame.version }
}

// Tracks every session the console has seen and settles each dialog on
// exactly one terminal phase, no matter how clicks race the deadline.
export class SessionTracker {
  private phases = new Map<string, DialogPhase>()
  private latest = new Map<string, SessionView>()
  private pending = new Map<number, string>()

  onFrame(frame: Frame): void {
    const open = new Set<string>()
    for (const s of frame.sessions) {
      open.add(s.id)
      this.latest.set(s.id, s)
      if (!this.phases.has(s.id)) this.phases.set(s.id, 'awaiting')
    }
    const undecided = new Set(this.pending.values())
    for (const [id, phase] of this.phases) {
      if (open.has(id) || TERMINAL.includes(phase)) continue
      // a click whose verdict is still in flight stays sent: the result,
      // not the frame, says whether the decision or the deadline won
      if (phase === 'sent' && undecided.has(id)) continue
      this.phases.set(id, phase === 'sent' ? 'resolved' : 'reverted')
    }
  }

  clicked(session: string, seq: number): void {
    if (this.phases.get(session) === 'awaiting') {
      this.phases.set(session, 'sent')
      this.pending.set(seq, session)
    }
  }

  onResult(seq: number | null, result: { accepted: boolean; reason?: string }): void {
    if (seq === null) return
    const session = this.pending.get(seq)
    if (!session) return
    this.pending.delete(seq)
    if (result.accepted) return // resolution shows up on a later frame
    const reason = result.reason ?? ''
    if (reason === 'stale') {
      this.phases.set(session, 'stale')
    } else if (reason.startsWith('session already')) {
      // lost the race: the deadline (or another decision) beat the click
      this.phases.set(session, reason.includes('timed_out') ? 'reverted' : 'resolved')
    } else {
      this.phases.set(session, 'awaiting') // plain refusal, operator may retry
    }
  }

  phase(session: string): DialogPhase | undefined {
    return this.phases.get(session)
  }

  dialogs(): SessionDialogView[] {
    const views: SessionDialogView[] = []
    for (const [id, phase] of this.phases) {
      const session = this.latest.get(id)
      if (!session) continue
      if (phase === 'stale' || phase === 'resolved') continue // closed quietly
      views.push(renderSessionDialog(session, phase))
    }
    return views
  }
}
