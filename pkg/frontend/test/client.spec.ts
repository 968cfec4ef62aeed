import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest'
import { ConsoleClient } from '../src/client.js'
import type { ClientStatus, SocketLike } from '../src/client.js'
import type { CommandResult, ConsoleCommand, Frame } from '../src/types.js'
import { emptyFrame } from './helpers.js'

class FakeSocket implements SocketLike {
  sent: string[] = []
  closed = false
  onopen: (() => void) | null = null
  onmessage: ((ev: { data: string }) => void) | null = null
  onclose: (() => void) | null = null

  send(data: string): void {
    this.sent.push(data)
  }

  close(): void {
    this.closed = true
  }

  open(): void {
    this.onopen?.()
  }

  receive(payload: unknown): void {
    this.onmessage?.({ data: typeof payload === 'string' ? payload : JSON.stringify(payload) })
  }

  drop(): void {
    this.onclose?.()
  }
}

interface Harness {
  client: ConsoleClient
  sockets: FakeSocket[]
  frames: Frame[]
  results: CommandResult[]
  statuses: ClientStatus[]
}

function harness(): Harness {
  const sockets: FakeSocket[] = []
  const frames: Frame[] = []
  const results: CommandResult[] = []
  const statuses: ClientStatus[] = []
  const client = new ConsoleClient(
    () => {
      const sock = new FakeSocket()
      sockets.push(sock)
      return sock
    },
    {
      onFrame: f => frames.push(f),
      onResult: r => results.push(r),
      onStatus: s => statuses.push(s),
    },
    500,
  )
  return { client, sockets, frames, results, statuses }
}

const command: ConsoleCommand = {
  kind: 'resolve_session',
  session: 'cs-0001',
  decision: 'confirm',
  stamp: 42,
}

describe('console client', () => {
  beforeEach(() => vi.useFakeTimers())
  afterEach(() => vi.useRealTimers())

  it('dispatches frames and command results to their handlers', () => {
    const h = harness()
    h.client.connect()
    const sock = h.sockets[0]
    sock.open()
    sock.receive(emptyFrame({ version: 7 }))
    sock.receive({ type: 'command_result', seq: 1, result: { accepted: true } })
    expect(h.frames.map(f => f.version)).toEqual([7])
    expect(h.results).toEqual([{ type: 'command_result', seq: 1, result: { accepted: true } }])
    expect(h.statuses).toEqual(['connecting', 'open'])
  })

  it('survives garbage off the wire without calling any handler', () => {
    const h = harness()
    h.client.connect()
    const sock = h.sockets[0]
    sock.receive('not json at all')
    sock.receive({ type: 'something_else' })
    expect(h.frames).toEqual([])
    expect(h.results).toEqual([])
  })

  it('numbers commands and wraps them in a command envelope', () => {
    const h = harness()
    h.client.connect()
    const first = h.client.send(command)
    const second = h.client.send({ ...command, decision: 'reject' })
    expect([first, second]).toEqual([1, 2])
    const envelopes = h.sockets[0].sent.map(s => JSON.parse(s))
    expect(envelopes[0]).toEqual({ type: 'command', seq: 1, command })
    expect(envelopes[1].seq).toBe(2)
  })

  it('sends nothing that lacks a numeric version stamp', () => {
    const h = harness()
    h.client.connect()
    const unstamped = { ...command, stamp: undefined } as unknown as ConsoleCommand
    expect(() => h.client.send(unstamped)).toThrow('command without a version stamp')
    expect(h.sockets[0].sent).toEqual([])
  })

  it('stamps every outgoing command, whatever its kind', () => {
    const h = harness()
    h.client.connect()
    const outgoing: ConsoleCommand[] = [
      command,
      { kind: 'dismiss_alert', view: 'alerts', alert: 'al-0001', stamp: 42 },
      { kind: 'directive', uav: 'uav-1', directive: { kind: 'video_request', params: {} }, stamp: 42 },
      { kind: 'update_rule', view: 'alerts', alert_type: 'detection', essential: true, stamp: 42 },
    ]
    for (const c of outgoing) h.client.send(c)
    for (const raw of h.sockets[0].sent) {
      const parsed = JSON.parse(raw)
      expect(typeof parsed.command.stamp).toBe('number')
    }
  })

  it('refuses to send before connecting', () => {
    const h = harness()
    expect(() => h.client.send(command)).toThrow('not connected')
  })

  it('redials after a drop and resumes from the next frame', () => {
    const h = harness()
    h.client.connect()
    h.sockets[0].open()
    h.sockets[0].drop()
    expect(h.sockets).toHaveLength(1)
    vi.advanceTimersByTime(500)
    expect(h.sockets).toHaveLength(2)
    h.sockets[1].open()
    h.sockets[1].receive(emptyFrame({ version: 9 }))
    expect(h.frames.map(f => f.version)).toEqual([9])
    expect(h.statuses).toEqual(['connecting', 'open', 'closed', 'connecting', 'open'])
  })

  it('stays down once stopped', () => {
    const h = harness()
    h.client.connect()
    h.client.stop()
    expect(h.sockets[0].closed).toBe(true)
    h.sockets[0].drop()
    vi.advanceTimersByTime(5000)
    expect(h.sockets).toHaveLength(1)
  })
})
