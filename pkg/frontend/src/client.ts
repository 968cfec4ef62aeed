import type { CommandResult, ConsoleCommand, Frame, ServerMessage } from './types.js'

// Thin duplex client. Frames are self-contained, so a reconnect simply
// resumes from the next frame; nothing needs to be replayed.

export interface SocketLike {
  send(data: string): void
  close(): void
  onopen: (() => void) | null
  onmessage: ((ev: { data: string }) => void) | null
  onclose: (() => void) | null
}

export type ClientStatus = 'connecting' | 'open' | 'closed'

export interface ClientHandlers {
  onFrame(frame: Frame): void
  onResult(result: CommandResult): void
  onStatus?(status: ClientStatus): void
}

export class ConsoleClient {
  private seq = 0
  private sock: SocketLike | null = null
  private stopped = false

  constructor(
    private dial: () => SocketLike,
    private handlers: ClientHandlers,
    private reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.handlers.onStatus?.('connecting')
    const sock = this.dial()
    this.sock = sock
    sock.onopen = () => this.handlers.onStatus?.('open')
    sock.onmessage = ev => {
      let msg: ServerMessage
      try {
        msg = JSON.parse(ev.data)
      } catch {
        return // not ours to crash on
      }
      if (msg.type === 'frame') this.handlers.onFrame(msg)
      else if (msg.type === 'command_result') this.handlers.onResult(msg)
    }
    sock.onclose = () => {
      this.handlers.onStatus?.('closed')
      if (!this.stopped) {
        setTimeout(() => this.connect(), this.reconnectDelayMs)
      }
    }
  }

  stop(): void {
    this.stopped = true
    if (this.sock) this.sock.close()
  }

  // every command carries the version stamp of the frame that enabled
  // it; a command without one never leaves the client
  send(command: ConsoleCommand): number {
    if (typeof command.stamp !== 'number') {
      throw new Error('command without a version stamp')
    }
    if (!this.sock) throw new Error('not connected')
    const seq = ++this.seq
    this.sock.send(JSON.stringify({ type: 'command', seq, command }))
    return seq
  }
}
