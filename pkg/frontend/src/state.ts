import type { CommandResult, Frame } from './types.js'

export interface Notice {
  text: string
  at: number
}

// Single source of truth for the whole console: the only mutations come
// from a received frame or a command result. Widgets re-render from
// `frame` alone, so the UI can never drift ahead of the mission.
export class ConsoleStore {
  frame: Frame | null = null
  notices: Notice[] = []
  results: CommandResult[] = []

  // latest wins; a straggler from before a reconnect is dropped
  applyFrame(frame: Frame): boolean {
    if (this.frame && frame.version < this.frame.version) return false
    this.frame = frame
    return true
  }

  applyResult(result: CommandResult): void {
    this.results.push(result)
    if (!result.result.accepted && result.result.reason === 'stale') {
      this.notices.push({
        text: 'command refused: the view that enabled it was stale',
        at: this.frame ? this.frame.at : 0,
      })
    }
  }
}
