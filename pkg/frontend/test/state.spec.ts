import { describe, expect, it } from 'vitest'
import { ConsoleStore } from '../src/state.js'
import { emptyFrame } from './helpers.js'

describe('console store', () => {
  it('keeps the newest frame and drops stragglers', () => {
    const store = new ConsoleStore()
    expect(store.applyFrame(emptyFrame({ version: 5 }))).toBe(true)
    expect(store.applyFrame(emptyFrame({ version: 9 }))).toBe(true)
    expect(store.applyFrame(emptyFrame({ version: 7 }))).toBe(false)
    expect(store.frame?.version).toBe(9)
  })

  it('accepts a same-version frame, as after a quiet reconnect', () => {
    const store = new ConsoleStore()
    store.applyFrame(emptyFrame({ version: 5 }))
    expect(store.applyFrame(emptyFrame({ version: 5 }))).toBe(true)
  })

  it('turns a stale rejection into an operator notice', () => {
    const store = new ConsoleStore()
    store.applyFrame(emptyFrame({ version: 5, at: 1200 }))
    store.applyResult({ type: 'command_result', seq: 3, result: { accepted: false, reason: 'stale' } })
    expect(store.notices).toEqual([
      { text: 'command refused: the view that enabled it was stale', at: 1200 },
    ])
  })

  it('keeps quiet about ordinary results', () => {
    const store = new ConsoleStore()
    store.applyResult({ type: 'command_result', seq: 1, result: { accepted: true } })
    store.applyResult({
      type: 'command_result',
      seq: 2,
      result: { accepted: false, reason: 'unknown session' },
    })
    expect(store.notices).toEqual([])
    expect(store.results).toHaveLength(2)
  })
})
