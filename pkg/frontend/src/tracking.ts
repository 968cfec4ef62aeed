import type { Frame, GraphEdge } from './types.js'

export interface TokenView {
  uav: string
  node: string
  color: string
}

export interface TrackingView {
  nodes: string[]
  inactiveNodes: string[]
  edges: GraphEdge[]
  tokens: TokenView[]
  moved: string[]
  drift: string[]
}

// Mirror of the merged fleet graph: one colored token per active
// vehicle, exactly where the frame says it is. Nothing is re-derived
// client-side; `moved` only marks which tokens animate between frames.
export function renderTracking(frame: Frame, previous?: Frame | null): TrackingView {
  const { graph, placement, colors } = frame.fleet
  const known = new Set(graph.nodes)
  const tokens = Object.entries(placement.tokens).map(([uav, node]) => ({
    uav,
    node,
    color: colors[uav] ?? 'gray',
  }))
  const before = previous ? previous.fleet.placement.tokens : null
  const moved = before
    ? tokens.filter(t => t.uav in before && before[t.uav] !== t.node).map(t => t.uav)
    : []
  const drift = tokens.filter(t => !known.has(t.node)).map(t => t.uav)
  return {
    nodes: [...graph.nodes],
    inactiveNodes: [...graph.inactive_nodes],
    edges: graph.edges.map(e => ({ ...e })),
    tokens,
    moved,
    drift,
  }
}

// Stable text form of the view, for snapshots and the drift banner.
// Inactive edges carry a ~ marker so dimming is visible in plain text.
export function trackingText(view: TrackingView): string {
  const lines: string[] = []
  for (const node of view.nodes) {
    const here = view.tokens
      .filter(t => t.node === node)
      .map(t => `${t.uav}(${t.color})`)
    const tag = view.inactiveNodes.includes(node) ? '~' : ''
    lines.push(`${tag}[${node}] ${here.join(' ')}`.trimEnd())
  }
  for (const e of view.edges) {
    const tag = e.active ? '' : '~'
    lines.push(`${tag}${e.source} --${e.event}--> ${e.target} (${e.uavs.length})`)
  }
  if (view.drift.length) {
    lines.push(`!! state drift: ${view.drift.join(', ')} on unknown nodes`)
  }
  return lines.join('\n')
}
