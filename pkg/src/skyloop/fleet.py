"""Task-centric fleet model: merged state graph, colored tokens, history.

All active vehicles' machines are merged by state name into one global
transition graph; each vehicle marks its current state with a colored
token. The model keeps per-vehicle visit history so an operator can ask
where a vehicle was, and when, long after the fact.

Edges that belonged to a vehicle that has since left (or been
reconfigured) are retained in snapshots but tagged inactive, so the
display can show paths no longer takeable instead of silently dropping
them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .common import UavId
from .statemachine import TaskStateMachine


class FleetError(Exception):
    pass


class UnknownUavError(FleetError):
    pass


class UnknownStateError(FleetError):
    """Token reported on a state the merged graph does not contain.

    Signals drift between an agent's machine and the ground model; the
    service layer surfaces it as an essential alert rather than dying.
    """


@dataclass(frozen=True)
class GraphEdge:
    source: str
    event: str
    target: str
    uavs: tuple[str, ...]
    active: bool = True

    def to_record(self) -> dict:
        return {
            "source": self.source,
            "event": self.event,
            "target": self.target,
            "uavs": list(self.uavs),
            "active": self.active,
        }


@dataclass(frozen=True)
class GlobalStateGraph:
    nodes: tuple[str, ...]
    edges: tuple[GraphEdge, ...]
    inactive_nodes: tuple[str, ...] = ()

    def to_record(self) -> dict:
        return {
            "nodes": list(self.nodes),
            "edges": [e.to_record() for e in self.edges],
            "inactive_nodes": list(self.inactive_nodes),
        }


@dataclass(frozen=True)
class TokenPlacement:
    tokens: tuple[tuple[str, str], ...]  # (uav name, node), name-sorted
    as_of: int

    def node_of(self, name: str) -> str | None:
        for uav, node in self.tokens:
            if uav == name:
                return node
        return None

    def to_record(self) -> dict:
        return {"tokens": {u: n for u, n in self.tokens}, "as_of": self.as_of}


@dataclass(frozen=True)
class StateVisit:
    state: str
    entered_at: int
    exited_at: int | None  # None while the visit is still open

    def to_record(self) -> dict:
        return {
            "state": self.state,
            "entered_at": self.entered_at,
            "exited_at": self.exited_at,
        }


def merge(machines: list[tuple[UavId, TaskStateMachine]]) -> GlobalStateGraph:
    """Union of member machines, nodes ordered lexicographically.

    States sharing a name across vehicles are the same node; each edge
    is tagged with every vehicle whose machine carries it.
    """
    if not machines:
        raise FleetError("merge requires at least one machine")
    names = [uav.name for uav, _ in machines]
    if len(set(names)) != len(names):
        raise FleetError("duplicate UAV id in merge input")
    nodes: set[str] = set()
    tags: dict[tuple[str, str, str], set[str]] = {}
    for uav, machine in machines:
        nodes |= machine.states
        for t in machine.transitions:
            tags.setdefault((t.source, t.event, t.target), set()).add(uav.name)
    edges = tuple(
        GraphEdge(s, e, tgt, tuple(sorted(tags[(s, e, tgt)])))
        for (s, e, tgt) in sorted(tags)
    )
    return GlobalStateGraph(nodes=tuple(sorted(nodes)), edges=edges)


@dataclass(frozen=True)
class FleetSnapshot:
    graph: GlobalStateGraph
    placement: TokenPlacement
    colors: tuple[tuple[str, str], ...]  # (uav name, color)

    def to_record(self) -> dict:
        return {
            "graph": self.graph.to_record(),
            "placement": self.placement.to_record(),
            "colors": {u: c for u, c in self.colors},
        }


class FleetModel:
    """Single-writer runtime model; readers get immutable snapshots."""

    def __init__(self):
        self._members: dict[str, tuple[UavId, TaskStateMachine]] = {}
        self._tokens: dict[str, str] = {}
        self._history: dict[str, list[StateVisit]] = {}
        # edges seen at any point, for inactive tagging after departure
        self._seen_edges: dict[tuple[str, str, str], set[str]] = {}
        self._as_of = 0

    @property
    def active_uavs(self) -> tuple[str, ...]:
        return tuple(sorted(self._members))

    def register(self, uav: UavId, machine: TaskStateMachine, at: int) -> None:
        if uav.name in self._members:
            raise FleetError(f"duplicate registration for {uav.name!r}")
        self._members[uav.name] = (uav, machine)
        self._tokens[uav.name] = machine.current
        self._history.setdefault(uav.name, []).append(
            StateVisit(machine.current, at, None)
        )
        for t in machine.transitions:
            self._seen_edges.setdefault((t.source, t.event, t.target), set()).add(
                uav.name
            )
        self._as_of = at

    def deregister(self, name: str, at: int) -> None:
        if name not in self._members:
            raise UnknownUavError(name)
        del self._members[name]
        del self._tokens[name]
        self._close_open_visit(name, at)
        self._as_of = at

    def _close_open_visit(self, name: str, at: int) -> None:
        visits = self._history.get(name, [])
        if visits and visits[-1].exited_at is None:
            last = visits[-1]
            visits[-1] = StateVisit(last.state, last.entered_at, at)

    def update_token(self, name: str, state: str, at: int) -> TokenPlacement:
        if name not in self._members:
            raise UnknownUavError(name)
        graph = self._merge_active()
        if state not in graph.nodes:
            raise UnknownStateError(f"{name!r} reported unknown state {state!r}")
        self._as_of = at
        if self._tokens[name] != state:  # same-node report leaves history alone
            self._tokens[name] = state
            self._close_open_visit(name, at)
            self._history[name].append(StateVisit(state, at, None))
        return self._placement()

    def _merge_active(self) -> GlobalStateGraph:
        return merge([pair for pair in self._members.values()])

    def _placement(self) -> TokenPlacement:
        return TokenPlacement(
            tokens=tuple(sorted(self._tokens.items())), as_of=self._as_of
        )

    def snapshot(self) -> FleetSnapshot:
        graph = self._merge_active() if self._members else GlobalStateGraph((), ())
        live = {(e.source, e.event, e.target) for e in graph.edges}
        retired = []
        extra_nodes: set[str] = set()
        for key in sorted(self._seen_edges):
            if key not in live:
                s, e, tgt = key
                retired.append(
                    GraphEdge(s, e, tgt, tuple(sorted(self._seen_edges[key])), False)
                )
                extra_nodes.update((s, tgt))
        inactive_nodes = tuple(sorted(extra_nodes - set(graph.nodes)))
        full = GlobalStateGraph(
            nodes=tuple(sorted(set(graph.nodes) | extra_nodes)),
            edges=tuple(graph.edges) + tuple(retired),
            inactive_nodes=inactive_nodes,
        )
        return FleetSnapshot(
            graph=full,
            placement=self._placement(),
            colors=tuple(sorted((u.name, u.color) for u, _ in self._members.values())),
        )

    def history(
        self, name: str, start: int | None = None, end: int | None = None
    ) -> tuple[StateVisit, ...]:
        """Visits clipped to [start, end]; open visits keep exited_at=None
        unless the range end falls inside them."""
        if name not in self._history:
            raise UnknownUavError(name)
        lo = start if start is not None else 0
        out = []
        for v in self._history[name]:
            exited = v.exited_at
            if end is not None and v.entered_at > end:
                continue
            if exited is not None and exited < lo:
                continue
            clip_in = max(v.entered_at, lo)
            if end is None:
                clip_out = exited
            elif exited is None or exited > end:
                clip_out = end
            else:
                clip_out = exited
            out.append(StateVisit(v.state, clip_in, clip_out))
        return tuple(out)
