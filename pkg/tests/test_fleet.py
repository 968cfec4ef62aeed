"""Fleet model: merged graph, token placement, visit history."""

import random as _random

import pytest

from skyloop.common import UavId
from skyloop.fleet import (
    FleetError,
    FleetModel,
    UnknownStateError,
    UnknownUavError,
    merge,
)
from skyloop.statemachine import TaskStateMachine, default_search_machine


def uav(name, color=None):
    return UavId(name, color or name)


def machine(states, transitions, initial):
    return TaskStateMachine(states, transitions, initial)


class TestMerge:
    def test_identical_machines_union_is_idempotent(self):
        a = default_search_machine()
        b = default_search_machine()
        g = merge([(uav("blue"), a), (uav("red"), b)])
        assert set(g.nodes) == a.states
        assert all(e.uavs == ("blue", "red") for e in g.edges)
        assert len(g.edges) == len(set(a.transitions))

    def test_disjoint_machines_union(self):
        a = machine(["s1", "s2"], [("s1", "e1", "s2")], "s1")
        b = machine(["s2", "s3"], [("s2", "e2", "s3")], "s2")
        g = merge([(uav("A"), a), (uav("B"), b)])
        assert g.nodes == ("s1", "s2", "s3")
        tags = {(e.source, e.event, e.target): e.uavs for e in g.edges}
        assert tags[("s1", "e1", "s2")] == ("A",)
        assert tags[("s2", "e2", "s3")] == ("B",)

    def test_duplicate_uav_rejected(self):
        a = default_search_machine()
        with pytest.raises(FleetError):
            merge([(uav("blue"), a), (uav("blue"), a)])

    def test_random_machines_match_set_union_oracle(self):
        rng = _random.Random(11)
        pool = [f"s{i}" for i in range(12)]
        members = []
        for n in range(6):
            states = rng.sample(pool, rng.randint(2, 8))
            transitions = []
            for _ in range(rng.randint(1, 10)):
                src, tgt = rng.choice(states), rng.choice(states)
                transitions.append((src, f"e{rng.randint(0, 5)}", tgt))
            # drop conflicting duplicates the machine would reject
            seen = {}
            clean = []
            for s, e, t in transitions:
                if (s, e) not in seen:
                    seen[(s, e)] = t
                    clean.append((s, e, t))
            members.append((uav(f"u{n}"), machine(states, clean, states[0])))
        g = merge(members)
        oracle_nodes = set()
        oracle_edges = set()
        for _, m in members:
            oracle_nodes |= set(m.states)
            oracle_edges |= {(t.source, t.event, t.target) for t in m.transitions}
        assert set(g.nodes) == oracle_nodes
        assert {(e.source, e.event, e.target) for e in g.edges} == oracle_edges

    def test_merge_monotone_under_new_member(self):
        a = machine(["s1", "s2"], [("s1", "e", "s2")], "s1")
        b = machine(["s3"], [("s3", "loop", "s3")], "s3")
        g1 = merge([(uav("A"), a)])
        g2 = merge([(uav("A"), a), (uav("B"), b)])
        assert set(g1.nodes) <= set(g2.nodes)
        e1 = {(e.source, e.event, e.target) for e in g1.edges}
        e2 = {(e.source, e.event, e.target) for e in g2.edges}
        assert e1 <= e2


def fleet_of(*names):
    model = FleetModel()
    for i, name in enumerate(names):
        model.register(uav(name), default_search_machine(), at=i)
    return model


class TestTokens:
    def test_reference_scene_places_five_tokens_on_four_nodes(self):
        model = fleet_of("green", "red", "orange", "purple", "blue")
        placements = {
            "green": "standby",
            "red": "searching",
            "orange": "searching",
            "purple": "surveillance",
            "blue": "victim_detected",
        }
        for name, state in placements.items():
            model.update_token(name, state, at=100)
        snap = model.snapshot()
        tokens = dict(snap.placement.tokens)
        assert tokens == placements
        assert len(set(tokens.values())) == 4

    def test_unknown_state_raises(self):
        model = fleet_of("blue")
        with pytest.raises(UnknownStateError):
            model.update_token("blue", "warp_drive", at=5)

    def test_unknown_uav_raises(self):
        model = fleet_of("blue")
        with pytest.raises(UnknownUavError):
            model.update_token("ghost", "searching", at=5)

    def test_same_node_report_leaves_history_alone(self):
        model = fleet_of("blue")
        model.update_token("blue", "takeoff", at=10)
        before = model.history("blue")
        model.update_token("blue", "takeoff", at=20)
        assert model.history("blue") == before

    def test_deregister_removes_token_and_closes_interval(self):
        model = fleet_of("blue", "red")
        model.update_token("blue", "takeoff", at=10)
        model.deregister("blue", at=50)
        snap = model.snapshot()
        assert snap.placement.node_of("blue") is None
        assert model.history("blue")[-1].exited_at == 50

    def test_token_count_matches_active_uavs(self):
        model = fleet_of("a", "b", "c")
        assert len(model.snapshot().placement.tokens) == 3
        model.deregister("b", at=9)
        assert len(model.snapshot().placement.tokens) == 2


class TestSnapshots:
    def test_snapshot_reflects_latest_placement(self):
        model = fleet_of("blue")
        for k, state in enumerate(["takeoff", "searching", "surveillance"]):
            model.update_token("blue", state, at=k + 1)
        assert model.snapshot().placement.node_of("blue") == "surveillance"

    def test_snapshots_without_updates_are_equal(self):
        model = fleet_of("blue")
        assert model.snapshot() == model.snapshot()

    def test_departed_machine_edges_tagged_inactive(self):
        model = FleetModel()
        model.register(uav("A"), machine(["s1", "s2"], [("s1", "e", "s2")], "s1"), 0)
        model.register(uav("B"), machine(["s2", "s3"], [("s2", "f", "s3")], "s2"), 0)
        model.deregister("A", at=10)
        snap = model.snapshot()
        retired = [e for e in snap.graph.edges if not e.active]
        assert [(e.source, e.event, e.target) for e in retired] == [("s1", "e", "s2")]
        assert "s1" in snap.graph.inactive_nodes
        # no orphans: every edge endpoint is a node
        for e in snap.graph.edges:
            assert e.source in snap.graph.nodes and e.target in snap.graph.nodes

    def test_random_interleaving_never_orphans_a_token(self):
        rng = _random.Random(5)
        model = FleetModel()
        alive = []
        counter = 0
        for step in range(400):
            roll = rng.random()
            if roll < 0.15 or not alive:
                name = f"u{counter}"
                counter += 1
                model.register(uav(name), default_search_machine(), at=step)
                alive.append(name)
            elif roll < 0.25 and len(alive) > 1:
                gone = alive.pop(rng.randrange(len(alive)))
                model.deregister(gone, at=step)
            else:
                who = rng.choice(alive)
                state = rng.choice(sorted(default_search_machine().states))
                model.update_token(who, state, at=step)
            snap = model.snapshot()
            assert len(snap.placement.tokens) == len(alive)
            for _, node in snap.placement.tokens:
                assert node in snap.graph.nodes


class TestHistory:
    def test_full_range(self):
        model = fleet_of("blue")
        model.update_token("blue", "takeoff", at=10)
        model.update_token("blue", "searching", at=30)
        visits = model.history("blue")
        assert [(v.state, v.entered_at, v.exited_at) for v in visits] == [
            ("standby", 0, 10),
            ("takeoff", 10, 30),
            ("searching", 30, None),
        ]

    def test_range_inside_one_visit_clips(self):
        model = fleet_of("blue")
        model.update_token("blue", "takeoff", at=10)
        model.update_token("blue", "searching", at=100)
        visits = model.history("blue", start=40, end=60)
        assert visits == (type(visits[0])("takeoff", 40, 60),)

    def test_latest_history_state_matches_token(self):
        model = fleet_of("blue", "red")
        model.update_token("blue", "takeoff", at=3)
        model.update_token("red", "takeoff", at=4)
        model.update_token("blue", "searching", at=7)
        snap = model.snapshot()
        for name, node in snap.placement.tokens:
            assert model.history(name)[-1].state == node

    def test_reconstruction_matches_replay_oracle(self):
        rng = _random.Random(77)
        model = fleet_of("blue")
        states = sorted(default_search_machine().states)
        stream = []
        t = 0
        for _ in range(200):
            t += rng.randint(1, 9)
            state = rng.choice(states)
            stream.append((state, t))
            model.update_token("blue", state, at=t)
        # oracle: fold the raw stream, collapsing same-state repeats
        oracle = [("standby", 0, None)]
        for state, at in stream:
            if oracle[-1][0] == state:
                continue
            oracle[-1] = (oracle[-1][0], oracle[-1][1], at)
            oracle.append((state, at, None))
        got = [(v.state, v.entered_at, v.exited_at) for v in model.history("blue")]
        assert got == oracle

    def test_unknown_uav_history_raises(self):
        model = fleet_of("blue")
        with pytest.raises(UnknownUavError):
            model.history("ghost")
