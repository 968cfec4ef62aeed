"""Coordination sessions, affordances, and tug-of-war detection."""

import random as _random

import pytest

from skyloop.common import DetectionEvent, UavId
from skyloop.coordination import (
    ActionLogEntry,
    CoordinationError,
    CoordinationService,
    DuplicateSessionError,
    HumanDirective,
    MachineRestoreError,
    StaleActionError,
    UnknownSessionError,
    longest_alternation_chain,
    opposing,
)

BLUE = UavId("uav-1", "blue")
RED = UavId("uav-2", "red")


def detection(uav=BLUE, frame=1, confidence=0.9, reliability=0.4):
    return DetectionEvent(
        object_class="person",
        confidence=confidence,
        reliability=reliability,
        location=(47.6, -122.3),
        frame=frame,
        uav=uav,
    )


def service(**kw):
    return CoordinationService(**kw)


class TestSessions:
    def test_open_session_starts_help_requested(self):
        svc = service()
        s = svc.open_session(detection(), at=1000)
        assert s.state == "help_requested"
        assert s.deadline == 11_000
        assert svc.open_sessions("uav-1") == (s,)

    def test_duplicate_detection_rejected(self):
        svc = service()
        svc.open_session(detection(frame=7), at=0)
        with pytest.raises(DuplicateSessionError):
            svc.open_session(detection(frame=7), at=5)

    def test_independent_sessions_for_two_uavs(self):
        svc = service()
        a = svc.open_session(detection(uav=BLUE, frame=1), at=0)
        b = svc.open_session(detection(uav=RED, frame=1), at=0)
        assert a.id != b.id
        assert len(svc.open_sessions()) == 2

    def test_confirm_within_window(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        out = svc.resolve(s.id, "confirm", at=4000)
        assert out.state == "confirmed"
        assert out.outcome == "CONFIRMATION"
        assert out.closed_at == 4000

    def test_reject_within_window(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        assert svc.resolve(s.id, "reject", at=1).outcome == "REFUTATION"

    def test_resolve_terminal_is_stale(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        svc.resolve(s.id, "confirm", at=10)
        with pytest.raises(StaleActionError):
            svc.resolve(s.id, "reject", at=20)

    def test_resolve_past_deadline_is_stale(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        with pytest.raises(StaleActionError):
            svc.resolve(s.id, "confirm", at=10_001)

    def test_human_wins_tie_at_deadline(self):
        # responses apply before tick at equal timestamps
        svc = service()
        s = svc.open_session(detection(), at=0)
        assert svc.resolve(s.id, "confirm", at=10_000).state == "confirmed"
        assert svc.tick(10_000) == []

    def test_timeout_lands_on_deadline_exactly(self):
        svc = service()
        s = svc.open_session(detection(), at=500)
        assert svc.tick(10_499) == []
        expired = svc.tick(10_500)
        assert [e.id for e in expired] == [s.id]
        assert s.state == "timed_out"
        assert s.outcome == "NO_RESPONSE"
        assert s.closed_at == 10_500

    def test_late_tick_still_closes_at_deadline(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        svc.tick(25_000)
        assert s.closed_at == 10_000

    def test_response_one_tick_before_deadline(self):
        svc = service()
        s = svc.open_session(detection(), at=0)
        svc.resolve(s.id, "confirm", at=9_990)
        assert svc.tick(10_000) == []
        assert s.state == "confirmed"

    def test_unknown_session(self):
        with pytest.raises(UnknownSessionError):
            service().resolve("cs-9999", "confirm", at=0)

    def test_exactly_one_outcome_over_random_interleaving(self):
        rng = _random.Random(17)
        svc = service(waiting_period=50)
        outcomes: dict[str, list[str]] = {}
        open_ids = []
        now = 0
        for i in range(400):
            now += rng.randint(1, 10)
            roll = rng.random()
            if roll < 0.4:
                s = svc.open_session(detection(frame=i), at=now)
                open_ids.append(s.id)
                outcomes[s.id] = []
            elif roll < 0.7 and open_ids:
                sid = rng.choice(open_ids)
                try:
                    s = svc.resolve(sid, rng.choice(["confirm", "reject"]), at=now)
                    outcomes[sid].append(s.outcome)
                except StaleActionError:
                    pass
            for s in svc.tick(now):
                outcomes[s.id].append(s.outcome)
        svc.tick(now + 10_000)
        for sid, outs in outcomes.items():
            session = svc.session(sid)
            if session.terminal:
                recorded = outs or [session.outcome]
                assert len(recorded) == 1
                assert session.outcome in (
                    "CONFIRMATION", "REFUTATION", "NO_RESPONSE"
                )


class TestDirectives:
    def test_unknown_kind_rejected(self):
        with pytest.raises(CoordinationError):
            HumanDirective("warp", BLUE, {}, 0)

    def test_missing_params_rejected(self):
        with pytest.raises(CoordinationError) as err:
            HumanDirective("altitude_change", BLUE, {}, 0)
        assert "delta_m" in str(err.value)

    def test_round_trip(self):
        d = HumanDirective("altitude_change", BLUE, {"delta_m": -8}, 42)
        assert HumanDirective.from_record(d.to_record()) == d


class TestAffordances:
    def test_rtl_excludes_video(self):
        svc = service()
        assert "video_request" not in svc.compute_affordances("uav-1", "RTL")

    def test_searching_affords_video(self):
        svc = service()
        assert "video_request" in svc.compute_affordances("uav-1", "searching")

    def test_open_session_enables_confirm_reject(self):
        svc = service()
        base = svc.compute_affordances("uav-1", "searching")
        assert "confirm_detection" not in base
        svc.open_session(detection(), at=0)
        with_session = svc.compute_affordances("uav-1", "searching")
        assert "confirm_detection" in with_session
        assert "reject_detection" in with_session
        # other vehicles unaffected
        assert "confirm_detection" not in svc.compute_affordances("uav-2", "searching")

    def test_curtailed_swaps_goal_update_for_restore(self):
        svc = service()
        svc.curtail("uav-1", "altitude", "operator request", at=0)
        kinds = svc.compute_affordances("uav-1", "searching")
        assert "restore_autonomy" in kinds
        assert "goal_update" not in kinds

    def test_unknown_state_affords_nothing(self):
        assert service().compute_affordances("uav-1", "warp") == ()


def entry(actor, direction, at, uav="uav-1", dimension="altitude", failsafe=False):
    return ActionLogEntry(actor, uav, dimension, direction, at, failsafe)


class TestTugOfWar:
    def test_river_reflection_pattern_detected(self):
        svc = service()
        for i, (actor, d) in enumerate(
            [("machine", -1), ("human", +1), ("machine", -1), ("human", +1)]
        ):
            svc.record_action(entry(actor, d, at=i * 1000))
        conflict = svc.detect_tug_of_war("uav-1")
        assert conflict is not None
        assert conflict.dimension == "altitude"
        assert conflict.alternations == 3

    def test_single_alternation_is_not_conflict(self):
        svc = service()
        for i, (actor, d) in enumerate(
            [("machine", -1), ("machine", -1), ("human", +1)]
        ):
            svc.record_action(entry(actor, d, at=i * 1000))
        assert svc.detect_tug_of_war("uav-1") is None

    def test_same_direction_alternation_is_not_opposing(self):
        svc = service()
        for i, actor in enumerate(["machine", "human", "machine", "human"]):
            svc.record_action(entry(actor, +1, at=i * 1000))
        assert svc.detect_tug_of_war("uav-1") is None

    def test_categorical_set_unset_cycle(self):
        svc = service()
        seq = [
            ("machine", ("set", "tracking")),
            ("human", ("unset", "tracking")),
            ("machine", ("set", "tracking")),
            ("human", ("unset", "tracking")),
        ]
        for i, (actor, d) in enumerate(seq):
            svc.record_action(entry(actor, d, at=i * 1000, dimension="mode"))
        conflict = svc.detect_tug_of_war("uav-1")
        assert conflict is not None and conflict.dimension == "mode"

    def test_window_excludes_stale_actions(self):
        svc = service(window=5000)
        svc.record_action(entry("machine", -1, at=0))
        svc.record_action(entry("human", +1, at=100))
        svc.record_action(entry("machine", -1, at=9000))
        svc.record_action(entry("human", +1, at=9500))
        assert svc.detect_tug_of_war("uav-1", now=9500) is None

    def test_non_chronological_rejected(self):
        svc = service()
        svc.record_action(entry("human", +1, at=100))
        with pytest.raises(CoordinationError):
            svc.record_action(entry("human", +1, at=99))

    def test_detector_agrees_with_quadratic_oracle(self):
        def oracle_chain(entries):
            # O(n^2) longest alternating-opposing subsequence
            best = 0
            lengths = []
            for i, e in enumerate(entries):
                length = 1
                for j in range(i):
                    if entries[j].actor != e.actor and opposing(
                        entries[j].direction, e.direction
                    ):
                        length = max(length, lengths[j] + 1)
                lengths.append(length)
                best = max(best, length)
            return max(0, best - 1)

        rng = _random.Random(29)
        for trial in range(200):
            entries = []
            at = 0
            for _ in range(rng.randint(0, 18)):
                at += rng.randint(1, 500)
                if rng.random() < 0.5:
                    direction = rng.choice([-3, -1, 1, 2])
                else:
                    direction = (rng.choice(["set", "unset"]), rng.choice("ab"))
                entries.append(
                    entry(rng.choice(["human", "machine"]), direction, at)
                )
            assert longest_alternation_chain(entries) == oracle_chain(entries)


class TestCurtailment:
    def make_conflict(self, svc):
        for i, (actor, d) in enumerate(
            [("machine", -1), ("human", +1), ("machine", -1), ("human", +1)]
        ):
            svc.record_action(entry(actor, d, at=i * 1000))
        return svc.detect_tug_of_war("uav-1")

    def test_break_cycle_curtails_dimension(self):
        svc = service()
        conflict = self.make_conflict(svc)
        svc.break_cycle(conflict, at=4000)
        assert svc.is_curtailed("uav-1", "altitude")
        assert not svc.is_curtailed("uav-1", "mode")
        status = svc.autonomy_status("uav-1")
        assert status["mode"] == "curtailed"
        assert "altitude" in status["dimensions"]

    def test_machine_restore_rejected(self):
        svc = service()
        svc.break_cycle(self.make_conflict(svc), at=4000)
        with pytest.raises(MachineRestoreError):
            svc.restore_autonomy("uav-1", "altitude", actor="machine", at=5000)
        assert svc.is_curtailed("uav-1", "altitude")

    def test_human_restore_returns_full(self):
        svc = service()
        svc.break_cycle(self.make_conflict(svc), at=4000)
        svc.restore_autonomy("uav-1", "altitude", actor="human", at=5000)
        assert svc.autonomy_status("uav-1")["mode"] == "full"

    def test_restore_all(self):
        svc = service()
        svc.curtail("uav-1", "altitude", "x", at=0)
        svc.curtail("uav-1", "mode", "y", at=0)
        svc.restore_autonomy("uav-1", "all", actor="human", at=1)
        assert svc.curtailed_dimensions("uav-1") == ()
