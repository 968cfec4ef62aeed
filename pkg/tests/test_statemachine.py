"""Task state machine construction, validation, and firing."""

import pytest

from skyloop.statemachine import (
    MachineValidationError,
    TaskStateMachine,
    default_search_machine,
)


def simple_machine():
    return TaskStateMachine(
        states=["idle", "busy", "done"],
        transitions=[("idle", "go", "busy"), ("busy", "finish", "done")],
        initial="idle",
    )


class TestValidation:
    def test_valid_machine_starts_at_initial(self):
        m = simple_machine()
        assert m.current == "idle"
        assert m.warnings == []

    def test_undeclared_endpoints_listed_together(self):
        with pytest.raises(MachineValidationError) as err:
            TaskStateMachine(
                states=["idle"],
                transitions=[("idle", "go", "ghost"), ("phantom", "x", "idle")],
                initial="idle",
            )
        text = str(err.value)
        assert "ghost" in text and "phantom" in text

    def test_empty_transitions_rejected(self):
        with pytest.raises(MachineValidationError):
            TaskStateMachine(states=["idle"], transitions=[], initial="idle")

    def test_unknown_initial_rejected(self):
        with pytest.raises(MachineValidationError):
            TaskStateMachine(
                states=["a", "b"], transitions=[("a", "e", "b")], initial="zz"
            )

    def test_nondeterministic_edge_rejected(self):
        with pytest.raises(MachineValidationError):
            TaskStateMachine(
                states=["a", "b", "c"],
                transitions=[("a", "e", "b"), ("a", "e", "c")],
                initial="a",
            )

    def test_unreachable_state_accepted_with_warning(self):
        # graph-search oracle by hand: island has no inbound edge from idle
        m = TaskStateMachine(
            states=["idle", "busy", "island", "cove"],
            transitions=[
                ("idle", "go", "busy"),
                ("island", "swim", "cove"),
            ],
            initial="idle",
        )
        assert m.reachable_states() == frozenset({"idle", "busy"})
        assert m.unreachable_states() == ("cove", "island")
        assert len(m.warnings) == 2


class TestFiring:
    def test_fire_follows_edge(self):
        m = simple_machine()
        assert m.fire("go") == "busy"
        assert m.current == "busy"

    def test_unmatched_event_is_noop(self):
        m = simple_machine()
        assert m.fire("finish") is None
        assert m.current == "idle"

    def test_can_fire_and_events_from(self):
        m = simple_machine()
        assert m.can_fire("go")
        assert not m.can_fire("finish")
        assert m.events_from() == ("go",)
        assert m.events_from("busy") == ("finish",)

    def test_reset_returns_to_initial(self):
        m = simple_machine()
        m.fire("go")
        m.reset()
        assert m.current == "idle"


class TestRecords:
    def test_round_trip(self):
        m = default_search_machine()
        again = TaskStateMachine.from_record(m.to_record())
        assert again.states == m.states
        assert again.initial == m.initial
        assert set(again.transitions) == set(m.transitions)


class TestStockMachine:
    def test_all_states_reachable(self):
        m = default_search_machine()
        assert m.unreachable_states() == ()
        assert m.warnings == []

    def test_mission_path(self):
        m = default_search_machine()
        for event, expect in [
            ("launch", "takeoff"),
            ("cruise_altitude", "searching"),
            ("victim_sighted", "victim_detected"),
            ("detection_confirmed", "tracking"),
            ("begin_delivery", "delivery"),
            ("payload_released", "RTL"),
            ("home_reached", "land"),
            ("shutdown", "standby"),
        ]:
            assert m.fire(event) == expect

    def test_low_battery_reaches_rtl_from_flight_states(self):
        m = default_search_machine()
        m.fire("launch")
        assert m.fire("low_battery") == "RTL"
