"""Regenerate the bundled scenario and human-script files.

Geometry is authored in local metres around a fixed origin and baked
into lat/lon so the committed JSON stays plain. Run from the repo root:

    python3 tools/make_scenarios.py
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from skyloop.world import GeoPoint, LocalFrame  # noqa: E402

ORIGIN = GeoPoint(41.0, -86.0)
FRAME = LocalFrame(ORIGIN)
OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def geo(x: float, y: float) -> list[float]:
    p = FRAME.to_geo(x, y)
    return [round(p.lat, 9), round(p.lon, 9)]


def geos(*points) -> list[list[float]]:
    return [geo(x, y) for x, y in points]


def reference() -> dict:
    """Five-vehicle river sweep: one victim inside a mist bank.

    Blue flies straight through the mist and finds the victim around
    t=20 s; green is the flotation-device courier, dispatched on
    confirmation. Red and orange patrol clear air; purple is steered to
    surveillance by script at t=15 s, which pins the five-token
    tracking-view placement (standby, searching x2, surveillance,
    victim detected) for the window while blue waits on the human.
    """
    return {
        "name": "river-sweep-reference",
        "seed": 42,
        "duration_ms": 180_000,
        "ui_refresh_ms": 200,
        "origin": geo(0, 0),
        "search_area": geos((-80, -80), (520, -80), (520, 400), (-80, 400)),
        "uavs": [
            {
                "id": "uav-1",
                "color": "blue",
                "home": geo(0, 200),
                "route": geos((400, 200)),
                "loop_route": False,
            },
            {
                "id": "uav-2",
                "color": "red",
                "home": geo(10, -10),
                "route": geos((0, 60), (400, 60), (400, 100), (0, 100)),
            },
            {
                "id": "uav-3",
                "color": "orange",
                "home": geo(30, -10),
                "route": geos((0, 320), (400, 320)),
            },
            {
                "id": "uav-4",
                "color": "purple",
                "home": geo(-20, 10),
                "route": geos((-40, 80), (-40, 280)),
            },
            {
                "id": "uav-5",
                "color": "green",
                "home": geo(60, -40),
                "route": [],
                "auto_launch": False,
                "delivery_capable": True,
            },
        ],
        "delivery_uav": "uav-5",
        "views": [
            {"name": "alerts", "max_displayed": 4},
            {"name": "map", "max_displayed": 3},
        ],
        "alert_rules": [
            {"alert_type": "help_request", "view": "alerts", "essential": True},
            {"alert_type": "battery_low", "view": "alerts", "essential": True},
            {"alert_type": "tug_of_war", "view": "alerts", "essential": True},
            {"alert_type": "detection", "view": "alerts", "priority": 2},
            {"alert_type": "human_timeout", "view": "alerts", "priority": 2},
            {"alert_type": "weather_adaptation", "view": "alerts", "priority": 3},
            {"alert_type": "detection", "view": "map", "priority": 2},
            {"alert_type": "weather_adaptation", "view": "map", "priority": 3},
        ],
        "coordination": {
            "waiting_period_ms": 10_000,
            "alternation_threshold": 3,
            "window_ms": 30_000,
        },
        "service_classes": {"critical": 50, "standard": 250},
        "ground_truth": {
            "victims": [{"id": "victim-1", "location": geo(180, 200)}],
            "mist_regions": [{"center": geo(180, 200), "radius_m": 60}],
        },
        "refresh_plan": [
            {
                "attribute": "uav_position",
                "probe": "telemetry",
                "interval_ms": 50,
                "consumers": [
                    {"model": "fleet", "required_interval_ms": 200},
                    {"model": "coordination", "required_interval_ms": 500},
                ],
            },
            {
                "attribute": "battery_level",
                "probe": "telemetry",
                "interval_ms": 50,
                "consumers": [{"model": "fleet", "required_interval_ms": 1000}],
            },
            {
                "attribute": "detection_scores",
                "probe": "camera",
                "interval_ms": 50,
                "consumers": [
                    {"model": "trust", "required_interval_ms": 50},
                    {"model": "explanation", "required_interval_ms": 200},
                ],
            },
        ],
    }


def trust_training() -> dict:
    """Single vehicle circling one victim in mist; every sighting asks
    for help, so an accurate scripted oracle ratchets trust upward."""
    return {
        "name": "trust-training",
        "seed": 7,
        "duration_ms": 150_000,
        "origin": geo(0, 0),
        "search_area": geos((-60, -60), (160, -60), (160, 160), (-60, 160)),
        "uavs": [
            {
                "id": "uav-1",
                "color": "blue",
                "home": geo(0, 40),
                "route": geos((40, 40)),
                "loop_route": False,
                "battery_rate_pct_s": 0.02,
            }
        ],
        "views": [{"name": "alerts", "max_displayed": 4}],
        "alert_rules": [
            {"alert_type": "help_request", "view": "alerts", "essential": True},
            {"alert_type": "detection", "view": "alerts", "priority": 2},
        ],
        "ground_truth": {
            "victims": [{"id": "victim-1", "location": geo(50, 40)}],
            "mist_regions": [{"center": geo(40, 40), "radius_m": 80}],
        },
    }


def tug_of_war() -> dict:
    """Mist everywhere, no victims: the machine keeps shedding altitude
    while the scripted human keeps raising it, until curtailment."""
    return {
        "name": "tug-of-war-drill",
        "seed": 5,
        "duration_ms": 60_000,
        "origin": geo(0, 0),
        "search_area": geos((-60, -60), (360, -60), (360, 60), (-60, 60)),
        "uavs": [
            {
                "id": "uav-1",
                "color": "blue",
                "home": geo(0, 0),
                "route": geos((300, 0)),
                "loop_route": False,
                "battery_rate_pct_s": 0.02,
            }
        ],
        "views": [{"name": "alerts", "max_displayed": 4}],
        "alert_rules": [
            {"alert_type": "tug_of_war", "view": "alerts", "essential": True},
            {"alert_type": "weather_adaptation", "view": "alerts", "priority": 3},
        ],
        "ground_truth": {
            "victims": [],
            "mist_regions": [{"center": geo(100, 0), "radius_m": 500}],
        },
    }


PURPLE_SURVEY = {
    "at": 15_000,
    "uav": "uav-4",
    "kind": "goal_update",
    "params": {"goal": "surveillance"},
}

SCRIPTS = {
    "reference_confirm": {
        "availability": 1.0,
        "response_delay": {"fixed": 2000},
        "decision_policy": {"kind": "always_confirm"},
        "directives": [PURPLE_SURVEY],
    },
    "reference_reject": {
        "availability": 1.0,
        "response_delay": {"fixed": 2000},
        "decision_policy": {"kind": "always_reject"},
        "directives": [PURPLE_SURVEY],
    },
    "reference_unavailable": {
        "availability": 0.0,
        "response_delay": {"fixed": 2000},
        "decision_policy": {"kind": "always_confirm"},
        "directives": [PURPLE_SURVEY],
    },
    "reference_slow": {
        "availability": 1.0,
        "response_delay": {"fixed": 9000},
        "decision_policy": {"kind": "always_confirm"},
        "directives": [PURPLE_SURVEY],
    },
    "reference_fast": {
        "availability": 1.0,
        "response_delay": {"fixed": 1000},
        "decision_policy": {"kind": "always_confirm"},
        "directives": [PURPLE_SURVEY],
    },
    "trust_oracle": {
        "availability": 1.0,
        "response_delay": {"fixed": 1000},
        "decision_policy": {"kind": "ground_truth_oracle", "accuracy": 1.0},
        "directives": [
            {
                "at": at,
                "uav": "uav-1",
                "kind": "goal_update",
                "params": {"goal": "searching"},
            }
            for at in range(20_000, 150_000, 10_000)
        ],
    },
    "tug_human": {
        "availability": 1.0,
        "response_delay": {"fixed": 2000},
        "decision_policy": {"kind": "always_confirm"},
        "directives": [
            {
                "at": 20_000,
                "uav": "uav-1",
                "kind": "altitude_change",
                "params": {"delta_m": 8},
            },
            {
                "at": 25_000,
                "uav": "uav-1",
                "kind": "altitude_change",
                "params": {"delta_m": 8},
            },
            {
                "at": 35_000,
                "uav": "uav-1",
                "kind": "restore_autonomy",
                "params": {"dimension": "altitude"},
            },
        ],
    },
}


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    scripts_dir = os.path.join(OUT, "scripts")
    os.makedirs(scripts_dir, exist_ok=True)
    for name, doc in (
        ("reference", reference()),
        ("trust_training", trust_training()),
        ("tug_of_war", tug_of_war()),
    ):
        path = os.path.join(OUT, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path}")
    for name, doc in SCRIPTS.items():
        path = os.path.join(scripts_dir, f"{name}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
