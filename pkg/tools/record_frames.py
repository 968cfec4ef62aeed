"""Record console frame fixtures for the frontend test suite.

Replays the bundled scenarios headless with frame streaming switched on
and saves a handful of interesting frames as pretty-printed JSON under
frontend/test/fixtures/. Runs are seeded, so regeneration is a no-op
unless the simulation itself changed. Run from the repo root:

    python3 tools/record_frames.py
"""

import json
import os
import random
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from skyloop.bus import Outbox  # noqa: E402
from skyloop.gcs import GcsService  # noqa: E402
from skyloop.harness import (  # noqa: E402
    AGENT_STEP_MS,
    ScriptedHuman,
    load_script,
)
from skyloop.mission import parse_mission  # noqa: E402

ROOT = os.path.join(os.path.dirname(__file__), "..")
OUT = os.path.join(ROOT, "frontend", "test", "fixtures")

# the mid-mission spread the tracking view is expected to show: one
# vehicle awaiting confirmation, two searching, one holding overhead,
# one still on the pad
MIDMISSION = {
    "uav-1": "victim_detected",
    "uav-2": "searching",
    "uav-3": "searching",
    "uav-4": "surveillance",
    "uav-5": "standby",
}


def run_with_frames(scenario: str, script: str) -> list[dict]:
    """Drive one lockstep mission like the scenario harness does, but
    with a frame subscriber attached; returns every emitted frame."""
    doc = json.load(open(os.path.join(ROOT, "scenarios", scenario)))
    spec = parse_mission(doc)
    gcs = GcsService(spec, doc, clock_mode="lockstep")
    human = ScriptedHuman(
        load_script(os.path.join(ROOT, "scenarios", "scripts", script)),
        spec,
        Outbox(gcs.bus, "human"),
        random.Random(f"{gcs.seed}/human"),
    )
    gcs.bus.subscribe("gcs/coord/+", "human")

    frames: list[dict] = []
    gcs.subscribe_frames(frames.append)
    gcs.start()

    agent_order = sorted(gcs.agents)
    inboxes: dict = {name: [] for name in agent_order}
    now = 0
    while now < spec.duration_ms:
        deliveries = gcs.bus.advance(1)
        now = gcs.clock.now
        for env, subscriber in deliveries:
            if subscriber in inboxes:
                inboxes[subscriber].append(env)
            elif subscriber == "human":
                human.deliver(env, now)
        if now % AGENT_STEP_MS == 0:
            for name in agent_order:
                agent = gcs.agents[name]
                agent.inbox.extend(inboxes[name])
                inboxes[name].clear()
                agent.step(now)
        human.step(now)
        gcs.step(now)
    return frames


def tokens(frame: dict) -> dict:
    return frame["fleet"]["placement"]["tokens"]


def first(frames, pred, label):
    for frame in frames:
        if pred(frame):
            return frame
    raise SystemExit(f"no frame satisfies: {label}")


def single_move_pair(frames) -> dict:
    for before, after in zip(frames, frames[1:]):
        a, b = tokens(before), tokens(after)
        if set(a) == set(b) and sum(a[u] != b[u] for u in a) == 1:
            return {"before": before, "after": after}
    raise SystemExit("no consecutive pair moves exactly one token")


def save(name: str, payload) -> None:
    path = os.path.join(OUT, name)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {os.path.relpath(path, ROOT)}")


def main() -> None:
    os.makedirs(OUT, exist_ok=True)

    frames = run_with_frames("reference.json", "reference_confirm.json")
    print(f"reference run: {len(frames)} frames")
    save(
        "midmission.json",
        first(frames, lambda f: tokens(f) == MIDMISSION, "mid-mission spread"),
    )
    save("token_step.json", single_move_pair(frames))
    save(
        "session_open.json",
        first(
            frames,
            lambda f: any(
                s["remaining_ms"] <= 9500 for s in f["sessions"]
            ),
            "session with the countdown visibly running",
        ),
    )
    busiest = max(
        frames,
        key=lambda f: sum(len(v["displayed"]) for v in f["alerts"].values()),
    )
    save("alerts_live.json", busiest)

    tug = run_with_frames("tug_of_war.json", "tug_human.json")
    print(f"tug-of-war run: {len(tug)} frames")
    save(
        "curtailed.json",
        first(
            tug,
            lambda f: any(
                a["mode"] == "curtailed" for a in f["autonomy"].values()
            ),
            "curtailed autonomy",
        ),
    )


if __name__ == "__main__":
    main()
