"""Console gateway, duplex socket protocol, and the command-line driver."""

import json
import threading
import time
from pathlib import Path

import httpx
import pytest
from fastapi.testclient import TestClient

from skyloop.cli import CliError, main, parse_addr
from skyloop.console_api import ConsoleGateway, FrameMailbox, build_app
from skyloop.gcs import GcsService, read_log
from skyloop.harness import compare_log_files, metrics_from_log
from skyloop.mission import parse_mission, traceability_report

DOCS_DIR = Path(__file__).resolve().parents[1] / "docs"


def mini_doc(**overrides) -> dict:
    doc = {
        "name": "mini",
        "seed": 21,
        "duration_ms": 40_000,
        "origin": [41.0, -86.0],
        "search_area": [
            [41.0, -86.0],
            [41.003, -86.0],
            [41.003, -85.996],
            [41.0, -85.996],
        ],
        "uavs": [
            {
                "id": "uav-1",
                "color": "blue",
                "route": [[41.0009, -85.9988]],
                "home": [41.0, -86.0],
                "loop_route": False,
            },
            {
                "id": "uav-2",
                "color": "green",
                "route": [],
                "home": [41.0001, -86.0],
                "auto_launch": False,
                "delivery_capable": True,
            },
        ],
        "delivery_uav": "uav-2",
        "views": [{"name": "alerts", "max_displayed": 4}],
        "alert_rules": [
            {"alert_type": "help_request", "view": "alerts", "essential": True},
            {"alert_type": "detection", "view": "alerts", "priority": 2},
        ],
        "ground_truth": {
            "victims": [{"id": "victim-1", "location": [41.0009, -85.9988]}],
            "mist_regions": [
                {"center": [41.0009, -85.9988], "radius_m": 60}
            ],
        },
    }
    doc.update(overrides)
    return doc


def make_service(doc=None) -> GcsService:
    doc = doc or mini_doc()
    return GcsService(parse_mission(doc), doc)


def drive(gcs, until_ms=None, stop=None):
    """Tick a started service exactly the way the scenario driver does,
    minus the scripted human. Inboxes persist across calls."""
    inboxes = gcs.__dict__.setdefault(
        "_test_inboxes", {name: [] for name in gcs.agents}
    )
    while True:
        if until_ms is not None and gcs.clock.now >= until_ms:
            return
        if stop is not None and stop():
            return
        deliveries = gcs.bus.advance(1)
        now = gcs.clock.now
        for env, subscriber in deliveries:
            if subscriber in inboxes:
                inboxes[subscriber].append(env)
        if now % 50 == 0:
            for name in sorted(gcs.agents):
                agent = gcs.agents[name]
                agent.inbox.extend(inboxes[name])
                inboxes[name].clear()
                agent.step(now)
        gcs.step(now)


def drive_to_open_session(gcs):
    drive(
        gcs,
        until_ms=35_000,
        stop=lambda: bool(gcs.models.coordination.open_sessions()),
    )
    assert gcs.models.coordination.open_sessions(), "no session opened by 35 s"


def recv_until(ws, pred, cap=500):
    """Read socket messages until one satisfies the predicate."""
    for _ in range(cap):
        msg = ws.receive_json()
        if pred(msg):
            return msg
    raise AssertionError("expected message never arrived")


def is_result(msg) -> bool:
    return msg.get("type") == "command_result"


class TestFrameMailbox:
    def test_latest_frame_wins(self):
        box = FrameMailbox()
        box.put({"version": 1})
        box.put({"version": 2})
        assert box.take(timeout=0) == {"version": 2}
        assert box.take(timeout=0) is None

    def test_reader_wakes_on_put(self):
        box = FrameMailbox()
        timer = threading.Timer(0.02, box.put, args=({"version": 7},))
        timer.start()
        assert box.take(timeout=5.0) == {"version": 7}
        timer.join()

    def test_close_releases_a_waiting_reader(self):
        box = FrameMailbox()
        timer = threading.Timer(0.02, box.close)
        timer.start()
        assert box.take(timeout=5.0) is None
        assert box.closed
        timer.join()


class TestConsoleGateway:
    def test_commands_are_refused_before_the_mission_runs(self):
        gateway = ConsoleGateway(make_service())
        result = gateway.execute(
            {"kind": "resolve_session", "session": "s-1",
             "decision": "confirm", "stamp": 0}
        )
        assert result == {"accepted": False, "reason": "mission is not running"}

    def test_mission_metadata_mirrors_the_document(self):
        gcs = make_service()
        gateway = ConsoleGateway(gcs)
        meta = gateway.mission_metadata()
        assert meta["name"] == "mini"
        assert meta["lifecycle"] == "configured"
        assert meta["clock"] == "lockstep"
        assert meta["seed"] == 21
        assert meta["duration_ms"] == 40_000
        assert meta["ui_refresh_ms"] == 200
        assert meta["uavs"] == [
            {"id": "uav-1", "color": "blue"},
            {"id": "uav-2", "color": "green"},
        ]
        assert meta["views"] == {"alerts": 4}
        assert meta["origin"] == [41.0, -86.0]
        assert len(meta["search_area"]) == 4
        assert set(meta["coordination"]) == {
            "waiting_period_ms", "alternation_threshold", "window_ms"
        }
        assert meta["teaming"] == traceability_report()
        gcs.start()
        assert gateway.mission_metadata()["lifecycle"] == "running"


class TestHttpEndpoint:
    def test_mission_endpoint_serves_metadata(self):
        gcs = make_service()
        client = TestClient(build_app(ConsoleGateway(gcs)))
        resp = client.get("/mission")
        assert resp.status_code == 200
        body = resp.json()
        assert body["name"] == "mini"
        assert body["lifecycle"] == "configured"
        assert any("TF1" in line for line in body["teaming"])
        gcs.start()
        assert client.get("/mission").json()["lifecycle"] == "running"


class TestConsoleSocket:
    def test_frames_flow_and_commands_round_trip(self):
        gcs = make_service()
        gateway = ConsoleGateway(gcs)
        client = TestClient(build_app(gateway))
        gcs.start()
        with client.websocket_connect("/ws") as ws:
            drive(gcs, until_ms=1000)
            frame = recv_until(ws, lambda m: m.get("type") == "frame")
            assert frame["mission"] == {"name": "mini", "lifecycle": "running"}
            assert frame["version"] >= 0
            assert "alerts" in frame["alerts"]
            assert set(frame["autonomy"]) == {"uav-1", "uav-2"}

            # frames keep coming and sim time never runs backwards
            drive(gcs, until_ms=2000)
            later = recv_until(
                ws, lambda m: m.get("type") == "frame" and m["at"] > frame["at"]
            )
            assert later["version"] >= frame["version"]

            # a help session opens; resolve it through the socket
            drive_to_open_session(gcs)
            session = gcs.models.coordination.open_sessions()[0]
            stamp = gcs.log[-1].seq
            ws.send_json({
                "type": "command",
                "seq": 11,
                "command": {
                    "kind": "resolve_session",
                    "session": session.id,
                    "decision": "confirm",
                    "stamp": stamp,
                },
            })
            result = recv_until(ws, is_result)
            assert result["seq"] == 11
            assert result["result"] == {"accepted": True, "session": session.id}
            drive(gcs, until_ms=gcs.clock.now + 2000)
            assert gcs.models.coordination.session(session.id).state == "confirmed"

            # an outdated stamp is refused and counted
            before = gcs.stale_rejections
            ws.send_json({
                "type": "command",
                "seq": 12,
                "command": {
                    "kind": "directive",
                    "uav": "uav-1",
                    "directive": {
                        "kind": "altitude_change",
                        "params": {"delta_m": -5},
                    },
                    "stamp": 0,
                },
            })
            result = recv_until(ws, is_result)
            assert result["seq"] == 12
            assert result["result"]["accepted"] is False
            assert result["result"]["reason"] == "stale"
            assert gcs.stale_rejections == before + 1
        assert not gcs._frame_subs, "socket teardown must unsubscribe"

    def test_malformed_traffic_gets_structured_rejections(self):
        gcs = make_service()
        client = TestClient(build_app(ConsoleGateway(gcs)))
        gcs.start()
        with client.websocket_connect("/ws") as ws:
            ws.send_text("{this is not json")
            result = recv_until(ws, is_result)
            assert result["seq"] is None
            assert result["result"]["reason"] == "not JSON"

            ws.send_json({"type": "hello", "seq": 3})
            result = recv_until(ws, is_result)
            assert result["seq"] == 3
            assert result["result"]["reason"] == "expected a command message"

            ws.send_json({"type": "command", "seq": 4, "command": {"kind": "bogus"}})
            result = recv_until(ws, is_result)
            assert result["seq"] == 4
            assert "unknown command kind" in result["result"]["reason"]


class TestCliFlags:
    def test_listen_address_parsing(self):
        assert parse_addr("127.0.0.1:8400") == ("127.0.0.1", 8400)
        assert parse_addr("8400") == ("127.0.0.1", 8400)
        with pytest.raises(CliError):
            parse_addr("127.0.0.1:http")

    @pytest.mark.parametrize(
        "argv",
        [
            ["--scenario", "x.json", "--replay", "y.ndjson"],
            [],
            ["--scenario", "x.json", "--listen", "127.0.0.1:0"],
            ["--scenario", "x.json", "--clock", "realtime",
             "--listen", "127.0.0.1:0", "--headless"],
        ],
    )
    def test_contradictory_flags_exit_nonzero(self, argv):
        assert main(argv) == 2

    def test_traceability_flag_prints_the_table(self, capsys):
        assert main(["--traceability"]) == 0
        out = capsys.readouterr().out
        for line in traceability_report():
            assert line in out


class TestCliRuns:
    @pytest.fixture()
    def scenario_file(self, tmp_path):
        path = tmp_path / "mini.json"
        path.write_text(json.dumps(mini_doc()), encoding="utf-8")
        return path

    def test_lockstep_run_emits_log_and_metrics(
        self, scenario_file, tmp_path, capsys
    ):
        log = tmp_path / "run.ndjson"
        metrics_path = tmp_path / "metrics.json"
        rc = main([
            "--scenario", str(scenario_file), "--headless",
            "--log", str(log), "--metrics", str(metrics_path),
        ])
        assert rc == 0
        stdout_metrics = json.loads(capsys.readouterr().out)
        assert stdout_metrics == json.loads(metrics_path.read_text())
        records = read_log(str(log))
        assert len(records) > 100
        assert metrics_from_log(records).to_record() == stdout_metrics
        assert stdout_metrics["complete"] is True

    def test_same_seed_reruns_match_and_overrides_diverge(
        self, scenario_file, tmp_path, capsys
    ):
        logs = [tmp_path / f"run{i}.ndjson" for i in range(3)]
        for log, seed in zip(logs, ("99", "99", "100")):
            assert main([
                "--scenario", str(scenario_file), "--headless",
                "--seed", seed, "--log", str(log),
            ]) == 0
        capsys.readouterr()
        assert logs[0].read_bytes() == logs[1].read_bytes()
        assert compare_log_files(str(logs[0]), str(logs[2]))[0] == "divergent"

    def test_replay_reproduces_metrics_and_rewrites_the_log(
        self, scenario_file, tmp_path, capsys
    ):
        log = tmp_path / "run.ndjson"
        assert main([
            "--scenario", str(scenario_file), "--headless", "--log", str(log),
        ]) == 0
        original = json.loads(capsys.readouterr().out)
        rewritten = tmp_path / "rewrite.ndjson"
        assert main(["--replay", str(log), "--log", str(rewritten)]) == 0
        assert json.loads(capsys.readouterr().out) == original
        assert rewritten.read_bytes() == log.read_bytes()

    def test_scripted_teammate_steers_the_outcome(
        self, scenario_file, tmp_path, capsys
    ):
        script = tmp_path / "reject.json"
        script.write_text(json.dumps({
            "availability": 1.0,
            "response_delay": {"fixed": 1500},
            "decision_policy": {"kind": "always_reject"},
        }), encoding="utf-8")
        assert main([
            "--scenario", str(scenario_file), "--headless",
            "--human-script", str(script),
        ]) == 0
        metrics = json.loads(capsys.readouterr().out)
        assert metrics["sessions"]["refuted"] >= 1
        assert metrics["sessions"]["confirmed"] == 0

    def test_unreadable_inputs_exit_nonzero(self, tmp_path, capsys):
        assert main(["--scenario", str(tmp_path / "missing.json")]) == 2
        bad = tmp_path / "bad.json"
        bad.write_text("{oops", encoding="utf-8")
        assert main(["--scenario", str(bad)]) == 2
        invalid = tmp_path / "invalid.json"
        invalid.write_text(json.dumps({"name": "bad"}), encoding="utf-8")
        assert main(["--scenario", str(invalid)]) == 2
        assert "invalid" in capsys.readouterr().err

    def test_corrupt_log_fails_replay(self, scenario_file, tmp_path, capsys):
        log = tmp_path / "run.ndjson"
        assert main([
            "--scenario", str(scenario_file), "--headless", "--log", str(log),
        ]) == 0
        lines = log.read_text(encoding="utf-8").splitlines()
        log.write_text("\n".join(lines + [lines[-1]]) + "\n", encoding="utf-8")
        capsys.readouterr()
        assert main(["--replay", str(log)]) == 2

    def test_realtime_run_produces_a_readable_log(self, tmp_path, capsys):
        path = tmp_path / "short.json"
        path.write_text(
            json.dumps(mini_doc(duration_ms=1200)), encoding="utf-8"
        )
        log = tmp_path / "realtime.ndjson"
        script = tmp_path / "fast.json"
        script.write_text(json.dumps({
            "response_delay": {"fixed": 100},
            "decision_policy": {"kind": "always_confirm"},
        }), encoding="utf-8")
        rc = main([
            "--scenario", str(path), "--clock", "realtime", "--headless",
            "--human-script", str(script), "--log", str(log),
        ])
        assert rc == 0
        metrics = json.loads(capsys.readouterr().out)
        records = read_log(str(log))
        assert records, "realtime run must persist its event log"
        assert metrics["duration_ms"] >= 1000

    def test_realtime_run_serves_the_console_while_flying(self, tmp_path):
        path = tmp_path / "served.json"
        path.write_text(
            json.dumps(mini_doc(duration_ms=2500)), encoding="utf-8"
        )
        rc_box = {}

        def fly():
            rc_box["rc"] = main([
                "--scenario", str(path), "--clock", "realtime",
                "--listen", "127.0.0.1:8471",
            ])

        thread = threading.Thread(target=fly)
        thread.start()
        body = None
        deadline = time.monotonic() + 10
        while time.monotonic() < deadline:
            try:
                resp = httpx.get("http://127.0.0.1:8471/mission", timeout=1.0)
                if resp.status_code == 200:
                    body = resp.json()
                    break
            except httpx.HTTPError:
                time.sleep(0.05)
        thread.join(timeout=30)
        assert not thread.is_alive(), "realtime run never finished"
        assert rc_box["rc"] == 0
        assert body is not None, "console endpoint never came up"
        assert body["name"] == "mini"
        assert body["lifecycle"] == "running"


class TestTraceabilityDoc:
    def test_generated_table_matches_the_code(self):
        text = (DOCS_DIR / "traceability.md").read_text(encoding="utf-8")
        for line in traceability_report():
            assert line in text, f"stale traceability doc: missing {line!r}"
