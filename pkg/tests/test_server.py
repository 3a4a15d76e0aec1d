import json
import socket
import threading
import time

import httpx
import pytest
import uvicorn

from planloop.resources import data_dir, data_path
from planloop.scenario import load_scenario, run_scenario
from planloop.server import create_app

CLEANING_ANSWERS = [
    {"kind": "confirms_new"},
    {"kind": "attribute", "value": "object"},  # type
    *[{"kind": "attribute", "value": False} for _ in range(7)],  # capability slots
    {"kind": "attribute", "value": "kitchen"},  # location
]


@pytest.fixture(scope="module")
def service():
    with socket.socket() as probe:
        probe.bind(("127.0.0.1", 0))
        port = probe.getsockname()[1]
    app = create_app(base_dir=data_dir())
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("service did not start")
        time.sleep(0.02)
    with httpx.Client(base_url=f"http://127.0.0.1:{port}", timeout=10.0) as client:
        yield client
    server.should_exit = True
    thread.join(timeout=5)


def create_session(service, path="cleaning/scenarios/mop_countertop.json", **extra):
    response = service.post("/sessions", json={"scenario_path": path, **extra})
    assert response.status_code == 201, response.text
    return response.json()["id"]


def sse_events(service, session_id, after=0, follow="false", headers=None):
    events = []
    with service.stream(
        "GET",
        f"/sessions/{session_id}/events?after={after}&follow={follow}",
        headers=headers or {},
    ) as response:
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        for line in response.iter_lines():
            if line.startswith("data: "):
                events.append(json.loads(line[len("data: "):]))
    return events


def drive_to_done(service, session_id):
    for answer in CLEANING_ANSWERS:
        response = service.post(f"/sessions/{session_id}/answer", json=answer)
        assert response.status_code == 200, response.text
    return service.get(f"/sessions/{session_id}").json()


def test_create_and_snapshot(service):
    session_id = create_session(service)
    snapshot = service.get(f"/sessions/{session_id}").json()
    assert snapshot["phase"] == "AwaitingHuman"
    assert snapshot["pending_query"] == {
        "kind": "existence_check",
        "token": "mopping_cloth",
        "mismatch": {"kind": "unknown_object", "token": "mopping_cloth", "step": 1},
    }
    assert snapshot["feedback_count"] == snapshot["feedback_budget"] == 2


def test_unknown_session_404(service):
    assert service.get("/sessions/sx").status_code == 404
    assert service.post("/sessions/sx/answer", json={"kind": "confirms_new"}).status_code == 404


def test_bad_scenario_payload_400(service):
    assert service.post("/sessions", json={}).status_code == 400
    assert service.post("/sessions", json={"scenario_path": "missing.json"}).status_code == 400


def test_answer_flow_reaches_done_and_grows_kg(service):
    session_id = create_session(service)
    before = service.get(f"/sessions/{session_id}/kg").json()
    snapshot = drive_to_done(service, session_id)
    assert snapshot["phase"] == "Done"
    after = service.get(f"/sessions/{session_id}/kg").json()
    assert "mopping_cloth" in after["entities"]
    assert after["nodes"] >= before["nodes"] and after["edges"] > before["edges"]
    progress = service.get(f"/sessions/{session_id}/progress")
    assert progress.status_code == 200
    assert "countertop" in progress.text


def test_answer_after_done_is_409(service):
    session_id = create_session(service)
    drive_to_done(service, session_id)
    response = service.post(f"/sessions/{session_id}/answer", json={"kind": "confirms_new"})
    assert response.status_code == 409


def test_invalid_answer_is_400(service):
    session_id = create_session(service)
    assert (
        service.post(f"/sessions/{session_id}/answer", json={"kind": "correction"}).status_code
        == 400
    )
    assert (
        service.post(f"/sessions/{session_id}/answer", json={"kind": "attribute", "value": True}).status_code
        == 400
    )  # existence check pending, not an attribute slot


def test_event_stream_is_dense_and_ordered(service):
    session_id = create_session(service)
    drive_to_done(service, session_id)
    events = sse_events(service, session_id)
    assert [e["seq"] for e in events] == list(range(1, len(events) + 1))
    names = [e["event"] for e in events]
    assert names[0] == "session_started"
    assert "expansion_applied" in names
    assert {"event": "phase", "to": "Done", "seq": events[-1]["seq"]} == events[-1]


def test_event_stream_reconnect_replays_without_gaps(service):
    session_id = create_session(service)
    drive_to_done(service, session_id)
    full = sse_events(service, session_id)
    head = full[:5]
    tail = sse_events(service, session_id, after=5)
    assert head + tail == full
    via_header = sse_events(service, session_id, headers={"Last-Event-ID": "5"})
    assert via_header == tail


def test_follow_stream_closes_on_terminal(service):
    session_id = create_session(service)

    collected = []

    def reader():
        collected.extend(sse_events(service, session_id, follow="true"))

    thread = threading.Thread(target=reader)
    thread.start()
    time.sleep(0.15)  # let the stream attach while the session waits
    drive_to_done(service, session_id)
    thread.join(timeout=10)
    assert not thread.is_alive()
    assert [e["seq"] for e in collected] == list(range(1, len(collected) + 1))
    assert collected[-1] == {"event": "phase", "to": "Done", "seq": collected[-1]["seq"]}


def test_expansion_points_non_decreasing(service):
    session_id = create_session(service)
    drive_to_done(service, session_id)
    events = sse_events(service, session_id)
    points = [(e["nodes"], e["edges"]) for e in events if e["event"] == "expansion_applied"]
    assert len(points) == 1
    stats = service.get(f"/sessions/{session_id}/kg").json()
    assert points[0] == (stats["nodes"], stats["edges"])


def test_service_trace_matches_in_process_run(service):
    session_id = create_session(service)
    drive_to_done(service, session_id)
    events = sse_events(service, session_id)
    service_trace = [{k: v for k, v in e.items() if k != "seq"} for e in events]
    scenario = load_scenario(data_path("cleaning", "scenarios", "mop_countertop.json"))
    result, _ = run_scenario(scenario)
    in_process = [json.loads(json.dumps(e)) for e in result.events]
    assert service_trace == in_process


def test_inline_scenario_and_configuration_override(service):
    raw = json.loads(data_path("cleaning", "scenarios", "dust_tv.json").read_text())
    for key in ("state_graph", "attribute_graph", "capability_map", "schemas", "lexicon", "llm_script"):
        raw[key] = f"cleaning/{raw[key].removeprefix('../')}"
    response = service.post(
        "/sessions", json={"scenario": raw, "id": "dust_tv", "configuration": "LLM_only"}
    )
    assert response.status_code == 201
    body = response.json()
    snapshot = service.get(f"/sessions/{body['id']}").json()
    assert snapshot["configuration"] == "LLM_only"
    assert snapshot["phase"] == "Done"
