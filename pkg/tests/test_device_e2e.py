"""End-to-end: simulator over real TCP into the host stack."""

import threading
import time

import pytest

from conftest import clean_scenario
from pulmobell.codes import CommandCode, EventCode
from pulmobell.host.device_server import DeviceTCPServer
from pulmobell.host.store import SessionStore
from pulmobell.session.types import Regimen
from pulmobell.sim.device import DeviceSimulator
from pulmobell.sim.profiles import ScenarioScript
from pulmobell.transport import TcpTransport


@pytest.fixture
def host(tmp_path):
    store = SessionStore(tmp_path / "data")
    server = DeviceTCPServer("127.0.0.1", 0, store)
    server.start()
    yield store, server.port
    server.stop()
    store.close()


def run_sim_over_tcp(store, port, scenario, clock="accelerated"):
    record, token = store.create_session(scenario.regimen)
    transport = TcpTransport.connect("127.0.0.1", port)
    sim = DeviceSimulator(scenario, transport, clock=clock, token=token)
    report = sim.run()
    return record, report, sim


def wait_for(predicate, timeout=5.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if predicate():
            return True
        time.sleep(0.02)
    return False


def event_codes(store, session_id):
    return [
        r.payload["code"] for r in store.records(session_id) if r.kind == "event"
    ]


def test_clean_session_over_tcp(host):
    store, port = host
    scenario = clean_scenario(sets=2, rest_s=5.0)
    record, report, _ = run_sim_over_tcp(store, port, scenario)
    assert report.outcome == "completed"
    assert report.transport_error is None

    # ingestion is async to the device loop finishing; wait for the tail
    assert wait_for(lambda: int(EventCode.COMPLETED) in event_codes(store, record.id))
    summary = store.summary(record.id)
    assert summary.total_reps == 20
    assert summary.outcome == "completed"
    records = store.records(record.id)
    assert all(r.kind != "gap" for r in records)  # lossless transport

    kinds = {r.kind for r in records}
    assert {"event", "metric", "raw", "rep"} <= kinds

    # device disconnect after a terminal event closes the session
    assert wait_for(lambda: store.get(record.id).status == "closed")


def test_live_command_pause_and_stop(host):
    store, port = host
    scenario = ScenarioScript(
        seed=1,
        regimen=Regimen(sets=1, rest_s=5.0, start_level=2, max_level=2),
        max_s=90.0,
    )
    record, token = store.create_session(scenario.regimen)
    transport = TcpTransport.connect("127.0.0.1", port)
    sim = DeviceSimulator(scenario, transport, clock="real", token=token)
    thread = threading.Thread(target=sim.run)
    thread.start()
    try:
        assert wait_for(lambda: int(EventCode.SET_START) in event_codes(store, record.id))
        status = store.submit_command(record.id, int(CommandCode.PAUSE), timeout=3.0)
        assert status == 0
        assert wait_for(lambda: int(EventCode.PAUSED) in event_codes(store, record.id))

        status = store.submit_command(record.id, int(CommandCode.RESUME), timeout=3.0)
        assert status == 0
        assert wait_for(lambda: int(EventCode.RESUMED) in event_codes(store, record.id))

        # steering over the wire: set pm2.5 to a poor value -> warning event
        status = store.submit_steering(record.id, "pm25", 60.0, timeout=3.0)
        assert status == 0
        assert wait_for(
            lambda: int(EventCode.WARNING) in event_codes(store, record.id), timeout=15.0
        )

        status = store.submit_command(record.id, int(CommandCode.STOP), timeout=3.0)
        assert status == 0
        assert wait_for(lambda: int(EventCode.ABORTED) in event_codes(store, record.id))
    finally:
        thread.join(timeout=30.0)
    assert not thread.is_alive()


def test_out_of_range_steering_acks_nonzero(host):
    store, port = host
    scenario = ScenarioScript(
        seed=2,
        regimen=Regimen(sets=1, rest_s=5.0, start_level=1, max_level=1),
        max_s=60.0,
    )
    record, token = store.create_session(scenario.regimen)
    transport = TcpTransport.connect("127.0.0.1", port)
    sim = DeviceSimulator(scenario, transport, clock="real", token=token)
    thread = threading.Thread(target=sim.run)
    thread.start()
    try:
        assert wait_for(lambda: int(EventCode.SET_START) in event_codes(store, record.id))
        assert store.submit_steering(record.id, "hr_bpm", 300.0, timeout=3.0) == 1
        assert store.submit_command(record.id, int(CommandCode.STOP), timeout=3.0) == 0
    finally:
        thread.join(timeout=30.0)


def test_apply_steering_directly_validates():
    from pulmobell.errors import SteeringError
    from pulmobell.sim.profiles import SteeringCommand

    scenario = clean_scenario(sets=1)
    from pulmobell.transport import pipe_pair

    a, _ = pipe_pair()
    sim = DeviceSimulator(scenario, a, token=None)
    with pytest.raises(SteeringError):
        sim.apply_steering(SteeringCommand(field="hr_bpm", value=500.0))
    sim.apply_steering(SteeringCommand(field="spo2_target", value=88.0))
