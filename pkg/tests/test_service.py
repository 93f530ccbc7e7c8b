"""End-to-end websocket service tests: frames stream in order and commands
round-trip through the same session the ticker drives."""

import asyncio
import contextlib
import json

import pytest
import websockets

from gridswarm.scenarios import builtin_scenario
from gridswarm.service import SessionServer

pytestmark = pytest.mark.anyio


@contextlib.asynccontextmanager
async def running_server(config, port, **kwargs):
    server = SessionServer(config, tick_interval_s=0.005,
                           iteration_interval_s=0.01, **kwargs)
    async with websockets.serve(server._handler, "127.0.0.1", port):
        ticker = asyncio.create_task(server._ticker())
        try:
            yield server
        finally:
            ticker.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await ticker


@pytest.fixture
def anyio_backend():
    return "asyncio"


async def recv_frame(ws, timeout=5.0):
    while True:
        doc = json.loads(await asyncio.wait_for(ws.recv(), timeout))
        if "frame" in doc:
            return doc


async def test_initial_frame_and_streaming():
    async with running_server(builtin_scenario("dispatch3"), 8761):
        async with websockets.connect("ws://127.0.0.1:8761") as ws:
            first = await recv_frame(ws)
            roles = [r["role"] for r in first["robots"]]
            assert roles.count("node") == 3
            assert roles.count("messenger") == 4
            seqs = [first["frame"]]
            for _ in range(5):
                seqs.append((await recv_frame(ws))["frame"])
            assert seqs == sorted(seqs)
            assert len(set(seqs)) == len(seqs)


async def test_commands_drive_the_session():
    async with running_server(builtin_scenario("case1"), 8762) as server:
        async with websockets.connect("ws://127.0.0.1:8762") as ws:
            await recv_frame(ws)
            await ws.send(json.dumps({"cmd": "start"}))
            deadline = asyncio.get_event_loop().time() + 5.0
            frame = await recv_frame(ws)
            while frame["iteration"] == 0:
                assert asyncio.get_event_loop().time() < deadline
                frame = await recv_frame(ws)
            await ws.send(json.dumps({"cmd": "pause"}))
            deadline = asyncio.get_event_loop().time() + 5.0
            while server.session.running:
                assert asyncio.get_event_loop().time() < deadline
                await asyncio.sleep(0.005)


async def test_bad_command_reports_error_and_session_survives():
    async with running_server(builtin_scenario("case1"), 8763):
        async with websockets.connect("ws://127.0.0.1:8763") as ws:
            await recv_frame(ws)
            await ws.send(json.dumps({"cmd": "move_robot", "id": 99,
                                      "x_mm": 1.0, "y_mm": 1.0}))
            while True:
                doc = json.loads(await asyncio.wait_for(ws.recv(), 5.0))
                if "error" in doc:
                    break
            assert "unknown robot" in doc["error"]
            # still serving frames afterwards
            assert (await recv_frame(ws))["values"] == [1.0, 2.0, 3.0, 4.0]


async def test_empty_session_serves_and_accepts_nothing_gracefully():
    async with running_server(None, 8764):
        async with websockets.connect("ws://127.0.0.1:8764") as ws:
            frame = await recv_frame(ws)
            assert frame["robots"] == []
            await ws.send(json.dumps({"cmd": "start"}))
            assert (await recv_frame(ws))["iteration"] == 0
