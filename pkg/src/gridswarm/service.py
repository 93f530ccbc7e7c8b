"""WebSocket service streaming session frames and accepting commands.

One server owns one session.  Client messages are the wire-format command
dicts understood by Session.apply_command; every tick the server advances
the scene (and, on the iteration cadence, the algorithm) and broadcasts one
frame to every client.  Frames carry strictly increasing sequence numbers,
so a client sees a gapless ordered stream.
"""

from __future__ import annotations

import asyncio
import json

import websockets

from .scenarios import ScenarioConfig
from .session import CommandError, Session

__all__ = ["SessionServer", "serve_forever"]


class SessionServer:
    def __init__(self, config: ScenarioConfig | None = None,
                 tick_interval_s: float = 1 / 30,
                 iteration_interval_s: float = 1.0,
                 autostart: bool = False):
        self.session = Session(config)
        self.tick_interval_s = tick_interval_s
        self.iteration_interval_s = iteration_interval_s
        self.session.running = autostart
        self._clients: set = set()
        self._since_iteration = 0.0

    async def _broadcast(self):
        if not self._clients:
            return
        frame = self.session.snapshot().to_json()
        await asyncio.gather(
            *(client.send(frame) for client in self._clients),
            return_exceptions=True,
        )

    async def _ticker(self):
        while True:
            await asyncio.sleep(self.tick_interval_s)
            if self.session.graph is not None:
                self.session.tick_scene(self.tick_interval_s)
                if self.session.running and not self.session.converged:
                    self._since_iteration += self.tick_interval_s
                    if self._since_iteration >= self.iteration_interval_s:
                        self._since_iteration = 0.0
                        self.session.step_iteration()
            await self._broadcast()

    async def _handler(self, websocket):
        self._clients.add(websocket)
        try:
            await websocket.send(self.session.snapshot().to_json())
            async for raw in websocket:
                try:
                    cmd = json.loads(raw)
                    self.session.apply_command(cmd)
                    await self._broadcast()
                except (CommandError, ValueError, KeyError) as e:
                    await websocket.send(json.dumps({"error": str(e)}))
        finally:
            self._clients.discard(websocket)

    async def run(self, host: str = "127.0.0.1", port: int = 8080):
        async with websockets.serve(self._handler, host, port):
            ticker = asyncio.create_task(self._ticker())
            try:
                await asyncio.Future()
            finally:
                ticker.cancel()


def serve_forever(config: ScenarioConfig | None, host: str = "127.0.0.1",
                  port: int = 8080, tick_interval_s: float = 1 / 30,
                  iteration_interval_s: float = 1.0, autostart: bool = False):
    server = SessionServer(config, tick_interval_s, iteration_interval_s, autostart)
    asyncio.run(server.run(host, port))
