"""WebSocket endpoint bridging the operator console to a live world.

The world ticks at 50 Hz wall clock; envelopes cross a simulated link in
both directions, scheduled in sim time so a recorded session replays
deterministically. When a console build is present (frontend/dist), the
server also serves it at /.
"""

from __future__ import annotations

import asyncio
import heapq
import time
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.staticfiles import StaticFiles

from .config import SimConfig, TICK_DT_S
from .errors import ProtocolError
from .protocol import Envelope, Link, LinkModel, decode, encode, session
from .runner import envelope_dict, write_log
from .scenario import Scenario
from .world import World


class LiveSession:
    """Single live world plus link scheduling; owned by the server's event loop."""

    def __init__(self, scenario: Scenario, cfg: SimConfig, link_model: LinkModel, log_path: str | None):
        self.scenario = scenario
        self.cfg = cfg
        self.world = World(scenario, cfg, live_operator=True)
        self.link_in = Link(link_model)
        self.link_out = Link(link_model)
        self.pending_in: list[tuple[float, int, Envelope]] = []
        self.pending_out: list[tuple[float, int, bytes]] = []
        self._counter = 0
        self.clients: set[WebSocket] = set()
        self.env_lines: list[dict] = []
        self.log_path = log_path

    def hello_payload(self) -> dict:
        cam = self.world.robot.cam
        return session(
            "hello",
            condition=self.scenario.condition,
            layout_id=self.scenario.layout_id,
            leader=self.scenario.leader,
            arena={"width": self.scenario.arena.width, "height": self.scenario.arena.height},
            boards=[
                {
                    "id": b.id,
                    "x": b.pose.x,
                    "y": b.pose.y,
                    "facing_rad": b.pose.heading,
                    "content": b.has_content,
                }
                for b in self.scenario.boards
            ],
            image_width=cam.image_width,
            image_height=cam.image_height,
            hfov_rad=cam.hfov,
        )

    def ingest(self, data: bytes) -> None:
        """Console -> sim: decode, pass through the link, queue for delivery."""
        try:
            env = decode(data)
        except ProtocolError:
            return  # malformed or unknown input is dropped, never fatal
        deliver_at = self.link_in.transmit(env, float(self.world.sim_time_ms))
        if deliver_at is None:
            return
        self._counter += 1
        heapq.heappush(self.pending_in, (deliver_at, self._counter, env))

    def tick_once(self) -> list[bytes]:
        """Advance one sim tick; returns wire frames due for sending now."""
        now = float(self.world.sim_time_ms)
        inbound: list[Envelope] = []
        while self.pending_in and self.pending_in[0][0] <= now:
            inbound.append(heapq.heappop(self.pending_in)[2])
        tick_index = self.world.tick_count
        out = self.world.tick(inbound)
        if self.log_path is not None:
            for env in inbound:
                self.env_lines.append({"kind": "env", "dir": "in", "tick": tick_index, "env": envelope_dict(env)})
            for env in out:
                self.env_lines.append({"kind": "env", "dir": "out", "tick": tick_index, "env": envelope_dict(env)})
        send_time = float(self.world.sim_time_ms)
        for env in out:
            deliver_at = self.link_out.transmit(env, send_time)
            if deliver_at is None:
                continue
            self._counter += 1
            heapq.heappush(self.pending_out, (deliver_at, self._counter, encode(env)))
        frames: list[bytes] = []
        while self.pending_out and self.pending_out[0][0] <= send_time:
            frames.append(heapq.heappop(self.pending_out)[2])
        return frames

    def finalize(self) -> None:
        if self.log_path is None:
            return
        write_log(
            Path(self.log_path),
            self.scenario,
            self.cfg,
            self.world,
            self.env_lines,
            self.world.state_hash(),
            self.world.done,
        )


async def _run_loop(sess: LiveSession, stop: asyncio.Event) -> None:
    next_tick = time.monotonic()
    while not stop.is_set():
        frames = sess.tick_once()
        if frames and sess.clients:
            stale: list[WebSocket] = []
            # snapshot: the endpoint coroutine mutates the set between awaits
            for ws in list(sess.clients):
                try:
                    for frame in frames:
                        await ws.send_bytes(frame)
                except Exception:
                    stale.append(ws)
            for ws in stale:
                sess.clients.discard(ws)
        next_tick += TICK_DT_S
        delay = next_tick - time.monotonic()
        if delay > 0:
            await asyncio.sleep(delay)
        else:
            next_tick = time.monotonic()  # fell behind: resynchronize


def create_app(
    scenario: Scenario,
    cfg: SimConfig | None = None,
    link_model: LinkModel | None = None,
    log_path: str | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    cfg = cfg or SimConfig()
    link_model = link_model or LinkModel()
    sess = LiveSession(scenario, cfg, link_model, log_path)
    stop = asyncio.Event()

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        task = asyncio.create_task(_run_loop(sess, stop))
        try:
            yield
        finally:
            stop.set()
            await task
            sess.finalize()

    app = FastAPI(lifespan=lifespan)
    app.state.session = sess

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        await ws.send_bytes(encode(Envelope("event", 0, sess.world.sim_time_ms, sess.hello_payload())))
        sess.clients.add(ws)
        try:
            while True:
                message = await ws.receive()
                if message.get("type") == "websocket.disconnect":
                    break
                data = message.get("bytes")
                if data is None and message.get("text") is not None:
                    data = message["text"].encode("utf-8")
                if data:
                    for line in data.splitlines():
                        if line:
                            sess.ingest(line)
        except WebSocketDisconnect:
            pass
        finally:
            sess.clients.discard(ws)

    root = Path(static_dir) if static_dir else Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if root.is_dir():
        app.mount("/", StaticFiles(directory=str(root), html=True), name="console")
    return app
