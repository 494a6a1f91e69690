"""Session service: one simulated snake per WebSocket connection.

Each connection runs its own tick loop. A reader task keeps only the most
recent valid input (latest wins, stale sequence numbers dropped), so input
flooding never backs up the loop; each tick dispatches the held input
through the teleoperation state machine and emits one JSON state frame.
Ticks that overrun the period skip their emission instead of queueing.
"""

from __future__ import annotations

import asyncio
import json
import math
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import PlainTextResponse

from .frechet import discrete_frechet
from .kinematics import backbone, link_frames
from .params import SnakeParams, load_params
from .shaping import pointing_direction
from .teleop import TeleopInput, initial_state, teleop_tick


class ProtocolError(ValueError):
    pass


def parse_session_message(text: str, last_seq: int) -> TeleopInput | None:
    """Validate one client frame; returns None for stale frames (seq not
    beyond the last processed one)."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"invalid JSON: {e}") from e
    if not isinstance(msg, dict) or msg.get("type") != "input":
        raise ProtocolError("expected an 'input' message")
    try:
        pitch = float(msg["pitch"])
        yaw = float(msg["yaw"])
        b1 = bool(msg["b1"])
        b2 = bool(msg["b2"])
        seq = int(msg["seq"])
    except (KeyError, TypeError, ValueError) as e:
        raise ProtocolError(f"malformed input fields: {e}") from e
    if not (math.isfinite(pitch) and math.isfinite(yaw)):
        raise ProtocolError("pitch/yaw must be finite")
    if seq <= last_seq:
        return None
    return TeleopInput(pitch=pitch, yaw=yaw, b1=b1, b2=b2, seq=seq)


@dataclass
class Session:
    """State and latest-input mailbox of one connection."""

    params: SnakeParams
    state: object = None
    latest: TeleopInput = field(default_factory=TeleopInput)
    last_seq: int = -1
    tick_count: int = 0

    def __post_init__(self):
        self.state = initial_state(self.params)

    def offer(self, inp: TeleopInput) -> None:
        self.latest = inp
        self.last_seq = inp.seq

    def tick(self) -> dict:
        inp = self.latest
        self.state = teleop_tick(self.state, inp, self.params)
        self.tick_count += 1
        return self.state_message(inp)

    def state_message(self, inp: TeleopInput) -> dict:
        params = self.params
        q = self.state.q
        B = backbone(q, params)
        target = self.state.target_path
        if target is not None and len(target) >= 1:
            frechet_over_h = discrete_frechet(target, B) / params.h
            target_list = [[float(x) for x in p] for p in target]
        else:
            frechet_over_h = 0.0
            target_list = []
        frames = link_frames(q, params)
        p_ee = frames[-1][:3, 3]
        z_ee = frames[-1][:3, 2]
        z_cmd = pointing_direction(inp.pitch, inp.yaw)
        cosang = float(np.clip(np.dot(z_ee, z_cmd), -1.0, 1.0))
        report = self.state.report
        ee_err = 0.0
        if report is not None and report.residual_norms:
            ee_err = report.residual_norms[0] / params.h
        return {
            "type": "state",
            "tick": self.tick_count,
            "q": [float(v) for v in q],
            "link_positions": [[float(x) for x in p] for p in B],
            "target_path": target_list,
            "mode": self.state.mode,
            "metrics": {
                "frechet_over_h": float(frechet_over_h),
                "ee_pos_err_over_h": float(ee_err),
                "pointing_err_rad": float(math.acos(cosang)),
            },
            "kappa": [int(v) for v in self.state.kappa_init],
        }


def create_app(params: SnakeParams | None = None, tick_hz: float = 30.0) -> FastAPI:
    if params is None:
        params = load_params()
    app = FastAPI(title="snaketeleop session service")
    app.state.params = params
    app.state.tick_hz = tick_hz

    @app.get("/healthz", response_class=PlainTextResponse)
    async def healthz() -> str:
        return "ok"

    @app.websocket("/session")
    async def session_endpoint(ws: WebSocket) -> None:
        await ws.accept()
        sess = Session(app.state.params)
        period = 1.0 / app.state.tick_hz
        loop = asyncio.get_running_loop()

        async def reader() -> None:
            while True:
                text = await ws.receive_text()
                inp = parse_session_message(text, sess.last_seq)
                if inp is not None:
                    sess.offer(inp)

        reader_task = asyncio.create_task(reader())
        skipped = 0
        try:
            while True:
                t0 = loop.time()
                if reader_task.done():
                    reader_task.result()  # surfaces ProtocolError / disconnect
                message = await asyncio.to_thread(sess.tick)
                elapsed = loop.time() - t0
                # sends happen inline, so no backlog can build; a severely
                # overrunning tick skips its emission instead of catching up,
                # but never more than a few in a row (the stream must not
                # starve when the solver stays slower than the tick period)
                if elapsed <= 2.0 * period or skipped >= 4:
                    await ws.send_text(json.dumps(message))
                    skipped = 0
                else:
                    skipped += 1
                await asyncio.sleep(max(0.0, period - elapsed))
        except ProtocolError as e:
            try:
                await ws.send_text(json.dumps({"type": "error", "error": str(e)}))
                await ws.close(code=1002)
            except RuntimeError:
                pass
        except WebSocketDisconnect:
            pass
        finally:
            reader_task.cancel()

    return app


def serve(params: SnakeParams | None = None, host: str = "127.0.0.1",
          port: int = 8700, tick_hz: float = 30.0) -> None:
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(params, tick_hz=tick_hz), host=host, port=port, log_level="warning")
