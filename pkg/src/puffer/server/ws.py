"""Asyncio websocket shell around :class:`ServerCore`.

One task per connection pumps inbound frames into the core; a single tick
task advances all rooms at the fixed rate and fans snapshots out. Slow
consumers never grow an unbounded queue: snapshots overwrite a one-slot
latest-value box, other frames go through a bounded queue that drops oldest.
"""

from __future__ import annotations

import argparse
import asyncio
import logging
import os

import websockets

from ..config import DEFAULTS, parse_overrides
from ..rooms import RoomDirectory
from .core import ServerCore

log = logging.getLogger("puffer.server")

QUEUE_LIMIT = 256


class Connection:
    def __init__(self, session_id: int):
        self.session_id = session_id
        self.queue: asyncio.Queue[str] = asyncio.Queue()
        self.latest_snapshot: str | None = None
        self.wakeup = asyncio.Event()

    def push(self, frame: str) -> None:
        if '"type":"snapshot"' in frame:
            self.latest_snapshot = frame  # drop-to-latest for slow consumers
        else:
            if self.queue.qsize() >= QUEUE_LIMIT:
                self.queue.get_nowait()
            self.queue.put_nowait(frame)
        self.wakeup.set()


class WsServer:
    def __init__(self, core: ServerCore):
        self.core = core
        self.connections: dict[int, Connection] = {}

    def deliver(self, outgoing: list[tuple[int, str]]) -> None:
        for sid, frame in outgoing:
            conn = self.connections.get(sid)
            if conn is not None:
                conn.push(frame)

    async def handle(self, ws) -> None:
        sid = self.core.open_session()
        conn = Connection(sid)
        self.connections[sid] = conn
        sender = asyncio.create_task(self._sender(ws, conn))
        try:
            async for raw in ws:
                self.deliver(self.core.handle_message(sid, raw))
        except websockets.ConnectionClosed:
            pass
        finally:
            sender.cancel()
            self.connections.pop(sid, None)
            self.core.close_session(sid)

    async def _sender(self, ws, conn: Connection) -> None:
        while True:
            await conn.wakeup.wait()
            conn.wakeup.clear()
            while not conn.queue.empty():
                await ws.send(conn.queue.get_nowait())
            snapshot, conn.latest_snapshot = conn.latest_snapshot, None
            if snapshot is not None:
                await ws.send(snapshot)

    async def tick_loop(self) -> None:
        dt = self.core.consts.dt
        loop = asyncio.get_running_loop()
        next_at = loop.time() + dt
        while True:
            await asyncio.sleep(max(0.0, next_at - loop.time()))
            next_at += dt
            self.deliver(self.core.tick_all())


async def serve(core: ServerCore, host: str, port: int) -> None:
    server = WsServer(core)
    ticker = asyncio.create_task(server.tick_loop())
    async with websockets.serve(server.handle, host, port):
        log.info("listening on ws://%s:%d", host, port)
        try:
            await asyncio.Future()
        finally:
            ticker.cancel()


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(prog="puffer-server")
    parser.add_argument("--bind", default="127.0.0.1:8765", metavar="ADDR:PORT")
    parser.add_argument("--rooms", default=os.environ.get("PUFFER_CONFIG"),
                        help="room seed config (JSON); falls back to $PUFFER_CONFIG")
    parser.add_argument("--tick-hz", type=int, default=20)
    parser.add_argument("--constants", nargs="*", default=[], metavar="KEY=VAL")
    parser.add_argument("--log-level", default="info")
    args = parser.parse_args(argv)

    logging.basicConfig(level=args.log_level.upper())
    consts = DEFAULTS.with_overrides(
        {"tick_hz": args.tick_hz} | parse_overrides(args.constants))
    if args.rooms:
        directory = RoomDirectory.from_config(args.rooms, consts)
    else:
        directory = RoomDirectory(consts)
        directory.add_room("lobby", "Lobby", ["social"], 32)
    core = ServerCore(directory, consts)
    host, _, port = args.bind.rpartition(":")
    asyncio.run(serve(core, host or "127.0.0.1", int(port)))


if __name__ == "__main__":
    main()
