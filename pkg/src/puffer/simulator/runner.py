"""Deterministic scenario runs over the in-process server core.

``run_scenario`` never opens a socket: bots talk to :class:`ServerCore`
directly through the same message handlers the websocket shell uses, and the
event log is canonical JSONL so identical (script, seed) pairs produce
byte-identical logs. ``run_scenario_over_wire`` replays a script through the
real transport as a smoke test; it is wall-clock driven and excluded from
any golden comparison.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .. import safety
from ..config import Constants, DEFAULTS
from ..errors import InvalidScript
from ..rooms import RoomDirectory
from ..server.core import ServerCore
from ..types import (
    BubbleConfig,
    HARD,
    Pose,
    canonical_json,
)
from .client import SimClient
from .policies import Bot, make_bot
from .scenario import ROLE_HUMAN, ROLE_TAGGER, ScenarioScript


@dataclass
class RunMetrics:
    access_path: str
    seed: int
    tagged_before_activation: bool = False
    time_to_activation_s: Optional[float] = None
    first_tag_s: Optional[float] = None
    alerts_raised: int = 0
    suggestions_sent: int = 0
    suggestions_delivered: int = 0
    suggestions_accepted: int = 0
    suggestions_blocked: int = 0
    cooldowns: int = 0
    violations: int = 0

    def to_obj(self) -> dict:
        return {
            "access_path": self.access_path,
            "alerts_raised": self.alerts_raised,
            "cooldowns": self.cooldowns,
            "first_tag_s": self.first_tag_s,
            "seed": self.seed,
            "suggestions_accepted": self.suggestions_accepted,
            "suggestions_blocked": self.suggestions_blocked,
            "suggestions_delivered": self.suggestions_delivered,
            "suggestions_sent": self.suggestions_sent,
            "tagged_before_activation": self.tagged_before_activation,
            "time_to_activation_s": self.time_to_activation_s,
            "violations": self.violations,
        }


@dataclass
class _Runner:
    core: ServerCore
    clients: dict[int, SimClient] = field(default_factory=dict)  # session -> client

    def route(self, outgoing: list[tuple[int, str]]) -> list[dict]:
        """Feed frames to their clients; returns the parsed frames for
        metric interception."""
        parsed = []
        for sid, frame in outgoing:
            obj = json.loads(frame)
            parsed.append(obj)
            client = self.clients.get(sid)
            if client is not None:
                client.feed_obj(obj)
        return parsed


def _setup_member(core: ServerCore, runner: _Runner, member, room_id: str,
                  consts: Constants) -> tuple[int, SimClient]:
    sid = core.open_session()
    client = SimClient()
    runner.clients[sid] = client
    runner.route(core.handle_message(sid, client.envelope("hello", {"name": member.name})))
    runner.route(core.handle_message(sid, client.envelope("join_room", {"room_id": room_id})))
    pid = client.player_id
    state = core.rooms[room_id].state
    player = state.players[pid]
    player.pose = Pose(float(member.pos[0]), float(member.pos[1]),
                       float(member.facing) % (2.0 * math.pi))
    if member.bubble:
        cfg = BubbleConfig(
            enabled=bool(member.bubble.get("enabled", False)),
            boundary=member.bubble.get("boundary", HARD),
            radius_al=float(member.bubble.get("radius_al", consts.default_radius_al)),
            alerts_enabled=bool(member.bubble.get("alerts_enabled", True)),
        )
        safety.validate_bubble(cfg, consts)
        player.bubble = cfg
    for slot in sorted(member.badges):
        safety.set_badge(state, pid, slot, member.badges[slot], consts)
    return pid, client


def run_scenario(
    script: ScenarioScript,
    consts: Constants = DEFAULTS,
    audit: bool = False,
    run_index: int = 0,
) -> tuple[RunMetrics, list[str]]:
    """Run one scripted scenario; returns metrics and the JSONL event log."""
    if script.duration_ticks < 0:
        raise InvalidScript("negative duration")
    rng = random.Random(script.seed)
    directory = RoomDirectory(consts)
    room_cfg = script.room
    room_id = room_cfg.get("room_id", "arena")
    directory.add_room(
        room_id, room_cfg.get("name", "Arena"),
        room_cfg.get("theme_tags", []), int(room_cfg.get("capacity", 32)),
    )
    core = ServerCore(directory, consts)
    effect_log: list = []
    core.effect_sink = effect_log
    runner = _Runner(core)

    bots: list[tuple[Bot, int]] = []
    pids: dict[str, int] = {}
    for member in script.cast:
        pid, client = _setup_member(core, runner, member, room_id, consts)
        pids[member.name] = pid
        sid = max(s for s, c in runner.clients.items() if c is client)
        bots.append((make_bot(member, client, rng, consts, script.access_path), sid))

    state = core.rooms[room_id].state
    tagger_ids = sorted(
        pids[m.name] for m in script.cast if m.role == ROLE_TAGGER)
    primary_target: int | None = None
    for member in script.cast:
        if member.role == ROLE_HUMAN and not member.policy.get("assist"):
            primary_target = pids[member.name]
            break

    metrics = RunMetrics(access_path=script.access_path, seed=script.seed)
    if script.duration_ticks == 0:
        return metrics, []
    log: list[str] = []

    def emit(obj: dict) -> None:
        obj["run"] = run_index
        log.append(canonical_json(obj))

    emit({
        "access_path": script.access_path,
        "cast": {m.name: pids[m.name] for m in script.cast},
        "kind": "run_start",
        "scenario": script.name,
        "seed": script.seed,
    })

    first_tag_tick: int | None = None
    activation_tick: int | None = None
    last_cooldowns: dict[int, int | None] = {}
    tagged_pairs: set[tuple[int, int]] = set()

    # prime each client with its first view so tick-0 policies have poses
    runner.route(core.tick_all())
    effect_log.clear()

    for t in range(script.duration_ticks):
        for bot, sid in bots:
            for msg in bot.step(state.tick):
                for obj in runner.route(core.handle_message(sid, msg)):
                    if obj["type"] == "send_result":
                        metrics.suggestions_sent += 1
                        if obj["payload"]["outcome"] == "delivered":
                            metrics.suggestions_delivered += 1

        runner.route(core.tick_all())
        tick = state.tick

        for effect in effect_log:
            emit(effect.to_obj())
            if effect.kind == "alert_raised":
                metrics.alerts_raised += 1
            elif effect.kind == "bubble_flash":
                metrics.violations += 1
            elif effect.kind == "feature_activated":
                if (effect.data.get("feature") == "personal_bubble"
                        and effect.data.get("player") == primary_target
                        and activation_tick is None):
                    activation_tick = effect.tick
        effect_log.clear()

        # cooldown engagements: a sender's cooldown_until moving to a new value
        for pid, window in state.rate_windows.items():
            if window.cooldown_until != last_cooldowns.get(pid):
                if window.cooldown_until is not None:
                    metrics.cooldowns += 1
                    emit({"kind": "cooldown", "sender": pid, "tick": tick,
                          "until": window.cooldown_until})
                last_cooldowns[pid] = window.cooldown_until

        # tag adjudication: touch-range contact with a bubble-off, non-hidden
        # target counts once per (tagger, target) pair
        for tagger in tagger_ids:
            tp = state.players[tagger].pose
            for pid in sorted(state.players):
                if pid == tagger or pid in tagger_ids:
                    continue
                target = state.players[pid]
                if target.bubble.enabled or state.is_hidden(tagger, pid):
                    continue
                if (tagger, pid) in tagged_pairs:
                    continue
                if tp.distance_to(target.pose) <= consts.touch_range_m:
                    tagged_pairs.add((tagger, pid))
                    emit({"kind": "tagged", "tagger": tagger,
                          "target": pid, "tick": tick})
                    if pid == primary_target and first_tag_tick is None:
                        first_tag_tick = tick

        if audit:
            for bot, _sid in bots:
                emit({"bot": bot.member.name, "kind": "observation",
                      "tick": tick, "visible": sorted(bot.client.players)})

    for suggestion in state.suggestions.values():
        if suggestion.state == "accepted":
            metrics.suggestions_accepted += 1
        elif suggestion.state == "blocked":
            metrics.suggestions_blocked += 1

    if activation_tick is not None:
        metrics.time_to_activation_s = activation_tick / consts.tick_hz
    if first_tag_tick is not None:
        metrics.first_tag_s = first_tag_tick / consts.tick_hz
    metrics.tagged_before_activation = first_tag_tick is not None and (
        activation_tick is None or first_tag_tick < activation_tick)

    emit({"kind": "run_end", "metrics": metrics.to_obj(),
          "tick": state.tick})
    return metrics, log


async def run_scenario_over_wire(
    script: ScenarioScript,
    consts: Constants = DEFAULTS,
    port: int = 0,
) -> RunMetrics:
    """Smoke-mode rerun through the real websocket transport. Timing is
    wall-clock, so results are not deterministic; only gross behavior
    (connect, move, activate) is checked by callers."""
    import asyncio

    import websockets

    from ..server.ws import WsServer

    directory = RoomDirectory(consts)
    room_cfg = script.room
    room_id = room_cfg.get("room_id", "arena")
    directory.add_room(room_id, room_cfg.get("name", "Arena"),
                       room_cfg.get("theme_tags", []),
                       int(room_cfg.get("capacity", 32)))
    core = ServerCore(directory, consts)
    server = WsServer(core)
    ticker = asyncio.create_task(server.tick_loop())
    rng = random.Random(script.seed)

    activation_ticks: list[int] = []

    async def run_bot(member) -> None:
        client = SimClient()
        bot = make_bot(member, client, rng, consts, script.access_path)
        saw_enabled = False
        async with websockets.connect(f"ws://127.0.0.1:{actual_port}") as ws:
            await ws.send(json.dumps(client.envelope("hello", {"name": member.name})))
            client.feed(await ws.recv())
            await ws.send(json.dumps(client.envelope("join_room", {"room_id": room_id})))
            deadline = asyncio.get_event_loop().time() + script.duration_ticks * consts.dt
            while asyncio.get_event_loop().time() < deadline:
                try:
                    frame = await asyncio.wait_for(ws.recv(), timeout=1.0)
                except asyncio.TimeoutError:
                    continue
                client.feed(frame)
                obj = json.loads(frame)
                if obj["type"] == "snapshot" and client.you is not None:
                    # players vanish from room state on disconnect, so
                    # activation has to be observed live from the snapshots
                    if client.you["bubble"]["enabled"] and not saw_enabled:
                        saw_enabled = True
                        activation_ticks.append(obj["payload"]["tick"])
                    await ws.send(json.dumps(client.envelope(
                        "ack", {"tick": obj["payload"]["tick"]})))
                    for msg in bot.step(obj["payload"]["tick"]):
                        await ws.send(json.dumps(msg))

    async with websockets.serve(server.handle, "127.0.0.1", port) as ws_server:
        actual_port = ws_server.sockets[0].getsockname()[1]
        try:
            await asyncio.gather(*(run_bot(m) for m in script.cast))
        finally:
            ticker.cancel()

    metrics = RunMetrics(access_path=script.access_path, seed=script.seed)
    if activation_ticks:
        metrics.time_to_activation_s = min(activation_ticks) / consts.tick_hz
    return metrics
