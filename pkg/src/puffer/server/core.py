"""Transport-agnostic server core: sessions, message dispatch, per-room tick
loops, and visibility-filtered delta replication.

The core is sans-io and fully deterministic: feed it messages and calls to
``tick_all()`` and it returns the frames each session should receive. The
websocket shell in :mod:`puffer.server.ws` is a thin pump around it, which is
also what lets the protocol tests capture byte-exact golden streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .. import protocol, proximity, safety, suggestions
from ..config import Constants, DEFAULTS
from ..errors import NotInRoom, ProtocolError, PufferError
from ..rooms import RoomDirectory, RoomFilter, default_filter_from_badges
from ..types import (
    ALERT_RAISED,
    BUBBLE_FLASH,
    BubbleConfig,
    Effect,
    FEATURE_ACTIVATED,
    MENU_REQUESTED,
    PlayerId,
    Pose,
    SUGGESTION_DELIVERED,
    SUGGESTION_DISMISSED,
    VISIBILITY_CHANGED,
    WorldState,
    canonical_json,
)

ACK_TIMEOUT_S = 3.0       # no ack for this long -> fall back to full snapshots
MAX_PENDING_VIEWS = 64    # per-session unacked view history (drop-to-latest)

Outgoing = list[tuple[int, str]]  # (session_id, serialized frame)


@dataclass
class Session:
    session_id: int
    player_id: PlayerId | None = None
    name: str | None = None
    room_id: str | None = None
    last_seq: int = 0
    out_seq: int = 0
    # replication bookkeeping
    acked_view: dict[PlayerId, str] | None = None
    pending_views: dict[int, dict[PlayerId, str]] = field(default_factory=dict)
    last_ack_at: int = 0
    force_full: bool = True
    events: list[Effect] = field(default_factory=list)

    def next_out_seq(self) -> int:
        self.out_seq += 1
        return self.out_seq


@dataclass
class RoomCore:
    state: WorldState = field(default_factory=WorldState)
    pending_intents: list[proximity.MoveIntent] = field(default_factory=list)
    pending_effects: list[Effect] = field(default_factory=list)
    sessions: set[int] = field(default_factory=set)


class ServerCore:
    def __init__(self, directory: RoomDirectory, consts: Constants = DEFAULTS):
        self.consts = consts
        self.directory = directory
        self.rooms: dict[str, RoomCore] = {rid: RoomCore() for rid in directory.rooms}
        self.sessions: dict[int, Session] = {}
        self.session_by_player: dict[PlayerId, int] = {}
        self.next_session_id = 1
        self.next_player_id = 1
        # optional instrumentation: when set, every tick's effects (including
        # server-internal ones) are appended here; the simulator logs them
        self.effect_sink: list[Effect] | None = None

    # -- session lifecycle -------------------------------------------------

    def open_session(self) -> int:
        sid = self.next_session_id
        self.next_session_id += 1
        self.sessions[sid] = Session(sid)
        return sid

    def close_session(self, sid: int) -> None:
        session = self.sessions.pop(sid, None)
        if session is None:
            return
        if session.room_id is not None:
            self._leave_room(session)
        if session.player_id is not None:
            self.session_by_player.pop(session.player_id, None)

    # -- message handling ----------------------------------------------------

    def handle_message(self, sid: int, raw: str | bytes | dict) -> Outgoing:
        session = self.sessions[sid]
        try:
            mtype, seq, payload = protocol.parse_envelope(raw)
        except ProtocolError as exc:
            return [self._error(session, None, exc)]
        if seq <= session.last_seq:
            return [self._error(
                session, None,
                ProtocolError(f"seq {seq} not greater than {session.last_seq}"),
            )]
        session.last_seq = seq
        try:
            return self._dispatch(session, mtype, seq, payload)
        except PufferError as exc:
            return [self._error(session, seq, exc)]

    def _dispatch(self, session: Session, mtype: str, seq: int, payload: dict) -> Outgoing:
        if session.player_id is None:
            if mtype != protocol.HELLO:
                raise ProtocolError("handshake first: send hello")
            return self._on_hello(session, seq, payload)
        handler = self._HANDLERS.get(mtype)
        if handler is None:  # hello twice
            raise ProtocolError(f"unexpected {mtype} after handshake")
        return handler(self, session, seq, payload)

    def _on_hello(self, session: Session, seq: int, payload: dict) -> Outgoing:
        name = protocol.require_str(payload, "name")
        if not name or len(name) > 64:
            raise ProtocolError("name must be 1..64 chars")
        session.player_id = self.next_player_id
        self.next_player_id += 1
        session.name = name
        self.session_by_player[session.player_id] = session.session_id
        return [self._send(session, protocol.WELCOME, {
            "name": name,
            "player_id": session.player_id,
            "reply_to": seq,
            "tick_rate": self.consts.tick_hz,
        })]

    def _on_list_rooms(self, session: Session, seq: int, payload: dict) -> Outgoing:
        if payload.get("use_badge_defaults"):
            room_filter = RoomFilter()
            room = self._room_of(session)
            if room is not None:
                badges = room.state.players[session.player_id].badges
                room_filter = default_filter_from_badges(badges)
        else:
            room_filter = RoomFilter(
                uncrowded_only=bool(payload.get("uncrowded_only", False)),
                quiet_only=bool(payload.get("quiet_only", False)),
            )
        return [self._send(session, protocol.ROOMS, {
            "reply_to": seq,
            "rooms": self.directory.filter_rooms(room_filter),
        })]

    def _on_join_room(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room_id = protocol.require_str(payload, "room_id")
        pid = session.player_id
        self.directory.join_room(pid, room_id)
        room = self.rooms[room_id]
        spawn = self._spawn_pose(pid)
        room.state.add_player(pid, session.name, spawn)
        room.sessions.add(session.session_id)
        session.room_id = room_id
        session.force_full = True
        session.acked_view = None
        session.pending_views.clear()
        session.last_ack_at = room.state.tick
        return [self._send(session, protocol.OK, {"reply_to": seq, "room_id": room_id})]

    def _on_leave_room(self, session: Session, seq: int, payload: dict) -> Outgoing:
        self._require_room(session)
        self._leave_room(session)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_move(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        x = protocol.require_number(payload, "x")
        y = protocol.require_number(payload, "y")
        facing = protocol.require_number(payload, "facing")
        player = room.state.players[session.player_id]
        max_step = self.consts.v_max_mps * self.consts.dt + 1e-9
        if math.hypot(x - player.pose.x, y - player.pose.y) > max_step:
            return [self._send(session, protocol.NOTICE, {
                "kind": "dropped_intent", "reason": "speed_cap", "reply_to": seq,
            })]
        room.pending_intents.append(proximity.MoveIntent(
            session.player_id, Pose(x, y, facing), room.state.tick,
        ))
        return []

    def _on_set_bubble(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        current = room.state.players[session.player_id].bubble
        cfg = BubbleConfig(
            enabled=protocol.require_bool(payload, "enabled"),
            boundary=protocol.require_str(payload, "boundary"),
            radius_al=protocol.require_number(payload, "radius_al"),
            alerts_enabled=protocol.require_bool(
                payload, "alerts_enabled", current.alerts_enabled),
            alert_muted=set(current.alert_muted),
            exempt=set(current.exempt),
        )
        effects = safety.set_bubble(room.state, session.player_id, cfg, self.consts)
        room.pending_effects.extend(effects)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_activate_bubble(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        effects = safety.activate_default_bubble(
            room.state, session.player_id, self.consts)
        room.pending_effects.extend(effects)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_set_badge(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        effects = safety.set_badge(
            room.state, session.player_id,
            protocol.require_str(payload, "slot"),
            protocol.require_str(payload, "value"),
            self.consts,
        )
        room.pending_effects.extend(effects)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_clear_badge(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        effects = safety.clear_badge(
            room.state, session.player_id,
            protocol.require_str(payload, "slot"), self.consts,
        )
        room.pending_effects.extend(effects)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_social(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        safety.apply_social(
            room.state, session.player_id,
            protocol.require_str(payload, "action"),
            protocol.optional_int(payload, "other"),
        )
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_send_suggestion(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        result = suggestions.send_suggestion(
            room.state,
            session.player_id,
            protocol.require_int(payload, "receiver"),
            protocol.require_str(payload, "feature"),
            room.state.tick,
            protocol.optional_int(payload, "subject"),
            self.consts,
        )
        if result.effects:
            room.pending_effects.extend(result.effects)
        body: dict[str, Any] = {"outcome": result.outcome, "reply_to": seq}
        if result.suggestion_id is not None:
            body["suggestion_id"] = result.suggestion_id
        if result.cooldown_until is not None:
            body["cooldown_until"] = result.cooldown_until
        return [self._send(session, protocol.SEND_RESULT, body)]

    def _on_respond_suggestion(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        effects = suggestions.respond(
            room.state, session.player_id,
            protocol.require_int(payload, "suggestion_id"),
            protocol.require_str(payload, "action"),
            room.state.tick, self.consts,
        )
        room.pending_effects.extend(effects)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_set_mute(self, session: Session, seq: int, payload: dict) -> Outgoing:
        room = self._require_room(session)
        muted = protocol.require_bool(payload, "muted")
        room.state.players[session.player_id].muted = muted
        self.directory.set_mute(session.player_id, muted)
        return [self._send(session, protocol.OK, {"reply_to": seq})]

    def _on_ack(self, session: Session, seq: int, payload: dict) -> Outgoing:
        tick = protocol.require_int(payload, "tick")
        view = session.pending_views.get(tick)
        if view is not None:
            session.acked_view = view
            for t in [t for t in session.pending_views if t <= tick]:
                del session.pending_views[t]
            room = self._room_of(session)
            session.last_ack_at = room.state.tick if room else tick
        return []

    _HANDLERS = {
        protocol.LIST_ROOMS: _on_list_rooms,
        protocol.JOIN_ROOM: _on_join_room,
        protocol.LEAVE_ROOM: _on_leave_room,
        protocol.MOVE: _on_move,
        protocol.SET_BUBBLE: _on_set_bubble,
        protocol.ACTIVATE_BUBBLE: _on_activate_bubble,
        protocol.SET_BADGE: _on_set_badge,
        protocol.CLEAR_BADGE: _on_clear_badge,
        protocol.SOCIAL: _on_social,
        protocol.SEND_SUGGESTION: _on_send_suggestion,
        protocol.RESPOND_SUGGESTION: _on_respond_suggestion,
        protocol.SET_MUTE: _on_set_mute,
        protocol.ACK: _on_ack,
    }

    # -- tick loop --------------------------------------------------------

    def tick_all(self) -> Outgoing:
        """Advance every room one step and build per-session snapshots."""
        out: Outgoing = []
        for room_id in sorted(self.rooms):
            out.extend(self.tick_room(room_id))
        return out

    def tick_room(self, room_id: str) -> Outgoing:
        room = self.rooms[room_id]
        state = room.state
        intents = room.pending_intents
        room.pending_intents = []
        effects = proximity.tick(state, intents, self.consts)
        effects.extend(suggestions.expire_pending(state, state.tick, self.consts))
        effects.extend(room.pending_effects)
        room.pending_effects = []
        if self.effect_sink is not None:
            self.effect_sink.extend(effects)
        self._route_effects(room, effects)

        out: Outgoing = []
        for sid in sorted(room.sessions):
            session = self.sessions[sid]
            out.append(self._build_snapshot(session, room))
        return out

    def _route_effects(self, room: RoomCore, effects: list[Effect]) -> None:
        for effect in effects:
            if effect.kind == VISIBILITY_CHANGED:
                continue  # server-internal: drives the interest filter
            if effect.kind == BUBBLE_FLASH:
                for sid in room.sessions:
                    self.sessions[sid].events.append(effect)
                continue
            key = {
                ALERT_RAISED: "target",
                SUGGESTION_DELIVERED: "receiver",
                SUGGESTION_DISMISSED: "receiver",
                FEATURE_ACTIVATED: "player",
                MENU_REQUESTED: "player",
            }.get(effect.kind)
            if key is None:
                continue
            sid = self.session_by_player.get(effect.data.get(key))
            if sid is not None and sid in room.sessions:
                self.sessions[sid].events.append(effect)

    def _build_snapshot(self, session: Session, room: RoomCore) -> tuple[int, str]:
        state = room.state
        me = session.player_id
        view: dict[PlayerId, str] = {}
        entries: dict[PlayerId, dict] = {}
        for pid in sorted(state.players):
            if pid == me or state.is_hidden(me, pid):
                continue
            entry = self._public_entry(state, pid)
            entries[pid] = entry
            view[pid] = canonical_json(entry)

        ack_age = state.tick - session.last_ack_at
        full = (
            session.force_full
            or session.acked_view is None
            or ack_age > self.consts.seconds_to_ticks(ACK_TIMEOUT_S)
        )
        if full:
            players = [entries[pid] for pid in sorted(entries)]
            removed: list[PlayerId] = []
        else:
            base = session.acked_view
            players = [
                entries[pid] for pid in sorted(entries)
                if base.get(pid) != view[pid]
            ]
            removed = sorted(pid for pid in base if pid not in view)
        session.force_full = False
        session.pending_views[state.tick] = view
        while len(session.pending_views) > MAX_PENDING_VIEWS:
            del session.pending_views[min(session.pending_views)]

        events = [e.to_obj() for e in session.events]
        session.events = []
        payload = {
            "events": events,
            "full": full,
            "players": players,
            "removed": removed,
            "room": self.directory.rooms[session.room_id].meta(self.consts),
            "tick": state.tick,
            "you": self._own_entry(state, me),
        }
        return self._send(session, protocol.SNAPSHOT, payload)

    def _public_entry(self, state: WorldState, pid: PlayerId) -> dict:
        # other players' bubble radii are private: only on/off, boundary
        # kind and the flash replicate
        player = state.players[pid]
        return {
            "badges": {
                "interaction": player.badges.interaction,
                "social": player.badges.social,
                "sound": player.badges.sound,
            },
            "bubble": {
                "boundary": player.bubble.boundary,
                "enabled": player.bubble.enabled,
                "flashing": state.tick <= player.flashing_until,
            },
            "muted": player.muted,
            "name": player.name,
            "player_id": pid,
            "pose": player.pose.to_obj(),
        }

    def _own_entry(self, state: WorldState, pid: PlayerId) -> dict:
        player = state.players[pid]
        entry = player.to_obj()
        entry["flashing"] = state.tick <= player.flashing_until
        return entry

    # -- helpers --------------------------------------------------------------

    def _spawn_pose(self, pid: PlayerId) -> Pose:
        angle = (pid % 12) * (2.0 * math.pi / 12.0)
        radius = 3.0 + (pid // 12) * 1.5
        return Pose(radius * math.cos(angle), radius * math.sin(angle), 0.0)

    def _room_of(self, session: Session) -> RoomCore | None:
        if session.room_id is None:
            return None
        return self.rooms[session.room_id]

    def _require_room(self, session: Session) -> RoomCore:
        room = self._room_of(session)
        if room is None:
            raise NotInRoom("join a room first")
        return room

    def _leave_room(self, session: Session) -> None:
        room = self.rooms[session.room_id]
        room.state.remove_player(session.player_id)
        room.sessions.discard(session.session_id)
        self.directory.leave_room(session.player_id)
        session.room_id = None
        session.acked_view = None
        session.pending_views.clear()
        session.events = []
        session.force_full = True

    def _send(self, session: Session, mtype: str, payload: dict) -> tuple[int, str]:
        return session.session_id, protocol.encode(mtype, session.next_out_seq(), payload)

    def _error(self, session: Session, reply_to: int | None, exc: PufferError) -> tuple[int, str]:
        return self._send(session, protocol.ERROR, {
            "code": exc.code, "message": str(exc), "reply_to": reply_to,
        })
