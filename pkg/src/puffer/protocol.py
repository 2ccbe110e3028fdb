"""Wire protocol: JSON envelopes over a text transport.

Every frame is ``{"type": <tag>, "seq": <int>, "payload": {...}}`` with seq
strictly increasing per direction per connection. The full message catalogue
is documented in docs/protocol.md; this module owns parsing and the
per-message payload validators the server applies before dispatch.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .errors import ProtocolError
from .types import canonical_json

# client -> server message types
HELLO = "hello"
MOVE = "move"
SET_BUBBLE = "set_bubble"
ACTIVATE_BUBBLE = "activate_bubble"
SET_BADGE = "set_badge"
CLEAR_BADGE = "clear_badge"
SOCIAL = "social"
SEND_SUGGESTION = "send_suggestion"
RESPOND_SUGGESTION = "respond_suggestion"
LIST_ROOMS = "list_rooms"
JOIN_ROOM = "join_room"
LEAVE_ROOM = "leave_room"
SET_MUTE = "set_mute"
ACK = "ack"

# server -> client message types
WELCOME = "welcome"
OK = "ok"
ERROR = "error"
ROOMS = "rooms"
SEND_RESULT = "send_result"
SNAPSHOT = "snapshot"
NOTICE = "notice"

CLIENT_TYPES = frozenset({
    HELLO, MOVE, SET_BUBBLE, ACTIVATE_BUBBLE, SET_BADGE, CLEAR_BADGE,
    SOCIAL, SEND_SUGGESTION, RESPOND_SUGGESTION, LIST_ROOMS, JOIN_ROOM,
    LEAVE_ROOM, SET_MUTE, ACK,
})


def parse_envelope(raw: str | bytes | dict) -> tuple[str, int, dict]:
    """Parse and shape-check one inbound frame; raises ProtocolError on any
    malformation. Cheap on purpose: this sits in front of the fuzz firehose."""
    if isinstance(raw, dict):
        obj = raw
    else:
        try:
            obj = json.loads(raw)
        except (ValueError, TypeError, UnicodeDecodeError) as exc:
            raise ProtocolError(f"bad json: {exc}") from None
    if not isinstance(obj, dict):
        raise ProtocolError("envelope is not an object")
    mtype = obj.get("type")
    seq = obj.get("seq")
    payload = obj.get("payload")
    if not isinstance(mtype, str):
        raise ProtocolError("missing or non-string type")
    if not isinstance(seq, int) or isinstance(seq, bool):
        raise ProtocolError("missing or non-integer seq")
    if payload is None:
        payload = {}
    if not isinstance(payload, dict):
        raise ProtocolError("payload is not an object")
    if mtype not in CLIENT_TYPES:
        raise ProtocolError(f"unknown message type {mtype!r}")
    return mtype, seq, payload


def encode(mtype: str, seq: int, payload: dict[str, Any]) -> str:
    return canonical_json({"payload": payload, "seq": seq, "type": mtype})


def require_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise ProtocolError(f"field {key!r} must be a string")
    return value


def require_int(payload: dict, key: str) -> int:
    value = payload.get(key)
    if not isinstance(value, int) or isinstance(value, bool):
        raise ProtocolError(f"field {key!r} must be an integer")
    return value


def require_number(payload: dict, key: str) -> float:
    value = payload.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProtocolError(f"field {key!r} must be a number")
    value = float(value)
    if not math.isfinite(value):
        raise ProtocolError(f"field {key!r} must be finite")
    return value


def require_bool(payload: dict, key: str, default: bool | None = None) -> bool:
    value = payload.get(key, default)
    if not isinstance(value, bool):
        raise ProtocolError(f"field {key!r} must be a boolean")
    return value


def optional_int(payload: dict, key: str) -> int | None:
    value = payload.get(key)
    if value is None:
        return None
    if not isinstance(value, int) or isinstance(value, bool):
        raise ProtocolError(f"field {key!r} must be an integer")
    return value
