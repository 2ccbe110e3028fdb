"""Scenario scripts: the JSON schema the simulator runs.

A script pins everything a run needs — seed, duration, room, cast with
roles, starting safety config and per-role policy parameters — so that
(script, seed) fully determines the event log. Shipped examples live in
``scenarios/`` next to this package's repository root.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from ..errors import InvalidScript

ROLE_HUMAN = "human_proxy"
ROLE_TAGGER = "tagger"
ROLE_WANDERER = "wanderer"
ROLE_GREETER = "greeter"
ROLE_SPAMMER = "spammer"
ROLES = (ROLE_HUMAN, ROLE_TAGGER, ROLE_WANDERER, ROLE_GREETER, ROLE_SPAMMER)

PATH_MENU = "menu"
PATH_HOTKEY = "hotkey"
PATH_SUGGESTION = "suggestion"
ACCESS_PATHS = (PATH_MENU, PATH_HOTKEY, PATH_SUGGESTION)


@dataclass
class CastMember:
    name: str
    role: str
    pos: tuple[float, float] = (0.0, 0.0)
    facing: float = 0.0
    bubble: dict[str, Any] = field(default_factory=dict)
    badges: dict[str, str] = field(default_factory=dict)
    policy: dict[str, Any] = field(default_factory=dict)


@dataclass
class ScenarioScript:
    name: str
    seed: int
    duration_ticks: int
    access_path: str
    cast: list[CastMember]
    room: dict[str, Any]

    def with_seed(self, seed: int) -> "ScenarioScript":
        return ScenarioScript(
            self.name, seed, self.duration_ticks, self.access_path,
            self.cast, self.room,
        )

    def with_access_path(self, path: str) -> "ScenarioScript":
        if path not in ACCESS_PATHS:
            raise InvalidScript(f"unknown access path {path!r}")
        return ScenarioScript(
            self.name, self.seed, self.duration_ticks, path,
            self.cast, self.room,
        )


def parse_script(obj: dict[str, Any]) -> ScenarioScript:
    try:
        name = obj.get("name", "scenario")
        seed = int(obj["seed"])
        duration = int(obj["duration_ticks"])
        access_path = obj.get("access_path", PATH_MENU)
        cast_raw = obj["cast"]
        room = obj.get("room") or {
            "room_id": "arena", "name": "Arena", "theme_tags": [], "capacity": 32,
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidScript(f"bad script: {exc}") from None
    if duration < 0:
        raise InvalidScript("duration_ticks must be >= 0")
    if access_path not in ACCESS_PATHS:
        raise InvalidScript(f"unknown access path {access_path!r}")
    if not isinstance(cast_raw, list) or not cast_raw:
        raise InvalidScript("cast must be a non-empty list")
    cast: list[CastMember] = []
    names = set()
    for entry in cast_raw:
        try:
            member = CastMember(
                name=entry["name"],
                role=entry["role"],
                pos=tuple(entry.get("pos", (0.0, 0.0))),
                facing=float(entry.get("facing", 0.0)),
                bubble=dict(entry.get("bubble", {})),
                badges=dict(entry.get("badges", {})),
                policy=dict(entry.get("policy", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidScript(f"bad cast entry: {exc}") from None
        if member.role not in ROLES:
            raise InvalidScript(f"unknown role {member.role!r}")
        if member.name in names:
            raise InvalidScript(f"duplicate cast name {member.name!r}")
        if len(member.pos) != 2:
            raise InvalidScript("pos must be [x, y]")
        names.add(member.name)
        cast.append(member)
    return ScenarioScript(name, seed, duration, access_path, cast, room)


def load_script(path: str) -> ScenarioScript:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except ValueError as exc:
            raise InvalidScript(f"bad script json: {exc}") from None
    return parse_script(obj)
