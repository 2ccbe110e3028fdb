"""Room directory: capacity bookkeeping, live crowd/noise levels, and
preference filtering with badge-derived defaults.

The directory is a single serialized service; room tick loops feed it
join/leave/mute events and reads return consistent snapshots. Noise is
proxied by the number of unmuted players (no audio analysis here).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .config import Constants, DEFAULTS
from .errors import AlreadyInRoom, InvalidCapacity, RoomFull, UnknownRoom
from .types import ARM_LENGTH, BadgeSet, NO_PHYSICAL, PlayerId, QUIET

UNCROWDED = "uncrowded"
MEDIUM = "medium"
CROWDED = "crowded"

NOISE_QUIET = "quiet"
NOISE_MEDIUM = "medium"
NOISE_LOUD = "loud"


def crowd_level(player_count: int, capacity: int, consts: Constants = DEFAULTS) -> str:
    if capacity < 1:
        raise InvalidCapacity(f"capacity {capacity} < 1")
    if not 0 <= player_count <= capacity:
        raise InvalidCapacity(f"player_count {player_count} outside [0, {capacity}]")
    occupancy = player_count / capacity
    if occupancy < consts.crowd_medium_frac:
        return UNCROWDED
    if occupancy < consts.crowd_crowded_frac:
        return MEDIUM
    return CROWDED


def noise_level(unmuted_count: int, consts: Constants = DEFAULTS) -> str:
    if unmuted_count <= consts.noise_quiet_max:
        return NOISE_QUIET
    if unmuted_count <= consts.noise_medium_max:
        return NOISE_MEDIUM
    return NOISE_LOUD


@dataclass
class RoomFilter:
    uncrowded_only: bool = False
    quiet_only: bool = False


def default_filter_from_badges(badges: BadgeSet) -> RoomFilter:
    """Auto-set the directory filter from the wearer's badges: restrictive
    interaction badges imply uncrowded rooms, a quiet badge implies quiet."""
    return RoomFilter(
        uncrowded_only=badges.interaction in (ARM_LENGTH, NO_PHYSICAL),
        quiet_only=badges.sound == QUIET,
    )


@dataclass
class RoomEntry:
    room_id: str
    name: str
    theme_tags: list[str]
    capacity: int
    members: set[PlayerId] = field(default_factory=set)
    muted: set[PlayerId] = field(default_factory=set)

    @property
    def player_count(self) -> int:
        return len(self.members)

    @property
    def unmuted_count(self) -> int:
        return len(self.members) - len(self.muted)

    def meta(self, consts: Constants = DEFAULTS) -> dict:
        return {
            "capacity": self.capacity,
            "crowd": crowd_level(self.player_count, self.capacity, consts),
            "name": self.name,
            "noise": noise_level(self.unmuted_count, consts),
            "player_count": self.player_count,
            "room_id": self.room_id,
            "theme_tags": list(self.theme_tags),
            "unmuted_count": self.unmuted_count,
        }


class RoomDirectory:
    def __init__(self, consts: Constants = DEFAULTS):
        self.consts = consts
        self.rooms: dict[str, RoomEntry] = {}
        self.player_rooms: dict[PlayerId, str] = {}

    def add_room(self, room_id: str, name: str, theme_tags: list[str], capacity: int) -> None:
        if capacity < 1:
            raise InvalidCapacity(f"capacity {capacity} < 1")
        self.rooms[room_id] = RoomEntry(room_id, name, list(theme_tags), capacity)

    @classmethod
    def from_config(cls, path: str, consts: Constants = DEFAULTS) -> "RoomDirectory":
        """Seed rooms from a JSON file: a list of {room_id, name, theme_tags,
        capacity} objects."""
        directory = cls(consts)
        with open(path, encoding="utf-8") as fh:
            entries = json.load(fh)
        for entry in entries:
            directory.add_room(
                entry["room_id"], entry["name"],
                entry.get("theme_tags", []), entry["capacity"],
            )
        return directory

    def require_room(self, room_id: str) -> RoomEntry:
        room = self.rooms.get(room_id)
        if room is None:
            raise UnknownRoom(f"no room {room_id!r}")
        return room

    def room_of(self, player: PlayerId) -> str | None:
        return self.player_rooms.get(player)

    def join_room(self, player: PlayerId, room_id: str) -> RoomEntry:
        room = self.require_room(room_id)
        if player in self.player_rooms:
            raise AlreadyInRoom(f"player {player} already in {self.player_rooms[player]!r}")
        if room.player_count >= room.capacity:
            raise RoomFull(f"room {room_id!r} is at capacity {room.capacity}")
        room.members.add(player)
        self.player_rooms[player] = room_id
        return room

    def leave_room(self, player: PlayerId) -> RoomEntry:
        room_id = self.player_rooms.pop(player, None)
        if room_id is None:
            raise UnknownRoom(f"player {player} is not in any room")
        room = self.rooms[room_id]
        room.members.discard(player)
        room.muted.discard(player)
        return room

    def set_mute(self, player: PlayerId, muted: bool) -> None:
        room_id = self.player_rooms.get(player)
        if room_id is None:
            return
        room = self.rooms[room_id]
        if muted:
            room.muted.add(player)
        else:
            room.muted.discard(player)

    def filter_rooms(self, room_filter: RoomFilter) -> list[dict]:
        """Directory listing with metadata recomputed at read time; checked
        filter boxes narrow conjunctively. Densest rooms first."""
        out = []
        for room in self.rooms.values():
            meta = room.meta(self.consts)
            if room_filter.uncrowded_only and meta["crowd"] != UNCROWDED:
                continue
            if room_filter.quiet_only and meta["noise"] != NOISE_QUIET:
                continue
            out.append(meta)
        out.sort(key=lambda m: (-m["player_count"], m["room_id"]))
        return out
