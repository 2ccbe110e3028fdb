"""Core data model for a room's authoritative state.

The state is a plain mutable object; operations in :mod:`puffer.safety`,
:mod:`puffer.proximity` and :mod:`puffer.suggestions` take it, mutate it and
return a list of :class:`Effect`. ``clone()`` gives an independent copy for
replay tests, and ``to_json()`` a canonical serialization (stable key order)
for golden files. Nothing in here touches a clock, I/O or a RNG.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

PlayerId = int

HARD = "hard"
SOFT = "soft"
BOUNDARIES = (HARD, SOFT)

# badge slots and values
INTERACTION = "interaction"
SOUND = "sound"
SOCIAL = "social"

OPEN = "open"
ARM_LENGTH = "arm_length"
NO_PHYSICAL = "no_physical"
INTERACTION_VALUES = (OPEN, ARM_LENGTH, NO_PHYSICAL)

SOUND_NONE = "none"
QUIET = "quiet"
SOUND_VALUES = (SOUND_NONE, QUIET)

SOCIAL_NONE = "none"
SOCIAL_SOCIAL = "social"
FRIENDS_ONLY = "friends_only"
INDIVIDUAL = "individual"
SOCIAL_VALUES = (SOCIAL_NONE, SOCIAL_SOCIAL, FRIENDS_ONLY, INDIVIDUAL)

BADGE_VALUES = {
    INTERACTION: INTERACTION_VALUES,
    SOUND: SOUND_VALUES,
    SOCIAL: SOCIAL_VALUES,
}

# suggestion features and lifecycle states
FEATURE_BUBBLE = "personal_bubble"
FEATURE_BLOCK = "block"
FEATURE_MUTE = "mute"
FEATURES = (FEATURE_BUBBLE, FEATURE_BLOCK, FEATURE_MUTE)

PENDING = "pending"
ACCEPTED = "accepted"
OPENED = "opened"
DECLINED = "declined"
BLOCKED = "blocked"
EXPIRED = "expired"


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass
class Pose:
    x: float = 0.0
    y: float = 0.0
    facing: float = 0.0  # yaw, radians in [0, 2*pi)

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def clone(self) -> "Pose":
        return Pose(self.x, self.y, self.facing)

    def to_obj(self) -> dict[str, float]:
        return {"facing": self.facing, "x": self.x, "y": self.y}


@dataclass
class BubbleConfig:
    enabled: bool = False
    boundary: str = HARD
    radius_al: float = 1.0
    alerts_enabled: bool = True
    alert_muted: set[PlayerId] = field(default_factory=set)
    exempt: set[PlayerId] = field(default_factory=set)

    def clone(self) -> "BubbleConfig":
        return BubbleConfig(
            self.enabled, self.boundary, self.radius_al,
            self.alerts_enabled, set(self.alert_muted), set(self.exempt),
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "alert_muted": sorted(self.alert_muted),
            "alerts_enabled": self.alerts_enabled,
            "boundary": self.boundary,
            "enabled": self.enabled,
            "exempt": sorted(self.exempt),
            "radius_al": self.radius_al,
        }


@dataclass
class BadgeSet:
    interaction: str = OPEN
    sound: str = SOUND_NONE
    social: str = SOCIAL_NONE
    saved_bubble: Optional[BubbleConfig] = None  # present iff interaction != open

    def clone(self) -> "BadgeSet":
        return BadgeSet(
            self.interaction, self.sound, self.social,
            self.saved_bubble.clone() if self.saved_bubble else None,
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "interaction": self.interaction,
            "saved_bubble": self.saved_bubble.to_obj() if self.saved_bubble else None,
            "social": self.social,
            "sound": self.sound,
        }


@dataclass
class PlayerState:
    player_id: PlayerId
    name: str
    pose: Pose = field(default_factory=Pose)
    bubble: BubbleConfig = field(default_factory=BubbleConfig)
    badges: BadgeSet = field(default_factory=BadgeSet)
    muted: bool = False            # voice mute, feeds room noise level
    flashing_until: int = -1       # tick until which the bubble flash runs

    def clone(self) -> "PlayerState":
        return PlayerState(
            self.player_id, self.name, self.pose.clone(),
            self.bubble.clone(), self.badges.clone(),
            self.muted, self.flashing_until,
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "badges": self.badges.to_obj(),
            "bubble": self.bubble.to_obj(),
            "flashing_until": self.flashing_until,
            "muted": self.muted,
            "name": self.name,
            "player_id": self.player_id,
            "pose": self.pose.to_obj(),
        }


@dataclass
class SocialGraph:
    friends: dict[PlayerId, set[PlayerId]] = field(default_factory=dict)
    blocked_senders: dict[PlayerId, set[PlayerId]] = field(default_factory=dict)
    block_all: set[PlayerId] = field(default_factory=set)

    def are_friends(self, a: PlayerId, b: PlayerId) -> bool:
        return b in self.friends.get(a, ())

    def add_friend(self, a: PlayerId, b: PlayerId) -> None:
        self.friends.setdefault(a, set()).add(b)
        self.friends.setdefault(b, set()).add(a)

    def remove_friend(self, a: PlayerId, b: PlayerId) -> None:
        self.friends.get(a, set()).discard(b)
        self.friends.get(b, set()).discard(a)

    def blocks(self, receiver: PlayerId, sender: PlayerId) -> bool:
        if receiver in self.block_all:
            return True
        return sender in self.blocked_senders.get(receiver, ())

    def clone(self) -> "SocialGraph":
        return SocialGraph(
            {k: set(v) for k, v in self.friends.items()},
            {k: set(v) for k, v in self.blocked_senders.items()},
            set(self.block_all),
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "block_all": sorted(self.block_all),
            "blocked_senders": {
                str(k): sorted(v) for k, v in sorted(self.blocked_senders.items()) if v
            },
            "friends": {
                str(k): sorted(v) for k, v in sorted(self.friends.items()) if v
            },
        }


@dataclass
class Suggestion:
    suggestion_id: int
    sender: PlayerId
    receiver: PlayerId
    feature: str
    subject: Optional[PlayerId]  # who to block/mute; None for the bubble feature
    sent_at: int
    state: str = PENDING

    def clone(self) -> "Suggestion":
        return Suggestion(
            self.suggestion_id, self.sender, self.receiver,
            self.feature, self.subject, self.sent_at, self.state,
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "feature": self.feature,
            "receiver": self.receiver,
            "sender": self.sender,
            "sent_at": self.sent_at,
            "state": self.state,
            "subject": self.subject,
            "suggestion_id": self.suggestion_id,
        }


@dataclass
class RateWindow:
    send_ticks: list[int] = field(default_factory=list)
    cooldown_until: Optional[int] = None  # only ever moves forward

    def clone(self) -> "RateWindow":
        return RateWindow(list(self.send_ticks), self.cooldown_until)

    def to_obj(self) -> dict[str, Any]:
        return {"cooldown_until": self.cooldown_until, "send_ticks": list(self.send_ticks)}


@dataclass
class Effect:
    """One externally observable consequence of an operation or a tick."""

    kind: str
    tick: int
    data: dict[str, Any]

    def to_obj(self) -> dict[str, Any]:
        return {"data": dict(sorted(self.data.items())), "kind": self.kind, "tick": self.tick}


# effect kinds
BUBBLE_FLASH = "bubble_flash"
ALERT_RAISED = "alert_raised"
SUGGESTION_DELIVERED = "suggestion_delivered"
SUGGESTION_REJECTED = "suggestion_rejected"
SUGGESTION_DISMISSED = "suggestion_dismissed"
FEATURE_ACTIVATED = "feature_activated"
VISIBILITY_CHANGED = "visibility_changed"
MENU_REQUESTED = "menu_requested"


@dataclass
class WorldState:
    """Authoritative snapshot of one room."""

    tick: int = 0
    players: dict[PlayerId, PlayerState] = field(default_factory=dict)
    social: SocialGraph = field(default_factory=SocialGraph)
    hidden_pairs: set[tuple[PlayerId, PlayerId]] = field(default_factory=set)
    # ordered (target, approacher) pairs currently inside the alert radius
    alert_inside: set[tuple[PlayerId, PlayerId]] = field(default_factory=set)
    suggestions: dict[int, Suggestion] = field(default_factory=dict)
    rate_windows: dict[PlayerId, RateWindow] = field(default_factory=dict)
    next_suggestion_id: int = 1
    dropped_intents: int = 0

    def require_player(self, pid: PlayerId) -> PlayerState:
        from .errors import UnknownPlayer
        player = self.players.get(pid)
        if player is None:
            raise UnknownPlayer(f"no player {pid} in room")
        return player

    def add_player(self, pid: PlayerId, name: str, pose: Pose | None = None) -> PlayerState:
        player = PlayerState(pid, name, pose or Pose())
        self.players[pid] = player
        return player

    def remove_player(self, pid: PlayerId) -> None:
        self.players.pop(pid, None)
        self.hidden_pairs = {p for p in self.hidden_pairs if pid not in p}
        self.alert_inside = {p for p in self.alert_inside if pid not in p}
        self.social.friends.pop(pid, None)
        for members in self.social.friends.values():
            members.discard(pid)

    def is_hidden(self, a: PlayerId, b: PlayerId) -> bool:
        return (min(a, b), max(a, b)) in self.hidden_pairs

    def clone(self) -> "WorldState":
        return WorldState(
            self.tick,
            {pid: p.clone() for pid, p in self.players.items()},
            self.social.clone(),
            set(self.hidden_pairs),
            set(self.alert_inside),
            {sid: s.clone() for sid, s in self.suggestions.items()},
            {pid: w.clone() for pid, w in self.rate_windows.items()},
            self.next_suggestion_id,
            self.dropped_intents,
        )

    def to_obj(self) -> dict[str, Any]:
        return {
            "alert_inside": sorted(list(p) for p in self.alert_inside),
            "hidden_pairs": sorted(list(p) for p in self.hidden_pairs),
            "next_suggestion_id": self.next_suggestion_id,
            "players": {str(pid): p.to_obj() for pid, p in sorted(self.players.items())},
            "rate_windows": {
                str(pid): w.to_obj() for pid, w in sorted(self.rate_windows.items())
            },
            "social": self.social.to_obj(),
            "suggestions": {
                str(sid): s.to_obj() for sid, s in sorted(self.suggestions.items())
            },
            "tick": self.tick,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_obj())


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
