"""Puffer safety arena: authoritative multiplayer safety protocol engine.

Personal bubbles (hard/soft boundaries), proximity alerts, preference badges
coupled to enforcement, rate-limited safety suggestions, and a preference
filtered room directory — plus a deterministic scenario simulator and a
websocket server for live clients.
"""

from .config import Constants, DEFAULTS
from .types import (
    BadgeSet,
    BubbleConfig,
    Effect,
    PlayerId,
    Pose,
    SocialGraph,
    Suggestion,
    WorldState,
)

__version__ = "0.1.0"

__all__ = [
    "Constants", "DEFAULTS",
    "BadgeSet", "BubbleConfig", "Effect", "PlayerId", "Pose",
    "SocialGraph", "Suggestion", "WorldState",
]
