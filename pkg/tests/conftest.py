from __future__ import annotations

import pytest

from puffer.config import DEFAULTS
from puffer.types import BubbleConfig, Pose, WorldState


@pytest.fixture
def consts():
    return DEFAULTS


def make_state(*entries) -> WorldState:
    """Build a WorldState from (pid, x, y[, bubble]) tuples."""
    state = WorldState()
    for entry in entries:
        pid, x, y = entry[0], entry[1], entry[2]
        player = state.add_player(pid, f"p{pid}", Pose(float(x), float(y), 0.0))
        if len(entry) > 3 and entry[3] is not None:
            player.bubble = entry[3]
    return state


def hard_bubble(radius_al: float = 1.0, **kw) -> BubbleConfig:
    return BubbleConfig(enabled=True, boundary="hard", radius_al=radius_al, **kw)


def soft_bubble(radius_al: float = 2.0, **kw) -> BubbleConfig:
    return BubbleConfig(enabled=True, boundary="soft", radius_al=radius_al, **kw)
