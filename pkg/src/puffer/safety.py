"""Pure state-machine operations for bubbles, badges and the social graph.

All functions mutate the passed :class:`WorldState` in place and return the
effects they caused. They never consult a clock or RNG; the current tick is
read off the state.
"""

from __future__ import annotations

from .config import Constants, DEFAULTS
from .errors import IllegalValue, InvalidRadius, SelfReference
from .types import (
    ARM_LENGTH,
    BADGE_VALUES,
    BubbleConfig,
    Effect,
    FEATURE_ACTIVATED,
    HARD,
    INTERACTION,
    NO_PHYSICAL,
    OPEN,
    PlayerId,
    SOCIAL,
    SOCIAL_NONE,
    SOUND,
    SOUND_NONE,
    WorldState,
)

# interaction badge -> forced hard-bubble radius (arm-lengths)
COUPLED_RADIUS = {ARM_LENGTH: 1.0, NO_PHYSICAL: 4.0}


def validate_bubble(cfg: BubbleConfig, consts: Constants = DEFAULTS) -> None:
    if not (consts.radius_min_al <= cfg.radius_al <= consts.radius_max_al):
        raise InvalidRadius(
            f"radius_al {cfg.radius_al} outside "
            f"[{consts.radius_min_al}, {consts.radius_max_al}]"
        )
    if cfg.boundary not in (HARD, "soft"):
        raise IllegalValue(f"unknown boundary {cfg.boundary!r}")


def set_bubble(
    state: WorldState,
    pid: PlayerId,
    cfg: BubbleConfig,
    consts: Constants = DEFAULTS,
) -> list[Effect]:
    """Replace a player's bubble with an explicit manual configuration.

    Manual configuration wins over badge coupling: an active interaction
    badge is cleared (its saved bubble discarded) before the new config is
    applied, so the displayed badge never disagrees with enforcement.
    """
    player = state.require_player(pid)
    validate_bubble(cfg, consts)
    if player.badges.interaction != OPEN:
        player.badges.interaction = OPEN
        player.badges.saved_bubble = None
    player.bubble = cfg.clone()
    return _visibility_effects(state, consts)


def activate_default_bubble(
    state: WorldState, pid: PlayerId, consts: Constants = DEFAULTS
) -> list[Effect]:
    """Shortcut activation: turn on the default hard bubble; idempotent."""
    player = state.require_player(pid)
    if player.bubble.enabled:
        return []
    player.bubble.enabled = True
    player.bubble.boundary = HARD
    player.bubble.radius_al = consts.default_radius_al
    effects = _visibility_effects(state, consts)
    effects.append(Effect(
        FEATURE_ACTIVATED, state.tick,
        {"feature": "personal_bubble", "player": pid},
    ))
    return effects


def set_badge(
    state: WorldState,
    pid: PlayerId,
    slot: str,
    value: str,
    consts: Constants = DEFAULTS,
) -> list[Effect]:
    player = state.require_player(pid)
    legal = BADGE_VALUES.get(slot)
    if legal is None:
        raise IllegalValue(f"unknown badge slot {slot!r}")
    if value not in legal:
        raise IllegalValue(f"{value!r} is not a legal {slot} badge")

    if slot == INTERACTION:
        if value == player.badges.interaction:
            return []  # no-op so saved_bubble is never clobbered
        if value == OPEN:
            return clear_badge(state, pid, slot, consts)
        if player.badges.saved_bubble is None:
            player.badges.saved_bubble = player.bubble.clone()
        player.badges.interaction = value
        bubble = player.bubble
        bubble.enabled = True
        bubble.boundary = HARD
        bubble.radius_al = COUPLED_RADIUS[value]
        return _visibility_effects(state, consts)

    if slot == SOUND:
        player.badges.sound = value
    else:
        player.badges.social = value
    return []


def clear_badge(
    state: WorldState, pid: PlayerId, slot: str, consts: Constants = DEFAULTS
) -> list[Effect]:
    player = state.require_player(pid)
    if slot == INTERACTION:
        if player.badges.interaction == OPEN:
            return []
        player.badges.interaction = OPEN
        if player.badges.saved_bubble is not None:
            player.bubble = player.badges.saved_bubble
            player.badges.saved_bubble = None
        return _visibility_effects(state, consts)
    if slot == SOUND:
        player.badges.sound = SOUND_NONE
    elif slot == SOCIAL:
        player.badges.social = SOCIAL_NONE
    else:
        raise IllegalValue(f"unknown badge slot {slot!r}")
    return []


# social actions
ADD_FRIEND = "add_friend"
REMOVE_FRIEND = "remove_friend"
MUTE_ALERTS_FROM = "mute_alerts_from"
DISABLE_ALL_ALERTS = "disable_all_alerts"
ENABLE_ALL_ALERTS = "enable_all_alerts"
SOCIAL_ACTIONS = (
    ADD_FRIEND, REMOVE_FRIEND, MUTE_ALERTS_FROM,
    DISABLE_ALL_ALERTS, ENABLE_ALL_ALERTS,
)


def apply_social(
    state: WorldState,
    actor: PlayerId,
    action: str,
    other: PlayerId | None = None,
) -> None:
    """Update the social graph / alert settings for one player action."""
    player = state.require_player(actor)
    if action in (ADD_FRIEND, REMOVE_FRIEND, MUTE_ALERTS_FROM):
        if other is None:
            raise IllegalValue(f"{action} needs a target player")
        if other == actor:
            raise SelfReference("cannot target yourself")
        target = state.require_player(other)
        if action == ADD_FRIEND:
            state.social.add_friend(actor, other)
            # friends are exempt from each other's bubbles
            player.bubble.exempt.add(other)
            target.bubble.exempt.add(actor)
        elif action == REMOVE_FRIEND:
            state.social.remove_friend(actor, other)
            player.bubble.exempt.discard(other)
            target.bubble.exempt.discard(actor)
        else:
            player.bubble.alert_muted.add(other)
    elif action == DISABLE_ALL_ALERTS:
        player.bubble.alerts_enabled = False
    elif action == ENABLE_ALL_ALERTS:
        player.bubble.alerts_enabled = True
    else:
        raise IllegalValue(f"unknown social action {action!r}")


def _visibility_effects(state: WorldState, consts: Constants) -> list[Effect]:
    # imported here: proximity depends on types only, so no cycle at module
    # load, but keeping the import local makes the layering obvious
    from .proximity import refresh_visibility

    return refresh_visibility(state, consts)
