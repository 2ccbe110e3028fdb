"""Safety-suggestion messaging: send, respond, expiry, spam cooldown.

A suggestion is a pre-programmed recommendation of one safety feature; there
is deliberately no free text. Senders are rate limited with a sliding window
over their recent sends, and a receiver who blocks a sender (or all senders)
is indistinguishable, from the sender's side, from one who blocks everything.
"""

from __future__ import annotations

from dataclasses import dataclass

from .config import Constants, DEFAULTS
from .errors import (
    AlreadyResolved,
    IllegalValue,
    NotAddressee,
    SelfSuggestion,
    UnknownSuggestion,
)
from .safety import MUTE_ALERTS_FROM, activate_default_bubble, apply_social
from .types import (
    ACCEPTED,
    BLOCKED,
    DECLINED,
    Effect,
    EXPIRED,
    FEATURES,
    FEATURE_ACTIVATED,
    FEATURE_BLOCK,
    FEATURE_BUBBLE,
    FEATURE_MUTE,
    MENU_REQUESTED,
    OPENED,
    PENDING,
    PlayerId,
    RateWindow,
    SUGGESTION_DELIVERED,
    SUGGESTION_DISMISSED,
    Suggestion,
    WorldState,
)

# send outcomes
DELIVERED = "delivered"
NOT_RECEIVING = "not_receiving"
COOLING_DOWN = "cooling_down"
PAIR_PENDING = "pair_pending"

# response actions
ACCEPT = "accept"
MORE = "more"
DECLINE = "decline"
BLOCK_SENDER = "block_sender"
BLOCK_ALL = "block_all"
RESPONSE_ACTIONS = (ACCEPT, MORE, DECLINE, BLOCK_SENDER, BLOCK_ALL)


@dataclass
class SendResult:
    outcome: str
    suggestion_id: int | None = None
    cooldown_until: int | None = None
    effects: list[Effect] | None = None


def send_suggestion(
    state: WorldState,
    sender: PlayerId,
    receiver: PlayerId,
    feature: str,
    now: int,
    subject: PlayerId | None = None,
    consts: Constants = DEFAULTS,
) -> SendResult:
    """Attempt to send a suggestion; returns the sender-visible outcome.

    Block checks come before everything else so a blocked sender learns only
    "not receiving", never which kind of block applies. The send that crosses
    the rate threshold is still delivered; the cooldown starts after it.
    """
    if sender == receiver:
        raise SelfSuggestion("cannot suggest to yourself")
    state.require_player(sender)
    state.require_player(receiver)
    if feature not in FEATURES:
        raise IllegalValue(f"unknown feature {feature!r}")
    if feature in (FEATURE_BLOCK, FEATURE_MUTE):
        if subject is None:
            raise IllegalValue(f"{feature} suggestion needs a subject player")
        if subject == receiver:
            raise IllegalValue("subject must differ from the receiver")
        state.require_player(subject)
    else:
        subject = None

    if state.social.blocks(receiver, sender):
        return SendResult(NOT_RECEIVING)

    window = state.rate_windows.setdefault(sender, RateWindow())
    if window.cooldown_until is not None and now < window.cooldown_until:
        return SendResult(COOLING_DOWN, cooldown_until=window.cooldown_until)

    for s in state.suggestions.values():
        if s.state == PENDING and s.sender == sender and s.receiver == receiver:
            return SendResult(PAIR_PENDING)

    sid = state.next_suggestion_id
    state.next_suggestion_id += 1
    state.suggestions[sid] = Suggestion(sid, sender, receiver, feature, subject, now)

    window_ticks = consts.seconds_to_ticks(consts.rate_window_s)
    window.send_ticks = [t for t in window.send_ticks if t > now - window_ticks]
    window.send_ticks.append(now)
    if len(window.send_ticks) > consts.rate_limit_sends:
        until = now + consts.seconds_to_ticks(consts.cooldown_s)
        if window.cooldown_until is None or until > window.cooldown_until:
            window.cooldown_until = until

    effect = Effect(SUGGESTION_DELIVERED, now, {
        "feature": feature,
        "receiver": receiver,
        "sender": sender,
        "subject": subject,
        "suggestion_id": sid,
    })
    return SendResult(DELIVERED, suggestion_id=sid, effects=[effect])


def respond(
    state: WorldState,
    receiver: PlayerId,
    suggestion_id: int,
    action: str,
    now: int,
    consts: Constants = DEFAULTS,
) -> list[Effect]:
    """Resolve a pending suggestion. Only an explicit Accept ever changes the
    receiver's safety state; everything else records the decision."""
    suggestion = state.suggestions.get(suggestion_id)
    if suggestion is None:
        raise UnknownSuggestion(f"no suggestion {suggestion_id}")
    if suggestion.receiver != receiver:
        raise NotAddressee(f"suggestion {suggestion_id} is not addressed to {receiver}")
    if suggestion.state != PENDING:
        raise AlreadyResolved(f"suggestion {suggestion_id} is {suggestion.state}")
    if action not in RESPONSE_ACTIONS:
        raise IllegalValue(f"unknown response action {action!r}")
    state.require_player(receiver)

    effects: list[Effect] = []
    if action == ACCEPT:
        suggestion.state = ACCEPTED
        if suggestion.feature == FEATURE_BUBBLE:
            effects.extend(activate_default_bubble(state, receiver, consts))
        elif suggestion.feature == FEATURE_BLOCK:
            if suggestion.subject is not None and suggestion.subject in state.players:
                state.social.blocked_senders.setdefault(receiver, set()).add(
                    suggestion.subject
                )
            effects.append(Effect(FEATURE_ACTIVATED, now, {
                "feature": FEATURE_BLOCK, "player": receiver,
                "subject": suggestion.subject,
            }))
        else:  # mute
            if suggestion.subject is not None and suggestion.subject in state.players:
                apply_social(state, receiver, MUTE_ALERTS_FROM, suggestion.subject)
            effects.append(Effect(FEATURE_ACTIVATED, now, {
                "feature": FEATURE_MUTE, "player": receiver,
                "subject": suggestion.subject,
            }))
        if suggestion.feature == FEATURE_BUBBLE and not effects:
            # bubble was already on; Accept still counts as an activation ack
            effects.append(Effect(FEATURE_ACTIVATED, now, {
                "feature": FEATURE_BUBBLE, "player": receiver,
            }))
    elif action == MORE:
        suggestion.state = OPENED
        effects.append(Effect(MENU_REQUESTED, now, {
            "feature": suggestion.feature, "player": receiver,
        }))
    elif action == DECLINE:
        suggestion.state = DECLINED
    elif action == BLOCK_SENDER:
        suggestion.state = BLOCKED
        state.social.blocked_senders.setdefault(receiver, set()).add(suggestion.sender)
    else:  # block all
        suggestion.state = BLOCKED
        state.social.block_all.add(receiver)
    return effects


def expire_pending(
    state: WorldState, now: int, consts: Constants = DEFAULTS
) -> list[Effect]:
    """Expire pending suggestions past their pop-up lifetime; invisible to
    the sender, dismisses the receiver's pop-up."""
    limit = consts.seconds_to_ticks(consts.suggestion_expire_s)
    effects: list[Effect] = []
    for sid in sorted(state.suggestions):
        suggestion = state.suggestions[sid]
        if suggestion.state == PENDING and now - suggestion.sent_at >= limit:
            suggestion.state = EXPIRED
            effects.append(Effect(SUGGESTION_DISMISSED, now, {
                "receiver": suggestion.receiver, "suggestion_id": sid,
            }))
    return effects
