import random

import pytest
from hypothesis import given, settings, strategies as st

from puffer import suggestions
from puffer.config import DEFAULTS
from puffer.errors import (
    AlreadyResolved,
    IllegalValue,
    NotAddressee,
    SelfSuggestion,
    UnknownPlayer,
    UnknownSuggestion,
)

import oracles
from conftest import make_state

K = DEFAULTS.rate_limit_sends
W = DEFAULTS.seconds_to_ticks(DEFAULTS.rate_window_s)
C = DEFAULTS.seconds_to_ticks(DEFAULTS.cooldown_s)


def three_players():
    return make_state((1, 0, 0), (2, 2, 0), (3, 4, 0))


# -- send ------------------------------------------------------------------------

def test_send_delivers_with_effect():
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", now=10)
    assert result.outcome == "delivered"
    assert state.suggestions[result.suggestion_id].state == "pending"
    (effect,) = result.effects
    assert effect.kind == "suggestion_delivered"
    assert effect.data["receiver"] == 2 and effect.data["sender"] == 1


def test_send_validation():
    state = three_players()
    with pytest.raises(SelfSuggestion):
        suggestions.send_suggestion(state, 1, 1, "personal_bubble", 0)
    with pytest.raises(UnknownPlayer):
        suggestions.send_suggestion(state, 1, 9, "personal_bubble", 0)
    with pytest.raises(IllegalValue):
        suggestions.send_suggestion(state, 1, 2, "teleport", 0)
    with pytest.raises(IllegalValue):
        suggestions.send_suggestion(state, 1, 2, "block", 0)  # needs subject
    with pytest.raises(IllegalValue):
        suggestions.send_suggestion(state, 1, 2, "block", 0, subject=2)
    with pytest.raises(UnknownPlayer):
        suggestions.send_suggestion(state, 1, 2, "mute", 0, subject=9)


def test_one_pending_per_pair():
    state = three_players()
    suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    again = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 1)
    assert again.outcome == "pair_pending"
    # a different receiver is fine
    assert suggestions.send_suggestion(state, 1, 3, "personal_bubble", 1).outcome == "delivered"


def test_threshold_crossing_send_still_delivered():
    state = make_state(*[(i, i, 0) for i in range(1, 9)])
    outcomes = [
        suggestions.send_suggestion(state, 1, r, "personal_bubble", now=r).outcome
        for r in range(2, 9)
    ]
    # sends 1..5 fill the window, the 6th crosses and is still delivered,
    # the 7th hits the cooldown
    assert outcomes == ["delivered"] * (K + 1) + ["cooling_down"]
    window = state.rate_windows[1]
    assert window.cooldown_until == 7 + C


def test_cooldown_reports_until_tick():
    state = make_state(*[(i, i, 0) for i in range(1, 9)])
    for r in range(2, 8):
        suggestions.send_suggestion(state, 1, r, "personal_bubble", now=10)
    result = suggestions.send_suggestion(state, 1, 8, "personal_bubble", now=11)
    assert result.outcome == "cooling_down"
    assert result.cooldown_until == 10 + C
    # after the cooldown elapses, sending works again
    ok = suggestions.send_suggestion(state, 1, 8, "personal_bubble", now=10 + C)
    assert ok.outcome == "delivered"


def test_window_slides():
    state = make_state(*[(i, i, 0) for i in range(1, 13)])
    # K sends early, then K more after the window has slid past them
    for i, r in enumerate(range(2, 2 + K)):
        assert suggestions.send_suggestion(
            state, 1, r, "personal_bubble", now=i).outcome == "delivered"
    later = W + K + 1
    for i, r in enumerate(range(2 + K, 2 + 2 * K)):
        assert suggestions.send_suggestion(
            state, 1, r, "personal_bubble", now=later + i).outcome == "delivered"
    assert state.rate_windows[1].cooldown_until is None


def test_rate_limit_matches_oracle_fuzz():
    rng = random.Random(3)
    for _ in range(200):
        n_players = rng.randint(3, 10)
        state = make_state(*[(i, i, 0) for i in range(1, n_players + 1)])
        t = 0
        ticks = []
        for _ in range(rng.randint(1, 25)):
            t += rng.randint(0, W // 2)
            ticks.append(t)
        got = []
        for i, now in enumerate(ticks):
            receiver = 2 + (i % (n_players - 1))
            result = suggestions.send_suggestion(
                state, 1, receiver, "personal_bubble", now)
            got.append(result.outcome)
            if result.outcome == "delivered":
                # resolve immediately so pair-pending never interferes
                suggestions.respond(state, receiver, result.suggestion_id,
                                    "decline", now)
        assert got == oracles.rate_limit_replay(ticks, K, W, C)


# -- block opacity ------------------------------------------------------------------

def test_block_sender_vs_block_all_indistinguishable():
    for mode in ("block_sender", "block_all"):
        state = three_players()
        first = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
        suggestions.respond(state, 2, first.suggestion_id, mode, 1)
        result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 5)
        assert result.outcome == "not_receiving"
        assert result.suggestion_id is None and result.cooldown_until is None
        assert result.effects is None
        # nothing new recorded on the receiver side
        assert all(s.receiver != 2 or s.state != "pending"
                   for s in state.suggestions.values())


def test_blocked_send_does_not_consume_rate_window():
    state = three_players()
    first = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    suggestions.respond(state, 2, first.suggestion_id, "block_sender", 1)
    for now in range(2, 2 + 3 * K):
        assert suggestions.send_suggestion(
            state, 1, 2, "personal_bubble", now).outcome == "not_receiving"
    assert len(state.rate_windows[1].send_ticks) == 1  # only the first send


# -- respond -------------------------------------------------------------------------

def test_accept_bubble_activates_default():
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    effects = suggestions.respond(state, 2, result.suggestion_id, "accept", 3)
    bubble = state.players[2].bubble
    assert (bubble.enabled, bubble.boundary, bubble.radius_al) == (True, "hard", 1.0)
    assert any(e.kind == "feature_activated" for e in effects)
    assert state.suggestions[result.suggestion_id].state == "accepted"


def test_accept_with_bubble_already_on_still_acks():
    state = three_players()
    state.players[2].bubble.enabled = True
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    effects = suggestions.respond(state, 2, result.suggestion_id, "accept", 3)
    assert [e.kind for e in effects] == ["feature_activated"]


def test_accept_block_and_mute_with_subject():
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "block", 0, subject=3)
    suggestions.respond(state, 2, result.suggestion_id, "accept", 1)
    assert state.social.blocks(2, 3)

    result = suggestions.send_suggestion(state, 1, 2, "mute", 2, subject=3)
    suggestions.respond(state, 2, result.suggestion_id, "accept", 3)
    assert 3 in state.players[2].bubble.alert_muted


def test_no_state_change_without_accept():
    for action in ("more", "decline", "block_sender", "block_all"):
        state = three_players()
        result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
        suggestions.respond(state, 2, result.suggestion_id, action, 1)
        assert not state.players[2].bubble.enabled


def test_more_opens_menu():
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    effects = suggestions.respond(state, 2, result.suggestion_id, "more", 1)
    assert [e.kind for e in effects] == ["menu_requested"]
    assert state.suggestions[result.suggestion_id].state == "opened"


def test_respond_errors():
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", 0)
    with pytest.raises(UnknownSuggestion):
        suggestions.respond(state, 2, 99, "accept", 1)
    with pytest.raises(NotAddressee):
        suggestions.respond(state, 3, result.suggestion_id, "accept", 1)
    with pytest.raises(IllegalValue):
        suggestions.respond(state, 2, result.suggestion_id, "shrug", 1)
    suggestions.respond(state, 2, result.suggestion_id, "decline", 1)
    with pytest.raises(AlreadyResolved):
        suggestions.respond(state, 2, result.suggestion_id, "accept", 2)


# -- expiry --------------------------------------------------------------------------

def test_expiry_threshold():
    limit = DEFAULTS.seconds_to_ticks(DEFAULTS.suggestion_expire_s)
    state = three_players()
    result = suggestions.send_suggestion(state, 1, 2, "personal_bubble", now=0)
    assert suggestions.expire_pending(state, now=limit - 1) == []
    assert state.suggestions[result.suggestion_id].state == "pending"
    effects = suggestions.expire_pending(state, now=limit)
    assert state.suggestions[result.suggestion_id].state == "expired"
    assert [e.kind for e in effects] == ["suggestion_dismissed"]
    assert effects[0].data == {"receiver": 2, "suggestion_id": result.suggestion_id}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 50)), max_size=30))
def test_pending_set_matches_replay_oracle(script):
    """Random send/respond/expire interleavings: the surviving pending set
    matches a literal replay of the lifecycle rules."""
    limit = DEFAULTS.seconds_to_ticks(DEFAULTS.suggestion_expire_s)
    state = make_state((1, 0, 0), (2, 2, 0), (3, 4, 0), (4, 6, 0))
    expected_pending: dict[int, tuple[int, int, int]] = {}  # sid -> (s, r, sent)
    now = 0
    for op, arg in script:
        now += arg
        # replay-side expiry
        for sid in list(expected_pending):
            if now - expected_pending[sid][2] >= limit:
                del expected_pending[sid]
        suggestions.expire_pending(state, now)
        if op in (0, 1):
            sender = 1 + op
            receiver = 4 - op
            result = suggestions.send_suggestion(
                state, sender, receiver, "personal_bubble", now)
            if any((s, r) == (sender, receiver)
                   for s, r, _ in expected_pending.values()):
                assert result.outcome == "pair_pending"
            elif result.outcome == "delivered":
                expected_pending[result.suggestion_id] = (sender, receiver, now)
        elif op == 2 and expected_pending:
            sid = sorted(expected_pending)[0]
            _, receiver, _ = expected_pending.pop(sid)
            suggestions.respond(state, receiver, sid, "decline", now)
    got = {sid for sid, s in state.suggestions.items() if s.state == "pending"}
    assert got == set(expected_pending)
