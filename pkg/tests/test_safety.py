import pytest
from hypothesis import given, strategies as st

from puffer import safety
from puffer.config import DEFAULTS
from puffer.errors import IllegalValue, InvalidRadius, SelfReference, UnknownPlayer
from puffer.types import BubbleConfig, FEATURE_ACTIVATED

from conftest import hard_bubble, make_state, soft_bubble


def bubble_tuple(b):
    return (b.enabled, b.boundary, b.radius_al, b.alerts_enabled,
            frozenset(b.alert_muted), frozenset(b.exempt))


# -- set_bubble --------------------------------------------------------------

def test_set_bubble_replaces_config():
    state = make_state((1, 0, 0))
    effects = safety.set_bubble(state, 1, hard_bubble(1.0))
    b = state.players[1].bubble
    assert (b.enabled, b.boundary, b.radius_al) == (True, "hard", 1.0)
    assert effects == []


def test_set_bubble_radius_bounds():
    state = make_state((1, 0, 0))
    with pytest.raises(InvalidRadius):
        safety.set_bubble(state, 1, hard_bubble(4.5))
    with pytest.raises(InvalidRadius):
        safety.set_bubble(state, 1, hard_bubble(0.49))
    # inclusive endpoints are legal
    safety.set_bubble(state, 1, hard_bubble(0.5))
    safety.set_bubble(state, 1, hard_bubble(4.0))


def test_set_bubble_rejects_unknown_boundary():
    state = make_state((1, 0, 0))
    with pytest.raises(IllegalValue):
        safety.set_bubble(state, 1, BubbleConfig(enabled=True, boundary="squishy"))


def test_set_bubble_unknown_player():
    state = make_state((1, 0, 0))
    with pytest.raises(UnknownPlayer):
        safety.set_bubble(state, 9, hard_bubble())


def test_set_bubble_soft_hides_close_neighbor():
    # q at 1.2 m, soft radius 2.0 AL = 1.5 m -> pair hidden
    state = make_state((1, 0, 0), (2, 1.2, 0))
    effects = safety.set_bubble(state, 1, soft_bubble(2.0))
    assert state.is_hidden(1, 2)
    assert [e.kind for e in effects] == ["visibility_changed"]
    assert effects[0].data == {"pair": [1, 2], "visible": False}


def test_set_bubble_clears_interaction_badge():
    state = make_state((1, 0, 0))
    safety.set_badge(state, 1, "interaction", "no_physical")
    assert state.players[1].badges.saved_bubble is not None
    safety.set_bubble(state, 1, hard_bubble(2.0))
    badges = state.players[1].badges
    assert badges.interaction == "open"
    assert badges.saved_bubble is None
    assert state.players[1].bubble.radius_al == 2.0


# -- activate_default_bubble ---------------------------------------------------

def test_activate_default_from_off():
    state = make_state((1, 0, 0))
    effects = safety.activate_default_bubble(state, 1)
    b = state.players[1].bubble
    assert (b.enabled, b.boundary, b.radius_al) == (True, "hard", 1.0)
    assert [e.kind for e in effects] == [FEATURE_ACTIVATED]


def test_activate_default_idempotent():
    state = make_state((1, 0, 0, soft_bubble(2.0)))
    before = bubble_tuple(state.players[1].bubble)
    assert safety.activate_default_bubble(state, 1) == []
    assert bubble_tuple(state.players[1].bubble) == before


def test_activate_default_unknown_player():
    state = make_state((1, 0, 0))
    with pytest.raises(UnknownPlayer):
        safety.activate_default_bubble(state, 7)


# -- badges -------------------------------------------------------------------

def test_interaction_badge_forces_coupled_bubble():
    state = make_state((1, 0, 0))
    safety.set_badge(state, 1, "interaction", "arm_length")
    b = state.players[1].bubble
    assert (b.enabled, b.boundary, b.radius_al) == (True, "hard", 1.0)
    safety.set_badge(state, 1, "interaction", "no_physical")
    b = state.players[1].bubble
    assert (b.enabled, b.boundary, b.radius_al) == (True, "hard", 4.0)


def test_badge_saves_and_restores_prior_bubble():
    state = make_state((1, 0, 0, soft_bubble(3.0, alerts_enabled=False)))
    prior = bubble_tuple(state.players[1].bubble)
    safety.set_badge(state, 1, "interaction", "no_physical")
    assert state.players[1].badges.saved_bubble is not None
    safety.clear_badge(state, 1, "interaction")
    assert bubble_tuple(state.players[1].bubble) == prior
    assert state.players[1].badges.saved_bubble is None
    assert state.players[1].badges.interaction == "open"


def test_badge_set_twice_is_noop():
    state = make_state((1, 0, 0))
    safety.set_badge(state, 1, "interaction", "arm_length")
    saved = state.players[1].badges.saved_bubble
    safety.set_badge(state, 1, "interaction", "arm_length")
    assert state.players[1].badges.saved_bubble is saved


def test_badge_switch_keeps_original_saved_bubble():
    state = make_state((1, 0, 0, soft_bubble(2.5)))
    safety.set_badge(state, 1, "interaction", "arm_length")
    safety.set_badge(state, 1, "interaction", "no_physical")
    safety.clear_badge(state, 1, "interaction")
    b = state.players[1].bubble
    assert (b.boundary, b.radius_al) == ("soft", 2.5)


def test_set_badge_open_equals_clear():
    state = make_state((1, 0, 0))
    safety.set_badge(state, 1, "interaction", "no_physical")
    safety.set_badge(state, 1, "interaction", "open")
    assert state.players[1].badges.interaction == "open"
    assert not state.players[1].bubble.enabled


def test_sound_and_social_badges_have_no_enforcement():
    state = make_state((1, 0, 0))
    safety.set_badge(state, 1, "sound", "quiet")
    safety.set_badge(state, 1, "social", "individual")
    assert not state.players[1].bubble.enabled
    assert state.players[1].badges.sound == "quiet"
    assert state.players[1].badges.social == "individual"
    safety.clear_badge(state, 1, "sound")
    safety.clear_badge(state, 1, "social")
    assert state.players[1].badges.sound == "none"
    assert state.players[1].badges.social == "none"


def test_illegal_badge_values():
    state = make_state((1, 0, 0))
    with pytest.raises(IllegalValue):
        safety.set_badge(state, 1, "interaction", "quiet")
    with pytest.raises(IllegalValue):
        safety.set_badge(state, 1, "mood", "happy")
    with pytest.raises(IllegalValue):
        safety.clear_badge(state, 1, "mood")


def test_clear_badge_on_clear_slot_is_noop():
    state = make_state((1, 0, 0, hard_bubble(2.0)))
    assert safety.clear_badge(state, 1, "interaction") == []
    assert state.players[1].bubble.radius_al == 2.0


bubble_strategy = st.builds(
    BubbleConfig,
    enabled=st.booleans(),
    boundary=st.sampled_from(["hard", "soft"]),
    radius_al=st.floats(0.5, 4.0, allow_nan=False),
    alerts_enabled=st.booleans(),
    alert_muted=st.sets(st.integers(2, 9), max_size=3),
    exempt=st.sets(st.integers(2, 9), max_size=3),
)


@given(prior=bubble_strategy, badge=st.sampled_from(["arm_length", "no_physical"]))
def test_badge_roundtrip_property(prior, badge):
    state = make_state((1, 0, 0))
    state.players[1].bubble = prior.clone()
    expected = bubble_tuple(prior)
    safety.set_badge(state, 1, "interaction", badge)
    b = state.players[1].bubble
    coupled = 1.0 if badge == "arm_length" else 4.0
    assert (b.enabled, b.boundary, b.radius_al) == (True, "hard", coupled)
    safety.clear_badge(state, 1, "interaction")
    assert bubble_tuple(state.players[1].bubble) == expected


# -- social actions ------------------------------------------------------------

def test_add_friend_symmetric_and_exempt():
    state = make_state((1, 0, 0), (2, 5, 0))
    safety.apply_social(state, 1, "add_friend", 2)
    assert state.social.are_friends(1, 2) and state.social.are_friends(2, 1)
    assert 2 in state.players[1].bubble.exempt
    assert 1 in state.players[2].bubble.exempt
    safety.apply_social(state, 2, "remove_friend", 1)
    assert not state.social.are_friends(1, 2)
    assert 2 not in state.players[1].bubble.exempt
    assert 1 not in state.players[2].bubble.exempt


def test_social_self_reference():
    state = make_state((1, 0, 0))
    with pytest.raises(SelfReference):
        safety.apply_social(state, 1, "add_friend", 1)


def test_mute_and_alert_toggles():
    state = make_state((1, 0, 0), (2, 5, 0))
    safety.apply_social(state, 1, "mute_alerts_from", 2)
    assert 2 in state.players[1].bubble.alert_muted
    safety.apply_social(state, 1, "disable_all_alerts")
    assert not state.players[1].bubble.alerts_enabled
    safety.apply_social(state, 1, "enable_all_alerts")
    assert state.players[1].bubble.alerts_enabled


def test_social_unknown_action_and_missing_target():
    state = make_state((1, 0, 0), (2, 5, 0))
    with pytest.raises(IllegalValue):
        safety.apply_social(state, 1, "poke", 2)
    with pytest.raises(IllegalValue):
        safety.apply_social(state, 1, "add_friend")
    with pytest.raises(UnknownPlayer):
        safety.apply_social(state, 1, "add_friend", 42)


# -- determinism -----------------------------------------------------------------

def test_operation_replay_determinism():
    def run():
        state = make_state((1, 0, 0), (2, 1.0, 0))
        log = []
        log += safety.set_bubble(state, 1, soft_bubble(2.0))
        log += safety.set_badge(state, 2, "interaction", "no_physical")
        safety.apply_social(state, 1, "add_friend", 2)
        log += safety.clear_badge(state, 2, "interaction")
        return state.to_json(), [(e.kind, e.tick, e.data) for e in log]

    assert run() == run()
