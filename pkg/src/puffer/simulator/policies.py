"""Bot policies for scenario runs.

Each bot sees only its :class:`SimClient` view (server-filtered, same as a
human client) plus a shared seeded RNG, and returns protocol messages. All
randomness flows through the run's RNG so (script, seed) pins every decision.
"""

from __future__ import annotations

import math
import random

from ..config import Constants
from .client import SimClient
from .scenario import (
    CastMember,
    PATH_HOTKEY,
    PATH_MENU,
    PATH_SUGGESTION,
    ROLE_GREETER,
    ROLE_HUMAN,
    ROLE_SPAMMER,
    ROLE_TAGGER,
    ROLE_WANDERER,
)

INDIVIDUAL = "individual"
NO_PHYSICAL = "no_physical"


class Bot:
    role = ""

    def __init__(self, member: CastMember, client: SimClient,
                 rng: random.Random, consts: Constants, access_path: str):
        self.member = member
        self.client = client
        self.rng = rng
        self.consts = consts
        self.access_path = access_path
        self.policy = member.policy
        self._heading = rng.uniform(0.0, 2.0 * math.pi)
        self._heading_ticks = 0

    # -- movement helpers ---------------------------------------------------

    def _pose(self) -> tuple[float, float]:
        you = self.client.you
        return you["pose"]["x"], you["pose"]["y"]

    def _move_to(self, tx: float, ty: float, speed: float) -> dict:
        x, y = self._pose()
        dx, dy = tx - x, ty - y
        dist = math.hypot(dx, dy)
        step = min(speed, self.consts.v_max_mps) * self.consts.dt * 0.999
        facing = math.atan2(dy, dx) % (2.0 * math.pi) if dist > 1e-9 else 0.0
        if dist <= step:
            return self.client.envelope("move", {"x": tx, "y": ty, "facing": facing})
        scale = step / dist
        return self.client.envelope(
            "move", {"x": x + dx * scale, "y": y + dy * scale, "facing": facing})

    def _random_walk(self, speed: float = 1.5) -> dict:
        if self._heading_ticks <= 0:
            self._heading = self.rng.uniform(0.0, 2.0 * math.pi)
            self._heading_ticks = self.rng.randint(10, 30)
        self._heading_ticks -= 1
        x, y = self._pose()
        step = speed * self.consts.dt
        return self.client.envelope("move", {
            "x": x + step * math.cos(self._heading),
            "y": y + step * math.sin(self._heading),
            "facing": self._heading % (2.0 * math.pi),
        })

    def _dist_to(self, entry: dict) -> float:
        x, y = self._pose()
        return math.hypot(entry["pose"]["x"] - x, entry["pose"]["y"] - y)

    def step(self, tick: int) -> list[dict]:
        raise NotImplementedError


class Tagger(Bot):
    """Chases the nearest visible bubble-off player; a soft-hidden target is
    simply absent from the view, so the tagger falls back to wandering."""

    role = ROLE_TAGGER

    def step(self, tick: int) -> list[dict]:
        self.client.take_events()
        speed = float(self.policy.get("speed_mps", 3.0))
        chase_any = bool(self.policy.get("chase_any", False))
        targets = [
            e for e in self.client.visible_others()
            if chase_any or not e["bubble"]["enabled"]
        ]
        if not targets:
            return [self._random_walk()]
        target = min(targets, key=lambda e: (self._dist_to(e), e["player_id"]))
        return [self._move_to(target["pose"]["x"], target["pose"]["y"], speed)]


class Wanderer(Bot):
    role = ROLE_WANDERER

    def step(self, tick: int) -> list[dict]:
        self.client.take_events()
        return [self._random_walk(float(self.policy.get("speed_mps", 1.5)))]


class Greeter(Bot):
    """Approaches players to socialize but respects badge signals: keeps
    distance from an Individual badge and permanently backs off from anyone
    whose bubble flashed at it."""

    role = ROLE_GREETER

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.avoided: set[int] = set()

    def step(self, tick: int) -> list[dict]:
        me = self.client.player_id
        for event in self.client.take_events():
            if event["kind"] == "bubble_flash" and event["data"].get("violator") == me:
                self.avoided.add(event["data"]["owner"])
        candidates = [
            e for e in self.client.visible_others()
            if e["player_id"] not in self.avoided
        ]
        if not candidates:
            return [self._random_walk(1.0)]
        target = min(candidates, key=lambda e: (self._dist_to(e), e["player_id"]))
        dist = self._dist_to(target)
        keep_away = float(self.policy.get("respect_distance_m", 2.0))
        if target["badges"]["social"] == INDIVIDUAL:
            if dist < keep_away + 0.2:
                x, y = self._pose()
                away_x = x + (x - target["pose"]["x"])
                away_y = y + (y - target["pose"]["y"])
                return [self._move_to(away_x, away_y, 1.5)]
            return []  # close enough to wave from afar; never initiates chat
        if dist > 1.0:
            return [self._move_to(target["pose"]["x"], target["pose"]["y"], 1.5)]
        return []


class Spammer(Bot):
    """Sends bubble suggestions as fast as the server lets it, rotating
    through whoever is visible."""

    role = ROLE_SPAMMER

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self._rr = 0

    def step(self, tick: int) -> list[dict]:
        self.client.take_events()
        others = self.client.visible_others()
        if not others:
            return [self._random_walk(1.0)]
        self._rr = (self._rr + 1) % len(others)
        receiver = others[self._rr]["player_id"]
        return [self.client.envelope("send_suggestion", {
            "feature": "personal_bubble", "receiver": receiver,
        })]


class HumanProxy(Bot):
    """Models a study participant: stands around (distracted) and activates
    the personal bubble through the scenario's access path after a jittered
    human reaction latency. With ``assist: true`` it instead plays the helper
    who sends a bubble suggestion when someone closes in on its protectee."""

    role = ROLE_HUMAN

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.activate_at: int | None = None
        self.accept_id: int | None = None
        self.activated = False
        self.assist_done = False

    def _latency_ticks(self, base_s: float) -> int:
        jitter = self.consts.latency_jitter
        latency = base_s * (1.0 + self.rng.uniform(-jitter, jitter))
        return max(1, self.consts.seconds_to_ticks(latency))

    def step(self, tick: int) -> list[dict]:
        events = self.client.take_events()
        if self.policy.get("assist"):
            return self._step_assist(tick)
        if self.activated or self.client.you["bubble"]["enabled"]:
            self.activated = True
            return []

        path = self.policy.get("access_path", self.access_path)
        if self.activate_at is None:
            if path == PATH_MENU:
                danger = float(self.policy.get("danger_radius_m", 6.0))
                if any(self._dist_to(e) <= danger for e in self.client.visible_others()):
                    self.activate_at = tick + self._latency_ticks(self.consts.latency_menu_s)
            elif path == PATH_HOTKEY:
                if any(e["kind"] == "alert_raised" for e in events):
                    self.activate_at = tick + self._latency_ticks(self.consts.latency_hotkey_s)
            elif path == PATH_SUGGESTION:
                for sid, popup in sorted(self.client.popups.items()):
                    if popup["feature"] == "personal_bubble":
                        self.accept_id = sid
                        self.activate_at = tick + self._latency_ticks(
                            self.consts.latency_suggestion_s)
                        break

        if self.activate_at is not None and tick >= self.activate_at:
            self.activated = True
            if self.accept_id is not None:
                return [self.client.envelope("respond_suggestion", {
                    "action": "accept", "suggestion_id": self.accept_id,
                })]
            return [self.client.envelope("activate_bubble", {})]
        return []

    def _step_assist(self, tick: int) -> list[dict]:
        if self.assist_done:
            return []
        trigger = float(self.policy.get("assist_trigger_m", 4.0))
        others = self.client.visible_others()
        for protectee in others:
            if protectee["bubble"]["enabled"]:
                continue
            px, py = protectee["pose"]["x"], protectee["pose"]["y"]
            for other in others:
                if other["player_id"] == protectee["player_id"]:
                    continue
                d = math.hypot(other["pose"]["x"] - px, other["pose"]["y"] - py)
                if d <= trigger:
                    self.assist_done = True
                    return [self.client.envelope("send_suggestion", {
                        "feature": "personal_bubble",
                        "receiver": protectee["player_id"],
                    })]
        return []


_BOT_CLASSES = {
    ROLE_TAGGER: Tagger,
    ROLE_WANDERER: Wanderer,
    ROLE_GREETER: Greeter,
    ROLE_SPAMMER: Spammer,
    ROLE_HUMAN: HumanProxy,
}


def make_bot(member: CastMember, client: SimClient, rng: random.Random,
             consts: Constants, access_path: str) -> Bot:
    return _BOT_CLASSES[member.role](member, client, rng, consts, access_path)
