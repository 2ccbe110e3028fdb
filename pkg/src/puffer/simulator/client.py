"""Minimal protocol client used by simulator bots (and the over-wire smoke
mode): tracks the visibility-filtered view exactly as a real client would, so
bots can only act on what the server chose to show them."""

from __future__ import annotations

import json
from typing import Any


class SimClient:
    def __init__(self) -> None:
        self.player_id: int | None = None
        self.tick: int = 0
        self.players: dict[int, dict] = {}   # visible others, by id
        self.you: dict | None = None
        self.events: list[dict] = []         # undrained effect events
        self.send_results: list[dict] = []
        self.popups: dict[int, dict] = {}    # pending suggestion pop-ups
        self._seq = 0

    def next_seq(self) -> int:
        self._seq += 1
        return self._seq

    def envelope(self, mtype: str, payload: dict[str, Any]) -> dict:
        return {"type": mtype, "seq": self.next_seq(), "payload": payload}

    def feed(self, frame: str) -> None:
        self.feed_obj(json.loads(frame))

    def feed_obj(self, obj: dict) -> None:
        mtype = obj.get("type")
        payload = obj.get("payload", {})
        if mtype == "welcome":
            self.player_id = payload["player_id"]
        elif mtype == "send_result":
            self.send_results.append(payload)
        elif mtype == "snapshot":
            self.tick = payload["tick"]
            if payload["full"]:
                self.players = {e["player_id"]: e for e in payload["players"]}
            else:
                for entry in payload["players"]:
                    self.players[entry["player_id"]] = entry
                for pid in payload["removed"]:
                    self.players.pop(pid, None)
            self.you = payload["you"]
            for event in payload["events"]:
                self.events.append(event)
                if event["kind"] == "suggestion_delivered":
                    self.popups[event["data"]["suggestion_id"]] = event["data"]
                elif event["kind"] == "suggestion_dismissed":
                    self.popups.pop(event["data"]["suggestion_id"], None)

    def take_events(self) -> list[dict]:
        events, self.events = self.events, []
        return events

    def take_send_results(self) -> list[dict]:
        results, self.send_results = self.send_results, []
        return results

    def visible_others(self) -> list[dict]:
        return [self.players[pid] for pid in sorted(self.players)]
