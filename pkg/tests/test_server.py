import json
import os
import random
from pathlib import Path

import pytest

from puffer.config import DEFAULTS
from puffer.rooms import RoomDirectory
from puffer.server.core import ACK_TIMEOUT_S, ServerCore

GOLDEN = Path(__file__).parent / "golden" / "server_session.jsonl"


def make_core(capacity=32):
    directory = RoomDirectory()
    directory.add_room("lobby", "Lobby", ["social"], capacity)
    return ServerCore(directory)


class Client:
    """Scripted client: tracks seq, records every frame it receives."""

    def __init__(self, core: ServerCore, name: str):
        self.core = core
        self.sid = core.open_session()
        self.seq = 0
        self.frames: list[str] = []
        self.send("hello", {"name": name})

    def send(self, mtype: str, payload: dict | None = None) -> list[dict]:
        self.seq += 1
        out = self.core.handle_message(self.sid, json.dumps({
            "type": mtype, "seq": self.seq, "payload": payload or {},
        }))
        return self.collect(out)

    def collect(self, outgoing) -> list[dict]:
        mine = []
        for sid, frame in outgoing:
            if sid == self.sid:
                self.frames.append(frame)
                mine.append(json.loads(frame))
        return mine

    @property
    def player_id(self):
        for frame in self.frames:
            obj = json.loads(frame)
            if obj["type"] == "welcome":
                return obj["payload"]["player_id"]
        return None

    def snapshots(self):
        return [json.loads(f)["payload"] for f in self.frames
                if json.loads(f)["type"] == "snapshot"]


def tick(core, clients, n=1):
    for _ in range(n):
        out = core.tick_all()
        for client in clients:
            client.collect(out)


# -- handshake and envelope rules ---------------------------------------------------

def test_hello_handshake_and_welcome():
    core = make_core()
    client = Client(core, "Ada")
    (welcome,) = [json.loads(f) for f in client.frames]
    assert welcome["type"] == "welcome"
    assert welcome["payload"]["tick_rate"] == DEFAULTS.tick_hz
    assert welcome["payload"]["player_id"] == 1


def test_message_before_hello_rejected():
    core = make_core()
    sid = core.open_session()
    out = core.handle_message(sid, json.dumps(
        {"type": "move", "seq": 1, "payload": {"x": 0, "y": 0, "facing": 0}}))
    (frame,) = [json.loads(f) for _, f in out]
    assert frame["type"] == "error" and frame["payload"]["code"] == "protocol_error"


def test_duplicate_seq_error_connection_survives():
    core = make_core()
    client = Client(core, "Ada")
    replies = client.collect(core.handle_message(client.sid, json.dumps(
        {"type": "list_rooms", "seq": 1, "payload": {}})))  # seq 1 replayed
    assert replies[0]["type"] == "error"
    # the connection still works with a fresh seq
    assert client.send("list_rooms")[0]["type"] == "rooms"


def test_unknown_type_and_bad_json_survive():
    core = make_core()
    client = Client(core, "Ada")
    bad = client.collect(core.handle_message(client.sid, "{not json"))
    assert bad[0]["type"] == "error"
    bad = client.collect(core.handle_message(client.sid, json.dumps(
        {"type": "frobnicate", "seq": 99, "payload": {}})))
    assert bad[0]["type"] == "error"
    assert client.send("list_rooms")[0]["type"] == "rooms"


def test_module_errors_surface_with_codes():
    core = make_core(capacity=1)
    a = Client(core, "Ada")
    b = Client(core, "Bo")
    a.send("join_room", {"room_id": "lobby"})
    (err,) = b.send("join_room", {"room_id": "lobby"})
    assert err["type"] == "error" and err["payload"]["code"] == "room_full"
    (err,) = b.send("set_bubble", {"enabled": True, "boundary": "hard",
                                   "radius_al": 1.0})
    assert err["payload"]["code"] == "not_in_room"


def test_speed_cap_notice():
    core = make_core()
    client = Client(core, "Ada")
    client.send("join_room", {"room_id": "lobby"})
    (notice,) = client.send("move", {"x": 50.0, "y": 0.0, "facing": 0.0})
    assert notice["type"] == "notice"
    assert notice["payload"]["kind"] == "dropped_intent"
    assert notice["payload"]["reason"] == "speed_cap"


# -- replication -----------------------------------------------------------------------

def join_three(core):
    a, b, c = Client(core, "Ada"), Client(core, "Bo"), Client(core, "Cy")
    for client in (a, b, c):
        client.send("join_room", {"room_id": "lobby"})
    tick(core, [a, b, c])
    return a, b, c


def test_snapshot_excludes_hidden_and_privatizes_radius():
    core = make_core()
    a, b, c = join_three(core)
    state = core.rooms["lobby"].state
    # park Bo inside Ada's soft bubble; Cy far away
    state.players[b.player_id].pose.x = state.players[a.player_id].pose.x + 0.5
    state.players[b.player_id].pose.y = state.players[a.player_id].pose.y
    a.send("set_bubble", {"enabled": True, "boundary": "soft", "radius_al": 2.0})
    start = {cl: len(cl.frames) for cl in (a, b, c)}
    tick(core, [a, b, c], n=3)

    for viewer, hidden_name in ((a, "Bo"), (b, "Ada")):
        for frame in viewer.frames[start[viewer]:]:
            assert hidden_name not in frame  # zero bytes about the hidden peer
    # the third player still sees both
    snap = c.snapshots()[-1]
    names = {p["name"] for p in snap["players"]}
    assert {"Ada", "Bo"} <= names
    # and no numeric radius of others leaks anywhere
    for frame in c.frames[start[c]:]:
        obj = json.loads(frame)
        if obj["type"] != "snapshot":
            continue
        for entry in obj["payload"]["players"]:
            assert set(entry["bubble"]) == {"boundary", "enabled", "flashing"}


def test_ack_switches_to_deltas_and_timeout_restores_full():
    core = make_core()
    a, b, c = join_three(core)
    snap = a.snapshots()[-1]
    assert snap["full"] is True
    a.send("ack", {"tick": snap["tick"]})
    tick(core, [a, b, c])
    delta = a.snapshots()[-1]
    assert delta["full"] is False
    assert delta["players"] == []  # nothing changed
    # after the ack timeout, snapshots fall back to full
    timeout_ticks = DEFAULTS.seconds_to_ticks(ACK_TIMEOUT_S)
    tick(core, [a, b, c], n=timeout_ticks + 1)
    assert a.snapshots()[-1]["full"] is True


def test_delta_carries_only_changed_players():
    core = make_core()
    a, b, c = join_three(core)
    a.send("ack", {"tick": a.snapshots()[-1]["tick"]})
    b.send("move", {"x": core.rooms["lobby"].state.players[b.player_id].pose.x + 0.1,
                    "y": core.rooms["lobby"].state.players[b.player_id].pose.y,
                    "facing": 0.0})
    tick(core, [a, b, c])
    delta = a.snapshots()[-1]
    assert delta["full"] is False
    assert [p["player_id"] for p in delta["players"]] == [b.player_id]


def test_leave_appears_in_removed_delta():
    core = make_core()
    a, b, c = join_three(core)
    a.send("ack", {"tick": a.snapshots()[-1]["tick"]})
    b.send("leave_room")
    tick(core, [a, b, c])
    delta = a.snapshots()[-1]
    assert delta["full"] is False
    assert delta["removed"] == [b.player_id]


def test_state_change_reaches_entitled_clients_within_two_ticks():
    core = make_core()
    a, b, c = join_three(core)
    b.send("set_badge", {"slot": "interaction", "value": "no_physical"})
    tick(core, [a, b, c], n=2)
    snap = a.snapshots()[-1]
    entry = {p["player_id"]: p for p in snap["players"]}[b.player_id]
    assert entry["badges"]["interaction"] == "no_physical"
    assert entry["bubble"]["enabled"] is True


def test_suggestion_events_routed_to_receiver_only():
    core = make_core()
    a, b, c = join_three(core)
    (result,) = a.send("send_suggestion", {"receiver": b.player_id,
                                           "feature": "personal_bubble"})
    assert result["type"] == "send_result"
    assert result["payload"]["outcome"] == "delivered"
    tick(core, [a, b, c])
    b_events = [e for s in b.snapshots() for e in s["events"]]
    assert any(e["kind"] == "suggestion_delivered" for e in b_events)
    for other in (a, c):
        events = [e for s in other.snapshots() for e in s["events"]]
        assert not any(e["kind"] == "suggestion_delivered" for e in events)


def test_accept_flow_roundtrip():
    core = make_core()
    a, b, c = join_three(core)
    (result,) = a.send("send_suggestion", {"receiver": b.player_id,
                                           "feature": "personal_bubble"})
    sid = result["payload"]["suggestion_id"]
    b.send("respond_suggestion", {"suggestion_id": sid, "action": "accept"})
    tick(core, [a, b, c])
    snap = b.snapshots()[-1]
    assert snap["you"]["bubble"]["enabled"] is True
    assert any(e["kind"] == "feature_activated" for e in snap["events"])
    # the sender sees the public bubble flip, never the radius
    entry = {p["player_id"]: p
             for p in a.snapshots()[-1]["players"]}[b.player_id]
    assert entry["bubble"]["enabled"] is True


def test_close_session_removes_player():
    core = make_core()
    a, b, c = join_three(core)
    core.close_session(b.sid)
    assert b.player_id not in core.rooms["lobby"].state.players
    assert core.directory.room_of(b.player_id) is None
    tick(core, [a, c])
    names = {p["name"] for p in a.snapshots()[-1]["players"]}
    assert "Bo" not in names


# -- golden byte streams ---------------------------------------------------------------

def run_scripted_session() -> list[str]:
    """A fixed 3-client session; returns session-tagged frames in delivery
    order, canonically serialized for the committed golden."""
    core = make_core()
    log: list[str] = []
    clients: dict[int, Client] = {}

    def record(outgoing):
        for sid, frame in outgoing:
            log.append(json.dumps({"session": sid, "frame": json.loads(frame)},
                                  sort_keys=True, separators=(",", ":")))
            client = clients.get(sid)
            if client is not None:
                client.frames.append(frame)

    class Wire(Client):
        def __init__(self, core, name):
            self.core = core
            self.sid = core.open_session()
            self.seq = 0
            self.frames = []
            clients[self.sid] = self
            record(core.handle_message(self.sid, json.dumps(
                {"type": "hello", "seq": 1, "payload": {"name": name}})))
            self.seq = 1

        def send(self, mtype, payload=None):
            self.seq += 1
            record(self.core.handle_message(self.sid, json.dumps(
                {"type": mtype, "seq": self.seq, "payload": payload or {}})))

    ada, bo, cy = Wire(core, "Ada"), Wire(core, "Bo"), Wire(core, "Cy")
    for client in (ada, bo, cy):
        client.send("join_room", {"room_id": "lobby"})
    record(core.tick_all())
    ada.send("set_bubble", {"enabled": True, "boundary": "soft", "radius_al": 2.0})
    bo.send("set_badge", {"slot": "interaction", "value": "arm_length"})
    record(core.tick_all())
    ada.send("ack", {"tick": core.rooms["lobby"].state.tick})
    state = core.rooms["lobby"].state
    pose = state.players[2].pose
    bo.send("move", {"x": pose.x + 0.1, "y": pose.y, "facing": 0.25})
    record(core.tick_all())
    cy.send("send_suggestion", {"receiver": 1, "feature": "personal_bubble"})
    record(core.tick_all())
    ada.send("respond_suggestion", {"suggestion_id": 1, "action": "accept"})
    record(core.tick_all())
    bo.send("leave_room")
    record(core.tick_all())
    return log


def test_scripted_session_matches_golden():
    log = run_scripted_session()
    if os.environ.get("UPDATE_GOLDENS"):
        GOLDEN.parent.mkdir(exist_ok=True)
        GOLDEN.write_text("\n".join(log) + "\n")
    expected = GOLDEN.read_text().splitlines()
    assert log == expected


def test_scripted_session_is_deterministic():
    assert run_scripted_session() == run_scripted_session()


# -- fuzzing ------------------------------------------------------------------------

def test_malformed_envelope_fuzz_never_crashes():
    rng = random.Random(13)
    core = make_core()
    client = Client(core, "Ada")
    client.send("join_room", {"room_id": "lobby"})
    junk_types = ["move", "set_bubble", "ack", "frob", "", None, 7]
    for i in range(20_000):
        roll = rng.random()
        if roll < 0.3:
            raw = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 40)))
        elif roll < 0.6:
            raw = json.dumps({
                "type": rng.choice(junk_types),
                "seq": rng.choice([None, -1, 1.5, True, 10**9 + i, "x"]),
                "payload": rng.choice([None, [], 42, {"x": "y"},
                                       {"radius_al": float("1e309")}]),
            })
        else:
            raw = json.dumps(rng.choice([
                [], 42, "x", {"type": "move"}, {"seq": 1},
                {"type": "move", "seq": 10**9 + i,
                 "payload": {"x": rng.choice(["nan", 1e308, None]),
                             "y": 0, "facing": 0}},
            ]))
        out = core.handle_message(client.sid, raw)
        for _, frame in out:
            assert json.loads(frame)["type"] in ("error", "notice")
    core.tick_all()  # room still ticks
    assert client.player_id in core.rooms["lobby"].state.players
