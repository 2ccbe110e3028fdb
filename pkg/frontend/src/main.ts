/**
 * Browser entry point. Reads `?server=ws://...&name=...` from the URL,
 * connects, joins the first available room, and runs a fixed-rate loop that
 * turns held keys into protocol messages and draws the latest server state.
 */
import { Connection } from "./net.js";
import { outbound, type RoomMeta, type Snapshot } from "./protocol.js";
import { ClientView } from "./state.js";
import { emptyInput, keyDown, keyUp, messagesForTick } from "./input.js";
import { renderFrame, type Camera } from "./render.js";
import { Ui } from "./ui.js";

const ARM_LENGTH_M = 0.75;
const V_MAX_MPS = 4.0;

const params = new URLSearchParams(window.location.search);
const serverUrl = params.get("server") ?? "ws://localhost:8765";
const playerName = params.get("name") ?? `guest-${Math.floor(Math.random() * 1000)}`;

const canvas = document.getElementById("arena") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const sidebar = document.getElementById("sidebar")!;

const view = new ClientView();
const input = emptyInput();
const camera: Camera = { x: 0, y: 0, scale: 40 };
let showRuler = false;
let joined = false;

const conn = new Connection(new WebSocket(serverUrl));
const ui = new Ui(sidebar, {
  send: (msg) => conn.send(msg),
  setRulerVisible: (on) => {
    showRuler = on;
  },
  resolvePopup: (id) => view.resolvePopup(id),
});

ui.setStatus(`connecting to ${serverUrl}...`);

conn.onOpen = () => {
  conn.send(outbound("hello", { name: playerName }));
};

conn.onClose = () => {
  ui.setStatus("disconnected");
};

conn.onMessage = (msg) => {
  switch (msg.type) {
    case "welcome": {
      const payload = msg.payload as { player_id: number; tick_rate: number };
      view.playerId = payload.player_id;
      view.tickRate = payload.tick_rate;
      ui.setStatus(`connected as ${playerName} (#${payload.player_id})`);
      ui.requestRooms();
      break;
    }
    case "rooms": {
      const rooms = (msg.payload as { rooms: RoomMeta[] }).rooms;
      ui.showRooms(rooms);
      if (!joined && rooms.length > 0) {
        conn.send(outbound("join_room", { room_id: rooms[0].room_id }));
        joined = true;
      }
      break;
    }
    case "snapshot": {
      const snap = msg.payload as Snapshot;
      view.applySnapshot(snap);
      conn.send(outbound("ack", { tick: snap.tick }));
      ui.sync(view);
      break;
    }
    case "error": {
      const payload = msg.payload as { code: string; message: string };
      ui.setStatus(`error: ${payload.code} — ${payload.message}`);
      if (payload.code === "room_full" || payload.code === "no_such_room") joined = false;
      break;
    }
    case "notice": {
      const payload = msg.payload as { kind: string };
      if (payload.kind !== "dropped_intent") ui.setStatus(`notice: ${payload.kind}`);
      break;
    }
    default:
      break;
  }
};

window.addEventListener("keydown", (ev) => {
  if ((ev.target as HTMLElement)?.tagName === "INPUT") return;
  keyDown(input, ev.key);
});
window.addEventListener("keyup", (ev) => keyUp(input, ev.key));

function resize(): void {
  canvas.width = canvas.clientWidth;
  canvas.height = canvas.clientHeight;
}
window.addEventListener("resize", resize);
resize();

// input loop runs at the server tick rate; rendering at display rate
setInterval(() => {
  if (!view.you) return;
  const maxStep = V_MAX_MPS / view.tickRate;
  for (const msg of messagesForTick(input, {
    pose: view.you.pose,
    bubbleEnabled: view.you.bubble.enabled,
    maxStep,
  })) {
    conn.send(msg);
  }
}, 1000 / view.tickRate);

function draw(): void {
  if (view.you) {
    camera.x = view.you.pose.x;
    camera.y = view.you.pose.y;
  }
  renderFrame(ctx, view, camera, { armLengthM: ARM_LENGTH_M, showRuler });
  requestAnimationFrame(draw);
}
requestAnimationFrame(draw);
