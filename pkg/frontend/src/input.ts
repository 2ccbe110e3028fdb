/**
 * Pure input mapping: held keys + current view -> protocol messages for the
 * next tick. No side effects and no socket access, so the mapping is unit
 * testable tick by tick.
 */
import { outbound, type OutboundMessage, type Pose } from "./protocol.js";

export interface InputState {
  held: Set<string>;
  /** keys pressed since the previous tick (edge-triggered actions) */
  pressed: Set<string>;
}

export function emptyInput(): InputState {
  return { held: new Set(), pressed: new Set() };
}

export function keyDown(input: InputState, key: string): void {
  const k = key.toLowerCase();
  if (!input.held.has(k)) input.pressed.add(k);
  input.held.add(k);
}

export function keyUp(input: InputState, key: string): void {
  input.held.delete(key.toLowerCase());
}

export interface TickContext {
  pose: Pose;
  bubbleEnabled: boolean;
  maxStep: number; // v_max * dt, metres per tick
}

/**
 * One tick's worth of messages. `B` maps to the bubble shortcut (the
 * gamepad shortcut button, as a keyboard key) and is emitted on the very
 * tick the press is observed. Movement keys produce one move intent at max
 * speed; diagonals are normalized so the server never drops them.
 */
export function messagesForTick(input: InputState, ctx: TickContext): OutboundMessage[] {
  const out: OutboundMessage[] = [];

  if (input.pressed.has("b")) {
    out.push(outbound("activate_bubble", {}));
  }

  let dx = 0;
  let dy = 0;
  if (input.held.has("w") || input.held.has("arrowup")) dy -= 1;
  if (input.held.has("s") || input.held.has("arrowdown")) dy += 1;
  if (input.held.has("a") || input.held.has("arrowleft")) dx -= 1;
  if (input.held.has("d") || input.held.has("arrowright")) dx += 1;
  if (dx !== 0 || dy !== 0) {
    const norm = Math.hypot(dx, dy);
    const step = ctx.maxStep * 0.999; // stay strictly under the speed cap
    const x = ctx.pose.x + (dx / norm) * step;
    const y = ctx.pose.y + (dy / norm) * step;
    const facing = Math.atan2(dy, dx);
    out.push(outbound("move", { x, y, facing }));
  }

  input.pressed.clear();
  return out;
}
