/**
 * ClientView: the client-side mirror of what the server chose to show us.
 * Holds only data from the latest snapshots — hidden players never reach
 * this structure because the server never sends them.
 */
import type { GameEvent, PlayerEntry, RoomMeta, Snapshot } from "./protocol.js";
import { SelfEntrySchema } from "./protocol.js";
import { z } from "zod";

export type SelfEntry = z.infer<typeof SelfEntrySchema>;

export interface FlashRing {
  playerId: number;
  startedTick: number;
  durationS: number;
}

export interface AlertToast {
  bearingRad: number;
  approacher: number;
  tick: number;
}

export interface SuggestionPopup {
  suggestionId: number;
  sender: number;
  feature: string;
  subject: number | null;
}

export class ClientView {
  playerId: number | null = null;
  tickRate = 20;
  tick = 0;
  room: RoomMeta | null = null;
  you: SelfEntry | null = null;
  players = new Map<number, PlayerEntry>();
  flashes: FlashRing[] = [];
  alert: AlertToast | null = null;
  popups = new Map<number, SuggestionPopup>();
  lastError: string | null = null;

  applySnapshot(snap: Snapshot): GameEvent[] {
    this.tick = snap.tick;
    this.room = snap.room;
    this.you = snap.you;
    if (snap.full) {
      this.players = new Map(snap.players.map((p) => [p.player_id, p]));
    } else {
      for (const entry of snap.players) this.players.set(entry.player_id, entry);
      for (const pid of snap.removed) this.players.delete(pid);
    }
    for (const event of snap.events) this.applyEvent(event);
    // expire finished flash rings and stale alert toasts
    this.flashes = this.flashes.filter(
      (f) => snap.tick - f.startedTick < f.durationS * this.tickRate,
    );
    if (this.alert && snap.tick - this.alert.tick > 4 * this.tickRate) {
      this.alert = null;
    }
    return snap.events;
  }

  private applyEvent(event: GameEvent): void {
    const data = event.data as Record<string, any>;
    switch (event.kind) {
      case "bubble_flash":
        this.flashes.push({
          playerId: data.owner as number,
          startedTick: event.tick,
          durationS: (data.duration_s as number) ?? 3.0,
        });
        break;
      case "alert_raised":
        if (data.target === this.playerId) {
          this.alert = {
            bearingRad: data.bearing_rad as number,
            approacher: data.approacher as number,
            tick: event.tick,
          };
        }
        break;
      case "suggestion_delivered":
        this.popups.set(data.suggestion_id as number, {
          suggestionId: data.suggestion_id as number,
          sender: data.sender as number,
          feature: data.feature as string,
          subject: (data.subject as number | null) ?? null,
        });
        break;
      case "suggestion_dismissed":
        this.popups.delete(data.suggestion_id as number);
        break;
    }
  }

  /** The user answered a pop-up; the server sends no dismissal event for an
   * explicit response, so the local copy is dropped here. */
  resolvePopup(suggestionId: number): void {
    this.popups.delete(suggestionId);
  }

  /** Everyone the server lets us see, a stable render order. */
  visiblePlayers(): PlayerEntry[] {
    return [...this.players.values()].sort((a, b) => a.player_id - b.player_id);
  }

  isFlashing(pid: number): boolean {
    return this.flashes.some((f) => f.playerId === pid);
  }
}
