/**
 * DOM panels around the canvas: bubble settings, badge pickers, room
 * browser, suggestion popups, and the alert toast. All panels are plain DOM
 * elements so the canvas loop stays untouched; user actions are surfaced to
 * main.ts through a single `send` callback that takes already-validated
 * protocol messages.
 */
import { outbound, type OutboundMessage, type RoomMeta } from "./protocol.js";
import type { ClientView } from "./state.js";

export interface UiCallbacks {
  send(msg: OutboundMessage): void;
  /** renderer shows the radius ruler while this is true */
  setRulerVisible(on: boolean): void;
  /** the user answered a suggestion pop-up */
  resolvePopup(suggestionId: number): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export class Ui {
  private root: HTMLElement;
  private cb: UiCallbacks;
  private bubblePanel: HTMLElement;
  private radiusSlider: HTMLInputElement;
  private radiusLabel: HTMLElement;
  private enabledBox: HTMLInputElement;
  private boundarySelect: HTMLSelectElement;
  private alertsBox: HTMLInputElement;
  private badgeSelects = new Map<string, HTMLSelectElement>();
  private roomList: HTMLElement;
  private uncrowdedBox: HTMLInputElement;
  private quietBox: HTMLInputElement;
  private badgeDefaultsBox: HTMLInputElement;
  private popupHost: HTMLElement;
  private alertHost: HTMLElement;
  private statusLine: HTMLElement;
  private shownPopups = new Set<number>();
  private syncedFromServer = false;

  constructor(root: HTMLElement, cb: UiCallbacks) {
    this.root = root;
    this.cb = cb;

    // --- bubble panel ---
    this.bubblePanel = el("div", "panel");
    this.bubblePanel.appendChild(el("h3", undefined, "Personal bubble"));

    const enabledRow = el("label", "row");
    this.enabledBox = el("input");
    this.enabledBox.type = "checkbox";
    enabledRow.append(this.enabledBox, document.createTextNode(" enabled (or press B)"));
    this.bubblePanel.appendChild(enabledRow);

    const boundaryRow = el("label", "row", "boundary ");
    this.boundarySelect = el("select");
    for (const value of ["hard", "soft"]) {
      const opt = el("option", undefined, value);
      opt.value = value;
      this.boundarySelect.appendChild(opt);
    }
    boundaryRow.appendChild(this.boundarySelect);
    this.bubblePanel.appendChild(boundaryRow);

    const radiusRow = el("div", "row");
    this.radiusSlider = el("input");
    this.radiusSlider.type = "range";
    this.radiusSlider.min = "0.5";
    this.radiusSlider.max = "4.0";
    this.radiusSlider.step = "0.25";
    this.radiusSlider.value = "1.0";
    this.radiusLabel = el("span", undefined, "1.0 arm lengths");
    radiusRow.append(this.radiusSlider, this.radiusLabel);
    this.bubblePanel.appendChild(radiusRow);

    const alertsRow = el("label", "row");
    this.alertsBox = el("input");
    this.alertsBox.type = "checkbox";
    this.alertsBox.checked = true;
    alertsRow.append(this.alertsBox, document.createTextNode(" approach alerts while off"));
    this.bubblePanel.appendChild(alertsRow);

    const apply = () => this.sendBubble();
    this.enabledBox.addEventListener("change", apply);
    this.boundarySelect.addEventListener("change", apply);
    this.alertsBox.addEventListener("change", apply);
    // the ruler appears while the slider is being dragged so the radius can
    // be judged against avatars on the floor
    this.radiusSlider.addEventListener("input", () => {
      this.radiusLabel.textContent = `${this.radiusSlider.value} arm lengths`;
      this.cb.setRulerVisible(true);
    });
    this.radiusSlider.addEventListener("change", () => {
      this.cb.setRulerVisible(false);
      apply();
    });

    // --- badge panel ---
    const badgePanel = el("div", "panel");
    badgePanel.appendChild(el("h3", undefined, "Badges"));
    const slots: Array<[string, string[]]> = [
      ["interaction", ["open", "arm_length", "no_physical"]],
      ["sound", ["none", "quiet"]],
      ["social", ["none", "individual", "group"]],
    ];
    for (const [slot, values] of slots) {
      const row = el("label", "row", `${slot} `);
      const select = el("select");
      for (const value of values) {
        const opt = el("option", undefined, value);
        opt.value = value;
        select.appendChild(opt);
      }
      select.addEventListener("change", () => {
        this.cb.send(outbound("set_badge", { slot: slot as any, value: select.value }));
      });
      this.badgeSelects.set(slot, select);
      row.appendChild(select);
      badgePanel.appendChild(row);
    }

    // --- room browser ---
    const roomPanel = el("div", "panel");
    roomPanel.appendChild(el("h3", undefined, "Rooms"));
    const filters = el("div", "row");
    this.uncrowdedBox = el("input");
    this.uncrowdedBox.type = "checkbox";
    this.quietBox = el("input");
    this.quietBox.type = "checkbox";
    this.badgeDefaultsBox = el("input");
    this.badgeDefaultsBox.type = "checkbox";
    this.badgeDefaultsBox.checked = true;
    const mk = (box: HTMLInputElement, label: string) => {
      const wrap = el("label");
      wrap.append(box, document.createTextNode(` ${label} `));
      return wrap;
    };
    filters.append(
      mk(this.uncrowdedBox, "uncrowded"),
      mk(this.quietBox, "quiet"),
      mk(this.badgeDefaultsBox, "from badges"),
    );
    const refresh = el("button", undefined, "Refresh");
    refresh.addEventListener("click", () => this.requestRooms());
    filters.appendChild(refresh);
    roomPanel.appendChild(filters);
    this.roomList = el("div", "room-list");
    roomPanel.appendChild(this.roomList);

    this.popupHost = el("div", "popups");
    this.alertHost = el("div", "alert-host");
    this.statusLine = el("div", "status");

    this.root.append(this.bubblePanel, badgePanel, roomPanel, this.statusLine);
    document.body.append(this.popupHost, this.alertHost);
  }

  requestRooms(): void {
    this.cb.send(
      outbound("list_rooms", {
        uncrowded_only: this.uncrowdedBox.checked,
        quiet_only: this.quietBox.checked,
        use_badge_defaults: this.badgeDefaultsBox.checked,
      }),
    );
  }

  private sendBubble(): void {
    this.cb.send(
      outbound("set_bubble", {
        enabled: this.enabledBox.checked,
        boundary: this.boundarySelect.value as "hard" | "soft",
        radius_al: Number(this.radiusSlider.value),
        alerts_enabled: this.alertsBox.checked,
      }),
    );
  }

  showRooms(rooms: RoomMeta[]): void {
    this.roomList.textContent = "";
    if (rooms.length === 0) {
      this.roomList.appendChild(el("div", "room-row", "no rooms match"));
      return;
    }
    for (const room of rooms) {
      const row = el("div", "room-row");
      row.appendChild(
        el(
          "span",
          undefined,
          `${room.name} — ${room.player_count}/${room.capacity}, ${room.crowd}, ${room.noise}`,
        ),
      );
      const join = el("button", undefined, "Join");
      join.addEventListener("click", () => {
        this.cb.send(outbound("join_room", { room_id: room.room_id }));
      });
      row.appendChild(join);
      this.roomList.appendChild(row);
    }
  }

  setStatus(text: string): void {
    this.statusLine.textContent = text;
  }

  /** Pull server-confirmed settings into the widgets and surface any new
   * suggestion popups / alert toast. Called once per applied snapshot. */
  sync(view: ClientView): void {
    if (view.you) {
      // on the first snapshot adopt the server's state; afterwards only
      // reflect changes that did not originate from these widgets
      if (!this.syncedFromServer || document.activeElement?.tagName !== "INPUT") {
        this.enabledBox.checked = view.you.bubble.enabled;
        this.boundarySelect.value = view.you.bubble.boundary;
        this.alertsBox.checked = view.you.bubble.alerts_enabled;
        if (document.activeElement !== this.radiusSlider) {
          this.radiusSlider.value = String(view.you.bubble.radius_al);
          this.radiusLabel.textContent = `${view.you.bubble.radius_al} arm lengths`;
        }
      }
      for (const [slot, select] of this.badgeSelects) {
        select.value = (view.you.badges as Record<string, string>)[slot];
      }
      this.syncedFromServer = true;
    }

    // suggestion popups
    for (const popup of view.popups.values()) {
      if (this.shownPopups.has(popup.suggestionId)) continue;
      this.shownPopups.add(popup.suggestionId);
      this.popupHost.appendChild(this.buildPopup(popup.suggestionId, popup.sender, popup.feature));
    }
    for (const node of Array.from(this.popupHost.children)) {
      const id = Number((node as HTMLElement).dataset.suggestionId);
      if (!view.popups.has(id)) {
        node.remove();
        this.shownPopups.delete(id);
      }
    }

    // alert toast with a direction arrow (renderer draws the in-world arrow)
    this.alertHost.textContent = "";
    if (view.alert) {
      const name = view.players.get(view.alert.approacher)?.name ?? "someone";
      this.alertHost.appendChild(el("div", "toast", `${name} is approaching`));
    }
  }

  private buildPopup(suggestionId: number, sender: number, feature: string): HTMLElement {
    const box = el("div", "popup");
    box.dataset.suggestionId = String(suggestionId);
    box.appendChild(el("div", "popup-title", `Try the ${feature.replace("_", " ")} feature?`));
    const actions: Array<["accept" | "decline" | "more" | "block_sender" | "block_all", string]> = [
      ["accept", "Accept"],
      ["decline", "No thanks"],
      ["more", "Tell me more"],
      ["block_sender", "Block suggestions from this player"],
      ["block_all", "Block all suggestions"],
    ];
    const row = el("div", "popup-actions");
    for (const [action, label] of actions) {
      const btn = el("button", undefined, label);
      btn.addEventListener("click", () => {
        this.cb.send(outbound("respond_suggestion", { suggestion_id: suggestionId, action }));
        this.cb.resolvePopup(suggestionId);
        box.remove();
      });
      row.appendChild(btn);
    }
    box.appendChild(row);
    return box;
  }
}
