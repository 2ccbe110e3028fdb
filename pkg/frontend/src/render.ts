/**
 * Canvas renderer: top-down 2D view. Draws avatars, the player's own
 * translucent bubble with a radius ruler while the slider is active, flash
 * rings, an alert toast with a bearing arrow, and badge glyphs above heads.
 */
import type { ClientView } from "./state.js";

export interface Camera {
  x: number;
  y: number;
  scale: number; // pixels per metre
}

const BADGE_GLYPHS: Record<string, string> = {
  arm_length: "A",
  no_physical: "N",
  quiet: "Q",
  individual: "I",
  group: "G",
};

export interface RenderOptions {
  armLengthM: number;
  showRuler: boolean; // true while the radius slider is being dragged
}

export function renderFrame(
  ctx: CanvasRenderingContext2D,
  view: ClientView,
  camera: Camera,
  opts: RenderOptions,
): void {
  const { width, height } = ctx.canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);

  const toScreen = (x: number, y: number): [number, number] => [
    width / 2 + (x - camera.x) * camera.scale,
    height / 2 + (y - camera.y) * camera.scale,
  ];

  drawGrid(ctx, camera, toScreen);

  // own bubble first: translucent disc + optional ruler
  if (view.you && view.you.bubble.enabled) {
    const [sx, sy] = toScreen(view.you.pose.x, view.you.pose.y);
    const r = view.you.bubble.radius_al * opts.armLengthM * camera.scale;
    ctx.beginPath();
    ctx.arc(sx, sy, r, 0, Math.PI * 2);
    ctx.fillStyle =
      view.you.bubble.boundary === "hard"
        ? "rgba(110, 170, 255, 0.18)"
        : "rgba(170, 110, 255, 0.18)";
    ctx.fill();
    ctx.strokeStyle = "rgba(160, 200, 255, 0.7)";
    ctx.setLineDash(view.you.bubble.boundary === "soft" ? [6, 6] : []);
    ctx.stroke();
    ctx.setLineDash([]);
    if (opts.showRuler) drawRuler(ctx, sx, sy, view.you.bubble.radius_al, opts.armLengthM, camera);
  }

  for (const player of view.visiblePlayers()) {
    const [sx, sy] = toScreen(player.pose.x, player.pose.y);
    if (player.bubble.enabled || view.isFlashing(player.player_id)) {
      // other players' radii are private: draw a fixed-size halo marker
      ctx.beginPath();
      ctx.arc(sx, sy, 14, 0, Math.PI * 2);
      ctx.strokeStyle = view.isFlashing(player.player_id)
        ? "rgba(255, 90, 90, 0.9)"
        : "rgba(160, 200, 255, 0.45)";
      ctx.setLineDash(player.bubble.boundary === "soft" ? [4, 4] : []);
      ctx.stroke();
      ctx.setLineDash([]);
    }
    drawAvatar(ctx, sx, sy, player.pose.facing, "#8fd18f", player.name);
    drawBadges(ctx, sx, sy, player.badges);
  }

  if (view.you) {
    const [sx, sy] = toScreen(view.you.pose.x, view.you.pose.y);
    drawAvatar(ctx, sx, sy, view.you.pose.facing, "#ffd166", view.you.name);
    drawBadges(ctx, sx, sy, view.you.badges);
    if (view.alert) drawAlertArrow(ctx, sx, sy, view.you.pose.facing, view.alert.bearingRad);
  }

  // flash rings expand over their lifetime
  for (const flash of view.flashes) {
    const owner =
      flash.playerId === view.playerId
        ? view.you?.pose
        : view.players.get(flash.playerId)?.pose;
    if (!owner) continue;
    const [sx, sy] = toScreen(owner.x, owner.y);
    const age = (view.tick - flash.startedTick) / (flash.durationS * view.tickRate);
    ctx.beginPath();
    ctx.arc(sx, sy, 16 + age * 30, 0, Math.PI * 2);
    ctx.strokeStyle = `rgba(255, 90, 90, ${Math.max(0, 0.9 - age)})`;
    ctx.lineWidth = 3;
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function drawGrid(
  ctx: CanvasRenderingContext2D,
  camera: Camera,
  toScreen: (x: number, y: number) => [number, number],
): void {
  const { width, height } = ctx.canvas;
  const metresAcross = width / camera.scale;
  const start = Math.floor(camera.x - metresAcross / 2);
  ctx.strokeStyle = "rgba(255,255,255,0.06)";
  for (let m = start; m <= start + metresAcross + 1; m += 1) {
    const [sx] = toScreen(m, 0);
    ctx.beginPath();
    ctx.moveTo(sx, 0);
    ctx.lineTo(sx, height);
    ctx.stroke();
  }
  const metresDown = height / camera.scale;
  const startY = Math.floor(camera.y - metresDown / 2);
  for (let m = startY; m <= startY + metresDown + 1; m += 1) {
    const [, sy] = toScreen(0, m);
    ctx.beginPath();
    ctx.moveTo(0, sy);
    ctx.lineTo(width, sy);
    ctx.stroke();
  }
}

function drawAvatar(
  ctx: CanvasRenderingContext2D,
  sx: number,
  sy: number,
  facing: number,
  color: string,
  name: string,
): void {
  ctx.beginPath();
  ctx.arc(sx, sy, 8, 0, Math.PI * 2);
  ctx.fillStyle = color;
  ctx.fill();
  // facing tick
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(sx + Math.cos(facing) * 14, sy + Math.sin(facing) * 14);
  ctx.strokeStyle = color;
  ctx.stroke();
  ctx.fillStyle = "#dde3ec";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "center";
  ctx.fillText(name, sx, sy + 22);
}

function drawBadges(
  ctx: CanvasRenderingContext2D,
  sx: number,
  sy: number,
  badges: { interaction: string; sound: string; social: string },
): void {
  const glyphs = [badges.interaction, badges.sound, badges.social]
    .map((b) => BADGE_GLYPHS[b])
    .filter((g): g is string => Boolean(g));
  if (!glyphs.length) return;
  ctx.font = "10px monospace";
  ctx.textAlign = "center";
  glyphs.forEach((glyph, i) => {
    const gx = sx + (i - (glyphs.length - 1) / 2) * 14;
    ctx.fillStyle = "#2a3344";
    ctx.fillRect(gx - 6, sy - 26, 12, 12);
    ctx.fillStyle = "#ffd166";
    ctx.fillText(glyph, gx, sy - 16);
  });
}

/** Alert arrow: bearing is relative to the player's facing, so the world
 * angle of the approacher is facing + bearing. */
export function alertArrowAngle(facing: number, bearingRad: number): number {
  return facing + bearingRad;
}

function drawAlertArrow(
  ctx: CanvasRenderingContext2D,
  sx: number,
  sy: number,
  facing: number,
  bearingRad: number,
): void {
  const angle = alertArrowAngle(facing, bearingRad);
  const r = 34;
  const tipX = sx + Math.cos(angle) * r;
  const tipY = sy + Math.sin(angle) * r;
  ctx.beginPath();
  ctx.moveTo(tipX, tipY);
  ctx.lineTo(tipX - Math.cos(angle - 0.4) * 10, tipY - Math.sin(angle - 0.4) * 10);
  ctx.lineTo(tipX - Math.cos(angle + 0.4) * 10, tipY - Math.sin(angle + 0.4) * 10);
  ctx.closePath();
  ctx.fillStyle = "#ff5a5a";
  ctx.fill();
}

function drawRuler(
  ctx: CanvasRenderingContext2D,
  sx: number,
  sy: number,
  radiusAl: number,
  armLengthM: number,
  camera: Camera,
): void {
  // tick marks every arm-length along a horizontal ruler to the bubble edge
  ctx.strokeStyle = "rgba(255, 230, 150, 0.9)";
  ctx.beginPath();
  ctx.moveTo(sx, sy);
  ctx.lineTo(sx + radiusAl * armLengthM * camera.scale, sy);
  ctx.stroke();
  for (let al = 1; al <= Math.floor(radiusAl); al += 1) {
    const tx = sx + al * armLengthM * camera.scale;
    ctx.beginPath();
    ctx.moveTo(tx, sy - 5);
    ctx.lineTo(tx, sy + 5);
    ctx.stroke();
  }
  ctx.fillStyle = "rgba(255, 230, 150, 0.9)";
  ctx.font = "11px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(
    `${radiusAl.toFixed(1)} AL (${(radiusAl * armLengthM).toFixed(2)} m)`,
    sx + 8,
    sy - 10,
  );
}
