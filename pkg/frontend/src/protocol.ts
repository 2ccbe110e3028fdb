/**
 * Wire protocol mirror of docs/protocol.md: zod schemas for every message
 * this client can send or receive, plus typed builders for outbound
 * payloads. Every outbound frame is validated against its schema before it
 * leaves the client, so a schema drift fails loudly in tests rather than
 * silently on the wire.
 */
import { z } from "zod";

// ---- shared fragments -------------------------------------------------------------

export const PoseSchema = z.object({
  x: z.number().finite(),
  y: z.number().finite(),
  facing: z.number().finite(),
});
export type Pose = z.infer<typeof PoseSchema>;

export const OwnBubbleSchema = z.object({
  enabled: z.boolean(),
  boundary: z.enum(["hard", "soft"]),
  radius_al: z.number(),
  alerts_enabled: z.boolean(),
});

// other players never expose a radius
export const PublicBubbleSchema = z
  .object({
    enabled: z.boolean(),
    boundary: z.enum(["hard", "soft"]),
    flashing: z.boolean(),
  })
  .strict();

export const BadgesSchema = z.object({
  interaction: z.enum(["open", "arm_length", "no_physical"]),
  sound: z.enum(["none", "quiet"]),
  social: z.enum(["none", "individual", "group"]),
});

export const SelfEntrySchema = z.object({
  player_id: z.number().int(),
  name: z.string(),
  pose: PoseSchema,
  bubble: OwnBubbleSchema,
  badges: BadgesSchema,
  muted: z.boolean(),
});

export const PlayerEntrySchema = z.object({
  player_id: z.number().int(),
  name: z.string(),
  pose: PoseSchema,
  bubble: PublicBubbleSchema,
  badges: BadgesSchema,
  muted: z.boolean(),
});
export type PlayerEntry = z.infer<typeof PlayerEntrySchema>;

export const RoomMetaSchema = z.object({
  room_id: z.string(),
  name: z.string(),
  player_count: z.number().int(),
  capacity: z.number().int(),
  crowd: z.enum(["uncrowded", "medium", "crowded"]),
  noise: z.enum(["quiet", "medium", "loud"]),
  unmuted_count: z.number().int(),
  theme_tags: z.array(z.string()),
});
export type RoomMeta = z.infer<typeof RoomMetaSchema>;

export const EventSchema = z.object({
  kind: z.string(),
  tick: z.number().int(),
  data: z.record(z.unknown()),
});
export type GameEvent = z.infer<typeof EventSchema>;

export const SnapshotSchema = z.object({
  tick: z.number().int(),
  full: z.boolean(),
  room: RoomMetaSchema,
  you: SelfEntrySchema,
  players: z.array(PlayerEntrySchema),
  removed: z.array(z.number().int()),
  events: z.array(EventSchema),
});
export type Snapshot = z.infer<typeof SnapshotSchema>;

// ---- outbound payload schemas ------------------------------------------------------

export const OutboundPayloads = {
  hello: z.object({ name: z.string().min(1) }).strict(),
  move: PoseSchema.strict(),
  set_bubble: z
    .object({
      enabled: z.boolean(),
      boundary: z.enum(["hard", "soft"]),
      radius_al: z.number().min(0.5).max(4.0),
      alerts_enabled: z.boolean().optional(),
    })
    .strict(),
  activate_bubble: z.object({}).strict(),
  set_badge: z
    .object({ slot: z.enum(["interaction", "sound", "social"]), value: z.string() })
    .strict(),
  clear_badge: z
    .object({ slot: z.enum(["interaction", "sound", "social"]) })
    .strict(),
  social: z
    .object({
      action: z.enum([
        "add_friend",
        "remove_friend",
        "mute_alerts_from",
        "unmute_alerts_from",
        "disable_alerts",
        "enable_alerts",
      ]),
      other: z.number().int().optional(),
    })
    .strict(),
  send_suggestion: z
    .object({
      receiver: z.number().int(),
      feature: z.enum(["personal_bubble", "block", "mute"]),
      subject: z.number().int().optional(),
    })
    .strict(),
  respond_suggestion: z
    .object({
      suggestion_id: z.number().int(),
      action: z.enum(["accept", "decline", "more", "block_sender", "block_all"]),
    })
    .strict(),
  list_rooms: z
    .object({
      uncrowded_only: z.boolean().optional(),
      quiet_only: z.boolean().optional(),
      use_badge_defaults: z.boolean().optional(),
    })
    .strict(),
  join_room: z.object({ room_id: z.string() }).strict(),
  leave_room: z.object({}).strict(),
  set_mute: z.object({ muted: z.boolean() }).strict(),
  ack: z.object({ tick: z.number().int() }).strict(),
} as const;

export type OutboundType = keyof typeof OutboundPayloads;

export const EnvelopeSchema = z.object({
  type: z.string(),
  seq: z.number().int().positive(),
  payload: z.record(z.unknown()),
});
export type Envelope = z.infer<typeof EnvelopeSchema>;

export interface OutboundMessage {
  type: OutboundType;
  payload: Record<string, unknown>;
}

/** Build and validate an outbound message (without its seq, which the
 * connection assigns at send time). Throws ZodError on schema violations. */
export function outbound<T extends OutboundType>(
  type: T,
  payload: z.infer<(typeof OutboundPayloads)[T]>,
): OutboundMessage {
  const parsed = OutboundPayloads[type].parse(payload ?? {});
  return { type, payload: parsed as Record<string, unknown> };
}

/** Validate a complete envelope right before it goes on the wire. */
export function validateEnvelope(env: Envelope): Envelope {
  EnvelopeSchema.parse(env);
  const schema = OutboundPayloads[env.type as OutboundType];
  if (!schema) throw new Error(`unknown outbound type ${env.type}`);
  schema.parse(env.payload);
  return env;
}

// ---- inbound ------------------------------------------------------------------------

export const InboundSchemas = {
  welcome: z.object({
    player_id: z.number().int(),
    name: z.string(),
    tick_rate: z.number().int(),
    reply_to: z.number().int(),
  }),
  ok: z.object({ reply_to: z.number().int() }).passthrough(),
  error: z.object({
    reply_to: z.number().int().nullable(),
    code: z.string(),
    message: z.string(),
  }),
  rooms: z.object({ reply_to: z.number().int(), rooms: z.array(RoomMetaSchema) }),
  send_result: z
    .object({
      reply_to: z.number().int(),
      outcome: z.enum(["delivered", "cooling_down", "pair_pending", "not_receiving"]),
      suggestion_id: z.number().int().nullable().optional(),
      cooldown_until: z.number().int().nullable().optional(),
    })
    .passthrough(),
  notice: z.object({ kind: z.string() }).passthrough(),
  snapshot: SnapshotSchema,
} as const;

export type InboundType = keyof typeof InboundSchemas;

export interface InboundMessage {
  type: InboundType;
  seq: number;
  payload: unknown;
}

export function parseInbound(raw: string): InboundMessage {
  const env = EnvelopeSchema.parse(JSON.parse(raw));
  const schema = InboundSchemas[env.type as InboundType];
  if (!schema) throw new Error(`unknown inbound type ${env.type}`);
  return { type: env.type as InboundType, seq: env.seq, payload: schema.parse(env.payload) };
}
