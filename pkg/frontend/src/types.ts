/**
 * Wire types shared with the bridge server, plus runtime validators.
 * The server is the source of truth for these shapes; every outgoing
 * transcript body is validated against the same rules it enforces.
 */

export type ControlActionKind = "none" | "start" | "stop" | "set-language";

export interface ControlAction {
  seq: number;
  action: ControlActionKind;
  lang?: string;
}

export interface TranscriptMessage {
  text: string;
  final: boolean;
  confidence: number;
  client_time: number;
}

export class ProtocolError extends Error {}

function isObject(value: unknown): value is Record<string, unknown> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function parseControlAction(raw: unknown): ControlAction {
  if (!isObject(raw)) {
    throw new ProtocolError("control response must be an object");
  }
  const seq = raw["seq"];
  const action = raw["action"];
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 0) {
    throw new ProtocolError("control seq must be a non-negative integer");
  }
  if (action !== "none" && action !== "start" && action !== "stop" && action !== "set-language") {
    throw new ProtocolError(`unknown control action ${String(action)}`);
  }
  const lang = raw["lang"];
  if (action === "set-language") {
    if (typeof lang !== "string" || lang.length === 0) {
      throw new ProtocolError("set-language needs a lang tag");
    }
    return { seq, action, lang };
  }
  return { seq, action };
}

/** Mirrors the server-side transcript validation. */
export function validateTranscript(raw: unknown): TranscriptMessage {
  if (!isObject(raw)) {
    throw new ProtocolError("transcript body must be an object");
  }
  const text = raw["text"];
  const final = raw["final"];
  const confidence = raw["confidence"];
  const clientTime = raw["client_time"] ?? 0;
  if (typeof text !== "string" || text.length === 0) {
    throw new ProtocolError("missing or empty text");
  }
  if (typeof final !== "boolean") {
    throw new ProtocolError("final must be a boolean");
  }
  if (typeof confidence !== "number" || Number.isNaN(confidence)) {
    throw new ProtocolError("confidence must be a number");
  }
  if (confidence < 0 || confidence > 1) {
    throw new ProtocolError("confidence outside [0,1]");
  }
  if (typeof clientTime !== "number" || !Number.isInteger(clientTime) || clientTime < 0) {
    throw new ProtocolError("client_time must be a non-negative integer");
  }
  return { text, final, confidence, client_time: clientTime };
}

/** The read-only display snapshot served at GET /state. */
export interface StackFrame {
  grammar: string;
  mode: "additive" | "substitutive";
  activated_at: number;
}

export interface CorrectionToken {
  index: number;
  text: string;
}

export interface StateSnapshot {
  mode: string;
  clock: number;
  language: string;
  screen: [number, number];
  pointer: [number, number];
  stack: {
    base: string;
    frames: StackFrame[];
    app_grammar: string | null;
    protected_until: number | null;
  };
  multiplier: number | null;
  last_transcript: string | null;
  last_interim: string | null;
  last_dictation: string | null;
  correction: { tokens: CorrectionToken[]; selected: number | null } | null;
}
