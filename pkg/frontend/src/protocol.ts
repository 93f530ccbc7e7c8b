// Wire protocol types and validation. One frame is a complete snapshot of
// the tabletop; commands are small JSON dicts. Node labels are 1-based on
// the wire.

export type RobotRole = "node" | "messenger" | "widget";

export interface RobotState {
  id: number;
  x_mm: number;
  y_mm: number;
  heading_rad: number;
  rgb: [number, number, number];
  text: string;
  role: RobotRole;
}

export interface EventFrame {
  frame: number; // sequence number, strictly increasing
  t_ms: number;
  iteration: number;
  converged: boolean;
  robots: RobotState[];
  values: number[];
}

export type Command =
  | { cmd: "move_robot"; id: number; x_mm: number; y_mm: number }
  | { cmd: "add_node"; x_mm: number; y_mm: number }
  | { cmd: "remove_node"; id: number }
  | { cmd: "set_edge"; from: number; to: number; present: boolean }
  | { cmd: "start" }
  | { cmd: "pause" }
  | { cmd: "reset" }
  | { cmd: "set_layout"; kind: string }
  | { cmd: "set_time_window"; t0: number; t1: number };

export interface ErrorReply {
  error: string;
}

const ROLES: RobotRole[] = ["node", "messenger", "widget"];

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function validRobot(r: unknown): r is RobotState {
  if (typeof r !== "object" || r === null) return false;
  const o = r as Record<string, unknown>;
  return (
    isFiniteNumber(o.id) &&
    isFiniteNumber(o.x_mm) &&
    isFiniteNumber(o.y_mm) &&
    isFiniteNumber(o.heading_rad) &&
    Array.isArray(o.rgb) &&
    o.rgb.length === 3 &&
    o.rgb.every((c) => isFiniteNumber(c) && c >= 0 && c <= 255) &&
    typeof o.text === "string" &&
    ROLES.includes(o.role as RobotRole)
  );
}

/** Parse one server message. Returns the frame, an error reply, or null for
 * anything malformed (malformed frames are dropped, never partially used). */
export function parseServerMessage(raw: string): EventFrame | ErrorReply | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const o = doc as Record<string, unknown>;
  if (typeof o.error === "string") return { error: o.error };
  if (
    isFiniteNumber(o.frame) &&
    isFiniteNumber(o.t_ms) &&
    isFiniteNumber(o.iteration) &&
    typeof o.converged === "boolean" &&
    Array.isArray(o.robots) &&
    o.robots.every(validRobot) &&
    Array.isArray(o.values) &&
    o.values.every(isFiniteNumber)
  ) {
    return o as unknown as EventFrame;
  }
  return null;
}

export function encodeCommand(cmd: Command): string {
  return JSON.stringify(cmd);
}

/** max(values) - min(values); 0 for an empty frame. */
export function spread(values: number[]): number {
  if (values.length === 0) return 0;
  return Math.max(...values) - Math.min(...values);
}
