// Gesture -> wire command translation. The UI never mutates algorithm state
// locally: every gesture becomes a command, and the authoritative state
// comes back as a frame.

import { Command } from "./protocol.js";
import { ROBOT_DIAMETER_MM, SURFACE_MM, ViewState } from "./view.js";

export type Gesture =
  | { kind: "drag-end"; robotId: number; x_mm: number; y_mm: number }
  | { kind: "double-click"; x_mm: number; y_mm: number }
  | { kind: "right-click"; x_mm: number; y_mm: number }
  | { kind: "widget-drag"; t0: number; t1: number };

/** Keep a release point on the table, body radius clear of the edge. */
export function clampToSurface(x_mm: number, y_mm: number): [number, number] {
  const r = ROBOT_DIAMETER_MM / 2;
  return [
    Math.min(Math.max(x_mm, r), SURFACE_MM[0] - r),
    Math.min(Math.max(y_mm, r), SURFACE_MM[1] - r),
  ];
}

/** Translate one gesture into a command, or null for gestures that map to
 * nothing (messengers are system-driven; empty right-clicks are no-ops). */
export function gestureToCommand(gesture: Gesture, view: ViewState): Command | null {
  switch (gesture.kind) {
    case "drag-end": {
      const robot = view.frame?.robots.find((r) => r.id === gesture.robotId);
      if (!robot || robot.role === "messenger") return null;
      const [x, y] = clampToSurface(gesture.x_mm, gesture.y_mm);
      return { cmd: "move_robot", id: gesture.robotId, x_mm: x, y_mm: y };
    }
    case "double-click": {
      if (view.robotAt(gesture.x_mm, gesture.y_mm)) return null;
      const [x, y] = clampToSurface(gesture.x_mm, gesture.y_mm);
      return { cmd: "add_node", x_mm: x, y_mm: y };
    }
    case "right-click": {
      const robot = view.robotAt(gesture.x_mm, gesture.y_mm);
      if (!robot || robot.role !== "node") return null;
      return { cmd: "remove_node", id: robot.id };
    }
    case "widget-drag":
      return { cmd: "set_time_window", t0: gesture.t0, t1: gesture.t1 };
  }
}
