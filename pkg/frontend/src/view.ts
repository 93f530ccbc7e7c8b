// ViewState: the single source of truth for the rendering loop.
//
// Invariants:
//  - rendering uses only the latest complete frame, plus at most one
//    optimistic local drag pose (visual only, reconciled on the next frame)
//  - stale frames (sequence <= last seen) are discarded
//  - the mm->pixel scale preserves aspect ratio

import { EventFrame, RobotState, spread } from "./protocol.js";

export const SURFACE_MM: [number, number] = [1000, 700];
export const ROBOT_DIAMETER_MM = 100;

export type ConnectionStatus = "connecting" | "open" | "closed" | "error";

export interface DragState {
  robotId: number;
  x_mm: number;
  y_mm: number;
}

export interface SparklinePoint {
  iteration: number;
  value: number;
}

export class ViewState {
  frame: EventFrame | null = null;
  scale_px_per_mm = 1;
  offset_px: [number, number] = [0, 0];
  selectedRobot: number | null = null;
  pendingDrag: DragState | null = null;
  status: ConnectionStatus = "connecting";
  droppedFrames = 0;
  /** per-node value history for the sparklines, keyed by robot id */
  history = new Map<number, SparklinePoint[]>();

  /** Accept a frame if it is newer than the last one; true when accepted. */
  ingest(frame: EventFrame): boolean {
    if (this.frame && frame.frame <= this.frame.frame) {
      this.droppedFrames += 1;
      return false;
    }
    // iteration going backwards means the run restarted: old history is
    // for a different initial vector, so clear it
    if (this.frame && frame.iteration < this.frame.iteration) {
      this.history.clear();
    }
    this.frame = frame;
    const nodes = frame.robots.filter((r) => r.role === "node");
    nodes.forEach((robot, i) => {
      const series = this.history.get(robot.id) ?? [];
      const last = series[series.length - 1];
      if (!last || last.iteration !== frame.iteration) {
        series.push({ iteration: frame.iteration, value: frame.values[i] });
        if (series.length > 200) series.shift();
      }
      this.history.set(robot.id, series);
    });
    // a completed round-trip reconciles the optimistic drag
    if (this.pendingDrag) this.pendingDrag = null;
    return true;
  }

  noteMalformed(): void {
    this.droppedFrames += 1;
    this.status = "error";
  }

  /** Aspect-preserving fit of the surface into a pixel viewport. */
  fitViewport(width_px: number, height_px: number): void {
    const s = Math.min(width_px / SURFACE_MM[0], height_px / SURFACE_MM[1]);
    this.scale_px_per_mm = s;
    this.offset_px = [
      (width_px - SURFACE_MM[0] * s) / 2,
      (height_px - SURFACE_MM[1] * s) / 2,
    ];
  }

  toPx(x_mm: number, y_mm: number): [number, number] {
    return [
      this.offset_px[0] + x_mm * this.scale_px_per_mm,
      // table y grows upward, canvas y grows downward
      this.offset_px[1] + (SURFACE_MM[1] - y_mm) * this.scale_px_per_mm,
    ];
  }

  toMm(x_px: number, y_px: number): [number, number] {
    return [
      (x_px - this.offset_px[0]) / this.scale_px_per_mm,
      SURFACE_MM[1] - (y_px - this.offset_px[1]) / this.scale_px_per_mm,
    ];
  }

  /** The pose to draw a robot at: the optimistic drag wins for the robot
   * being dragged, the server frame for everyone else. */
  displayPose(robot: RobotState): { x_mm: number; y_mm: number } {
    if (this.pendingDrag && this.pendingDrag.robotId === robot.id) {
      return { x_mm: this.pendingDrag.x_mm, y_mm: this.pendingDrag.y_mm };
    }
    return { x_mm: robot.x_mm, y_mm: robot.y_mm };
  }

  robotAt(x_mm: number, y_mm: number): RobotState | null {
    if (!this.frame) return null;
    for (const r of this.frame.robots) {
      const p = this.displayPose(r);
      const d = Math.hypot(p.x_mm - x_mm, p.y_mm - y_mm);
      if (d <= ROBOT_DIAMETER_MM / 2) return r;
    }
    return null;
  }

  currentSpread(): number {
    return this.frame ? spread(this.frame.values) : 0;
  }
}
