import { describe, expect, it } from "vitest";

import { EventFrame, RobotState } from "../src/protocol.js";
import { SURFACE_MM, ViewState } from "../src/view.js";

function robot(id: number, x: number, y: number, role: RobotState["role"] = "node"): RobotState {
  return { id, x_mm: x, y_mm: y, heading_rad: 0, rgb: [0, 0, 0], text: String(id), role };
}

function frame(seq: number, iteration: number, robots: RobotState[], values: number[]): EventFrame {
  return { frame: seq, t_ms: seq * 33, iteration, converged: false, robots, values };
}

describe("frame ingestion", () => {
  it("accepts newer frames and discards stale ones", () => {
    const view = new ViewState();
    expect(view.ingest(frame(5, 1, [robot(1, 100, 100)], [2]))).toBe(true);
    expect(view.ingest(frame(4, 2, [robot(1, 100, 200)], [3]))).toBe(false);
    expect(view.ingest(frame(5, 2, [robot(1, 100, 200)], [3]))).toBe(false);
    expect(view.frame?.values).toEqual([2]);
    expect(view.droppedFrames).toBe(2);
    expect(view.ingest(frame(6, 2, [robot(1, 100, 200)], [3]))).toBe(true);
  });

  it("accumulates one sparkline point per iteration per node", () => {
    const view = new ViewState();
    view.ingest(frame(1, 0, [robot(1, 50, 100)], [1]));
    view.ingest(frame(2, 0, [robot(1, 50, 100)], [1])); // same iteration
    view.ingest(frame(3, 1, [robot(1, 50, 125)], [1.5]));
    expect(view.history.get(1)).toEqual([
      { iteration: 0, value: 1 },
      { iteration: 1, value: 1.5 },
    ]);
  });

  it("clears history when the iteration counter goes backwards (restart)", () => {
    const view = new ViewState();
    view.ingest(frame(1, 4, [robot(1, 50, 100)], [2.4]));
    view.ingest(frame(2, 0, [robot(1, 50, 500)], [9.0]));
    expect(view.history.get(1)).toEqual([{ iteration: 0, value: 9.0 }]);
  });

  it("reconciles the optimistic drag on the next frame", () => {
    const view = new ViewState();
    view.ingest(frame(1, 0, [robot(4, 950, 250)], [4]));
    view.pendingDrag = { robotId: 4, x_mm: 900, y_mm: 500 };
    expect(view.displayPose(view.frame!.robots[0])).toEqual({ x_mm: 900, y_mm: 500 });
    view.ingest(frame(2, 0, [robot(4, 950, 550)], [10]));
    expect(view.pendingDrag).toBeNull();
    expect(view.displayPose(view.frame!.robots[0])).toEqual({ x_mm: 950, y_mm: 550 });
  });
});

describe("viewport mapping", () => {
  it("preserves aspect ratio and centers the surface", () => {
    const view = new ViewState();
    view.fitViewport(2000, 700); // wider than 1000:700
    expect(view.scale_px_per_mm).toBe(1);
    expect(view.offset_px).toEqual([500, 0]);
  });

  it("round-trips mm -> px -> mm and flips the y axis", () => {
    const view = new ViewState();
    view.fitViewport(500, 350);
    const [px, py] = view.toPx(250, 100);
    const [mx, my] = view.toMm(px, py);
    expect(mx).toBeCloseTo(250, 9);
    expect(my).toBeCloseTo(100, 9);
    const [, topPy] = view.toPx(0, SURFACE_MM[1]);
    expect(topPy).toBeCloseTo(0, 9); // table top edge maps to canvas top
  });
});

describe("hit testing", () => {
  it("finds the robot under the pointer within its 50 mm radius", () => {
    const view = new ViewState();
    view.ingest(frame(1, 0, [robot(1, 100, 100), robot(2, 400, 100)], [1, 2]));
    expect(view.robotAt(130, 140)?.id).toBe(1);
    expect(view.robotAt(400, 100)?.id).toBe(2);
    expect(view.robotAt(250, 100)).toBeNull();
  });
});
