// Canvas rendering of the tabletop scene. The drawing surface is abstracted
// behind Surface2D (the subset of CanvasRenderingContext2D we use), so tests
// can record draw calls without a DOM.

import { EventFrame, RobotState } from "./protocol.js";
import { ROBOT_DIAMETER_MM, ViewState } from "./view.js";

export interface Surface2D {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
  textAlign: "left" | "right" | "center" | "start" | "end";
  beginPath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  stroke(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

const SPARK_W_PX = 60;
const SPARK_H_PX = 24;

function rgbCss([r, g, b]: [number, number, number]): string {
  return `rgb(${r}, ${g}, ${b})`;
}

function drawRobot(ctx: Surface2D, view: ViewState, robot: RobotState): void {
  const pose = view.displayPose(robot);
  const [x, y] = view.toPx(pose.x_mm, pose.y_mm);
  const r = (ROBOT_DIAMETER_MM / 2) * view.scale_px_per_mm;

  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
  ctx.fillStyle = rgbCss(robot.rgb);
  ctx.fill();

  // widget robots get a distinct dashed-look double outline; messengers a
  // thin one; node displays a plain rim
  ctx.lineWidth = robot.role === "widget" ? 3 : 1;
  ctx.strokeStyle = robot.role === "widget" ? "#f39c12" : "#2c3e50";
  ctx.stroke();

  // heading tick
  ctx.beginPath();
  ctx.moveTo(x, y);
  ctx.lineTo(
    x + r * Math.cos(robot.heading_rad),
    y - r * Math.sin(robot.heading_rad),
  );
  ctx.stroke();

  if (robot.text) {
    ctx.fillStyle = "#ffffff";
    ctx.textAlign = "center";
    ctx.fillText(robot.text, x, y);
  }
}

function drawSparkline(ctx: Surface2D, view: ViewState, robot: RobotState): void {
  const series = view.history.get(robot.id);
  if (!series || series.length < 2) return;
  const pose = view.displayPose(robot);
  const [cx, cy] = view.toPx(pose.x_mm, pose.y_mm);
  const x0 = cx - SPARK_W_PX / 2;
  const y0 = cy - (ROBOT_DIAMETER_MM / 2) * view.scale_px_per_mm - SPARK_H_PX - 4;

  const vals = series.map((p) => p.value);
  const lo = Math.min(...vals);
  const hi = Math.max(...vals);
  const span = hi - lo || 1;

  ctx.beginPath();
  series.forEach((p, i) => {
    const x = x0 + (i / (series.length - 1)) * SPARK_W_PX;
    const y = y0 + SPARK_H_PX * (1 - (p.value - lo) / span);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.lineWidth = 1;
  ctx.strokeStyle = rgbCss(robot.rgb);
  ctx.stroke();
}

function drawHud(ctx: Surface2D, view: ViewState, frame: EventFrame): void {
  ctx.fillStyle = "#2c3e50";
  ctx.textAlign = "left";
  ctx.font = "14px sans-serif";
  ctx.fillText(`iteration ${frame.iteration}`, 8, 18);
  ctx.fillStyle = frame.converged ? "#27ae60" : "#7f8c8d";
  ctx.fillText(frame.converged ? "converged" : "running", 8, 36);
  if (view.status !== "open") {
    ctx.fillStyle = "#c0392b";
    ctx.fillText(view.status, 8, 54);
  }
}

/** Draw the latest complete frame. Counts of draw primitives are the test
 * surface; visually: one to-scale disc per robot, LED color, screen text,
 * iteration counter, convergence badge, per-node sparkline. */
export function render(
  ctx: Surface2D,
  view: ViewState,
  width_px: number,
  height_px: number,
): void {
  ctx.clearRect(0, 0, width_px, height_px);
  view.fitViewport(width_px, height_px);

  // table surface
  const [sx, sy] = view.toPx(0, 700);
  ctx.fillStyle = "#ecf0f1";
  ctx.fillRect(sx, sy, 1000 * view.scale_px_per_mm, 700 * view.scale_px_per_mm);

  const frame = view.frame;
  if (!frame) {
    drawHud(ctx, view, {
      frame: 0, t_ms: 0, iteration: 0, converged: false, robots: [], values: [],
    });
    return;
  }
  for (const robot of frame.robots) drawRobot(ctx, view, robot);
  for (const robot of frame.robots) {
    if (robot.role === "node") drawSparkline(ctx, view, robot);
  }
  drawHud(ctx, view, frame);
}
