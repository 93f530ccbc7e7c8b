// Browser entry point: wires a canvas, pointer events, and the socket
// client together. Everything testable lives in the other modules; this
// file is the thin DOM shell.

import { TabletopClient } from "./client.js";
import { Gesture, gestureToCommand } from "./gestures.js";
import { render } from "./render.js";

const WS_URL = `ws://${location.hostname}:8080/`;

function main(): void {
  const canvas = document.getElementById("table") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d");
  if (!ctx) throw new Error("2d context unavailable");

  const client = new TabletopClient(WS_URL, (url) => new WebSocket(url));
  const view = client.view;

  const toMm = (ev: MouseEvent): [number, number] => {
    const rect = canvas.getBoundingClientRect();
    return view.toMm(ev.clientX - rect.left, ev.clientY - rect.top);
  };

  const apply = (gesture: Gesture) => {
    const cmd = gestureToCommand(gesture, view);
    if (cmd) client.send(cmd);
  };

  let dragging = false;
  canvas.addEventListener("mousedown", (ev) => {
    const [x, y] = toMm(ev);
    const robot = view.robotAt(x, y);
    if (robot && robot.role !== "messenger") {
      dragging = true;
      client.beginDrag(robot.id, x, y);
    }
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (dragging) {
      const [x, y] = toMm(ev);
      client.updateDrag(x, y);
    }
  });
  canvas.addEventListener("mouseup", (ev) => {
    if (!dragging || view.pendingDrag === null) return;
    dragging = false;
    const [x, y] = toMm(ev);
    apply({ kind: "drag-end", robotId: view.pendingDrag.robotId, x_mm: x, y_mm: y });
  });
  canvas.addEventListener("dblclick", (ev) => {
    const [x, y] = toMm(ev);
    apply({ kind: "double-click", x_mm: x, y_mm: y });
  });
  canvas.addEventListener("contextmenu", (ev) => {
    ev.preventDefault();
    const [x, y] = toMm(ev);
    apply({ kind: "right-click", x_mm: x, y_mm: y });
  });

  // edge editing has no physical gesture; a small side panel issues set_edge
  const edgeForm = document.getElementById("edge-form") as HTMLFormElement | null;
  edgeForm?.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const data = new FormData(edgeForm);
    client.send({
      cmd: "set_edge",
      from: Number(data.get("from")),
      to: Number(data.get("to")),
      present: data.get("present") === "on",
    });
  });

  const loop = () => {
    render(ctx, view, canvas.width, canvas.height);
    requestAnimationFrame(loop);
  };
  requestAnimationFrame(loop);
}

document.addEventListener("DOMContentLoaded", main);
