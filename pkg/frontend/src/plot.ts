/** Canvas scatter rendering of the learned front: plain 2D axes for
 * bi-objective tasks, a rotatable orthographic projection for three. */

import type { FrontPoint, InferResponse } from "./api.js";

export interface Rotation {
  yaw: number;
  pitch: number;
}

const MARGIN = 36;

function bounds(values: number[]): [number, number] {
  let lo = Math.min(...values);
  let hi = Math.max(...values);
  if (!Number.isFinite(lo) || !Number.isFinite(hi)) {
    lo = 0;
    hi = 1;
  }
  if (hi - lo < 1e-9) {
    hi = lo + 1;
  }
  const pad = 0.06 * (hi - lo);
  return [lo - pad, hi + pad];
}

export function renderFront(
  canvas: HTMLCanvasElement,
  front: FrontPoint[],
  current: InferResponse | null,
  rotation: Rotation,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (front.length === 0 && current === null) {
    ctx.fillStyle = "#777";
    ctx.font = "14px sans-serif";
    ctx.fillText("no front data", width / 2 - 40, height / 2);
    return;
  }
  const dims = front.length > 0 ? front[0].f_norm.length : current!.f_norm.length;
  const points = front.map((p) => p.f_norm);
  if (dims === 2) {
    render2d(ctx, width, height, points, current?.f_norm ?? null);
  } else {
    render3d(ctx, width, height, points, current?.f_norm ?? null, rotation);
  }
}

function render2d(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  points: number[][],
  current: number[] | null,
): void {
  const all = current ? points.concat([current]) : points;
  const [x0, x1] = bounds(all.map((p) => p[0]));
  const [y0, y1] = bounds(all.map((p) => p[1]));
  const sx = (v: number) => MARGIN + ((v - x0) / (x1 - x0)) * (width - 2 * MARGIN);
  const sy = (v: number) => height - MARGIN - ((v - y0) / (y1 - y0)) * (height - 2 * MARGIN);

  ctx.strokeStyle = "#999";
  ctx.strokeRect(MARGIN, MARGIN, width - 2 * MARGIN, height - 2 * MARGIN);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText("f1", width - MARGIN + 6, height - MARGIN + 4);
  ctx.fillText("f2", MARGIN - 20, MARGIN - 8);

  ctx.fillStyle = "#4878d0";
  for (const p of points) {
    ctx.beginPath();
    ctx.arc(sx(p[0]), sy(p[1]), 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (current) {
    ctx.fillStyle = "#d65f5f";
    ctx.beginPath();
    ctx.arc(sx(current[0]), sy(current[1]), 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#8f2d2d";
    ctx.stroke();
  }
}

function project(p: number[], rotation: Rotation): [number, number] {
  const { yaw, pitch } = rotation;
  const cy = Math.cos(yaw);
  const sy = Math.sin(yaw);
  const cp = Math.cos(pitch);
  const sp = Math.sin(pitch);
  const x = p[0] * cy - p[1] * sy;
  const y = p[0] * sy + p[1] * cy;
  return [x, p[2] * cp - y * sp];
}

function render3d(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  points: number[][],
  current: number[] | null,
  rotation: Rotation,
): void {
  const all = current ? points.concat([current]) : points;
  const projected = all.map((p) => project(p, rotation));
  const [x0, x1] = bounds(projected.map((p) => p[0]));
  const [y0, y1] = bounds(projected.map((p) => p[1]));
  const sx = (v: number) => MARGIN + ((v - x0) / (x1 - x0)) * (width - 2 * MARGIN);
  const sy = (v: number) => height - MARGIN - ((v - y0) / (y1 - y0)) * (height - 2 * MARGIN);

  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText("drag to rotate", MARGIN, 16);

  ctx.fillStyle = "#4878d0";
  for (const p of projected.slice(0, points.length)) {
    ctx.beginPath();
    ctx.arc(sx(p[0]), sy(p[1]), 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
  if (current) {
    const [px, py] = projected[projected.length - 1];
    ctx.fillStyle = "#d65f5f";
    ctx.beginPath();
    ctx.arc(sx(px), sy(py), 6, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = "#8f2d2d";
    ctx.stroke();
  }
}

export function renderDecisionBars(
  canvas: HTMLCanvasElement,
  x: number[],
  lower: number[],
  upper: number[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  if (x.length === 0) {
    return;
  }
  const bar = Math.max(2, Math.floor(width / x.length) - 2);
  ctx.fillStyle = "#6aa36a";
  for (let i = 0; i < x.length; i++) {
    const frac = (x[i] - lower[i]) / (upper[i] - lower[i]);
    const h = Math.max(1, frac * (height - 4));
    ctx.fillRect(i * (bar + 2) + 1, height - 2 - h, bar, h);
  }
}
