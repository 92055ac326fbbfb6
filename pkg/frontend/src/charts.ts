// Minimal dependency-free canvas line chart for a rolling series.

import { SeriesPoint } from "./viewmodel.js";

export interface ChartOptions {
  color: string;
  yMin?: number;
  yMax?: number;
  windowMs?: number;
  label: string;
}

export function drawSeries(
  canvas: HTMLCanvasElement,
  series: SeriesPoint[],
  nowMs: number,
  opts: ChartOptions,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#182026";
  ctx.fillRect(0, 0, width, height);

  const windowMs = opts.windowMs ?? 5 * 60 * 1000;
  const t0 = nowMs - windowMs;
  const visible = series.filter((p) => p.t >= t0);

  let yMin = opts.yMin ?? Infinity;
  let yMax = opts.yMax ?? -Infinity;
  if (opts.yMin === undefined || opts.yMax === undefined) {
    for (const p of visible) {
      yMin = Math.min(yMin, p.v);
      yMax = Math.max(yMax, p.v);
    }
    if (!visible.length) {
      yMin = 0;
      yMax = 1;
    }
    const pad = Math.max(1e-6, (yMax - yMin) * 0.15);
    yMin -= pad;
    yMax += pad;
  }

  ctx.strokeStyle = "#2f3b44";
  ctx.lineWidth = 1;
  for (let i = 1; i <= 3; i++) {
    const y = (height * i) / 4;
    ctx.beginPath();
    ctx.moveTo(0, y);
    ctx.lineTo(width, y);
    ctx.stroke();
  }

  ctx.fillStyle = "#8aa0ad";
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillText(opts.label, 6, 14);
  if (visible.length) {
    const latest = visible[visible.length - 1].v;
    ctx.fillStyle = opts.color;
    ctx.font = "bold 16px system-ui, sans-serif";
    ctx.fillText(latest.toFixed(1), width - 52, 18);
  }

  if (visible.length < 2) return;
  ctx.strokeStyle = opts.color;
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  visible.forEach((p, i) => {
    const x = ((p.t - t0) / windowMs) * width;
    const y = height - ((p.v - yMin) / (yMax - yMin)) * height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}
