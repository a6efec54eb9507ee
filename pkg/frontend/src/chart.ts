/** Dependency-free canvas strip chart for the live traces. */

import type { ChannelReadout } from "./model.js";

export const TRACE_COLORS = [
  "#4fc3f7", "#ffb74d", "#81c784", "#e57373",
  "#ba68c8", "#fff176", "#a1887f", "#90a4ae",
];

export interface Range {
  min: number;
  max: number;
}

/** Pads a data range so traces never hug the frame; degenerate ranges
    (single value, or no data) widen to something drawable. */
export function padRange(min: number, max: number, fraction = 0.1): Range {
  if (!Number.isFinite(min) || !Number.isFinite(max)) return { min: 0, max: 1 };
  if (min > max) [min, max] = [max, min];
  const span = max - min;
  if (span === 0) {
    const pad = Math.max(Math.abs(min) * fraction, 1);
    return { min: min - pad, max: max + pad };
  }
  return { min: min - span * fraction, max: max + span * fraction };
}

/** Maps a value into pixel space (y axis inverted for canvas). */
export function project(
  value: number,
  range: Range,
  pixels: number,
  invert: boolean,
): number {
  const frac = (value - range.min) / (range.max - range.min);
  return invert ? pixels * (1 - frac) : pixels * frac;
}

export function combinedRange(traces: ChannelReadout[]): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const trace of traces) {
    for (const v of trace.values) {
      if (v < min) min = v;
      if (v > max) max = v;
    }
  }
  return padRange(min, max);
}

export function timeRange(traces: ChannelReadout[]): Range {
  let min = Infinity;
  let max = -Infinity;
  for (const trace of traces) {
    if (trace.times.length) {
      min = Math.min(min, trace.times[0]);
      max = Math.max(max, trace.times[trace.times.length - 1]);
    }
  }
  return padRange(min, max, 0.02);
}

export class StripChart {
  private readonly ctx: CanvasRenderingContext2D;

  constructor(private readonly canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  render(traces: ChannelReadout[]): void {
    const { width, height } = this.canvas;
    const ctx = this.ctx;
    ctx.fillStyle = "#10151c";
    ctx.fillRect(0, 0, width, height);
    if (!traces.length) {
      ctx.fillStyle = "#5c6a7a";
      ctx.font = "14px system-ui, sans-serif";
      ctx.fillText("waiting for records...", 16, height / 2);
      return;
    }

    const xr = timeRange(traces);
    const yr = combinedRange(traces);
    this.grid(yr, width, height);

    for (const trace of traces) {
      ctx.strokeStyle = TRACE_COLORS[trace.channel % TRACE_COLORS.length];
      ctx.lineWidth = 1.5;
      ctx.beginPath();
      for (let i = 0; i < trace.times.length; i++) {
        const x = project(trace.times[i], xr, width, false);
        const y = project(trace.values[i], yr, height, true);
        if (i === 0) ctx.moveTo(x, y);
        else ctx.lineTo(x, y);
      }
      ctx.stroke();
    }
  }

  private grid(yr: Range, width: number, height: number): void {
    const ctx = this.ctx;
    ctx.strokeStyle = "#222b36";
    ctx.fillStyle = "#5c6a7a";
    ctx.font = "11px system-ui, sans-serif";
    ctx.lineWidth = 1;
    const steps = 4;
    for (let i = 0; i <= steps; i++) {
      const value = yr.min + ((yr.max - yr.min) * i) / steps;
      const y = project(value, yr, height, true);
      ctx.beginPath();
      ctx.moveTo(0, y);
      ctx.lineTo(width, y);
      ctx.stroke();
      ctx.fillText(value.toFixed(1), 4, Math.max(10, y - 3));
    }
  }
}
