/** Client-side view state: bounded rolling windows, dedupe, selection. */

import type { StreamRecord } from "./types.js";

export const ALL_CHANNELS = [0, 1, 2, 3, 4, 5, 6, 7];
export const DEFAULT_WINDOW_POINTS = 3600;

export interface ChannelReadout {
  channel: number;
  unit: string;
  value: number;
  flag: string;
  times: number[]; // epoch ms, parallel to values
  values: number[];
}

/** Rolling per-channel history plus latest readouts.

    Records are keyed by seq + host_time so a stream reconnect can never
    double-plot a point; the window holds at most `capacity` points per
    channel, oldest dropped first. */
export class ViewState {
  readonly channels = new Map<number, ChannelReadout>();
  selected = new Set<number>(ALL_CHANNELS);
  recordsSeen = 0;

  private readonly seenKeys = new Set<string>();
  private readonly seenOrder: string[] = [];

  constructor(readonly capacity: number = DEFAULT_WINDOW_POINTS) {
    if (capacity <= 0) throw new Error("window capacity must be positive");
  }

  /** Folds one stream record in; returns false for duplicates. */
  applyRecord(record: StreamRecord): boolean {
    const key = `${record.seq}:${record.host_time}`;
    if (this.seenKeys.has(key)) return false;
    this.remember(key);

    const t = Date.parse(record.host_time);
    for (const v of record.values) {
      let readout = this.channels.get(v.channel);
      if (!readout) {
        readout = {
          channel: v.channel,
          unit: v.unit,
          value: v.value,
          flag: v.flag,
          times: [],
          values: [],
        };
        this.channels.set(v.channel, readout);
      }
      readout.unit = v.unit;
      readout.value = v.value;
      readout.flag = v.flag;
      readout.times.push(t);
      readout.values.push(v.value);
      if (readout.times.length > this.capacity) {
        readout.times.splice(0, readout.times.length - this.capacity);
        readout.values.splice(0, readout.values.length - this.capacity);
      }
    }
    this.recordsSeen += 1;
    return true;
  }

  setSelection(channels: number[]): void {
    this.selected = new Set(channels.filter((c) => c >= 0 && c <= 7));
  }

  /** Channels that are both selected and have data, plot order. */
  plottable(): ChannelReadout[] {
    return [...this.channels.values()]
      .filter((c) => this.selected.has(c.channel) && c.values.length > 0)
      .sort((a, b) => a.channel - b.channel);
  }

  private remember(key: string): void {
    this.seenKeys.add(key);
    this.seenOrder.push(key);
    // dedupe memory stays bounded alongside the window
    while (this.seenOrder.length > this.capacity * 2) {
      const oldest = this.seenOrder.shift();
      if (oldest !== undefined) this.seenKeys.delete(oldest);
    }
  }
}
