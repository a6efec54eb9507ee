/** Wire types of the control service's JSON surface. */

export interface StreamValue {
  channel: number;
  value: number;
  unit: string;
  flag: string;
}

/** One line of GET /stream. */
export interface StreamRecord {
  seq: number;
  host_time: string; // ISO-8601 UTC with milliseconds
  counts: number[];
  volts: number[];
  values: StreamValue[];
}

export interface Status {
  phase: "idle" | "acquiring" | "error";
  polls: number;
  records: number;
  timeouts: number;
  decode_errors: number;
  gaps: number;
  missed_total: number;
  uptime_s: number;
  error?: string | null;
}

export interface ChannelMapJson {
  channel: number;
  v_lo: number;
  v_hi: number;
  q_lo: number;
  q_hi: number;
  unit: string;
}

export interface AcquisitionConfigJson {
  poll_period_ms: number;
  response_timeout_ms: number;
  enabled_channels: number[];
  channel_maps: ChannelMapJson[];
  buffer_capacity?: number;
  paced?: boolean;
  log?: Record<string, unknown> | null;
}

export interface FieldError {
  field: string;
  message: string;
}
