/** Typed client for the control service; the dashboard's only backend. */

import { ndjson } from "./ndjson.js";
import type {
  AcquisitionConfigJson,
  FieldError,
  Status,
  StreamRecord,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
    readonly fieldErrors: FieldError[] = [],
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class DasClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  get logUrl(): string {
    return `${this.base}/log/latest`;
  }

  async getStatus(): Promise<Status> {
    return this.requestJson("GET", "/status");
  }

  async getConfig(): Promise<AcquisitionConfigJson> {
    return this.requestJson("GET", "/config");
  }

  async putConfig(
    config: Partial<AcquisitionConfigJson>,
  ): Promise<AcquisitionConfigJson> {
    return this.requestJson("PUT", "/config", config);
  }

  async setEnabledChannels(channels: number[]): Promise<void> {
    await this.putConfig({ enabled_channels: channels });
  }

  async start(): Promise<void> {
    await this.requestJson("POST", "/acquisition/start");
  }

  async stop(): Promise<void> {
    await this.requestJson("POST", "/acquisition/stop");
  }

  /** Live records until the connection drops or `signal` aborts. */
  async *stream(signal?: AbortSignal): AsyncGenerator<StreamRecord> {
    const response = await this.fetchFn(`${this.base}/stream`, { signal });
    if (!response.ok || !response.body) {
      throw new ApiError(`stream failed (${response.status})`, response.status);
    }
    yield* ndjson<StreamRecord>(response.body);
  }

  private async requestJson(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<any> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(`${this.base}${path}`, init);
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const fieldErrors: FieldError[] = payload.errors ?? [];
      const message =
        payload.error ??
        fieldErrors.map((e) => `${e.field}: ${e.message}`).join("; ") ??
        `${method} ${path} failed`;
      throw new ApiError(message || `HTTP ${response.status}`, response.status, fieldErrors);
    }
    return payload;
  }
}
