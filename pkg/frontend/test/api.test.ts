import { describe, expect, it } from "vitest";

import { ApiError, DasClient } from "../src/api.js";
import type { StreamRecord } from "../src/types.js";

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function mockFetch(routes: Record<string, (init?: RequestInit) => Response>) {
  const calls: Array<{ url: string; init?: RequestInit }> = [];
  const fn = async (url: string, init?: RequestInit): Promise<Response> => {
    calls.push({ url, init });
    const handler = routes[url.replace(/^https?:\/\/[^/]+/, "")] ?? routes[url];
    if (!handler) throw new Error(`unrouted ${url}`);
    return handler(init);
  };
  return { fn, calls };
}

describe("DasClient", () => {
  it("fetches status", async () => {
    const { fn } = mockFetch({
      "/status": () => jsonResponse(200, { phase: "idle", polls: 0 }),
    });
    const client = new DasClient("", fn);
    expect((await client.getStatus()).phase).toBe("idle");
  });

  it("PUTs enabled channels as JSON", async () => {
    const { fn, calls } = mockFetch({
      "/config": () => jsonResponse(200, { enabled_channels: [0, 1] }),
    });
    await new DasClient("", fn).setEnabledChannels([0, 1]);
    expect(calls[0].init?.method).toBe("PUT");
    expect(JSON.parse(String(calls[0].init?.body))).toEqual({
      enabled_channels: [0, 1],
    });
  });

  it("maps 422 bodies onto field errors", async () => {
    const { fn } = mockFetch({
      "/config": () =>
        jsonResponse(422, {
          errors: [{ field: "channel_maps[0]", message: "require v_lo < v_hi" }],
        }),
    });
    const err = await new DasClient("", fn)
      .putConfig({ channel_maps: [] })
      .catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(422);
    expect(err.fieldErrors[0].field).toBe("channel_maps[0]");
  });

  it("maps 409 phase conflicts onto ApiError", async () => {
    const { fn } = mockFetch({
      "/acquisition/start": () =>
        jsonResponse(409, { error: "acquisition already running" }),
    });
    const err = await new DasClient("", fn).start().catch((e) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect(err.status).toBe(409);
    expect(err.message).toMatch(/already running/);
  });

  it("streams NDJSON records", async () => {
    const lines =
      '{"seq":0,"host_time":"2026-08-10T00:00:00.000Z","counts":[],"volts":[],"values":[]}\n' +
      "\n" + // keepalive
      '{"seq":1,"host_time":"2026-08-10T00:00:01.000Z","counts":[],"volts":[],"values":[]}\n';
    const { fn } = mockFetch({
      "/stream": () => new Response(lines, { status: 200 }),
    });
    const got: StreamRecord[] = [];
    for await (const rec of new DasClient("", fn).stream()) got.push(rec);
    expect(got.map((r) => r.seq)).toEqual([0, 1]);
  });

  it("throws on a failed stream connection", async () => {
    const { fn } = mockFetch({ "/stream": () => new Response("", { status: 503 }) });
    const gen = new DasClient("", fn).stream();
    await expect(gen.next()).rejects.toBeInstanceOf(ApiError);
  });

  it("exposes the CSV download URL", () => {
    expect(new DasClient("http://x:1").logUrl).toBe("http://x:1/log/latest");
  });
});
