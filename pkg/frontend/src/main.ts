/** Operator console wiring: live chart, readouts, controls, config. */

import { ApiError, DasClient } from "./api.js";
import { StripChart, TRACE_COLORS } from "./chart.js";
import { ALL_CHANNELS, ViewState } from "./model.js";
import type { AcquisitionConfigJson } from "./types.js";

const client = new DasClient("");
const state = new ViewState();

const el = {
  phase: byId("phase"),
  counters: byId("counters"),
  connection: byId("connection"),
  problem: byId("problem"),
  readouts: byId("readouts"),
  channels: byId("channels"),
  start: byId("btn-start") as HTMLButtonElement,
  stop: byId("btn-stop") as HTMLButtonElement,
  download: byId("btn-download") as HTMLAnchorElement,
  config: byId("config"),
  configMsg: byId("config-msg"),
  canvas: byId("chart") as HTMLCanvasElement,
};
const chart = new StripChart(el.canvas);
let dirty = true;

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node;
}

function setProblem(message: string | null): void {
  el.problem.textContent = message ?? "";
  el.problem.classList.toggle("hidden", message === null);
}

// ------------------------------------------------------------------ status

async function pollStatus(): Promise<void> {
  try {
    const status = await client.getStatus();
    el.phase.textContent = status.phase;
    el.phase.dataset.phase = status.phase;
    el.counters.textContent =
      `polls ${status.polls} · records ${status.records} · ` +
      `timeouts ${status.timeouts} · gaps ${status.gaps}`;
    el.start.disabled = status.phase === "acquiring";
    el.stop.disabled = status.phase !== "acquiring";
    if (status.phase === "error" && status.error) {
      setProblem(`acquisition error: ${status.error}`);
    }
  } catch {
    el.phase.textContent = "unreachable";
    el.phase.dataset.phase = "down";
  }
}

// ------------------------------------------------------------------ stream

async function consumeStream(): Promise<void> {
  // reconnect forever; dedupe in ViewState keeps reconnects idempotent
  while (true) {
    try {
      el.connection.textContent = "stream: connected";
      for await (const record of client.stream()) {
        if (state.applyRecord(record)) dirty = true;
      }
    } catch {
      // fall through to the reconnect delay
    }
    el.connection.textContent = "stream: reconnecting…";
    await sleep(1000);
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

// ------------------------------------------------------------------- render

function renderLoop(): void {
  if (dirty) {
    dirty = false;
    chart.render(state.plottable());
    renderReadouts();
  }
  requestAnimationFrame(renderLoop);
}

function renderReadouts(): void {
  const parts: string[] = [];
  for (const readout of state.plottable()) {
    const color = TRACE_COLORS[readout.channel % TRACE_COLORS.length];
    const flagged = readout.flag === "ok" ? "" : " flagged";
    parts.push(
      `<div class="readout${flagged}">` +
        `<span class="dot" style="background:${color}"></span>` +
        `<span class="ch">ch${readout.channel}</span>` +
        `<span class="val">${readout.value.toFixed(3)}</span>` +
        `<span class="unit">${readout.unit}</span>` +
        `<span class="flag">${readout.flag}</span>` +
        `</div>`,
    );
  }
  el.readouts.innerHTML =
    parts.join("") || `<div class="readout muted">no mapped channels yet</div>`;
}

// ----------------------------------------------------------------- controls

function buildChannelBoxes(enabled: number[]): void {
  el.channels.innerHTML = "";
  for (const ch of ALL_CHANNELS) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = enabled.includes(ch);
    box.addEventListener("change", () => void applySelection());
    label.append(box, ` ch${ch}`);
    el.channels.appendChild(label);
  }
  state.setSelection(enabled);
}

function checkedChannels(): number[] {
  return [...el.channels.querySelectorAll("input")]
    .map((box, i) => ((box as HTMLInputElement).checked ? i : -1))
    .filter((ch) => ch >= 0);
}

async function applySelection(): Promise<void> {
  const channels = checkedChannels();
  try {
    await client.setEnabledChannels(channels);
    state.setSelection(channels);
    dirty = true;
    setProblem(null);
  } catch (exc) {
    setProblem(describe(exc));
  }
}

function describe(exc: unknown): string {
  if (exc instanceof ApiError) {
    return exc.fieldErrors.length
      ? exc.fieldErrors.map((e) => `${e.field}: ${e.message}`).join("; ")
      : `${exc.message} (HTTP ${exc.status})`;
  }
  return String(exc);
}

el.start.addEventListener("click", async () => {
  try {
    await client.start();
    setProblem(null);
  } catch (exc) {
    setProblem(describe(exc));
  }
  void pollStatus();
});

el.stop.addEventListener("click", async () => {
  try {
    await client.stop();
    setProblem(null);
  } catch (exc) {
    setProblem(describe(exc));
  }
  void pollStatus();
});

// ------------------------------------------------------------ config editor

const PRESETS: Record<string, { v_lo: number; v_hi: number; q_lo: number; q_hi: number; unit: string }> = {
  temperature: { v_lo: 0, v_hi: 5, q_lo: 0, q_hi: 50, unit: "degC" },
  humidity: { v_lo: 1, v_hi: 5, q_lo: 10, q_hi: 90, unit: "%RH" },
};

function buildConfigEditor(config: AcquisitionConfigJson): void {
  const mapped = new Map(config.channel_maps.map((m) => [m.channel, m]));
  const rows = ALL_CHANNELS.map((ch) => {
    const m = mapped.get(ch);
    const preset =
      m === undefined
        ? "none"
        : m.unit === "degC" && m.q_hi === 50
          ? "temperature"
          : m.unit === "%RH"
            ? "humidity"
            : "custom";
    const options = ["none", "temperature", "humidity"]
      .map((p) => `<option value="${p}"${p === preset ? " selected" : ""}>${p}</option>`)
      .join("");
    return (
      `<div class="cfg-row"><span>ch${ch}</span>` +
      `<select data-channel="${ch}">${options}` +
      (preset === "custom" ? `<option value="custom" selected>custom</option>` : "") +
      `</select></div>`
    );
  });
  el.config.innerHTML =
    rows.join("") +
    `<div class="cfg-row"><span>period</span>` +
    `<input id="cfg-period" type="number" min="1" value="${config.poll_period_ms}"> ms</div>` +
    `<button id="cfg-apply">apply config</button>`;
  byId("cfg-apply").addEventListener("click", () => void applyConfig());
}

async function applyConfig(): Promise<void> {
  const maps: AcquisitionConfigJson["channel_maps"] = [];
  for (const select of el.config.querySelectorAll("select")) {
    const ch = Number((select as HTMLSelectElement).dataset.channel);
    const preset = (select as HTMLSelectElement).value;
    if (preset in PRESETS) {
      maps.push({ channel: ch, ...PRESETS[preset] });
    }
  }
  const period = Number((byId("cfg-period") as HTMLInputElement).value);
  try {
    const applied = await client.putConfig({
      poll_period_ms: period,
      channel_maps: maps,
    });
    el.configMsg.textContent = "applied";
    el.configMsg.className = "ok";
    buildConfigEditor(applied);
  } catch (exc) {
    // 409 while acquiring and 422 invariant violations land here, inline
    el.configMsg.textContent = describe(exc);
    el.configMsg.className = "bad";
  }
}

// -------------------------------------------------------------------- boot

async function boot(): Promise<void> {
  el.download.href = client.logUrl;
  try {
    const config = await client.getConfig();
    buildChannelBoxes(config.enabled_channels);
    buildConfigEditor(config);
    setProblem(null);
  } catch (exc) {
    setProblem(`service unreachable: ${describe(exc)}`);
    buildChannelBoxes(ALL_CHANNELS);
    setTimeout(() => void boot(), 2000);
    return;
  }
  void consumeStream();
  void pollStatus();
  setInterval(() => void pollStatus(), 1000);
  renderLoop();
}

void boot();
