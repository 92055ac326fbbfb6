// Page wiring: session picker, live view, controls, steering panel.

import { drawSeries } from "./charts.js";
import { LiveSocket, SocketStatus } from "./socket.js";
import { Rec, SessionInfo } from "./types.js";
import { LiveViewModel } from "./viewmodel.js";

const $ = <T extends HTMLElement = HTMLElement>(id: string): T =>
  document.getElementById(id) as T;

const vm = new LiveViewModel();
let socket: LiveSocket | null = null;
let sessionId: string | null = null;

function setBanner(text: string, isError = false): void {
  const banner = $("banner");
  banner.textContent = text;
  banner.className = isError ? "banner error" : "banner";
  banner.style.display = text ? "block" : "none";
}

function render(): void {
  $("phase").textContent = vm.phase;
  $("level").textContent = vm.level === null ? "-" : `L${vm.level}`;
  $("set").textContent = vm.currentSet ? `set ${vm.currentSet}` : "-";
  $("reps").textContent =
    vm.repTarget === null ? String(vm.repsInSet) : `${vm.repsInSet} / ${vm.repTarget}`;
  $("total-reps").textContent = String(vm.totalReps);
  const air = $("air");
  air.textContent = vm.airBand ?? "-";
  air.className = `chip air-${vm.airBand ?? "unknown"}`;

  const list = $("warnings");
  list.innerHTML = "";
  for (const w of vm.warnings.slice(-8).reverse()) {
    const li = document.createElement("li");
    li.textContent = `${(w.t_ms / 1000).toFixed(0)}s  ${w.label}`;
    list.appendChild(li);
  }

  drawSeries($("chart-spo2") as HTMLCanvasElement, vm.spo2, vm.lastTms, {
    color: "#53b1fd", label: "SpO2 %", yMin: 80, yMax: 100,
  });
  drawSeries($("chart-rr") as HTMLCanvasElement, vm.rr, vm.lastTms, {
    color: "#7bd88f", label: "resp rate /min", yMin: 5, yMax: 31,
  });
  drawSeries($("chart-hr") as HTMLCanvasElement, vm.hr, vm.lastTms, {
    color: "#f2a65a", label: "heart rate bpm", yMin: 40, yMax: 180,
  });
}

function setStatus(status: SocketStatus): void {
  const el = $("conn");
  el.textContent = status;
  el.className = `chip conn-${status}`;
}

async function loadSessions(): Promise<void> {
  const resp = await fetch("/api/sessions");
  const sessions = (await resp.json()) as SessionInfo[];
  const select = $("session-select") as HTMLSelectElement;
  select.innerHTML = "";
  for (const s of sessions.slice().reverse()) {
    const option = document.createElement("option");
    option.value = s.id;
    option.textContent = `${s.id} (${s.status})`;
    select.appendChild(option);
  }
  if (!sessions.length) setBanner("no sessions yet - create one with the CLI or simulator");
}

function connect(id: string): void {
  socket?.close();
  vm.reset();
  sessionId = id;
  setBanner("");
  const proto = location.protocol === "https:" ? "wss" : "ws";
  socket = new LiveSocket(`${proto}://${location.host}/api/live/${id}`, {
    makeSocket: (url) => new WebSocket(url) as unknown as never,
    fetchEvents: async () => {
      const resp = await fetch(`/api/sessions/${id}/events`);
      if (!resp.ok) throw new Error(`events fetch failed: ${resp.status}`);
      return (await resp.json()) as Rec[];
    },
    onReset: () => vm.reset(),
    onRecord: (rec) => {
      vm.apply(rec);
      render();
    },
    onStatus: (s) => setStatus(s),
    onReply: (reply) => {
      if (reply.error) setBanner(String(reply.error), true);
    },
  });
  socket.connect();
}

function sendCommand(command: string, arg = 0): void {
  if (!socket?.send({ command, arg })) setBanner("not connected", true);
}

function sendSteer(field: string, value: number): void {
  if (!socket?.send({ steer: field, value })) setBanner("not connected", true);
}

function wireControls(): void {
  $("btn-connect").onclick = () => {
    const select = $("session-select") as HTMLSelectElement;
    if (select.value) connect(select.value);
  };
  $("btn-refresh").onclick = () => void loadSessions();
  $("btn-start").onclick = () => sendCommand("start");
  $("btn-pause").onclick = () => sendCommand("pause");
  $("btn-resume").onclick = () => sendCommand("resume");
  $("btn-stop").onclick = () => sendCommand("stop");
  $("btn-intensity").onclick = () => {
    const level = parseInt(($("intensity") as HTMLInputElement).value, 10);
    if (level >= 1 && level <= 5) sendCommand("set_intensity", level);
  };

  const slider = $("steer-spo2") as HTMLInputElement;
  slider.oninput = () => ($("steer-spo2-value").textContent = slider.value);
  slider.onchange = () => sendSteer("spo2_target", parseFloat(slider.value));
  const effort = $("steer-effort") as HTMLInputElement;
  effort.onchange = () => sendSteer("rep_amplitude_mg", parseFloat(effort.value));
  $("btn-steer-pm").onclick = () => {
    const value = parseFloat(($("steer-pm25") as HTMLInputElement).value);
    if (Number.isFinite(value) && value >= 0) sendSteer("pm25", value);
    else setBanner("PM2.5 must be a non-negative number", true);
  };
  $("btn-desat").onclick = () => sendSteer("spo2_target", 84);
}

window.addEventListener("DOMContentLoaded", () => {
  wireControls();
  void loadSessions();
  render();
  setStatus("closed");
});

export { connect, render, sessionId };
