/** DOM wiring for the preference explorer. */

import { ApiClient } from "./api.js";
import { ExplorerController } from "./controller.js";
import { fmt, fmtVector } from "./format.js";
import { renderDecisionBars, renderFront, type Rotation } from "./plot.js";
import { THETA_MAX, THETA_MIN, type ViewState, sliderCount } from "./state.js";

const taskSelect = document.getElementById("task") as HTMLSelectElement;
const sliderBox = document.getElementById("sliders") as HTMLDivElement;
const frontCanvas = document.getElementById("front") as HTMLCanvasElement;
const barsCanvas = document.getElementById("bars") as HTMLCanvasElement;
const readout = document.getElementById("readout") as HTMLPreElement;
const metricsBox = document.getElementById("metrics") as HTMLDivElement;
const banner = document.getElementById("banner") as HTMLDivElement;

const rotation: Rotation = { yaw: 0.6, pitch: 0.9 };
const controller = new ExplorerController(new ApiClient(""), render);

function ensureSliders(state: ViewState): void {
  const want = sliderCount(state);
  if (sliderBox.childElementCount === want) {
    return;
  }
  sliderBox.innerHTML = "";
  for (let i = 0; i < want; i++) {
    const row = document.createElement("div");
    row.className = "slider-row";
    const label = document.createElement("label");
    label.textContent = `theta ${i + 1}`;
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(THETA_MIN);
    input.max = String(THETA_MAX);
    input.step = "0.001";
    input.value = String(state.theta[i] ?? Math.PI / 4);
    input.addEventListener("input", () => {
      controller.onSliderChange(i, Number(input.value));
    });
    const value = document.createElement("span");
    value.className = "slider-value";
    row.append(label, input, value);
    sliderBox.append(row);
  }
}

function render(state: ViewState): void {
  if (taskSelect.childElementCount !== state.tasks.length) {
    taskSelect.innerHTML = "";
    for (const task of state.tasks) {
      const opt = document.createElement("option");
      opt.value = task.id;
      opt.textContent = `${task.id} (m=${task.m}, n=${task.n})`;
      taskSelect.append(opt);
    }
  }
  if (state.selected) {
    taskSelect.value = state.selected.id;
  }

  ensureSliders(state);
  const rows = sliderBox.querySelectorAll(".slider-row");
  rows.forEach((row, i) => {
    const input = row.querySelector("input") as HTMLInputElement;
    const span = row.querySelector(".slider-value") as HTMLSpanElement;
    if (Math.abs(Number(input.value) - state.theta[i]) > 1e-9) {
      input.value = String(state.theta[i]);
    }
    span.textContent = fmt(state.theta[i], 4);
  });

  banner.textContent = state.banner ?? "";
  banner.style.display = state.banner ? "block" : "none";

  renderFront(frontCanvas, state.front, state.current, rotation);
  if (state.current && state.selected) {
    renderDecisionBars(barsCanvas, state.current.x, state.selected.lower,
      state.selected.upper);
    readout.textContent = [
      `theta  ${fmtVector(state.current.theta)}`,
      `lambda ${fmtVector(state.current.lambda)}`,
      `f_norm ${fmtVector(state.current.f_norm)}`,
      `f_raw  ${fmtVector(state.current.f_raw)}`,
      `x      ${fmtVector(state.current.x, 3)}`,
    ].join("\n");
  } else {
    readout.textContent = "";
  }

  if (state.metrics) {
    metricsBox.textContent =
      `HV ${fmt(state.metrics.hv)}   Range ${fmt(state.metrics.range)}   ` +
      `Sparsity ${fmt(state.metrics.sparsity)}   ` +
      `points ${state.metrics.count_after_filter}`;
  } else {
    metricsBox.textContent = "";
  }
}

taskSelect.addEventListener("change", () => {
  void controller.selectTask(taskSelect.value);
});

let dragging = false;
let last: [number, number] = [0, 0];
frontCanvas.addEventListener("mousedown", (ev) => {
  dragging = true;
  last = [ev.clientX, ev.clientY];
});
window.addEventListener("mouseup", () => {
  dragging = false;
});
window.addEventListener("mousemove", (ev) => {
  if (!dragging || !controller.state.selected || controller.state.selected.m !== 3) {
    return;
  }
  rotation.yaw += (ev.clientX - last[0]) * 0.01;
  rotation.pitch += (ev.clientY - last[1]) * 0.01;
  last = [ev.clientX, ev.clientY];
  render(controller.state);
});

void controller.init();
