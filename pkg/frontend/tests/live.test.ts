/** End-to-end check against a live service (set COACTION_SERVER_URL and
 * serve a checkpoint first; see README). Drives the real controller
 * through ten slider positions and verifies every displayed point equals
 * a fresh /api/infer response verbatim, sits inside the front's bounding
 * box, and updates fast enough for interactive use. Skipped when no
 * server is configured. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { ExplorerController } from "../src/controller.js";
import { THETA_MAX, THETA_MIN } from "../src/state.js";

const BASE = process.env.COACTION_SERVER_URL;
let reachable = false;
if (BASE) {
  try {
    const res = await fetch(`${BASE}/api/tasks`);
    reachable = res.ok;
  } catch {
    reachable = false;
  }
}

describe.skipIf(!reachable)("live explorer loop", () => {
  it("ten slider drags match fresh infer responses and stay in the front box", async () => {
    const api = new ApiClient(BASE!);
    const controller = new ExplorerController(api, () => {}, 0);
    await controller.init();
    expect(controller.state.selected).not.toBeNull();
    const front = controller.state.front;
    expect(front.length).toBeGreaterThan(10);

    const m = controller.state.selected!.m;
    const lo = front.map((p) => p.f_norm.slice());
    const box = {
      min: Array.from({ length: m }, (_, j) => Math.min(...lo.map((f) => f[j]))),
      max: Array.from({ length: m }, (_, j) => Math.max(...lo.map((f) => f[j]))),
    };

    const latencies: number[] = [];
    for (let step = 0; step < 10; step++) {
      const theta = THETA_MIN + (step / 9) * (THETA_MAX - THETA_MIN);
      const begin = performance.now();
      controller.onSliderChange(0, theta);
      await controller.fireInfer(controller.state.theta);
      latencies.push(performance.now() - begin);

      const shown = controller.state.current!;
      const fresh = await api.infer(shown.task, controller.state.theta);
      expect(JSON.stringify(shown)).toBe(JSON.stringify(fresh));
      for (let j = 0; j < m; j++) {
        expect(shown.f_norm[j]).toBeGreaterThanOrEqual(box.min[j] - 0.05);
        expect(shown.f_norm[j]).toBeLessThanOrEqual(box.max[j] + 0.05);
      }
    }
    latencies.sort((a, b) => a - b);
    const median = latencies[Math.floor(latencies.length / 2)];
    expect(median).toBeLessThan(100);
  });
});
