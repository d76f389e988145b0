/** Orchestrates the explorer: state transitions, rate-limited inference
 * calls with stale-response discard, and refetch-on-task-switch. */

import { ApiClient, type TaskInfo } from "./api.js";
import { SequenceGate, rateLimit } from "./debounce.js";
import {
  ViewState, applyFront, applyInfer, applyMetrics, initialState, selectTask,
  setTheta, sliderCount, withBanner, withTasks,
} from "./state.js";

export const INFER_INTERVAL_MS = 100;
export const FRONT_POINTS = 100;

export class ExplorerController {
  state: ViewState = initialState();
  private readonly gate = new SequenceGate();
  private readonly requestInfer: (theta: number[]) => void;
  private inflight = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: (state: ViewState) => void = () => {},
    intervalMs: number = INFER_INTERVAL_MS,
  ) {
    this.requestInfer = rateLimit((theta) => void this.fireInfer(theta), intervalMs);
  }

  /** Number of infer requests actually sent (rate-limit observability). */
  get inferRequestCount(): number {
    return this.inflight;
  }

  private commit(next: ViewState): void {
    this.state = next;
    this.onChange(this.state);
  }

  async init(): Promise<void> {
    try {
      const tasks = await this.api.tasks();
      this.commit(withTasks(this.state, tasks));
      if (tasks.length > 0) {
        await this.selectTask(tasks[0].id);
      }
    } catch (err) {
      this.commit(withBanner(this.state, `failed to load tasks: ${message(err)}`));
    }
  }

  async selectTask(taskId: string): Promise<void> {
    const task = this.state.tasks.find((t: TaskInfo) => t.id === taskId);
    if (!task) {
      this.commit(withBanner(this.state, `unknown task '${taskId}'`));
      return;
    }
    this.commit(selectTask(this.state, task));
    await Promise.all([this.refreshFront(task.id), this.refreshMetrics(task.id)]);
    await this.fireInfer(this.state.theta);
  }

  onSliderChange(index: number, value: number): void {
    const next = setTheta(this.state, index, value);
    if (next === this.state) {
      return;
    }
    this.commit(next);
    this.requestInfer(next.theta);
  }

  private async refreshFront(taskId: string): Promise<void> {
    try {
      const points = await this.api.front(taskId, FRONT_POINTS);
      this.commit(applyFront(this.state, taskId, points));
    } catch (err) {
      this.commit(withBanner(this.state, `front unavailable: ${message(err)}`));
    }
  }

  private async refreshMetrics(taskId: string): Promise<void> {
    try {
      const metrics = await this.api.metrics(taskId);
      this.commit(applyMetrics(this.state, metrics));
    } catch (err) {
      this.commit(withBanner(this.state, `metrics unavailable: ${message(err)}`));
    }
  }

  async fireInfer(theta: number[]): Promise<void> {
    const task = this.state.selected;
    if (!task || theta.length !== sliderCount(this.state)) {
      return;
    }
    const ticket = this.gate.issue();
    this.inflight += 1;
    try {
      const response = await this.api.infer(task.id, theta);
      if (this.gate.isCurrent(ticket)) {
        this.commit(applyInfer(this.state, response));
      }
    } catch (err) {
      if (this.gate.isCurrent(ticket)) {
        this.commit(withBanner(this.state, `infer failed: ${message(err)}`));
      }
    }
  }
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
