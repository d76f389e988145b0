/** View state and its pure transitions. One slider per polar angle
 * (m - 1 of them); values live on the server's truncated grid range. */

import type { FrontPoint, InferResponse, MetricsInfo, TaskInfo } from "./api.js";

export const THETA_MIN = 0.01 * (Math.PI / 2);
export const THETA_MAX = 0.99 * (Math.PI / 2);

export interface ViewState {
  tasks: TaskInfo[];
  selected: TaskInfo | null;
  theta: number[];
  front: FrontPoint[];
  current: InferResponse | null;
  metrics: MetricsInfo | null;
  banner: string | null;
}

export function initialState(): ViewState {
  return {
    tasks: [],
    selected: null,
    theta: [],
    front: [],
    current: null,
    metrics: null,
    banner: null,
  };
}

export function clampTheta(value: number): number {
  return Math.min(THETA_MAX, Math.max(THETA_MIN, value));
}

export function sliderCount(state: ViewState): number {
  return state.selected ? state.selected.m - 1 : 0;
}

export function withTasks(state: ViewState, tasks: TaskInfo[]): ViewState {
  return { ...state, tasks };
}

/** Task switch: sliders reset to midpoint, cached data cleared so the
 * front and metrics are refetched. */
export function selectTask(state: ViewState, task: TaskInfo): ViewState {
  const midpoint = Math.PI / 4;
  return {
    ...state,
    selected: task,
    theta: new Array(task.m - 1).fill(midpoint),
    front: [],
    current: null,
    metrics: null,
  };
}

export function setTheta(state: ViewState, index: number, value: number): ViewState {
  if (!state.selected || index < 0 || index >= state.theta.length) {
    return state;
  }
  const theta = state.theta.slice();
  theta[index] = clampTheta(value);
  return { ...state, theta };
}

export function applyFront(state: ViewState, task: string, points: FrontPoint[]): ViewState {
  if (!state.selected || state.selected.id !== task) {
    return state; // stale response for a task we already left
  }
  return { ...state, front: points };
}

export function applyInfer(state: ViewState, response: InferResponse): ViewState {
  if (!state.selected || state.selected.id !== response.task) {
    return state;
  }
  return { ...state, current: response, banner: null };
}

export function applyMetrics(state: ViewState, metrics: MetricsInfo): ViewState {
  if (!state.selected || state.selected.id !== metrics.task_id) {
    return state;
  }
  return { ...state, metrics };
}

/** API failures surface as a banner; stale data stays on screen. */
export function withBanner(state: ViewState, message: string | null): ViewState {
  return { ...state, banner: message };
}
