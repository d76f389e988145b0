/** Typed client for the inference service. Values pass through verbatim:
 * the UI never recomputes lambda/x/f, it only formats them for display. */

export interface TaskInfo {
  id: string;
  m: number;
  n: number;
  lower: number[];
  upper: number[];
}

export interface InferResponse {
  task: string;
  theta: number[];
  lambda: number[];
  x: number[];
  f_raw: number[];
  f_norm: number[];
}

export interface FrontPoint {
  theta: number[];
  f_norm: number[];
}

export interface MetricsInfo {
  task_id: string;
  hv: number;
  range: number;
  sparsity: number;
  count_after_filter: number;
  r_used: number[];
}

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const message =
        typeof body === "object" && body !== null && "error" in body
          ? String((body as { error: unknown }).error)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, message);
    }
    return body as T;
  }

  tasks(): Promise<TaskInfo[]> {
    return this.request<TaskInfo[]>("/api/tasks");
  }

  infer(task: string, theta: number[]): Promise<InferResponse> {
    return this.request<InferResponse>("/api/infer", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ task, theta }),
    });
  }

  async front(task: string, k: number): Promise<FrontPoint[]> {
    const doc = await this.request<{ points: FrontPoint[] }>(
      `/api/front/${task}?k=${k}`,
    );
    return doc.points;
  }

  metrics(task: string): Promise<MetricsInfo> {
    return this.request<MetricsInfo>(`/api/metrics/${task}`);
  }
}
