"""Multitask collaborative training loop.

Each iteration: pick a task uniformly at random, sample a batch of
preferences (optionally appending the extreme basis vectors), truncate,
assemble input vectors, run the model, evaluate the task's normalized
objectives through the graph, take the hypervolume surrogate loss,
backpropagate, clip the global gradient norm, and apply a decoupled
weight-decay adaptive-moment update at constant learning rate. All
randomness comes from named counter-based streams, so runs are
bit-reproducible per seed.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor
from .conditioning import (
    apply_extreme_and_truncate, assemble_input_batch, embed_task,
    polar_to_preference, sample_preferences,
)
from .hv_loss import LossContext, psl_hv1_loss
from .metrics import (
    MetricsReport, SolutionSet, hypervolume, nondominated_filter,
    range_metric, sparsity_metric,
)
from .model import Checkpoint, ModelConfig, forward, init_params, zero_grads
from .problems import get_problem
from .rng import named_stream

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
F_NORM_CAP = 3.5  # evaluation objectives are clipped into [0, cap]


@dataclass
class TrainConfig:
    mode: str = "multitask"          # or "single_task"
    iterations: int = 0              # 0 = mode default (5000 / 1000)
    batch: int = 256
    lr: float = 2e-3
    weight_decay: float = 0.01
    clip_norm: float = 1.0           # 0 disables clipping
    use_extreme: bool = True
    seed: int = 0
    reference_scalar: float = 3.5    # hypervolume metric anchor
    loss_reference: float = 1.05     # training-side reference (near nadir)
    eval_points: int = 100
    schedule_free: bool = True       # interpolated-iterate updates (default);
    warmup: int = 50                 # False falls back to plain AdamW

    def __post_init__(self):
        if self.mode not in ("multitask", "single_task"):
            raise ValueError(f"unknown mode '{self.mode}'")
        if self.iterations == 0:
            self.iterations = 5000 if self.mode == "multitask" else 1000
        if self.iterations < 1 or self.batch < 1 or self.lr <= 0:
            raise ValueError("iterations and batch must be >= 1 and lr > 0")


@dataclass
class TrainTrace:
    loss: np.ndarray
    task_schedule: np.ndarray
    wall_seconds: float
    Q: dict                       # task_id -> MetricsReport
    objective_evals: int = 0


@dataclass
class TaskEvaluation:
    report: MetricsReport
    solutions: SolutionSet


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class AdamWState:
    slots: dict = field(default_factory=dict)

    def slot(self, name: str, shape) -> dict:
        if name not in self.slots:
            self.slots[name] = {"step": 0, "m": np.zeros(shape), "v": np.zeros(shape)}
        return self.slots[name]


def optimizer_step(params: dict, state: AdamWState, lr: float,
                   weight_decay: float):
    """Decoupled weight-decay adaptive-moment update; skips grad-less params."""
    for name, p in params.items():
        if p.grad is None:
            continue
        s = state.slot(name, p.data.shape)
        s["step"] += 1
        t = s["step"]
        s["m"] = ADAM_BETA1 * s["m"] + (1 - ADAM_BETA1) * p.grad
        s["v"] = ADAM_BETA2 * s["v"] + (1 - ADAM_BETA2) * p.grad ** 2
        m_hat = s["m"] / (1 - ADAM_BETA1 ** t)
        v_hat = s["v"] / (1 - ADAM_BETA2 ** t)
        p.data -= lr * (m_hat / (np.sqrt(v_hat) + ADAM_EPS) + weight_decay * p.data)


@dataclass
class ScheduleFreeState:
    """Interpolated-iterate updates without a learning-rate schedule.

    Forward passes run at y = (1-b1) z + b1 x, where z are the fast
    weights and x their weighted running average; the checkpoint keeps
    x. Gradients taken at the mostly-averaged point keep the heads out
    of sigmoid saturation at a constant learning rate.
    """

    z: dict = field(default_factory=dict)
    x: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0
    gamma_sq_sum: float = 0.0

    def start(self, params: dict):
        for name, p in params.items():
            self.z[name] = p.data.copy()
            self.x[name] = p.data.copy()
            self.v[name] = np.zeros_like(p.data)

    def apply(self, params: dict, lr: float, weight_decay: float, warmup: int):
        self.step += 1
        t = self.step
        gamma = lr * min(1.0, t / warmup) if warmup > 0 else lr
        self.gamma_sq_sum += gamma * gamma
        c = gamma * gamma / self.gamma_sq_sum
        for name, p in params.items():
            if p.grad is None:
                continue
            g = p.grad
            y = p.data  # forward ran at the interpolated point
            self.v[name] = ADAM_BETA2 * self.v[name] + (1 - ADAM_BETA2) * g * g
            denom = np.sqrt(self.v[name] / (1 - ADAM_BETA2 ** t)) + ADAM_EPS
            self.z[name] -= gamma * (g / denom + weight_decay * y)
        for name in params:
            self.x[name] += c * (self.z[name] - self.x[name])
            params[name].data = (1 - ADAM_BETA1) * self.z[name] \
                + ADAM_BETA1 * self.x[name]

    def finalize(self, params: dict):
        for name in params:
            params[name].data = self.x[name]


def clip_gradients(params: dict, max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm."""
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    total = 0.0
    grads = [p.grad for p in params.values() if p.grad is not None]
    for g in grads:
        total += float((g * g).sum())
    norm = np.sqrt(total)
    if norm <= max_norm or norm == 0.0:
        return 1.0
    scale = max_norm / norm
    for g in grads:
        g *= scale
    return scale


# ---------------------------------------------------------------------------
# training

def train(model_config: ModelConfig, train_config: TrainConfig,
          on_iteration=None) -> tuple[Checkpoint, TrainTrace]:
    """Run the collaborative loop and return the checkpoint and trace."""
    problems = [get_problem(t.id) for t in model_config.tasks]
    if train_config.mode == "single_task" and len(problems) != 1:
        raise ValueError("single_task mode trains exactly one problem")
    if max(p.m for p in problems) > model_config.d_max:
        raise ValueError("a task has more objectives than the padded width")

    n, batch = train_config.iterations, train_config.batch
    rng_sched = named_stream(train_config.seed, "task_schedule")
    rng_pref = named_stream(train_config.seed, "preferences")
    rng_drop = named_stream(train_config.seed, "dropout")

    params = init_params(model_config)
    if train_config.schedule_free:
        optimizer = ScheduleFreeState()
        optimizer.start(params)
    else:
        optimizer = AdamWState()
    contexts = {m: LossContext(m=m, r=np.full(m, train_config.loss_reference))
                for m in {p.m for p in problems}}
    embeddings = {p.id: embed_task(i + 1, model_config.d_task)
                  for i, p in enumerate(problems)}

    losses = np.empty(n)
    schedule = np.empty(n, dtype=np.int64)
    evals = 0
    start = time.perf_counter()

    for i in range(n):
        t_idx = int(rng_sched.integers(len(problems)))
        problem = problems[t_idx]
        prefs = sample_preferences(problem.m, batch, rng_pref)
        prefs = apply_extreme_and_truncate(prefs, problem.m,
                                           train_config.use_extreme)
        inputs = assemble_input_batch(embeddings[problem.id], prefs,
                                      problem.m, model_config.d_max)
        lam = np.stack([p.lam_trunc for p in prefs])

        x = forward(model_config, params, inputs, problem.id,
                    train_mode=True, rng=rng_drop)
        objectives = problem.evaluate(x)
        loss = psl_hv1_loss(objectives.normalized, lam, contexts[problem.m])

        zero_grads(params)
        loss.backward()
        value = float(loss.data)
        if not np.isfinite(value):
            raise RuntimeError(f"non-finite loss at iteration {i}")
        losses[i] = value
        schedule[i] = t_idx
        evals += len(prefs)

        if train_config.clip_norm > 0:
            clip_gradients(params, train_config.clip_norm)
        if train_config.schedule_free:
            optimizer.apply(params, train_config.lr, train_config.weight_decay,
                            train_config.warmup)
        else:
            optimizer_step(params, optimizer, train_config.lr,
                           train_config.weight_decay)

        if on_iteration is not None:
            on_iteration(i, problem, inputs, lam, x, loss, params)

    if train_config.schedule_free:
        optimizer.finalize(params)
    wall = time.perf_counter() - start

    checkpoint = Checkpoint(config=model_config, params=params,
                            training_meta={"iterations": n,
                                           "final_loss": float(losses[-1]),
                                           "seed": train_config.seed,
                                           "wall_seconds": wall})
    reports = {ev.report.task_id: ev.report
               for ev in evaluate_quality(checkpoint,
                                          eval_points=train_config.eval_points,
                                          reference_scalar=train_config.reference_scalar).values()}
    trace = TrainTrace(loss=losses, task_schedule=schedule, wall_seconds=wall,
                       Q=reports, objective_evals=evals)
    return checkpoint, trace


# ---------------------------------------------------------------------------
# evaluation

def preference_grid(m: int, k: int) -> np.ndarray:
    """Deterministic theta grid on [0.01, 0.99] * pi/2 per axis."""
    lo, hi = 0.01 * np.pi / 2, 0.99 * np.pi / 2
    if m == 2:
        return np.linspace(lo, hi, k).reshape(-1, 1)
    g = max(2, round(np.sqrt(k)))
    axis = np.linspace(lo, hi, g)
    t1, t2 = np.meshgrid(axis, axis, indexing="ij")
    return np.stack([t1.ravel(), t2.ravel()], axis=1)


def solutions_on_grid(checkpoint: Checkpoint, task_id: str,
                      eval_points: int = 100) -> SolutionSet:
    """Run the model over the evaluation grid (inference mode)."""
    cfg = checkpoint.config
    task = cfg.task(task_id)
    problem = get_problem(task_id)
    thetas = preference_grid(task.m, eval_points)
    lams = np.stack([np.clip(polar_to_preference(t), 0.01, 0.99) for t in thetas])
    emb = embed_task(cfg.task_index(task_id), cfg.d_task)
    inputs = np.zeros((len(thetas), cfg.input_len))
    inputs[:, :cfg.d_task] = emb.e
    inputs[:, cfg.d_task:cfg.d_task + task.m] = lams

    xs = forward(cfg, checkpoint.params, inputs, task_id).data
    fs = problem.evaluate(Tensor(xs)).normalized.data
    fs = np.clip(fs, 0.0, F_NORM_CAP)
    return SolutionSet(task_id=task_id, thetas=thetas, xs=xs, fs=fs)


def infer_point(checkpoint: Checkpoint, task_id: str, theta) -> dict:
    """One preference -> one solution, matching the grid code path."""
    cfg = checkpoint.config
    task = cfg.task(task_id)
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    if theta.size != task.m - 1:
        raise ValueError(f"task '{task_id}' needs {task.m - 1} angle(s), "
                         f"got {theta.size}")
    if (theta < 0).any() or (theta > np.pi / 2).any():
        raise ValueError("theta components must lie in [0, pi/2]")
    lam = np.clip(polar_to_preference(theta), 0.01, 0.99)
    emb = embed_task(cfg.task_index(task_id), cfg.d_task)
    inputs = np.zeros((1, cfg.input_len))
    inputs[0, :cfg.d_task] = emb.e
    inputs[0, cfg.d_task:cfg.d_task + task.m] = lam
    x = forward(cfg, checkpoint.params, inputs, task_id).data[0]
    out = get_problem(task_id).evaluate(Tensor(x))
    return {"task": task_id, "theta": theta.tolist(), "lambda": lam.tolist(),
            "x": x.tolist(), "f_raw": out.raw.data.tolist(),
            "f_norm": np.clip(out.normalized.data, 0.0, F_NORM_CAP).tolist()}


def evaluate_quality(checkpoint: Checkpoint, eval_points: int = 100,
                     reference_scalar: float = 3.5) -> dict:
    """Grid metrics per task: filtered HV, range, sparsity."""
    out = {}
    for task in checkpoint.config.tasks:
        sols = solutions_on_grid(checkpoint, task.id, eval_points)
        front = nondominated_filter(sols.fs)
        r = np.full(task.m, reference_scalar)
        report = MetricsReport(task_id=task.id,
                               hv=hypervolume(front, r),
                               range=range_metric(front),
                               sparsity=sparsity_metric(front),
                               count_after_filter=len(front),
                               r_used=r.tolist())
        out[task.id] = TaskEvaluation(report=report, solutions=sols)
    return out
