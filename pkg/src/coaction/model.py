"""The preference-conditioned Pareto model.

Default backbone: each scalar of the input vector becomes a token, a
shared 1-to-128 projection lifts tokens, sinusoidal positions are
added, one pre-norm encoder block (4-head self-attention + 2-layer
feed-forward, residuals, dropout 0.1) mixes them, and attention
pooling (128 -> 64 tanh -> 1, softmax over tokens) produces a global
representation consumed by per-task linear heads. Bounded tasks map
head outputs into their box via l + (u - l) * sigmoid(z).

Ablation backbone: a plain ReLU MLP (input -> 256 -> 256 -> 256 -> 128)
feeding the same heads and output mapping.
"""

from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor, dropout, layer_norm_affine, linear, matmul, token_embed
from .problems import get_problem
from .rng import named_stream

MLP_HIDDEN = 256
MLP_HEAD_INPUT = 128


@dataclass(frozen=True)
class TaskSpec:
    id: str
    n: int
    m: int
    lower: np.ndarray
    upper: np.ndarray
    output_mode: str = "bounded"  # "bounded" applies the sigmoid box map


@dataclass
class ModelConfig:
    tasks: list
    backbone: str = "transformer"
    embed_dim: int = 128
    heads: int = 4
    ff_dim: int = 128
    encoder_layers: int = 1
    dropout: float = 0.1
    pool_hidden: int = 64
    d_task: int = 6
    seed: int = 0
    d_max: int = 0  # 0 = derive from tasks

    def __post_init__(self):
        if self.backbone not in ("transformer", "mlp"):
            raise ValueError(f"unknown backbone '{self.backbone}'")
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must be in [0, 1)")
        if self.encoder_layers != 1:
            raise ValueError("only a single encoder layer is supported")
        if not self.tasks:
            raise ValueError("at least one task is required")
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate task ids")
        derived = max(t.m for t in self.tasks)
        if self.d_max == 0:
            self.d_max = derived
        elif self.d_max < derived:
            raise ValueError(f"d_max={self.d_max} below largest objective count {derived}")

    @property
    def input_len(self) -> int:
        return self.d_task + self.d_max

    def task(self, task_id: str) -> TaskSpec:
        for t in self.tasks:
            if t.id == task_id:
                return t
        raise KeyError(f"task '{task_id}' not registered in the model")

    def task_index(self, task_id: str) -> int:
        """1-based index used for the task embedding."""
        for i, t in enumerate(self.tasks):
            if t.id == task_id:
                return i + 1
        raise KeyError(f"task '{task_id}' not registered in the model")


@dataclass
class Checkpoint:
    config: ModelConfig
    params: dict
    training_meta: dict = field(default_factory=dict)


def config_for_tasks(task_ids, backbone: str = "transformer", d_task: int = 6,
                     seed: int = 0) -> ModelConfig:
    specs = []
    for tid in task_ids:
        p = get_problem(tid)
        specs.append(TaskSpec(id=p.id, n=p.n, m=p.m, lower=p.lower.copy(),
                              upper=p.upper.copy()))
    return ModelConfig(tasks=specs, backbone=backbone, d_task=d_task, seed=seed)


# ---------------------------------------------------------------------------
# parameters

def _xavier(rng, fan_in: int, fan_out: int, shape) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape)


def init_params(config: ModelConfig, rng=None) -> dict:
    """Xavier-uniform weights, zero biases, unit layer-norm gains."""
    if rng is None:
        rng = named_stream(config.seed, "init")
    e, f, p = config.embed_dim, config.ff_dim, config.pool_hidden
    params = {}

    def linear(name, fan_in, fan_out):
        params[f"{name}.w"] = Tensor(_xavier(rng, fan_in, fan_out, (fan_in, fan_out)),
                                     requires_grad=True)
        params[f"{name}.b"] = Tensor(np.zeros(fan_out), requires_grad=True)

    if config.backbone == "transformer":
        linear("token_proj", 1, e)
        for name in ("ln1", "ln2", "ln_f"):
            params[f"{name}.g"] = Tensor(np.ones(e), requires_grad=True)
            params[f"{name}.b"] = Tensor(np.zeros(e), requires_grad=True)
        for name in ("attn.q", "attn.k", "attn.v", "attn.out"):
            linear(name, e, e)
        linear("ff.fc1", e, f)
        linear("ff.fc2", f, e)
        linear("pool.fc1", e, p)
        linear("pool.fc2", p, 1)
        head_input = e
    else:
        linear("mlp.fc1", config.input_len, MLP_HIDDEN)
        linear("mlp.fc2", MLP_HIDDEN, MLP_HIDDEN)
        linear("mlp.fc3", MLP_HIDDEN, MLP_HIDDEN)
        linear("mlp.fc4", MLP_HIDDEN, MLP_HEAD_INPUT)
        head_input = MLP_HEAD_INPUT

    for t in config.tasks:
        linear(f"head.{t.id}", head_input, t.n)
    return params


def param_count(params: dict) -> int:
    return sum(t.data.size for t in params.values())


def zero_grads(params: dict):
    for t in params.values():
        t.zero_grad()


# ---------------------------------------------------------------------------
# forward

_pe_cache: dict = {}


def positional_encoding(length: int, dim: int) -> np.ndarray:
    """Sinusoidal positions, base 10000."""
    key = (length, dim)
    if key not in _pe_cache:
        pos = np.arange(length)[:, None]
        i = np.arange(dim // 2)[None, :]
        angle = pos / 10000.0 ** (2 * i / dim)
        pe = np.zeros((length, dim))
        pe[:, 0::2] = np.sin(angle)
        pe[:, 1::2] = np.cos(angle)
        _pe_cache[key] = pe
    return _pe_cache[key]


def _linear(x: Tensor, params: dict, name: str) -> Tensor:
    w, b = params[f"{name}.w"], params[f"{name}.b"]
    if x.data.ndim == 3:
        bsz, length, dim = x.data.shape
        flat = x.reshape(bsz * length, dim)
        return linear(flat, w, b).reshape(bsz, length, w.data.shape[1])
    return linear(x, w, b)


def forward(config: ModelConfig, params: dict, inputs: np.ndarray, task_id: str,
            train_mode: bool = False, rng=None, diagnostics: dict = None) -> Tensor:
    """Decision vectors for a batch of assembled input vectors.

    `inputs` is (B, d_task + d_max); the result is a graph tensor of
    shape (B, n_task) strictly inside the task's box for bounded tasks.
    """
    task = config.task(task_id)
    inputs = np.asarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != config.input_len:
        raise ValueError(f"expected inputs of shape (B, {config.input_len}), "
                         f"got {inputs.shape}")
    if train_mode and config.dropout > 0 and rng is None:
        raise ValueError("training forward needs an rng for dropout")

    stage = "input"
    try:
        if config.backbone == "transformer":
            pooled = _transformer_backbone(config, params, inputs, train_mode,
                                           rng, diagnostics)
            stage = "head"
            z = _linear(pooled, params, f"head.{task.id}")
        else:
            stage = "mlp"
            h = Tensor(inputs)
            for layer in ("mlp.fc1", "mlp.fc2", "mlp.fc3", "mlp.fc4"):
                h = _linear(h, params, layer).relu()
            stage = "head"
            z = _linear(h, params, f"head.{task.id}")

        stage = "output_map"
        if task.output_mode == "bounded":
            lo, span = Tensor(task.lower), Tensor(task.upper - task.lower)
            out = lo + span * z.clip_passthrough(-8.0, 8.0).sigmoid()
        else:
            out = z
    except ValueError as err:
        raise ValueError(f"forward failed in stage '{stage}': {err}") from err
    return out


def _transformer_backbone(config, params, inputs, train_mode, rng, diagnostics):
    bsz, length = inputs.shape
    e, heads = config.embed_dim, config.heads
    dk = e // heads
    p_drop = config.dropout

    h = token_embed(inputs, params["token_proj.w"], params["token_proj.b"],
                    positional_encoding(length, e), scale=np.sqrt(e))
    h = dropout(h, p_drop, train_mode, rng)

    # self-attention sublayer (pre-norm)
    a = layer_norm_affine(h, params["ln1.g"], params["ln1.b"])
    q = _split_heads(_linear(a, params, "attn.q"), heads)
    k = _split_heads(_linear(a, params, "attn.k"), heads)
    v = _split_heads(_linear(a, params, "attn.v"), heads)
    scores = matmul(q, k.swapaxes(2, 3)) * (1.0 / np.sqrt(dk))
    att = scores.softmax_lastdim()
    mixed = matmul(att, v).swapaxes(1, 2).reshape(bsz, length, e)
    h = h + dropout(_linear(mixed, params, "attn.out"), p_drop, train_mode, rng)

    # feed-forward sublayer (pre-norm)
    a2 = layer_norm_affine(h, params["ln2.g"], params["ln2.b"])
    ff = _linear(_linear(a2, params, "ff.fc1").relu(), params, "ff.fc2")
    h = h + dropout(ff, p_drop, train_mode, rng)

    # closing norm of the pre-norm stack keeps the pooled representation
    # bounded (otherwise the residual stream growth saturates the heads)
    h = layer_norm_affine(h, params["ln_f.g"], params["ln_f.b"])

    # attention pooling over tokens
    score = _linear(_linear(h, params, "pool.fc1").tanh(), params, "pool.fc2")
    weights = score.reshape(bsz, length).softmax_lastdim()
    pooled = matmul(weights.reshape(bsz, 1, length), h).reshape(bsz, e)

    if diagnostics is not None:
        diagnostics["attention"] = att.data
        diagnostics["pool_weights"] = weights.data
        diagnostics["pooled"] = pooled.data
    return pooled


def _split_heads(x: Tensor, heads: int) -> Tensor:
    bsz, length, e = x.data.shape
    return x.reshape(bsz, length, heads, e // heads).swapaxes(1, 2)
