"""Dense-tensor reverse-mode automatic differentiation.

Small numpy-backed engine: just enough ops to express a transformer
encoder, an MLP, the benchmark objectives, and the hypervolume
surrogate loss, all in float64. Each op records its inputs and a
backward rule; `backward()` walks the graph once in reverse
topological order.
"""

import numpy as np

__all__ = [
    "Tensor", "concat", "matmul", "dropout", "finite_diff_check",
]


class GradientError(RuntimeError):
    """Raised on misuse of the backward pass."""


def _as_array(value) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    return arr


def _elementwise_compatible(sa: tuple, sb: tuple) -> bool:
    # Equal shapes, a scalar operand, or one shape being a trailing
    # suffix of the other (broadcast over leading batch dims only).
    if sa == sb or sa == () or sb == ():
        return True
    short, long = (sa, sb) if len(sa) <= len(sb) else (sb, sa)
    return long[len(long) - len(short):] == short


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of leading-dim broadcast)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    keep = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if keep:
        grad = grad.sum(axis=keep, keepdims=True)
    return grad


class Tensor:
    """A dense float64 array plus an optional gradient accumulator.

    Tensors created by ops hold references to their parents and a
    closure implementing the chain rule; leaves created with
    ``requires_grad=True`` receive gradients in ``backward``.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward_fn",
                 "_op", "_backward_done", "_grad_owned")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _op="leaf"):
        self.data = _as_array(data)
        self.requires_grad = requires_grad
        self.grad = None
        self._parents = _parents
        self._backward_fn = None
        self._op = _op
        self._backward_done = False
        self._grad_owned = False

    # -- bookkeeping ------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def zero_grad(self):
        self.grad = None
        self._grad_owned = False
        return self

    def _accumulate(self, g: np.ndarray, own: bool = False):
        # `own=True` promises `g` is freshly allocated and may be adopted
        # and mutated in place; aliased grads are never written through.
        if self.grad is None:
            self.grad = g
            self._grad_owned = own
        elif self._grad_owned:
            self.grad += g
        else:
            self.grad = self.grad + g
            self._grad_owned = True

    def __repr__(self):
        return f"Tensor(op={self._op}, shape={self.data.shape}, requires_grad={self.requires_grad})"

    # -- graph construction -----------------------------------------------

    def _child(self, data: np.ndarray, parents, op: str) -> "Tensor":
        requires = any(p.requires_grad for p in parents)
        out = Tensor(data, requires_grad=requires, _parents=parents, _op=op)
        if data.size and np.isnan(data.min()):  # min propagates NaN, no temp
            raise ValueError(f"op '{op}' produced NaN values")
        return out

    @staticmethod
    def _lift(value) -> "Tensor":
        return value if isinstance(value, Tensor) else Tensor(value)

    def _binary(self, other, op, fwd, bwd, owns=(True, True)):
        other = Tensor._lift(other)
        if not _elementwise_compatible(self.shape, other.shape):
            raise ValueError(f"{op}: shapes {self.shape} and {other.shape} do not "
                             "broadcast over a leading batch dim")
        out = self._child(fwd(self.data, other.data), (self, other), op)

        def backward_fn(go):
            ga, gb = bwd(go, self.data, other.data, out.data)
            if self.requires_grad:
                self._accumulate(_unbroadcast(ga, self.shape),
                                 own=owns[0] or ga.shape != self.shape)
            if other.requires_grad:
                other._accumulate(_unbroadcast(gb, other.shape),
                                  own=owns[1] or gb.shape != other.shape)

        out._backward_fn = backward_fn
        return out

    def _unary(self, op, fwd, bwd):
        out = self._child(fwd(self.data), (self,), op)

        def backward_fn(go):
            if self.requires_grad:
                self._accumulate(bwd(go, self.data, out.data), own=True)

        out._backward_fn = backward_fn
        return out

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return self._binary(other, "add", lambda a, b: a + b,
                            lambda go, a, b, y: (go, go), owns=(False, False))

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, "sub", lambda a, b: a - b,
                            lambda go, a, b, y: (go, -go), owns=(False, True))

    def __rsub__(self, other):
        return Tensor._lift(other).__sub__(self)

    def __mul__(self, other):
        return self._binary(other, "mul", lambda a, b: a * b,
                            lambda go, a, b, y: (go * b, go * a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, "div", lambda a, b: a / b,
                            lambda go, a, b, y: (go / b, -go * a / (b * b)))

    def __rtruediv__(self, other):
        return Tensor._lift(other).__truediv__(self)

    def __neg__(self):
        return self._unary("neg", lambda a: -a, lambda go, a, y: -go)

    def __pow__(self, p):
        return self.power(p)

    def power(self, p: float):
        p = float(p)
        if p != round(p) and (self.data < 0).any():
            raise ValueError("power: fractional exponent of negative base")
        return self._unary(f"pow{p:g}", lambda a: a ** p,
                           lambda go, a, y: go * p * a ** (p - 1.0))

    # -- transcendental -------------------------------------------------------

    def sin(self):
        return self._unary("sin", np.sin, lambda go, a, y: go * np.cos(a))

    def cos(self):
        return self._unary("cos", np.cos, lambda go, a, y: -go * np.sin(a))

    def exp(self):
        return self._unary("exp", np.exp, lambda go, a, y: go * y)

    def log(self):
        if (self.data <= 0).any():
            raise ValueError("log: non-positive input")
        return self._unary("log", np.log, lambda go, a, y: go / a)

    def sqrt(self):
        if (self.data < 0).any():
            raise ValueError("sqrt: negative input")
        return self._unary("sqrt", np.sqrt, lambda go, a, y: go / (2.0 * y))

    def tanh(self):
        return self._unary("tanh", np.tanh, lambda go, a, y: go * (1.0 - y * y))

    def sigmoid(self):
        def fwd(a):
            z = np.clip(a, -709.0, 709.0)  # keep both exp branches overflow-free
            return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)),
                            np.exp(z) / (1.0 + np.exp(z)))
        return self._unary("sigmoid", fwd, lambda go, a, y: go * y * (1.0 - y))

    def relu(self):
        return self._unary("relu", lambda a: np.maximum(a, 0.0),
                           lambda go, a, y: go * (a > 0))

    def clip_passthrough(self, lo: float, hi: float):
        """Clamp values but keep the identity gradient (rail escape)."""
        return self._unary("clip_passthrough",
                           lambda a: np.clip(a, lo, hi),
                           lambda go, a, y: go.copy())

    # -- reductions -----------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        out = self._child(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum")

        def backward_fn(go):
            if not self.requires_grad:
                return
            g = go
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            self._accumulate(np.broadcast_to(g, self.shape).copy(), own=True)

        out._backward_fn = backward_fn
        return out

    def mean(self, axis=None, keepdims: bool = False):
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def min_reduce_with_index(self):
        """Minimum over the last axis; ties go to the lowest index.

        Returns ``(values, indices)`` where only the argmin element of
        each row receives gradient (deterministic subgradient).
        """
        idx = np.asarray(np.argmin(self.data, axis=-1))
        vals = np.take_along_axis(self.data, idx[..., None], axis=-1)[..., 0]
        out = self._child(vals, (self,), "min_reduce")

        def backward_fn(go):
            if not self.requires_grad:
                return
            g = np.zeros_like(self.data)
            np.put_along_axis(g, idx[..., None], np.asarray(go)[..., None], axis=-1)
            self._accumulate(g, own=True)

        out._backward_fn = backward_fn
        return out, idx

    # -- shape ops --------------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out = self._child(self.data.reshape(shape), (self,), "reshape")
        src_shape = self.shape

        def backward_fn(go):
            if self.requires_grad:
                self._accumulate(go.reshape(src_shape), own=False)

        out._backward_fn = backward_fn
        return out

    def swapaxes(self, ax1: int, ax2: int):
        out = self._child(self.data.swapaxes(ax1, ax2), (self,), "swapaxes")

        def backward_fn(go):
            if self.requires_grad:
                self._accumulate(go.swapaxes(ax1, ax2), own=False)

        out._backward_fn = backward_fn
        return out

    def __getitem__(self, key):
        out = self._child(self.data[key], (self,), "slice")

        def backward_fn(go):
            if self.requires_grad:
                g = np.zeros_like(self.data)
                g[key] += go
                self._accumulate(g, own=True)

        out._backward_fn = backward_fn
        return out

    # -- neural-net ops -------------------------------------------------------

    def softmax_lastdim(self):
        z = self.data - self.data.max(axis=-1, keepdims=True)
        e = np.exp(z)
        y = e / e.sum(axis=-1, keepdims=True)
        out = self._child(y, (self,), "softmax")

        def backward_fn(go):
            if self.requires_grad:
                dot = (go * y).sum(axis=-1, keepdims=True)
                self._accumulate(y * (go - dot), own=True)

        out._backward_fn = backward_fn
        return out

    def layer_norm_lastdim(self, eps: float = 1e-5):
        mu = self.data.mean(axis=-1, keepdims=True)
        var = self.data.var(axis=-1, keepdims=True)
        inv = 1.0 / np.sqrt(var + eps)
        y = (self.data - mu) * inv
        out = self._child(y, (self,), "layer_norm")

        def backward_fn(go):
            if self.requires_grad:
                gm = go.mean(axis=-1, keepdims=True)
                gym = (go * y).mean(axis=-1, keepdims=True)
                self._accumulate(inv * (go - gm - y * gym), own=True)

        out._backward_fn = backward_fn
        return out

    # -- backward -------------------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise GradientError(f"backward root must be scalar, got shape {self.shape}")
        if self._backward_done:
            raise GradientError("backward already ran for this root; rebuild the graph "
                                "or reset before calling again")
        self._backward_done = True

        # Iterative topological order over the subgraph that needs grads.
        order = []
        visited = {id(self)}
        stack = [(self, iter(self._parents))]
        while stack:
            node, it = stack[-1]
            advanced = False
            for p in it:
                if id(p) not in visited and p.requires_grad:
                    visited.add(id(p))
                    stack.append((p, iter(p._parents)))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()

        self.grad = np.ones_like(self.data)
        for node in reversed(order):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy batching over leading dims."""
    a, b = Tensor._lift(a), Tensor._lift(b)
    if a.shape[-1] != b.shape[-2 if b.data.ndim > 1 else 0]:
        raise ValueError(f"matmul: inner dims differ, {a.shape} @ {b.shape}")
    out = a._child(np.matmul(a.data, b.data), (a, b), "matmul")

    def backward_fn(go):
        if a.requires_grad:
            ga = np.matmul(go, b.data.swapaxes(-1, -2))
            a._accumulate(_unbroadcast(ga, a.shape), own=True)
        if b.requires_grad:
            gb = np.matmul(a.data.swapaxes(-1, -2), go)
            b._accumulate(_unbroadcast(gb, b.shape), own=True)

    out._backward_fn = backward_fn
    return out


def concat(tensors, axis: int = -1) -> Tensor:
    tensors = [Tensor._lift(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    requires = any(t.requires_grad for t in tensors)
    out = Tensor(data, requires_grad=requires, _parents=tuple(tensors), _op="concat")
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def backward_fn(go):
        parts = np.split(go, splits, axis=axis)  # views of the child's grad
        for t, g in zip(tensors, parts):
            if t.requires_grad:
                t._accumulate(g, own=False)

    out._backward_fn = backward_fn
    return out


def dropout(x: Tensor, p: float, train_mode: bool, rng: np.random.Generator) -> Tensor:
    """Inverted dropout; the identity (same object) when train_mode is off."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout: p must be in [0, 1), got {p}")
    if not train_mode or p == 0.0:
        return x
    keep = rng.random(x.shape) >= p
    inv_keep = 1.0 / (1.0 - p)
    data = x.data * inv_keep
    data *= keep
    out = x._child(data, (x,), "dropout")

    def backward_fn(go):
        if x.requires_grad:
            g = go * inv_keep
            g *= keep
            x._accumulate(g, own=True)

    out._backward_fn = backward_fn
    return out


def linear(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Fused x @ w + b for a 2-D operand (one output buffer, one pass)."""
    if x.data.ndim != 2 or x.shape[-1] != w.shape[0]:
        raise ValueError(f"linear: incompatible shapes {x.shape} @ {w.shape}")
    data = np.matmul(x.data, w.data)
    data += b.data
    out = x._child(data, (x, w, b), "linear")

    def backward_fn(go):
        if x.requires_grad:
            x._accumulate(np.matmul(go, w.data.T), own=True)
        if w.requires_grad:
            w._accumulate(np.matmul(x.data.T, go), own=True)
        if b.requires_grad:
            b._accumulate(go.sum(axis=0), own=True)

    out._backward_fn = backward_fn
    return out


def layer_norm_affine(x: Tensor, gain: Tensor, bias: Tensor,
                      eps: float = 1e-5) -> Tensor:
    """Fused last-dim layer norm with learned gain and offset."""
    e = x.data.shape[-1]
    mu = x.data.mean(axis=-1, keepdims=True)
    y = x.data - mu
    var = np.einsum("...e,...e->...", y, y)[..., None] / e
    inv = 1.0 / np.sqrt(var + eps)
    y *= inv
    out = x._child(y * gain.data + bias.data, (x, gain, bias), "layer_norm_affine")
    lead = tuple(range(x.data.ndim - 1))

    def backward_fn(go):
        if gain.requires_grad:
            e = y.shape[-1]
            gain._accumulate(np.einsum("ne,ne->e", go.reshape(-1, e),
                                       y.reshape(-1, e)), own=True)
        if bias.requires_grad:
            bias._accumulate(go.sum(axis=lead), own=True)
        if x.requires_grad:
            gy = go * gain.data
            gm = gy.mean(axis=-1, keepdims=True)
            gym = np.einsum("...e,...e->...", gy, y)[..., None]
            gym /= y.shape[-1]
            gy -= gm
            gy -= y * gym
            gy *= inv
            x._accumulate(gy, own=True)

    out._backward_fn = backward_fn
    return out


def token_embed(values: np.ndarray, w: Tensor, b: Tensor,
                positions: np.ndarray, scale: float = 1.0) -> Tensor:
    """Fused scalar-token lift: (values[b,l] * w + b) * scale + positions[l].

    `values` (B, L) and `positions` (L, E) are constants; the shared
    1-to-E projection weight (1, E) and bias (E,) receive gradients.
    `scale` is the usual sqrt(embed_dim) factor that keeps token content
    comparable to the positional encoding.
    """
    data = (values[:, :, None] * w.data[0] + b.data) * scale + positions
    out = w._child(data, (w, b), "token_embed")

    def backward_fn(go):
        if w.requires_grad:
            gw = np.einsum("ble,bl->e", go, values)[None, :]
            gw *= scale
            w._accumulate(gw, own=True)
        if b.requires_grad:
            b._accumulate(go.sum(axis=(0, 1)) * scale, own=True)

    out._backward_fn = backward_fn
    return out


def finite_diff_check(f, x: Tensor, h: float = 1e-5) -> float:
    """Max relative error of backward grads vs central differences.

    `f` must be a pure tensor function with a scalar output; the error
    per coordinate is |analytic - numeric| / (|analytic| + 1e-8).
    """
    if h <= 0:
        raise ValueError("finite_diff_check: h must be positive")
    base = x.data.copy()
    leaf = Tensor(base.copy(), requires_grad=True)
    out = f(leaf)
    if not np.isfinite(out.data).all():
        raise ValueError("finite_diff_check: f(x) is not finite")
    out.backward()
    analytic = leaf.grad.ravel().copy()

    numeric = np.empty_like(analytic)
    flat = base.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        hi = float(f(Tensor(base.reshape(x.shape))).data)
        flat[i] = orig - h
        lo = float(f(Tensor(base.reshape(x.shape))).data)
        flat[i] = orig
        numeric[i] = (hi - lo) / (2.0 * h)

    rel = np.abs(analytic - numeric) / (np.abs(analytic) + 1e-8)
    return float(rel.max())
