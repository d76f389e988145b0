"""Benchmark problem suite with graph-recorded, differentiable objectives.

Twelve minimization tasks: ZDT1/ZDT2 (n=30), VLMOP1/VLMOP2 (n=6), the
engineering problems RE21 (four bar truss), RE24 (hatch cover, with
constraints folded into a violation objective), RE37 (rocket injector,
three objectives), and five bi-objective pairs built from simplified
raw black-box functions (sphere, ellipsoid, Rastrigin, asymmetric
Rastrigin, linear slope) in a 10-dimensional space.

Every problem evaluates through the autodiff engine so the training
loss can differentiate through the objectives, and carries ideal/nadir
anchors mapping its raw objectives into [0, 1]. ZDT/VLMOP fronts span
[0, 1] by construction; RE and the black-box pairs are calibrated by
uniform sampling.
"""

import numpy as np

from .autodiff import Tensor, concat
from .rng import named_stream

CALIBRATION_SAMPLES = 100_000
CALIBRATION_SEED = 0


class ObjectiveValue:
    """Raw and normalized objectives for one evaluation.

    `raw` and `normalized` are graph tensors; `normalized` is the plain
    affine map (raw - ideal) / (nadir - ideal) so gradients keep flowing
    when a poor solution leaves the unit box. `normalized_clamped` is
    the detached reporting view, clamped into [0, 1].
    """

    def __init__(self, raw: Tensor, normalized: Tensor):
        self.raw = raw
        self.normalized = normalized

    @property
    def normalized_clamped(self) -> np.ndarray:
        return np.clip(self.normalized.data, 0.0, 1.0)


class Problem:
    """One benchmark task: metadata plus differentiable evaluation."""

    id: str
    n: int
    m: int
    has_analytic_front = False

    def __init__(self):
        self._ideal = None
        self._nadir = None

    # subclasses: batched objective math on a (B, n) operand
    def _raw(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def _raw_numpy(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def ideal(self) -> np.ndarray:
        if self._ideal is None:
            self._calibrate()
        return self._ideal

    @property
    def nadir(self) -> np.ndarray:
        if self._nadir is None:
            self._calibrate()
        return self._nadir

    def _calibrate(self):
        self._ideal, self._nadir = calibrate_normalizers(self)

    def evaluate(self, x: Tensor) -> ObjectiveValue:
        """Graph-recorded raw and normalized objectives for x in bounds."""
        if not isinstance(x, Tensor):
            x = Tensor(x)
        squeeze = x.data.ndim == 1
        if squeeze:
            x = x.reshape(1, -1)
        if x.data.ndim != 2 or x.data.shape[1] != self.n:
            raise ValueError(f"{self.id}: expected decision vectors of dimension "
                             f"{self.n}, got shape {x.data.shape}")
        raw = self._raw(x)
        if not np.isfinite(raw.data).all():
            raise ValueError(f"{self.id}: non-finite objective value")
        span = self.nadir - self.ideal
        normalized = (raw - Tensor(self.ideal)) / Tensor(span)
        if squeeze:
            raw, normalized = raw.reshape(self.m), normalized.reshape(self.m)
        return ObjectiveValue(raw=raw, normalized=normalized)

    def true_front(self, k: int) -> np.ndarray:
        """k points of the analytic front in normalized space."""
        if not self.has_analytic_front:
            raise ValueError(f"{self.id}: no analytic front available")
        if k < 2:
            raise ValueError("need k >= 2 front points")
        raw = self._front_points(k)
        return (raw - self.ideal) / (self.nadir - self.ideal)

    def _front_points(self, k: int) -> np.ndarray:
        raise NotImplementedError


def calibrate_normalizers(problem: Problem, samples: int = CALIBRATION_SAMPLES,
                          seed: int = CALIBRATION_SEED):
    """Objective min/max over uniform random solutions, widened by 1%."""
    if samples < 10_000:
        raise ValueError("calibration needs at least 10000 samples")
    rng = named_stream(seed, f"calibrate:{problem.id}")
    x = rng.uniform(problem.lower, problem.upper, size=(samples, problem.n))
    raw = problem._raw_numpy(x)
    lo, hi = raw.min(axis=0), raw.max(axis=0)
    span = hi - lo
    if (span < 1e-9).any():
        raise ValueError(f"{problem.id}: degenerate objective span {span}")
    return lo - 0.01 * span, hi + 0.01 * span


# ---------------------------------------------------------------------------
# classic benchmarks: analytic [0, 1] anchors

class _UnitAnchored(Problem):
    def __init__(self):
        super().__init__()
        self._ideal = np.zeros(self.m)
        self._nadir = np.ones(self.m)


class ZDT1(_UnitAnchored):
    id = "zdt1"
    n, m = 30, 2
    has_analytic_front = True
    lower, upper = np.zeros(30), np.ones(30)

    def _raw(self, x):
        f1 = x[:, 0:1]
        g = 1.0 + x[:, 1:].sum(axis=1, keepdims=True) * (9.0 / (self.n - 1))
        f2 = g * (1.0 - (f1 / g).sqrt())
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        f1 = x[:, 0]
        g = 1.0 + 9.0 * x[:, 1:].sum(axis=1) / (self.n - 1)
        return np.stack([f1, g * (1.0 - np.sqrt(f1 / g))], axis=1)

    def _front_points(self, k):
        t = np.linspace(0.0, 1.0, k)
        return np.stack([t, 1.0 - np.sqrt(t)], axis=1)


class ZDT2(_UnitAnchored):
    id = "zdt2"
    n, m = 30, 2
    has_analytic_front = True
    lower, upper = np.zeros(30), np.ones(30)

    def _raw(self, x):
        f1 = x[:, 0:1]
        g = 1.0 + x[:, 1:].sum(axis=1, keepdims=True) * (9.0 / (self.n - 1))
        r = f1 / g
        f2 = g * (1.0 - r * r)
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        f1 = x[:, 0]
        g = 1.0 + 9.0 * x[:, 1:].sum(axis=1) / (self.n - 1)
        return np.stack([f1, g * (1.0 - (f1 / g) ** 2)], axis=1)

    def _front_points(self, k):
        t = np.linspace(0.0, 1.0, k)
        return np.stack([t, 1.0 - t ** 2], axis=1)


class VLMOP1(_UnitAnchored):
    """Symmetric quadratic pair, scaled so the front spans [0, 1]."""

    id = "vlmop1"
    n, m = 6, 2
    has_analytic_front = True
    lower, upper = np.full(6, -2.0), np.full(6, 2.0)

    def _raw(self, x):
        a = 1.0 / np.sqrt(self.n)
        d1, d2 = x - a, x + a
        f1 = (d1 * d1).sum(axis=1, keepdims=True) * 0.25
        f2 = (d2 * d2).sum(axis=1, keepdims=True) * 0.25
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        a = 1.0 / np.sqrt(self.n)
        return np.stack([((x - a) ** 2).sum(axis=1) / 4.0,
                         ((x + a) ** 2).sum(axis=1) / 4.0], axis=1)

    def _front_points(self, k):
        s = np.linspace(-1.0, 1.0, k)
        return np.stack([(1.0 - s) ** 2 / 4.0, (1.0 + s) ** 2 / 4.0], axis=1)


class VLMOP2(_UnitAnchored):
    id = "vlmop2"
    n, m = 6, 2
    has_analytic_front = True
    lower, upper = np.full(6, -2.0), np.full(6, 2.0)

    def _raw(self, x):
        a = 1.0 / np.sqrt(self.n)
        d1, d2 = x - a, x + a
        f1 = 1.0 - (-1.0 * (d1 * d1).sum(axis=1, keepdims=True)).exp()
        f2 = 1.0 - (-1.0 * (d2 * d2).sum(axis=1, keepdims=True)).exp()
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        a = 1.0 / np.sqrt(self.n)
        return np.stack([1.0 - np.exp(-((x - a) ** 2).sum(axis=1)),
                         1.0 - np.exp(-((x + a) ** 2).sum(axis=1))], axis=1)

    def _front_points(self, k):
        s = np.linspace(-1.0, 1.0, k)
        return np.stack([1.0 - np.exp(-((s - 1.0) ** 2)),
                         1.0 - np.exp(-((s + 1.0) ** 2))], axis=1)


# ---------------------------------------------------------------------------
# engineering problems (RE suite definitions); calibrated anchors

class RE21(Problem):
    """Four bar truss: structural volume vs joint displacement."""

    id = "re21"
    n, m = 4, 2
    _a = 1.0  # F / sigma
    lower = np.array([_a, np.sqrt(2.0) * _a, np.sqrt(2.0) * _a, _a])
    upper = np.full(4, 3.0 * _a)

    def _raw(self, x):
        x1, x2, x3, x4 = (x[:, j:j + 1] for j in range(4))
        s2 = np.sqrt(2.0)
        f1 = 200.0 * (2.0 * x1 + s2 * x2 + x3.sqrt() + x4)
        f2 = 0.01 * (2.0 / x1 + 2.0 * s2 / x2 - 2.0 * s2 / x3 + 2.0 / x4)
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        x1, x2, x3, x4 = x.T
        s2 = np.sqrt(2.0)
        f1 = 200.0 * (2.0 * x1 + s2 * x2 + np.sqrt(x3) + x4)
        f2 = 0.01 * (2.0 / x1 + 2.0 * s2 / x2 - 2.0 * s2 / x3 + 2.0 / x4)
        return np.stack([f1, f2], axis=1)


class RE24(Problem):
    """Hatch cover design: cost vs summed constraint violation."""

    id = "re24"
    n, m = 2, 2
    lower = np.array([0.5, 0.5])
    upper = np.array([4.0, 50.0])

    def _raw(self, x):
        x1, x2 = x[:, 0:1], x[:, 1:2]
        f1 = x1 + 120.0 * x2
        sigma_b = 4500.0 / (x1 * x2)
        tau = 1800.0 / x2
        delta = 562000.0 / (700000.0 * x1 * x2 * x2)
        sigma_k = 7000.0 * x1 * x1
        g1 = 1.0 - sigma_b / 700.0
        g2 = 1.0 - tau / 450.0
        g3 = 1.0 - delta / 1.5
        g4 = 1.0 - sigma_b / sigma_k
        f2 = (-1.0 * g1).relu() + (-1.0 * g2).relu() + (-1.0 * g3).relu() \
            + (-1.0 * g4).relu()
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        x1, x2 = x.T
        f1 = x1 + 120.0 * x2
        sigma_b = 4500.0 / (x1 * x2)
        tau = 1800.0 / x2
        delta = 562000.0 / (700000.0 * x1 * x2 * x2)
        sigma_k = 7000.0 * x1 * x1
        gs = np.stack([1.0 - sigma_b / 700.0, 1.0 - tau / 450.0,
                       1.0 - delta / 1.5, 1.0 - sigma_b / sigma_k], axis=1)
        f2 = np.maximum(-gs, 0.0).sum(axis=1)
        return np.stack([f1, f2], axis=1)


class RE37(Problem):
    """Rocket injector design response surfaces, three objectives."""

    id = "re37"
    n, m = 4, 3
    lower, upper = np.zeros(4), np.ones(4)

    def _raw(self, x):
        a, h, o, t = (x[:, j:j + 1] for j in range(4))
        f1 = (0.692 + 0.477 * a - 0.687 * h - 0.080 * o - 0.0650 * t
              - 0.167 * a * a - 0.0129 * h * a + 0.0796 * h * h
              - 0.0634 * o * a - 0.0257 * o * h + 0.0877 * o * o
              - 0.0521 * t * a + 0.00156 * t * h + 0.00198 * t * o
              + 0.0184 * t * t)
        f2 = (0.153 - 0.322 * a + 0.396 * h + 0.424 * o + 0.0226 * t
              + 0.175 * a * a + 0.0185 * h * a - 0.0701 * h * h
              - 0.251 * o * a + 0.179 * o * h + 0.0150 * o * o
              + 0.0134 * t * a + 0.0296 * t * h + 0.0752 * t * o
              + 0.0192 * t * t)
        f3 = (0.370 - 0.205 * a + 0.0307 * h + 0.108 * o + 1.019 * t
              - 0.135 * a * a + 0.0141 * h * a + 0.0998 * h * h
              + 0.208 * o * a - 0.0301 * o * h - 0.226 * o * o
              + 0.353 * t * a - 0.0497 * t * o - 0.423 * t * t
              + 0.202 * h * a * a - 0.281 * o * a * a - 0.342 * h * h * a
              - 0.245 * h * h * o + 0.281 * o * o * h - 0.184 * t * t * a
              - 0.281 * h * a * o)
        return concat([f1, f2, f3], axis=1)

    def _raw_numpy(self, x):
        a, h, o, t = x.T
        f1 = (0.692 + 0.477 * a - 0.687 * h - 0.080 * o - 0.0650 * t
              - 0.167 * a * a - 0.0129 * h * a + 0.0796 * h * h
              - 0.0634 * o * a - 0.0257 * o * h + 0.0877 * o * o
              - 0.0521 * t * a + 0.00156 * t * h + 0.00198 * t * o
              + 0.0184 * t * t)
        f2 = (0.153 - 0.322 * a + 0.396 * h + 0.424 * o + 0.0226 * t
              + 0.175 * a * a + 0.0185 * h * a - 0.0701 * h * h
              - 0.251 * o * a + 0.179 * o * h + 0.0150 * o * o
              + 0.0134 * t * a + 0.0296 * t * h + 0.0752 * t * o
              + 0.0192 * t * t)
        f3 = (0.370 - 0.205 * a + 0.0307 * h + 0.108 * o + 1.019 * t
              - 0.135 * a * a + 0.0141 * h * a + 0.0998 * h * h
              + 0.208 * o * a - 0.0301 * o * h - 0.226 * o * o
              + 0.353 * t * a - 0.0497 * t * o - 0.423 * t * t
              + 0.202 * h * a * a - 0.281 * o * a * a - 0.342 * h * h * a
              - 0.245 * h * h * o + 0.281 * o * o * h - 0.184 * t * t * a
              - 0.281 * h * a * o)
        return np.stack([f1, f2, f3], axis=1)


# ---------------------------------------------------------------------------
# simplified black-box pairs: sphere anchored at O1 vs a partner function
# anchored at O2, 10-dimensional, bounds [-5, 5]; calibrated anchors

BBOB_DIM = 10
# optima sit well away from the box center so a constant (preference-blind)
# model is far from optimal for either objective
BBOB_O1 = np.full(BBOB_DIM, 4.5)
BBOB_O2 = np.full(BBOB_DIM, -4.5)


class _BBOBPair(Problem):
    n, m = BBOB_DIM, 2
    lower, upper = np.full(BBOB_DIM, -5.0), np.full(BBOB_DIM, 5.0)

    def _raw(self, x):
        z1 = x - Tensor(BBOB_O1)
        f1 = (z1 * z1).sum(axis=1, keepdims=True)
        f2 = self._partner(x - Tensor(BBOB_O2))
        return concat([f1, f2], axis=1)

    def _raw_numpy(self, x):
        f1 = ((x - BBOB_O1) ** 2).sum(axis=1)
        f2 = self._partner_numpy(x - BBOB_O2)
        return np.stack([f1, f2], axis=1)

    def _partner(self, z: Tensor) -> Tensor:
        raise NotImplementedError

    def _partner_numpy(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class BBOBSpherePair(_BBOBPair):
    id = "bbob_f1_f1"

    def _partner(self, z):
        return (z * z).sum(axis=1, keepdims=True)

    def _partner_numpy(self, z):
        return (z ** 2).sum(axis=1)


class BBOBEllipsoidPair(_BBOBPair):
    id = "bbob_f1_f2"
    _w = 10.0 ** (6.0 * np.arange(BBOB_DIM) / (BBOB_DIM - 1))

    def _partner(self, z):
        return (z * z * Tensor(self._w)).sum(axis=1, keepdims=True)

    def _partner_numpy(self, z):
        return (self._w * z ** 2).sum(axis=1)


class BBOBRastriginPair(_BBOBPair):
    id = "bbob_f1_f3"

    def _partner(self, z):
        cos_term = (2.0 * np.pi * z).cos().sum(axis=1, keepdims=True)
        return 10.0 * (BBOB_DIM - cos_term) + (z * z).sum(axis=1, keepdims=True)

    def _partner_numpy(self, z):
        return 10.0 * (BBOB_DIM - np.cos(2.0 * np.pi * z).sum(axis=1)) \
            + (z ** 2).sum(axis=1)


class BBOBAsymmetricRastriginPair(_BBOBPair):
    """Rastrigin with coordinate scaling and a positive-side boost on
    odd coordinates (Buche-style asymmetry, without instance rotations)."""

    id = "bbob_f1_f4"
    _s = 10.0 ** (0.5 * np.arange(BBOB_DIM) / (BBOB_DIM - 1))
    _odd = (np.arange(BBOB_DIM) % 2 == 0) * 1.0  # boost coords 1,3,5,... (1-based)
    _boost = np.sqrt(10.0) - 1.0

    def _partner(self, z):
        zp = (z + self._boost * Tensor(self._odd) * z.relu()) * Tensor(self._s)
        cos_term = (2.0 * np.pi * zp).cos().sum(axis=1, keepdims=True)
        return 10.0 * (BBOB_DIM - cos_term) + (zp * zp).sum(axis=1, keepdims=True)

    def _partner_numpy(self, z):
        zp = (z + self._boost * self._odd * np.maximum(z, 0.0)) * self._s
        return 10.0 * (BBOB_DIM - np.cos(2.0 * np.pi * zp).sum(axis=1)) \
            + (zp ** 2).sum(axis=1)


class BBOBLinearSlopePair(_BBOBPair):
    """Partner objective is a weighted linear slope with its minimum at
    the lower corner of the box (zero there, positive elsewhere)."""

    id = "bbob_f1_f5"
    _w = 10.0 ** (np.arange(BBOB_DIM) / (BBOB_DIM - 1))

    def _partner(self, z):
        # z = x - O2; minimum at x = lower, i.e. z = lower - O2
        shift = float((self._w * (self.lower - BBOB_O2)).sum())
        return (z * Tensor(self._w)).sum(axis=1, keepdims=True) - shift

    def _partner_numpy(self, z):
        shift = (self._w * (self.lower - BBOB_O2)).sum()
        return (self._w * z).sum(axis=1) - shift


# ---------------------------------------------------------------------------

_PROBLEM_CLASSES = [ZDT1, ZDT2, VLMOP1, VLMOP2, RE21, RE24, RE37,
                    BBOBSpherePair, BBOBEllipsoidPair, BBOBRastriginPair,
                    BBOBAsymmetricRastriginPair, BBOBLinearSlopePair]

PROBLEM_IDS = [cls.id for cls in _PROBLEM_CLASSES]
BENCHMARK_SUITE = ["zdt1", "zdt2", "vlmop1", "vlmop2", "re21", "re24", "re37"]
BBOB_SUITE = [f"bbob_f1_f{k}" for k in range(1, 6)]

_instances: dict[str, Problem] = {}


def get_problem(problem_id: str) -> Problem:
    """Problem registry; instances (and their calibration) are cached."""
    if problem_id not in _instances:
        for cls in _PROBLEM_CLASSES:
            if cls.id == problem_id:
                _instances[problem_id] = cls()
                break
        else:
            raise KeyError(f"unknown problem id '{problem_id}' "
                           f"(known: {', '.join(PROBLEM_IDS)})")
    return _instances[problem_id]
