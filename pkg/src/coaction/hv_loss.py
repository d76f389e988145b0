"""Hypervolume-maximization surrogate loss (PSL-HV1).

For a reference point r dominating the normalized front, the projected
distance of a solution along preference direction lambda is
rho = min_i (r_i - f_i) / lambda_i. Training maximizes the batch mean
of rho^m (linear below zero, which keeps infeasible excursions
informative), scaled by the orthant constant c_m, so the loss is the
negated estimate of the dominated-volume surrogate.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .autodiff import Tensor

DEFAULT_REFERENCE = 3.5
LAMBDA_MIN = 1e-6


def gamma_half_integer(x: float) -> float:
    """Gamma(x) exact (to float rounding) at positive half-integer x."""
    k = round(2 * x)
    if k <= 0 or abs(2 * x - k) > 1e-12:
        raise ValueError(f"gamma_half_integer expects a positive half-integer, got {x}")
    if k % 2 == 0:  # integer argument
        return float(math.factorial(k // 2 - 1))
    # Gamma(1/2) = sqrt(pi), then ascend by Gamma(x+1) = x Gamma(x)
    value = math.sqrt(math.pi)
    arg = 0.5
    while arg < x - 1e-12:
        value *= arg
        arg += 1.0
    return value


def hv_constant(m: int) -> float:
    """c_m = pi^(m/2) / (2^m Gamma(m/2 + 1)): unit-ball orthant volume."""
    return math.pi ** (m / 2) / (2 ** m * gamma_half_integer(m / 2 + 1))


@dataclass
class LossContext:
    m: int
    r: np.ndarray = None
    c_m: float = field(init=False)

    def __post_init__(self):
        if self.r is None:
            self.r = np.full(self.m, DEFAULT_REFERENCE)
        self.r = np.asarray(self.r, dtype=np.float64)
        if self.r.shape != (self.m,):
            raise ValueError(f"reference point must have {self.m} coordinates")
        if (self.r < 1.0).any():
            raise ValueError("reference point must dominate the normalized nadir "
                             f"(each r_i >= 1); got {self.r}")
        self.c_m = hv_constant(self.m)


def projected_distance(f_norm: Tensor, lam: np.ndarray, ctx: LossContext):
    """rho = min_i (r_i - f_i) / lambda_i as a graph node.

    Gradient flows only through the argmin coordinate; the reported
    argmin is 1-based (objective numbering), lowest index on ties.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if (lam < LAMBDA_MIN).any():
        raise ValueError("preference components below 1e-6; truncate upstream")
    ratios = (Tensor(ctx.r) - f_norm) / Tensor(lam)
    rho, idx = ratios.min_reduce_with_index()
    return rho, idx + 1


def psl_hv1_loss(batch_f_norm: Tensor, batch_lambda: np.ndarray,
                 ctx: LossContext) -> Tensor:
    """Scalar loss L = -c_m * mean(rho^m if rho >= 0 else rho)."""
    if batch_f_norm.data.ndim != 2 or batch_f_norm.data.shape[1] != ctx.m:
        raise ValueError(f"expected batch of {ctx.m}-objective rows, "
                         f"got shape {batch_f_norm.data.shape}")
    if batch_f_norm.data.shape[0] == 0:
        raise ValueError("loss batch is empty")
    rho, _ = projected_distance(batch_f_norm, batch_lambda, ctx)
    nonneg = Tensor((rho.data >= 0).astype(np.float64))
    branch = nonneg * rho.power(ctx.m) + (1.0 - nonneg) * rho
    return -ctx.c_m * branch.mean()
