import math

import numpy as np
import pytest

from coaction.autodiff import Tensor, finite_diff_check
from coaction.hv_loss import (
    LossContext, gamma_half_integer, hv_constant, projected_distance,
    psl_hv1_loss,
)


def test_gamma_half_integer_values():
    assert gamma_half_integer(1.0) == 1.0
    assert gamma_half_integer(2.0) == 1.0
    assert gamma_half_integer(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_half_integer(2.5) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        gamma_half_integer(1.3)


def test_hv_constants():
    assert hv_constant(2) == pytest.approx(math.pi / 4, rel=1e-15)
    assert hv_constant(3) == pytest.approx(math.pi / 6, rel=1e-15)


def test_context_validates_reference():
    ctx = LossContext(m=2)
    np.testing.assert_array_equal(ctx.r, [3.5, 3.5])
    with pytest.raises(ValueError, match="dominate"):
        LossContext(m=2, r=np.array([0.5, 3.5]))
    with pytest.raises(ValueError, match="coordinates"):
        LossContext(m=2, r=np.array([3.5, 3.5, 3.5]))


def test_projected_distance_example():
    ctx = LossContext(m=2)
    rho, argmin = projected_distance(Tensor(np.array([[0.5, 1.5]])),
                                     np.array([[0.6, 0.8]]), ctx)
    assert rho.data[0] == pytest.approx(2.5, abs=1e-12)
    assert argmin[0] == 2  # 1-based objective index


def test_projected_distance_at_reference_is_zero():
    ctx = LossContext(m=2)
    rho, _ = projected_distance(Tensor(np.array([[3.5, 3.5]])),
                                np.array([[0.5, 0.5]]), ctx)
    assert rho.data[0] == 0.0


def test_projected_distance_tie_takes_first():
    ctx = LossContext(m=2)
    lam = np.array([[np.sqrt(2) / 2, np.sqrt(2) / 2]])
    rho, argmin = projected_distance(Tensor(np.array([[0.5, 0.5]])), lam, ctx)
    assert rho.data[0] == pytest.approx(3.0 / (np.sqrt(2) / 2), abs=1e-12)
    assert rho.data[0] == pytest.approx(4.24264, abs=1e-5)
    assert argmin[0] == 1


def test_projected_distance_rejects_tiny_lambda():
    ctx = LossContext(m=2)
    with pytest.raises(ValueError, match="truncate"):
        projected_distance(Tensor(np.array([[0.5, 0.5]])),
                           np.array([[1e-9, 1.0]]), ctx)


def test_rho_bounded_by_every_coordinate():
    ctx = LossContext(m=3)
    rng = np.random.default_rng(0)
    f = rng.uniform(0, 1, size=(50, 3))
    lam = np.clip(rng.uniform(0, 1, size=(50, 3)), 0.01, 0.99)
    rho, argmin = projected_distance(Tensor(f), lam, ctx)
    ratios = (ctx.r - f) / lam
    assert (rho.data <= ratios.min(axis=1) + 1e-12).all()
    np.testing.assert_allclose(rho.data, ratios[np.arange(50), argmin - 1])


def test_loss_positive_branch_value():
    # single sample with rho = 2.5 and m = 2
    ctx = LossContext(m=2)
    f = Tensor(np.array([[0.5, 1.5]]))
    lam = np.array([[0.6, 0.8]])
    loss = psl_hv1_loss(f, lam, ctx)
    assert float(loss.data) == pytest.approx(-math.pi / 4 * 6.25, abs=1e-10)
    assert float(loss.data) == pytest.approx(-4.90874, abs=1e-5)


def test_loss_negative_branch_stays_linear():
    ctx = LossContext(m=2)
    f = Tensor(np.array([[3.75, 3.9]]))  # rho = min(-0.5, -0.5/0.8) = -0.5/0.8
    lam = np.array([[0.5, 0.8]])
    rho = min((3.5 - 3.75) / 0.5, (3.5 - 3.9) / 0.8)
    loss = psl_hv1_loss(f, lam, ctx)
    assert float(loss.data) == pytest.approx(-math.pi / 4 * rho, abs=1e-12)
    # the documented single-value case: rho = -0.5 -> L = +0.39270
    f2 = Tensor(np.array([[3.75, 3.5]]))
    loss2 = psl_hv1_loss(f2, np.array([[0.5, 0.8]]), ctx)
    assert float(loss2.data) == pytest.approx(0.39270, abs=1e-5)


def test_loss_batch_mean():
    ctx = LossContext(m=2)
    f = Tensor(np.array([[0.5, 1.5], [3.75, 3.5]]))
    lam = np.array([[0.6, 0.8], [0.5, 0.8]])
    loss = psl_hv1_loss(f, lam, ctx)
    expected = -math.pi / 4 * (6.25 + (-0.5)) / 2
    assert float(loss.data) == pytest.approx(expected, abs=1e-12)


def test_loss_continuous_across_zero():
    ctx = LossContext(m=2)
    lam = np.array([[0.6, 0.8]])
    eps = 1e-9
    below = psl_hv1_loss(Tensor(np.array([[3.5 - 0.6 * eps, 0.0]])), lam, ctx)
    above = psl_hv1_loss(Tensor(np.array([[3.5 + 0.6 * eps, 0.0]])), lam, ctx)
    assert abs(float(below.data)) < 1e-8
    assert abs(float(above.data)) < 1e-8


def test_worse_objectives_never_decrease_loss():
    ctx = LossContext(m=2)
    rng = np.random.default_rng(7)
    for _ in range(100):
        f = rng.uniform(0, 1.5, size=(1, 2))
        lam = np.clip(rng.uniform(0, 1, size=(1, 2)), 0.01, 0.99)
        base = float(psl_hv1_loss(Tensor(f), lam, ctx).data)
        j = rng.integers(2)
        worse = f.copy()
        worse[0, j] += 1e-3
        bumped = float(psl_hv1_loss(Tensor(worse), lam, ctx).data)
        assert bumped >= base - 1e-12


def test_gradient_only_at_argmin_and_matches_fd():
    ctx = LossContext(m=2)
    rng = np.random.default_rng(3)
    for _ in range(20):
        f = rng.uniform(0, 2.5, size=(1, 2))
        lam = np.clip(rng.uniform(0.2, 1, size=(1, 2)), 0.01, 0.99)
        ratios = (ctx.r - f) / lam
        if abs(ratios[0, 0] - ratios[0, 1]) < 1e-3:
            continue  # skip near-ties: subgradient vs FD disagree there
        ft = Tensor(f, requires_grad=True)
        psl_hv1_loss(ft, lam, ctx).backward()
        j = int(np.argmin(ratios[0]))
        assert ft.grad[0, 1 - j] == 0.0
        assert ft.grad[0, j] != 0.0
        err = finite_diff_check(lambda t: psl_hv1_loss(t, lam, ctx), Tensor(f))
        assert err < 1e-4


def test_loss_rejects_empty_or_misshaped_batch():
    ctx = LossContext(m=2)
    with pytest.raises(ValueError, match="empty"):
        psl_hv1_loss(Tensor(np.zeros((0, 2))), np.zeros((0, 2)), ctx)
    with pytest.raises(ValueError, match="2-objective"):
        psl_hv1_loss(Tensor(np.zeros((4, 3))), np.full((4, 3), 0.5), ctx)
