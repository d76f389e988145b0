import numpy as np
import pytest

from coaction.autodiff import Tensor
from coaction.conditioning import assemble_input_batch, embed_task, sample_preferences
from coaction.model import (
    ModelConfig, TaskSpec, config_for_tasks, forward, init_params, param_count,
    positional_encoding,
)
from coaction.rng import named_stream

SUITE = ["zdt1", "zdt2", "vlmop1", "vlmop2", "re21", "re24", "re37"]


def tiny_config(backbone="transformer", task_ids=("zdt1", "re37"), d_max=0):
    cfg = config_for_tasks(list(task_ids), backbone=backbone)
    cfg.embed_dim, cfg.heads, cfg.ff_dim, cfg.pool_hidden = 8, 2, 8, 4
    cfg.d_max = d_max or cfg.d_max
    return cfg


def batch_for(cfg, task_id, batch=4, seed=0):
    task = cfg.task(task_id)
    emb = embed_task(cfg.task_index(task_id), cfg.d_task)
    prefs = sample_preferences(task.m, batch, named_stream(seed, "preferences"))
    return assemble_input_batch(emb, prefs, task.m, cfg.d_max)


def test_bounded_outputs_strictly_inside_box():
    cfg = config_for_tasks(SUITE)
    params = init_params(cfg)
    for tid in SUITE:
        task = cfg.task(tid)
        x = forward(cfg, params, batch_for(cfg, tid, 8), tid).data
        assert (x > task.lower).all() and (x < task.upper).all()


def test_inference_deterministic():
    cfg = tiny_config()
    params = init_params(cfg)
    inputs = batch_for(cfg, "zdt1", 5)
    a = forward(cfg, params, inputs, "zdt1").data
    b = forward(cfg, params, inputs, "zdt1").data
    np.testing.assert_array_equal(a, b)


def test_zero_params_center_output():
    cfg = tiny_config(task_ids=("zdt1",))
    params = init_params(cfg)
    for t in params.values():
        t.data[...] = 0.0
    out = forward(cfg, params, batch_for(cfg, "zdt1", 3), "zdt1").data
    np.testing.assert_allclose(out, 0.5, atol=1e-15)


def test_init_deterministic_and_shaped():
    cfg = config_for_tasks(SUITE)
    p1, p2 = init_params(cfg), init_params(cfg)
    assert p1.keys() == p2.keys()
    for k in p1:
        np.testing.assert_array_equal(p1[k].data, p2[k].data)
    np.testing.assert_array_equal(p1["ln1.g"].data, np.ones(cfg.embed_dim))
    np.testing.assert_array_equal(p1["ln1.b"].data, np.zeros(cfg.embed_dim))
    w = p1["attn.q.w"].data
    assert np.abs(w).max() <= np.sqrt(6.0 / w.shape[0])
    assert p1["head.zdt1.w"].data.shape == (cfg.embed_dim, 30)
    assert p1["head.re37.w"].data.shape == (cfg.embed_dim, 4)


def test_attention_rows_sum_to_one():
    cfg = tiny_config()
    params = init_params(cfg)
    diag = {}
    forward(cfg, params, batch_for(cfg, "zdt1", 4), "zdt1", diagnostics=diag)
    att = diag["attention"]
    assert att.shape == (4, cfg.heads, cfg.input_len, cfg.input_len)
    np.testing.assert_allclose(att.sum(axis=-1), 1.0, atol=1e-10)
    np.testing.assert_allclose(diag["pool_weights"].sum(axis=-1), 1.0, atol=1e-10)


def test_backbone_identical_across_task_index():
    cfg = tiny_config(task_ids=("zdt1", "zdt2"))
    params = init_params(cfg)
    inputs = batch_for(cfg, "zdt1", 4)
    d1, d2 = {}, {}
    forward(cfg, params, inputs, "zdt1", diagnostics=d1)
    forward(cfg, params, inputs, "zdt2", diagnostics=d2)
    np.testing.assert_array_equal(d1["pooled"], d2["pooled"])


def test_padding_positions_distinguished_by_position():
    # two zero-padding slots: identical token values, different positions
    cfg = tiny_config(task_ids=("zdt1",), d_max=4)
    params = init_params(cfg)
    inputs = batch_for(cfg, "zdt1", 2)
    pad0, pad1 = cfg.d_task + 2, cfg.d_task + 3
    assert (inputs[:, [pad0, pad1]] == 0).all()

    # permuting the (equal-valued) padding tokens is a value-level no-op
    swapped = inputs.copy()
    swapped[:, [pad0, pad1]] = swapped[:, [pad1, pad0]]
    d_base, d_swap = {}, {}
    forward(cfg, params, inputs, "zdt1", diagnostics=d_base)
    forward(cfg, params, swapped, "zdt1", diagnostics=d_swap)
    np.testing.assert_array_equal(d_base["pooled"], d_swap["pooled"])

    # but the two slots are not interchangeable as positions: moving a
    # sentinel between them changes the pooled representation, because
    # their positional encodings differ
    pe = positional_encoding(cfg.input_len, cfg.embed_dim)
    assert not np.allclose(pe[pad0], pe[pad1])
    at0, at1 = inputs.copy(), inputs.copy()
    at0[:, pad0] = 0.3
    at1[:, pad1] = 0.3
    d0, d1 = {}, {}
    forward(cfg, params, at0, "zdt1", diagnostics=d0)
    forward(cfg, params, at1, "zdt1", diagnostics=d1)
    assert not np.allclose(d0["pooled"], d1["pooled"])


def test_dropout_changes_train_outputs_only():
    cfg = tiny_config()
    params = init_params(cfg)
    inputs = batch_for(cfg, "zdt1", 4)
    base = forward(cfg, params, inputs, "zdt1").data
    t1 = forward(cfg, params, inputs, "zdt1", train_mode=True,
                 rng=named_stream(0, "dropout")).data
    t2 = forward(cfg, params, inputs, "zdt1", train_mode=True,
                 rng=named_stream(1, "dropout")).data
    assert not np.array_equal(t1, t2)
    assert not np.array_equal(base, t1)


def test_train_mode_requires_rng():
    cfg = tiny_config()
    params = init_params(cfg)
    with pytest.raises(ValueError, match="rng"):
        forward(cfg, params, batch_for(cfg, "zdt1", 2), "zdt1", train_mode=True)


def test_unknown_task_rejected():
    cfg = tiny_config(task_ids=("zdt1",))
    params = init_params(cfg)
    with pytest.raises(KeyError, match="re21"):
        forward(cfg, params, batch_for(cfg, "zdt1", 2), "re21")


def test_nan_error_names_stage():
    cfg = tiny_config(task_ids=("zdt1",))
    params = init_params(cfg)
    params["ff.fc1.w"].data[...] = np.inf
    with pytest.raises(ValueError, match="stage"):
        forward(cfg, params, batch_for(cfg, "zdt1", 2), "zdt1")


def test_mlp_contract_and_param_budget():
    mlp_cfg = config_for_tasks(SUITE, backbone="mlp")
    tf_cfg = config_for_tasks(SUITE, backbone="transformer")
    mlp_params, tf_params = init_params(mlp_cfg), init_params(tf_cfg)
    ratio = param_count(mlp_params) / param_count(tf_params)
    assert ratio < 2.0

    task = mlp_cfg.task("re21")
    inputs = batch_for(mlp_cfg, "re21", 6)
    out = forward(mlp_cfg, mlp_params, inputs, "re21").data
    assert (out > task.lower).all() and (out < task.upper).all()
    np.testing.assert_array_equal(
        out, forward(mlp_cfg, mlp_params, inputs, "re21").data)


def test_config_validation():
    with pytest.raises(ValueError, match="divisible"):
        ModelConfig(tasks=[TaskSpec("a", 2, 2, np.zeros(2), np.ones(2))],
                    embed_dim=10, heads=4)
    with pytest.raises(ValueError, match="backbone"):
        config_for_tasks(["zdt1"], backbone="rnn")
    with pytest.raises(ValueError, match="d_max"):
        ModelConfig(tasks=[TaskSpec("a", 2, 3, np.zeros(2), np.ones(2))], d_max=2)


def test_model_gradients_match_finite_differences():
    from coaction.autodiff import finite_diff_check

    cfg = tiny_config(task_ids=("zdt1",))
    params = init_params(cfg)
    inputs = batch_for(cfg, "zdt1", 2)
    rng = np.random.default_rng(0)
    names = sorted(params)
    for trial in range(10):
        name = names[trial % len(names)]
        target = params[name]
        coord = int(rng.integers(0, target.data.size))
        mask = np.zeros(target.data.shape)
        mask.reshape(-1)[coord] = 1.0
        frozen = target.data * (1.0 - mask)

        def loss_at(probe: Tensor, name=name, mask=mask, frozen=frozen):
            saved = params[name]
            params[name] = Tensor(frozen) + Tensor(mask) * probe.reshape(())
            try:
                out = forward(cfg, params, inputs, "zdt1")
                # small scale keeps the central-difference rounding floor
                # below tolerance on structurally-zero gradients (e.g. the
                # key bias, which softmax shift invariance cancels exactly)
                return (out * out).mean() * 0.1
            finally:
                params[name] = saved

        probe = Tensor(np.array([target.data.reshape(-1)[coord]]))
        err = finite_diff_check(loss_at, probe, h=1e-5)
        assert err < 1e-4, f"param {name}[{coord}]: rel err {err}"
