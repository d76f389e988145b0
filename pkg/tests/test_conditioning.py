import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coaction.conditioning import (
    PreferenceSample, apply_extreme_and_truncate, assemble_input,
    assemble_input_batch, embed_task, polar_to_preference,
    preference_to_polar, sample_preferences,
)
from coaction.rng import named_stream


def test_embedding_t1_d6_values():
    # sin/cos of 1, 1/50^(1/3), 1/50^(2/3)
    e = embed_task(1, 6).e
    expected = [0.84147, 0.54030, 0.26812, 0.96339, 0.07361, 0.99729]
    np.testing.assert_allclose(e, expected, atol=5e-6)


def test_embedding_t0_alternates_zero_one():
    np.testing.assert_array_equal(embed_task(0, 6).e, [0, 1, 0, 1, 0, 1])


def test_embedding_neighbors_far_apart():
    e1, e2 = embed_task(1, 6).e, embed_task(2, 6).e
    assert np.linalg.norm(e1 - e2) > 0.5


def test_embedding_rejects_odd_dimension():
    with pytest.raises(ValueError, match="even"):
        embed_task(1, 5)


def test_embedding_injective_and_smooth():
    es = np.stack([embed_task(t, 6).e for t in range(1, 101)])
    diff = es[:, None, :] - es[None, :, :]
    dist = np.sqrt((diff ** 2).sum(-1))
    off_diag = dist[~np.eye(100, dtype=bool)]
    assert off_diag.min() > 1e-6
    for t in range(50):
        assert dist[t, t + 1] < dist[t, t + 10]


def test_preference_m2_symmetric_and_axis():
    np.testing.assert_allclose(polar_to_preference([np.pi / 4]),
                               [np.sqrt(2) / 2, np.sqrt(2) / 2], atol=1e-12)
    np.testing.assert_allclose(polar_to_preference([0.0]), [0.0, 1.0], atol=1e-12)


def test_preference_m3_example():
    lam = polar_to_preference([np.pi / 4, np.pi / 4])
    np.testing.assert_allclose(lam, [0.5, 0.5, np.sqrt(2) / 2], atol=1e-12)
    assert np.linalg.norm(lam) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, np.pi / 2), min_size=1, max_size=2))
def test_preference_always_unit_norm(theta):
    lam = polar_to_preference(np.array(theta))
    assert abs(np.linalg.norm(lam) - 1.0) < 1e-12
    assert (lam >= -1e-15).all()


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0.05, np.pi / 2 - 0.05), min_size=1, max_size=2))
def test_polar_roundtrip(theta):
    theta = np.array(theta)
    back = preference_to_polar(polar_to_preference(theta))
    np.testing.assert_allclose(back, theta, atol=1e-10)


def test_sampling_reproducible():
    a = sample_preferences(2, 16, named_stream(5, "preferences"))
    b = sample_preferences(2, 16, named_stream(5, "preferences"))
    np.testing.assert_array_equal(np.stack([p.theta for p in a]),
                                  np.stack([p.theta for p in b]))
    np.testing.assert_array_equal(np.stack([p.lam for p in a]),
                                  np.stack([p.lam for p in b]))


def test_extreme_vectors_clamped():
    batch = sample_preferences(2, 4, named_stream(0, "preferences"))
    out = apply_extreme_and_truncate(batch, m=2, use_extreme=True)
    assert len(out) == 6
    np.testing.assert_allclose(out[4].lam_trunc, [0.99, 0.01])
    np.testing.assert_allclose(out[5].lam_trunc, [0.01, 0.99])


def test_truncate_keeps_interior_values():
    p = PreferenceSample(theta=np.array([0.927]), lam=np.array([0.6, 0.8]),
                         lam_trunc=np.array([0.6, 0.8]))
    out = apply_extreme_and_truncate([p], m=2, use_extreme=False)
    assert len(out) == 1
    np.testing.assert_array_equal(out[0].lam_trunc, [0.6, 0.8])


def test_assemble_input_layout():
    emb = embed_task(3, 6)
    pref = sample_preferences(2, 1, named_stream(1, "preferences"))[0]
    v = assemble_input(emb, pref, m_t=2, d_max=3)
    assert v.shape == (9,)
    np.testing.assert_array_equal(v[:6], emb.e)
    np.testing.assert_array_equal(v[6:8], pref.lam_trunc)
    assert v[8] == 0.0


def test_assemble_input_no_padding_when_m_equals_dmax():
    emb = embed_task(7, 6)
    pref = sample_preferences(3, 1, named_stream(2, "preferences"))[0]
    v = assemble_input(emb, pref, m_t=3, d_max=3)
    assert v.shape == (9,)
    np.testing.assert_array_equal(v[6:9], pref.lam_trunc)


def test_assemble_input_rejects_oversized_task():
    emb = embed_task(1, 6)
    pref = sample_preferences(3, 1, named_stream(3, "preferences"))[0]
    with pytest.raises(ValueError, match="padded width"):
        assemble_input(emb, pref, m_t=3, d_max=2)


def test_assemble_batch_recoverable_by_slicing():
    emb = embed_task(2, 6)
    prefs = sample_preferences(2, 5, named_stream(4, "preferences"))
    batch = assemble_input_batch(emb, prefs, m_t=2, d_max=3)
    assert batch.shape == (5, 9)
    np.testing.assert_array_equal(batch[:, :6], np.tile(emb.e, (5, 1)))
    np.testing.assert_array_equal(batch[:, 6:8],
                                  np.stack([p.lam_trunc for p in prefs]))
    np.testing.assert_array_equal(batch[:, 8], np.zeros(5))
