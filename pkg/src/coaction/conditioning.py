"""Model conditioning: task embeddings, preference vectors, input assembly.

A task is identified by a fixed sinusoidal embedding (1-based index,
base 50), and a trade-off preference by the Cartesian image of polar
angles theta in [0, pi/2]^(m-1) on the positive unit sphere. The model
input concatenates embedding, truncated preference, and zero padding
up to the largest objective count among registered tasks.
"""

from dataclasses import dataclass

import numpy as np

EMBED_BASE = 50.0
LAMBDA_FLOOR = 0.01
LAMBDA_CEIL = 0.99


@dataclass(frozen=True)
class TaskEmbedding:
    t: int
    d: int
    e: np.ndarray


@dataclass
class PreferenceSample:
    theta: np.ndarray        # (m-1,) polar angles in [0, pi/2]
    lam: np.ndarray          # (m,) unit vector on the positive orthant
    lam_trunc: np.ndarray    # (m,) componentwise clamp to [0.01, 0.99]


def embed_task(t: int, d: int = 6) -> TaskEmbedding:
    """Sinusoidal embedding: pair i holds sin and cos of t / 50^(2i/d)."""
    if t < 0:
        raise ValueError(f"task index must be >= 1 (got {t})")
    if d < 2 or d % 2 != 0:
        raise ValueError(f"embedding dimension must be even and >= 2 (got {d})")
    i = np.arange(d // 2)
    angle = t / EMBED_BASE ** (2 * i / d)
    e = np.empty(d)
    e[0::2] = np.sin(angle)
    e[1::2] = np.cos(angle)
    return TaskEmbedding(t=t, d=d, e=e)


def polar_to_preference(theta: np.ndarray) -> np.ndarray:
    """Map polar angles to the unit preference vector.

    Spherical parameterization of the positive orthant:
    lambda_1 = sin(th_1)...sin(th_{m-1}), lambda_k for k >= 2 replaces
    the last sine with a cosine, and lambda_m = cos(th_1).
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    m = theta.size + 1
    lam = np.empty(m)
    # lambda_k = sin(th_1)...sin(th_{m-k}) * cos(th_{m-k+1}) with the
    # convention cos(th_0) = 1; lambda_m = cos(th_1).
    sines = np.sin(theta)
    for k in range(m):
        n_sin = m - 1 - k
        v = np.prod(sines[:n_sin])
        if k > 0:
            v *= np.cos(theta[n_sin])
        lam[k] = v
    return lam


def preference_to_polar(lam: np.ndarray) -> np.ndarray:
    """Invert the polar map on the positive orthant (angles in [0, pi/2])."""
    lam = np.asarray(lam, dtype=np.float64)
    m = lam.size
    norm = np.linalg.norm(lam)
    if norm < 1e-12:
        raise ValueError("cannot recover angles from a zero vector")
    u = lam / norm
    if m == 2:
        return np.array([np.arctan2(u[0], u[1])])
    if m == 3:
        theta1 = np.arccos(np.clip(u[2], -1.0, 1.0))
        theta2 = np.arctan2(u[0], u[1])
        return np.array([theta1, theta2])
    raise ValueError(f"unsupported objective count {m}")


def polar_to_preference_batch(thetas: np.ndarray) -> np.ndarray:
    """Vectorized polar map for a (B, m-1) block of angles."""
    thetas = np.asarray(thetas, dtype=np.float64)
    m = thetas.shape[1] + 1
    if m == 2:
        return np.stack([np.sin(thetas[:, 0]), np.cos(thetas[:, 0])], axis=1)
    if m == 3:
        s1, c1 = np.sin(thetas[:, 0]), np.cos(thetas[:, 0])
        return np.stack([s1 * np.sin(thetas[:, 1]), s1 * np.cos(thetas[:, 1]), c1],
                        axis=1)
    raise ValueError(f"unsupported objective count {m}")


def sample_preferences(m: int, batch: int, rng: np.random.Generator) -> list[PreferenceSample]:
    """Draw `batch` preferences with theta ~ Uniform[0, pi/2]^(m-1)."""
    if m not in (2, 3):
        raise ValueError(f"objective count must be 2 or 3 (got {m})")
    if batch < 1:
        raise ValueError("batch must be >= 1")
    thetas = rng.uniform(0.0, np.pi / 2, size=(batch, m - 1))
    lams = polar_to_preference_batch(thetas)
    trunc = _truncate(lams)
    return [PreferenceSample(theta=thetas[i], lam=lams[i], lam_trunc=trunc[i])
            for i in range(batch)]


def _truncate(lam: np.ndarray) -> np.ndarray:
    return np.clip(lam, LAMBDA_FLOOR, LAMBDA_CEIL)


def apply_extreme_and_truncate(batch: list[PreferenceSample], m: int,
                               use_extreme: bool) -> list[PreferenceSample]:
    """Optionally append the m basis vectors, then clamp all lambdas.

    No renormalization after clamping; the clamp exists to keep every
    component usable as a divisor downstream.
    """
    if not batch:
        raise ValueError("preference batch must be nonempty")
    out = list(batch)
    if use_extreme:
        for j in range(m):
            basis = np.zeros(m)
            basis[j] = 1.0
            out.append(PreferenceSample(theta=preference_to_polar(basis),
                                        lam=basis, lam_trunc=_truncate(basis)))
    for p in out:
        p.lam_trunc = _truncate(p.lam)
    return out


def assemble_input(embedding: TaskEmbedding, pref: PreferenceSample,
                   m_t: int, d_max: int) -> np.ndarray:
    """Concatenate [embedding, truncated lambda, zero padding]."""
    if m_t > d_max:
        raise ValueError(f"task has {m_t} objectives but padded width is {d_max}")
    if pref.lam_trunc.size != m_t:
        raise ValueError("preference arity does not match the task")
    v = np.zeros(embedding.d + d_max)
    v[:embedding.d] = embedding.e
    v[embedding.d:embedding.d + m_t] = pref.lam_trunc
    return v


def assemble_input_batch(embedding: TaskEmbedding, prefs: list[PreferenceSample],
                         m_t: int, d_max: int) -> np.ndarray:
    if m_t > d_max:
        raise ValueError(f"task has {m_t} objectives but padded width is {d_max}")
    v = np.zeros((len(prefs), embedding.d + d_max))
    v[:, :embedding.d] = embedding.e
    v[:, embedding.d:embedding.d + m_t] = np.stack([p.lam_trunc for p in prefs])
    return v
