"""Synthetic problem instances with known ground truth.

Generators invert the measurement equations, so noise-free residuals
vanish at the returned truth to floating-point roundoff.  Translations
are sampled uniform in [-1, 1]^3 so the default sigma = 1 balances
rotation and translation residual scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import augmented as aug
from . import quaternion as quat
from .optimization import HandEyeProblem, HandEyeWorldProblem, PoseGraphProblem


@dataclass(frozen=True)
class NoiseModel:
    """Gaussian pose noise.

    rot_sigma is the per-axis standard deviation (radians) of a
    rotation-vector perturbation applied on the right of the quaternion
    part; trans_sigma (meters) is additive on the translation.
    """

    rot_sigma: float = 0.0
    trans_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.rot_sigma < 0.0 or self.trans_sigma < 0.0:
            raise ValueError("noise standard deviations must be nonnegative")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_auq(seed=None, n: int | None = None) -> np.ndarray:
    """Random pose: uniform unit quaternion, translation uniform in [-1, 1]^3."""
    rng = _rng(seed)
    q = quat.random_unit(rng, n)
    t = rng.uniform(-1.0, 1.0, (3,) if n is None else (n, 3))
    return np.concatenate([q, t], axis=-1)


def perturb(x, noise: NoiseModel, rng=None) -> np.ndarray:
    """Apply the noise model to one pose or a stack of poses.

    The rotation perturbation is a Gaussian rotation vector v (angle
    |v|), applied as the half-angle exponential on the right, so the
    geodesic pose error it induces is |v|.  Pass a Generator to draw
    several perturbations from one stream; otherwise noise.seed starts
    a fresh stream.
    """
    rng = _rng(noise.seed if rng is None else rng)
    x = aug.as_auq(np.asarray(x, dtype=float))
    shape = x.shape[:-1] + (3,)
    rv = rng.normal(0.0, noise.rot_sigma, shape) if noise.rot_sigma else np.zeros(shape)
    dt = rng.normal(0.0, noise.trans_sigma, shape) if noise.trans_sigma else np.zeros(shape)
    p = quat.qmul(x[..., :4], quat.qexp(0.5 * rv))
    p /= np.linalg.norm(p, axis=-1, keepdims=True)
    return np.concatenate([p, x[..., 4:] + dt], axis=-1)


def gen_handeye(
    m: int, seed=0, sigma: float = 1.0, noise: NoiseModel | None = None
) -> tuple[HandEyeProblem, np.ndarray]:
    """Instance of (a_i o x) = (x o b_i): returns (problem, x_true).

    Exact measurements satisfy b_i = x^-1 o a_i o x; noise, when given,
    perturbs both a_i and b_i.
    """
    if m < 1:
        raise ValueError("need at least one pair")
    rng = _rng(seed)
    x_true = random_auq(rng)
    a = random_auq(rng, m)
    b = aug.compose(aug.compose(aug.auq_inverse(x_true), a), x_true)
    if noise is not None:
        noise_rng = _rng(noise.seed)
        a = perturb(a, noise, noise_rng)
        b = perturb(b, noise, noise_rng)
    return HandEyeProblem(a=a, b=b, sigma=sigma), x_true


def gen_handeye_world(
    m: int, seed=0, sigma: float = 1.0, noise: NoiseModel | None = None
) -> tuple[HandEyeWorldProblem, np.ndarray, np.ndarray]:
    """Instance of (a_i o x) = (y o b_i): returns (problem, x_true, y_true)."""
    if m < 1:
        raise ValueError("need at least one pair")
    rng = _rng(seed)
    x_true = random_auq(rng)
    y_true = random_auq(rng)
    a = random_auq(rng, m)
    b = aug.compose(aug.compose(aug.auq_inverse(y_true), a), x_true)
    if noise is not None:
        noise_rng = _rng(noise.seed)
        a = perturb(a, noise, noise_rng)
        b = perturb(b, noise, noise_rng)
    return HandEyeWorldProblem(a=a, b=b, sigma=sigma), x_true, y_true


def gen_posegraph(
    n: int, loop_edges: int, seed=0, sigma: float = 1.0, noise: NoiseModel | None = None
) -> tuple[PoseGraphProblem, np.ndarray]:
    """Chain graph 0 -> 1 -> ... -> n-1 plus random extra arcs.

    Vertex 0 is the anchored ground truth identity.  Measurements are
    y_ij = x_i^-1 o x_j, optionally perturbed.  Returns (problem, x_true).
    """
    if n < 2:
        raise ValueError("need at least two vertices")
    rng = _rng(seed)
    x_true = np.concatenate([aug.identity()[None, :], random_auq(rng, n - 1)], axis=0)
    edges = [(i, i + 1) for i in range(n - 1)]
    candidates = [
        (i, j) for i in range(n) for j in range(n) if i != j and (i, j) not in set(edges)
    ]
    if loop_edges > len(candidates):
        raise ValueError(f"at most {len(candidates)} extra arcs are available")
    if loop_edges:
        picks = rng.choice(len(candidates), size=loop_edges, replace=False)
        edges += [candidates[k] for k in sorted(picks)]
    edges = np.array(edges, dtype=int)
    y = aug.compose(aug.auq_inverse(x_true[edges[:, 0]]), x_true[edges[:, 1]])
    if noise is not None:
        y = perturb(y, noise, _rng(noise.seed))
    problem = PoseGraphProblem(n=n, edges=edges, measurements=y, sigma=sigma, anchor=0)
    return problem, x_true
