"""Sphere-constrained least squares over pose variables.

Three problem families share one machinery.  Each residual is the
ambient 7-vector difference of two composed poses:

    hand-eye            z_i  = (a_i o x) - (x o b_i)
    hand-eye + world    z_i  = (a_i o x) - (y o b_i)
    pose graph          z_ij = (x_i^-1 o x_j) - y_ij

and the objective is (1/2) sum |z|_sigma^2 with the sigma-weighted
magnitude (translation components weighted by sigma).  The feasible set
is a product of unit 3-spheres (one per pose block) times R^3 factors,
so the solver is a Riemannian gradient descent: ambient gradient,
tangent projection per quaternion block, Armijo backtracking, and
renormalization as the retraction.  An optional Gauss-Newton refinement
on the tangent space (default on) polishes to machine precision on
zero-residual instances.  For pose graphs the objective is invariant
under a global left translation, so one anchor vertex is pinned to the
identity.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import augmented as aug
from . import quaternion as quat
from .errors import InfeasibleInit, NonFiniteObjective
from .tolerances import UNIT_NORMALIZE_TOL

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_STALLED = "stalled"


# ---------------------------------------------------------------------------
# problems


def _unit_blocks(x, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[-1] != 7:
        raise ValueError(f"{what} must have shape (m, 7), got {x.shape}")
    return aug.as_auq(x)


@dataclass
class HandEyeProblem:
    """Measurement pairs (a_i, b_i) constraining one unknown pose x.

    At least two pairs with independent rotation axes are needed for a
    well-posed rotation; the solver does not enforce this.
    """

    a: np.ndarray
    b: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        self.a = _unit_blocks(self.a, "a")
        self.b = _unit_blocks(self.b, "b")
        if self.a.shape != self.b.shape:
            raise ValueError("a and b must hold the same number of poses")
        if len(self.a) < 1:
            raise ValueError("at least one measurement pair is required")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")

    @property
    def n_blocks(self) -> int:
        return 1

    @property
    def pair_count(self) -> int:
        return len(self.a)


@dataclass
class HandEyeWorldProblem(HandEyeProblem):
    """Pairs (a_i, b_i) constraining two unknowns: x and the world pose y."""

    @property
    def n_blocks(self) -> int:
        return 2


@dataclass
class PoseGraphProblem:
    """Relative pose measurements y_ij on directed edges of a graph.

    Vertex `anchor` is held at the identity during solves (gauge fixing).
    A weakly disconnected graph is not identifiable; it is accepted with
    a warning.
    """

    n: int
    edges: np.ndarray
    measurements: np.ndarray
    sigma: float = 1.0
    anchor: int = 0
    initial: np.ndarray | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=int)
        if self.edges.ndim != 2 or self.edges.shape[1] != 2:
            raise ValueError("edges must have shape (m, 2)")
        self.measurements = _unit_blocks(self.measurements, "measurements")
        if len(self.measurements) != len(self.edges):
            raise ValueError("one measurement per edge is required")
        if self.n < 2:
            raise ValueError("need at least two vertices")
        if np.any(self.edges < 0) or np.any(self.edges >= self.n):
            raise ValueError("edge indices out of range")
        if np.any(self.edges[:, 0] == self.edges[:, 1]):
            raise ValueError("self loops are not allowed")
        if not 0 <= self.anchor < self.n:
            raise ValueError("anchor index out of range")
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if self.initial is not None:
            self.initial = _unit_blocks(self.initial, "initial")
            if len(self.initial) != self.n:
                raise ValueError("initial guess must cover every vertex")
        if not self._weakly_connected():
            warnings.warn("pose graph is not weakly connected; solution is not unique",
                          stacklevel=2)

    def _weakly_connected(self) -> bool:
        adj = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        seen = {self.anchor}
        queue = deque([self.anchor])
        while queue:
            for k in adj[queue.popleft()]:
                if k not in seen:
                    seen.add(k)
                    queue.append(k)
        return len(seen) == self.n

    @property
    def n_blocks(self) -> int:
        return self.n


Problem = HandEyeProblem | HandEyeWorldProblem | PoseGraphProblem


# ---------------------------------------------------------------------------
# residuals, objective, gradient


def residual_handeye(x, a, b) -> np.ndarray:
    """Ambient residual (a o x) - (x o b)."""
    return aug.compose(a, x) - aug.compose(x, b)


def residual_handeye_world(x, y, a, b) -> np.ndarray:
    """Ambient residual (a o x) - (y o b)."""
    return aug.compose(a, x) - aug.compose(y, b)


def residual_slam(xi, xj, yij) -> np.ndarray:
    """Ambient residual (xi^-1 o xj) - yij.

    Invariant under a common left factor on xi and xj, which is the
    gauge freedom resolved by anchoring.
    """
    return aug.compose(aug.auq_inverse(xi), xj) - np.asarray(yij, dtype=float)


def _as_blocks(problem: Problem, x) -> np.ndarray:
    n = problem.n_blocks
    x = np.asarray(x, dtype=float)
    if x.ndim == 1 and x.size == 7 * n:
        x = x.reshape(n, 7)
    if x.shape != (n, 7):
        raise ValueError(f"expected {n} pose blocks, got shape {x.shape}")
    return x


def residuals(problem: Problem, x) -> np.ndarray:
    """Stacked residual block matrix of shape (m, 7)."""
    x = _as_blocks(problem, x)
    if isinstance(problem, HandEyeWorldProblem):
        return residual_handeye_world(x[0], x[1], problem.a, problem.b)
    if isinstance(problem, HandEyeProblem):
        return residual_handeye(x[0], problem.a, problem.b)
    xi = x[problem.edges[:, 0]]
    xj = x[problem.edges[:, 1]]
    return residual_slam(xi, xj, problem.measurements)


def _component_weights(problem: Problem) -> np.ndarray:
    return np.array([1.0] * 4 + [problem.sigma] * 3)


def objective(problem: Problem, x) -> float:
    """(1/2) sum of squared sigma-weighted residual magnitudes."""
    z = residuals(problem, x)
    with np.errstate(over="ignore"):  # overflow surfaces as inf, handled by callers
        return 0.5 * float(np.sum((z * z) @ _component_weights(problem)))


def gradient(problem: Problem, x) -> np.ndarray:
    """Ambient gradient of the objective, flattened to length 7 n."""
    x = _as_blocks(problem, x)
    z = residuals(problem, x)
    wz = z * _component_weights(problem)
    if isinstance(problem, HandEyeWorldProblem):
        jx = _compose_jac_right(problem.a, x[0])
        jy = -_compose_jac_left(problem.b, like=x[1])
        gx = np.einsum("mij,mi->j", jx, wz)
        gy = np.einsum("mij,mi->j", jy, wz)
        return np.concatenate([gx, gy])
    if isinstance(problem, HandEyeProblem):
        jx = _compose_jac_right(problem.a, x[0]) - _compose_jac_left(problem.b, like=x[0])
        return np.einsum("mij,mi->j", jx, wz)
    ji, jj = _slam_edge_jacobians(problem, x)
    grad = np.zeros((problem.n, 7))
    np.add.at(grad, problem.edges[:, 0], np.einsum("mij,mi->mj", ji, wz))
    np.add.at(grad, problem.edges[:, 1], np.einsum("mij,mi->mj", jj, wz))
    return grad.ravel()


def pose_error(x, x_true) -> tuple[np.ndarray | float, np.ndarray | float]:
    """(rotation geodesic distance in rad, translation distance).

    The rotation part 2 arccos(|<p, p_true>|) is invariant under the
    quaternion double cover.
    """
    x = np.asarray(x, dtype=float)
    x_true = np.asarray(x_true, dtype=float)
    dot = np.abs(np.sum(x[..., :4] * x_true[..., :4], axis=-1))
    rot = 2.0 * np.arccos(np.clip(dot, 0.0, 1.0))
    trans = np.linalg.norm(x[..., 4:] - x_true[..., 4:], axis=-1)
    if rot.ndim == 0:
        return float(rot), float(trans)
    return rot, trans


# ---------------------------------------------------------------------------
# jacobian blocks (ambient, 7x7 per residual)


def _d_rot_T_dq(q, t) -> np.ndarray:
    """Derivative of R(q)^T t with respect to q, shape (..., 3, 4)."""
    q0, qv = q[..., 0:1], q[..., 1:]
    col0 = 2.0 * q0 * t - 2.0 * np.cross(qv, t)
    dot = np.sum(qv * t, axis=-1)[..., None, None]
    eye = np.eye(3)
    cols = (
        2.0 * qv[..., :, None] * t[..., None, :]
        + 2.0 * dot * eye
        - 2.0 * t[..., :, None] * qv[..., None, :]
        - 2.0 * q0[..., None] * quat.cross_matrix(t)
    )
    return np.concatenate([col0[..., :, None], cols], axis=-1)


def _d_rot_dq(p, t) -> np.ndarray:
    """Derivative of R(p) t with respect to p, shape (..., 3, 4)."""
    p0, pv = p[..., 0:1], p[..., 1:]
    col0 = 2.0 * p0 * t + 2.0 * np.cross(pv, t)
    dot = np.sum(pv * t, axis=-1)[..., None, None]
    eye = np.eye(3)
    cols = (
        2.0 * pv[..., :, None] * t[..., None, :]
        + 2.0 * dot * eye
        - 2.0 * t[..., :, None] * pv[..., None, :]
        + 2.0 * p0[..., None] * quat.cross_matrix(t)
    )
    return np.concatenate([col0[..., :, None], cols], axis=-1)


def _compose_jac_left(y, like) -> np.ndarray:
    """d compose(x, y) / d x; depends only on y.  Shape (..., 7, 7)."""
    y = np.asarray(y, dtype=float)
    batch = np.broadcast_shapes(y.shape[:-1], np.shape(like)[:-1])
    out = np.zeros(batch + (7, 7))
    out[..., :4, :4] = quat.right_matrix(y[..., :4])
    out[..., 4:, 4:] = quat.rot_matrix_T(y[..., :4])
    return out


def _compose_jac_right(x, y) -> np.ndarray:
    """d compose(x, y) / d y.  Shape (..., 7, 7)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    batch = np.broadcast_shapes(x.shape[:-1], y.shape[:-1])
    out = np.zeros(batch + (7, 7))
    out[..., :4, :4] = quat.left_matrix(x[..., :4])
    out[..., 4:, :4] = _d_rot_T_dq(
        np.broadcast_to(y[..., :4], batch + (4,)), np.broadcast_to(x[..., 4:], batch + (3,))
    )
    out[..., 4:, 4:] = np.eye(3)
    return out


def _auq_inverse_jac(x) -> np.ndarray:
    """d [p*, -R(p) t] / d [p, t].  Shape (..., 7, 7)."""
    x = np.asarray(x, dtype=float)
    p, t = x[..., :4], x[..., 4:]
    out = np.zeros(x.shape[:-1] + (7, 7))
    out[..., :4, :4] = np.diag([1.0, -1.0, -1.0, -1.0])
    out[..., 4:, :4] = -_d_rot_dq(p, t)
    out[..., 4:, 4:] = -quat.rot_matrix(p)
    return out


def _slam_edge_jacobians(problem: PoseGraphProblem, x) -> tuple[np.ndarray, np.ndarray]:
    """Per-edge ambient Jacobians of the residual wrt x_i and x_j."""
    xi = x[problem.edges[:, 0]]
    xj = x[problem.edges[:, 1]]
    inv_i = aug.auq_inverse(xi)
    ji = _compose_jac_left(xj, like=xj) @ _auq_inverse_jac(xi)
    jj = _compose_jac_right(inv_i, xj)
    return ji, jj


def _block_jacobians(problem: Problem, x) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Rows of the full Jacobian as (block column index, edge rows, (m,7,7))."""
    if isinstance(problem, HandEyeWorldProblem):
        m = problem.pair_count
        rows = np.arange(m)
        return [
            (np.zeros(m, dtype=int), rows, _compose_jac_right(problem.a, x[0])),
            (np.ones(m, dtype=int), rows, -_compose_jac_left(problem.b, like=x[1])),
        ]
    if isinstance(problem, HandEyeProblem):
        m = problem.pair_count
        rows = np.arange(m)
        jac = _compose_jac_right(problem.a, x[0]) - _compose_jac_left(problem.b, like=x[0])
        return [(np.zeros(m, dtype=int), rows, jac)]
    ji, jj = _slam_edge_jacobians(problem, x)
    rows = np.arange(len(problem.edges))
    return [(problem.edges[:, 0], rows, ji), (problem.edges[:, 1], rows, jj)]


# ---------------------------------------------------------------------------
# solver


@dataclass
class SolverConfig:
    """Stopping rules, line-search policy, and restart strategy.

    The retraction is fixed: quaternion blocks are renormalized after
    every ambient update.
    """

    max_iters: int = 10_000
    grad_tol: float = 1e-10
    step_init: float = 1.0
    step_max: float = 8.0
    backtrack: float = 0.5
    armijo: float = 1e-4
    min_step: float = 1e-16
    restarts: int = 10
    seed: int = 0
    gn_refine: bool = True
    gn_max_iters: int = 60
    target_objective: float = 1e-18

    def __post_init__(self):
        if self.grad_tol <= 0 or self.min_step <= 0 or self.step_init <= 0:
            raise ValueError("tolerances and step sizes must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack factor must lie in (0, 1)")


@dataclass
class RestartRecord:
    solution: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    status: str


@dataclass
class SolveResult:
    solution: np.ndarray
    objective: float
    grad_norm: float
    iterations: int
    status: str
    restarts: list[RestartRecord] = field(default_factory=list)


def _sphere_basis(p) -> np.ndarray:
    """Orthonormal basis (4, 3) of the tangent space of S^3 at unit p."""
    u = np.asarray(p, dtype=float).copy()
    u[0] += 1.0 if u[0] >= 0.0 else -1.0
    h = np.eye(4) - (2.0 / (u @ u)) * np.outer(u, u)
    return h[:, 1:]


def _free_blocks(problem: Problem) -> np.ndarray:
    free = np.arange(problem.n_blocks)
    if isinstance(problem, PoseGraphProblem):
        free = free[free != problem.anchor]
    return free


def _project_gradient(problem: Problem, x, grad_blocks) -> np.ndarray:
    """Tangent projection per quaternion block; anchor block zeroed."""
    out = grad_blocks.copy()
    p = x[:, :4]
    radial = np.sum(out[:, :4] * p, axis=-1, keepdims=True)
    out[:, :4] -= radial * p
    if isinstance(problem, PoseGraphProblem):
        out[problem.anchor] = 0.0
    return out


def _retract(problem: Problem, x) -> np.ndarray:
    out = x.copy()
    out[:, :4] /= np.linalg.norm(out[:, :4], axis=-1, keepdims=True)
    if isinstance(problem, PoseGraphProblem):
        out[problem.anchor] = aug.IDENTITY
    return out


def _default_init(problem: Problem) -> np.ndarray:
    if isinstance(problem, PoseGraphProblem):
        return _spanning_tree_init(problem)
    return np.tile(aug.identity(), (problem.n_blocks, 1))


def _random_init(problem: Problem, rng) -> np.ndarray:
    n = problem.n_blocks
    x = np.concatenate([quat.random_unit(rng, n), rng.uniform(-1.0, 1.0, (n, 3))], axis=-1)
    if isinstance(problem, PoseGraphProblem):
        x[problem.anchor] = aug.IDENTITY
    return x


def _spanning_tree_init(problem: PoseGraphProblem) -> np.ndarray:
    """Chain poses along a BFS tree of measurements from the anchor."""
    x = np.tile(aug.identity(), (problem.n, 1))
    adj: list[list[tuple[int, int, bool]]] = [[] for _ in range(problem.n)]
    for k, (i, j) in enumerate(problem.edges):
        adj[i].append((j, k, True))
        adj[j].append((i, k, False))
    seen = {problem.anchor}
    queue = deque([problem.anchor])
    while queue:
        i = queue.popleft()
        for j, k, forward in adj[i]:
            if j in seen:
                continue
            y = problem.measurements[k]
            x[j] = aug.compose(x[i], y if forward else aug.auq_inverse(y))
            seen.add(j)
            queue.append(j)
    return x


def _check_init(problem: Problem, init) -> np.ndarray:
    init = np.asarray(init, dtype=float)
    if init.ndim == 1 and init.size == 7 * problem.n_blocks:
        init = init.reshape(problem.n_blocks, 7)
    if init.shape != (problem.n_blocks, 7):
        raise InfeasibleInit(f"initial guess must have {problem.n_blocks} pose blocks")
    dev = np.abs(np.linalg.norm(init[:, :4], axis=-1) - 1.0)
    if np.any(dev > UNIT_NORMALIZE_TOL):
        raise InfeasibleInit(f"initial quaternion norm deviates by {float(dev.max()):.3e}")
    return _retract(problem, init)


def _descend(problem: Problem, x, cfg: SolverConfig) -> RestartRecord:
    """Projected gradient descent with Armijo backtracking, then optional
    Gauss-Newton refinement.  x must be feasible."""
    f = objective(problem, x)
    if not np.isfinite(f):
        raise NonFiniteObjective("objective is not finite at the initial point")
    step = cfg.step_init
    iterations = 0
    status = STATUS_MAX_ITERS
    stall = 0
    # with refinement enabled the descent only needs to reach a basin;
    # Gauss-Newton does the last mile far more cheaply
    descent_budget = min(cfg.max_iters, 300) if cfg.gn_refine else cfg.max_iters
    for _ in range(descent_budget):
        g = _project_gradient(problem, x, gradient(problem, x).reshape(-1, 7))
        g_norm = float(np.linalg.norm(g))
        if g_norm <= cfg.grad_tol:
            status = STATUS_CONVERGED
            break
        alpha = min(2.0 * step, cfg.step_max)
        accepted = False
        while alpha >= cfg.min_step:
            x_new = _retract(problem, x - alpha * g)
            f_new = objective(problem, x_new)
            if np.isfinite(f_new) and f_new <= f - cfg.armijo * alpha * g_norm * g_norm:
                accepted = True
                break
            alpha *= cfg.backtrack
        if not accepted:
            status = STATUS_STALLED
            break
        stall = stall + 1 if f - f_new <= 1e-12 * max(f, 1e-300) else 0
        x, f, step = x_new, f_new, alpha
        iterations += 1
        if stall >= 5:
            status = STATUS_STALLED
            break

    if cfg.gn_refine:
        x, f, gn_iters = _gauss_newton(problem, x, f, cfg)
        iterations += gn_iters

    g = _project_gradient(problem, x, gradient(problem, x).reshape(-1, 7))
    g_norm = float(np.linalg.norm(g))
    if g_norm <= cfg.grad_tol:
        status = STATUS_CONVERGED
    return RestartRecord(x, f, g_norm, iterations, status)


def _gauss_newton(problem: Problem, x, f, cfg: SolverConfig):
    """Tangent-space Gauss-Newton with step halving; returns (x, f, iters)."""
    free = _free_blocks(problem)
    col_of = {int(b): 6 * k for k, b in enumerate(free)}
    sqrt_w = np.sqrt(_component_weights(problem))
    iterations = 0
    for _ in range(cfg.gn_max_iters):
        bases = {int(b): _sphere_basis(x[b, :4]) for b in free}
        z = residuals(problem, x) * sqrt_w
        m = len(z)
        jac = np.zeros((7 * m, 6 * len(free)))
        for block_idx, rows, jblocks in _block_jacobians(problem, x):
            jblocks = jblocks * sqrt_w[None, :, None]
            for b, r, jb in zip(block_idx, rows, jblocks):
                b = int(b)
                if b not in col_of:
                    continue
                c = col_of[b]
                jac[7 * r : 7 * r + 7, c : c + 3] += jb[:, :4] @ bases[b]
                jac[7 * r : 7 * r + 7, c + 3 : c + 6] += jb[:, 4:]
        delta, *_ = np.linalg.lstsq(jac, -z.ravel(), rcond=None)
        if not np.all(np.isfinite(delta)) or np.linalg.norm(delta) <= 1e-16 * (1.0 + np.linalg.norm(x)):
            break
        alpha = 1.0
        accepted = False
        while alpha >= 2.0 ** -24:
            x_new = x.copy()
            for b in free:
                d = alpha * delta[col_of[int(b)] : col_of[int(b)] + 6]
                x_new[b, :4] += bases[int(b)] @ d[:3]
                x_new[b, 4:] += d[3:]
            x_new = _retract(problem, x_new)
            f_new = objective(problem, x_new)
            if np.isfinite(f_new) and f_new < f:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            break
        improvement = f - f_new
        x, f = x_new, f_new
        iterations += 1
        if f <= 1e-30 or improvement <= 1e-15 * max(f, 1e-300):
            break
    return x, f, iterations


def solve(problem: Problem, config: SolverConfig | None = None, init=None) -> SolveResult:
    """Minimize the problem objective over the feasible pose blocks.

    Restart 0 starts from `init` when given, else from a deterministic
    default (identity blocks; spanning-tree chaining for pose graphs);
    later restarts draw random feasible points from config.seed.
    Restarting stops early once the best objective reaches
    config.target_objective.
    """
    cfg = config if config is not None else SolverConfig()
    rng = np.random.default_rng(cfg.seed)
    if init is not None:
        init = _check_init(problem, init)

    best: RestartRecord | None = None
    records: list[RestartRecord] = []
    for r in range(max(1, cfg.restarts)):
        if r == 0:
            x0 = init.copy() if init is not None else _default_init(problem)
        else:
            x0 = _random_init(problem, rng)
        record = _descend(problem, x0, cfg)
        records.append(record)
        if best is None or record.objective < best.objective:
            best = record
        if best.objective <= cfg.target_objective:
            break
    return SolveResult(
        solution=best.solution,
        objective=best.objective,
        grad_norm=best.grad_norm,
        iterations=best.iterations,
        status=best.status,
        restarts=records,
    )
