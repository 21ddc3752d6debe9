"""Pose-error kinematics and the proportional set-point controller.

The error pose between the current pose x and the target xd is
xe = x^-1 o xd = [pe, te].  Its kinematics on the pose group read

    d/dt xe = (1/2) (xe o xi_e),    xi_e = [we_quat, ve],

with we the error angular velocity and ve = 2 te_dot - R(we_quat)^T te
the generalized translation rate.  The proportional law

    xi_e = -2 [0, Kr theta_e, Kt te],    [0, theta_e] = log(pe),

drives xe to the identity.  Two closed-loop integrations are provided:

* "exponential" (default): the quaternion slot follows (1/2) pe we_quat
  and the translation slot follows

      te_dot = -Kt te + (we . te) we - (we . we) te,

  for which the Lyapunov function V = alpha |theta_e|^2 + beta |te|^2
  decays monotonically with V(T) <= V(0) exp(-2 kmin T), kmin the
  smallest gain entry.

* "twist": the literal group ODE d/dt xe = (1/2)(xe o xi_e).  Its
  translation slot works out to -Kt te + (we . te) we - (we . we)/2 te,
  whose indefinite cross terms allow |te| to grow transiently while the
  rotation error is large (see the tests for a quantified example), so
  the uniform exponential envelope above does not hold for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import augmented as aug
from . import quaternion as quat
from .errors import StepDiverged

DYNAMICS_EXPONENTIAL = "exponential"
DYNAMICS_TWIST = "twist"

# theta within this of the log branch boundary at pi gets flagged in traces.
LOG_BRANCH_MARGIN = 1e-2


@dataclass(frozen=True)
class Gains:
    """Diagonal controller gains, all entries strictly positive."""

    kr: np.ndarray
    kt: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "kr", np.asarray(self.kr, dtype=float))
        object.__setattr__(self, "kt", np.asarray(self.kt, dtype=float))
        if self.kr.shape != (3,) or self.kt.shape != (3,):
            raise ValueError("gains must be 3-vectors")
        if not (np.all(self.kr > 0.0) and np.all(self.kt > 0.0)):
            raise ValueError("gain entries must be strictly positive")

    @property
    def k_min(self) -> float:
        return float(min(self.kr.min(), self.kt.min()))


@dataclass(frozen=True)
class LyapunovWeights:
    """Positive weights of V = alpha |theta_e|^2 + beta |te|^2."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ValueError("weights must be strictly positive")


@dataclass(frozen=True)
class Twist:
    """Tangent element [w_quat, v]: angular velocity and translation rate."""

    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "w", np.asarray(self.w, dtype=float))
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        if self.w.shape[-1] != 3 or self.v.shape[-1] != 3:
            raise ValueError("twist components must have trailing dimension 3")

    def as_aq(self) -> np.ndarray:
        """Embed as the augmented vector quaternion [0, w, v]."""
        return aug.avq(self.w, self.v)


@dataclass
class ControlTrace:
    """Per-step record of a closed-loop integration."""

    time: np.ndarray
    xe: np.ndarray
    theta: np.ndarray
    te: np.ndarray
    V: np.ndarray
    we: np.ndarray
    dt: float
    renorm: np.ndarray
    near_branch: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.time) - 1


@dataclass
class EnsembleResult:
    """Lyapunov traces of a batch of independent closed loops."""

    V: np.ndarray
    xe_final: np.ndarray
    max_renorm: np.ndarray
    dt: float


def error_auq(x, xd) -> np.ndarray:
    """Pose error xe = x^-1 o xd = [pe, -R(pe)^T t + td]."""
    return aug.compose(aug.auq_inverse(x), xd)


def error_angular_velocity(pe, w, wd) -> np.ndarray:
    """Error angular velocity: vector part of wd_quat - pe* w_quat pe."""
    pe = quat._as_quat(pe)
    sandwich = quat.qmul(quat.qmul(quat.qconj(pe), quat.vector_quat(w)), pe)
    return np.asarray(wd, dtype=float) - sandwich[..., 1:]


def twist_from_error_rates(xe, te_dot, we) -> Twist:
    """Twist [we_quat, ve] with ve = 2 te_dot - R(we_quat)^T te.

    This is the defining relation making d/dt xe = (1/2)(xe o xi_e) hold;
    R is the (non-unit) rotation-matrix polynomial of the vector
    quaternion [0, we], so R^T te = 2 (we . te) we - |we|^2 te.
    """
    te = aug.trans_part(xe)
    ve = 2.0 * np.asarray(te_dot, dtype=float) - quat.rot_apply_T(quat.vector_quat(we), te)
    return Twist(np.asarray(we, dtype=float), ve)


def proportional_control(xe, gains: Gains) -> Twist:
    """Proportional law xi_e = -2 [0, Kr theta_e, Kt te]."""
    xe = aug._as_aq(xe)
    theta = quat.qlog_vec(xe[..., :4])
    return Twist(-2.0 * gains.kr * theta, -2.0 * gains.kt * xe[..., 4:])


def state_derivative(xe, xi: Twist) -> np.ndarray:
    """Group tangent (1/2)(xe o xi) as a general AQ."""
    return 0.5 * aug.compose(xe, xi.as_aq())


def lyapunov(xe, weights: LyapunovWeights = LyapunovWeights()) -> np.ndarray | float:
    """V = alpha |theta_e|^2 + beta |te|^2."""
    xe = aug._as_aq(xe)
    theta = quat.qlog_vec(xe[..., :4])
    return weights.alpha * np.sum(theta * theta, axis=-1) + weights.beta * np.sum(
        xe[..., 4:] ** 2, axis=-1
    )


def _closed_loop_derivative(xe, kr, kt, dynamics: str) -> np.ndarray:
    """Batched derivative of the closed loop under the proportional law."""
    p, t = xe[..., :4], xe[..., 4:]
    theta = quat.qlog_vec(p)
    w = -2.0 * kr * theta
    if dynamics == DYNAMICS_TWIST:
        xi = aug.avq(w, -2.0 * kt * t)
        return 0.5 * aug.compose(xe, xi)
    p_dot = 0.5 * quat.qmul(p, quat.vector_quat(w))
    wt = np.sum(w * t, axis=-1, keepdims=True)
    ww = np.sum(w * w, axis=-1, keepdims=True)
    t_dot = -kt * t + wt * w - ww * t
    return np.concatenate([p_dot, t_dot], axis=-1)


def _check_dynamics(dynamics: str) -> str:
    if dynamics not in (DYNAMICS_EXPONENTIAL, DYNAMICS_TWIST):
        raise ValueError(f"unknown dynamics {dynamics!r}")
    return dynamics


def _rk4_step(xe, kr, kt, dt, dynamics):
    """One classical Runge-Kutta step plus renormalization.

    Returns the renormalized state and the pre-normalization norm residual.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _closed_loop_derivative(xe, kr, kt, dynamics)
        k2 = _closed_loop_derivative(xe + 0.5 * dt * k1, kr, kt, dynamics)
        k3 = _closed_loop_derivative(xe + 0.5 * dt * k2, kr, kt, dynamics)
        k4 = _closed_loop_derivative(xe + dt * k3, kr, kt, dynamics)
        out = xe + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        norm = np.linalg.norm(out[..., :4], axis=-1, keepdims=True)
        residual = np.abs(norm[..., 0] - 1.0)
        out = np.concatenate([out[..., :4] / norm, out[..., 4:]], axis=-1)
    return out, residual


def integrate(
    x0,
    xd,
    gains: Gains,
    dt: float,
    steps: int,
    weights: LyapunovWeights = LyapunovWeights(),
    dynamics: str = DYNAMICS_EXPONENTIAL,
) -> ControlTrace:
    """Integrate the closed loop from x0 toward xd with fixed-step RK4.

    The quaternion part is renormalized after every step and residuals
    recorded; StepDiverged is raised if the state leaves the finite range.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    _check_dynamics(dynamics)
    x0 = aug.as_auq(np.asarray(x0, dtype=float))
    xd = aug.as_auq(np.asarray(xd, dtype=float))
    xe = error_auq(x0, xd)

    n = steps + 1
    trace = ControlTrace(
        time=np.arange(n) * dt,
        xe=np.zeros((n, 7)),
        theta=np.zeros((n, 3)),
        te=np.zeros((n, 3)),
        V=np.zeros(n),
        we=np.zeros((n, 3)),
        dt=dt,
        renorm=np.zeros(n),
        near_branch=np.zeros(n, dtype=bool),
    )

    def record(i, state, residual):
        theta = quat.qlog_vec(state[:4])
        trace.xe[i] = state
        trace.theta[i] = theta
        trace.te[i] = state[4:]
        trace.V[i] = weights.alpha * theta @ theta + weights.beta * state[4:] @ state[4:]
        trace.we[i] = -2.0 * gains.kr * theta
        trace.renorm[i] = residual
        trace.near_branch[i] = np.linalg.norm(theta) >= np.pi - LOG_BRANCH_MARGIN

    record(0, xe, 0.0)
    for i in range(1, n):
        xe, residual = _rk4_step(xe, gains.kr, gains.kt, dt, dynamics)
        if not np.all(np.isfinite(xe)):
            raise StepDiverged(f"non-finite state at step {i}")
        record(i, xe, float(residual))
    return trace


def integrate_batch(
    x0,
    xd,
    kr,
    kt,
    dt: float,
    steps: int,
    weights: LyapunovWeights = LyapunovWeights(),
    dynamics: str = DYNAMICS_EXPONENTIAL,
) -> EnsembleResult:
    """Integrate a batch of independent closed loops, tracing only V.

    x0, xd have shape (B, 7); kr, kt shape (B, 3).  Much faster than B
    separate integrate calls; used by the decay-bound verification.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    _check_dynamics(dynamics)
    xe = error_auq(aug.as_auq(np.asarray(x0, dtype=float)), aug.as_auq(np.asarray(xd, dtype=float)))
    kr = np.asarray(kr, dtype=float)
    kt = np.asarray(kt, dtype=float)
    if not (np.all(kr > 0.0) and np.all(kt > 0.0)):
        raise ValueError("gain entries must be strictly positive")

    batch = xe.shape[0]
    V = np.zeros((batch, steps + 1))
    max_renorm = np.zeros(batch)

    def v_of(state):
        theta = quat.qlog_vec(state[..., :4])
        return weights.alpha * np.sum(theta * theta, axis=-1) + weights.beta * np.sum(
            state[..., 4:] ** 2, axis=-1
        )

    V[:, 0] = v_of(xe)
    for i in range(1, steps + 1):
        xe, residual = _rk4_step(xe, kr, kt, dt, dynamics)
        if not np.all(np.isfinite(xe)):
            raise StepDiverged(f"non-finite state at step {i}")
        np.maximum(max_renorm, residual, out=max_renorm)
        V[:, i] = v_of(xe)
    return EnsembleResult(V=V, xe_final=xe, max_renorm=max_renorm, dt=dt)
