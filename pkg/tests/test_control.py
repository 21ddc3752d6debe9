import numpy as np
import pytest

from auquat import augmented as aug
from auquat import control as ctl
from auquat import quaternion as qt
from auquat.errors import StepDiverged
from auquat.tolerances import ALGEBRA_ATOL

RNG = np.random.default_rng(42424)
N_SAMPLES = 10_000


def _rand_auq(n=None, rng=RNG):
    q = qt.random_unit(rng, n)
    t = rng.uniform(-1.0, 1.0, (3,) if n is None else (n, 3))
    return np.concatenate([q, t], axis=-1)


def _rand_gains(rng=RNG):
    return ctl.Gains(rng.uniform(0.2, 2.0, 3), rng.uniform(0.2, 2.0, 3))


# ---------------------------------------------------------------------------
# error pose


def test_error_zero_when_on_target():
    x = _rand_auq()
    np.testing.assert_allclose(ctl.error_auq(x, x), aug.IDENTITY, atol=ALGEBRA_ATOL)


def test_error_from_identity_is_target():
    xd = _rand_auq()
    np.testing.assert_allclose(ctl.error_auq(aug.IDENTITY, xd), xd, atol=ALGEBRA_ATOL)


def test_error_closed_form_agrees_with_composition():
    x = _rand_auq(N_SAMPLES)
    xd = _rand_auq(N_SAMPLES)
    composed = ctl.error_auq(x, xd)
    pe = qt.qmul(qt.qconj(x[:, :4]), xd[:, :4])
    te = -qt.rot_apply_T(pe, x[:, 4:]) + xd[:, 4:]
    np.testing.assert_allclose(composed, np.concatenate([pe, te], axis=-1), atol=ALGEBRA_ATOL)
    # rotation error factorizes through the individual rotation matrices
    np.testing.assert_allclose(
        qt.rot_matrix(pe),
        np.einsum("bji,bjk->bik", qt.rot_matrix(x[:, :4]), qt.rot_matrix(xd[:, :4])),
        atol=ALGEBRA_ATOL,
    )


# ---------------------------------------------------------------------------
# error angular velocity


def test_error_angular_velocity_trivial():
    w = np.array([0.1, -0.2, 0.3])
    np.testing.assert_allclose(
        ctl.error_angular_velocity(qt.IDENTITY, w, w), np.zeros(3), atol=ALGEBRA_ATOL
    )
    wd = np.array([1.0, 2.0, 3.0])
    np.testing.assert_allclose(
        ctl.error_angular_velocity(qt.IDENTITY, w, wd), wd - w, atol=ALGEBRA_ATOL
    )


def test_error_angular_velocity_is_vector_quaternion():
    pe = qt.random_unit(RNG, N_SAMPLES)
    w = RNG.standard_normal((N_SAMPLES, 3))
    sandwich = qt.qmul(qt.qmul(qt.qconj(pe), qt.vector_quat(w)), pe)
    np.testing.assert_allclose(sandwich[:, 0], 0.0, atol=ALGEBRA_ATOL)


def test_error_angular_velocity_matrix_oracle():
    pe = qt.random_unit(RNG, 1000)
    w = RNG.standard_normal((1000, 3))
    wd = RNG.standard_normal((1000, 3))
    got = ctl.error_angular_velocity(pe, w, wd)
    want = wd - qt.rot_apply_T(pe, w)
    np.testing.assert_allclose(got, want, atol=ALGEBRA_ATOL)


# ---------------------------------------------------------------------------
# twist from rates and the state derivative


def test_twist_trivial_cases():
    xe = _rand_auq()
    d = np.array([0.5, -1.0, 2.0])
    xi = ctl.twist_from_error_rates(xe, d, np.zeros(3))
    np.testing.assert_allclose(xi.v, 2.0 * d, atol=0)
    xe_origin = aug.aq(xe[:4], np.zeros(3))
    we = np.array([0.3, 0.1, -0.2])
    xi = ctl.twist_from_error_rates(xe_origin, d, we)
    np.testing.assert_allclose(xi.v, 2.0 * d, atol=0)


def test_twist_substitution_reconstructs_rates():
    # plugging the twist back into the group derivative must reproduce
    # [pe we_quat / 2, te_dot]
    for _ in range(200):
        xe = _rand_auq()
        te_dot = RNG.standard_normal(3)
        we = RNG.standard_normal(3)
        xi = ctl.twist_from_error_rates(xe, te_dot, we)
        xdot = ctl.state_derivative(xe, xi)
        np.testing.assert_allclose(
            xdot[:4], 0.5 * qt.qmul(xe[:4], qt.vector_quat(we)), atol=ALGEBRA_ATOL
        )
        np.testing.assert_allclose(xdot[4:], te_dot, atol=ALGEBRA_ATOL)


def test_twist_matches_corrected_expansion():
    # expanding ve = 2 te_dot - R(we_quat)^T te with a zero scalar slot
    # gives 2 te_dot - 2 (we.te) we + (we.we) te
    for _ in range(200):
        xe = _rand_auq()
        te = xe[4:]
        te_dot = RNG.standard_normal(3)
        we = RNG.standard_normal(3)
        xi = ctl.twist_from_error_rates(xe, te_dot, we)
        expansion = 2.0 * te_dot - 2.0 * (we @ te) * we + (we @ we) * te
        np.testing.assert_allclose(xi.v, expansion, atol=ALGEBRA_ATOL)


def test_state_derivative_cases():
    xe = _rand_auq()
    zero = ctl.Twist(np.zeros(3), np.zeros(3))
    np.testing.assert_allclose(ctl.state_derivative(xe, zero), np.zeros(7), atol=0)
    w = np.array([0.3, -0.6, 0.2])
    v = np.array([1.0, 0.0, -2.0])
    at_identity = ctl.state_derivative(aug.IDENTITY, ctl.Twist(w, v))
    np.testing.assert_allclose(at_identity, np.concatenate([[0.0], 0.5 * w, 0.5 * v]), atol=0)
    xi = ctl.Twist(w, v)
    got = ctl.state_derivative(xe, xi)
    np.testing.assert_allclose(
        got[:4], 0.5 * qt.qmul(xe[:4], qt.vector_quat(w)), atol=ALGEBRA_ATOL
    )


# ---------------------------------------------------------------------------
# proportional law and Lyapunov function


def test_proportional_control_values():
    g = ctl.Gains(np.ones(3), np.ones(3))
    xi = ctl.proportional_control(aug.IDENTITY, g)
    np.testing.assert_array_equal(xi.w, np.zeros(3))
    np.testing.assert_array_equal(xi.v, np.zeros(3))
    xi = ctl.proportional_control([1.0, 0, 0, 0, 1, 0, 0], g)
    np.testing.assert_array_equal(xi.w, np.zeros(3))
    np.testing.assert_allclose(xi.v, [-2.0, 0.0, 0.0], atol=0)


def test_proportional_control_linear_in_gains():
    xe = _rand_auq()
    g1 = ctl.Gains([1.0, 1, 1], [1.0, 1, 1])
    g2 = ctl.Gains([2.0, 2, 2], [1.0, 1, 1])
    np.testing.assert_allclose(
        ctl.proportional_control(xe, g2).w, 2.0 * ctl.proportional_control(xe, g1).w, atol=0
    )


def test_gains_validation():
    with pytest.raises(ValueError):
        ctl.Gains([1.0, 0.0, 1.0], [1.0, 1.0, 1.0])
    g = ctl.Gains([0.5, 2.0, 1.0], [0.3, 1.0, 1.0])
    assert g.k_min == 0.3


def test_lyapunov_values():
    assert ctl.lyapunov(aug.IDENTITY) == 0.0
    assert ctl.lyapunov([1.0, 0, 0, 0, 3, 4, 0]) == pytest.approx(25.0, abs=1e-12)
    c, s = np.cos(np.pi / 2), np.sin(np.pi / 2)
    v = ctl.lyapunov([c, s, 0, 0, 0, 0, 0], ctl.LyapunovWeights(alpha=2.0, beta=1.0))
    assert v == pytest.approx(2.0 * (np.pi / 2) ** 2, rel=1e-12)


def test_lyapunov_weights_validation():
    with pytest.raises(ValueError):
        ctl.LyapunovWeights(alpha=0.0)


# ---------------------------------------------------------------------------
# closed-loop integration


def test_constant_trace_at_target():
    x = _rand_auq()
    trace = ctl.integrate(x, x, _rand_gains(), dt=1e-3, steps=50)
    np.testing.assert_allclose(trace.V, 0.0, atol=1e-28)
    np.testing.assert_allclose(
        trace.xe, np.broadcast_to(aug.IDENTITY, trace.xe.shape), atol=1e-14
    )


def test_pure_translation_decays_like_scalar_ode():
    k = 0.8
    gains = ctl.Gains(np.ones(3), k * np.ones(3))
    x0 = np.array([1.0, 0, 0, 0, 0.0, 0.0, 0.0])
    xd = np.array([1.0, 0, 0, 0, 0.7, -0.4, 0.2])
    dt, steps = 1e-3, 2000
    trace = ctl.integrate(x0, xd, gains, dt, steps)
    expected = trace.te[0] * np.exp(-k * trace.time[-1])
    np.testing.assert_allclose(trace.te[-1], expected, rtol=1e-10)
    # same closed form under the literal group dynamics (we = 0)
    trace2 = ctl.integrate(x0, xd, gains, dt, steps, dynamics=ctl.DYNAMICS_TWIST)
    np.testing.assert_allclose(trace2.te[-1], expected, rtol=1e-10)


def test_decay_envelope_small_ensemble():
    rng = np.random.default_rng(7)
    n = 20
    x0 = _rand_auq(n, rng)
    xd = _rand_auq(n, rng)
    kr = rng.uniform(0.2, 2.0, (n, 3))
    kt = rng.uniform(0.2, 2.0, (n, 3))
    dt, steps = 1e-3, 2000
    res = ctl.integrate_batch(x0, xd, kr, kt, dt, steps)
    k_min = np.minimum(kr.min(axis=1), kt.min(axis=1))
    bound = res.V[:, :1] * np.exp(-2.0 * k_min[:, None] * np.arange(steps + 1) * dt)
    assert np.all(res.V <= bound * 1.01 + 1e-300)
    assert np.all(np.diff(res.V, axis=1) <= 1e-9)
    assert res.max_renorm.max() <= 1e-8


def test_single_trace_matches_batch():
    rng = np.random.default_rng(3)
    x0, xd = _rand_auq(rng=rng), _rand_auq(rng=rng)
    gains = _rand_gains(rng)
    trace = ctl.integrate(x0, xd, gains, 1e-3, 200)
    res = ctl.integrate_batch(
        x0[None], xd[None], gains.kr[None], gains.kt[None], 1e-3, 200
    )
    np.testing.assert_allclose(trace.V, res.V[0], atol=0)
    np.testing.assert_allclose(trace.xe[-1], res.xe_final[0], atol=0)


def test_twist_dynamics_can_grow_transiently():
    # rotation and translation errors aligned on one axis: the group-ODE
    # translation slot -Kt te + (we.te) we - (we.we)/2 te becomes
    # (-kt + |we|^2 / 2) te, which grows while the rotation error is large
    angle = np.pi / 2
    xe0 = np.array([np.cos(angle / 2), np.sin(angle / 2), 0.0, 0.0, 1.0, 0.0, 0.0])
    x0 = aug.IDENTITY.copy()
    xd = xe0  # from identity, the error equals the target
    gains = ctl.Gains([2.0, 2.0, 2.0], [0.2, 0.2, 0.2])
    twist = ctl.integrate(x0, xd, gains, 1e-3, 3000, dynamics=ctl.DYNAMICS_TWIST)
    assert twist.V.max() > twist.V[0] * 1.5  # transient growth
    exponential = ctl.integrate(x0, xd, gains, 1e-3, 3000)
    assert np.all(np.diff(exponential.V) <= 1e-9)  # default stays monotone


def test_group_translation_slot_differs_by_half_w2_te():
    # quantifies the gap between the two closed-loop derivatives
    for _ in range(100):
        xe = _rand_auq()
        gains = _rand_gains()
        xi = ctl.proportional_control(xe, gains)
        group = ctl.state_derivative(xe, xi)
        te = xe[4:]
        we = xi.w
        expected_gap = 0.5 * (we @ we) * te
        exp_td = -gains.kt * te + (we @ te) * we - (we @ we) * te
        np.testing.assert_allclose(group[4:] - exp_td, expected_gap, atol=ALGEBRA_ATOL)


def test_near_branch_flagging():
    # error rotation close to the log branch boundary at theta = pi
    eps = 5e-3
    pe = np.array([-np.cos(eps), np.sin(eps), 0.0, 0.0])
    xd = aug.aq(pe, np.zeros(3))
    trace = ctl.integrate(aug.IDENTITY, xd, _rand_gains(), 1e-3, 5)
    assert trace.near_branch[0]


def test_diverging_step_raises():
    with pytest.raises(StepDiverged):
        ctl.integrate(_rand_auq(), _rand_auq(), _rand_gains(), dt=1e300, steps=5)


def test_integrate_rejects_bad_dt():
    with pytest.raises(ValueError):
        ctl.integrate(_rand_auq(), _rand_auq(), _rand_gains(), dt=0.0, steps=5)


def test_unknown_dynamics_rejected():
    with pytest.raises(ValueError):
        ctl.integrate(_rand_auq(), _rand_auq(), _rand_gains(), 1e-3, 5, dynamics="euler")
