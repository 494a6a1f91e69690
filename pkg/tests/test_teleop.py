import numpy as np
import pytest

from snaketeleop import TeleopInput, emergence_mask, make_params, teleop_tick
from snaketeleop.kinematics import link_frames
from snaketeleop.teleop import initial_state, jog_last_module, pivot_tick


def test_emergence_mask_at_zero_feed(params30):
    mask = emergence_mask(0.0, params30)
    expected = np.zeros(31, dtype=int)
    expected[[0, 29, 30]] = 1
    np.testing.assert_array_equal(mask, expected)


def test_emergence_mask_one_height(params30):
    mask = emergence_mask(params30.h, params30)
    expected = np.zeros(31, dtype=int)
    expected[[0, 28, 29, 30]] = 1
    np.testing.assert_array_equal(mask, expected)


def test_emergence_mask_saturates(params30):
    mask = emergence_mask((params30.n - 2) * params30.h, params30)
    np.testing.assert_array_equal(mask, np.ones(31, dtype=int))
    mask2 = emergence_mask(100.0, params30)
    np.testing.assert_array_equal(mask2, np.ones(31, dtype=int))


def test_emergence_mask_rejects_negative(params30):
    with pytest.raises(ValueError):
        emergence_mask(-0.01, params30)


def test_jog_sets_only_last_module(params8):
    st = initial_state(params8)
    st2 = jog_last_module(st, (0.2, -0.1), params8)
    n = params8.n
    assert st2.q[n - 1] == pytest.approx(0.2)
    assert st2.q[n] == pytest.approx(-0.1)
    np.testing.assert_array_equal(st2.q[: n - 1], st.q[: n - 1])


def test_jog_clamps_to_limits(params8):
    st = initial_state(params8)
    st2 = jog_last_module(st, (5.0, -5.0), params8)
    n = params8.n
    assert st2.q[n - 1] == params8.q_max[n - 1]
    assert st2.q[n] == params8.q_min[n]


def test_jog_idempotent_at_current_angles(params8):
    st = initial_state(params8)
    st = jog_last_module(st, (0.1, 0.2), params8)
    st2 = jog_last_module(st, (0.1, 0.2), params8)
    np.testing.assert_array_equal(st.q, st2.q)


def test_dispatch_modes(params8):
    st = initial_state(params8)
    st_idle = teleop_tick(st, TeleopInput(), params8)
    assert st_idle.mode == "idle"
    st_ftl = teleop_tick(st, TeleopInput(b1=True), params8, n_iter=5)
    assert st_ftl.mode == "ftl"
    st_piv = teleop_tick(st, TeleopInput(b2=True), params8, n_iter=5)
    assert st_piv.mode == "pivot"
    # b1 wins over b2
    st_both = teleop_tick(st, TeleopInput(b1=True, b2=True), params8, n_iter=5)
    assert st_both.mode == "ftl"


def test_straight_ftl_advances_feeder(params30):
    st = initial_state(params30)
    for t in range(20):
        st = teleop_tick(st, TeleopInput(b1=True, seq=t), params30)
    ds = params30.h / 20
    assert st.q[0] == pytest.approx(20 * ds, rel=0.05)
    assert np.abs(st.q[1:]).max() < 1e-9


def test_masked_joints_stay_zero(params30):
    st = initial_state(params30)
    for t in range(15):
        st = teleop_tick(st, TeleopInput(pitch=0.15, yaw=-0.1, b1=True, seq=t), params30)
    active = emergence_mask(st.q[0], params30)
    in_tube = (active == 0)
    assert np.all(st.q[in_tube] == 0.0)


def test_ftl_respects_limits(params30):
    st = initial_state(params30)
    for t in range(25):
        st = teleop_tick(st, TeleopInput(pitch=0.3, yaw=0.3, b1=True, seq=t), params30)
        assert np.all(st.q >= params30.q_min) and np.all(st.q <= params30.q_max)


def test_tick_determinism(params8):
    a = initial_state(params8)
    b = initial_state(params8)
    for t in range(5):
        inp = TeleopInput(pitch=0.05 * t, yaw=-0.02 * t, b1=(t % 2 == 0), seq=t)
        a = teleop_tick(a, inp, params8, n_iter=10)
        b = teleop_tick(b, inp, params8, n_iter=10)
    np.testing.assert_array_equal(a.q, b.q)
    assert a.mode == b.mode


def test_pivot_fixed_point(params30):
    # advance first so the pivot has free joints to work with
    st = initial_state(params30)
    for t in range(10):
        st = teleop_tick(st, TeleopInput(b1=True, seq=t), params30)
    frames = link_frames(st.q, params30)
    z = frames[-1][:3, 2]
    from snaketeleop.shaping import pointing_angles

    pitch, yaw = pointing_angles(z)
    st2 = pivot_tick(st, (pitch, yaw), params30, n_iter=10)
    np.testing.assert_allclose(st2.q, st.q, atol=1e-6)


def test_feeder_never_clamped_forward_only(params30):
    # the feeder may legitimately retract when the solver demands it: drive
    # forward, then command a strong back-tilt and confirm sign freedom
    st = initial_state(params30)
    for t in range(40):
        st = teleop_tick(st, TeleopInput(b1=True, seq=t), params30)
    q1_fwd = st.q[0]
    assert q1_fwd > 0
    # nothing in the state machine constrains q1 increments to be positive:
    # check the solver output sign is free by examining one step backward
    from snaketeleop import clik_step, stack, evaluate_task, Task
    from snaketeleop.kinematics import EE

    frames = link_frames(st.q, params30)
    target = frames[-1][:3, 3] - np.array([0.0, 0.0, 3 * params30.h])
    ev = stack([evaluate_task(Task("3T", target, link=EE), st.q, params30, frames=frames)])
    qdot = clik_step(st.q, [ev], emergence_mask(st.q[0], params30), params30)
    assert qdot[0] < 0.0


def test_tick_counter_and_target_path(params8):
    st = initial_state(params8)
    assert st.tick == 0
    st = teleop_tick(st, TeleopInput(b1=True), params8, n_iter=3)
    assert st.tick == 1
    assert st.target_path is not None
    st = teleop_tick(st, TeleopInput(), params8)
    assert st.tick == 2
