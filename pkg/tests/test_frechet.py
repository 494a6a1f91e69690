import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from snaketeleop import backbone, discrete_frechet, frechet_jacobian

from conftest import random_q
from oracles import frechet_bruteforce


def curves(max_len=6):
    coord = st.floats(-5, 5, allow_nan=False, width=32)
    point = st.tuples(coord, coord, coord)
    return st.lists(point, min_size=1, max_size=max_len).map(np.array)


def test_identical_curves_zero(rng):
    P = rng.normal(size=(8, 3))
    assert discrete_frechet(P, P) == 0.0


def test_uniform_translation_gives_offset_norm(rng):
    P = rng.normal(size=(7, 3))
    v = np.array([0.3, -0.2, 0.9])
    assert abs(discrete_frechet(P + v, P) - np.linalg.norm(v)) < 1e-12


def test_known_three_point_case():
    P_d = np.array([[0, 0, 0], [3, 0, 0]], dtype=float)
    P = np.array([[0, 1, 0], [1.5, -1, 0], [3, 1, 0]], dtype=float)
    expected = frechet_bruteforce(P_d, P)
    assert discrete_frechet(P_d, P) == pytest.approx(expected, abs=1e-12)


def test_empty_curve_rejected():
    with pytest.raises(ValueError):
        discrete_frechet(np.zeros((0, 3)), np.zeros((2, 3)))


@settings(max_examples=200, deadline=None)
@given(curves(), curves())
def test_dp_equals_bruteforce(P, Q):
    assert discrete_frechet(P, Q) == pytest.approx(frechet_bruteforce(P, Q), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(curves(), curves())
def test_symmetry(P, Q):
    assert discrete_frechet(P, Q) == pytest.approx(discrete_frechet(Q, P), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(curves(), curves())
def test_hausdorff_style_lower_bound(P, Q):
    dist = np.linalg.norm(P[:, None, :] - Q[None, :, :], axis=2)
    lower = max(dist.min(axis=1).max(), dist.min(axis=0).max())
    assert discrete_frechet(P, Q) >= lower - 1e-12


def test_coupling_matrix_diagnostics(rng):
    P = rng.normal(size=(5, 3))
    Q = rng.normal(size=(4, 3))
    d, ca = discrete_frechet(P, Q, return_coupling_matrix=True)
    assert ca.shape == (5, 4)
    assert d == ca[-1, -1]
    assert d == pytest.approx(discrete_frechet(P, Q), abs=0)


def test_jacobian_at_own_backbone_nonnegative_forward_differences(params4, rng):
    # d_F(P_d, P) = 0 at the target, so every forward difference is >= 0
    q = random_q(rng, params4)
    P_d = backbone(q, params4)
    J = frechet_jacobian(q, params4.delta, P_d, params4)
    assert J.shape == (1, params4.dof)
    assert np.all(J >= 0.0)


def test_jacobian_matches_independent_bruteforce_evaluation(params4, rng):
    # recompute the one-sided differences with the enumeration oracle
    for _ in range(5):
        q = random_q(rng, params4)
        q_d = random_q(rng, params4, feed=0.0)
        P_d = backbone(q_d, params4)[:5]  # <= 6 vertices for the oracle
        delta = params4.delta
        J = frechet_jacobian(q, delta, P_d, params4)
        s0 = frechet_bruteforce(P_d, backbone(q, params4))
        for i in range(params4.dof):
            qp = q.copy()
            qp[i] += delta
            si = frechet_bruteforce(P_d, backbone(qp, params4))
            assert J[0, i] == pytest.approx((si - s0) / delta, abs=1e-9)


def test_jacobian_mask_zeroes_entries(params4, rng):
    q = random_q(rng, params4)
    P_d = backbone(random_q(rng, params4), params4)
    mask = np.array([1, 0, 1, 0, 1])
    J = frechet_jacobian(q, params4.delta, P_d, params4, mask=mask)
    assert J[0, 1] == 0.0
    assert J[0, 3] == 0.0


def test_jacobian_rejects_bad_delta(params4):
    with pytest.raises(ValueError):
        frechet_jacobian(np.zeros(5), 0.0, np.zeros((3, 3)), params4)


def test_jacobian_order_independence(params6, rng):
    # contract: result identical regardless of evaluation order; spot-check
    # by comparing against an entry-by-entry recomputation
    q = random_q(rng, params6)
    P_d = backbone(random_q(rng, params6), params6)
    J = frechet_jacobian(q, params6.delta, P_d, params6)
    d0 = discrete_frechet(P_d, backbone(q, params6))
    for i in reversed(range(params6.dof)):
        qp = q.copy()
        qp[i] += params6.delta
        di = discrete_frechet(P_d, backbone(qp, params6))
        assert J[0, i] == (di - d0) / params6.delta
