"""End-to-end force distribution: assembly, solve invariants, limits."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from combalance.centroidal import (
    CentroidalSetup,
    DecisionVector,
    assemble,
    desired_y,
    hand_force_world,
    newton_euler_rows,
    reference_csa,
    solve_centroidal,
    world_wrench,
)
from combalance.constraints import WRENCH_OFFSETS, Y_DIM, SlidingSpec
from combalance.csa import ContactMode, ContactPatch, NormalAxis, contains, convex_weights
from combalance.errors import BalanceInfeasible, DimensionMismatch
from combalance.spatial import ContactPose, Wrench, frame_from_x_axis, vec3, yaw_rotation

MASS = 39.0


def foot(y, yaw=0.0):
    return ContactPatch(
        pose=ContactPose(position=vec3(0.0, y, 0.0), rotation=yaw_rotation(yaw)),
        half_x=0.07,
        half_y=0.04,
        mu=0.7,
    )


def wall_hand(mode=ContactMode.FIXED, mu=0.5):
    return ContactPatch(
        pose=ContactPose(
            position=vec3(0.45, 0.0, 1.2),
            rotation=frame_from_x_axis(vec3(-1.0, 0.0, 0.0)),
        ),
        half_x=0.05,
        half_y=0.05,
        mu=mu,
        mode=mode,
        normal_axis=NormalAxis.X,
    )


def stance(force=30.0, **kwargs):
    return CentroidalSetup(
        mass=MASS,
        right_foot=foot(-0.095),
        left_foot=foot(0.095),
        hand=wall_hand(),
        hand_target=SlidingSpec(force),
        **kwargs,
    )


def test_decision_vector_round_trip():
    rng = np.random.default_rng(101)
    y = rng.normal(size=Y_DIM)
    vec = DecisionVector.from_array(y)
    assert_allclose(vec.to_array(), y, atol=0)
    assert vec.w_rf.frame == "rf" and vec.w_rh.frame == "rh"
    with pytest.raises(DimensionMismatch):
        DecisionVector.from_array(np.zeros(20))


def test_setup_validation():
    with pytest.raises(DimensionMismatch):
        CentroidalSetup(
            mass=0.0, right_foot=foot(-0.1), left_foot=foot(0.1), hand=wall_hand()
        )
    with pytest.raises(DimensionMismatch):
        stance(csa_middle="midpoint")
    with pytest.raises(DimensionMismatch):
        stance(foot_fz_limits=((0.0, 100.0),))


def test_hand_force_world_direction():
    setup = stance(force=40.0)
    f = hand_force_world(setup)
    # Reaction on the robot points away from the wall.
    assert_allclose(f, [-40.0, 0.0, 0.0], atol=1e-12)
    slide = SlidingSpec(40.0, 0.0, 0.5)
    f = hand_force_world(setup, slide)
    assert f[0] == pytest.approx(-40.0)
    assert np.linalg.norm(f[1:]) == pytest.approx(20.0)


def test_desired_y_targets():
    setup = stance(force=30.0)
    csa = reference_csa(setup)
    des = desired_y(setup, csa)
    assert_allclose(des.com[:2], csa.centroid(), atol=1e-12)
    assert des.com[2] == 0.0
    # Feet split the leftover weight evenly; hand takes its local target.
    f_hand = hand_force_world(setup)
    leftover = MASS * 9.81 - f_hand[2]
    assert des.w_rf.force[2] == pytest.approx(0.5 * leftover)
    assert des.w_lf.force[2] == pytest.approx(0.5 * leftover)
    assert des.w_rh.force[0] == pytest.approx(30.0)
    assert not des.w_rh.torque.any()


def test_desired_y_chebyshev_option():
    setup = stance(force=30.0, csa_middle="chebyshev")
    csa = reference_csa(setup)
    assert_allclose(desired_y(setup, csa).com[:2], csa.chebyshev_center(), atol=1e-12)


def test_assemble_shapes_and_blocks():
    setup = stance(force=25.0)
    prob = assemble(setup)
    assert prob.P.shape == (Y_DIM, Y_DIM)
    assert np.array_equal(prob.P, 2.0 * np.eye(Y_DIM))
    assert prob.G.shape == (60, Y_DIM)
    assert prob.A.shape == (13, Y_DIM)
    # Rows 0-5 balance forces; 6-11 pin the hand force; row 12 pins com z.
    A_ne, b_ne = newton_euler_rows(setup)
    assert_allclose(prob.A[:6], A_ne, atol=0)
    assert_allclose(prob.b[:6], b_ne, atol=0)
    assert prob.b[6] == 25.0
    assert prob.A[12, 2] == 1.0 and prob.b[12] == 0.0
    des = desired_y(setup).to_array()
    assert_allclose(prob.q, -2.0 * des, atol=0)


def test_assemble_com_fix_rows():
    setup = stance(force=10.0, com_fix=np.array([0.01, -0.02]))
    prob = assemble(setup)
    assert prob.A.shape == (15, Y_DIM)
    assert prob.A[13, 0] == 1.0 and prob.b[13] == pytest.approx(0.01)
    assert prob.A[14, 1] == 1.0 and prob.b[14] == pytest.approx(-0.02)


def test_solve_invariants_default_stance():
    result = solve_centroidal(stance(force=30.0))
    y = result.y
    # Vertical balance over world wrenches.
    fz = sum(w.force[2] for w in result.world_wrenches)
    assert fz == pytest.approx(MASS * 9.81, abs=1e-8)
    assert result.newton_euler_residual <= 1e-8
    assert result.sliding_residual <= 1e-10
    # The solved CoM lies in the area implied by its own hand wrench.
    assert contains(result.csa, y.com[:2])
    # Hand target realized in the contact frame.
    assert y.w_rh.force[0] == pytest.approx(30.0, abs=1e-8)
    # Ground reaction weights form a convex combination.
    alphas = convex_weights(
        [result.world_wrenches[0].force[2], result.world_wrenches[1].force[2]],
        result.world_wrenches[2].force[2],
        MASS,
    )
    assert np.sum(alphas) == pytest.approx(1.0, abs=1e-9)
    assert np.all(alphas >= -1e-9)


def test_solve_idempotent_on_resolved_target():
    first = solve_centroidal(stance(force=20.0))
    again = solve_centroidal(stance(force=20.0, y_des=first.y.to_array()))
    assert np.max(np.abs(again.y.to_array() - first.y.to_array())) <= 1e-8


def test_com_fix_is_honored():
    fix = np.array([0.02, 0.01])
    result = solve_centroidal(stance(force=5.0, com_fix=fix))
    assert_allclose(result.y.com[:2], fix, atol=1e-9)


def test_foot_fz_limit_is_honored():
    free = solve_centroidal(stance(force=0.0))
    cap = float(free.y.w_rf.force[2]) * 0.8
    limited = solve_centroidal(
        stance(force=0.0, foot_fz_limits=((0.0, cap), (0.0, 1e4)))
    )
    assert limited.y.w_rf.force[2] <= cap + 1e-8
    # The other foot picks up the difference.
    assert limited.y.w_lf.force[2] > free.y.w_lf.force[2]


def test_sliding_mode_requires_cone_edge():
    setup = CentroidalSetup(
        mass=MASS,
        right_foot=foot(-0.095),
        left_foot=foot(0.095),
        hand=wall_hand(mode=ContactMode.SLIDING),
        hand_target=SlidingSpec(20.0, 0.1, 0.0),  # not on the edge
    )
    with pytest.raises(DimensionMismatch):
        assemble(setup)


def test_sliding_solve_stays_on_cone_edge():
    mu = 0.5
    setup = CentroidalSetup(
        mass=MASS,
        right_foot=foot(-0.095),
        left_foot=foot(0.095),
        hand=wall_hand(mode=ContactMode.SLIDING, mu=mu),
        # Horizontal rub: friction along local t1 keeps the hand's world
        # vertical reaction at zero, so the support area stays unscaled.
        hand_target=SlidingSpec(15.0, -mu, 0.0),
    )
    result = solve_centroidal(setup)
    w = result.y.w_rh
    tangential = np.hypot(w.force[1], w.force[2])
    assert tangential == pytest.approx(mu * w.force[0], abs=1e-8)


def test_infeasible_target_raises():
    with pytest.raises(BalanceInfeasible):
        solve_centroidal(stance(force=3000.0))


def test_feasible_force_range_is_an_interval():
    """Bisect the feasibility boundary, then probe both sides of it."""

    def feasible(force):
        try:
            solve_centroidal(stance(force=force))
        except BalanceInfeasible:
            return False
        return True

    lo, hi = 0.0, 1000.0
    assert feasible(lo) and not feasible(hi)
    for _ in range(24):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    for force in np.linspace(1.0, lo - 1.0, 7):
        assert feasible(force), f"hole in the feasible interval at {force}"
    for force in (hi + 1.0, hi + 10.0, 2.0 * hi):
        assert not feasible(force)


def test_world_wrench_rotation():
    patch = foot(0.0, yaw=np.pi / 2)
    w = Wrench(force=vec3(1, 0, 0), torque=vec3(0, 1, 0), frame="rf")
    out = world_wrench(patch, w)
    assert_allclose(out.force, [0, 1, 0], atol=1e-12)
    assert_allclose(out.torque, [-1, 0, 0], atol=1e-12)
