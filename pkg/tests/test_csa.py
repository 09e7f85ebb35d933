"""Support-area geometry: hulls, scaling, offsets, containment."""

import numpy as np
import pytest
import scipy.spatial
from numpy.testing import assert_allclose

from combalance.csa import (
    ContactMode,
    ContactPatch,
    SupportPolygon,
    build_csa,
    com_projection,
    contains,
    convex_hull,
    convex_weights,
    scale_factor,
    sliding_offset,
)
from combalance.errors import (
    DegenerateHull,
    DegenerateScale,
    DimensionMismatch,
    NonCoplanarFeet,
    VerticalBalanceViolation,
)
from combalance.spatial import ContactPose, vec3, yaw_rotation
from oracles import corner_force_feasible

MASS = 39.0
MG = MASS * 9.81


def flat_foot(x, y, yaw=0.0, half_x=0.07, half_y=0.04, mu=0.7):
    return ContactPatch(
        pose=ContactPose(position=vec3(x, y, 0.0), rotation=yaw_rotation(yaw)),
        half_x=half_x,
        half_y=half_y,
        mu=mu,
        mode=ContactMode.FIXED,
    )


def default_feet():
    return [flat_foot(0.0, -0.095), flat_foot(0.0, 0.095)]


# ---------------------------------------------------------------- hull


def test_convex_hull_square():
    pts = [[0, 0], [1, 0], [1, 1], [0, 1], [0.5, 0.5], [0.25, 0.75]]
    hull = convex_hull(pts)
    assert hull.shape == (4, 2)
    # CCW starting from the lexicographic minimum.
    assert_allclose(hull, [[0, 0], [1, 0], [1, 1], [0, 1]])


def test_convex_hull_drops_collinear_and_duplicates():
    pts = [[0, 0], [1, 0], [2, 0], [2, 1], [0, 1], [0, 0], [1, 1e-15]]
    hull = convex_hull(pts)
    assert hull.shape == (4, 2)


def test_convex_hull_degenerate():
    with pytest.raises(DegenerateHull):
        convex_hull([[0, 0], [1, 1]])
    with pytest.raises(DegenerateHull):
        convex_hull([[0, 0], [1, 1], [2, 2], [3, 3]])
    with pytest.raises(DimensionMismatch):
        convex_hull(np.zeros((4, 3)))


def test_convex_hull_matches_scipy_on_random_clouds():
    rng = np.random.default_rng(29)
    for _ in range(60):
        pts = rng.normal(size=(rng.integers(4, 40), 2))
        mine = convex_hull(pts)
        ref = scipy.spatial.ConvexHull(pts)
        ref_pts = pts[ref.vertices]  # scipy returns CCW for 2-D
        assert mine.shape == ref_pts.shape
        # Same cyclic order, possibly different starting vertex.
        start = int(np.argmin(np.linalg.norm(ref_pts - mine[0], axis=1)))
        assert_allclose(np.roll(ref_pts, -start, axis=0), mine, atol=1e-12)


def test_convex_hull_is_idempotent():
    rng = np.random.default_rng(31)
    pts = rng.normal(size=(25, 2))
    hull = convex_hull(pts)
    assert_allclose(convex_hull(hull), hull, atol=0)


# ---------------------------------------------------------------- algebra


def test_scale_factor_values():
    assert scale_factor(0.0, MASS) == 1.0
    assert scale_factor(0.25 * MG, MASS) == pytest.approx(0.75)
    with pytest.raises(DegenerateScale):
        scale_factor(MG, MASS)
    with pytest.raises(DegenerateScale):
        scale_factor(2.0 * MG, MASS)


def test_sliding_offset_hand_computed():
    # Horizontal push at height 1.2: offset = -p_z f_xy / (m g).
    off = sliding_offset(vec3(0.45, 0.0, 1.2), vec3(-60.0, 0.0, 0.0), MASS)
    assert_allclose(off, [1.2 * 60.0 / MG, 0.0])
    # Vertical hand load at p: offset = f_z p_xy / (m g).
    off = sliding_offset(vec3(0.3, -0.1, 1.0), vec3(0.0, 0.0, 50.0), MASS)
    assert_allclose(off, np.array([0.3, -0.1]) * 50.0 / MG)


def test_com_projection_two_point_case():
    # Two vertical supports at x = 0 and x = 1 sharing the weight 3:1.
    contacts = [
        (vec3(0, 0, 0), vec3(0, 0, 0.75 * MG)),
        (vec3(1, 0, 0), vec3(0, 0, 0.25 * MG)),
    ]
    assert_allclose(com_projection(contacts, MASS), [0.25, 0.0], atol=1e-12)


def test_com_projection_rejects_unbalanced():
    with pytest.raises(VerticalBalanceViolation):
        com_projection([(vec3(0, 0, 0), vec3(0, 0, 0.5 * MG))], MASS)


def test_convex_weights_partition_of_unity():
    rng = np.random.default_rng(37)
    for _ in range(50):
        hand_fz = rng.uniform(0.0, 0.5 * MG)
        s = scale_factor(hand_fz, MASS)
        split = rng.dirichlet([1.0, 1.0]) * s * MG
        alphas = convex_weights(split, hand_fz, MASS)
        assert np.sum(alphas) == pytest.approx(1.0, abs=1e-12)
        assert np.all(alphas >= 0.0)
    with pytest.raises(VerticalBalanceViolation):
        convex_weights([100.0, 100.0], 0.0, MASS)


# ---------------------------------------------------------------- polygon


def test_support_polygon_validation():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]])
    SupportPolygon(vertices=square, offset=np.zeros(2), scale=1.0)
    with pytest.raises(DimensionMismatch):
        SupportPolygon(vertices=square[::-1], offset=np.zeros(2), scale=1.0)  # clockwise
    with pytest.raises(DimensionMismatch):
        SupportPolygon(vertices=square, offset=np.zeros(2), scale=0.0)
    with pytest.raises(DimensionMismatch):
        SupportPolygon(vertices=np.vstack([square, square[:1]]), offset=np.zeros(2), scale=1.0)


def test_polygon_centroid_and_chebyshev_inside():
    poly = SupportPolygon(
        vertices=np.array([[0, 0], [2, 0], [2, 1], [0, 1.0]]),
        offset=np.zeros(2),
        scale=1.0,
    )
    assert_allclose(poly.centroid(), [1.0, 0.5], atol=1e-12)
    cheb = poly.chebyshev_center()
    assert poly.signed_distance(cheb) == pytest.approx(0.5, abs=1e-6)


def test_signed_distance_and_contains():
    poly = SupportPolygon(
        vertices=np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]),
        offset=np.zeros(2),
        scale=1.0,
    )
    assert poly.signed_distance([0.5, 0.5]) == pytest.approx(0.5)
    assert poly.signed_distance([2.0, 0.5]) == pytest.approx(-1.0)
    assert contains(poly, [0.5, 0.5])
    assert contains(poly, [1.0, 0.5])  # boundary counts as inside
    assert not contains(poly, [1.1, 0.5])


# ---------------------------------------------------------------- build_csa


def test_build_csa_no_hand_force_is_corner_hull():
    feet = default_feet()
    csa = build_csa(feet, vec3(0.45, 0, 1.2), vec3(0, 0, 0), MASS)
    assert csa.scale == 1.0
    assert_allclose(csa.offset, [0.0, 0.0])
    corners = np.vstack([f.corners_world()[:, :2] for f in feet])
    assert_allclose(np.sort(csa.vertices, axis=0), np.sort(convex_hull(corners), axis=0))


def test_build_csa_vertical_hand_force_scales_about_origin():
    feet = default_feet()
    fz = 0.3 * MG
    csa = build_csa(feet, vec3(0.0, 0.0, 1.2), vec3(0.0, 0.0, fz), MASS)
    assert csa.scale == pytest.approx(0.7)
    base = build_csa(feet, vec3(0.0, 0.0, 1.2), vec3(0, 0, 0), MASS)
    # Hand at x=y=0 contributes no offset for a pure vertical force.
    assert_allclose(csa.vertices, base.vertices * 0.7, atol=1e-12)


def test_build_csa_foot_scaling_scales_vertices():
    lam = 1.7
    feet = default_feet()
    grown = [
        flat_foot(0.0, lam * f.pose.position[1], half_x=lam * 0.07, half_y=lam * 0.04)
        for f in feet
    ]
    a = build_csa(feet, vec3(0.45, 0, 1.2), vec3(-20.0, 0, 0), MASS)
    b = build_csa(grown, vec3(0.45, 0, 1.2), vec3(-20.0, 0, 0), MASS)
    assert_allclose(b.vertices - b.offset, lam * (a.vertices - a.offset), atol=1e-12)
    assert_allclose(b.offset, a.offset, atol=1e-12)


def test_build_csa_feet_permutation_invariant():
    feet = default_feet()
    a = build_csa(feet, vec3(0.45, 0, 1.2), vec3(-30.0, 5.0, 10.0), MASS)
    b = build_csa(feet[::-1], vec3(0.45, 0, 1.2), vec3(-30.0, 5.0, 10.0), MASS)
    assert_allclose(a.vertices, b.vertices, atol=0)


def test_build_csa_hand_torque_shifts_offset():
    feet = default_feet()
    tau = vec3(2.0, -3.0, 7.0)
    a = build_csa(feet, vec3(0.45, 0, 1.2), vec3(-30.0, 0, 0), MASS)
    b = build_csa(feet, vec3(0.45, 0, 1.2), vec3(-30.0, 0, 0), MASS, hand_torque=tau)
    assert_allclose(b.offset - a.offset, np.array([3.0, 2.0]) / MG, atol=1e-14)


def test_build_csa_rejects_lifted_feet():
    lifted = ContactPatch(
        pose=ContactPose(position=vec3(0, 0, 0.05), rotation=np.eye(3)),
        half_x=0.07,
        half_y=0.04,
        mu=0.7,
    )
    with pytest.raises(NonCoplanarFeet):
        build_csa([lifted], vec3(0.45, 0, 1.2), vec3(0, 0, 0), MASS)
    with pytest.raises(DimensionMismatch):
        build_csa([], vec3(0.45, 0, 1.2), vec3(0, 0, 0), MASS)


# ---------------------------------------------------------------- oracle


def test_contains_matches_corner_force_oracle():
    rng = np.random.default_rng(41)
    checked = 0
    for _ in range(120):
        feet = [
            flat_foot(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-np.pi, np.pi)),
            flat_foot(rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4), rng.uniform(-np.pi, np.pi)),
        ]
        hand_pos = vec3(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5))
        hand_force = rng.normal(scale=30.0, size=3)
        hand_force[2] = rng.uniform(0.0, 0.6 * MG)
        hand_torque = rng.normal(scale=3.0, size=3)
        csa = build_csa(feet, hand_pos, hand_force, MASS, hand_torque=hand_torque)
        lo = csa.vertices.min(axis=0) - 0.05
        hi = csa.vertices.max(axis=0) + 0.05
        for _ in range(4):
            point = rng.uniform(lo, hi)
            if abs(csa.signed_distance(point)) < 1e-6:
                continue  # boundary band
            ours = contains(csa, point)
            ref = corner_force_feasible(feet, hand_pos, hand_force, hand_torque, MASS, point)
            assert ours == ref, f"disagreement at {point} (inside={ours})"
            checked += 1
    assert checked > 300
