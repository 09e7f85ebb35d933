"""Friction-cone and CoP row builders versus their scalar definitions."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from combalance.constraints import (
    CONTACT_NAMES,
    WRENCH_OFFSETS,
    Y_DIM,
    ConstraintBlocks,
    FrictionBounds,
    SlidingSpec,
    build_constraint_blocks,
    build_inequalities,
    build_sliding_equalities,
    cone_margins,
    psi_matrices,
    sliding_equalities_for_axis,
    tau_z_bounds,
    upsilon_fixed,
    upsilon_sliding,
)
from combalance.csa import ContactMode, ContactPatch, NormalAxis
from combalance.errors import DimensionMismatch, LayoutMismatch
from combalance.spatial import ContactPose, Wrench, vec3


def bounds(mu=0.7, half_x=0.07, half_y=0.04, fz_min=0.0, fz_max=400.0):
    return FrictionBounds(mu=mu, half_x=half_x, half_y=half_y, fz_min=fz_min, fz_max=fz_max)


def scalar_fixed_ok(w, b, tol=0.0):
    """The inequality set spelled out bound by bound, normal along z."""
    fx, fy, fz = w[:3]
    tx, ty, tz = w[3:]
    lo, hi = tau_z_bounds(Wrench.from_vector(w), b)
    return (
        abs(fx) <= b.mu * fz + tol
        and abs(fy) <= b.mu * fz + tol
        and b.fz_min - tol <= fz <= b.fz_max + tol
        and abs(tx) <= b.half_y * fz + tol
        and abs(ty) <= b.half_x * fz + tol
        and lo - tol <= tz <= hi + tol
    )


def rows_fixed_ok(w, b, tol=0.0):
    U1, U2 = upsilon_fixed(b)
    P1, P2 = psi_matrices(b)
    h1 = np.zeros(6)
    h1[2] = b.fz_max
    h2 = np.zeros(6)
    h2[2] = -b.fz_min
    viol = max(
        float(np.max(U1 @ w - h1)),
        float(np.max(U2 @ w - h2)),
        float(np.max(P1 @ w)),
        float(np.max(P2 @ w)),
    )
    return viol <= tol


def test_validation():
    with pytest.raises(DimensionMismatch):
        FrictionBounds(mu=-0.1, half_x=0.1, half_y=0.1, fz_min=0.0, fz_max=1.0)
    with pytest.raises(DimensionMismatch):
        FrictionBounds(mu=0.5, half_x=0.1, half_y=0.1, fz_min=2.0, fz_max=1.0)
    with pytest.raises(DimensionMismatch):
        SlidingSpec(-1.0)
    with pytest.raises(DimensionMismatch):
        SlidingSpec(np.inf)


def test_sliding_spec_cone_edge_check():
    SlidingSpec(30.0, 0.5, 0.0).validate_cone_edge(0.5)
    with pytest.raises(DimensionMismatch):
        SlidingSpec(30.0, 0.4, 0.0).validate_cone_edge(0.5)
    with pytest.raises(DimensionMismatch):
        SlidingSpec(0.0, 0.5, 0.0).validate_cone_edge(0.5)


def test_tau_z_bounds_formula():
    rng = np.random.default_rng(43)
    b = bounds()
    for _ in range(200):
        w = rng.normal(scale=40.0, size=6)
        lo, hi = tau_z_bounds(Wrench.from_vector(w), b)
        fx, fy, fz = w[:3]
        tx, ty = w[3], w[4]
        mu, X, Y = b.mu, b.half_x, b.half_y
        assert hi == pytest.approx(
            mu * (X + Y) * fz - abs(Y * fx + mu * tx) - abs(X * fy + mu * ty), abs=1e-12
        )
        assert lo == pytest.approx(
            -mu * (X + Y) * fz + abs(Y * fx - mu * tx) + abs(X * fy - mu * ty), abs=1e-12
        )


def test_fixed_rows_equal_scalar_bounds():
    """Row satisfaction and the spelled-out bounds agree wrench by wrench."""
    rng = np.random.default_rng(47)
    b = bounds(fz_min=5.0, fz_max=120.0)
    agree_feasible = 0
    for _ in range(4000):
        if rng.random() < 0.5:
            # Biased toward feasibility: start from a cone-interior force
            # and draw the yaw torque inside its remaining budget.
            fz = rng.uniform(b.fz_min, b.fz_max)
            w = np.array(
                [
                    rng.uniform(-0.7, 0.7) * b.mu * fz,
                    rng.uniform(-0.7, 0.7) * b.mu * fz,
                    fz,
                    rng.uniform(-0.7, 0.7) * b.half_y * fz,
                    rng.uniform(-0.7, 0.7) * b.half_x * fz,
                    0.0,
                ]
            )
            lo, hi = tau_z_bounds(Wrench.from_vector(w), b)
            if hi > lo:
                w[5] = rng.uniform(lo, hi)
        else:
            w = rng.normal(scale=60.0, size=6)
        scal = scalar_fixed_ok(w, b, tol=1e-9)
        scal_strict = scalar_fixed_ok(w, b, tol=-1e-9)
        rows = rows_fixed_ok(w, b, tol=1e-9)
        rows_strict = rows_fixed_ok(w, b, tol=-1e-9)
        # Outside the 1e-9 band the two answers must coincide.
        if scal == scal_strict and rows == rows_strict:
            assert scal == rows, f"disagreement for {w}"
        if scal:
            agree_feasible += 1
    assert agree_feasible > 500  # the biased half must actually hit the set


def test_cone_margins_match_rows():
    rng = np.random.default_rng(53)
    b = bounds(fz_min=2.0, fz_max=300.0)
    for _ in range(500):
        w = rng.normal(scale=50.0, size=6)
        margins = cone_margins(Wrench.from_vector(w), b)
        assert (np.min(margins) >= -1e-12) == rows_fixed_ok(w, b, tol=1e-12)


def test_upsilon_fixed_structure():
    b = bounds(mu=0.5, half_x=0.25, half_y=0.125)
    U1, U2 = upsilon_fixed(b)
    assert U1.shape == (6, 6) and U2.shape == (6, 6)
    # Mirrored bounds differ only by flipped diagonal.
    assert_allclose(np.diag(U2), -np.diag(U1))
    off_diag = ~np.eye(6, dtype=bool)
    assert_allclose(U2[off_diag], U1[off_diag])
    assert np.array_equal(U1[5], np.zeros(6))  # tau_z handled by psi rows


def test_upsilon_sliding_zero_force_rows():
    b = bounds()
    U1, U2 = upsilon_sliding(b)
    # Force rows empty: the equality rows own the force. For an x-normal
    # contact the two in-plane CoP torques are tau_y and tau_z (rows 4, 5);
    # tau_x, the torque about the normal, belongs to the psi rows.
    assert not U1[:4].any() and not U2[:4].any()
    fn = 40.0
    w = np.zeros(6)
    w[0] = fn
    w[4] = b.half_y * fn  # tau_y exactly at its bound
    w[5] = b.half_x * fn  # tau_z exactly at its bound
    assert_allclose(U1 @ w, np.zeros(6), atol=1e-12)
    assert_allclose(U2 @ w, -2.0 * np.array([0, 0, 0, 0, b.half_y, b.half_x]) * fn, atol=1e-12)
    w[4] += 1e-6
    assert np.max(U1 @ w) > 0


def test_psi_matrices_sign_expansion():
    b = bounds()
    P1, P2 = psi_matrices(b)
    mu, X, Y = b.mu, b.half_x, b.half_y
    C = -mu * (X + Y)
    signs = [(1, 1), (-1, 1), (1, -1), (-1, -1)]
    for row, (s1, s2) in zip(P1, signs):
        assert_allclose(row, [s1 * Y, s2 * X, C, s1 * mu, s2 * mu, 1.0])
    for row, (s1, s2) in zip(P2, signs):
        assert_allclose(row, [s1 * Y, s2 * X, C, -s1 * mu, -s2 * mu, -1.0])


def test_psi_hand_role_permutes_normal_to_x():
    b = bounds()
    P1_foot, _ = psi_matrices(b, role="foot")
    P1_hand, _ = psi_matrices(b, role="hand")
    # Same rows, with (f_x,f_y,f_z) slots cycled so the normal is local x.
    perm = np.array([1, 2, 0, 4, 5, 3])
    assert_allclose(P1_hand[:, perm], P1_foot)
    with pytest.raises(DimensionMismatch):
        psi_matrices(b, role="elbow")


def test_sliding_equalities_pin_cone_edge():
    rng = np.random.default_rng(59)
    mu = 0.5
    for _ in range(200):
        angle = rng.uniform(0, 2 * np.pi)
        spec = SlidingSpec(rng.uniform(1.0, 80.0), mu * np.cos(angle), mu * np.sin(angle))
        M, k = build_sliding_equalities(spec)
        assert M.shape == (6, 6) and k.shape == (6,)
        # Solve the pinned components: normal along x.
        fn = k[0]
        w = np.zeros(6)
        w[0] = fn
        w[1] = spec.ratio_t1 * fn
        w[2] = spec.ratio_t2 * fn
        assert_allclose(M @ w, k, atol=1e-12)
        assert np.hypot(w[1], w[2]) == pytest.approx(mu * fn, abs=1e-9)


def test_sliding_equalities_axis_generalization():
    spec = SlidingSpec(25.0, 0.3, -0.4)
    for axis in NormalAxis:
        M, k = sliding_equalities_for_axis(spec, axis)
        n = axis.value
        t1, t2 = (n + 1) % 3, (n + 2) % 3
        w = np.zeros(6)
        w[n] = 25.0
        w[t1] = 0.3 * 25.0
        w[t2] = -0.4 * 25.0
        assert_allclose(M @ w, k, atol=1e-12)
        assert not M[3:].any()


def hand_patch(normal_axis=NormalAxis.X):
    return ContactPatch(
        pose=ContactPose(position=vec3(0.45, 0, 1.2), rotation=np.eye(3)),
        half_x=0.05,
        half_y=0.05,
        mu=0.5,
        mode=ContactMode.SLIDING,
        normal_axis=normal_axis,
    )


def foot_patch():
    return ContactPatch(
        pose=ContactPose(position=vec3(0, -0.095, 0), rotation=np.eye(3)),
        half_x=0.07,
        half_y=0.04,
        mu=0.7,
    )


def three_contacts():
    return [
        (foot_patch(), bounds()),
        (foot_patch(), bounds()),
        (hand_patch(), bounds(mu=0.5, half_x=0.05, half_y=0.05)),
    ]


def test_build_inequalities_shape_and_block_placement():
    G, h = build_inequalities(three_contacts())
    assert G.shape == (60, Y_DIM)
    assert h.shape == (60,)
    # CoM columns never enter the stability rows.
    assert not G[:, :3].any()
    # Each cone block only touches its own contact's wrench columns.
    for i, off in enumerate(WRENCH_OFFSETS):
        block = G[12 * i : 12 * (i + 1)]
        others = [c for c in range(3, Y_DIM) if not off <= c < off + 6]
        assert not block[:, others].any()
    # Last 24 rows are the yaw-torque blocks with zero right-hand side.
    assert not h[36:].any()


def test_build_inequalities_layout_check():
    with pytest.raises(LayoutMismatch):
        build_inequalities(three_contacts(), offsets=(3, 9, 14))
    with pytest.raises(LayoutMismatch):
        build_inequalities(three_contacts(), offsets=(4, 10, 16))
    with pytest.raises(DimensionMismatch):
        build_inequalities(three_contacts()[:2])


def test_build_constraint_blocks_positions_hand_equalities():
    blocks = build_constraint_blocks(three_contacts(), SlidingSpec(30.0, 0.5, 0.0))
    assert isinstance(blocks, ConstraintBlocks)
    off = WRENCH_OFFSETS[2]
    assert not blocks.A_slide[:, :off].any()
    assert blocks.k[0] == 30.0
    # The pinned wrench satisfies the equality rows.
    y = np.zeros(Y_DIM)
    y[off] = 30.0
    y[off + 1] = 15.0
    assert_allclose(blocks.A_slide @ y, blocks.k, atol=1e-12)


def test_constraint_blocks_validation():
    with pytest.raises(DimensionMismatch):
        ConstraintBlocks(
            G=np.zeros((59, Y_DIM)),
            h=np.zeros(59),
            A_slide=np.zeros((6, Y_DIM)),
            k=np.zeros(6),
        )
    with pytest.raises(DimensionMismatch):
        ConstraintBlocks(
            G=np.full((60, Y_DIM), np.nan),
            h=np.zeros(60),
            A_slide=np.zeros((6, Y_DIM)),
            k=np.zeros(6),
        )


def test_normal_axis_permutation_equivalence():
    """A wrench feasible in the canonical frame stays feasible after the
    same wrench is expressed along a different normal axis."""
    rng = np.random.default_rng(61)
    b = bounds(fz_min=1.0, fz_max=150.0)
    for axis in (NormalAxis.X, NormalAxis.Y):
        patch = hand_patch(normal_axis=axis)
        contacts = [(foot_patch(), bounds()), (foot_patch(), bounds()), (patch, b)]
        G, h = build_inequalities(contacts, force_pinned=(False, False, False))
        n = axis.value
        t1, t2 = (n + 1) % 3, (n + 2) % 3
        for _ in range(300):
            w_canon = rng.normal(scale=50.0, size=6)
            ok_canon = rows_fixed_ok(w_canon, b, tol=1e-9)
            w_axis = np.zeros(6)
            w_axis[[t1, t2, n]] = w_canon[:3]
            w_axis[[3 + t1, 3 + t2, 3 + n]] = w_canon[3:]
            y = np.zeros(Y_DIM)
            y[WRENCH_OFFSETS[2] : WRENCH_OFFSETS[2] + 6] = w_axis
            hand_rows = slice(24, 36)
            viol = float(np.max((G @ y - h)[hand_rows]))
            tau_rows = np.r_[36 + 16 : 36 + 24]
            viol = max(viol, float(np.max((G @ y - h)[tau_rows])))
            assert (viol <= 1e-9) == ok_canon


def test_layout_constants():
    assert Y_DIM == 21
    assert WRENCH_OFFSETS == (3, 9, 15)
    assert CONTACT_NAMES == ("rf", "lf", "rh")
