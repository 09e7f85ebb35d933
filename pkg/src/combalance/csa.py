"""CoM support area: where the CoM projection may sit while staying balanced.

With both feet flat on the ground and a hand pressing somewhere else with a
known force, static equilibrium is possible exactly when the horizontal CoM
projection lies in a convex polygon: the hull of the foot corner points,
shrunk about the world origin by the share of weight the feet still carry
and shifted by the moment the hand contributes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateHull,
    DegenerateScale,
    DimensionMismatch,
    NonCoplanarFeet,
    VerticalBalanceViolation,
)
from .spatial import GRAVITY, ContactPose, _as_vec

_COLLINEAR_EPS = 1e-12
_CONTAIN_TOL = 1e-9
_GROUND_TOL = 1e-9
_DUPLICATE_TOL = 1e-9


class ContactMode(enum.Enum):
    FIXED = "fixed"
    SLIDING = "sliding"


class NormalAxis(enum.Enum):
    """Which contact-frame axis is the outward surface normal.

    Outward means pointing from the surface into the robot, so the force
    the surface applies on the robot has a nonnegative component along it.
    """

    X = 0
    Y = 1
    Z = 2


@dataclass(frozen=True)
class ContactPatch:
    """Rectangular contact surface.

    half_x and half_y are the half-dimensions along the two tangential
    axes of the contact frame, in the cyclic order that follows the
    normal axis (normal z -> tangentials x, y; normal x -> y, z;
    normal y -> z, x).
    """

    pose: ContactPose
    half_x: float
    half_y: float
    mu: float
    mode: ContactMode = ContactMode.FIXED
    normal_axis: NormalAxis = NormalAxis.Z

    def __post_init__(self):
        if not (self.half_x > 0.0 and self.half_y > 0.0):
            raise DimensionMismatch("patch half-dimensions must be positive")
        if not (0.0 < self.mu < 2.0):
            raise DimensionMismatch(f"friction coefficient {self.mu} out of (0, 2)")

    def tangent_axes(self) -> tuple[int, int]:
        n = self.normal_axis.value
        return (n + 1) % 3, (n + 2) % 3

    def corners_local(self) -> np.ndarray:
        """The four corner points in the contact frame, shape (4, 3)."""
        t1, t2 = self.tangent_axes()
        corners = np.zeros((4, 3))
        for i, (sx, sy) in enumerate(((1, 1), (-1, 1), (-1, -1), (1, -1))):
            corners[i, t1] = sx * self.half_x
            corners[i, t2] = sy * self.half_y
        return corners

    def corners_world(self) -> np.ndarray:
        """The four corner points in world coordinates, shape (4, 3)."""
        return self.corners_local() @ self.pose.rotation.T + self.pose.position


@dataclass(frozen=True)
class SupportPolygon:
    """Convex CCW polygon of admissible CoM projections.

    vertices already include the scale and offset; the raw factors are kept
    for reporting and for the convex-combination coefficients.
    """

    vertices: np.ndarray
    offset: np.ndarray
    scale: float

    def __post_init__(self):
        V = np.asarray(self.vertices, dtype=float)
        if V.ndim != 2 or V.shape[1] != 2 or V.shape[0] < 3:
            raise DimensionMismatch(f"vertices must be (k>=3, 2), got {V.shape}")
        object.__setattr__(self, "vertices", V)
        object.__setattr__(self, "offset", _as_vec(self.offset, 2, "offset"))
        if not 0.0 < self.scale <= 1.0 + 1e-12:
            raise DimensionMismatch(f"scale {self.scale} outside (0, 1]")
        k = V.shape[0]
        for i in range(k):
            a, b, c = V[i], V[(i + 1) % k], V[(i + 2) % k]
            if np.linalg.norm(b - a) <= _DUPLICATE_TOL:
                raise DimensionMismatch("duplicate polygon vertices")
            if _cross2(b - a, c - b) < -_COLLINEAR_EPS:
                raise DimensionMismatch("polygon is not counter-clockwise convex")

    def centroid(self) -> np.ndarray:
        """Area centroid (shoelace formula)."""
        V = self.vertices
        rolled = np.roll(V, -1, axis=0)
        cross = V[:, 0] * rolled[:, 1] - rolled[:, 0] * V[:, 1]
        area = 0.5 * np.sum(cross)
        if abs(area) < 1e-16:
            return np.mean(V, axis=0)
        cx = np.sum((V[:, 0] + rolled[:, 0]) * cross) / (6.0 * area)
        cy = np.sum((V[:, 1] + rolled[:, 1]) * cross) / (6.0 * area)
        return np.array([cx, cy])

    def chebyshev_center(self) -> np.ndarray:
        """Center of the largest inscribed circle (small LP)."""
        from scipy.optimize import linprog

        normals, dists = self.edge_normals()
        # max r  s.t.  n.c + r <= d  ->  linprog minimizes, so use -r.
        A_ub = np.column_stack([normals, np.ones(len(dists))])
        res = linprog(
            c=[0.0, 0.0, -1.0],
            A_ub=A_ub,
            b_ub=dists,
            bounds=[(None, None), (None, None), (0.0, None)],
            method="highs",
        )
        if not res.success:
            return self.centroid()
        return res.x[:2]

    def edge_normals(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals n_i and offsets d_i with inside = n.p <= d."""
        V = self.vertices
        E = np.roll(V, -1, axis=0) - V
        lengths = np.linalg.norm(E, axis=1)
        normals = np.column_stack([E[:, 1], -E[:, 0]]) / lengths[:, None]
        dists = np.sum(normals * V, axis=1)
        return normals, dists

    def signed_distance(self, point) -> float:
        """Positive inside, negative outside, zero on the boundary."""
        p = _as_vec(point, 2, "point")
        normals, dists = self.edge_normals()
        return float(np.min(dists - normals @ p))


def _cross2(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def convex_hull(points) -> np.ndarray:
    """Monotone-chain hull of 2D points, counter-clockwise, shape (k, 2).

    Collinear points on the boundary are dropped; fewer than three
    effective (non-collinear, non-duplicate) points raise DegenerateHull.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise DimensionMismatch(f"points must be (k, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DimensionMismatch("points contain non-finite entries")

    # Dedupe within tolerance, keeping first occurrences.
    kept: list[np.ndarray] = []
    for p in pts:
        if all(np.linalg.norm(p - q) > _DUPLICATE_TOL for q in kept):
            kept.append(p)
    if len(kept) < 3:
        raise DegenerateHull("need at least 3 distinct points")

    ordered = sorted(kept, key=lambda p: (p[0], p[1]))

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross2(out[-1] - out[-2], p - out[-1]) <= _COLLINEAR_EPS:
                out.pop()
            out.append(p)
        return out

    lower = chain(ordered)
    upper = chain(reversed(ordered))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHull("points are collinear")
    return np.array(hull)


def com_projection(contacts, mass: float, g: float = GRAVITY) -> np.ndarray:
    """Horizontal CoM position implied by a set of point contact forces.

    Args:
        contacts: iterable of (position, force) pairs, world frame.
        mass: total mass in kg.

    The vertical components must already balance the weight; the returned
    point is (sum_i f_i^z p_i - p_i^z f_i) / (m g), horizontal part.
    """
    mg = mass * g
    total = np.zeros(3)
    fz_sum = 0.0
    for position, force in contacts:
        p = _as_vec(position, 3, "position")
        f = _as_vec(force, 3, "force")
        fz_sum += f[2]
        total += f[2] * p - p[2] * f
    if abs(fz_sum - mg) > 1e-6:
        raise VerticalBalanceViolation(
            f"vertical contact force {fz_sum:.9g} N != weight {mg:.9g} N"
        )
    return total[:2] / mg


def convex_weights(ground_fz, hand_force_z: float, mass: float, g: float = GRAVITY) -> np.ndarray:
    """Convex-combination coefficients of the ground contacts.

    Each ground contact holding f^z of the scaled weight carries the weight
    fraction f^z / (S m g); these sum to one exactly when the vertical
    forces balance, which is checked.
    """
    fz = np.asarray(ground_fz, dtype=float).ravel()
    total = scale_factor(hand_force_z, mass, g) * mass * g
    if abs(float(np.sum(fz)) - total) > 1e-6:
        raise VerticalBalanceViolation(
            f"ground vertical force {float(np.sum(fz)):.9g} N != scaled weight {total:.9g} N"
        )
    return fz / total


def sliding_offset(hand_position, hand_force, mass: float, g: float = GRAVITY) -> np.ndarray:
    """Horizontal CSA offset contributed by the hand contact."""
    p = _as_vec(hand_position, 3, "hand_position")
    f = _as_vec(hand_force, 3, "hand_force")
    mg = mass * g
    return (f[2] * p[:2] - p[2] * f[:2]) / mg


def scale_factor(hand_force_z: float, mass: float, g: float = GRAVITY) -> float:
    """Fraction of the weight carried by the feet: 1 - f_hand_z / (m g)."""
    s = 1.0 - hand_force_z / (mass * g)
    if s <= 1e-9:
        raise DegenerateScale(f"support scale {s:.3e}: hand carries the whole weight")
    return s


def build_csa(
    feet,
    hand_position,
    hand_force,
    mass: float,
    g: float = GRAVITY,
    hand_torque=None,
) -> SupportPolygon:
    """Construct the CoM support area for flat feet plus one hand wrench.

    Args:
        feet: ContactPatch list, fixed mode, soles on the ground plane.
        hand_position: world contact point of the hand.
        hand_force: world force the environment applies to the robot's hand.
        mass: robot mass in kg.
        hand_torque: optional world hand torque; its horizontal moment adds
            e_z x tau / (m g) to the offset, which keeps the containment
            identity exact when the hand transmits torque.

    The polygon is the hull of the foot corners scaled about the world
    origin by the remaining weight fraction, translated by the hand offset.
    """
    if len(feet) == 0:
        raise DimensionMismatch("need at least one foot")
    corners = []
    for foot in feet:
        cw = foot.corners_world()
        if np.max(np.abs(cw[:, 2])) > _GROUND_TOL:
            raise NonCoplanarFeet(
                f"foot corners leave the ground plane by {np.max(np.abs(cw[:, 2])):.3e} m"
            )
        corners.append(cw[:, :2])
    corners = np.vstack(corners)

    f = _as_vec(hand_force, 3, "hand_force")
    s = scale_factor(f[2], mass, g)
    offset = sliding_offset(hand_position, f, mass, g)
    if hand_torque is not None:
        tau = _as_vec(hand_torque, 3, "hand_torque")
        offset = offset + np.array([-tau[1], tau[0]]) / (mass * g)

    vertices = convex_hull(corners * s) + offset
    return SupportPolygon(vertices=vertices, offset=offset, scale=s)


def contains(polygon: SupportPolygon, point) -> bool:
    """True iff the point is inside the polygon or within 1e-9 of its boundary."""
    return polygon.signed_distance(point) >= -_CONTAIN_TOL
