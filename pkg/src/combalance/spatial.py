"""Rigid-body spatial algebra: wrenches, contact poses, and gravity maps.

Vectors are plain ``numpy`` arrays: points and forces are shape ``(3,)``,
wrenches stack force over torque as shape ``(6,)``.  A wrench carries an
explicit frame tag so world-frame and contact-frame quantities cannot be
mixed up silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch

GRAVITY = 9.81

WORLD_FRAME = "world"

_POSE_ORTHO_TOL = 1e-12


def vec3(x, y, z) -> np.ndarray:
    """Build a float (3,) vector."""
    return np.array([x, y, z], dtype=float)


def _as_vec(v, n, name) -> np.ndarray:
    out = np.asarray(v, dtype=float)
    if out.shape != (n,):
        raise DimensionMismatch(f"{name} must have shape ({n},), got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return out


def skew(v) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == np.cross(v, u)."""
    x, y, z = _as_vec(v, 3, "v")
    return np.array(
        [
            [0.0, -z, y],
            [z, 0.0, -x],
            [-y, x, 0.0],
        ]
    )


@dataclass(frozen=True)
class Wrench:
    """A force/torque pair expressed in a named frame.

    Args:
        force: (3,) force in newtons.
        torque: (3,) torque in newton-meters.
        frame: "world" or a contact name such as "rh".
    """

    force: np.ndarray
    torque: np.ndarray
    frame: str = WORLD_FRAME

    def __post_init__(self):
        object.__setattr__(self, "force", _as_vec(self.force, 3, "force"))
        object.__setattr__(self, "torque", _as_vec(self.torque, 3, "torque"))

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    @classmethod
    def from_vector(cls, w, frame: str = WORLD_FRAME) -> "Wrench":
        w = _as_vec(w, 6, "wrench vector")
        return cls(force=w[:3], torque=w[3:], frame=frame)

    @classmethod
    def zero(cls, frame: str = WORLD_FRAME) -> "Wrench":
        return cls(force=np.zeros(3), torque=np.zeros(3), frame=frame)


@dataclass(frozen=True)
class ContactPose:
    """Contact frame: position of the frame origin and rotation to world.

    ``rotation`` maps contact-frame coordinates into world coordinates.
    It must be a proper rotation (orthonormal, det +1) to within 1e-12.
    """

    position: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec(self.position, 3, "position"))
        R = np.asarray(self.rotation, dtype=float)
        if R.shape != (3, 3):
            raise DimensionMismatch(f"rotation must be 3x3, got {R.shape}")
        if not np.all(np.isfinite(R)):
            raise DimensionMismatch("rotation contains non-finite entries")
        err = np.max(np.abs(R.T @ R - np.eye(3)))
        if err > _POSE_ORTHO_TOL:
            raise DimensionMismatch(
                f"rotation is not orthonormal (max |R'R - I| = {err:.3e})"
            )
        if np.linalg.det(R) < 0.0:
            raise DimensionMismatch("rotation has negative determinant")
        object.__setattr__(self, "rotation", R)

    def to_world_point(self, p_local) -> np.ndarray:
        return self.rotation @ _as_vec(p_local, 3, "p_local") + self.position


def yaw_rotation(angle: float) -> np.ndarray:
    """Rotation about the world z axis."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def frame_from_x_axis(x_axis) -> np.ndarray:
    """Proper rotation whose first column is the given (unit) direction.

    The remaining columns are chosen deterministically: the second column is
    the normalized projection of world z (or world y when x_axis is nearly
    vertical) onto the plane orthogonal to x_axis, crossed to complete a
    right-handed frame.
    """
    x = _as_vec(x_axis, 3, "x_axis")
    n = np.linalg.norm(x)
    if n < 1e-12:
        raise DimensionMismatch("x_axis has (near) zero length")
    x = x / n
    helper = np.array([0.0, 0.0, 1.0])
    if abs(x @ helper) > 0.99:
        helper = np.array([0.0, 1.0, 0.0])
    y = np.cross(helper, x)
    y /= np.linalg.norm(y)
    z = np.cross(x, y)
    return np.column_stack([x, y, z])


def wrench_map(pose: ContactPose) -> np.ndarray:
    """6x6 map from a contact-frame wrench to the world wrench about the origin.

    Force block is the pose rotation; the torque picks up the lever arm of
    the contact position:

        world_force  = R f
        world_torque = p x (R f) + R tau
    """
    R = pose.rotation
    E = np.zeros((6, 6))
    E[:3, :3] = R
    E[3:, :3] = skew(pose.position) @ R
    E[3:, 3:] = R
    return E


def gravity_wrench(com, mass: float, g: float = GRAVITY) -> Wrench:
    """World-frame gravity wrench about the origin for a point mass at com."""
    com = _as_vec(com, 3, "com")
    force = np.array([0.0, 0.0, -mass * g])
    return Wrench(force=force, torque=np.cross(com, force), frame=WORLD_FRAME)


def gravity_com_block(mass: float, g: float = GRAVITY) -> np.ndarray:
    """6x3 matrix mapping the CoM position to the gravity wrench's linear part.

    Together with :func:`gravity_offset_block` this factors the gravity
    wrench as ``block @ com + offset``, which is the form the centroidal
    equality rows need (the CoM is a decision variable there).
    """
    mg = mass * g
    B = np.zeros((6, 3))
    B[3, 1] = -mg
    B[4, 0] = mg
    return B


def gravity_offset_block(mass: float, g: float = GRAVITY) -> np.ndarray:
    """Constant part of the factored gravity wrench: (0, 0, -m g, 0, 0, 0)."""
    out = np.zeros(6)
    out[2] = -mass * g
    return out
