"""Constraint rows of the balance QP.

Fixed surface contacts contribute linearized friction-cone, normal-force,
center-of-pressure, and yaw-torque inequality rows.  A sliding (or
force-targeted) contact has its force pinned by equality rows instead, and
keeps only the torque inequalities.

All builders work in the contact frame with the surface normal along local
z, then rows and columns are permuted for patches whose normal is another
axis.  Wrench component order is (fx, fy, fz, tx, ty, tz).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .csa import ContactPatch, NormalAxis
from .errors import DimensionMismatch, LayoutMismatch
from .spatial import Wrench

Y_DIM = 21
COM_OFFSET = 0
WRENCH_OFFSETS = (3, 9, 15)
CONTACT_NAMES = ("rf", "lf", "rh")


@dataclass(frozen=True)
class FrictionBounds:
    """Scalar contact limits: friction, patch size, normal-force range."""

    mu: float
    half_x: float
    half_y: float
    fz_min: float
    fz_max: float

    def __post_init__(self):
        if not self.mu > 0.0:
            raise DimensionMismatch("mu must be positive")
        if not (self.half_x > 0.0 and self.half_y > 0.0):
            raise DimensionMismatch("patch half-dimensions must be positive")
        if not (0.0 <= self.fz_min < self.fz_max):
            raise DimensionMismatch(
                f"need 0 <= fz_min < fz_max, got [{self.fz_min}, {self.fz_max}]"
            )


@dataclass(frozen=True)
class SlidingSpec:
    """Force target for a sliding or force-controlled contact.

    normal_force is the desired force along the contact normal (newtons,
    nonnegative).  ratio_t1 and ratio_t2 are the tangential-to-normal force
    ratios; for true sliding they sit on the friction-cone edge
    (sqrt(r1^2 + r2^2) = mu), for a static push both are zero.
    """

    normal_force: float
    ratio_t1: float = 0.0
    ratio_t2: float = 0.0

    def __post_init__(self):
        vals = (self.normal_force, self.ratio_t1, self.ratio_t2)
        if not all(np.isfinite(v) for v in vals):
            raise DimensionMismatch("sliding spec contains non-finite values")
        if self.normal_force < 0.0:
            raise DimensionMismatch("normal-force target must be nonnegative")

    def ratio_norm(self) -> float:
        return float(np.hypot(self.ratio_t1, self.ratio_t2))

    def validate_cone_edge(self, mu: float, tol: float = 1e-9):
        """Sliding contacts must have their force on the cone edge."""
        if abs(self.ratio_norm() - mu) > tol:
            raise DimensionMismatch(
                f"tangential ratio norm {self.ratio_norm():.12g} is not on the "
                f"friction-cone edge mu={mu:.12g}"
            )
        if not self.normal_force > 0.0:
            raise DimensionMismatch("sliding contact needs a positive normal force")


@dataclass(frozen=True)
class ConstraintBlocks:
    """Stacked inequality system plus the sliding equality rows."""

    G: np.ndarray
    h: np.ndarray
    A_slide: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        if self.G.shape != (60, Y_DIM) or self.h.shape != (60,):
            raise DimensionMismatch(f"G/h must be 60x{Y_DIM} and 60")
        if self.A_slide.shape != (6, Y_DIM) or self.k.shape != (6,):
            raise DimensionMismatch(f"A_slide/k must be 6x{Y_DIM} and 6")
        for arr in (self.G, self.h, self.A_slide, self.k):
            if not np.all(np.isfinite(arr)):
                raise DimensionMismatch("constraint blocks contain non-finite entries")


def _component_permutation(axis: NormalAxis) -> np.ndarray:
    """Map canonical slots (f_t1, f_t2, f_n, t_t1, t_t2, t_n) to actual indices."""
    n = axis.value
    t1, t2 = (n + 1) % 3, (n + 2) % 3
    return np.array([t1, t2, n, 3 + t1, 3 + t2, 3 + n])


def _permute_matrix(canonical: np.ndarray, axis: NormalAxis) -> np.ndarray:
    perm = _component_permutation(axis)
    out = np.zeros_like(canonical)
    out[np.ix_(perm, perm)] = canonical
    return out


def _permute_vector(canonical: np.ndarray, axis: NormalAxis) -> np.ndarray:
    perm = _component_permutation(axis)
    out = np.zeros_like(canonical)
    out[perm] = canonical
    return out


def tau_z_bounds(w: Wrench, b: FrictionBounds) -> tuple[float, float]:
    """Yaw-torque range a rectangular patch can transmit for a given wrench.

    Contact frame, normal along local z.  The bounds tighten as the
    tangential force and CoP torques use up the corner friction budget.
    """
    fx, fy, fz = w.force
    tx, ty = w.torque[0], w.torque[1]
    mu, X, Y = b.mu, b.half_x, b.half_y
    lo = -mu * (X + Y) * fz + abs(Y * fx - mu * tx) + abs(X * fy - mu * ty)
    hi = mu * (X + Y) * fz - abs(Y * fx + mu * tx) - abs(X * fy + mu * ty)
    return lo, hi


def _upsilon_fixed_canonical(b: FrictionBounds) -> tuple[np.ndarray, np.ndarray]:
    mu, X, Y = b.mu, b.half_x, b.half_y
    U1 = np.array(
        [
            [1.0, 0.0, -mu, 0.0, 0.0, 0.0],
            [0.0, 1.0, -mu, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -Y, 1.0, 0.0, 0.0],
            [0.0, 0.0, -X, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ]
    )
    U2 = U1.copy()
    np.fill_diagonal(U2, -np.diag(U1))
    return U1, U2


def upsilon_fixed(b: FrictionBounds) -> tuple[np.ndarray, np.ndarray]:
    """Upper/lower cone and CoP rows for a fixed contact, normal along z.

    Row meaning (with the h-vectors from build_inequalities):
    fx <= mu fz, fy <= mu fz, fz <= fz_max, tx <= Y fz, ty <= X fz, and the
    mirrored lower bounds in the second matrix.  The yaw-torque rows live
    in the psi matrices.
    """
    return _upsilon_fixed_canonical(b)


def _upsilon_sliding_canonical(b: FrictionBounds) -> tuple[np.ndarray, np.ndarray]:
    X, Y = b.half_x, b.half_y
    U1 = np.zeros((6, 6))
    U1[3] = [0.0, 0.0, -Y, 1.0, 0.0, 0.0]
    U1[4] = [0.0, 0.0, -X, 0.0, 1.0, 0.0]
    U2 = U1.copy()
    U2[3, 3] = -1.0
    U2[4, 4] = -1.0
    return U1, U2


def upsilon_sliding(b: FrictionBounds) -> tuple[np.ndarray, np.ndarray]:
    """CoP rows for a sliding contact whose normal is the local x axis.

    The force rows are identically zero: sliding forces are already pinned
    by the equality rows.  Only the two CoP torques stay bounded by the
    patch dimensions times the normal force; the second matrix carries the
    lower bounds (its last two diagonal entries are -1).
    """
    U1, U2 = _upsilon_sliding_canonical(b)
    return (
        _permute_matrix(U1, NormalAxis.X),
        _permute_matrix(U2, NormalAxis.X),
    )


_SIGN_COMBOS = ((1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0))


def _psi_canonical(b: FrictionBounds) -> tuple[np.ndarray, np.ndarray]:
    mu, X, Y = b.mu, b.half_x, b.half_y
    C = -mu * (X + Y)
    P1 = np.zeros((4, 6))
    P2 = np.zeros((4, 6))
    for i, (s1, s2) in enumerate(_SIGN_COMBOS):
        P1[i] = [s1 * Y, s2 * X, C, s1 * mu, s2 * mu, 1.0]
        P2[i] = [s1 * Y, s2 * X, C, -s1 * mu, -s2 * mu, -1.0]
    return P1, P2


def psi_matrices(b: FrictionBounds, role: str = "foot") -> tuple[np.ndarray, np.ndarray]:
    """Four-row sign expansions of the yaw-torque bounds.

    Psi^1 rows encode tz <= tz_max and Psi^2 rows -tz <= -tz_min, each
    absolute value expanded over its two signs.  role "foot" keeps the
    normal in the z slot; role "hand" permutes columns so the normal takes
    the x slot.
    """
    P1, P2 = _psi_canonical(b)
    if role == "foot":
        return P1, P2
    if role == "hand":
        perm = _component_permutation(NormalAxis.X)
        Q1 = np.zeros_like(P1)
        Q2 = np.zeros_like(P2)
        Q1[:, perm] = P1
        Q2[:, perm] = P2
        return Q1, Q2
    raise DimensionMismatch(f"unknown psi role {role!r}")


def _psi_for_axis(b: FrictionBounds, axis: NormalAxis) -> tuple[np.ndarray, np.ndarray]:
    P1, P2 = _psi_canonical(b)
    perm = _component_permutation(axis)
    Q1 = np.zeros_like(P1)
    Q2 = np.zeros_like(P2)
    Q1[:, perm] = P1
    Q2[:, perm] = P2
    return Q1, Q2


def _upsilon_for_axis(
    b: FrictionBounds, axis: NormalAxis, force_pinned: bool
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Permuted cone rows plus their right-hand sides."""
    if force_pinned:
        U1c, U2c = _upsilon_sliding_canonical(b)
        h1c = np.zeros(6)
        h2c = np.zeros(6)
    else:
        U1c, U2c = _upsilon_fixed_canonical(b)
        h1c = np.zeros(6)
        h2c = np.zeros(6)
        h1c[2] = b.fz_max
        # Lower bound row reads -fz <= -fz_min.
        h2c[2] = -b.fz_min
    return (
        _permute_matrix(U1c, axis),
        _permute_matrix(U2c, axis),
        _permute_vector(h1c, axis),
        _permute_vector(h2c, axis),
    )


def _check_layout(offsets) -> tuple[int, ...]:
    offsets = tuple(int(o) for o in offsets)
    if len(offsets) != 3:
        raise LayoutMismatch(f"expected 3 wrench offsets, got {len(offsets)}")
    prev_end = 3
    for o in offsets:
        if o != prev_end:
            raise LayoutMismatch(
                f"wrench offset {o} does not follow the declared layout "
                f"(com 0-2, then contiguous 6-wide blocks)"
            )
        prev_end = o + 6
    if prev_end != Y_DIM:
        raise LayoutMismatch(f"layout ends at {prev_end}, expected {Y_DIM}")
    return offsets


def build_inequalities(
    contacts,
    offsets=WRENCH_OFFSETS,
    force_pinned=(False, False, True),
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the full 60x21 inequality system for three contacts.

    Args:
        contacts: three (ContactPatch, FrictionBounds) pairs in decision
            order (rf, lf, rh).
        offsets: column offset of each contact's wrench block.
        force_pinned: which contacts have their force fixed by equality rows
            (those get the sliding-style blocks with zero force rows).

    Returns (G, h): first the six 6-row cone blocks (upper then lower per
    contact), then the six 4-row yaw-torque blocks in the same order.
    """
    if len(contacts) != 3:
        raise DimensionMismatch(f"expected 3 contacts, got {len(contacts)}")
    offsets = _check_layout(offsets)

    cone_rows = []
    cone_rhs = []
    tau_rows = []
    for (patch, bounds), off, pinned in zip(contacts, offsets, force_pinned):
        U1, U2, h1, h2 = _upsilon_for_axis(bounds, patch.normal_axis, pinned)
        for U, h in ((U1, h1), (U2, h2)):
            block = np.zeros((6, Y_DIM))
            block[:, off : off + 6] = U
            cone_rows.append(block)
            cone_rhs.append(h)
        P1, P2 = _psi_for_axis(bounds, patch.normal_axis)
        for P in (P1, P2):
            block = np.zeros((4, Y_DIM))
            block[:, off : off + 6] = P
            tau_rows.append(block)

    G = np.vstack(cone_rows + tau_rows)
    h = np.concatenate(cone_rhs + [np.zeros(24)])
    return G, h


def build_sliding_equalities(spec: SlidingSpec) -> tuple[np.ndarray, np.ndarray]:
    """Equality rows pinning a contact force to its sliding/push target.

    Normal along local x (the wall-contact layout): row 0 pins the normal
    force, rows 1 and 2 tie the tangential components to it through the
    cone-edge ratios, rows 3-5 are zero (torques stay free here).
    """
    return sliding_equalities_for_axis(spec, NormalAxis.X)


def sliding_equalities_for_axis(
    spec: SlidingSpec, axis: NormalAxis
) -> tuple[np.ndarray, np.ndarray]:
    """build_sliding_equalities generalized to any normal axis."""
    n = axis.value
    t1, t2 = (n + 1) % 3, (n + 2) % 3
    M = np.zeros((6, 6))
    M[0, n] = 1.0
    M[1, t1] = 1.0
    M[1, n] = -spec.ratio_t1
    M[2, t2] = 1.0
    M[2, n] = -spec.ratio_t2
    k = np.zeros(6)
    k[0] = spec.normal_force
    return M, k


def build_constraint_blocks(
    contacts,
    sliding: SlidingSpec,
    offsets=WRENCH_OFFSETS,
) -> ConstraintBlocks:
    """Full constraint set: inequalities plus hand-force equality rows."""
    G, h = build_inequalities(contacts, offsets=offsets)
    hand_patch, _ = contacts[2]
    M, k = sliding_equalities_for_axis(sliding, hand_patch.normal_axis)
    A_slide = np.zeros((6, Y_DIM))
    A_slide[:, offsets[2] : offsets[2] + 6] = M
    return ConstraintBlocks(G=G, h=h, A_slide=A_slide, k=k)


def cone_margins(w: Wrench, b: FrictionBounds) -> np.ndarray:
    """Slack of every scalar bound for a fixed contact, negative = violated.

    Contact frame, normal along local z.  Ordered: fx upper/lower, fy
    upper/lower, fz upper/lower, tx upper/lower, ty upper/lower, tz
    upper/lower.
    """
    fx, fy, fz = w.force
    tx, ty, tz = w.torque
    mu, X, Y = b.mu, b.half_x, b.half_y
    lo, hi = tau_z_bounds(w, b)
    return np.array(
        [
            mu * fz - fx,
            mu * fz + fx,
            mu * fz - fy,
            mu * fz + fy,
            b.fz_max - fz,
            fz - b.fz_min,
            Y * fz - tx,
            Y * fz + tx,
            X * fz - ty,
            X * fz + ty,
            hi - tz,
            tz - lo,
        ]
    )
