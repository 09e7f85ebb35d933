"""Static force distribution across two feet and a hand as a dense QP.

The decision vector stacks the CoM position and one 6D wrench per contact,
all wrenches in their own contact frame:

    [com(3) | right foot(6) | left foot(6) | hand(6)]   -> 21 entries

Equality rows encode the Newton-Euler balance, the hand force target, and
the CoM pins; inequality rows are the stacked contact-stability blocks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import (
    CONTACT_NAMES,
    WRENCH_OFFSETS,
    Y_DIM,
    FrictionBounds,
    SlidingSpec,
    build_constraint_blocks,
)
from .csa import ContactMode, ContactPatch, SupportPolygon, build_csa, contains
from .errors import BalanceInfeasible, DimensionMismatch, NumericalBreakdown
from .qp import QpProblem, QpSolution, SolverStatus, solve_qp
from .spatial import (
    GRAVITY,
    Wrench,
    _as_vec,
    gravity_com_block,
    gravity_offset_block,
    wrench_map,
)

_NE_TOL = 1e-6
_SLIDE_TOL = 1e-8
_MARGIN_TOL = 1e-8
_CSA_MIDDLES = ("centroid", "chebyshev")


@dataclass(frozen=True)
class DecisionVector:
    """Solved CoM and contact wrenches, unpacked from the 21-vector."""

    com: np.ndarray
    w_rf: Wrench
    w_lf: Wrench
    w_rh: Wrench

    def __post_init__(self):
        object.__setattr__(self, "com", _as_vec(self.com, 3, "com"))

    def to_array(self) -> np.ndarray:
        return np.concatenate(
            [self.com, self.w_rf.as_vector(), self.w_lf.as_vector(), self.w_rh.as_vector()]
        )

    @classmethod
    def from_array(cls, y) -> "DecisionVector":
        y = _as_vec(y, Y_DIM, "y")
        wrenches = [
            Wrench.from_vector(y[off : off + 6], frame=name)
            for off, name in zip(WRENCH_OFFSETS, CONTACT_NAMES)
        ]
        return cls(com=y[:3], w_rf=wrenches[0], w_lf=wrenches[1], w_rh=wrenches[2])


@dataclass(frozen=True)
class CentroidalSetup:
    """One static balance problem: geometry, limits, and targets."""

    mass: float
    right_foot: ContactPatch
    left_foot: ContactPatch
    hand: ContactPatch
    hand_target: SlidingSpec | None = None
    fz_min: float = 0.0
    fz_max: float | None = None
    foot_fz_limits: tuple | None = None
    com_fix: np.ndarray | None = None
    csa_middle: str = "centroid"
    y_des: np.ndarray | None = None
    g: float = GRAVITY

    def __post_init__(self):
        if not self.mass > 0.0:
            raise DimensionMismatch("mass must be positive")
        if not self.g > 0.0:
            raise DimensionMismatch("g must be positive")
        if self.csa_middle not in _CSA_MIDDLES:
            raise DimensionMismatch(
                f"csa_middle must be one of {_CSA_MIDDLES}, got {self.csa_middle!r}"
            )
        if self.com_fix is not None:
            object.__setattr__(self, "com_fix", _as_vec(self.com_fix, 2, "com_fix"))
        if self.y_des is not None:
            object.__setattr__(self, "y_des", _as_vec(self.y_des, Y_DIM, "y_des"))
        if self.foot_fz_limits is not None:
            limits = tuple((float(lo), float(hi)) for lo, hi in self.foot_fz_limits)
            if len(limits) != 2:
                raise DimensionMismatch("foot_fz_limits needs one (min, max) pair per foot")
            object.__setattr__(self, "foot_fz_limits", limits)

    @property
    def feet(self) -> tuple[ContactPatch, ContactPatch]:
        return self.right_foot, self.left_foot

    @property
    def contacts(self) -> tuple[ContactPatch, ContactPatch, ContactPatch]:
        return self.right_foot, self.left_foot, self.hand

    def weight(self) -> float:
        return self.mass * self.g

    def effective_fz_max(self) -> float:
        return self.weight() * 10.0 if self.fz_max is None else self.fz_max

    def hand_spec(self) -> SlidingSpec:
        spec = self.hand_target if self.hand_target is not None else SlidingSpec(0.0)
        if self.hand.mode is ContactMode.SLIDING:
            spec.validate_cone_edge(self.hand.mu)
        return spec

    def contact_bounds(self) -> tuple[FrictionBounds, FrictionBounds, FrictionBounds]:
        """Friction and force-range envelope for each contact, feet first."""
        ranges = [(self.fz_min, self.effective_fz_max())] * 3
        if self.foot_fz_limits is not None:
            ranges[0], ranges[1] = self.foot_fz_limits
        return tuple(
            FrictionBounds(
                mu=patch.mu,
                half_x=patch.half_x,
                half_y=patch.half_y,
                fz_min=lo,
                fz_max=hi,
            )
            for patch, (lo, hi) in zip(self.contacts, ranges)
        )


@dataclass(frozen=True)
class CentroidalResult:
    """Solved distribution plus the support area it implies."""

    y: DecisionVector
    world_wrenches: tuple[Wrench, Wrench, Wrench]
    csa: SupportPolygon
    status: SolverStatus
    newton_euler_residual: float
    sliding_residual: float
    qp_solution: QpSolution


def hand_force_world(setup: CentroidalSetup, spec: SlidingSpec | None = None) -> np.ndarray:
    """World-frame force the hand target asks for."""
    if spec is None:
        spec = setup.hand_spec()
    n = setup.hand.normal_axis.value
    t1, t2 = setup.hand.tangent_axes()
    f = np.zeros(3)
    f[n] = spec.normal_force
    f[t1] = spec.ratio_t1 * spec.normal_force
    f[t2] = spec.ratio_t2 * spec.normal_force
    return setup.hand.pose.rotation @ f


def reference_csa(setup: CentroidalSetup) -> SupportPolygon:
    """Support area for the targeted (not yet solved) hand force."""
    return build_csa(
        setup.feet,
        setup.hand.pose.position,
        hand_force_world(setup),
        setup.mass,
        g=setup.g,
    )


def desired_y(setup: CentroidalSetup, csa: SupportPolygon | None = None) -> DecisionVector:
    """Reference decision vector the QP pulls toward.

    CoM sits at the middle of the support area, the feet split the leftover
    weight as pure vertical forces, and the hand takes exactly its target
    with zero torque.
    """
    if csa is None:
        csa = reference_csa(setup)
    middle = csa.chebyshev_center() if setup.csa_middle == "chebyshev" else csa.centroid()
    spec = setup.hand_spec()
    f_hand = hand_force_world(setup, spec)
    leftover = setup.weight() - f_hand[2]

    n = setup.hand.normal_axis.value
    t1, t2 = setup.hand.tangent_axes()
    f_local = np.zeros(3)
    f_local[n] = spec.normal_force
    f_local[t1] = spec.ratio_t1 * spec.normal_force
    f_local[t2] = spec.ratio_t2 * spec.normal_force

    foot_force = np.array([0.0, 0.0, 0.5 * leftover])
    return DecisionVector(
        com=np.array([middle[0], middle[1], 0.0]),
        w_rf=Wrench(force=foot_force, torque=np.zeros(3), frame=CONTACT_NAMES[0]),
        w_lf=Wrench(force=foot_force, torque=np.zeros(3), frame=CONTACT_NAMES[1]),
        w_rh=Wrench(force=f_local, torque=np.zeros(3), frame=CONTACT_NAMES[2]),
    )


def newton_euler_rows(setup: CentroidalSetup) -> tuple[np.ndarray, np.ndarray]:
    """Six equality rows balancing gravity against the contact wrenches."""
    A = np.zeros((6, Y_DIM))
    A[:, 0:3] = gravity_com_block(setup.mass, setup.g)
    for patch, off in zip(setup.contacts, WRENCH_OFFSETS):
        A[:, off : off + 6] = wrench_map(patch.pose)
    b = -gravity_offset_block(setup.mass, setup.g)
    return A, b


def assemble(setup: CentroidalSetup) -> QpProblem:
    """Build the QP: tracking objective, stability cones, balance rows."""
    spec = setup.hand_spec()
    contacts = list(zip(setup.contacts, setup.contact_bounds()))
    blocks = build_constraint_blocks(contacts, spec)

    A_ne, b_ne = newton_euler_rows(setup)
    pin_rows = [np.zeros(Y_DIM)]
    pin_rhs = [0.0]
    pin_rows[0][2] = 1.0
    if setup.com_fix is not None:
        for axis, val in enumerate(setup.com_fix):
            row = np.zeros(Y_DIM)
            row[axis] = 1.0
            pin_rows.append(row)
            pin_rhs.append(float(val))
    A = np.vstack([A_ne, blocks.A_slide, np.array(pin_rows)])
    b = np.concatenate([b_ne, blocks.k, np.array(pin_rhs)])

    y_des = setup.y_des if setup.y_des is not None else desired_y(setup).to_array()
    return QpProblem(
        P=2.0 * np.eye(Y_DIM),
        q=-2.0 * y_des,
        G=blocks.G,
        h=blocks.h,
        A=A,
        b=b,
    )


def world_wrench(patch: ContactPatch, w: Wrench) -> Wrench:
    """Contact wrench re-expressed in world axes, torque about the contact point."""
    R = patch.pose.rotation
    return Wrench(force=R @ w.force, torque=R @ w.torque)


def solve_centroidal(
    setup: CentroidalSetup, *, max_iter: int = 100, kernel: str | None = None
) -> CentroidalResult:
    """Solve one static balance problem and vet the result.

    Raises BalanceInfeasible when no admissible distribution exists, and
    NumericalBreakdown when the solver stalls or the solution fails the
    physical sanity checks.
    """
    problem = assemble(setup)
    solution = solve_qp(problem, max_iter=max_iter, kernel=kernel)
    if solution.status is SolverStatus.INFEASIBLE:
        raise BalanceInfeasible(
            "no contact-force distribution balances this setup: "
            + ("; ".join(solution.diagnostics) or "solver certificate")
        )
    if solution.status is not SolverStatus.OPTIMAL:
        raise NumericalBreakdown(
            f"force distribution did not converge: {'; '.join(solution.diagnostics)}"
        )

    vec = DecisionVector.from_array(solution.y)
    wrenches = tuple(
        world_wrench(patch, w)
        for patch, w in zip(setup.contacts, (vec.w_rf, vec.w_lf, vec.w_rh))
    )
    csa = build_csa(
        setup.feet,
        setup.hand.pose.position,
        wrenches[2].force,
        setup.mass,
        g=setup.g,
        hand_torque=wrenches[2].torque,
    )

    A_ne, b_ne = newton_euler_rows(setup)
    ne_residual = float(np.max(np.abs(A_ne @ solution.y - b_ne)))
    if ne_residual > _NE_TOL:
        raise NumericalBreakdown(f"force balance residual {ne_residual:.3e} exceeds {_NE_TOL}")
    slide_rows = problem.A[6:12]
    slide_rhs = problem.b[6:12]
    slide_residual = float(np.max(np.abs(slide_rows @ solution.y - slide_rhs)))
    if slide_residual > _SLIDE_TOL:
        raise NumericalBreakdown(
            f"hand-force equality residual {slide_residual:.3e} exceeds {_SLIDE_TOL}"
        )
    worst_margin = float(np.min(problem.h - problem.G @ solution.y))
    if worst_margin < -_MARGIN_TOL:
        raise NumericalBreakdown(
            f"a stability margin is violated by {-worst_margin:.3e}"
        )
    if not contains(csa, vec.com[:2]):
        raise NumericalBreakdown(
            "solved CoM fell outside the support area built from its own hand wrench"
        )

    return CentroidalResult(
        y=vec,
        world_wrenches=wrenches,
        csa=csa,
        status=solution.status,
        newton_euler_residual=ne_residual,
        sliding_residual=slide_residual,
        qp_solution=solution,
    )
