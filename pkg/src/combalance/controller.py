"""Closed-loop layer: task-space control laws and a quasi-static simulator.

The laws here are deliberately small and separable. Each one is a pure
function over plain vectors so it can be unit-tested against its analytic
response; ``run_scenario`` wires them around ``solve_centroidal`` with a
minimal contact plant (linear wall stiffness, lever-rule foot loading,
first-order force-sensor lag) to produce a tick-by-tick trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from .centroidal import CentroidalSetup, desired_y, solve_centroidal
from .constraints import SlidingSpec
from .csa import ContactMode, SupportPolygon
from .errors import BalanceInfeasible, DimensionMismatch
from .spatial import Wrench, _as_vec

if TYPE_CHECKING:
    from .scenario import ScenarioConfig


@dataclass(frozen=True)
class Gains:
    """Controller gains shared by the task-space laws.

    ``k_com`` has units 1/s^2; the damping ``b_com`` defaults to the
    critically damped value ``2*sqrt(k_com)``. ``admittance`` maps a wrench
    error (contact-frame components, forces then torques) to a pose rate;
    axes set to zero are position-held. ``a_z`` converts a foot force
    difference error into a vertical offset rate.
    """

    k_com: float = 16.0
    b_com: float | None = None
    admittance: np.ndarray = field(
        default_factory=lambda: np.array([3e-4, 0.0, 0.0, 0.0, 0.0, 0.0])
    )
    a_z: float = 2e-5
    k_posture: float = 9.0

    def __post_init__(self):
        if not self.k_com > 0.0:
            raise DimensionMismatch("k_com must be positive")
        if self.b_com is None:
            object.__setattr__(self, "b_com", 2.0 * math.sqrt(self.k_com))
        if not self.b_com > 0.0:
            raise DimensionMismatch("b_com must be positive")
        adm = _as_vec(self.admittance, 6, "admittance")
        if np.any(adm < 0.0):
            raise DimensionMismatch("admittance entries must be nonnegative")
        object.__setattr__(self, "admittance", adm)
        if self.a_z < 0.0:
            raise DimensionMismatch("a_z must be nonnegative")
        if self.k_posture < 0.0:
            raise DimensionMismatch("k_posture must be nonnegative")


@dataclass
class SimState:
    """Mutable plant state carried across simulation ticks."""

    t: float
    com: np.ndarray
    com_vel: np.ndarray
    hand_pos: np.ndarray
    measured_hand_wrench: Wrench
    foot_fz: tuple[float, float]
    virtual_offset_z: float = 0.0


@dataclass(frozen=True)
class TraceRecord:
    """One simulation tick, as written to trace files."""

    t: float
    com: np.ndarray
    com_des: np.ndarray
    hand_force_measured: float
    hand_force_desired: float
    foot_fz: tuple[float, float]
    csa_vertices: np.ndarray | None
    status: str
    newton_euler_residual: float
    sliding_residual: float = 0.0


def com_task_accel(com, com_vel, com_des, com_des_vel, com_des_acc, gains: Gains) -> np.ndarray:
    """PD-plus-feedforward acceleration pulling the CoM to its reference."""
    c = np.asarray(com, dtype=float)
    cd = np.asarray(com_des, dtype=float)
    v = np.asarray(com_vel, dtype=float)
    vd = np.asarray(com_des_vel, dtype=float)
    ad = np.asarray(com_des_acc, dtype=float)
    return gains.k_com * (cd - c) + gains.b_com * (vd - v) + ad


def admittance_update(pose, w_meas, w_des, admittance, dt: float) -> np.ndarray:
    """Move a pose along each axis in proportion to its wrench error.

    All four vectors share one length (typically 6). Entries of
    ``admittance`` that are zero leave the corresponding pose axis untouched.
    """
    p = np.asarray(pose, dtype=float)
    n = p.shape[0]
    gain = _as_vec(admittance, n, "admittance")
    err = _as_vec(w_des, n, "w_des") - _as_vec(w_meas, n, "w_meas")
    return p + gain * err * dt


def posture_regulator(q, q_dot, q_ref, k: float) -> np.ndarray:
    """Critically damped joint-space pull toward a reference posture."""
    q = np.asarray(q, dtype=float)
    q_dot = np.asarray(q_dot, dtype=float)
    q_ref = np.asarray(q_ref, dtype=float)
    if q.shape != q_ref.shape or q.shape != q_dot.shape:
        raise DimensionMismatch(
            f"posture vectors disagree: q {q.shape}, q_dot {q_dot.shape}, q_ref {q_ref.shape}"
        )
    return k * (q_ref - q) - 2.0 * math.sqrt(k) * q_dot


def foot_force_difference_step(
    f_lf: float,
    f_rf: float,
    f_lf_des: float,
    f_rf_des: float,
    a_z: float,
    dt: float,
    z: float,
) -> tuple[float, float]:
    """Integrate the vertical offset that rebalances left/right foot load.

    Returns ``(new_z, z_dot)``; the caller retargets the feet with velocity
    ``-z_dot`` on the left and ``+z_dot`` on the right (displacement counted
    positive downward, so a positive offset unloads the left foot).
    """
    z_dot = a_z * ((f_lf - f_rf) - (f_lf_des - f_rf_des))
    return z + z_dot * dt, z_dot


def _interp_vector(ts: np.ndarray, points: np.ndarray, t: float) -> np.ndarray:
    """Piecewise-linear vector interpolation, clamped at both ends."""
    return np.array([np.interp(t, ts, points[:, k]) for k in range(points.shape[1])])


def _hand_axes(config: "ScenarioConfig") -> tuple[np.ndarray, int, tuple[int, int]]:
    hand = config.hand
    normal_world = hand.pose.rotation[:, hand.normal_axis.value]
    return normal_world, hand.normal_axis.value, hand.tangent_axes()


def _hand_targets_at(
    config: "ScenarioConfig", t: float, force: float
) -> tuple[SlidingSpec, ContactMode, np.ndarray, np.ndarray]:
    """Hand force target, contact mode, surface point, and surface velocity.

    While the wipe path moves the hand, the tangential force components are
    pinned to the friction-cone edge opposing the motion; at rest they are
    pinned to zero (a static push).
    """
    surface = np.array(config.hand.pose.position, dtype=float)
    vel = np.zeros(3)
    ratio_t1 = ratio_t2 = 0.0
    mode = ContactMode.FIXED
    if config.wipe_trajectory is not None:
        ts, pts = config.wipe_trajectory
        surface = _interp_vector(ts, pts, t)
        eps = 1e-6
        vel = (_interp_vector(ts, pts, t + eps) - _interp_vector(ts, pts, t - eps)) / (2 * eps)
        R = config.hand.pose.rotation
        v_local = R.T @ vel
        t1, t2 = config.hand.tangent_axes()
        v_tan = np.array([v_local[t1], v_local[t2]])
        speed = float(np.linalg.norm(v_tan))
        if speed > 1e-9 and force > 0.0:
            ratio_t1, ratio_t2 = -config.hand.mu * v_tan / speed
            mode = ContactMode.SLIDING
    return SlidingSpec(force, ratio_t1, ratio_t2), mode, surface, vel


def _setup_at(config: "ScenarioConfig", spec: SlidingSpec, mode: ContactMode, surface: np.ndarray) -> CentroidalSetup:
    hand = replace(
        config.hand,
        pose=replace(config.hand.pose, position=surface),
        mode=mode,
    )
    return CentroidalSetup(
        mass=config.mass,
        right_foot=config.right_foot,
        left_foot=config.left_foot,
        hand=hand,
        hand_target=spec,
        foot_fz_limits=config.foot_fz_limits,
        com_fix=config.com_fix,
        csa_middle=config.csa_middle,
        g=config.gravity,
    )


def _environment_wrench(
    config: "ScenarioConfig", hand_pos: np.ndarray, surface: np.ndarray, surface_vel: np.ndarray
) -> Wrench:
    """Reaction the wall applies for a commanded hand position.

    Linear stiffness along the surface normal; while the hand slides, kinetic
    friction opposes the motion and a drag term trims the normal force, which
    is what gives the wipe onset its transient.
    """
    plant = config.plant
    normal_world, _, _ = _hand_axes(config)
    v_tan = surface_vel - (surface_vel @ normal_world) * normal_world
    speed = float(np.linalg.norm(v_tan))
    penetration = float((surface - hand_pos) @ normal_world)
    f_n = plant.wall_stiffness * max(penetration, 0.0) - plant.wall_drag * speed
    f_n = max(f_n, 0.0)
    force = normal_world * f_n
    if speed > 1e-9 and f_n > 0.0:
        force = force - config.hand.mu * f_n * v_tan / speed
    return Wrench(force=force, torque=np.zeros(3))


def run_scenario(config: "ScenarioConfig") -> list[TraceRecord]:
    """Simulate one scenario tick by tick and return its trace.

    Each tick evaluates the force and wipe targets, solves the static
    distribution QP, feeds the solved hand wrench into the admittance and the
    foot loads into the force-difference law, then advances a small plant:
    the CoM as a double integrator driven by ``com_task_accel``, the measured
    hand wrench as a first-order lag toward the wall reaction, and the foot
    loads by lever rule plus the virtual-offset stiffness term.

    The admittance works on the wrench the hand applies to the wall, so a
    shortfall in pressing force drives the hand deeper. A tick whose QP turns
    out infeasible is recorded with a flagged status and ends the run;
    nothing is raised.
    """
    gains = config.gains
    dt = config.dt
    plant = config.plant
    normal_world, n_axis, _ = _hand_axes(config)

    profile_ts, profile_fs = config.force_profile

    # Rest stance: solve the zero-time problem once to place the CoM.
    force0 = float(np.interp(0.0, profile_ts, profile_fs))
    spec0, mode0, surface0, _ = _hand_targets_at(config, 0.0, force0)
    first = solve_centroidal(_setup_at(config, spec0, mode0, surface0))
    state = SimState(
        t=0.0,
        com=first.y.com.copy(),
        com_vel=np.zeros(3),
        hand_pos=surface0.copy(),
        measured_hand_wrench=Wrench.zero(),
        foot_fz=(float(first.y.w_lf.force[2]), float(first.y.w_rf.force[2])),
        virtual_offset_z=0.0,
    )
    normal_offset = 0.0

    records: list[TraceRecord] = []
    steps = int(round(config.t_end / dt))
    lag = dt / plant.wrench_lag if plant.wrench_lag > 0 else 1.0

    for k in range(steps + 1):
        t = k * dt
        force_target = float(np.interp(t, profile_ts, profile_fs))
        spec, mode, surface, surface_vel = _hand_targets_at(config, t, force_target)

        try:
            result = solve_centroidal(_setup_at(config, spec, mode, surface))
        except BalanceInfeasible:
            last_des = records[-1].com_des if records else state.com
            records.append(
                TraceRecord(
                    t=t,
                    com=state.com.copy(),
                    com_des=last_des.copy(),
                    hand_force_measured=float(
                        state.measured_hand_wrench.force @ normal_world
                    ),
                    hand_force_desired=force_target,
                    foot_fz=state.foot_fz,
                    csa_vertices=None,
                    status="infeasible",
                    newton_euler_residual=float("nan"),
                    sliding_residual=float("nan"),
                )
            )
            break

        com_des = result.y.com
        f_lf_des = float(result.y.w_lf.force[2])
        f_rf_des = float(result.y.w_rf.force[2])

        # Hand admittance on the applied wrench: desired = -target along the
        # contact axes, measured = -(reaction on the hand).
        R = config.hand.pose.rotation
        w_des_local = -np.concatenate([result.y.w_rh.force, result.y.w_rh.torque])
        w_meas_local = -np.concatenate(
            [R.T @ state.measured_hand_wrench.force, R.T @ state.measured_hand_wrench.torque]
        )
        pose_local = np.zeros(6)
        pose_local[n_axis] = normal_offset
        pose_local = admittance_update(pose_local, w_meas_local, w_des_local, gains.admittance, dt)
        normal_offset = float(pose_local[n_axis])

        new_z, z_dot = foot_force_difference_step(
            state.foot_fz[0], state.foot_fz[1], f_lf_des, f_rf_des, gains.a_z, dt, state.virtual_offset_z
        )
        state.virtual_offset_z = new_z

        # Plant: CoM double integrator under the task-space law.
        acc = com_task_accel(state.com, state.com_vel, com_des, np.zeros(3), np.zeros(3), gains)
        state.com_vel = state.com_vel + acc * dt
        state.com = state.com + state.com_vel * dt

        # Plant: commanded hand position and the wall's reaction to it.
        state.hand_pos = surface + normal_world * normal_offset
        w_env = _environment_wrench(config, state.hand_pos, surface, surface_vel)
        state.measured_hand_wrench = Wrench(
            force=state.measured_hand_wrench.force
            + lag * (w_env.force - state.measured_hand_wrench.force),
            torque=state.measured_hand_wrench.torque
            + lag * (w_env.torque - state.measured_hand_wrench.torque),
        )

        # Plant: foot loads by lever rule with the virtual-offset correction.
        f_feet = config.mass * config.gravity - float(w_env.force[2])
        y_rf = config.right_foot.pose.position[1]
        y_lf = config.left_foot.pose.position[1]
        span = y_lf - y_rf
        frac = (state.com[1] - y_rf) / span if abs(span) > 1e-12 else 0.5
        frac = min(max(frac, 0.0), 1.0)
        base_lf = f_feet * frac
        base_rf = f_feet - base_lf
        state.foot_fz = (
            max(base_lf - plant.foot_stiffness * state.virtual_offset_z, 0.0),
            max(base_rf + plant.foot_stiffness * state.virtual_offset_z, 0.0),
        )
        state.t = t

        records.append(
            TraceRecord(
                t=t,
                com=state.com.copy(),
                com_des=com_des.copy(),
                hand_force_measured=float(state.measured_hand_wrench.force @ normal_world),
                hand_force_desired=force_target,
                foot_fz=state.foot_fz,
                csa_vertices=result.csa.vertices.copy(),
                status=str(result.status.value),
                newton_euler_residual=result.newton_euler_residual,
                sliding_residual=result.sliding_residual,
            )
        )
    return records
