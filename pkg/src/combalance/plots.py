"""Headless SVG plots for support areas and simulation traces."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _close_ring(vertices: np.ndarray) -> np.ndarray:
    return np.vstack([vertices, vertices[:1]])


def plot_csa(csa, feet, middle, path) -> None:
    """Top-down view: foot rectangles, the support area, and its middle."""
    fig, ax = plt.subplots(figsize=(5, 5))
    ring = _close_ring(csa.vertices)
    ax.fill(ring[:, 0], ring[:, 1], alpha=0.25, label="support area")
    ax.plot(ring[:, 0], ring[:, 1])
    for patch in feet:
        corners = patch.corners_world()[:, :2]
        square = _close_ring(corners)
        ax.plot(square[:, 0], square[:, 1], color="black")
    ax.plot([middle[0]], [middle[1]], marker="x", markersize=9, label="target CoM")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_force_tracking(records, path) -> None:
    """Measured versus commanded hand normal force over time."""
    t = [r.t for r in records]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(t, [r.hand_force_desired for r in records], label="commanded")
    ax.plot(t, [r.hand_force_measured for r in records], label="measured")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("hand normal force [N]")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_com_path(records, path) -> None:
    """CoM reference and response in the ground plane, with the last support area."""
    fig, ax = plt.subplots(figsize=(5, 5))
    com = np.array([r.com[:2] for r in records])
    des = np.array([r.com_des[:2] for r in records])
    ax.plot(des[:, 0], des[:, 1], linestyle="--", label="commanded CoM")
    ax.plot(com[:, 0], com[:, 1], label="CoM response")
    last = next((r for r in reversed(records) if r.csa_vertices is not None), None)
    if last is not None:
        ring = _close_ring(last.csa_vertices)
        ax.plot(ring[:, 0], ring[:, 1], color="gray", label="final support area")
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
