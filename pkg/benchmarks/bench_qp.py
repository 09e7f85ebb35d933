"""Compare the compiled interior-point kernel against the numpy fallback.

Run from the repo root after an editable install:

    python3 benchmarks/bench_qp.py --repeats 200
"""

import argparse
import statistics
import time

import numpy as np

from combalance.centroidal import CentroidalSetup, assemble
from combalance.constraints import SlidingSpec
from combalance.csa import ContactMode, ContactPatch, NormalAxis
from combalance.qp import QpProblem, solve_qp
from combalance.qp import solver as _solver
from combalance.spatial import ContactPose, frame_from_x_axis


def stance_problem() -> QpProblem:
    """The 21-variable balance problem a simulation tick actually solves."""
    rf = ContactPatch(
        pose=ContactPose(position=np.array([0.0, -0.095, 0.0]), rotation=np.eye(3)),
        half_x=0.07, half_y=0.04, mu=0.7, mode=ContactMode.FIXED,
    )
    lf = ContactPatch(
        pose=ContactPose(position=np.array([0.0, 0.095, 0.0]), rotation=np.eye(3)),
        half_x=0.07, half_y=0.04, mu=0.7, mode=ContactMode.FIXED,
    )
    hand = ContactPatch(
        pose=ContactPose(
            position=np.array([0.45, 0.0, 1.2]),
            rotation=frame_from_x_axis(np.array([-1.0, 0.0, 0.0])),
        ),
        half_x=0.05, half_y=0.05, mu=0.5,
        mode=ContactMode.FIXED, normal_axis=NormalAxis.X,
    )
    setup = CentroidalSetup(
        mass=39.0,
        right_foot=rf,
        left_foot=lf,
        hand=hand,
        hand_target=SlidingSpec(40.0),
    )
    return assemble(setup)


def random_problem(rng: np.random.Generator) -> QpProblem:
    n = int(rng.integers(4, 16))
    m = int(rng.integers(4, 30))
    p = int(rng.integers(0, min(4, n - 1)))
    Q = rng.normal(size=(n, n))
    P = Q.T @ Q + 0.5 * np.eye(n)
    y0 = rng.normal(size=n)
    G = rng.normal(size=(m, n))
    A = rng.normal(size=(p, n)) if p else np.zeros((0, n))
    return QpProblem(
        P=P,
        q=rng.normal(size=n),
        G=G,
        h=G @ y0 + np.abs(rng.normal(size=m)) + 0.01,
        A=A,
        b=A @ y0 if p else np.zeros(0),
    )


def time_kernel(problems, kernel: str, repeats: int) -> list[float]:
    samples = []
    for prob in problems:
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            solve_qp(prob, kernel=kernel)
            best = min(best, time.perf_counter() - t0)
        samples.append(best)
    return samples


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50,
                        help="solves per problem; best-of is recorded")
    parser.add_argument("--random", type=int, default=40,
                        help="number of random problems besides the stance one")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if not _solver.HAVE_COMPILED:
        print("warning: compiled kernel unavailable, timing the fallback against itself")

    rng = np.random.default_rng(args.seed)
    problems = [stance_problem()] + [random_problem(rng) for _ in range(args.random)]

    rows = []
    for kernel in ("compiled", "python"):
        samples = time_kernel(problems, kernel, args.repeats)
        rows.append((kernel, samples))

    print(f"{'kernel':<10} {'stance ms':>10} {'median ms':>10} {'p90 ms':>10}")
    for kernel, samples in rows:
        rest = sorted(samples[1:])
        median = statistics.median(rest) if rest else samples[0]
        p90 = rest[int(0.9 * (len(rest) - 1))] if rest else samples[0]
        print(f"{kernel:<10} {1e3 * samples[0]:>10.3f} {1e3 * median:>10.3f} {1e3 * p90:>10.3f}")

    comp = statistics.median(rows[0][1])
    pure = statistics.median(rows[1][1])
    if comp > 0:
        print(f"speedup (median, all problems): {pure / comp:.2f}x")


if __name__ == "__main__":
    main()
