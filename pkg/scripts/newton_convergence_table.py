#!/usr/bin/env python3
"""Print the first-step Newton convergence table for several time steps.

Starts every solve from the projected initial bump at rest and reports the
residual reduction of the first iterations, one column per time step.
"""
import argparse

from baroflow import BarotropicEOS, NewtonConfig, build_mesh, gaussian_bump, \
    initial_state, newton_solve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--segments", type=int, default=200,
                        help="mesh cells per direction (default 200)")
    parser.add_argument("--taus", type=float, nargs="+",
                        default=[0.01, 0.005, 0.0025])
    parser.add_argument("--iterations", type=int, default=3)
    args = parser.parse_args()

    mesh = build_mesh((-5.0, 5.0, -5.0, 5.0), args.segments)
    eos = BarotropicEOS(a=1.0, gamma=1.4)
    state0 = initial_state(mesh, gaussian_bump(alpha=2.0, beta=20.0))

    columns = {}
    for tau in args.taus:
        _, history = newton_solve(state0, tau, mesh, eos,
                                  NewtonConfig(tol=5e-14, max_iter=8))
        columns[tau] = history.relative_errors

    header = "iteration | " + " | ".join(f"tau = {tau:g}" for tau in args.taus)
    print(f"M = {args.segments}, {mesh.n_nodes} nodes")
    print(header)
    print("-" * len(header))
    for k in range(args.iterations):
        cells = [f"{columns[tau][k]:.3e}" if k < len(columns[tau]) else "-"
                 for tau in args.taus]
        print(f"{k + 1:9d} | " + " | ".join(f"{c:>10s}" for c in cells))


if __name__ == "__main__":
    main()
