"""A nonlinear periodic problem that sup-norm criteria cannot handle.

We solve u'' + m(t) (0.6 u + 0.3 tanh u) = sin t on a period of 2 pi.
The weight m is a tall narrow bump: its peak times the Hessian range
passes the periodic eigenvalues 1 and 4, so classical sup-norm
nonresonance conditions fail. Its integral is small, however, and the
L^1 condition against the periodic constant holds. The solver should then
find one periodic solution, whatever the starting guess.
"""

import math

import numpy as np

from lyacert import resonant as rs

T = 2.0 * math.pi
KAPPA = 30.0


def weight(t):
    return 6.0 * np.exp(KAPPA * (np.cos(np.asarray(t)) - 1.0))


def main():
    prob = rs.logcosh_problem([[0.6]], [0.3], weight, T, ["1"], "narrow weight")
    rep = rs.check_t1_hypotheses(prob)
    print(f"sup of the Hessian bound: {prob.upper(np.array([0.0]))[0, 0, 0]:.3f}  (eigenvalues 1, 4 crossed)")
    print(f"L1 norm of the bound:     {rep.norms[0]:.4f}")
    print(f"periodic constant, p=1:   {rep.constants[0]:.4f}")
    print(f"hypotheses pass: {rep.passed}  ({rep.note})\n")

    forcing = lambda t: np.sin(t)[:, None]
    rng = np.random.default_rng(1)
    steps = 2048
    sols = []
    for k in range(4):
        t = np.linspace(0, T, steps + 1)
        init = (rng.normal() * 3 * np.cos(t + rng.uniform(0, T)) + rng.normal())[:, None]
        sol = rs.solve_resonant(prob, forcing, init=init, steps=steps)
        sols.append(sol.samples)
        print(f"start {k + 1}: phase {sol.phase}, {sol.iterations} iterations, "
              f"residual {sol.residual_sup:.1e}, max |u| {np.max(np.abs(sol.samples)):.5f}")
    spread = max(np.max(np.abs(a - sols[0])) for a in sols)
    print(f"\nlargest difference between solutions from different starts: {spread:.1e}")


if __name__ == "__main__":
    main()
