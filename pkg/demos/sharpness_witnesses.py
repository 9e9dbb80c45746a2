"""Why the constants cannot be improved, shown by construction.

For each exponent we ask for a potential whose norm exceeds the
antiperiodic constant but stays below a target gamma, and which has
unbounded solutions. The search uses smoothed plateau bumps and verifies
the result through the Floquet multipliers. A second search produces a
coefficient slightly above the periodic constant for which the forced
linear problem has no periodic solution at all.
"""

import math

from lyacert import certifier as cf
from lyacert import linear_engine as le
from lyacert.constants import ANTIPERIODIC, PERIODIC, beta
from lyacert.errors import PreconditionError


def main(T=1.0):
    print(f"Period T = {T}\n")
    print("Instability witnesses (target gamma = 1.5 x antiperiodic constant)")
    for p in (1, 2, math.inf):
        b = beta(ANTIPERIODIC, p, T)
        P, rep, diag = cf.instability_witness([1.5 * b], 0, p, T)
        largest = max(abs(z) for z in rep.multipliers)
        print(f"  p={p!s:>4}: constant {b:9.4f}, witness norm {diag['norm']:9.4f}, "
              f"largest |multiplier| {largest:10.3e}, verdict {rep.verdict}")

    print("\nResonance witnesses (target gamma = 1.1 x periodic constant)")
    for p in (1, 2, math.inf):
        b = beta(PERIODIC, p, T)
        A, h, diag = cf.resonance_witness([1.1 * b], 0, p, T)
        try:
            le.solve_linear_periodic(A, h)
            outcome = "solved (unexpected)"
        except le.ResonantLinearError:
            outcome = "no periodic solution"
        print(f"  p={p!s:>4}: constant {b:9.4f}, witness norm {diag['norm']:9.4f}, "
              f"trace - 2 = {diag['trace_defect']:+.1e}, forced problem: {outcome}")

    print("\nBelow the constants neither construction is possible:")
    try:
        cf.instability_witness([0.99 * beta(ANTIPERIODIC, 1, T)], 0, 1, T)
    except PreconditionError as exc:
        print(f"  {exc}")


if __name__ == "__main__":
    main()
