"""A short tour of the L^p Lyapunov constants.

Run with ``python3 demos/constants_tour.py``. The script prints the
closed-form constants, checks the factor-four relation between the
periodic and antiperiodic families, and then recovers a few values by
direct minimization of the Lyapunov quotient on a grid.
"""

import math

from lyacert.constants import ANTIPERIODIC, PERIODIC, beta, extremal_function
from lyacert.variational import functional_Ip, minimize_Ip


def main():
    T = 1.0
    print("Closed-form constants on a unit period\n")
    print(f"{'p':>6} {'periodic':>14} {'antiperiodic':>14} {'ratio':>8}")
    for p in (1, 1.5, 2, 3, 10, math.inf):
        per, ant = beta(PERIODIC, p, T), beta(ANTIPERIODIC, p, T)
        print(f"{p:>6} {per:14.8f} {ant:14.8f} {per / ant:8.4f}")

    print("\nThe ratio is always 4. Changing the period rescales every constant")
    print("by T^-(2 - 1/p); for p = 2 and T = 3 that factor is", f"{3.0 ** -1.5:.6f}.")
    print(f"  beta_2^per(3) = {beta(PERIODIC, 2, 3.0):.10f}")
    print(f"  beta_2^per(1) * 3^-1.5 = {beta(PERIODIC, 2, 1.0) * 3.0 ** -1.5:.10f}")

    print("\nAt p = 1 the minimizers are piecewise linear, so the grid quotient is exact:")
    tri = extremal_function(PERIODIC, 1, T, 64)
    saw = extremal_function(ANTIPERIODIC, 1, T, 64)
    print(f"  triangle wave, periodic:   {functional_Ip(PERIODIC, 1, tri):.15f}  (16/T)")
    print(f"  T/2 - x, antiperiodic:     {functional_Ip(ANTIPERIODIC, 1, saw):.15f}  (4/T)")

    print("\nNumerical minimization of the quotient with 2048 cells:")
    for bc in (PERIODIC, ANTIPERIODIC):
        for p in (1, 2, math.inf):
            res = minimize_Ip(bc, p, T, 2048)
            exact = beta(bc, p, T)
            print(f"  {bc:>12} p={p!s:>4}: {res.value:.8f} vs {exact:.8f}"
                  f"  (rel. diff {abs(res.value - exact) / exact:.1e})")


if __name__ == "__main__":
    main()
