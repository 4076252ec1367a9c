"""Descending Frobenius series at the singular point r = infinity.

Shows the indicial roots and first coefficients of the two ODEs the
package actually solves, then a synthetic example where the recurrence
hits a genuine resonance and stops early.
"""

import numpy as np

from masscap import InfinitySingularODE, indicial_roots, series_coefficients
from masscap.coefficients import growth_ode
from masscap.schwarzschild import potential_ode


def describe(name, ode, p):
    roots = indicial_roots(ode)
    print(f"{name} at p = {p}")
    print(f"  indicial roots: {roots.larger:g} and {roots.smaller:g} (gap {roots.gap:g})")
    for root in (roots.larger, roots.smaller):
        sol = series_coefficients(ode, root, n=1)
        print(f"  root {root:g}: a1 = {sol.coefficients[0]:.12g}")
    print()


def main():
    p = 1.5
    describe("potential equation", potential_ode(p), p)
    describe("coefficient-pair reduction", growth_ode(p), p)

    print("series convergence for the decaying potential branch")
    ode = potential_ode(p)
    r = 50.0
    print(f"  residual of the truncated series at r = {r:g}:")
    for n in (1, 2, 3, 4, 5):
        sol = series_coefficients(ode, -3.0, n=n)
        res = abs(float(sol.ode_residual(ode, r)))
        print(f"    {n} terms: {res:.3e}")
    print()

    print("resonance handling")
    print("  potential equation, constant branch at p = 1.5: the recurrence")
    print("  divides by zero at index 3, but the obstruction vanishes, so the")
    print("  series continues with zero coefficients and only a flag is set.")
    sol = series_coefficients(potential_ode(1.5), 0.0, n=5)
    print(f"    coefficients {sol.coefficients}, resonance_flag {sol.resonance_flag}")
    print()
    print("  synthetic ODE with roots 0 and -2 and a q3 term: the obstruction")
    print("  at index 2 is nonzero (a log term would be needed), so the series")
    print("  is truncated just below the resonant index.")
    toy = InfinitySingularODE((3.0, 0.0), (0.0, 1.0))
    sol = series_coefficients(toy, 0.0, n=5)
    print(f"    coefficients {sol.coefficients}, resonance_flag {sol.resonance_flag}")


if __name__ == "__main__":
    main()
