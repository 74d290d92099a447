"""Build a refinable pair for the quincunx dilation and check tightness.

Run with ``python3 demos/tight_frame.py``.
"""

import numpy as np

from framelet import (
    FrequencyGrid,
    calderon_residual,
    construct_phi,
    construct_psi,
    dual_frame_condition_residuals,
    oracle_suite,
    parseval_energy_test,
    predicted_termination,
    stationary_system,
)


def main():
    phi = construct_phi("1,1;1,-1", lambda0=0.8)
    psi = construct_psi(phi)
    grid = FrequencyGrid.cube(512, 2)
    print(f"plateau radius c = {phi.c:.6f}, support half-width = {phi.support_halfwidth:.4f}")
    print(calderon_residual(phi, psi, grid))

    system = stationary_system(phi, psi)
    for rep in dual_frame_condition_residuals(system, grid, range(4)):
        print(rep)

    for name, f, _ in oracle_suite(2):
        res = parseval_energy_test(f, system, 0)
        jp = predicted_termination(f, phi, system, 0)
        print(f"{name:>14}: energy ratio - 1 = {res.energy_ratio - 1:+.2e}, "
              f"J' = {res.J_prime} (exactly zero from level {jp} on)")

    mutant = system.with_wavelets(lambda j: (psi.scaled(0.9),))
    bad = dual_frame_condition_residuals(mutant, grid, [0])[-1]
    peak = float(np.max(psi(grid.points()) ** 2))
    print(f"0.9 * psi breaks tightness: residual / max psi^2 = {bad.max_residual / peak:.4f}")


if __name__ == "__main__":
    main()
