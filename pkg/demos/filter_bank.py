"""Masks of the constructed pair, their extension-principle residuals, and
the infinite product that rebuilds the refinable function.

Run with ``python3 demos/filter_bank.py``.
"""

import numpy as np

from framelet import (
    FrequencyGrid,
    construct_phi,
    construct_psi,
    derive_masks,
    haar_bank,
    library_budget,
    nonstationary_product,
    oep_residuals,
    polyphase_identity_residual,
)


def main():
    phi = construct_phi("2,1;0,2", lambda0=0.8)
    bank = derive_masks(phi, construct_psi(phi))
    grid = FrequencyGrid.cube(256, 2)
    for rep in oep_residuals(bank, None, grid):
        print(rep)
    print("constructed bank is redundant; polyphase residual",
          f"{polyphase_identity_residual(bank, grid).max_residual:.3f}")
    print("Haar polyphase residual",
          f"{polyphase_identity_residual(haar_bank(), FrequencyGrid.cube(1024, 1)).max_residual:.1e}")

    res = nonstationary_product(lambda n: bank.lowpass, phi.dilation, FrequencyGrid.cube(128, 2),
                                1e-10, library_budget(phi))
    err = np.max(np.abs(res.values - phi(FrequencyGrid.cube(128, 2).points())))
    print(f"product of {res.truncation} masks: certificate {res.certificate:.1e}, "
          f"10 more factors change {res.refined_change:.1e}, error vs phi {err:.1e}")


if __name__ == "__main__":
    main()
