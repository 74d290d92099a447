"""Directional frame transform of a synthetic image: energy per band and
perfect reconstruction.

Run with ``python3 demos/directional_transform.py [out.pgm]``.
"""

import sys

import numpy as np

from framelet import analyze, make_plan, pr_residual, synthesize, write_pgm


def test_image(n: int) -> np.ndarray:
    y, x = np.mgrid[0:n, 0:n] / n
    img = (np.hypot(x - 0.5, y - 0.5) < 0.3).astype(float)
    img += 0.5 * np.sin(2 * np.pi * 40 * (x + 2 * y))
    return img - img.mean()


def main():
    img = test_image(256)
    plan = make_plan(256, 4, family="directional", m=4, rho=0.5)
    print(f"{plan.band_count} bands, J' = {plan.J_prime}, "
          f"tightness residual {plan.tightness_residual:.2e}")
    pyr = analyze(img, plan)
    total = float(np.sum(img**2))
    for label, band in zip(plan.labels, pyr.bands):
        share = float(np.sum(np.abs(band) ** 2)) / total
        if share > 1e-3:
            print(f"  band {label!s:>10}: {100 * share:6.2f}% of the energy")
    print(f"energy ratio {pyr.energy() / total:.15f}")
    print(f"perfect reconstruction error {pr_residual(img, plan):.2e}")
    dropped = plan.without_band(1 + int(np.argmax([np.sum(np.abs(b) ** 2) for b in pyr.bands[1:]])))
    err = np.linalg.norm(synthesize(analyze(img, dropped)) - img) / np.linalg.norm(img)
    print(f"dropping the strongest wavelet band: relative error {err:.3f}")
    if len(sys.argv) > 1:
        write_pgm(sys.argv[1], synthesize(pyr).real)


if __name__ == "__main__":
    main()
