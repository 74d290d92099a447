"""Smooth scalar windows with exact plateaus.

The basic ingredient is the step

    theta(t) = sin(pi/2 * s(t)),   s(t) = g(t) / (g(t) + g(1 - t)),

with ``g(t) = exp(-1/t)`` for ``t > 0``.  It is 0 for ``t <= 0``, 1 for
``t >= 1`` and satisfies ``theta(t)^2 + theta(1-t)^2 = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import BadEps, BadEps0, InputError, NonpositiveRho

HALF_PI = 0.5 * np.pi
TWO_PI = 2.0 * np.pi


def _scalar_out(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _s(u: np.ndarray) -> np.ndarray:
    # g(u) / (g(u) + g(1-u)); 1/u may overflow to inf for subnormal u,
    # where expit(-inf) = 0 is the correct limit
    with np.errstate(over="ignore"):
        return expit(1.0 / (1.0 - u) - 1.0 / u)


def smooth_step(t):
    """Evaluate the canonical step ``theta`` elementwise.

    For ``t > 1/2`` the value is computed from the mirrored argument as
    ``cos(pi/2 * s(1 - t))``, so the complementary-square identity holds to
    rounding and the two plateaus are exactly 0.0 and 1.0.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    out[t >= 1.0] = 1.0
    lo = (t > 0.0) & (t <= 0.5)
    hi = (t > 0.5) & (t < 1.0)
    if lo.any():
        out[lo] = np.sin(HALF_PI * _s(t[lo]))
    if hi.any():
        out[hi] = np.cos(HALF_PI * _s(1.0 - t[hi]))
    return _scalar_out(t, out)


def bump_h(rho: float, t):
    """Even bump equal to 1 on ``|t| <= rho/2`` and 0 on ``|t| >= rho``."""
    if not rho > 0:
        raise NonpositiveRho(f"rho must be positive, got {rho}")
    t = np.asarray(t, dtype=float)
    return _scalar_out(t, np.asarray(smooth_step(2.0 - 2.0 * np.abs(t) / rho)))


def check_cutoff_params(lambda0: float, eps0: float) -> None:
    if not lambda0 > 0:
        raise InputError(f"lambda0 must be positive, got {lambda0}")
    if not 0.0 < eps0 < 1.0 - lambda0:
        raise BadEps0(f"eps0 must lie in (0, 1 - lambda0) = (0, {1 - lambda0:.6g}), got {eps0}")


def tensor_cutoff(lambda0: float, eps0: float, xi) -> np.ndarray:
    """Tensor product window, 1 on ``[-l0 pi, l0 pi]^d`` and 0 off
    ``[-(l0+e0) pi, (l0+e0) pi]^d``.

    ``xi`` holds points along its last axis.
    """
    check_cutoff_params(lambda0, eps0)
    xi = np.asarray(xi, dtype=float)
    outer = (lambda0 + eps0) * np.pi
    vals = smooth_step((outer - np.abs(xi)) / (eps0 * np.pi))
    return np.prod(np.asarray(vals), axis=-1)


def wrap_angle(x):
    """Map angles into ``[-pi, pi)``."""
    x = np.asarray(x, dtype=float)
    return x - TWO_PI * np.floor((x + np.pi) / TWO_PI)


@dataclass(frozen=True)
class PeriodicWindow:
    """The ``2 pi``-periodic angular window ``alpha_{n, eps}``.

    It equals 1 for ``|xi| <= pi/(2n) - eps`` and 0 for
    ``|xi| >= pi/(2n) + eps`` (modulo ``2 pi``), and its ``2n`` shifts by
    multiples of ``pi/n`` have squares summing to one.
    """

    n: int
    eps: float

    def __call__(self, xi):
        u = np.abs(wrap_angle(xi))
        half = HALF_PI / self.n
        return smooth_step((half + self.eps - u) / (2.0 * self.eps))

    def tile_residual(self, samples: int = 2**14) -> float:
        """Max deviation of ``sum_l alpha(xi + pi l / n)^2`` from 1."""
        xi = -np.pi + TWO_PI * np.arange(samples) / samples
        total = sum(self(xi + np.pi * k / self.n) ** 2 for k in range(2 * self.n))
        return float(np.max(np.abs(total - 1.0)))


def build_angular_window(n: int, eps: float | None = None) -> PeriodicWindow:
    """Angular window ``alpha_{n, eps}``; ``eps`` defaults to ``pi/(4n)``."""
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n}")
    n = int(n)
    eps = np.pi / (4 * n) if eps is None else float(eps)
    if not 0.0 < eps <= np.pi / (2 * n) * (1 + 1e-15):
        raise BadEps(f"eps must lie in (0, pi/(2n)] = (0, {np.pi / (2 * n):.6g}], got {eps}")
    return PeriodicWindow(n=n, eps=eps)
