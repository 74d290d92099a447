"""Closed-form refinable function and wavelet in the frequency domain.

``phi_hat`` is a smooth step of the adapted-norm radius ``r = ||xi||``
(the norm adapted to ``M^T``): it is 1 for ``r <= c`` and 0 for
``r >= lam * c`` where ``lam = lambda_min - eps``.  The wavelet is

    psi_hat(xi) = sqrt(phi_hat(N xi)^2 - phi_hat(xi)^2),

so ``|phi_hat|^2 + |psi_hat|^2 = |phi_hat(N .)|^2`` holds pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import DegenerateLambda0, InputError, NegativeRadicand, NotExpansive
from .grid import ConditionReport, FrequencyGrid
from .lattice import (
    AdaptedNorm,
    DilationMatrix,
    analyze_dilation,
    build_adapted_norm,
    choose_support_radius,
    default_epsilon,
)
from .windows import smooth_step

RADICAND_TOL = 1e-15
PROBE_SEED = 0x5EED


def as_points(xi, dim: int) -> np.ndarray:
    """Coerce ``xi`` to an array with points along the last axis.

    In one dimension a trailing axis is added unless already present.
    """
    x = np.asarray(xi, dtype=float)
    if dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != dim:
        raise InputError(f"expected points of dimension {dim}, got shape {x.shape}")
    return x


def apply(matrix: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``matrix @ x`` for every point of ``x`` (last axis)."""
    return x @ np.asarray(matrix).T


@dataclass(frozen=True)
class GeneratorEvaluator:
    """A real, even, compactly supported function of frequency.

    Attributes
    ----------
    kind : {"phi", "psi", "directional"}
    dilation : DilationMatrix
    c, lambda0 : float
        Plateau radius and cube parameter the generator was built with.
    norm : AdaptedNorm
        Adapted norm of ``M^T``; radii below refer to it.
    support_outer : float
        The value is exactly 0 for ``||xi|| >= support_outer``.
    support_inner : float
        ``phi`` is exactly 1 and ``psi`` exactly 0 for ``||xi|| <= support_inner``.
    support_halfwidth : float
        Sup-norm half-width of a box containing the support.
    """

    kind: str
    dilation: DilationMatrix
    c: float
    lambda0: float
    norm: AdaptedNorm
    support_outer: float
    support_inner: float
    support_halfwidth: float
    func: Callable = field(repr=False, compare=False)
    label: str = ""
    parent: "GeneratorEvaluator | None" = field(default=None, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.dilation.dim

    @property
    def params(self) -> tuple:
        return (self.c, self.lambda0, self.norm)

    def __call__(self, xi) -> np.ndarray:
        x = as_points(xi, self.dim)
        return self.func(x)

    def radius(self, xi) -> np.ndarray:
        return self.norm(as_points(xi, self.dim))

    def scaled(self, factor: float) -> "GeneratorEvaluator":
        """A copy multiplied by a constant (used to build broken systems)."""
        f = self.func
        return replace(self, func=lambda x: factor * f(x), label=f"{factor:g}*{self.label}")


def construct_phi(m, lambda0: float, epsilon: float | None = None) -> GeneratorEvaluator:
    """Refinable function ``phi_hat`` for the dilation ``M``.

    Parameters
    ----------
    m : DilationMatrix or array_like
        Expansive dilation.
    lambda0 : float
        Support parameter in ``(0, 1)``; the support lies in
        ``(-lambda0 pi, lambda0 pi)^d``.
    epsilon : float, optional
        Adapted-norm slack, default ``(lambda_min - 1)/10``.
    """
    m = m if isinstance(m, DilationMatrix) else analyze_dilation(m)
    if not m.expansive:
        raise NotExpansive(f"{m!r} is not expansive")
    if not 0.0 < lambda0 < 1.0:
        raise DegenerateLambda0(f"lambda0 must lie in (0, 1), got {lambda0}")
    mt = m.T
    eps = default_epsilon(mt) if epsilon is None else float(epsilon)
    norm = build_adapted_norm(mt, eps)
    lam = norm.lower_factor
    if lam <= 1.0:
        raise InputError(f"epsilon {eps} too large: lambda_min - eps = {lam} <= 1")
    c = choose_support_radius(m, lambda0, norm)
    outer = lam * c
    width = (lam - 1.0) * c

    def phi(x):
        return np.asarray(smooth_step((outer - norm(x)) / width))

    halfwidth = min(norm.sup_extent(outer), norm.max_sup_image(mt.entries) * c)
    return GeneratorEvaluator("phi", m, c, float(lambda0), norm, outer, c, halfwidth, phi, "phi")


def construct_psi(phi: GeneratorEvaluator, probes: int = 100_000) -> GeneratorEvaluator:
    """Wavelet ``psi_hat = sqrt(phi_hat(N .)^2 - phi_hat^2)``.

    A radicand below ``-1e-15`` raises :class:`NegativeRadicand`; smaller
    negative values are rounding noise and are clamped to 0.  The check
    runs on ``probes`` quasi-random points of the support box at
    construction and again on every evaluation.
    """
    if phi.kind != "phi":
        raise InputError(f"expected a phi generator, got kind {phi.kind!r}")
    n_mat = phi.dilation.transpose_inverse
    base = phi.func

    def psi(x):
        rad = base(apply(n_mat, x)) ** 2 - base(x) ** 2
        low = rad.min(initial=0.0)
        if low < -RADICAND_TOL:
            raise NegativeRadicand(f"radicand {low:.3e} below -{RADICAND_TOL:g}")
        return np.sqrt(np.maximum(rad, 0.0))

    mt = phi.dilation.entries.T
    # psi vanishes once ||N xi|| >= lam c, and ||xi|| <= ||M^T||_op ||N xi||
    outer = min(phi.norm.upper_factor, phi.norm.operator_norm(mt) * (1 + 1e-12)) * phi.support_outer
    halfwidth = min(phi.norm.sup_extent(outer), phi.norm.max_sup_image(mt @ mt) * phi.c)
    out = GeneratorEvaluator("psi", phi.dilation, phi.c, phi.lambda0, phi.norm, outer,
                             phi.c, halfwidth, psi, "psi", phi)
    if probes:
        sampler = qmc.Halton(d=phi.dim, scramble=True, seed=PROBE_SEED)
        pts = (2.0 * sampler.random(probes) - 1.0) * halfwidth
        psi(pts)
    return out


def _n_power_points(dilation: DilationMatrix, x: np.ndarray, j: int) -> np.ndarray:
    return apply(dilation.power_N(j), x) if j else x


def calderon_residual(phi, psi, grid: FrequencyGrid, dilation: DilationMatrix | None = None,
                      tol: float = 1e-12) -> ConditionReport:
    """Residual of ``|phi|^2 + |psi|^2 - |phi(N .)|^2`` on ``grid``.

    ``phi`` and ``psi`` may be any callables; ``dilation`` defaults to
    ``phi.dilation``.
    """
    dilation = dilation or phi.dilation
    x = grid.points()
    res = (np.abs(phi(x)) ** 2 + np.abs(psi(x)) ** 2
           - np.abs(phi(apply(dilation.transpose_inverse, x))) ** 2)
    return ConditionReport.from_residuals("calderon", res, tol)


def telescoping_residual(phi, psi, grid: FrequencyGrid, J: int, J_prime: int,
                         dilation: DilationMatrix | None = None,
                         tol: float = 1e-11) -> ConditionReport:
    """Residual of the telescoped identity

    ``|phi(N^J .)|^2 + sum_{J <= j < J'} |psi(N^j .)|^2 = |phi(N^J' .)|^2``.
    """
    if J_prime <= J:
        raise InputError("need J < J'")
    dilation = dilation or phi.dilation
    x = grid.points()
    total = np.abs(phi(_n_power_points(dilation, x, J))) ** 2
    for j in range(J, J_prime):
        total += np.abs(psi(_n_power_points(dilation, x, j))) ** 2
    res = total - np.abs(phi(_n_power_points(dilation, x, J_prime))) ** 2
    return ConditionReport.from_residuals(f"calderon:telescoping[{J},{J_prime}]", res, tol)


def lowpass_limit_residual(phi, grid: FrequencyGrid, j: int,
                           dilation: DilationMatrix | None = None) -> float:
    """``max |1 - |phi(N^j xi)|^2|`` over the grid."""
    if j < 0:
        raise InputError("j must be nonnegative")
    dilation = dilation or phi.dilation
    vals = phi(_n_power_points(dilation, grid.points(), j))
    return float(np.max(np.abs(1.0 - np.abs(vals) ** 2)))
