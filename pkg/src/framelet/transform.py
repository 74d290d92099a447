"""Discrete frequency-tiled frame transform on periodic sample grids.

The DFT uses the unitary convention (``1/sqrt(N^d)`` both ways), so a
window stack whose squares sum to 1 gives ``sum ||band||^2 = ||x||^2``
exactly.  Bin ``p`` of an axis of length ``N`` sits at frequency
``2 pi fftfreq(N)[p]`` in ``[-pi, pi)``; windows are sampled there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.fft

from .directional import build_directional_family_2d, directional_count, radial_pair
from .errors import InputError, PlanOverflow, PlanTooSmall, SizeMismatch
from .generators import construct_phi, construct_psi
from .verify import fft_workers

MIN_SIZE = 32
LEVEL_HEADROOM = 8
TIGHT_TOL = 1e-12


def frequency_points(n: int, dim: int) -> np.ndarray:
    """DFT bin frequencies in natural FFT order, shape ``(n,)*dim + (dim,)``."""
    axis = 2.0 * np.pi * scipy.fft.fftfreq(n)
    return np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1)


@dataclass(frozen=True)
class TransformPlan:
    """Sampled window stack for one grid size.

    Attributes
    ----------
    n : int
        Samples per axis.
    dim : int
    family : {"isotropic", "directional"}
    J, J_prime : int
        Low-pass level and one past the finest wavelet level.
    labels : tuple
        ``("lowpass",)`` then ``(j, l)`` per band.
    windows : tuple of ndarray
        Real nonnegative window samples, one per band, FFT order.
    tightness_residual : float
        ``max |sum w^2 - 1|`` over the grid.
    telescoping_residual : float
        ``max |sum w^2 - phi(N^J' xi)^2|`` over the grid.
    """

    n: int
    dim: int
    family: str
    J: int
    J_prime: int
    labels: tuple
    windows: tuple = field(repr=False)
    tightness_residual: float
    telescoping_residual: float
    params: tuple = ()

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def band_count(self) -> int:
        return len(self.windows)

    def without_band(self, index: int) -> "TransformPlan":
        """Copy with band ``index`` removed (no longer tight)."""
        if not 0 <= index < self.band_count:
            raise InputError(f"band index {index} outside [0, {self.band_count})")
        keep = [i for i in range(self.band_count) if i != index]
        windows = tuple(self.windows[i] for i in keep)
        total = sum(w**2 for w in windows)
        return replace(self, labels=tuple(self.labels[i] for i in keep), windows=windows,
                       tightness_residual=float(np.max(np.abs(total - 1.0))))


@dataclass(frozen=True)
class CoefficientPyramid:
    """Bands of one analysis, in the plan's band order."""

    plan: TransformPlan
    bands: tuple

    @property
    def lowpass(self) -> np.ndarray:
        return self.bands[0]

    def band(self, label) -> np.ndarray:
        return self.bands[self.plan.labels.index(label)]

    def energy(self) -> float:
        return float(sum(np.sum(np.abs(b) ** 2) for b in self.bands))

    def inner(self, other: "CoefficientPyramid") -> complex:
        """``sum_bands <self, other>`` (linear in the first slot)."""
        return complex(sum(np.vdot(o, s) for s, o in zip(self.bands, other.bands)))

    @classmethod
    def zeros(cls, plan: TransformPlan) -> "CoefficientPyramid":
        return cls(plan, tuple(np.zeros(plan.shape, dtype=complex) for _ in plan.windows))


def _stack_isotropic(x: np.ndarray, dim: int, J: int, J_prime: int, lambda0: float):
    phi = construct_phi(2.0 * np.eye(dim) if dim > 1 else 2.0, lambda0)
    psi = construct_psi(phi)
    labels, windows = ["lowpass"], [phi(x * 2.0**-J)]
    for j in range(J, J_prime):
        labels.append((j, 0))
        windows.append(psi(x * 2.0**-j))
    return labels, windows, phi


def _stack_directional(x: np.ndarray, J: int, J_prime: int, m: int, rho: float,
                       eps: float | None, lambda0: float):
    radial = radial_pair(lambda0)
    fam0 = build_directional_family_2d(m, rho, max(J, 0), eps, radial)
    labels, windows = ["lowpass"], [fam0.phi(x * 2.0**-J)]
    for j in range(J, J_prime):
        fam = build_directional_family_2d(m, rho, j, eps, radial)
        xs = x * 2.0**-j
        for ell, mem in enumerate(fam.members):
            labels.append((j, ell))
            windows.append(mem(xs))
    return labels, windows, fam0.phi


def make_plan(n: int, levels: int, family: str = "isotropic", dim: int = 2, J: int = 0,
              m: int = 4, rho: float = 0.5, eps: float | None = None,
              lambda0: float = 0.8) -> TransformPlan:
    """Sample the window stack on the DFT grid.

    Parameters
    ----------
    n : int
        Samples per axis, a power of two ``>= 32``.
    levels : int
        Requested wavelet levels ``J .. J+levels-1``; more are added until
        the squared windows sum to 1 on every bin.
    family : {"isotropic", "directional"}
        ``directional`` needs ``dim == 2`` and ``J >= 0``.
    m, rho, eps : directional parameters.
    lambda0 : float
        Support parameter of the radial generators.

    Raises
    ------
    PlanTooSmall, PlanOverflow, InputError
    """
    if n < MIN_SIZE:
        raise PlanTooSmall(f"grid size {n} below the minimum {MIN_SIZE}")
    if n & (n - 1):
        raise InputError(f"grid size {n} is not a power of two")
    if levels < 1:
        raise InputError("levels must be at least 1")
    if dim not in (1, 2):
        raise InputError("built-in transforms support dim 1 or 2")
    if family not in ("isotropic", "directional"):
        raise InputError(f"unknown family {family!r}")
    if family == "directional" and (dim != 2 or J < 0):
        raise InputError("directional plans need dim 2 and J >= 0")
    ceiling = int(math.log2(n)) + LEVEL_HEADROOM
    x = frequency_points(n, dim)
    J_prime = J + levels
    while True:
        if J_prime > ceiling:
            raise PlanOverflow(f"tiling needs J' > {ceiling}")
        if family == "isotropic":
            labels, windows, phi = _stack_isotropic(x, dim, J, J_prime, lambda0)
            params = (lambda0,)
        else:
            labels, windows, phi = _stack_directional(x, J, J_prime, m, rho, eps, lambda0)
            params = (m, rho, eps, lambda0)
        top = phi(x * 2.0**-J_prime) ** 2
        if np.all(top == 1.0):
            break
        J_prime += 1
    total = sum(w**2 for w in windows)
    windows = tuple(np.ascontiguousarray(w, dtype=float) for w in windows)
    for w in windows:
        w.setflags(write=False)
    return TransformPlan(n, dim, family, J, J_prime, tuple(labels), windows,
                         float(np.max(np.abs(total - 1.0))), float(np.max(np.abs(total - top))),
                         params)


def expected_band_count(plan: TransformPlan) -> int:
    """``1 + sum_j s_j`` (``s_j = 1`` for isotropic plans)."""
    if plan.family == "isotropic":
        return 1 + plan.J_prime - plan.J
    m, rho = plan.params[0], plan.params[1]
    return 1 + sum(directional_count(m, rho, j) for j in range(plan.J, plan.J_prime))


def _check(samples: np.ndarray, plan: TransformPlan) -> np.ndarray:
    a = np.asarray(samples)
    if a.shape != plan.shape:
        raise SizeMismatch(f"samples have shape {a.shape}, plan expects {plan.shape}")
    return a


def analyze(samples, plan: TransformPlan) -> CoefficientPyramid:
    """Bands ``IDFT(DFT(x) * w)`` for every window ``w``."""
    x = _check(samples, plan)
    spec = scipy.fft.fftn(x, norm="ortho", workers=fft_workers())
    bands = tuple(scipy.fft.ifftn(spec * w, norm="ortho", workers=fft_workers())
                  for w in plan.windows)
    return CoefficientPyramid(plan, bands)


def synthesize(pyramid: CoefficientPyramid) -> np.ndarray:
    """Adjoint of :func:`analyze`: ``IDFT(sum DFT(band) * w)``."""
    plan = pyramid.plan
    if len(pyramid.bands) != plan.band_count:
        raise SizeMismatch(f"{len(pyramid.bands)} bands, plan has {plan.band_count}")
    acc = np.zeros(plan.shape, dtype=complex)
    for band, w in zip(pyramid.bands, plan.windows):
        acc += scipy.fft.fftn(_check(band, plan), norm="ortho", workers=fft_workers()) * w
    return scipy.fft.ifftn(acc, norm="ortho", workers=fft_workers())


def pr_residual(samples, plan: TransformPlan) -> float:
    """Relative l2 error of ``synthesize(analyze(x))``."""
    x = _check(samples, plan)
    nx = float(np.linalg.norm(x))
    if nx == 0.0:
        return 0.0
    return float(np.linalg.norm(synthesize(analyze(x, plan)) - x) / nx)
