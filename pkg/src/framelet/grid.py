"""Uniform frequency grids, compactly supported test functions and
residual reports."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InputError
from .windows import smooth_step


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform sampling ``origin + step * i`` per axis, ``0 <= i < count``.

    The quadrature weight of every node is ``prod(step)``.
    """

    origin: tuple
    step: tuple
    count: tuple

    def __post_init__(self):
        if not (len(self.origin) == len(self.step) == len(self.count)):
            raise InputError("origin, step and count must have equal length")
        if any(c < 2 for c in self.count):
            raise InputError("each axis needs at least 2 points")
        if any(not s > 0 for s in self.step):
            raise InputError("steps must be positive")

    @classmethod
    def cube(cls, n: int, dim: int, half_width: float = np.pi) -> "FrequencyGrid":
        """``n`` points per axis on ``[-half_width, half_width)^dim``."""
        step = 2.0 * half_width / n
        return cls((-half_width,) * dim, (step,) * dim, (int(n),) * dim)

    @classmethod
    def box(cls, lo, hi, n) -> "FrequencyGrid":
        """``n`` points per axis on the half-open box ``[lo, hi)``."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        n = np.broadcast_to(np.asarray(n, dtype=int), lo.shape)
        step = (hi - lo) / n
        return cls(tuple(lo.tolist()), tuple(step.tolist()), tuple(int(c) for c in n))

    @property
    def dim(self) -> int:
        return len(self.count)

    @property
    def size(self) -> int:
        return int(np.prod(self.count))

    @property
    def weight(self) -> float:
        return float(np.prod(self.step))

    @property
    def lower(self) -> np.ndarray:
        return np.asarray(self.origin, dtype=float)

    @property
    def upper(self) -> np.ndarray:
        """Upper end of the half-open box."""
        return self.lower + np.asarray(self.step) * np.asarray(self.count)

    def axes(self) -> list:
        return [o + s * np.arange(c) for o, s, c in zip(self.origin, self.step, self.count)]

    def points(self) -> np.ndarray:
        """Array of shape ``count + (dim,)``."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(mesh, axis=-1)

    def sup_radius(self) -> float:
        """Half-width of the largest centered cube inside the box."""
        return float(min(np.min(-self.lower), np.min(self.upper)))


def smooth_bump(center, half_width, amplitude: complex = 1.0, phase=None) -> Callable:
    """Tensor-product bump supported in ``center +- half_width``.

    Each factor is ``theta(2 - 2|t|)`` in the rescaled variable, so the
    bump is 1 near the center and exactly 0 on the box boundary.
    ``phase`` (a vector) multiplies by ``exp(i phase . xi)``.
    """
    center = np.atleast_1d(np.asarray(center, dtype=float))
    half_width = np.broadcast_to(np.asarray(half_width, dtype=float), center.shape).copy()
    ph = None if phase is None else np.atleast_1d(np.asarray(phase, dtype=float))

    def f(xi):
        xi = np.asarray(xi, dtype=float)
        u = np.abs(xi - center) / half_width
        val = np.prod(np.asarray(smooth_step(2.0 - 2.0 * u)), axis=-1) * amplitude
        if ph is not None:
            val = val * np.exp(1j * (xi @ ph))
        return val

    return f


@dataclass(frozen=True)
class TestFunction:
    """A compactly supported function of frequency.

    ``evaluator`` maps points of shape ``(..., d)`` to complex values and
    must vanish outside ``[support_lo, support_hi]``.
    """

    __test__ = False  # not a pytest class

    evaluator: Callable
    support_lo: tuple
    support_hi: tuple
    smooth: bool = True

    def __call__(self, xi) -> np.ndarray:
        return np.asarray(self.evaluator(xi), dtype=complex)

    @property
    def dim(self) -> int:
        return len(self.support_lo)

    @property
    def lo(self) -> np.ndarray:
        return np.asarray(self.support_lo, dtype=float)

    @property
    def hi(self) -> np.ndarray:
        return np.asarray(self.support_hi, dtype=float)

    @classmethod
    def bump(cls, center, half_width, amplitude: complex = 1.0, phase=None) -> "TestFunction":
        center = np.atleast_1d(np.asarray(center, dtype=float))
        hw = np.broadcast_to(np.asarray(half_width, dtype=float), center.shape)
        return cls(smooth_bump(center, hw, amplitude, phase),
                   tuple((center - hw).tolist()), tuple((center + hw).tolist()))

    @classmethod
    def combination(cls, parts) -> "TestFunction":
        """Sum of test functions; the support box is the hull."""
        parts = list(parts)
        lo = np.min([p.lo for p in parts], axis=0)
        hi = np.max([p.hi for p in parts], axis=0)

        def f(xi):
            return sum(p(xi) for p in parts)

        return cls(f, tuple(lo.tolist()), tuple(hi.tolist()))

    @classmethod
    def zero(cls, dim: int) -> "TestFunction":
        def f(xi):
            return np.zeros(np.shape(xi)[:-1], dtype=complex)

        return cls(f, (-1.0,) * dim, (1.0,) * dim)

    def quadrature_grid(self, n: int) -> FrequencyGrid:
        """``n`` points per axis covering the support box exactly."""
        return FrequencyGrid.box(self.lo, self.hi, n)

    def norm_squared(self, n: int = 512) -> float:
        """``int |f|^2`` by the trapezoid rule on the support box."""
        g = self.quadrature_grid(n)
        return float(np.sum(np.abs(self(g.points())) ** 2) * g.weight)

    def corners(self) -> np.ndarray:
        return np.array(list(itertools.product(*zip(self.lo, self.hi))))


@dataclass(frozen=True)
class ConditionReport:
    """Residual statistics of one identity on one grid.

    ``passed`` is ``max_residual <= tolerance``.
    """

    condition_id: str
    max_residual: float
    mean_residual: float
    points: int
    tolerance: float
    passed: bool

    @classmethod
    def from_residuals(cls, condition_id: str, residual, tolerance: float,
                       mask=None) -> "ConditionReport":
        r = np.abs(np.asarray(residual))
        if mask is not None:
            r = r[np.broadcast_to(mask, r.shape)]
        r = r.ravel()
        if r.size == 0:
            mx = mean = 0.0
        else:
            mx, mean = float(r.max()), float(r.mean())
        return cls(condition_id, mx, mean, int(r.size), float(tolerance), bool(mx <= tolerance))

    @classmethod
    def merge(cls, condition_id: str, reports, tolerance: float) -> "ConditionReport":
        reports = list(reports)
        pts = sum(r.points for r in reports)
        mx = max((r.max_residual for r in reports), default=0.0)
        mean = sum(r.mean_residual * r.points for r in reports) / pts if pts else 0.0
        return cls(condition_id, mx, mean, pts, float(tolerance), bool(mx <= tolerance))

    def csv_row(self) -> str:
        return (f"{self.condition_id},{self.max_residual:.6e},{self.mean_residual:.6e},"
                f"{self.points},{self.tolerance:.3e},{str(self.passed).lower()}")
