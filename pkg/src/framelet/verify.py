"""Numerical checks of the frame identities on sampled frequency grids.

Conventions
-----------
The system element attached to a generator ``psi``, a matrix ``U`` and a
modulation ``k`` is

    psi_{U;0,k}(xi) = |det U|^{1/2} exp(-i k . U xi) psi(U xi),

and ``<f, g> = int f conj(g)``.  With ``eta = U xi`` the coefficient
``<f, psi_{U;0,k}>`` equals ``|det U|^{-1/2}`` times the ``k``-th Fourier
integral over ``[-pi, pi)^d`` of the periodization

    h(eta) = sum_m f(U^{-1}(eta + 2 pi m)) conj(psi(eta + 2 pi m)),

so one FFT of ``h`` yields every coefficient at once.
"""

from __future__ import annotations

import functools
import itertools
import math
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.fft

from .errors import (
    GridTooCoarse,
    InputError,
    LengthMismatch,
    NoConvergence,
    SupportOverflow,
)
from .generators import GeneratorEvaluator, apply, construct_phi, construct_psi
from .grid import ConditionReport, FrequencyGrid, TestFunction
from .lattice import DilationMatrix, analyze_dilation

__all__ = [
    "ConditionReport",
    "FrequencyGrid",
    "TestFunction",
    "WaveletSystem",
    "OracleResult",
    "bracket_I",
    "dft_coefficients",
    "coefficient_energy",
    "bracket_product_oracle",
    "partial_sum_S",
    "dual_frame_condition_residuals",
    "mra_consistency_residual",
    "parseval_energy_test",
    "predicted_termination",
    "bessel_bound_estimate",
    "oracle_suite",
    "stationary_system",
    "directional_system",
]

TWO_PI = 2.0 * np.pi
INTEGER_SNAP = 1e-9
POINTS_PER_WIDTH = 128
MAX_FFT = 8192
ENSEMBLE_SEED = 0x5EED


def fft_workers() -> int:
    """Thread count for FFTs, capped by ``FRAMELET_THREADS`` when set."""
    raw = os.environ.get("FRAMELET_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return 1


def halfwidth(gen) -> float:
    """Sup-norm half-width of a box containing the support of ``gen``."""
    hw = getattr(gen, "support_halfwidth", None)
    if hw is not None:
        return float(hw)
    if isinstance(gen, TestFunction):
        return float(max(np.max(np.abs(gen.lo)), np.max(np.abs(gen.hi))))
    return np.inf


def _image_halfwidth(gen, a: np.ndarray) -> float:
    """Half-width of a box containing ``A supp(gen)``."""
    a = np.atleast_2d(a)
    crude = float(np.abs(a).sum(axis=1).max()) * halfwidth(gen)
    norm = getattr(gen, "norm", None)
    outer = getattr(gen, "support_outer", None)
    if norm is not None and outer is not None and norm.dim == a.shape[0]:
        return min(crude, norm.max_sup_image(a) * outer)
    return crude


def _next_pow2(x: float) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(x, 1.0)))))


def _integer_or_none(v: np.ndarray):
    r = np.rint(v)
    return r.astype(np.int64) if np.all(np.abs(v - r) <= INTEGER_SNAP) else None


# ---------------------------------------------------------------- systems

@dataclass(frozen=True)
class WaveletSystem:
    """Generators ``Phi`` and ``Psi_j`` with level matrices ``N_j``.

    Attributes
    ----------
    phi : tuple
        Low-pass generators (shared by every level).
    psi : callable
        ``j -> sequence`` of wavelet generators of level ``j``.
    dilation : DilationMatrix
        ``N_j = N^j`` unless ``steps`` overrides it.
    steps : callable, optional
        ``j -> N_j``.
    """

    phi: tuple
    psi: Callable
    dilation: DilationMatrix
    steps: Callable | None = None
    label: str = ""

    @property
    def dim(self) -> int:
        return self.dilation.dim

    def level_matrix(self, j: int) -> np.ndarray:
        return self.steps(j) if self.steps is not None else self.dilation.power_N(j)

    def wavelets(self, j: int) -> tuple:
        return tuple(self.psi(j))

    def phi_at(self, j: int) -> tuple:
        return tuple(self.phi)

    def with_wavelets(self, psi: Callable, label: str = "") -> "WaveletSystem":
        return WaveletSystem(self.phi, psi, self.dilation, self.steps, label or self.label)


def stationary_system(phi: GeneratorEvaluator, psi=None) -> WaveletSystem:
    """``Phi = {phi}``, ``Psi_j = {psi}`` for every level."""
    psi = construct_psi(phi) if psi is None else psi
    psis = tuple(psi) if isinstance(psi, (list, tuple)) else (psi,)
    return WaveletSystem((phi,), lambda j: psis, phi.dilation, None, "stationary")


def directional_system(m: int, rho: float, eps: float | None = None,
                       lambda0: float = 0.8) -> WaveletSystem:
    """Quasi-stationary 2D system whose level-``j`` wavelets are the
    directional family of level ``j`` (``j >= 0``)."""
    from .directional import build_directional_family_2d, radial_pair

    pair = radial_pair(lambda0)

    @functools.lru_cache(maxsize=None)
    def family(j):
        if j < 0:
            raise InputError("directional levels start at j = 0")
        return build_directional_family_2d(m, rho, j, eps, pair)

    fam0 = family(0)
    return WaveletSystem((fam0.phi,), lambda j: family(j).members, fam0.phi.dilation, None,
                         f"directional(m={m}, rho={rho:g})")


# ---------------------------------------------------------------- brackets

def _points(grid_or_points) -> np.ndarray:
    if isinstance(grid_or_points, FrequencyGrid):
        return grid_or_points.points()
    return np.asarray(grid_or_points, dtype=float)


def bracket_I(set_a: Sequence, set_b: Sequence, k, grid) -> np.ndarray:
    """``I^k(xi) = sum_l conj(A_l(xi)) B_l(xi + 2 pi k)`` on ``grid``.

    Identically zero when ``k`` is not an integer vector.

    Raises
    ------
    LengthMismatch
    """
    set_a, set_b = list(set_a), list(set_b)
    if len(set_a) != len(set_b):
        raise LengthMismatch(f"bracket sets have lengths {len(set_a)} and {len(set_b)}")
    x = _points(grid)
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.zeros(x.shape[:-1], dtype=complex)
    kint = _integer_or_none(k)
    if kint is None:
        return out
    shift = TWO_PI * kint
    for a, b in zip(set_a, set_b):
        av = np.asarray(a(x))
        nz = av != 0
        if nz.any():
            xs = x[nz]
            out[nz] += np.conj(av[nz]) * np.asarray(b(xs + shift))
    return out


# ---------------------------------------------------------------- coefficients

def _auto_fft_size(f: TestFunction, psi, U: np.ndarray, q: int) -> int:
    s_min = float(np.linalg.svd(U, compute_uv=False).min())
    widths = [s_min * float(np.min(f.hi - f.lo))]
    hw = halfwidth(psi)
    if np.isfinite(hw):
        widths.append(2.0 * hw)
    w = min(widths)
    return min(MAX_FFT, max(64, _next_pow2(TWO_PI * q / w)))


def _periodization(f: TestFunction, psi, U: np.ndarray, n: int) -> np.ndarray:
    d = U.shape[0]
    uinv = np.linalg.inv(U)
    corners = f.corners() @ U.T
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    hw = halfwidth(psi)
    lo, hi = np.maximum(lo, -hw), np.minimum(hi, hw)
    h = np.zeros((n,) * d, dtype=complex)
    if np.any(lo > hi):
        return h
    step = TWO_PI / n
    m_lo = np.floor((lo - np.pi) / TWO_PI).astype(int)
    m_hi = np.ceil((hi + np.pi) / TWO_PI).astype(int)
    for m in itertools.product(*[range(a, b + 1) for a, b in zip(m_lo, m_hi)]):
        m = np.asarray(m)
        a = lo - TWO_PI * m
        b = hi - TWO_PI * m
        i0 = np.maximum(np.ceil((a + np.pi) / step - 1e-9).astype(int), 0)
        i1 = np.minimum(np.floor((b + np.pi) / step + 1e-9).astype(int), n - 1)
        if np.any(i0 > i1):
            continue
        axes = [-np.pi + step * np.arange(s, e + 1) for s, e in zip(i0, i1)]
        eta = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        z = eta + TWO_PI * m
        pv = np.asarray(psi(z))
        nz = pv != 0
        if not nz.any():
            continue
        block = np.zeros(pv.shape, dtype=complex)
        block[nz] = f(z[nz] @ uinv.T) * np.conj(pv[nz])
        h[tuple(slice(s, e + 1) for s, e in zip(i0, i1))] += block
    return h


def dft_coefficients(f: TestFunction, psi, U, n: int | None = None,
                     points_per_width: int = POINTS_PER_WIDTH) -> np.ndarray:
    """All coefficients ``<f, psi_{U;0,k}>`` for ``k`` in the DFT range.

    Entry ``[k_1 mod n, ..., k_d mod n]`` holds the coefficient of ``k``.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    n = n or _auto_fft_size(f, psi, U, points_per_width)
    h = _periodization(f, psi, U, n)
    d = U.shape[0]
    c = scipy.fft.ifftn(h, workers=fft_workers())
    idx = np.indices(c.shape).sum(axis=0)
    sign = np.where(idx % 2 == 0, 1.0, -1.0)
    return c * sign * (TWO_PI**d / math.sqrt(abs(np.linalg.det(U))))


def coefficient_energy(f: TestFunction, psi, U, n: int | None = None,
                       points_per_width: int = POINTS_PER_WIDTH, via_fft: bool = False) -> float:
    """``sum_k |<f, psi_{U;0,k}>|^2`` over the DFT range of :func:`dft_coefficients`.

    By the discrete Parseval identity the sum equals
    ``(2 pi)^{2d} |det U|^{-1} n^{-d} sum |h|^2``, which skips the FFT;
    ``via_fft=True`` sums the transformed coefficients instead.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if via_fft:
        c = dft_coefficients(f, psi, U, n, points_per_width)
        return float(np.sum(np.abs(c) ** 2))
    n = n or _auto_fft_size(f, psi, U, points_per_width)
    h = _periodization(f, psi, U, n)
    d = U.shape[0]
    scale = TWO_PI ** (2 * d) / (abs(np.linalg.det(U)) * n**d)
    return float(np.sum(np.abs(h) ** 2) * scale)


@dataclass(frozen=True)
class OracleResult:
    """Both sides of the coefficient/integral identity."""

    lhs: complex
    rhs: complex
    diff: float
    k_max: int
    tail_bound: float
    fft_size: int
    alias_count: int


def _alias_set(f: TestFunction, g: TestFunction, psi, psi_t, U: np.ndarray) -> list:
    """Integer ``k`` for which the ``k``-th integrand can be nonzero."""
    d = U.shape[0]
    uinv = np.linalg.inv(U)
    dlo, dhi = g.lo - f.hi, g.hi - f.lo
    corners = np.array(list(itertools.product(*zip(dlo, dhi)))) @ U.T / TWO_PI
    lo = np.floor(corners.min(axis=0) - 1e-9)
    hi = np.ceil(corners.max(axis=0) + 1e-9)
    reach = halfwidth(psi) + halfwidth(psi_t)
    if np.isfinite(reach):
        kb = math.floor(reach / TWO_PI + 1e-9)
        lo, hi = np.maximum(lo, -kb), np.minimum(hi, kb)
    if np.any(lo > hi):
        return []
    out = []
    for k in itertools.product(*[range(int(a), int(b) + 1) for a, b in zip(lo, hi)]):
        s = TWO_PI * (uinv @ np.asarray(k, dtype=float))
        if np.all(s >= dlo - 1e-9) and np.all(s <= dhi + 1e-9):
            out.append(np.asarray(k, dtype=np.int64))
    return out


def _oracle_rhs(f, g, psi, psi_t, U, grid, ks) -> complex:
    d = U.shape[0]
    uinv = np.linalg.inv(U)
    x = grid.points()
    fx = f(x)
    nz = fx != 0
    xs, fx = x[nz], fx[nz]
    ux = xs @ U.T
    pu = np.conj(np.asarray(psi(ux)))
    total = 0.0 + 0.0j
    for k in ks:
        shift = TWO_PI * k.astype(float)
        val = fx * np.conj(g(xs + shift @ uinv.T)) * pu * np.asarray(psi_t(ux + shift))
        total += val.sum()
    return complex(TWO_PI**d * total * grid.weight)


def _check_grid(grid: FrequencyGrid, f: TestFunction, psi, U: np.ndarray) -> None:
    lo, hi = grid.lower, grid.upper
    if np.any(lo > f.lo + 1e-12) or np.any(hi < f.hi - 1e-12):
        raise SupportOverflow("quadrature grid does not cover the support of f")
    across = (f.hi - f.lo) / np.asarray(grid.step)
    if np.any(across < 32):
        raise GridTooCoarse("fewer than 32 quadrature points across the support of f")
    hw = halfwidth(psi)
    if np.isfinite(hw):
        per = 2.0 * hw / (max(grid.step) * np.linalg.norm(U, 2))
        if per < 16:
            raise GridTooCoarse("quadrature grid does not resolve psi(U .)")


def _default_quad_grid(f: TestFunction, psi, U: np.ndarray, q: int) -> FrequencyGrid:
    width = float(np.max(f.hi - f.lo))
    feature = width
    hw = halfwidth(psi)
    if np.isfinite(hw):
        feature = min(feature, 2.0 * hw / np.linalg.norm(U, 2))
    n = min(4096, max(256, _next_pow2(q * width / feature)))
    return f.quadrature_grid(n)


def bracket_product_oracle(f: TestFunction, g: TestFunction, psi, psi_tilde, U,
                           grid: FrequencyGrid | None = None, k_max: int | None = None,
                           n: int | None = None, tail_tol: float = 1e-12,
                           points_per_width: int = POINTS_PER_WIDTH) -> OracleResult:
    """Compare the coefficient series with its integral form.

    ``lhs = sum_{|k|_inf <= k_max} <f, psi_{U;0,k}> <psi~_{U;0,k}, g>`` is
    computed from FFT coefficients.  ``rhs`` is
    ``(2 pi)^d int sum_k f(xi) conj(g(xi + 2 pi U^{-1} k)) conj(psi(U xi))
    psi~(U xi + 2 pi k) dxi`` by the trapezoid rule on ``grid`` with the
    finite alias set of ``k``.

    When ``k_max`` is omitted it is the smallest value whose discarded tail
    (bounded by Cauchy-Schwarz from the coefficient energies) is below
    ``tail_tol`` times the product of the norms.

    Raises
    ------
    GridTooCoarse
        If the FFT size gives fewer than 8 points per period of
        ``exp(i k_max eta)`` or the quadrature grid is too coarse.
    """
    U = np.atleast_2d(np.asarray(U, dtype=float))
    d = U.shape[0]
    if f.dim != d or g.dim != d:
        raise InputError("test functions and U have different dimensions")
    auto = n is None
    n = n or max(_auto_fft_size(f, psi, U, points_per_width),
                 _auto_fft_size(g, psi_tilde, U, points_per_width))
    if k_max is not None and n < 8 * k_max:
        if not auto:
            raise GridTooCoarse(f"FFT size {n} gives fewer than 8 points per period at k_max {k_max}")
        n = _next_pow2(8 * k_max)
    if n > MAX_FFT:
        raise GridTooCoarse(f"k_max {k_max} needs an FFT of size {n}")
    while True:
        cf = dft_coefficients(f, psi, U, n)
        cg = dft_coefficients(g, psi_tilde, U, n)
        kk = np.fft.fftfreq(n, 1.0 / n).astype(int)
        kinf = np.max(np.abs(np.stack(np.meshgrid(*([kk] * d), indexing="ij"))), axis=0)
        ef, eg = np.abs(cf) ** 2, np.abs(cg) ** 2
        tot = math.sqrt(float(ef.sum()) * float(eg.sum()))
        if k_max is not None:
            break
        # tail energies outside |k|_inf <= K for every K
        tf = np.bincount(kinf.ravel(), weights=ef.ravel(), minlength=n // 2 + 2)[::-1].cumsum()[::-1]
        tg = np.bincount(kinf.ravel(), weights=eg.ravel(), minlength=n // 2 + 2)[::-1].cumsum()[::-1]
        ok = np.nonzero(np.sqrt(tf[1:] * tg[1:]) <= tail_tol * max(tot, 1e-300))[0]
        # demand headroom: the kept range must fit in the first quarter of the DFT
        if len(ok) and ok[0] <= n // 4:
            k_max = int(ok[0])
            break
        if not auto or 2 * n > MAX_FFT:
            raise GridTooCoarse(f"coefficient tail not below {tail_tol:g} with FFT size {n}")
        n *= 2
    inside = kinf <= k_max
    lhs = complex(np.sum(cf[inside] * np.conj(cg[inside])))
    tail = math.sqrt(float(ef[~inside].sum()) * float(eg[~inside].sum()))
    if grid is None:
        grid = _default_quad_grid(f, psi, U, points_per_width)
    _check_grid(grid, f, psi, U)
    ks = _alias_set(f, g, psi, psi_tilde, U)
    rhs = _oracle_rhs(f, g, psi, psi_tilde, U, grid, ks) if ks else 0.0j
    return OracleResult(lhs, rhs, abs(lhs - rhs), int(k_max), tail, int(n), len(ks))


# ---------------------------------------------------------------- partial sums

def _lattice_points_in_box(a: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Points ``A p`` (``p`` integer) inside the box ``[lo, hi]``."""
    d = a.shape[0]
    ainv = np.linalg.inv(a)
    corners = np.array(list(itertools.product(*zip(lo, hi)))) @ ainv.T
    plo = np.floor(corners.min(axis=0) - 1e-9).astype(int)
    phi_ = np.ceil(corners.max(axis=0) + 1e-9).astype(int)
    grids = np.meshgrid(*[np.arange(s, e + 1) for s, e in zip(plo, phi_)], indexing="ij")
    p = np.stack([g.ravel() for g in grids], axis=-1).astype(float)
    pts = p @ a.T
    keep = np.all((pts >= lo - 1e-9) & (pts <= hi + 1e-9), axis=1)
    return pts[keep]


def _unique_rows(pts: np.ndarray) -> np.ndarray:
    if len(pts) == 0:
        return pts
    key = np.round(pts, 9)
    _, idx = np.unique(key, axis=0, return_index=True)
    return pts[np.sort(idx)]


def _level_bracket(gens: Sequence, gens_t: Sequence, nj: np.ndarray, k: np.ndarray,
                   x: np.ndarray) -> np.ndarray:
    return bracket_I(gens, gens_t, nj @ k, x @ nj.T)


def partial_sum_S(f: TestFunction, g: TestFunction, system: WaveletSystem, J: int,
                  J_prime: int, grid: FrequencyGrid | None = None,
                  system_tilde: WaveletSystem | None = None,
                  points_per_width: int = POINTS_PER_WIDTH) -> tuple:
    """``S_J^{J'}(f, g)`` by coefficient sums and by its integral form.

    Returns ``(integral_value, coefficient_value, diff)``.
    """
    if J_prime < J:
        raise InputError("need J <= J'")
    st = system_tilde or system
    d = system.dim
    # coefficient side
    coef = 0.0 + 0.0j
    levels = [(system.phi_at(J), st.phi_at(J), system.level_matrix(J))]
    levels += [(system.wavelets(j), st.wavelets(j), system.level_matrix(j))
               for j in range(J, J_prime)]
    for gens, gens_t, nj in levels:
        if len(gens) != len(gens_t):
            raise LengthMismatch("primal and dual generator sets differ in size")
        for a, b in zip(gens, gens_t):
            n = max(_auto_fft_size(f, a, nj, points_per_width),
                    _auto_fft_size(g, b, nj, points_per_width))
            cf = dft_coefficients(f, a, nj, n)
            cg = dft_coefficients(g, b, nj, n)
            coef += complex(np.sum(cf * np.conj(cg)))
    # integral side over the finite part of Lambda
    dlo, dhi = (g.lo - f.hi) / TWO_PI, (g.hi - f.lo) / TWO_PI
    ks = [_lattice_points_in_box(np.linalg.inv(nj), dlo, dhi) for _, _, nj in levels]
    ks = _unique_rows(np.concatenate(ks)) if ks else np.zeros((0, d))
    if grid is None:
        grid = f.quadrature_grid(_quad_size(f, system, J, J_prime, points_per_width))
    x = grid.points()
    fx = f(x)
    nz = fx != 0
    xs, fx = x[nz], fx[nz]
    total = 0.0 + 0.0j
    for k in ks:
        brk = np.zeros(xs.shape[:-1], dtype=complex)
        for gens, gens_t, nj in levels:
            brk += _level_bracket(gens, gens_t, nj, k, xs)
        total += np.sum(fx * np.conj(g(xs + TWO_PI * k)) * brk)
    integral = complex(TWO_PI**d * total * grid.weight)
    return integral, coef, abs(integral - coef)


def _quad_size(f: TestFunction, system: WaveletSystem, J: int, J_prime: int, q: int) -> int:
    width = float(np.max(f.hi - f.lo))
    feature = width
    for j in range(J, J_prime + 1):
        nj = system.level_matrix(j)
        for gen in tuple(system.phi_at(j)) + tuple(system.wavelets(j)):
            hw = halfwidth(gen)
            if np.isfinite(hw):
                feature = min(feature, 2.0 * hw / np.linalg.norm(nj, 2))
    return min(2048, max(128, _next_pow2(q * width / feature)))


# ---------------------------------------------------------------- conditions

def _check_cover(grid: FrequencyGrid, gens: Sequence, image=None) -> None:
    r = grid.sup_radius()
    for gen in gens:
        hw = halfwidth(gen) if image is None else _image_halfwidth(gen, image)
        if hw > r * (1 + 1e-12):
            raise SupportOverflow(
                f"generator support half-width {hw:.6g} exceeds grid half-width {r:.6g}")


def _special_gen(gens: Sequence, grid: FrequencyGrid, tol: float) -> ConditionReport:
    """``max |h(xi) h(xi + 2 pi k)|`` over ``k != 0`` that can overlap."""
    x = grid.points()
    worst = np.zeros(x.shape[:-1])
    d = grid.dim
    for gen in gens:
        hw = halfwidth(gen)
        kb = int(math.floor(2 * hw / TWO_PI + 1e-9)) if np.isfinite(hw) else 2
        v = np.abs(np.asarray(gen(x)))
        for k in itertools.product(range(-kb, kb + 1), repeat=d):
            if not any(k):
                continue
            w = v * np.abs(np.asarray(gen(x + TWO_PI * np.asarray(k, dtype=float))))
            worst = np.maximum(worst, w)
    return ConditionReport.from_residuals("special:gen", worst, tol)


def _nep_special(system: WaveletSystem, j: int, grid: FrequencyGrid, tol: float) -> ConditionReport:
    x = grid.points()
    step = system.level_matrix(j + 1) @ np.linalg.inv(system.level_matrix(j))
    lhs = sum(np.abs(np.asarray(p(x))) ** 2 for p in system.phi_at(j))
    lhs = lhs + sum(np.abs(np.asarray(w(x))) ** 2 for w in system.wavelets(j))
    y = apply(step, x)
    rhs = sum(np.abs(np.asarray(p(y))) ** 2 for p in system.phi_at(j + 1))
    return ConditionReport.from_residuals(f"nep:special[j={j}]", lhs - rhs, tol)


def dual_frame_condition_residuals(system: WaveletSystem, grid: FrequencyGrid,
                                   levels: Sequence[int], mode: str = "tight-simple",
                                   system_tilde: WaveletSystem | None = None,
                                   tol: float = 1e-12, J: int | None = None) -> list:
    """Residual reports for the frame characterization conditions.

    Parameters
    ----------
    system, system_tilde : WaveletSystem
        Primal and dual systems; the dual defaults to the primal.
    grid : FrequencyGrid
        Must contain every generator support (and its image under the
        level step).
    levels : sequence of int
    mode : {"tight-simple", "stationary", "nonstationary"}
        ``tight-simple`` checks the non-overlap property of every
        generator, then the per-level identity
        ``|phi|^2 + sum |psi_j|^2 = |phi(N .)|^2``.
        ``stationary`` checks ``I_Phi^k + I_Psi^k = I_Phi^{Nk}(N .)`` for
        ``k`` in ``Z^d ∪ N^{-1} Z^d``.
        ``nonstationary`` checks the alias identities for every nonzero
        ``k`` of the finite part of ``Lambda`` reachable on the grid, and
        reports the low-pass profile
        ``I_Phi^0(N_J .) + sum_{J <= j < J'} I_{Psi_j}^0(N_j .)`` for each
        ``J'`` in ``levels`` (informational, infinite tolerance) followed
        by the same residual at the last level with tolerance ``tol``.

    Raises
    ------
    SupportOverflow
    """
    levels = sorted(int(v) for v in levels)
    if not levels:
        raise InputError("levels must not be empty")
    st = system_tilde or system
    reports = []
    if mode == "tight-simple":
        if system_tilde is not None:
            raise InputError("tight-simple mode is self-dual")
        gens = list(system.phi)
        for j in levels:
            gens += list(system.wavelets(j))
        _check_cover(grid, gens)
        for j in levels:
            step_inv = np.linalg.inv(system.level_matrix(j + 1) @ np.linalg.inv(system.level_matrix(j)))
            _check_cover(grid, system.phi_at(j + 1), step_inv)
        reports.append(_special_gen(gens, grid, tol))
        for j in levels:
            reports.append(_nep_special(system, j, grid, tol))
        return reports
    if mode == "stationary":
        psi = system.wavelets(levels[0])
        psi_t = st.wavelets(levels[0])
        steps = (np.eye(system.dim), system.dilation.transpose_inverse)
        rep = mra_consistency_residual((system.phi, st.phi), (psi, psi_t),
                                       (system.phi, st.phi), steps, grid, tol)
        return [ConditionReport("nws:I", rep.max_residual, rep.mean_residual, rep.points,
                                rep.tolerance, rep.passed)]
    if mode == "nonstationary":
        J = levels[0] if J is None else J
        return _nonstationary_reports(system, st, grid, J, levels, tol)
    raise InputError(f"unknown mode {mode!r}")


def _nonstationary_reports(system, st, grid, J, levels, tol):
    d = system.dim
    x = grid.points()
    j_top = max(levels)
    radius = grid.sup_radius() / np.pi
    reports = []
    # alias identities for nonzero k of Lambda inside the reachable box
    lo, hi = -radius * np.ones(d), radius * np.ones(d)
    cand = [_lattice_points_in_box(np.linalg.inv(system.level_matrix(j)), lo, hi)
            for j in range(J, j_top + 1)]
    ks = _unique_rows(np.concatenate(cand))
    ks = ks[np.any(np.abs(ks) > 1e-12, axis=1)]
    worst = np.zeros(x.shape[:-1])
    mean_acc, count = 0.0, 0
    for k in ks:
        nj = system.level_matrix(J)
        total = _level_bracket(system.phi, st.phi, nj, k, x)
        for j in range(J, j_top + 1):
            nj = system.level_matrix(j)
            total = total + _level_bracket(system.wavelets(j), st.wavelets(j), nj, k, x)
        a = np.abs(total)
        worst = np.maximum(worst, a)
        mean_acc += float(a.mean())
        count += 1
    mean = mean_acc / count if count else 0.0
    reports.append(ConditionReport("basic:cond:2", float(worst.max()) if count else 0.0, mean,
                                   int(count * worst.size), tol,
                                   bool(worst.max() <= tol) if count else True))
    # low-pass profile
    zero = np.zeros(d)
    acc = _level_bracket(system.phi, st.phi, system.level_matrix(J), zero, x)
    j = J
    last = None
    for jp in levels:
        while j < jp:
            acc = acc + _level_bracket(system.wavelets(j), st.wavelets(j),
                                       system.level_matrix(j), zero, x)
            j += 1
        last = ConditionReport.from_residuals(f"basic:cond:1[J'={jp}]", acc - 1.0, np.inf)
        reports.append(last)
    reports.append(ConditionReport("basic:cond:1", last.max_residual, last.mean_residual,
                                   last.points, tol, last.max_residual <= tol))
    return reports


def _pair(sets):
    if isinstance(sets, tuple) and len(sets) == 2 and isinstance(sets[0], (list, tuple)):
        return list(sets[0]), list(sets[1])
    s = list(sets)
    return s, s


def mra_consistency_residual(phi_j, psi_j, phi_next, dilations, grid: FrequencyGrid,
                             tol: float = 1e-12) -> ConditionReport:
    """Residual of the quasi-MRA identity in the variable ``zeta = N_j xi``:

    ``I_{Phi_j}^k(zeta) + I_{Psi_j}^k(zeta) = I_{Phi_{j+1}}^{S k}(S zeta)``,
    ``S = N_{j+1} N_j^{-1}``, for ``k`` in ``Z^d ∪ S^{-1} Z^d``.

    Each generator set may be a sequence (self-dual) or a pair
    ``(primal, dual)``.  ``dilations`` is ``(N_j, N_{j+1})``.  Terms with
    non-integer indices vanish by definition and are skipped.

    Raises
    ------
    SupportOverflow
    """
    pj, pj_t = _pair(phi_j)
    sj, sj_t = _pair(psi_j)
    pn, pn_t = _pair(phi_next)
    nj, nn = (np.atleast_2d(np.asarray(m, dtype=float)) for m in dilations)
    step = nn @ np.linalg.inv(nj)
    step_inv = np.linalg.inv(step)
    d = step.shape[0]
    _check_cover(grid, pj + sj + pj_t + sj_t)
    _check_cover(grid, pn + pn_t, step_inv)
    x = grid.points()
    r_left = max([halfwidth(h) for h in pj + sj + pj_t + sj_t] or [0.0])
    r_right = max([halfwidth(h) for h in pn + pn_t] or [0.0])
    kl = r_left * 2 / TWO_PI
    cand = [_lattice_points_in_box(np.eye(d), -kl * np.ones(d), kl * np.ones(d))]
    kr = r_right * 2 / TWO_PI
    cand.append(_lattice_points_in_box(step_inv, -kr * np.ones(d), kr * np.ones(d)))
    ks = _unique_rows(np.concatenate(cand))
    worst = np.zeros(x.shape[:-1])
    total_mean = 0.0
    y = apply(step, x)
    for k in ks:
        left = bracket_I(pj, pj_t, k, x) + bracket_I(sj, sj_t, k, x)
        right = bracket_I(pn, pn_t, step @ k, y)
        a = np.abs(left - right)
        worst = np.maximum(worst, a)
        total_mean += float(a.mean())
    n = len(ks)
    mx = float(worst.max()) if n else 0.0
    return ConditionReport("cond:mra", mx, total_mean / n if n else 0.0, int(n * worst.size),
                           tol, mx <= tol)


# ---------------------------------------------------------------- energies

def predicted_termination(f: TestFunction, phi: GeneratorEvaluator, system: WaveletSystem,
                          J: int, ceiling: int = 64) -> int:
    """First ``J' >= J`` with ``N_{J'}(supp f)`` inside the plateau ``B_c``.

    Uses the box corners of the support; the adapted norm is convex so its
    maximum over the box is attained at a corner.
    """
    corners = f.corners()
    for jp in range(J, J + ceiling + 1):
        r = phi.radius(apply(system.level_matrix(jp), corners))
        if np.max(r) <= phi.support_inner:
            return jp
    raise NoConvergence("support never enters the plateau")


def _level_energy(f, gens, nj, q) -> float:
    return sum(coefficient_energy(f, gen, nj, points_per_width=q) for gen in gens)


@dataclass(frozen=True)
class EnergyResult:
    """Outcome of :func:`parseval_energy_test`."""

    energy_ratio: float
    J_prime: int
    level_energies: tuple
    norm_squared: float

    def __iter__(self):
        return iter((self.energy_ratio, self.J_prime))


def parseval_energy_test(f: TestFunction, system: WaveletSystem, J: int, tol: float = 1e-12,
                         ceiling: int = 64, quad_points: int = 512,
                         points_per_width: int = POINTS_PER_WIDTH) -> EnergyResult:
    """Accumulate coefficient energy level by level.

    The low-pass energy at level ``J`` is added first, then wavelet levels
    ``J, J+1, ...`` until one contributes less than ``tol`` times
    ``(2 pi)^d ||f||^2``; that level is returned as ``J'``.  ``||f||^2``
    is computed independently by the trapezoid rule on ``quad_points``
    points per axis.

    Returns
    -------
    EnergyResult
        Unpacks as ``(energy_ratio, J_prime)``.

    Raises
    ------
    NoConvergence
        If no level below ``J + ceiling`` meets the criterion.
    """
    d = system.dim
    nf = f.norm_squared(quad_points)
    if nf == 0.0:
        return EnergyResult(1.0, J, (), 0.0)
    target = TWO_PI**d * nf
    total = _level_energy(f, system.phi_at(J), system.level_matrix(J), points_per_width)
    energies = [total]
    for j in range(J, J + ceiling + 1):
        inc = _level_energy(f, system.wavelets(j), system.level_matrix(j), points_per_width)
        if inc < tol * target:
            return EnergyResult(total / target, j, tuple(energies), nf)
        total += inc
        energies.append(inc)
    raise NoConvergence(f"energy still growing after {ceiling} levels")


def random_test_function(rng: np.random.Generator, dim: int, parts: int = 3,
                         box: float = np.pi / 2) -> TestFunction:
    """Sum of ``parts`` smooth bumps inside ``[-box, box]^dim``."""
    bumps = []
    for _ in range(parts):
        hw = rng.uniform(box / 4, box / 2, size=dim)
        center = rng.uniform(-box + hw, box - hw)
        amp = complex(rng.normal(), rng.normal())
        bumps.append(TestFunction.bump(center, hw, amp))
    return TestFunction.combination(bumps)


def bessel_bound_estimate(system: WaveletSystem | None, J: int, ensemble_size: int = 50,
                          dim: int | None = None, seed: int = ENSEMBLE_SEED, tol: float = 1e-12,
                          quad_points: int = 512, points_per_width: int = 256) -> float:
    """Largest total coefficient energy over random unit-norm test functions.

    For a tight system every sample gives ``(2 pi)^d``.  ``None`` stands
    for the empty system and returns 0.
    """
    if ensemble_size < 10:
        raise InputError("ensemble_size must be at least 10")
    if system is None:
        return 0.0
    dim = dim or system.dim
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(ensemble_size):
        f = random_test_function(rng, dim)
        nf = f.norm_squared(quad_points)
        scale = 1.0 / math.sqrt(nf)
        fu = TestFunction(lambda x, f=f, s=scale: s * f(x), f.support_lo, f.support_hi)
        res = parseval_energy_test(fu, system, J, tol, quad_points=quad_points,
                                   points_per_width=points_per_width)
        best = max(best, res.energy_ratio * TWO_PI**dim)
    return best


# ---------------------------------------------------------------- suites

def oracle_suite(dim: int = 2) -> list:
    """Five fixed test-function pairs ``(name, f, g)`` for the oracle."""
    h = np.pi / 2
    base = TestFunction.bump(np.zeros(dim), h)
    off = TestFunction.bump(np.full(dim, 0.3), 0.9)
    phase = TestFunction.bump(np.full(dim, -0.2), 1.1, 0.7 - 0.4j, np.arange(1, dim + 1) * 0.8)
    mix = TestFunction.combination([
        TestFunction.bump(np.full(dim, 0.5), 0.6, 1.0),
        TestFunction.bump(np.full(dim, -0.6), 0.7, 0.5j),
    ])
    narrow = TestFunction.bump(np.r_[0.4, np.zeros(dim - 1)], 0.45, 2.0)
    return [
        ("bump", base, base),
        ("offset", off, off),
        ("phase/cross", phase, base),
        ("mixture", mix, mix),
        ("narrow/cross", narrow, off),
    ]
