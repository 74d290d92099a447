"""Angular splitting of a radial wavelet and the 2D directional family.

At level ``j`` the family has ``s_j = m * 2^k`` members, ``k = floor(rho j)``.
Member ``l`` is

    psi_hat^{j,l}(xi) = psi_r(|xi|) * g(angle(xi) + l pi / s_j),

where ``psi_r`` is the 1D wavelet for ``M = 2`` used radially and ``g`` is
the antipodally symmetrized angular window

    g(t) = sqrt(alpha(t)^2 + alpha(t + pi)^2),   alpha = alpha_{s_j, eps / 2^k}.

The ``2 s_j`` shifts of ``alpha`` by ``pi / s_j`` tile the circle, hence
``sum_l g(t + l pi / s_j)^2 = 1`` and the members split ``|psi_r|^2``
exactly.  For ``s_j >= 2`` the two halves of ``g`` have disjoint support
and ``g`` reduces to ``alpha(t) + alpha(t + pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import BadEps, BadRho, IndexOutOfRange, InputError, PartitionResidualTooLarge
from .generators import GeneratorEvaluator, as_points, construct_phi, construct_psi
from .lattice import analyze_dilation, build_adapted_norm
from .windows import PeriodicWindow, build_angular_window

PARTITION_TOL = 1e-10
SPHERE_SEED = 0x5EED


def floor_rho_j(rho: float, j: int) -> int:
    """``floor(rho * j)`` computed on the nearest simple fraction of ``rho``.

    Avoids ``0.1 * 30 = 2.9999...`` style rounding for decimal inputs.
    """
    r = Fraction(rho).limit_denominator(10**6)
    return int((r * j) // 1)


def directional_count(m: int, rho: float, j: int) -> int:
    """``s_j = m * 2^floor(rho j)``."""
    return int(m) * 2 ** floor_rho_j(rho, j)


@dataclass(frozen=True)
class SymmetricWedge:
    """Angular window ``g(t + offset)`` with ``g = sqrt(a(t)^2 + a(t+pi)^2)``."""

    window: PeriodicWindow
    offset: float

    def of_angle(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float) + self.offset
        a = np.asarray(self.window(t))
        b = np.asarray(self.window(t + np.pi))
        both = (a > 0) & (b > 0)
        out = a + b
        if both.any():
            out[both] = np.hypot(a[both], b[both])
        return out

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return self.of_angle(np.arctan2(u[..., 1], u[..., 0]))


@dataclass(frozen=True)
class AngularPartition:
    """Angular windows ``beta_{j,l}`` whose squares sum to one on the sphere.

    ``windows`` are callables on unit vectors (points on the last axis).
    ``scheme`` is ``"polar-2d"`` for the built-in wedges and
    ``"generic-sphere"`` for user-supplied stacks.
    """

    level: int
    count: int
    windows: tuple
    scheme: str
    dim: int = 2

    def residual(self, samples: int | None = None) -> float:
        """Max of ``|sum_l beta_l(u)^2 - 1|`` over a dense sphere sample."""
        u = sphere_samples(self.dim, samples)
        if self.scheme == "polar-2d":
            t = np.arctan2(u[:, 1], u[:, 0])
            total = sum(w.of_angle(t) ** 2 for w in self.windows)
        else:
            total = sum(np.abs(np.asarray(w(u))) ** 2 for w in self.windows)
        return float(np.max(np.abs(total - 1.0)))


def sphere_samples(dim: int, samples: int | None = None) -> np.ndarray:
    """Uniform circle grid for ``d = 2``; seeded random points otherwise."""
    if dim == 1:
        return np.array([[-1.0], [1.0]])
    if dim == 2:
        n = samples or 2**14
        t = -np.pi + 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    n = samples or 10_000 * dim
    g = np.random.default_rng(SPHERE_SEED).normal(size=(n, dim))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def trivial_partition(dim: int = 2, level: int = 0) -> AngularPartition:
    def one(u):
        return np.ones(np.shape(u)[:-1])

    return AngularPartition(level, 1, (one,), "generic-sphere", dim)


def polar_partition(m: int, rho: float, j: int, eps: float | None = None) -> AngularPartition:
    """The ``s_j`` antipodal wedges of level ``j``.

    ``eps`` is the transition half-width of the uncompressed window
    ``alpha_{m, eps}`` (default ``pi/(4m)``); at level ``j`` it is divided
    by ``2^floor(rho j)`` together with the angular period.
    """
    _check_family_params(m, rho, j, eps)
    k = floor_rho_j(rho, j)
    n = m * 2**k
    eps = np.pi / (4 * m) if eps is None else float(eps)
    window = build_angular_window(n, eps / 2**k)
    wedges = tuple(SymmetricWedge(window, ell * np.pi / n) for ell in range(n))
    return AngularPartition(j, n, wedges, "polar-2d", 2)


def _check_family_params(m, rho, j, eps):
    if int(m) != m or m < 1:
        raise InputError(f"m must be a positive integer, got {m}")
    if not 0.0 <= rho < 1.0:
        raise BadRho(f"rho must lie in [0, 1), got {rho}")
    if int(j) != j or j < 0:
        raise InputError(f"j must be a nonnegative integer, got {j}")
    if eps is not None and not 0.0 < eps <= np.pi / (2 * m) * (1 + 1e-15):
        raise BadEps(f"eps must lie in (0, pi/(2m)] = (0, {np.pi / (2 * m):.6g}], got {eps}")


@dataclass(frozen=True)
class DirectionalFamily:
    """Members ``psi_hat^{j,l}`` of one level together with their parents.

    Attributes
    ----------
    level : int
    m : int or None
    rho : float or None
    eps : float or None
        Uncompressed angular transition half-width.
    count : int
        ``s_j``.
    members : tuple of GeneratorEvaluator
    psi : GeneratorEvaluator
        The radial wavelet being split.
    phi : GeneratorEvaluator or None
        The matching radial refinable function.
    eta : callable or None
        Polar profile ``psi_r(r) alpha_{m,eps}(t)``.
    partition : AngularPartition
    """

    level: int
    m: int | None
    rho: float | None
    eps: float | None
    count: int
    members: tuple
    psi: GeneratorEvaluator
    phi: GeneratorEvaluator | None
    eta: Callable | None
    partition: AngularPartition

    @property
    def s(self) -> int:
        return self.count

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, ell: int) -> GeneratorEvaluator:
        if not 0 <= ell < self.count:
            raise IndexOutOfRange(f"member index {ell} outside [0, {self.count})")
        return self.members[ell]

    def split_residual(self, grid) -> float:
        """``max |sum_l |psi^{j,l}|^2 - |psi|^2|`` on ``grid``."""
        x = grid.points()
        total = sum(np.abs(mem(x)) ** 2 for mem in self.members)
        return float(np.max(np.abs(total - np.abs(self.psi(x)) ** 2)))


def rotation(delta: float) -> np.ndarray:
    """Counterclockwise rotation of the plane by ``delta``."""
    c, s = np.cos(delta), np.sin(delta)
    return np.array([[c, -s], [s, c]])


def _member(psi: GeneratorEvaluator, beta, polar: bool, ell: int) -> GeneratorEvaluator:
    base = psi.func

    def split(x, window, xr=None):
        # xr: rotated copy of x used for the angle; the radial factor is
        # rotation invariant and is taken from x itself
        v = np.asarray(base(x))
        out = np.zeros_like(v)
        nz = v != 0
        if nz.any():
            xn = x[nz] if xr is None else xr[nz]
            if polar:
                out[nz] = v[nz] * window.of_angle(np.arctan2(xn[..., 1], xn[..., 0]))
            else:
                u = xn / np.linalg.norm(xn, axis=-1, keepdims=True)
                out[nz] = v[nz] * np.asarray(window(u))
        return out

    if polar and beta.offset != 0.0:
        # rotated copy of the first member: psi^{j,l}(xi) = psi^{j,0}(R xi)
        unrotated = SymmetricWedge(beta.window, 0.0)
        rot_t = rotation(beta.offset).T

        def f(x):
            return split(x, unrotated, x @ rot_t)
    else:
        def f(x):
            return split(x, beta)

    return GeneratorEvaluator("directional", psi.dilation, psi.c, psi.lambda0, psi.norm,
                              psi.support_outer, psi.support_inner, psi.support_halfwidth,
                              f, f"psi[{ell}]")


def angular_split(psi: GeneratorEvaluator, partition: AngularPartition,
                  tol: float = PARTITION_TOL) -> DirectionalFamily:
    """Split ``psi`` into ``psi * beta_l(xi / |xi|)``.

    Angles are evaluated only where ``psi`` is nonzero, so the origin is
    never divided by.

    Raises
    ------
    PartitionResidualTooLarge
        If the windows fail the partition identity by more than ``tol``.
    """
    if partition.dim != psi.dim:
        raise InputError("partition and generator dimensions differ")
    res = partition.residual()
    if res > tol:
        raise PartitionResidualTooLarge(f"partition residual {res:.3e} exceeds {tol:g}")
    polar = partition.scheme == "polar-2d"
    members = tuple(_member(psi, w, polar, ell) for ell, w in enumerate(partition.windows))
    return DirectionalFamily(partition.level, None, None, None, partition.count, members,
                             psi, None, None, partition)


def radial_lift(gen: GeneratorEvaluator, dim: int = 2) -> GeneratorEvaluator:
    """Use a 1D generator for ``M = 2`` as a radial function on ``R^dim``."""
    if gen.dim != 1:
        raise InputError("radial_lift expects a 1D generator")
    dil = analyze_dilation(float(gen.dilation.entries[0, 0]) * np.eye(dim))
    norm = build_adapted_norm(dil.T, gen.norm.epsilon)
    base = gen.func

    def f(x):
        return base(np.sqrt(np.einsum("...i,...i->...", x, x))[..., None])

    return GeneratorEvaluator(gen.kind, dil, gen.c, gen.lambda0, norm, gen.support_outer,
                              gen.support_inner, gen.support_outer, f, gen.label)


def radial_pair(lambda0: float = 0.8) -> tuple:
    """1D ``(phi, psi)`` for ``M = 2``."""
    phi = construct_phi(2.0, lambda0)
    return phi, construct_psi(phi)


def build_directional_family_2d(m: int, rho: float, j: int, eps: float | None = None,
                                radial: Sequence | None = None,
                                lambda0: float = 0.8) -> DirectionalFamily:
    """Directional family of level ``j``.

    Parameters
    ----------
    m : int
        Number of directions at level 0.
    rho : float
        Angular refinement rate in ``[0, 1)``.
    j : int
        Level, ``j >= 0``.
    eps : float, optional
        Transition half-width of ``alpha_{m, eps}``, in ``(0, pi/(2m)]``.
        Default ``pi/(4m)``.
    radial : (phi, psi), optional
        1D generators for ``M = 2``; built from ``lambda0`` when omitted.
    """
    _check_family_params(m, rho, j, eps)
    eps = np.pi / (4 * m) if eps is None else float(eps)
    phi1, psi1 = radial if radial is not None else radial_pair(lambda0)
    phi2, psi2 = radial_lift(phi1), radial_lift(psi1)
    part = polar_partition(m, rho, j, eps)
    fam = angular_split(psi2, part)
    alpha = build_angular_window(m, eps)
    base = psi1.func

    def eta(x):
        x = as_points(x, 2)
        r = np.sqrt(np.einsum("...i,...i->...", x, x))
        return base(r[..., None]) * alpha(np.arctan2(x[..., 1], x[..., 0]))

    return DirectionalFamily(j, int(m), float(rho), eps, fam.count, fam.members, psi2, phi2,
                             eta, part)


@dataclass(frozen=True)
class SupportDescriptor:
    """Annular double sector containing the support of one member."""

    r_lo: float
    r_hi: float
    theta_half_width: float
    center_angle: float
    parabolic_ratio: float

    def contains(self, x) -> np.ndarray:
        """Whether points lie in the closed double sector."""
        x = np.asarray(x, dtype=float)
        r = np.hypot(x[..., 0], x[..., 1])
        t = np.arctan2(x[..., 1], x[..., 0]) - self.center_angle
        # distance to the nearer of the two antipodal centers
        dt = np.abs(t - np.pi * np.round(t / np.pi))
        return (r >= self.r_lo) & (r <= self.r_hi) & (dt <= self.theta_half_width)


def support_descriptor(family: DirectionalFamily, ell: int, j_scale: int = 0) -> SupportDescriptor:
    """Support of ``psi_hat^{j,l}(2^{-j_scale} .)``.

    Radii scale by ``2^j_scale``; the half-angle is ``2^{-floor(rho j)}``
    times the level-0 half-angle ``pi/(2m) + eps``.  ``parabolic_ratio``
    is ``width / length^(1 - rho)`` with ``length = r_hi`` and
    ``width = 2 r_hi sin(half-angle)``.
    """
    if family.partition.scheme != "polar-2d":
        raise InputError("support descriptors need a polar-2d family")
    if not 0 <= ell < family.count:
        raise IndexOutOfRange(f"member index {ell} outside [0, {family.count})")
    wedge = family.partition.windows[ell]
    win = wedge.window
    scale = 2.0**j_scale
    r_lo = family.psi.support_inner * scale
    r_hi = family.psi.support_outer * scale
    half = min(np.pi / (2 * win.n) + win.eps, np.pi / 2)
    center = float(-wedge.offset)
    rho = family.rho if family.rho is not None else 0.0
    width = 2.0 * r_hi * np.sin(half)
    return SupportDescriptor(r_lo, r_hi, half, center, width / r_hi ** (1.0 - rho))
