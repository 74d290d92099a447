"""Dilation matrices, adapted norms and lattice bookkeeping.

A dilation ``M`` acts on space; frequency space is contracted by
``N = (M^T)^{-1}``.  Everything here is immutable once built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist

from .errors import (
    DegenerateLambda0,
    InputError,
    JordanFailure,
    NotExpansive,
    NotInteger,
    SingularMatrix,
)

INTEGER_TOL = 1e-12
DET_TOL = 1e-12
JORDAN_COND_MAX = 1e12
SAFETY = 0.99


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


def parse_matrix(text: str) -> np.ndarray:
    """Parse row-major text such as ``"2,0;0,2"`` (or a bare ``"2"``)."""
    rows = [r for r in text.replace(" ", "").split(";") if r]
    if not rows:
        raise InputError(f"empty matrix text {text!r}")
    try:
        values = [[float(v) for v in r.split(",")] for r in rows]
    except ValueError as exc:
        raise InputError(f"bad matrix text {text!r}") from exc
    if any(len(r) != len(values) for r in values):
        raise InputError(f"matrix text {text!r} is not square")
    return np.array(values, dtype=float)


def format_matrix(m: np.ndarray) -> str:
    """Inverse of :func:`parse_matrix` using ``repr`` floats."""
    m = np.atleast_2d(m)
    return ";".join(",".join(_fmt_num(v) for v in row) for row in m)


def _fmt_num(v: float) -> str:
    v = float(v)
    return str(int(v)) if v.is_integer() and abs(v) < 2**53 else repr(v)


@dataclass(frozen=True)
class DilationMatrix:
    """A real invertible ``d x d`` matrix together with cached spectral data.

    Attributes
    ----------
    entries : ndarray
        The matrix ``M`` itself.
    dim : int
    det_abs : float
        ``|det M|``.
    eigen_moduli : tuple of float
        Sorted eigenvalue moduli.
    is_integer : bool
        All entries within ``1e-12`` of an integer.
    transpose_inverse : ndarray
        ``N = (M^T)^{-1}``.
    """

    entries: np.ndarray
    dim: int
    det_abs: float
    eigen_moduli: tuple
    is_integer: bool
    transpose_inverse: np.ndarray

    @property
    def expansive(self) -> bool:
        return self.eigen_moduli[0] > 1.0

    @property
    def T(self) -> "DilationMatrix":
        """The transpose, analyzed as a dilation in its own right."""
        return analyze_dilation(self.entries.T)

    @property
    def N(self) -> np.ndarray:
        return self.transpose_inverse

    def power_N(self, j: int) -> np.ndarray:
        """``N^j`` for any integer ``j`` (negative powers give ``(M^T)^|j|``)."""
        if j >= 0:
            return np.linalg.matrix_power(self.transpose_inverse, j)
        return np.linalg.matrix_power(self.entries.T, -j)

    def integer_entries(self) -> np.ndarray:
        if not self.is_integer:
            raise NotInteger(f"dilation {format_matrix(self.entries)} is not integer valued")
        return np.rint(self.entries).astype(np.int64)

    def __repr__(self) -> str:
        return f"DilationMatrix({format_matrix(self.entries)})"


def analyze_dilation(entries) -> DilationMatrix:
    """Build a :class:`DilationMatrix`.

    Accepts a scalar for ``d = 1``, a square array, or matrix text.

    Raises
    ------
    SingularMatrix
        If ``|det M| <= 1e-12``.
    """
    if isinstance(entries, str):
        entries = parse_matrix(entries)
    m = np.atleast_2d(np.asarray(entries, dtype=float))
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise InputError(f"dilation must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InputError("dilation has non-finite entries")
    det = float(np.linalg.det(m))
    if abs(det) <= DET_TOL:
        raise SingularMatrix(f"|det M| = {abs(det):.3g} is not invertible")
    moduli = tuple(sorted(float(v) for v in np.abs(np.linalg.eigvals(m))))
    is_int = bool(np.all(np.abs(m - np.rint(m)) <= INTEGER_TOL))
    if is_int:
        m = np.rint(m)
        det = float(round(det))
    n = np.linalg.inv(m.T)
    return DilationMatrix(
        entries=_frozen(m),
        dim=m.shape[0],
        det_abs=abs(det),
        eigen_moduli=moduli,
        is_integer=is_int,
        transpose_inverse=_frozen(n),
    )


def _as_dilation(m) -> DilationMatrix:
    return m if isinstance(m, DilationMatrix) else analyze_dilation(m)


@dataclass(frozen=True)
class AdaptedNorm:
    """Vector norm ``||x|| = |G x|_2`` in which ``M`` is nearly isotropic.

    For every ``x``::

        lower_factor * ||x|| <= ||M x|| <= upper_factor * ||x||

    Attributes
    ----------
    basis_change : ndarray
        Complex ``d x d`` matrix ``G``.
    lower_factor, upper_factor : float
        ``lambda_min - eps`` and ``lambda_max + eps``.
    epsilon : float
    method : str
        ``"jordan"`` (eigenbasis) or ``"schur"``.
    """

    basis_change: np.ndarray
    lower_factor: float
    upper_factor: float
    epsilon: float
    method: str
    gram: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.basis_change.shape[0]

    def __call__(self, x) -> np.ndarray:
        """Norm of points stored along the last axis."""
        x = np.asarray(x, dtype=float)
        if self._diagonal_gram is not None:
            return np.sqrt(np.einsum("...i,i,...i->...", x, self._diagonal_gram, x))
        return np.sqrt(np.maximum(np.einsum("...i,ij,...j->...", x, self.gram, x), 0.0))

    @property
    def _diagonal_gram(self):
        g = self.gram
        if np.count_nonzero(g - np.diag(np.diag(g))) == 0:
            return np.diag(g)
        return None

    def sup_extent(self, radius: float = 1.0) -> float:
        """Largest ``|x|_inf`` over the ball ``||x|| <= radius``."""
        qinv = np.linalg.inv(self.gram)
        return float(radius * np.sqrt(np.max(np.diag(qinv))))

    def euclid_extent(self, radius: float = 1.0) -> float:
        """Largest ``|x|_2`` over the ball ``||x|| <= radius``."""
        return float(radius / np.sqrt(np.min(np.linalg.eigvalsh(self.gram))))

    def operator_norm(self, a: np.ndarray) -> float:
        """Induced norm of ``A``, i.e. ``|G A G^{-1}|_2``."""
        g = self.basis_change
        return float(np.linalg.norm(g @ np.asarray(a) @ np.linalg.inv(g), 2))

    def max_sup_image(self, a: np.ndarray) -> float:
        """Largest ``|A x|_inf`` over the unit ball, in closed form."""
        a = np.atleast_2d(np.asarray(a, dtype=float))
        qinv = np.linalg.inv(self.gram)
        return float(np.sqrt(np.max(np.einsum("ij,jk,ik->i", a, qinv, a))))


def _norm_from_g(g: np.ndarray, lo: float, hi: float, eps: float, method: str) -> AdaptedNorm:
    q = np.real(g.conj().T @ g)
    q = 0.5 * (q + q.T)
    return AdaptedNorm(
        basis_change=_frozen(g),
        lower_factor=float(lo),
        upper_factor=float(hi),
        epsilon=float(eps),
        method=method,
        gram=_frozen(q),
    )


def default_epsilon(m: DilationMatrix) -> float:
    """``(lambda_min - 1) / 10`` for expansive ``M``, else ``lambda_min / 10``."""
    lam = m.eigen_moduli[0]
    return (lam - 1.0) / 10.0 if lam > 1.0 else lam / 10.0


def build_adapted_norm(m, epsilon: float | None = None, method: str = "auto") -> AdaptedNorm:
    """Construct an adapted norm for ``M``.

    Parameters
    ----------
    m : DilationMatrix or array_like
    epsilon : float, optional
        Slack in the sandwich constants.  Defaults to
        :func:`default_epsilon`.
    method : {"auto", "jordan", "schur"}
        ``"jordan"`` uses the eigenbasis and raises :class:`JordanFailure`
        when it is ill-conditioned; ``"auto"`` then falls back to
        ``"schur"``, which rescales the strictly upper part of the
        triangular factor.
    """
    m = _as_dilation(m)
    eps = default_epsilon(m) if epsilon is None else float(epsilon)
    if not eps > 0:
        raise InputError(f"epsilon must be positive, got {epsilon}")
    lo = m.eigen_moduli[0] - eps
    hi = m.eigen_moduli[-1] + eps
    a = m.entries
    if method not in ("auto", "jordan", "schur"):
        raise InputError(f"unknown method {method!r}")

    if method in ("auto", "jordan"):
        try:
            return _norm_from_g(_jordan_basis(a), lo, hi, eps, "jordan")
        except JordanFailure:
            if method == "jordan":
                raise
    t, z = scipy.linalg.schur(a.astype(complex), output="complex")
    upper = np.triu(t, 1)
    size = np.linalg.norm(upper)
    delta = 1.0 if size <= eps else eps / size
    d = a.shape[0]
    dinv = np.diag(delta ** -np.arange(d, dtype=float))
    return _norm_from_g(dinv @ z.conj().T, lo, hi, eps, "schur")


def _jordan_basis(a: np.ndarray) -> np.ndarray:
    d = a.shape[0]
    if np.count_nonzero(a - np.diag(np.diag(a))) == 0:
        return np.eye(d, dtype=complex)
    _, v = np.linalg.eig(a)
    if not np.all(np.isfinite(v)):
        raise JordanFailure("eigenvector computation failed")
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > JORDAN_COND_MAX:
        raise JordanFailure(f"eigenbasis condition number {cond:.3g} exceeds {JORDAN_COND_MAX:g}")
    g = np.linalg.inv(v)
    # unit-modulus rows keep the norm scale independent of eig's normalization
    g = g / np.linalg.norm(g, axis=1, keepdims=True)
    return g.astype(complex)


@dataclass(frozen=True)
class CosetSet:
    """Coset representatives for an integer dilation.

    ``gamma`` enumerates ``Z^d / M Z^d``; ``omega`` enumerates
    ``(M^T)^{-1} Z^d`` inside ``[0, 1)^d``.  Both are sorted with the zero
    vector first.
    """

    gamma: np.ndarray
    omega: np.ndarray

    def __len__(self) -> int:
        return len(self.gamma)


def _unit_cube_preimages(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Integer ``n`` with ``B^{-1} n`` in ``[0,1)^d``; returns ``(n, B^{-1} n)``."""
    d = b.shape[0]
    det = int(round(abs(np.linalg.det(b))))
    corners = np.array(list(itertools.product((0.0, 1.0), repeat=d))) @ b.T
    lo = np.floor(corners.min(axis=0)).astype(int)
    hi = np.ceil(corners.max(axis=0)).astype(int)
    grids = np.meshgrid(*[np.arange(a, c + 1) for a, c in zip(lo, hi)], indexing="ij")
    cand = np.stack([g.ravel() for g in grids], axis=-1)
    y = np.linalg.solve(b, cand.T.astype(float)).T
    # entries of B^{-1} n are multiples of 1/|det B|
    y = np.rint(y * det) / det + 0.0
    keep = np.all((y >= 0) & (y < 1), axis=1)
    n, y = cand[keep], y[keep]
    order = np.lexsort(y.T)
    return n[order], y[order]


def coset_representatives(m) -> CosetSet:
    """Coset sets ``gamma`` and ``omega`` of an integer dilation.

    Raises
    ------
    NotInteger
    """
    m = _as_dilation(m)
    mi = m.integer_entries().astype(float)
    gamma, _ = _unit_cube_preimages(mi)
    _, omega = _unit_cube_preimages(mi.T)
    gamma = gamma[np.lexsort(gamma.T)]
    count = int(round(m.det_abs))
    if len(gamma) != count or len(omega) != count:
        raise ArithmeticError("coset enumeration mismatch")
    return CosetSet(gamma=_frozen(gamma.astype(np.int64)), omega=_frozen(omega))


@dataclass(frozen=True)
class LatticeSample:
    """Points of ``U_{j >= J} (M^T)^j Z^d`` inside a Euclidean ball."""

    points: np.ndarray
    min_separation: float
    contraction_certified: bool
    contraction_factor: float


def certify_lattice_conditions(m, J: int, radius: float, j_max: int,
                               epsilon: float | None = None) -> LatticeSample:
    """Enumerate the union of lattices and certify discreteness.

    The contraction ``||N^j k|| -> 0`` is certified through the adapted norm
    of ``M^T``: ``||N x|| <= ||x|| / (lambda_min - eps)``.

    Raises
    ------
    NotExpansive
    """
    m = _as_dilation(m)
    if not m.expansive:
        raise NotExpansive(f"{m!r} has an eigenvalue of modulus {m.eigen_moduli[0]:.6g} <= 1")
    if radius <= 0:
        raise InputError("radius must be positive")
    if j_max < J:
        raise InputError("j_max must be >= J")
    norm = build_adapted_norm(m.T, epsilon)
    d = m.dim
    pts = []
    for j in range(J, j_max + 1):
        gen = m.power_N(-j)  # (M^T)^j
        inv = m.power_N(j)
        bound = int(np.ceil(radius * np.abs(inv).sum(axis=1).max())) + 1
        ax = np.arange(-bound, bound + 1)
        grid = np.stack([g.ravel() for g in np.meshgrid(*([ax] * d), indexing="ij")], axis=-1)
        p = grid @ gen.T
        pts.append(p[np.linalg.norm(p, axis=1) <= radius])
    allp = np.concatenate(pts)
    allp = np.unique(np.round(allp, 12), axis=0)
    sep = float(pdist(allp).min()) if len(allp) > 1 else float("inf")
    factor = 1.0 / norm.lower_factor
    certified = bool(norm.lower_factor > 1.0 and sep > 0)
    return LatticeSample(points=_frozen(allp), min_separation=sep,
                         contraction_certified=certified, contraction_factor=factor)


def choose_support_radius(m, lambda0: float, norm: AdaptedNorm | None = None) -> float:
    """Largest ``c`` (times a 1% margin) with ``(M^T)^2 B_c`` inside the
    open cube ``(-lambda0 pi, lambda0 pi)^d``.

    Balls are taken in the adapted norm of ``M^T``.  The other inclusions
    ``B_c ⊆ B_{lambda c} ⊆ M^T B_c ⊆ (M^T)^2 B_c`` follow from the sandwich
    inequality, so only the outermost set is measured.  Its sup-norm extent
    is computed exactly: for the gram matrix ``Q`` of the norm and rows
    ``a_i`` of ``A = (M^T)^2`` it is ``max_i sqrt(a_i Q^{-1} a_i)``.

    Raises
    ------
    DegenerateLambda0, NotExpansive
    """
    if not 0.0 < lambda0 < 1.0:
        raise DegenerateLambda0(f"lambda0 must lie in (0, 1), got {lambda0}")
    m = _as_dilation(m)
    if not m.expansive:
        raise NotExpansive(f"{m!r} is not expansive")
    if norm is None:
        norm = build_adapted_norm(m.T)
    mt = m.entries.T
    extent = norm.max_sup_image(mt @ mt)
    return SAFETY * lambda0 * np.pi / extent
