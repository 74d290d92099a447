"""Masks, filter banks, polyphase matrices and OEP residuals.

Masks are closed-form ``2 pi Z^d``-periodic evaluators: the defining
formula is applied to the representative of ``xi`` in ``[-pi, pi)^d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import DivergentMaskBudget, GridTooCoarse, InputError
from .generators import GeneratorEvaluator, apply, as_points
from .grid import ConditionReport, FrequencyGrid
from .lattice import DilationMatrix, analyze_dilation, coset_representatives
from .windows import check_cutoff_params, tensor_cutoff, wrap_angle

SIGMA_THRESHOLD = 1e-13
MIN_OEP_POINTS = 64


def wrap_points(x: np.ndarray) -> np.ndarray:
    """Representative of every point in ``[-pi, pi)^d``."""
    return wrap_angle(x)


@dataclass(frozen=True)
class Mask:
    """A ``2 pi Z^d``-periodic complex function tied to an integer dilation.

    ``evaluator`` is applied to wrapped points.  A nonzero
    ``modulation_index`` ``k`` multiplies by ``exp(-i k . M^T xi)``, which
    is itself periodic because ``M`` is integral.
    """

    dilation: DilationMatrix
    evaluator: Callable = field(repr=False, compare=False)
    modulation_index: tuple | None = None
    label: str = ""
    periodize: bool = True

    @property
    def dim(self) -> int:
        return self.dilation.dim

    def __call__(self, xi) -> np.ndarray:
        x = as_points(xi, self.dim)
        val = np.asarray(self.evaluator(wrap_points(x) if self.periodize else x), dtype=complex)
        if self.modulation_index is not None:
            k = np.asarray(self.modulation_index, dtype=float)
            val = val * np.exp(-1j * (apply(self.dilation.entries.T, x) @ k))
        return val

    def modulated(self, k) -> "Mask":
        k = tuple(int(v) for v in np.atleast_1d(k))
        if len(k) != self.dim:
            raise InputError("modulation index has the wrong dimension")
        return replace(self, modulation_index=k if any(k) else None, label=f"{self.label}{list(k)}")

    def scaled(self, factor: complex) -> "Mask":
        f = self.evaluator
        return replace(self, evaluator=lambda x: factor * f(x), label=f"{factor:g}*{self.label}")

    @classmethod
    def constant(cls, dilation, value: complex = 1.0, label: str = "const") -> "Mask":
        def f(x):
            return np.full(x.shape[:-1], value, dtype=complex)

        return cls(_dilation(dilation), f, None, label)


def _dilation(m) -> DilationMatrix:
    return m if isinstance(m, DilationMatrix) else analyze_dilation(m)


@dataclass(frozen=True)
class FilterBank:
    """Lowpass mask, highpass masks and the multiplier ``Theta``.

    ``parent`` is the refinable function the bank was derived from; it
    defines the support set used by the OEP residuals.
    """

    lowpass: Mask
    highpass: tuple
    theta: Mask
    level: int | str = "stationary"
    parent: Callable | None = field(default=None, compare=False)

    @property
    def dilation(self) -> DilationMatrix:
        return self.lowpass.dilation

    def with_highpass(self, highpass: Sequence[Mask]) -> "FilterBank":
        return replace(self, highpass=tuple(highpass))


def derive_masks(phi: GeneratorEvaluator, children, lambda0: float | None = None,
                 eps0: float | None = None, fills: Sequence[Callable] | None = None,
                 level: int | str = "stationary") -> FilterBank:
    """Masks of a refinable function and its wavelets.

    ``a(xi) = phi(M^T xi)`` and, for each child,
    ``b(xi) = h(xi) child(M^T xi) / phi(xi)`` where ``phi(xi) != 0`` and
    ``h(xi) fill(xi)`` elsewhere, with ``h`` the tensor cutoff for
    ``(lambda0, eps0)``.  ``fill`` defaults to 1; directional families pass
    their angular wedges so the mask stays continuous.

    Parameters
    ----------
    phi : GeneratorEvaluator
    children : GeneratorEvaluator or sequence of them
        A single wavelet, or the members of a directional family.
    lambda0, eps0 : float, optional
        Default to ``phi.lambda0`` and ``(1 - lambda0) / 2``.
    """
    m = phi.dilation
    m.integer_entries()
    if hasattr(children, "members"):
        fam = children
        children = list(fam.members)
        if fills is None and fam.partition.scheme == "polar-2d":
            fills = [_wedge_fill(w) for w in fam.partition.windows]
    elif isinstance(children, GeneratorEvaluator) or callable(children):
        children = [children]
    lambda0 = phi.lambda0 if lambda0 is None else float(lambda0)
    eps0 = (1.0 - lambda0) / 2.0 if eps0 is None else float(eps0)
    check_cutoff_params(lambda0, eps0)
    mt = m.entries.T

    def a_eval(x):
        return phi(apply(mt, x))

    highs = []
    for idx, child in enumerate(children):
        fill = fills[idx] if fills is not None else None
        highs.append(Mask(m, _highpass(phi, child, mt, lambda0, eps0, fill), None, f"b{idx}"))
    theta = Mask.constant(m, 1.0, "theta")
    return FilterBank(Mask(m, a_eval, None, "a"), tuple(highs), theta, level, phi)


def _wedge_fill(wedge):
    def f(x):
        return wedge.of_angle(np.arctan2(x[..., 1], x[..., 0]))

    return f


def _highpass(phi, child, mt, lambda0, eps0, fill):
    own = getattr(child, "parent", None) is phi

    def child_at_mt(xn, pn):
        if own:
            # psi(M^T xi) with N M^T xi replaced by its exact value xi;
            # otherwise rounding in N M^T xi is amplified by 1/phi(xi)^2
            rad = pn**2 - np.asarray(phi(apply(mt, xn))) ** 2
            return np.sqrt(np.maximum(rad, 0.0))
        return np.asarray(child(apply(mt, xn)))

    def b_eval(x):
        h = tensor_cutoff(lambda0, eps0, x)
        p = np.asarray(phi(x))
        out = np.array(h, dtype=float) if fill is None else h * fill(x)
        nz = p != 0
        if np.any(nz):
            xn = x[nz]
            out[nz] = h[nz] * child_at_mt(xn, p[nz]) / p[nz]
        return out

    return b_eval


def refinement_residual(mask: Mask, parent, child, grid: FrequencyGrid,
                        tol: float = 1e-13) -> ConditionReport:
    """``|child(M^T xi) - mask(xi) parent(xi)|`` on ``grid``."""
    x = grid.points()
    mt = mask.dilation.entries.T
    res = np.asarray(child(apply(mt, x))) - mask(x) * np.asarray(parent(x))
    return ConditionReport.from_residuals(f"refinement:{mask.label}", res, tol)


def haar_bank() -> FilterBank:
    """Haar masks ``(1 +- exp(-i xi)) / 2`` for ``M = 2``."""
    m = analyze_dilation(2.0)

    def a(x):
        return 0.5 * (1.0 + np.exp(-1j * x[..., 0]))

    def b(x):
        return 0.5 * (1.0 - np.exp(-1j * x[..., 0]))

    return FilterBank(Mask(m, a, None, "a", periodize=False),
                      (Mask(m, b, None, "b", periodize=False),),
                      Mask.constant(m, 1.0, "theta"), "stationary", None)


def polyphase_matrix(bank: FilterBank, xi) -> np.ndarray:
    """Rows ``a, b_1, ..., b_L`` evaluated at ``xi + 2 pi omega_n``.

    ``xi`` may hold several points; the result then has shape
    ``points_shape + (1 + L, d_M)``.
    """
    cos = coset_representatives(bank.dilation)
    x = as_points(xi, bank.dilation.dim)
    shifted = x[..., None, :] + 2.0 * np.pi * cos.omega
    rows = [bank.lowpass(shifted)] + [b(shifted) for b in bank.highpass]
    return np.stack(rows, axis=-2)


def polyphase_identity_residual(bank: FilterBank, grid: FrequencyGrid,
                                tol: float = 1e-14) -> ConditionReport:
    """``max |conj(P)^T P - I|`` over the grid."""
    p = polyphase_matrix(bank, grid.points())
    gram = np.einsum("...ri,...rj->...ij", p.conj(), p)
    eye = np.eye(gram.shape[-1])
    res = np.abs(gram - eye).max(axis=(-2, -1))
    return ConditionReport.from_residuals("polyphase", res, tol)


@dataclass(frozen=True)
class SupportMask:
    """Membership in ``sigma = {xi : sum_k |phi(xi + 2 pi k)| > 1e-13}``."""

    grid: FrequencyGrid
    member_of_sigma: np.ndarray
    generator: Callable | None = field(default=None, repr=False, compare=False)
    halfwidth: float = np.inf

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.generator is None:
            return np.ones(x.shape[:-1], dtype=bool)
        return periodized_abs(self.generator, x, self.halfwidth) > SIGMA_THRESHOLD


def periodized_abs(gen: Callable, x: np.ndarray, halfwidth: float) -> np.ndarray:
    """``sum_k |gen(x + 2 pi k)|`` over the shifts that can reach the support."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    reach = halfwidth + np.max(np.abs(x))
    kmax = int(np.ceil(reach / (2 * np.pi)))
    total = np.zeros(x.shape[:-1])
    for k in np.ndindex(*([2 * kmax + 1] * d)):
        shift = 2 * np.pi * (np.asarray(k) - kmax)
        total += np.abs(np.asarray(gen(x + shift)))
    return total


def sigma_mask(gen, grid: FrequencyGrid) -> SupportMask:
    """Support set of the periodization of ``gen`` sampled on ``grid``.

    ``gen=None`` stands for a generator without compact support, for which
    the set is the whole grid.
    """
    if gen is None:
        return SupportMask(grid, np.ones(grid.count, dtype=bool))
    hw = float(getattr(gen, "support_halfwidth", np.inf))
    if not np.isfinite(hw):
        raise InputError("sigma needs a generator with a finite support_halfwidth")
    member = periodized_abs(gen, grid.points(), hw) > SIGMA_THRESHOLD
    return SupportMask(grid, member, gen, hw)


def oep_residuals(bank: FilterBank, theta_next: Mask | None, grid: FrequencyGrid,
                  sigma: tuple | None = None, bank_tilde: FilterBank | None = None,
                  tol: float = 1e-12) -> list:
    """Residuals of the two OEP identities.

    The first,
    ``Theta_j(M^T xi) conj(a) a~ + sum_l conj(b_l) b~_l - Theta_{j+1}``,
    is evaluated on ``sigma_j ∩ sigma~_j``.  The alias identities for
    ``omega != 0`` (same expression with tilded masks at
    ``xi + 2 pi omega`` and right side 0) are evaluated on
    ``sigma_j ∩ (sigma~_j - 2 pi omega)``.  Without ``bank_tilde`` the bank
    is self-dual.

    Raises
    ------
    GridTooCoarse
        If an axis has fewer than 64 points.
    """
    if min(grid.count) < MIN_OEP_POINTS:
        raise GridTooCoarse(f"OEP checks need >= {MIN_OEP_POINTS} points per axis, got {grid.count}")
    bt = bank_tilde or bank
    if theta_next is None:
        theta_next = Mask.constant(bank.dilation, 1.0)
    if sigma is None:
        s1 = sigma_mask(bank.parent, grid)
        sigma = (s1, s1 if bank_tilde is None else sigma_mask(bt.parent, grid))
    s, st = sigma
    if len(bank.highpass) != len(bt.highpass):
        raise InputError("primal and dual banks have different highpass counts")
    x = grid.points()
    mt = bank.dilation.entries.T
    theta_m = bank.theta(apply(mt, x))
    a = bank.lowpass(x)
    bs = [b(x) for b in bank.highpass]
    cos = coset_representatives(bank.dilation)
    reports = []
    for n, om in enumerate(cos.omega):
        xs = x + 2 * np.pi * om
        val = theta_m * a.conj() * bt.lowpass(xs)
        for b, btl in zip(bs, bt.highpass):
            val = val + b.conj() * btl(xs)
        if n == 0:
            res = val - theta_next(x)
            where = s.member_of_sigma & st.member_of_sigma
            cid = "oep:1"
        else:
            res = val
            where = s.member_of_sigma & st.contains(xs)
            cid = f"oep:2[{','.join(f'{v:g}' for v in om)}]"
        reports.append(ConditionReport.from_residuals(cid, res, tol, where))
    return reports


@dataclass(frozen=True)
class MaskBudget:
    """Constants ``C_n`` and exponent ``eps`` with
    ``|a_{j+n}(N_{j+n} N_j^{-1} xi) - 1| <= C_n |xi|^eps``.

    Either geometric (``C_n = first * ratio^(n-1)``) or a finite list (all
    later masks are taken to be identically 1).
    """

    eps: float
    first: float = 0.0
    ratio: float = 0.0
    values: tuple | None = None

    @classmethod
    def geometric(cls, first: float, ratio: float, eps: float = 1.0) -> "MaskBudget":
        if first < 0 or ratio < 0:
            raise InputError("budget constants must be nonnegative")
        if first > 0 and ratio >= 1:
            raise DivergentMaskBudget(f"ratio {ratio} >= 1 makes sum C_n diverge")
        return cls(float(eps), float(first), float(ratio))

    @classmethod
    def finite(cls, values: Sequence[float], eps: float = 1.0) -> "MaskBudget":
        vals = tuple(float(v) for v in values)
        if any(not np.isfinite(v) or v < 0 for v in vals):
            raise DivergentMaskBudget("budget constants must be finite and nonnegative")
        return cls(float(eps), values=vals)

    @property
    def total(self) -> float:
        if self.values is not None:
            return math.fsum(self.values)
        return self.first / (1.0 - self.ratio) if self.first else 0.0

    def tail(self, T: int) -> float:
        """``sum_{m > T} C_m``."""
        if self.values is not None:
            return math.fsum(self.values[T:])
        return self.first * self.ratio**T / (1.0 - self.ratio) if self.first else 0.0

    def certificate(self, T: int, radius: float) -> float:
        """Bound on ``|prod_{n <= T} - prod_{n < inf}|`` for ``|xi| <= radius``.

        With ``C = sum C_n`` and ``r = radius^eps`` the partial products
        are bounded by ``exp(C r)``, and the remaining factors change them
        by at most ``exp(C r) (exp(tail r) - 1) <= exp(2 C r) r tail``.
        """
        r = radius**self.eps
        return math.exp(2.0 * self.total * r) * r * self.tail(T)

    def truncation(self, tol: float, radius: float, ceiling: int = 10_000) -> int:
        """Smallest ``T`` whose certificate is at most ``tol``."""
        if self.values is not None:
            for T in range(len(self.values) + 1):
                if self.certificate(T, radius) <= tol:
                    return T
            return len(self.values)
        if self.first == 0.0:
            return 0
        r = radius**self.eps
        # certificate(T) = K * ratio^T with K below
        k = math.exp(2.0 * self.total * r) * r * self.first / (1.0 - self.ratio)
        T = max(0, math.ceil(math.log(k / tol) / -math.log(self.ratio)))
        while T > 0 and self.certificate(T - 1, radius) <= tol:
            T -= 1
        while self.certificate(T, radius) > tol:
            T += 1
            if T > ceiling:
                raise DivergentMaskBudget("truncation level exceeds ceiling")
        return T


@dataclass(frozen=True)
class ProductResult:
    """Truncated infinite product with its error certificate."""

    values: np.ndarray
    truncation: int
    certificate: float
    radius: float
    refinement_residual: float
    refined_change: float

    @property
    def sound(self) -> bool:
        return self.refined_change <= self.certificate


def _as_mask_seq(masks):
    if callable(masks) and not isinstance(masks, Mask):
        return masks
    seq = list(masks)

    def get(n):
        if n - 1 < len(seq):
            return seq[n - 1]
        return None

    return get


def stationary_steps(dilation) -> Callable:
    """``n -> N^n``."""
    dil = _dilation(dilation)
    return dil.power_N


def library_budget(phi: GeneratorEvaluator) -> MaskBudget:
    """Budget for the stationary lowpass mask derived from ``phi``.

    Uses ``|1 - phi(z)| <= ||z|| / c`` (adapted norm), the contraction
    ``||N z|| <= ||z|| / lam`` and ``||z|| <= sqrt(q_max) |z|_2``.
    """
    lam = phi.norm.lower_factor
    qmax = float(np.max(np.linalg.eigvalsh(phi.norm.gram)))
    return MaskBudget.geometric(np.sqrt(qmax) / phi.c, 1.0 / lam, 1.0)


def _product(masks, steps, x, T):
    out = np.ones(x.shape[:-1], dtype=complex)
    for n in range(1, T + 1):
        mask = masks(n)
        if mask is None:
            break
        out = out * mask(apply(steps(n), x))
    return out


def nonstationary_product(masks, steps, grid, tol: float, budget: MaskBudget) -> ProductResult:
    """Truncated product ``prod_{n=1}^T a_{j+n}(N_{j+n} N_j^{-1} xi)``.

    Parameters
    ----------
    masks : sequence of Mask or callable
        ``a_{j+1}, a_{j+2}, ...`` (a callable receives ``n >= 1``).
    steps : callable or DilationMatrix
        ``n -> N_{j+n} N_j^{-1}``; a dilation means ``N^n``.
    grid : FrequencyGrid or array of points
    tol : float
        Target for the certified truncation error.
    budget : MaskBudget

    Returns
    -------
    ProductResult
        Samples, ``T``, the certificate, the refinement residual
        ``|prod_j - a_{j+1}(P_1 xi) prod_{j+1}(P_1 xi)|`` and the observed
        change when ``10`` more factors are used.
    """
    masks = _as_mask_seq(masks)
    if not callable(steps):
        steps = stationary_steps(steps)
    x = grid.points() if isinstance(grid, FrequencyGrid) else np.asarray(grid, dtype=float)
    radius = float(np.max(np.linalg.norm(x, axis=-1)))
    T = budget.truncation(tol, radius)
    cert = budget.certificate(T, radius)
    vals = _product(masks, steps, x, T)
    refined = _product(masks, steps, x, T + 10)
    change = float(np.max(np.abs(refined - vals)))
    if T >= 1 and masks(1) is not None:
        p1 = steps(1)
        p1_inv = np.linalg.inv(p1)

        def shifted_masks(n):
            return masks(n + 1)

        def shifted_steps(n):
            return steps(n + 1) @ p1_inv

        y = apply(p1, x)
        rhs = masks(1)(y) * _product(shifted_masks, shifted_steps, y, T - 1)
        ref = float(np.max(np.abs(vals - rhs)))
    else:
        ref = 0.0
    return ProductResult(vals, T, cert, radius, ref, change)


def theta_limit_residual(theta_seq, dilation, grid: FrequencyGrid, j_max: int) -> list:
    """``[max |Theta_{j+1}(N^j xi) - 1| for j = 0..j_max]``.

    ``theta_seq`` is a callable ``j -> Mask`` or a sequence indexed by ``j``.
    """
    dil = _dilation(dilation)
    get = theta_seq if callable(theta_seq) else (lambda j: theta_seq[j])
    x = grid.points()
    out = []
    for j in range(j_max + 1):
        vals = get(j + 1)(apply(dil.power_N(j), x))
        out.append(float(np.max(np.abs(vals - 1.0))))
    return out
