import numpy as np
import pytest

from framelet.errors import InputError, PlanOverflow, PlanTooSmall, SizeMismatch
from framelet.transform import (
    CoefficientPyramid,
    analyze,
    expected_band_count,
    make_plan,
    pr_residual,
    synthesize,
)

PLANS = {}


def plan(n, family, levels=3, dim=2):
    key = (n, family, levels, dim)
    if key not in PLANS:
        PLANS[key] = make_plan(n, levels, family, dim=dim)
    return PLANS[key]


def signal(rng, shape, complex_=False):
    x = rng.standard_normal(shape)
    return x + 1j * rng.standard_normal(shape) if complex_ else x


@pytest.mark.parametrize("n", [64, 256])
@pytest.mark.parametrize("family", ["isotropic", "directional"])
def test_tight_and_pr(n, family, rng):
    p = plan(n, family)
    assert p.tightness_residual < 1e-12
    assert p.telescoping_residual < 1e-12
    assert p.band_count == expected_band_count(p)
    for complex_ in (False, True):
        assert pr_residual(signal(rng, p.shape, complex_), p) < 1e-10


@pytest.mark.parametrize("family", ["isotropic", "directional"])
def test_energy_and_adjoint(family, rng):
    p = plan(256, family)
    x = signal(rng, p.shape)
    pyr = analyze(x, p)
    assert pyr.energy() == pytest.approx(np.sum(x**2), rel=1e-12)
    bands = tuple(signal(rng, p.shape, True) for _ in range(p.band_count))
    other = CoefficientPyramid(p, bands)
    lhs = pyr.inner(other)
    rhs = np.vdot(synthesize(other), x)
    assert abs(lhs - rhs) <= 1e-11 * np.linalg.norm(x) * np.sqrt(other.energy())


def test_linearity(rng):
    p = plan(64, "directional")
    x, y = signal(rng, p.shape), signal(rng, p.shape)
    a, b = 2.5, -1.0 + 0.5j
    lhs = analyze(a * x + b * y, p)
    px, py = analyze(x, p), analyze(y, p)
    for l, u, v in zip(lhs.bands, px.bands, py.bands):
        np.testing.assert_allclose(l, a * u + b * v, atol=1e-12)


def test_impulse_spectrum_is_window():
    p = plan(64, "isotropic")
    x = np.zeros(p.shape)
    x[0, 0] = 1.0
    for band, w in zip(analyze(x, p).bands, p.windows):
        np.testing.assert_allclose(np.fft.fftn(band) , w, atol=1e-13)


def test_constant_lives_in_lowpass():
    p = plan(64, "isotropic")
    pyr = analyze(np.ones(p.shape), p)
    np.testing.assert_allclose(pyr.lowpass, 1.0, atol=1e-13)
    for b in pyr.bands[1:]:
        assert np.max(np.abs(b)) < 1e-13


def test_plan_extends_levels():
    p = make_plan(256, 1)
    assert p.J_prime == 3
    assert p.labels[0] == "lowpass"
    assert p.labels[1] == (0, 0)


def test_one_dimensional(rng):
    p = plan(128, "isotropic", dim=1)
    x = signal(rng, p.shape)
    assert pr_residual(x, p) < 1e-12


def test_deleted_band_breaks_pr(rng):
    p = plan(256, "isotropic")
    q = p.without_band(2)
    assert q.tightness_residual > 0.1
    x = signal(rng, p.shape)
    share = analyze(x, p).bands[2]
    share = np.sum(np.abs(share) ** 2) / np.sum(x**2)
    err = np.linalg.norm(synthesize(analyze(x, q)) - x) / np.linalg.norm(x)
    assert share * (1 - 1e-9) <= err <= np.sqrt(share) * (1 + 1e-9)
    with pytest.raises(InputError):
        p.without_band(99)


def test_errors(rng):
    with pytest.raises(PlanTooSmall):
        make_plan(16, 2)
    with pytest.raises(InputError):
        make_plan(96, 2)
    with pytest.raises(InputError):
        make_plan(64, 2, family="shearlet")
    with pytest.raises(InputError):
        make_plan(64, 2, family="directional", dim=1)
    with pytest.raises(PlanOverflow):
        make_plan(32, 20)
    p = plan(64, "isotropic")
    with pytest.raises(SizeMismatch):
        analyze(np.zeros((32, 32)), p)
    pyr = analyze(np.zeros(p.shape), p)
    with pytest.raises(SizeMismatch):
        synthesize(CoefficientPyramid(p, pyr.bands[:-1]))
    assert pr_residual(np.zeros(p.shape), p) == 0.0
