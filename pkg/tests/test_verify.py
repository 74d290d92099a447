import numpy as np
import pytest

from framelet.errors import GridTooCoarse, InputError, LengthMismatch, SupportOverflow
from framelet.generators import construct_psi
from framelet.grid import FrequencyGrid, TestFunction
from framelet.verify import (
    bessel_bound_estimate,
    bracket_I,
    bracket_product_oracle,
    coefficient_energy,
    directional_system,
    dual_frame_condition_residuals,
    mra_consistency_residual,
    oracle_suite,
    parseval_energy_test,
    partial_sum_S,
    predicted_termination,
    stationary_system,
)

from conftest import cube, pair

ORACLE_MATRICES = {
    "identity": np.eye(2),
    "2I": 2.0 * np.eye(2),
    "quincunx": np.array([[1.0, 1.0], [1.0, -1.0]]),
}


@pytest.fixture(scope="module")
def system():
    phi, psi = pair("2I2")
    return stationary_system(phi, psi)


@pytest.fixture(scope="module")
def dsystem():
    return directional_system(4, 0.5)


def test_bracket_disjoint_and_overlap():
    a = TestFunction.bump([0.0, 0.0], 0.5)
    b = TestFunction.bump([0.0, 0.0], 0.5)
    g = cube(64, 2)
    # the shifted copy never overlaps
    assert np.all(bracket_I([a], [b], [1, 0], g) == 0)
    v = bracket_I([a], [b], [0, 0], g)
    np.testing.assert_allclose(v, np.abs(a(g.points())) ** 2)
    assert np.all(bracket_I([a], [b], [0.5, 0], g) == 0)
    with pytest.raises(LengthMismatch):
        bracket_I([a], [a, b], [0, 0], g)


def test_bracket_shift_hits_translated_bump():
    a = TestFunction.bump([0.0, 0.0], 1.0)
    b = TestFunction.bump([2 * np.pi, 0.0], 1.0)
    g = cube(64, 2)
    np.testing.assert_allclose(bracket_I([a], [b], [1, 0], g), np.abs(a(g.points())) ** 2,
                               atol=1e-15)


@pytest.mark.parametrize("name", list(ORACLE_MATRICES))
@pytest.mark.parametrize("case", range(5))
def test_oracle_suite(system, name, case):
    phi, psi = system.phi[0], system.wavelets(0)[0]
    label, f, g = oracle_suite(2)[case]
    U = ORACLE_MATRICES[name]
    for gen in (phi, psi):
        res = bracket_product_oracle(f, g, gen, gen, U)
        assert res.diff < 1e-8, (label, res)


def test_oracle_disjoint_supports_vanish(system):
    psi = system.wavelets(0)[0]
    # psi vanishes on the plateau where this bump lives
    f = TestFunction.bump([0.0, 0.0], 0.3 * psi.c)
    res = bracket_product_oracle(f, f, psi, psi, np.eye(2))
    assert abs(res.lhs) < 1e-14 and abs(res.rhs) < 1e-14


def test_oracle_grid_too_coarse(system):
    _, f, g = oracle_suite(2)[0]
    psi = system.wavelets(0)[0]
    with pytest.raises(GridTooCoarse):
        bracket_product_oracle(f, g, psi, psi, np.eye(2), n=16, k_max=4)
    with pytest.raises(GridTooCoarse):
        bracket_product_oracle(f, g, psi, psi, np.eye(2), grid=cube(16, 2))


def test_coefficient_energy_fft_matches_parseval(system):
    _, f, _ = oracle_suite(2)[2]
    psi = system.wavelets(0)[0]
    U = 2.0 * np.eye(2)
    a = coefficient_energy(f, psi, U)
    b = coefficient_energy(f, psi, U, via_fft=True)
    assert a == pytest.approx(b, rel=1e-12)


def test_partial_sum_monotone_and_limit(system):
    _, f, _ = oracle_suite(2)[0]
    nf = f.norm_squared(512)
    values = []
    for jp in range(0, 4):
        integ, coef, diff = partial_sum_S(f, f, system, 0, jp)
        assert diff < 1e-8 * max(1.0, abs(integ))
        values.append(coef.real)
    assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx((2 * np.pi) ** 2 * nf, rel=1e-9)


def test_partial_sum_at_J_equals_lowpass_oracle(system):
    _, f, g = oracle_suite(2)[2]
    integ, coef, diff = partial_sum_S(f, g, system, 0, 0)
    phi = system.phi[0]
    res = bracket_product_oracle(f, g, phi, phi, np.eye(2))
    assert coef == pytest.approx(res.lhs, abs=1e-8)
    assert diff < 1e-8


def test_tight_simple_stationary(system):
    reps = dual_frame_condition_residuals(system, cube(512, 2), range(0, 4))
    assert all(r.passed and r.max_residual < 1e-12 for r in reps)
    assert any(r.condition_id.startswith("nep:special") for r in reps)


def test_tight_simple_directional(dsystem):
    reps = dual_frame_condition_residuals(dsystem, cube(512, 2), range(0, 5))
    for r in reps:
        assert r.max_residual < 1e-12, r


def test_tight_simple_mutant(system):
    psi = system.wavelets(0)[0]
    mutant = system.with_wavelets(lambda j: (psi.scaled(0.9),), "mutant")
    g = cube(512, 2)
    reps = [r for r in dual_frame_condition_residuals(mutant, g, [0])
            if r.condition_id.startswith("nep:special")]
    peak = np.max(np.abs(psi(g.points())) ** 2)
    assert reps[0].max_residual / peak == pytest.approx(0.19, rel=0.1)
    assert not reps[0].passed


def test_tight_simple_support_overflow(system):
    with pytest.raises(SupportOverflow):
        dual_frame_condition_residuals(system, FrequencyGrid.cube(64, 2, half_width=1.0), [0])


def test_stationary_and_nonstationary_modes(system):
    g = cube(256, 2)
    st = dual_frame_condition_residuals(system, g, [0], mode="stationary")
    assert all(r.max_residual < 1e-12 for r in st)
    ns = dual_frame_condition_residuals(system, g, range(0, 4), mode="nonstationary", J=0)
    final = [r for r in ns if r.condition_id in ("basic:cond:1", "basic:cond:2")]
    assert len(final) == 2
    assert all(r.max_residual < 1e-12 for r in final)


def test_bad_mode(system):
    with pytest.raises(InputError):
        dual_frame_condition_residuals(system, cube(64, 2), [0], mode="bogus")


def test_mra_consistency(system):
    phi, psi = system.phi[0], system.wavelets(0)[0]
    nj, nj1 = system.level_matrix(0), system.level_matrix(1)
    rep = mra_consistency_residual([phi], [psi], [phi], (nj, nj1), cube(256, 2))
    assert rep.max_residual < 1e-12
    broken = mra_consistency_residual([phi], [psi], [phi.scaled(0.0)], (nj, nj1), cube(256, 2))
    assert broken.max_residual > 0.5


def test_parseval_stationary(system):
    _, f, _ = oracle_suite(2)[0]
    res = parseval_energy_test(f, system, 0)
    ratio, jp = res
    assert abs(ratio - 1) < 1e-8
    assert jp == predicted_termination(f, system.phi[0], system, 0)


def test_parseval_directional(dsystem):
    _, f, _ = oracle_suite(2)[3]
    ratio, jp = parseval_energy_test(f, dsystem, 0)
    assert abs(ratio - 1) < 1e-8
    assert jp == predicted_termination(f, dsystem.phi[0], dsystem, 0)


def test_parseval_zero_function(system):
    assert tuple(parseval_energy_test(TestFunction.zero(2), system, 0)) == (1.0, 0)


def test_parseval_one_dimensional():
    phi, psi = pair("2")
    f = TestFunction.bump([0.1], 1.2, 1 - 1j)
    ratio, _ = parseval_energy_test(f, stationary_system(phi, psi), 0)
    assert abs(ratio - 1) < 1e-8


def test_bessel_bounds(system):
    d = (2 * np.pi) ** 2
    assert bessel_bound_estimate(None, 0, dim=2) == 0.0
    est = bessel_bound_estimate(system, 0, ensemble_size=10)
    assert d * (1 - 1e-8) <= est <= d * (1 + 1e-8)
    psi = system.wavelets(0)[0]
    loud = system.with_wavelets(lambda j: (psi.scaled(2.0),))
    assert bessel_bound_estimate(loud, 0, ensemble_size=10) > 1.5 * d
    with pytest.raises(InputError):
        bessel_bound_estimate(system, 0, ensemble_size=5)
