import time

import numpy as np
import pytest
from scipy.stats import qmc

from framelet.errors import DegenerateLambda0, InputError, NegativeRadicand, NotExpansive
from framelet.generators import (
    apply,
    calderon_residual,
    construct_phi,
    construct_psi,
    lowpass_limit_residual,
    telescoping_residual,
)
from framelet.grid import FrequencyGrid

from conftest import MATRICES, cube, pair


def _probe(gen, n=100_000, seed=7):
    pts = qmc.Halton(d=gen.dim, scramble=True, seed=seed).random(n)
    return (2.0 * pts - 1.0) * np.pi


def test_phi_isotropic_values():
    phi, _ = pair("2I2")
    assert phi(np.zeros(2)) == 1.0
    x = _probe(phi)
    r = np.linalg.norm(x, axis=-1)
    assert np.all(phi(x[r >= 0.4 * np.pi]) == 0.0)
    assert np.all(phi(x[r <= phi.c]) == 1.0)


def test_phi_range_and_evenness(matrix_name):
    phi, psi = pair(matrix_name)
    x = _probe(phi)
    for g in (phi, psi):
        v = g(x)
        assert np.all((v >= 0) & (v <= 1))
        np.testing.assert_array_equal(v, g(-x))


def test_support_inside_cube(matrix_name):
    phi, psi = pair(matrix_name)
    x = _probe(phi)
    box = phi.lambda0 * np.pi
    for g in (phi, psi):
        nz = g(x) != 0
        assert np.max(np.abs(x[nz])) < box
        assert np.all(g.radius(x[nz]) < g.support_outer)
        assert np.max(np.abs(x[nz])) <= g.support_halfwidth


def test_support_exactness_outside_outer_radius(matrix_name):
    phi, psi = pair(matrix_name)
    x = _probe(phi)
    for g in (phi, psi):
        out = g.radius(x) >= g.support_outer
        assert np.all(g(x[out]) == 0.0)


def test_phi_implies_plateau_after_contraction(matrix_name):
    phi, _ = pair(matrix_name)
    x = _probe(phi)
    nz = phi(x) != 0
    y = apply(phi.dilation.transpose_inverse, x[nz])
    assert np.all(phi(y) == 1.0)


def test_psi_vanishes_on_plateau(matrix_name):
    phi, psi = pair(matrix_name)
    assert psi(np.zeros(phi.dim)) == 0.0
    x = _probe(phi)
    inner = phi.radius(x) <= phi.c
    assert np.all(psi(x[inner]) == 0.0)


def test_psi_of_dilated_equals_phi_off_plateau(matrix_name):
    phi, psi = pair(matrix_name)
    x = _probe(phi) * 0.5
    keep = phi.radius(x) >= phi.c
    mt = phi.dilation.entries.T
    np.testing.assert_allclose(psi(apply(mt, x[keep])), phi(x[keep]), atol=1e-15)


def test_calderon_random_points(matrix_name):
    phi, psi = pair(matrix_name)
    x = _probe(phi)
    res = phi(x) ** 2 + psi(x) ** 2 - phi(apply(phi.dilation.transpose_inverse, x)) ** 2
    assert np.max(np.abs(res)) < 1e-14


def test_calderon_grid_256():
    phi, psi = pair("2I2")
    assert calderon_residual(phi, psi, cube(256, 2)).max_residual < 1e-12


def test_calderon_mutant_ratio():
    phi, psi = pair("2I2")
    g = cube(256, 2)
    rep = calderon_residual(phi, psi.scaled(0.9), g)
    peak = np.max(psi(g.points()) ** 2)
    assert rep.max_residual / peak == pytest.approx(0.19, rel=0.10)
    assert not rep.passed


def test_telescoping_zero_to_six(matrix_name):
    phi, psi = pair(matrix_name)
    rep = telescoping_residual(phi, psi, cube(256, phi.dim) if phi.dim == 2 else cube(4096, 1), 0, 6)
    assert rep.max_residual < 1e-11


def test_telescoping_needs_increasing_levels():
    phi, psi = pair("2I2")
    with pytest.raises(InputError):
        telescoping_residual(phi, psi, cube(64, 2), 3, 3)


def test_lowpass_limit_profile():
    phi, _ = pair("2I2")
    g = cube(256, 2)
    vals = [lowpass_limit_residual(phi, g, j) for j in range(9)]
    assert vals[0] == 1.0
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    # 2^-j pi sqrt(2) <= c first holds at j = 3
    j0 = next(j for j in range(9) if 2.0**-j * np.pi * np.sqrt(2) <= phi.c)
    assert vals[j0] == 0.0 and vals[j0 - 1] > 0.0


def test_construct_errors():
    with pytest.raises(NotExpansive):
        construct_phi("1,0;0,2", 0.8)
    with pytest.raises(DegenerateLambda0):
        construct_phi("2,0;0,2", 1.2)
    phi, psi = pair("2I2")
    with pytest.raises(InputError):
        construct_psi(psi)


def test_negative_radicand_detected():
    phi, _ = pair("2I2")
    # a "phi" that grows outward breaks monotonicity under contraction
    bad = phi.__class__(**{**phi.__dict__, "func": lambda x: 1.0 - phi.func(x)})
    with pytest.raises(NegativeRadicand):
        construct_psi(bad)


@pytest.mark.parametrize("name", list(MATRICES))
def test_calderon_512_fast(name):
    phi, psi = pair(name)
    t = time.perf_counter()
    rep = calderon_residual(phi, psi, FrequencyGrid.cube(512, phi.dim))
    assert rep.max_residual < 1e-12
    assert time.perf_counter() - t < 10
