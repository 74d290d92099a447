import numpy as np
import pytest

from framelet.directional import (
    angular_split,
    build_directional_family_2d,
    directional_count,
    floor_rho_j,
    polar_partition,
    radial_pair,
    rotation,
    support_descriptor,
    trivial_partition,
)
from framelet.errors import (
    BadEps,
    BadRho,
    IndexOutOfRange,
    PartitionResidualTooLarge,
)
from framelet.directional import AngularPartition

from conftest import cube, pair

RADIAL = radial_pair(0.8)


def family(m, rho, j, eps=None):
    return build_directional_family_2d(m, rho, j, eps, RADIAL)


def test_counts():
    assert directional_count(1, 0.0, 5) == 1
    assert directional_count(4, 0.5, 4) == 16
    assert floor_rho_j(0.1, 30) == 3
    assert floor_rho_j(1 / 3, 3) == 1


@pytest.mark.parametrize("m", range(1, 9))
@pytest.mark.parametrize("rho", [0.0, 1 / 3, 0.5])
def test_count_table(m, rho):
    for j in range(7):
        assert family(m, rho, j).count == m * 2 ** int(np.floor(rho * j + 1e-12))


def test_trivial_partition_gives_psi():
    _, psi = pair("2I2")
    fam = angular_split(psi, trivial_partition())
    x = cube(128, 2).points()
    np.testing.assert_array_equal(fam[0](x), psi(x))


def test_four_sector_split_512():
    _, psi = pair("2I2")
    fam = angular_split(psi, polar_partition(4, 0.0, 0))
    assert fam.count == 4
    assert fam.split_residual(cube(512, 2)) < 1e-12


def test_member_at_origin_is_zero():
    fam = family(4, 0.5, 2)
    for mem in fam:
        assert mem(np.zeros(2)) == 0.0


def test_bad_partition_rejected():
    _, psi = pair("2I2")
    half = AngularPartition(0, 1, (lambda u: 0.5 * np.ones(u.shape[:-1]),), "generic-sphere")
    with pytest.raises(PartitionResidualTooLarge):
        angular_split(psi, half)


@pytest.mark.parametrize("j", range(5))
def test_family_split_and_level_identity(j):
    fam = family(4, 0.5, j)
    g = cube(512, 2)
    assert fam.split_residual(g) < 1e-12
    x = g.points()
    lhs = fam.phi(x) ** 2 + sum(mem(x) ** 2 for mem in fam)
    rhs = fam.phi(x / 2) ** 2
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_m1_rho0_is_radial():
    fam = family(1, 0.0, 3)
    x = cube(128, 2).points()
    assert fam.count == 1
    np.testing.assert_allclose(fam[0](x), fam.psi(x), atol=1e-15)


def test_rotation_property():
    rng = np.random.default_rng(0x5EED)
    x = rng.uniform(-np.pi, np.pi, size=(10_000, 2))
    for j in (0, 3):
        fam = family(4, 0.5, j)
        n = fam.count
        for ell in range(n):
            r = rotation(ell * np.pi / n)
            np.testing.assert_allclose(fam[ell](x), fam[0](x @ r.T), atol=1e-14, rtol=0)


def test_members_vanish_inside_inner_radius():
    fam = family(4, 0.5, 2)
    r1 = fam.psi.support_inner
    t = np.linspace(-np.pi, np.pi, 721)
    for rad in np.linspace(0, r1 * (1 - 1e-12), 7):
        x = rad * np.stack([np.cos(t), np.sin(t)], -1)
        for mem in fam:
            assert np.all(mem(x) == 0.0)


def test_members_are_even():
    fam = family(4, 0.5, 3)
    x = cube(128, 2).points()
    for mem in fam:
        np.testing.assert_allclose(mem(x), mem(-x), atol=1e-15)


def test_parameter_errors():
    with pytest.raises(BadRho):
        family(4, 1.0, 0)
    with pytest.raises(BadEps):
        family(4, 0.5, 0, eps=np.pi)
    with pytest.raises(IndexOutOfRange):
        family(4, 0.5, 0)[4]


def test_support_descriptor_contains_support():
    g = cube(512, 2)
    x = g.points()
    for j in (0, 2, 4):
        fam = family(4, 0.5, j)
        for ell in range(fam.count):
            desc = support_descriptor(fam, ell)
            nz = fam[ell](x) > 0
            assert np.all(desc.contains(x[nz]))


def test_support_descriptor_scaling():
    f0 = family(4, 0.0, 0)
    f5 = family(4, 0.0, 5)
    d0, d5 = support_descriptor(f0, 1), support_descriptor(f5, 1)
    assert d0.theta_half_width == d5.theta_half_width
    fa, fb = family(4, 0.5, 2), family(4, 0.5, 4)
    da, db = support_descriptor(fa, 0, 2), support_descriptor(fb, 0, 4)
    assert db.r_hi / da.r_hi == pytest.approx(4.0)
    assert fb.count / fa.count == 2
    assert da.theta_half_width / db.theta_half_width == pytest.approx(2.0)
    with pytest.raises(IndexOutOfRange):
        support_descriptor(fa, fa.count)
