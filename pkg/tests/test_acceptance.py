"""One test per acceptance criterion, each at its stated tolerance."""

import time

import numpy as np

from framelet.directional import build_directional_family_2d, directional_count, radial_pair
from framelet.filterbank import (
    Mask,
    MaskBudget,
    derive_masks,
    haar_bank,
    library_budget,
    nonstationary_product,
    oep_residuals,
    polyphase_identity_residual,
    refinement_residual,
)
from framelet.generators import calderon_residual, construct_phi, construct_psi
from framelet.grid import FrequencyGrid
from framelet.lattice import analyze_dilation, build_adapted_norm
from framelet.transform import CoefficientPyramid, analyze, make_plan, pr_residual, synthesize
from framelet.verify import (
    bracket_product_oracle,
    directional_system,
    dual_frame_condition_residuals,
    mra_consistency_residual,
    oracle_suite,
    parseval_energy_test,
    predicted_termination,
    stationary_system,
)

from conftest import MATRICES, record

STATIONARY = ["2", "2I2", "quincunx", "jordan"]


def grid512(dim):
    return FrequencyGrid.cube(512, dim)


def test_criterion_1_calderon():
    worst, slowest = 0.0, 0.0
    for name in STATIONARY:
        t0 = time.perf_counter()
        phi = construct_phi(MATRICES[name], 0.8)
        psi = construct_psi(phi)
        rep = calderon_residual(phi, psi, grid512(phi.dim))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, rep.max_residual)
    ok = worst < 1e-12 and slowest < 10.0
    record(1, ok, f"Calderon max residual {worst:.2e} (< 1e-12), slowest matrix {slowest:.2f} s (< 10 s)")
    assert ok


def test_criterion_2_tightness():
    g = grid512(2)
    phi = construct_phi(MATRICES["2I2"], 0.8)
    psi = construct_psi(phi)
    sysm = stationary_system(phi, psi)
    stat = max(r.max_residual for r in dual_frame_condition_residuals(sysm, g, range(5)))
    dirc = max(r.max_residual
               for r in dual_frame_condition_residuals(directional_system(4, 0.5), g, range(5)))
    mutant = sysm.with_wavelets(lambda j: (psi.scaled(0.9),))
    rep = [r for r in dual_frame_condition_residuals(mutant, g, [0])
           if r.condition_id.startswith("nep:special")][0]
    ratio = rep.max_residual / np.max(psi(g.points()) ** 2)
    ok = stat < 1e-12 and dirc < 1e-12 and abs(ratio - 0.19) <= 0.019 and not rep.passed
    record(2, ok, f"stationary {stat:.2e}, directional {dirc:.2e} (< 1e-12); "
                  f"0.9*psi mutant ratio {ratio:.4f} (0.19 +- 10%)")
    assert ok


def test_criterion_3_oracle():
    phi = construct_phi(MATRICES["2I2"], 0.8)
    psi = construct_psi(phi)
    mats = [np.eye(2), 2.0 * np.eye(2), np.array([[1.0, 1.0], [1.0, -1.0]])]
    worst, count = 0.0, 0
    for U in mats:
        for _, f, g in oracle_suite(2):
            for gen in (phi, psi):
                worst = max(worst, bracket_product_oracle(f, g, gen, gen, U).diff)
                count += 1
    ok = worst < 1e-8
    record(3, ok, f"oracle max |lhs - rhs| {worst:.2e} over {count} cases (< 1e-8)")
    assert ok


def test_criterion_4_parseval_energy():
    phi = construct_phi(MATRICES["2I2"], 0.8)
    sysm = stationary_system(phi)
    _, f, _ = oracle_suite(2)[0]
    t0 = time.perf_counter()
    res = parseval_energy_test(f, sysm, 0, quad_points=512)
    elapsed = time.perf_counter() - t0
    predicted = predicted_termination(f, phi, sysm, 0)
    ok = abs(res.energy_ratio - 1) <= 1e-8 and res.J_prime == predicted and elapsed < 30
    record(4, ok, f"energy ratio 1{res.energy_ratio - 1:+.2e} (1 +- 1e-8), J'={res.J_prime} "
                  f"predicted {predicted}, {elapsed:.2f} s (< 30 s)")
    assert ok


def test_criterion_5_filter_bank():
    refine, oep = 0.0, 0.0
    for name in STATIONARY:
        phi = construct_phi(MATRICES[name], 0.8)
        psi = construct_psi(phi)
        g = grid512(phi.dim)
        bank = derive_masks(phi, psi)
        refine = max(refine, refinement_residual(bank.lowpass, phi, phi, g).max_residual,
                     refinement_residual(bank.highpass[0], phi, psi, g).max_residual)
        oep = max(oep, max(r.max_residual for r in oep_residuals(bank, None, g)))
    haar = polyphase_identity_residual(haar_bank(), FrequencyGrid.cube(4096, 1)).max_residual
    ok = refine < 1e-13 and oep < 1e-12 and haar < 1e-14
    record(5, ok, f"refinement {refine:.2e} (< 1e-13), OEP {oep:.2e} (< 1e-12), "
                  f"Haar polyphase {haar:.2e} (< 1e-14)")
    assert ok


def test_criterion_6_product():
    g = FrequencyGrid.cube(128, 2)
    m = analyze_dilation(MATRICES["2I2"])
    # genuinely level-dependent masks with |1 - a_n(xi)| <= 0.37 * 2^-n |xi|
    def mask(n):
        return Mask(m, lambda x, n=n: 1 - 2.0**-n * (1 - np.cos(x[..., 0])) / 2, label=f"a{n}")

    budget = MaskBudget.geometric(0.2, 0.5)
    loose = nonstationary_product(mask, m, g, 1e-2, budget)
    ns = nonstationary_product(mask, m, g, 1e-10, budget)
    phi = construct_phi(MATRICES["2I2"], 0.8)
    bank = derive_masks(phi, construct_psi(phi))
    st = nonstationary_product(lambda n: bank.lowpass, m, g, 1e-10, library_budget(phi))
    err = float(np.max(np.abs(st.values - phi(g.points()))))
    ok = loose.sound and ns.sound and st.sound and err <= 1e-10
    record(6, ok, f"10 extra factors change {loose.refined_change:.2e} <= {loose.certificate:.2e} "
                  f"(T={loose.truncation}) and {ns.refined_change:.2e} <= {ns.certificate:.2e} "
                  f"(T={ns.truncation}); stationary product vs phi {err:.2e} (<= 1e-10)")
    assert ok


def test_criterion_7_directional():
    g = grid512(2)
    radial = radial_pair(0.8)
    worst = 0.0
    x = g.points()
    for j in range(5):
        fam = build_directional_family_2d(4, 0.5, j, None, radial)
        level = fam.phi(x) ** 2 + sum(mem(x) ** 2 for mem in fam) - fam.phi(x / 2) ** 2
        worst = max(worst, fam.split_residual(g), float(np.max(np.abs(level))))
    mismatches = 0
    for m in range(1, 9):
        for rho in (0.0, 1 / 3, 0.5):
            for j in range(7):
                got = build_directional_family_2d(m, rho, j, None, radial).count
                expected = m * 2 ** int(np.floor(rho * j + 1e-12))
                mismatches += got != expected or directional_count(m, rho, j) != expected
    ok = worst < 1e-12 and mismatches == 0
    record(7, ok, f"tiling residual {worst:.2e} per level (< 1e-12), count mismatches {mismatches}/168")
    assert ok


def test_criterion_8_transform():
    rng = np.random.default_rng(0x5EED)
    pr, adj = 0.0, 0.0
    for family in ("isotropic", "directional"):
        p = make_plan(256, 4, family)
        x = rng.standard_normal(p.shape)
        pr = max(pr, pr_residual(x, p))
        bands = tuple(rng.standard_normal(p.shape) + 1j * rng.standard_normal(p.shape)
                      for _ in range(p.band_count))
        other = CoefficientPyramid(p, bands)
        lhs = analyze(x, p).inner(other)
        rhs = np.vdot(synthesize(other), x)
        adj = max(adj, abs(lhs - rhs) / (np.linalg.norm(x) * np.sqrt(other.energy())))
    ok = pr < 1e-10 and adj < 1e-11
    record(8, ok, f"round-trip relative error {pr:.2e} (< 1e-10), adjoint {adj:.2e} (< 1e-11)")
    assert ok


def test_criterion_9_adapted_norm():
    rng = np.random.default_rng(3)
    x = rng.normal(size=(10_000, 2))
    violations = 0
    for text in ("2,0;0,2", "1,1;1,-1", "2,1;0,2"):
        m = analyze_dilation(text)
        norm = build_adapted_norm(m)
        nx, nmx = norm(x), norm(x @ m.entries.T)
        violations += int(np.sum(nmx < norm.lower_factor * nx) + np.sum(nmx > norm.upper_factor * nx))
    m1 = analyze_dilation(2.0)
    n1 = build_adapted_norm(m1)
    t = rng.normal(size=(10_000, 1))
    violations += int(np.sum(n1(2 * t) < n1.lower_factor * n1(t)) + np.sum(n1(2 * t) > n1.upper_factor * n1(t)))
    iso = analyze_dilation("2,0;0,2")
    nrm = build_adapted_norm(iso)
    exact = float(np.max(np.abs(nrm(x @ iso.entries.T) - 2 * nrm(x)) / nrm(x)))
    ok = violations == 0 and exact <= 1e-14
    record(9, ok, f"sandwich violations {violations} on 10^4 points x 4 matrices, "
                  f"isotropic relative error {exact:.2e} (<= 1e-14)")
    assert ok


def test_criterion_10_mra():
    phi = construct_phi(MATRICES["2I2"], 0.8)
    sysm = stationary_system(phi)
    g = FrequencyGrid.cube(512, 2)
    worst = 0.0
    for j in range(4):
        rep = mra_consistency_residual(sysm.phi_at(j), sysm.wavelets(j), sysm.phi_at(j + 1),
                                       (sysm.level_matrix(j), sysm.level_matrix(j + 1)), g)
        worst = max(worst, rep.max_residual)
    ok = worst < 1e-12
    record(10, ok, f"quasi-MRA residual {worst:.2e} over levels 0..3 (< 1e-12)")
    assert ok
