"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v -s`` (or as a
script); the lines are also repeated in the pytest terminal summary.
"""
import math

import numpy as np
import pytest
from scipy.stats import linregress

from spectransfer import cover as cv
from spectransfer import embedding as emb
from spectransfer import mesh as msh
from spectransfer import metric as mt
from spectransfer.graphs import (complete_graph, cycle_graph, eigenvalues,
                                 cartesian_product, normalized_laplacian, path_graph,
                                 standard_laplacian, star_graph)

from conftest import brute_force_conductance, record

PI2 = math.pi ** 2


# 1 ---------------------------------------------------------------------------------

def test_criterion_01_gram_identity():
    rng = np.random.default_rng(2024)
    worst, count = 0.0, 0
    for i in range(200):
        n = int(rng.integers(3, 60))
        length = float(rng.uniform(0.5, 10.0))
        c = (cv.random_circle_cover(rng, n, length) if i % 2 == 0
             else cv.random_interval_cover(rng, n, length))
        worst = max(worst, cv.gram_identity_defect(c))
        count += 1
    ok = count == 200 and worst <= 1e-9
    record(1, ok, f"gram identity on {count} random exact covers, max defect {worst:.2e} (<= 1e-9)")
    assert ok


# 2 ---------------------------------------------------------------------------------

def test_criterion_02_transfer_inequality():
    length = 1.0
    violations, checked, skipped, min_slack = 0, 0, 0, math.inf
    for n in (4, 8, 16, 32):
        c = cv.equal_arc_circle_cover(n, length)
        eta = cv.interval_neumann_value(2.0 * length / n)
        lam = [cv.circle_eigenvalue(k, length) for k in range(11)]
        rep = cv.check_transfer(c, lam, cv.NeumannProfile.uniform(eta, n), 10)
        violations += rep.violations
        checked += len(rep.k)
        skipped += len(rep.skipped)
        min_slack = min(min_slack, *rep.slack)
    ok = violations == 0 and checked > 0
    record(2, ok, f"transfer bound: {checked} (n, k) pairs, {violations} violations, "
                  f"min slack {min_slack:.3f}, {skipped} k >= n skipped")
    assert ok


# 3 ---------------------------------------------------------------------------------

def test_criterion_03_star_spectra():
    worst_eq = 0.0
    for d in range(2, 11):
        for ell in (1.0, 0.37, 2.5):
            lam1 = mt.star_secular_solve(mt.MetricStar((ell,) * d), 1)[1]
            worst_eq = max(worst_eq, abs(lam1 - PI2 / (4 * ell * ell)))
    rng = np.random.default_rng(35)
    below = 0
    for _ in range(500):
        s = mt.MetricStar(tuple(rng.uniform(0.5, 2.0, int(rng.integers(1, 11)))))
        if mt.star_secular_solve(s, 1)[1] < mt.star_lower_bound(s) * (1 - 1e-12):
            below += 1
    outside, worst_ratio, worst_zero = 0, 0.0, 0.0
    for _ in range(50):
        s = mt.MetricStar(tuple(rng.uniform(0.5, 2.0, int(rng.integers(1, 9)))))
        sec = mt.star_secular_solve(s, 5)
        est = mt.continuum_spectrum(s.model(), 5, 3)
        worst_zero = max(worst_zero, abs(est.values[0]))
        for k in range(1, 6):
            gap, ind = abs(sec[k] - est.values[k]), est.error[k]
            worst_ratio = max(worst_ratio, gap / ind)
            outside += gap > ind
    ok = worst_eq <= 1e-8 and below == 0 and outside == 0 and worst_zero <= 1e-9
    record(3, ok, f"stars: equilateral max err {worst_eq:.1e}; 500 random stars, {below} "
                  f"below bound; secular vs FEM worst gap/indicator {worst_ratio:.3f}, "
                  f"{outside} outside")
    assert ok


# 4 ---------------------------------------------------------------------------------

def test_criterion_04_continuum_convergence():
    cases = [("circle", mt.cycle_model(3, 1.0 / 3.0), [0, 4 * PI2, 4 * PI2]),
             ("interval", mt.MetricGraphModel(2, ((0, 1),), (1.0,)), [0, PI2, 4 * PI2])]
    notes, ok = [], True
    for name, m, exact in cases:
        lvl = mt.level_for_resolution(m, m.l_min / 96)
        est = mt.continuum_spectrum(m, 2, lvl)
        rel = max(abs(est.values[k] - exact[k]) / exact[k] for k in (1, 2))
        errs = [abs(mt.continuum_spectrum(m, 1, l).values[1] - exact[1]) for l in range(1, 6)]
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        good = rel <= 5e-3 and all(abs(p - 2.0) <= 0.3 for p in orders[-2:])
        ok &= good
        notes.append(f"{name} rel err {rel:.1e} order {orders[-1]:.3f}")
    record(4, ok, "FEM convergence: " + "; ".join(notes))
    assert ok


# 5 ---------------------------------------------------------------------------------

def test_criterion_05_lower_bound(suite):
    violations, uncertified, rows, min_slack = 0, 0, 0, math.inf
    for _, m in suite:
        rep = mt.lower_bound_check(m, 10, level=3)
        violations += rep.meta["violations"]
        uncertified += rep.meta["uncertified"]
        rows += len(rep.rows)
        min_slack = min(min_slack, *rep.column("slack"))
    ok = violations == 0
    record(5, ok, f"continuum lower bound on {len(suite)} models ({rows} rows): "
                  f"{violations} violations, {uncertified} uncertified, min slack {min_slack:.3f}")
    assert ok


# 6 ---------------------------------------------------------------------------------

def test_criterion_06_subdivision_stability(suite):
    worst, where = 0.0, ""
    for name, m in suite:
        for k in (1, 2, 3):
            spread = mt.subdivision_stability(m, k, range(1, 33)).meta["spread"]
            if spread > worst:
                worst, where = spread, f"{name}, k={k}"
    ok = worst <= 10
    record(6, ok, f"subdivision spread over s=1..32: worst {worst:.3f} ({where}) (<= 10)")
    assert ok


# 7 ---------------------------------------------------------------------------------

def test_criterion_07_dilation(suite):
    models = suite[:27]   # cycles, stars, theta and the first 10 random models
    worst_matrix, disagreements, rows = 0.0, 0, 0
    for _, m in models:
        for beta in (0.5, 2.0, 3.0):
            rep = mt.dilation_check(m, beta, 10, level=3)
            worst_matrix = max(worst_matrix, rep.meta["nr_matrix_defect"])
            disagreements += sum(not a for a in rep.column("agrees"))
            rows += len(rep.rows)
    ok = worst_matrix <= 1e-14 and disagreements == 0
    record(7, ok, f"dilation: matrix defect {worst_matrix:.1e} (<= 1e-14); {rows} FEM rows, "
                  f"{disagreements} outside combined indicators")
    assert ok


# 8 ---------------------------------------------------------------------------------

def _coned_checks(r):
    e = emb.cone_construction(r)
    checks = e.check()
    c = emb.star_cover(e)
    defect = float(np.abs(cv.cover_laplacian(c) - normalized_laplacian(r.graph())).max())
    return all(checks.values()) and emb.euler_genus(e.coned) == emb.euler_genus(r), defect


def test_criterion_08_cone_and_star_cover():
    maps = [emb.family_generators(name, size)
            for name in sorted(emb.FAMILIES) for size in (3, 4, 6, 9)]
    rng = np.random.default_rng(88)
    maps += [emb.random_rotation_system(rng, int(rng.integers(2, 16)), int(rng.integers(0, 12)))
             for _ in range(100)]
    failed, worst = 0, 0.0
    for r in maps:
        good, defect = _coned_checks(r)
        failed += not good
        worst = max(worst, defect)
    ok = failed == 0 and worst <= 1e-12
    record(8, ok, f"cone construction on {len(maps)} maps: {failed} invariant failures, "
                  f"star-cover defect {worst:.1e} (<= 1e-12)")
    assert ok


# 9 ---------------------------------------------------------------------------------

def test_criterion_09_genus_ratio():
    families = {
        "planar_grid": [10, 20, 30, 40, 50],
        "toroidal_grid": [10, 20, 30, 40, 50],
        "cycle": [100, 500, 1000, 1500, 2000, 2500],
    }
    ok, notes, sup = True, [], 0.0
    for name, sizes in families.items():
        ns, sups = [], []
        for size in sizes:
            r = emb.family_generators(name, size)
            rep = emb.genus_bound_evaluate(r, 20)
            ns.append(rep.n)
            sups.append(rep.sup_ratio)
        fit = linregress(ns, sups)
        good = fit.slope <= 2 * fit.stderr
        ok &= good
        sup = max(sup, *sups)
        notes.append(f"{name} slope {fit.slope:.2e}+-{fit.stderr:.1e}")
    record(9, ok, f"genus ratio: empirical C = {sup:.4f}; " + "; ".join(notes))
    assert ok


# 10 --------------------------------------------------------------------------------

def test_criterion_10_product_identity():
    corpus = ([path_graph(n) for n in (1, 2, 3, 4, 5)] + [cycle_graph(n) for n in (3, 4, 5, 6)]
              + [star_graph(d) for d in (2, 3, 4)] + [complete_graph(n) for n in (3, 4)])
    worst, pairs = 0.0, 0
    for g1 in corpus:
        for g2 in corpus:
            a = eigenvalues(standard_laplacian(g1)).values
            b = eigenvalues(standard_laplacian(g2)).values
            want = np.sort(np.add.outer(a, b).ravel())
            got = eigenvalues(standard_laplacian(cartesian_product(g1, g2))).values
            worst = max(worst, float(np.abs(got - want).max()))
            pairs += 1
    ok = worst <= 1e-8
    record(10, ok, f"product spectra on {pairs} factor pairs: max error {worst:.1e} (<= 1e-8)")
    assert ok


# 11 --------------------------------------------------------------------------------

def _small_meshes():
    out = []
    for nx in range(1, 6):
        for ny in range(1, 6):
            if 2 * nx * ny <= 10:
                out.append(msh.grid_mesh(nx, ny))
                out.append(msh.grid_mesh(nx, ny, width=3.0, row_heights=[1, 2, 1, 2, 1][:ny]))
    out.append(msh.cube_mesh(1, 1, 1))
    return out


def test_criterion_11_mesh_partitioning():
    sizes, counts = [], []
    for k in (8, 16, 32):
        m = msh.grid_mesh(k, k)
        p = msh.spectral_cut(msh.barycentric_cover(m)[1])
        sizes.append(m.n_simplices)
        counts.append(len(p.cut_edges))
    slope = linregress(np.log(sizes), np.log(counts)).slope

    small = _small_meshes()
    exact = within = 0
    for m in small:
        dual = msh.barycentric_cover(m)[1]
        best = brute_force_conductance(dual)
        phi = msh.spectral_cut(dual).conductance
        exact += math.isclose(phi, best, rel_tol=1e-9)
        within += best * (1 - 1e-12) <= phi <= 2 * math.sqrt(best)

    iso = msh.spectral_cut(msh.barycentric_cover(msh.grid_mesh(16, 16))[1]).conductance
    stretched = {
        "cells 16:1": msh.grid_mesh(16, 16, width=16.0),
        "cells 1:16": msh.grid_mesh(16, 16, height=16.0),
        "domain 16:1": msh.grid_mesh(64, 4, width=16.0),
        "domain 4:1": msh.grid_mesh(32, 8, width=4.0),
        "rows 1:2, cells up to 12:1": msh.grid_mesh(16, 16, width=16.0, row_heights=[1, 2] * 8),
        "cols 1:2, domain 16:1": msh.grid_mesh(64, 4, width=16.0, col_widths=[1, 2] * 32),
    }
    worst_factor, kappa_max = 0.0, 0.0
    for m in stretched.values():
        kappa_max = max(kappa_max, msh.kappa_epsilon(m)[0])
        phi = msh.spectral_cut(msh.barycentric_cover(m)[1]).conductance
        worst_factor = max(worst_factor, phi / iso)

    ok = (abs(slope - 0.5) <= 0.1 and within == len(small)
          and kappa_max <= 2 + 1e-12 and worst_factor <= 4)
    record(11, ok, f"mesh cut count {counts} for n={sizes}, log-log slope {slope:.3f}; "
                   f"brute force: {exact}/{len(small)} exact, {within}/{len(small)} within "
                   f"Cheeger ceiling; anisotropy factor {worst_factor:.3f} (<= 4) at kappa {kappa_max:g}")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
