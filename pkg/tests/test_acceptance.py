"""Acceptance criteria at the tolerances they are stated with.

Run ``pytest tests/test_acceptance.py`` to get the per-criterion summary.
"""

import math
import time

import numpy as np
import pytest

from unicrit import dynamics as dy
from unicrit import exactpoly as ep
from unicrit import measures as ms
from unicrit import ntheory, reports
from unicrit import rootfind as rf
from unicrit.config import override
from unicrit.errors import DegenerateParameter
from unicrit.sphere import SphereGrid

G1024 = SphereGrid(1024, 1024)
G2048 = SphereGrid(2048, 2048)


@pytest.fixture(scope="module")
def const2():
    return reports.compute_constants(2, G1024)


# -- 1 -----------------------------------------------------------------------

@pytest.mark.acceptance(1)
def test_exact_algebra_identities(note):
    t0 = time.perf_counter()
    with override(bivariate_cap=256):
        for d in (2, 3):
            for n in range(1, 6):
                v = ntheory.nu(d, n)
                phi = ep.dynatomic_bivariate(d, n)  # exact division raises on failure
                assert phi.degree_y == v and phi.leading_y() == ep.ExactPoly([1])
                assert phi.column(0) == ep.dynatomic_at_zero(d, n)
                res = ep.multiplier_poly_power_at(d, n, 0)
                assert res == ep.poly_pow(ep.pstar_at_zero(d, n), n) * d ** (n * v)
                assert res.degree == n * (d - 1) * v // d
                assert res.leading == d ** (n * v)
                if d ** n <= 32:
                    res1 = ep.multiplier_poly_power_at(d, n, 1)
                    assert res1.degree == n * (d - 1) * v // d
                    assert res1.leading == d ** (n * v)
    # bivariate form for the small cases: top lambda-coefficient is constant in w
    for n in (1, 2, 3):
        full = ep.multiplier_poly_power(2, n)
        assert full.degree_x == n * ntheory.nu(2, n) // 2
        assert full.leading_x() == ep.ExactPoly([2 ** (n * ntheory.nu(2, n))])
    elapsed = time.perf_counter() - t0
    note(f"{elapsed:.1f}s")
    assert elapsed < 60


# -- 2 -----------------------------------------------------------------------

@pytest.mark.acceptance(2)
def test_zeros_simple_exact():
    for d in (2, 3):
        for n in range(1, 8):
            assert ep.fn_is_squarefree(d, n)


@pytest.mark.acceptance(2)
def test_zeros_separated_numeric(note):
    t0 = time.perf_counter()
    seps = [rf.superattracting_parameters(2, n).min_separation() for n in range(2, 12)]
    note(f"min separation at n=11: {seps[-1]:.2e}")
    assert min(seps) > 1e-8
    assert time.perf_counter() - t0 < 300


# -- 3 -----------------------------------------------------------------------

@pytest.mark.acceptance(3)
def test_root_oracle_equivalence(note):
    worst = 0.0
    for d in (2, 3):
        for n in range(1, 7):
            a = rf.superattracting_parameters(d, n)
            b = rf.roots_of_exactpoly(ep.critical_orbit_poly(d, n))
            assert b.count == a.count and np.all(b.multiplicity == 1)
            worst = max(worst, rf.match_roots(a.roots, b.roots)[1])
    note(f"max matching distance {worst:.1e}")
    assert worst < 1e-9


# -- 4 -----------------------------------------------------------------------

@pytest.mark.acceptance(4)
def test_l1_estimate(note):
    const = reports.compute_constants(2, G2048)
    g = ms.h_field(2, G2048).values + 0.5 * np.log1p(np.abs(G2048.z) ** 2)
    ns = np.arange(1, 9)
    vals = np.array([reports.l1_deviation(2, int(n), G2048, g) for n in ns])
    bounds = np.array([const.t_n(int(n)) + const.c0 for n in ns])
    slope = np.polyfit(ns, vals, 1)[0]
    note(f"L1 in [{vals.min():.3f}, {vals.max():.3f}], slope {slope:.4f}, "
         f"min margin {np.min(bounds - vals):.2f}")
    assert np.all(vals <= bounds)
    assert slope <= 2 * math.log(2) / (2 - 1) * 1.1


# -- 5 -----------------------------------------------------------------------

@pytest.mark.acceptance(5)
def test_theorem1(note):
    t0 = time.perf_counter()
    phis = ms.builtin_test_functions()
    assert len(phis) >= 5
    worst = math.inf
    for d in (2, 3):
        const = reports.compute_constants(d, G1024)
        with override(root_cap=3 ** 9):
            rows = reports.theorem1(d, range(1, 11), G1024, const, phis, l1=False,
                                    timing=False)
        assert len(rows) == 10 * len(phis)
        assert all(r.margin >= 0 and r.status == "OK" for r in rows)
        worst = min(worst, min(r.margin for r in rows))
        for f in phis:
            seq = [r.discrepancy / d ** r.n for r in rows if r.phi == f.name and r.n >= 4]
            assert all(b <= a + 1e-3 for a, b in zip(seq, seq[1:])), (d, f.name, seq)
    elapsed = time.perf_counter() - t0
    note(f"min margin {worst:.3f}, {elapsed:.0f}s")
    assert elapsed < 15 * 60


# -- 6 -----------------------------------------------------------------------

@pytest.mark.acceptance(6)
def test_pstar_factorization():
    d = 2
    for n in range(1, 9):
        zeros = rf.roots_of_exactpoly(ep.pstar_at_zero(d, n))
        assert np.all(zeros.multiplicity == d - 1)
        roots = rf.superattracting_parameters(d, n).roots
        lower = []
        for m in ntheory.divisors(n)[:-1]:
            for z in rf.superattracting_parameters(d, m).roots:
                if not lower or np.min(np.abs(np.array(lower) - z)) > 1e-8:
                    lower.append(z)
        lower = np.array(lower)
        if lower.size:
            dist = np.min(np.abs(roots[:, None] - lower[None, :]), axis=1)
            exact = roots[dist > 1e-8]
            assert np.sum(dist <= 1e-8) == lower.size
        else:
            exact = roots
        assert exact.size == zeros.count
        assert rf.match_roots(zeros.roots, exact)[1] < 1e-8


# -- 7 -----------------------------------------------------------------------

def _nondegenerate(rng, n, radii, margin=0.01):
    while True:
        lam = complex(*rng.uniform(-2, 2, 2))
        try:
            oc = dy.classify_periodic(2, lam, n)
        except DegenerateParameter:
            continue
        mu = np.abs(oc.point_multipliers()[oc.flags])
        if all(np.min(np.abs(mu - r)) > margin for r in radii):
            return lam, oc


@pytest.mark.acceptance(7)
def test_averaged_identity(note):
    rng = np.random.default_rng(2024)
    theta = 2 * np.pi * np.arange(2 ** 14) / 2 ** 14
    worst = 0.0
    for n in (1, 2, 3):
        for _ in range(20):
            lam, oc = _nondegenerate(rng, n, (0.5, 1.0))
            for r in (0.5, 1.0):
                quad = float(np.mean(dy.log_pstar(2, lam, n, r * np.exp(1j * theta), oc)))
                worst = max(worst, abs(quad - dy.averaged_log_pstar(2, lam, n, r, oc)))
    note(f"max error {worst:.1e}")
    assert worst < 1e-8


# -- 8 -----------------------------------------------------------------------

@pytest.mark.acceptance(8)
def test_theorem2(const2, note):
    rows = reports.theorem2(2, [2, 3, 4, 6], [0.5, 1.0], G1024, const2, timing=False)
    assert len(rows) == 4 * 3 * len(ms.builtin_test_functions())
    note(f"min margin {min(r.margin for r in rows):.3f}")
    assert all(r.margin >= 0 and r.status == "OK" for r in rows)


# -- 9 -----------------------------------------------------------------------

@pytest.mark.acceptance(9)
def test_uniform_lower_bound(const2, note):
    lam = dy.boundary_sample(2, 1000, seed=2)
    worst = math.inf
    for n in range(1, 11):
        slack = np.min(dy.log_abs_fn(2, n, lam)) + const2.t_n(n)
        worst = min(worst, slack)
        assert slack >= 0, n
    note(f"min log|F_n| + t_n = {worst:.3f}")


# -- 10 ----------------------------------------------------------------------

@pytest.mark.acceptance(10)
def test_infrastructure(note):
    cal = ms.TestFunction("cal", lambda z: 0.5 * np.log1p(np.abs(z) ** 2))
    dens = ms.ddc_density(cal, G2048)
    cal_err = float(np.max(np.abs(dens[np.abs(G2048.z) <= 1] - 1)))
    assert cal_err < 1e-4
    zero = max(abs(ms.integrate_omega(ms.ddc_density(f, G2048), G2048))
               for f in ms.builtin_test_functions())
    assert zero < 1e-6
    one = ms.TestFunction("one", lambda z: np.ones(np.shape(z)))
    assert ms.pair_muf(one, 2, G1024) == 1.0
    rng = np.random.default_rng(10)
    fe = 0.0
    for d in (2, 3):
        lam = rng.uniform(-1.5, 1.5, 1000) + 1j * rng.uniform(-1.5, 1.5, 1000)
        z = rng.uniform(-2, 2, 1000) + 1j * rng.uniform(-2, 2, 1000)
        g = dy.green_dynamical(d, lam, z)
        esc = g > 1e-6
        fe = max(fe, float(np.max(np.abs(dy.green_dynamical(d, lam, z ** d + lam)[esc] - d * g[esc]))))
        rad = 3 * np.sqrt(rng.uniform(size=1000))
        par = rad * np.exp(2j * np.pi * rng.uniform(size=1000))
        assert np.all(dy.lyapunov(d, par) >= math.log(d))
    assert fe < 1e-9
    note(f"calibration {cal_err:.1e}, zero mean {zero:.1e}, functional eq {fe:.1e}")
