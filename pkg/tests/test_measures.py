import math

import numpy as np
import pytest
from scipy.special import roots_legendre

from unicrit import dynamics as dy
from unicrit import measures as ms
from unicrit import rootfind as rf
from unicrit.errors import NonfiniteNode, NonfiniteStencil
from unicrit.sphere import SphereGrid

G1024 = SphereGrid(1024, 1024)
G256 = SphereGrid(256, 256)


def one():
    return ms.TestFunction("one", lambda z: np.ones(np.shape(z)))


# -- the grid and omega-quadrature ------------------------------------------

def test_sphere_grid_basics():
    g = SphereGrid.parse("64x32")
    assert g.shape == (64, 32) and g.size == 2048 and g.label == "64x32"
    assert SphereGrid.parse("16") == SphereGrid(16, 16)
    assert np.all(np.isfinite(g.z)) and np.all(g.z != 0)
    assert not g.z.flags.writeable
    with pytest.raises(ValueError):
        SphereGrid(0, 4)


def test_integrate_omega_examples():
    assert ms.integrate_omega(lambda z: np.ones(z.shape), G256) == 1.0
    assert abs(ms.integrate_omega(lambda z: 1 / (1 + np.abs(z) ** 2), G256) - 0.5) < 1e-12
    u = lambda z: np.abs(z) ** 2 / (1 + np.abs(z) ** 2)
    ind = lambda z: 1 / (1 + np.exp((u(z) - 0.5) / 0.01))
    assert abs(ms.integrate_omega(ind, G1024) - 0.5) < 1e-3


def test_integrate_omega_rejects_nonfinite():
    vals = np.zeros(G256.shape)
    vals[3, 5] = np.nan
    with pytest.raises(NonfiniteNode):
        ms.integrate_omega(vals, G256)


def test_quadrature_convergence_order():
    # midpoint in u and trapezoid in theta: at least first order, in practice second
    for f in ms.builtin_test_functions()[:5]:
        vals = [ms.integrate_omega(f, SphereGrid(n, n)) for n in (64, 128, 256)]
        e1, e2 = abs(vals[0] - vals[1]), abs(vals[1] - vals[2])
        assert e1 <= 5.0 / 64
        if e2 > 1e-13:
            assert math.log2(e1 / e2) >= 1.0


# -- dd^c --------------------------------------------------------------------

def test_ddc_constant_vanishes():
    assert np.max(np.abs(one().ddc_density(G256))) == 0


def test_ddc_calibration():
    cal = ms.TestFunction("cal", lambda z: 0.5 * np.log1p(np.abs(z) ** 2))
    dens = cal.ddc_density(G1024)
    inner = np.abs(G1024.z) <= 1
    assert np.max(np.abs(dens[inner] - 1)) < 1e-4


def test_ddc_zero_mean():
    # the u-midpoint error is second order: ~3e-6 at 1024^2, ~8e-7 at 2048^2
    g = SphereGrid(2048, 2048)
    for f in ms.builtin_test_functions():
        assert abs(ms.integrate_omega(ms.ddc_density(f, g), g)) < 1e-6


def test_ddc_rotation_covariance():
    # dd^c of a bump at 0 is radial
    dens = ms.bump(0, 0.5).ddc_density(G256)
    assert np.max(np.abs(dens - dens[:, :1])) < 1e-6


def test_ddc_nonfinite_stencil():
    bad = ms.TestFunction("bad", lambda z: np.where(np.abs(z - 0.5) < 0.3, np.nan, 0.0))
    with pytest.raises(NonfiniteStencil):
        ms.ddc_density(bad, G256)


def test_bump_names_and_width():
    names = [f.name for f in ms.builtin_test_functions()]
    assert len(names) == len(set(names)) >= 5
    assert all("," not in n for n in names)
    with pytest.raises(ValueError):
        ms.bump(0, 0.1)


# -- pairings ----------------------------------------------------------------

def test_pair_atomic_examples():
    f = ms.bump(-1, 0.4)
    assert ms.pair_atomic(one(), ms.AtomicMeasure([0.3, 1j], [0.25, 0.75], 1.0)) == 1.0
    delta0 = ms.AtomicMeasure.from_rootset(rf.superattracting_parameters(2, 1))
    assert ms.pair_atomic(f, delta0) == f(0)
    from unicrit.reports import per_star_measure
    per = per_star_measure(2, 2)
    assert abs(ms.pair_atomic(f, per) - f(-1)) < 1e-14
    with pytest.raises(ValueError):
        ms.AtomicMeasure([0, 1], [1, 1], 1.0)


def test_pair_muf_one_and_linearity():
    assert abs(ms.pair_muf(one(), 2, G256) - 1) < 1e-15
    f, g = ms.bump(0, 0.5), ms.TestFunction("x1", ms._x1)
    a, b = 0.37, -2.1
    comb = ms.TestFunction("comb", lambda z: a * f(z) + b * g(z))
    lhs = ms.pair_muf(comb, 2, G256)
    rhs = a * ms.pair_muf(f, 2, G256) + b * ms.pair_muf(g, 2, G256)
    # roundoff enters the stencil as eps / h^2 ~ 1e-8 relative
    assert abs(lhs - rhs) < 1e-9


def test_pair_muf_refinement():
    f = ms.bump(0, 0.5)
    a = ms.pair_muf(f, 2, SphereGrid(512, 512))
    b = ms.pair_muf(f, 2, G1024)
    assert abs(a - b) < 0.01 * abs(b)


def _green_jensen_errors(d, ns, grid):
    errs = []
    for n in ns:
        roots = rf.superattracting_parameters(d, n).roots
        ell = dy.log_abs_fn(d, n, grid.z) - d ** (n - 1) * 0.5 * np.log1p(np.abs(grid.z) ** 2)
        for f in ms.builtin_test_functions():
            lhs = float(np.sum(f(roots)))
            rhs = ms.pair_potential(f, grid, ell, d ** (n - 1), log_pole_at_zero=1)
            errs.append(abs(lhs - rhs))
    return max(errs)


def test_green_jensen_cubic():
    assert _green_jensen_errors(3, range(1, 7), G1024) < 1e-3


@pytest.mark.slow
def test_green_jensen_quadratic_fine_grid():
    assert _green_jensen_errors(2, range(1, 7), SphereGrid(2048, 2048)) < 1e-4


def test_green_jensen_quadratic_coarse():
    assert _green_jensen_errors(2, range(1, 7), G1024) < 1e-3


# -- C_{B_f} -----------------------------------------------------------------

def test_c_bf_hand_value_at_tip():
    # at (p0, p1) = (1, 0) the lift is (1, -2): log sqrt 5
    assert abs(ms._lift_log_norm(2, -2, 0) - math.log(math.sqrt(5))) < 1e-15
    v = ms.c_bf_closed_form(2, -2)
    assert v >= math.log(math.sqrt(5))
    assert abs(v - 0.5 * math.log(10)) < 1e-9


def test_c_bf_closed_form_vs_dense_scan():
    z = SphereGrid(800, 800).z
    for d, lam in [(2, -2), (2, 0.3 + 0.5j), (3, 1j)]:
        scan = np.max(np.abs(ms._lift_log_norm(d, lam, z)))
        oracle = ms.c_bf_closed_form(d, lam)
        assert scan <= oracle + 1e-12
        assert oracle - scan < 1e-3


def test_c_bf_monotone_in_samples():
    vals = [ms.c_bf_estimate(2, s, 1024, seed=1).value for s in (50, 100, 200, 400)]
    assert vals == sorted(vals)


def test_c_bf_stability_and_consistency():
    a = ms.c_bf_estimate(2, 1000, 4096, seed=1)
    b = ms.c_bf_estimate(2, 2000, 16384, seed=1)
    assert abs(a.value - b.value) < 0.02 * b.value
    # the sampled value never beats the exact sup at its own parameter
    assert a.value <= ms.c_bf_closed_form(2, a.lam) + 1e-9
    assert a.value <= 0.5 * math.log(10) + 1e-9


# -- C_0 and C_0* ------------------------------------------------------------

def test_c0_star_quadratures():
    closed = ms.c0_star_integral(0.25, "closed")
    assert abs(closed - 0.5 * math.log(17)) < 1e-15
    assert abs(ms.c0_star_integral(0.25, "adaptive") - closed) < 1e-8
    assert abs(ms.c0_star_integral(0.25) - closed) < 1e-6
    with pytest.raises(ValueError):
        ms.c0_star_integral(0.25, "simpson")


def _h1_integral_oracle():
    # lam = mu/2 - mu^2/4 maps the unit disc onto H_1 with G = -log|mu|
    x, w = roots_legendre(400)
    rho = 0.5 * (x + 1)
    wr = 0.5 * w
    t = 2 * np.pi * np.arange(512) / 512
    mu = rho[:, None] * np.exp(1j * t)[None, :]
    lam = mu / 2 - mu ** 2 / 4
    jac = np.abs((1 - mu) / 2) ** 2
    dens = -np.log(rho)[:, None] * jac / (math.pi * (1 + np.abs(lam) ** 2) ** 2)
    return float(np.sum(wr[:, None] * rho[:, None] * dens) * 2 * np.pi / 512)


def test_c0_constants_quadratic():
    c = ms.c0_constants(2, G1024)
    assert c.c0 >= c.c0_star > math.pi
    assert abs(c.inradius - 0.25) < 1e-9
    assert abs(c.c0_star - (math.pi + 0.5 * math.log(17))) < 1e-6
    assert abs(c.h1_integral - _h1_integral_oracle()) < 1e-3 + c.error_bar
    assert c.error_bar < 1e-4


def test_c0_constants_cubic():
    c = ms.c0_constants(3, G256)
    rho = dy.h1_inradius_closed_form(3)
    assert c.c0 >= c.c0_star > math.pi
    assert abs(c.c0_star - math.pi - 0.5 * math.log1p(rho ** -2)) < 1e-6
