import math

import numpy as np
import pytest

from unicrit import dynamics as dy
from unicrit import exactpoly as ep
from unicrit import ntheory
from unicrit import rootfind as rf
from unicrit.errors import DegenerateParameter, NotInH1
from unicrit.sphere import SphereGrid


def _random_generic(d, count, seed, radius=1.5):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        lam = complex(*rng.uniform(-radius, radius, 2))
        out.append(lam)
    return out


# -- chordal geometry --------------------------------------------------------

def test_chordal_examples():
    assert dy.chordal(0, np.inf) == 1
    assert abs(dy.chordal(1, np.inf) - 1 / math.sqrt(2)) < 1e-15
    assert dy.chordal(np.inf, np.inf) == 0
    assert abs(dy.chordal(0, 1j) - 1 / math.sqrt(2)) < 1e-15


def test_chordal_properties():
    rng = np.random.default_rng(3)
    z = rng.normal(size=500) * 3 + 1j * rng.normal(size=500) * 3
    w = rng.normal(size=500) * 3 + 1j * rng.normal(size=500) * 3
    c = dy.chordal(z, w)
    assert np.all(c <= np.abs(z - w) + 1e-15)
    assert np.all((c >= 0) & (c <= 1))
    assert np.allclose(c, dy.chordal(w, z))
    # inversion is an isometry
    assert np.allclose(c, dy.chordal(1 / z, 1 / w))
    x = rng.normal(size=500) + 1j * rng.normal(size=500)
    assert np.all(dy.chordal(z, x) <= c + dy.chordal(w, x) + 1e-12)


def test_chordal_derivative_examples():
    assert dy.chordal_derivative(2, 0, 1, 0) == 0
    assert abs(dy.chordal_derivative(2, 0, 1, 1) - 2) < 1e-14
    assert dy.chordal_derivative(2, 0, 1, np.inf) == 0
    grid = SphereGrid(512, 256)
    sup = dy.chordal_derivative(2, 0, 1, grid.z.ravel()).max()
    assert abs(sup - 2) < 1e-4


def test_chordal_derivative_chain_rule():
    # (f^2)^# (z) = f^#(f(z)) f^#(z)
    rng = np.random.default_rng(5)
    z = rng.normal(size=50) + 1j * rng.normal(size=50)
    lam = -0.3 + 0.6j
    f1 = z ** 2 + lam
    lhs = dy.chordal_derivative(2, lam, 2, z)
    rhs = dy.chordal_derivative(2, lam, 1, f1) * dy.chordal_derivative(2, lam, 1, z)
    assert np.allclose(lhs, rhs, rtol=1e-12)


def test_chordal_derivative_deep_iterates_finite():
    v = dy.chordal_derivative(2, 0.3, 40, np.array([3.0 + 0j, 0.1 + 0.2j]))
    assert np.all(np.isfinite(v))


# -- Green functions ---------------------------------------------------------

def test_green_examples():
    assert abs(dy.green_dynamical(2, 0, 2) - math.log(2)) < 1e-10
    assert dy.green_dynamical(2, 0, 0.5) == 0
    assert dy.green_parameter(2, 0) == 0
    g4 = dy.green_parameter(2, 4)
    assert g4 > 0
    assert abs(g4 - dy.green_dynamical(2, 4, 4)) < 1e-9
    assert abs(g4 - 2 * dy.green_dynamical(2, 4, 0)) < 1e-9


def test_green_closed_form_outside_unit_disc():
    r = np.array([1.5, 3.0, 10.0, 1e5]) * np.exp(0.7j)
    for d in (2, 3, 5):
        assert np.allclose(dy.green_dynamical(d, 0, r), np.log(np.abs(r)), atol=1e-12)


def test_green_independent_of_escape_radius():
    z = np.array([0.9 + 0.7j, 2.0, -1.1 + 0.3j])
    base = dy.green_dynamical(2, 0.3 + 0.5j, z)
    for radius in (10.0, 1e3, 1e8):
        assert np.allclose(dy.green_dynamical(2, 0.3 + 0.5j, z, escape_radius=radius),
                           base, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3])
def test_green_functional_equation(d):
    rng = np.random.default_rng(11 + d)
    lam = rng.uniform(-1.5, 1.5, 300) + 1j * rng.uniform(-1.5, 1.5, 300)
    z = rng.uniform(-2, 2, 300) + 1j * rng.uniform(-2, 2, 300)
    g = dy.green_dynamical(d, lam, z)
    gf = dy.green_dynamical(d, lam, z ** d + lam)
    esc = g > 1e-6
    assert esc.sum() > 100
    assert np.max(np.abs(gf[esc] - d * g[esc])) < 1e-9


def test_h_asymptotics():
    assert dy.h_parameter(2, np.inf) == 0
    for k in range(3, 7):
        assert abs(dy.h_parameter(2, 10.0 ** k)) < 10.0 ** (-k + 1)


def test_green_parameter_vanishes_at_centers():
    for d, n in [(2, 6), (3, 4)]:
        assert np.all(dy.green_parameter(d, rf.superattracting_parameters(d, n).roots) == 0)


def test_lyapunov():
    assert abs(dy.lyapunov(2, 0) - math.log(2)) < 1e-15
    assert abs(dy.lyapunov(3, 0) - math.log(3)) < 1e-15
    rng = np.random.default_rng(7)
    rad = 3 * np.sqrt(rng.uniform(size=1000))
    lam = rad * np.exp(2j * np.pi * rng.uniform(size=1000))
    for d in (2, 3):
        assert np.all(dy.lyapunov(d, lam) >= math.log(d))


# -- boundary sampling -------------------------------------------------------

def test_boundary_sample_postconditions():
    lo, hi = dy.boundary_sample(2, 200, seed=4, return_escaping=True)
    assert np.all(dy.green_parameter(2, lo, n_max=2000) < 1e-9)
    assert np.all(np.abs(lo - hi) < 1e-10)
    assert not any(dy._bounded(2, complex(h), 2000) for h in hi)
    assert np.all((np.abs(lo) >= 0.25) & (np.abs(lo) <= 2))


def test_boundary_sample_deterministic_and_cubic():
    a = dy.boundary_sample(3, 50, seed=9)
    assert np.array_equal(a, dy.boundary_sample(3, 50, seed=9))
    assert not np.array_equal(a, dy.boundary_sample(3, 50, seed=10))
    assert np.all(np.abs(a) <= 2 ** 0.5 + 1e-12)


def test_boundary_sample_rejects_empty():
    with pytest.raises(ValueError):
        dy.boundary_sample(2, 0)


# -- periodic points ---------------------------------------------------------

def test_classify_fixed_points_of_square():
    oc = dy.classify_periodic(2, 0, 1)
    pts = np.sort_complex(oc.points.roots)
    assert np.allclose(pts, [0, 1], atol=1e-14)
    assert np.allclose(sorted(np.abs(oc.multiplier)), [0, 2], atol=1e-14)
    assert oc.formally_exact_count() == 2


def test_classify_two_cycle_at_basilica():
    oc = dy.classify_periodic(2, -1, 2)
    k = int(np.argmin(np.abs(oc.points.roots)))
    cyc = oc.cycles[oc.point_cycle[k]]
    assert oc.exact_period[oc.point_cycle[k]] == 2
    assert np.allclose(np.sort_complex(oc.points.roots[list(cyc)]), [-1, 0], atol=1e-12)
    assert abs(oc.multiplier[oc.point_cycle[k]]) < 1e-12


def test_classification_partition():
    for d, n in [(2, 4), (3, 3), (2, 6)]:
        oc = dy.classify_periodic(d, 0.31 - 0.42j, n)
        assert int(oc.points.multiplicity.sum()) == d ** n
        covered = sorted(i for c in oc.cycles for i in c)
        assert covered == list(range(len(oc.points.roots)))
        for cyc, m in zip(oc.cycles, oc.exact_period):
            assert len(cyc) == m and n % m == 0
        # cycles of each exact period m account for nu(d, m) points
        for m in ntheory.divisors(n):
            pts = sum(len(c) for c, p in zip(oc.cycles, oc.exact_period) if p == m)
            assert pts == ntheory.nu(d, m)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_formally_exact_count_equals_nu(n):
    for lam in _random_generic(2, 10, 100 + n):
        oc = dy.classify_periodic(2, lam, n)
        assert oc.formally_exact_count() == ntheory.nu(2, n)


def test_formally_exact_at_parabolic_bifurcation():
    # lam = -3/4: the fixed point with multiplier -1 is a collision of a fixed
    # point with a 2-cycle; it belongs to Fix** for n = 2 with weight 2.
    oc = dy.classify_periodic(2, -0.75, 2)
    assert sorted(oc.points.multiplicity.tolist()) == [1, 3]
    assert sorted(oc.formally_exact_n.tolist()) == [0, 2]
    assert oc.formally_exact_count() == ntheory.nu(2, 2)


def test_cusp():
    # the double fixed point at lam = 1/4 is formally exact for n = 1 only
    assert dy.classify_periodic(2, 0.25, 1).formally_exact_n.tolist() == [2]
    with pytest.raises(DegenerateParameter):
        dy.classify_periodic(2, 0.25, 2)


# -- P* evaluations ----------------------------------------------------------

def test_log_pstar_fixed_point_example():
    lam = 0.2 + 0.3j
    s = np.sqrt(1 - 4 * lam + 0j)
    mu = [1 + s, 1 - s]
    expected = math.log(abs(mu[0] * mu[1])) - 2 * math.log(2)
    assert abs(dy.log_pstar(2, lam, 1) - expected) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_log_pstar_matches_dynatomic(n):
    phi = ep.dynatomic_at_zero(2, n)
    for lam in _random_generic(2, 5, n):
        oracle = (2 - 1) * math.log(abs(complex(phi(lam))))
        assert abs(dy.log_pstar(2, lam, n) - oracle) < 1e-8


def test_log_pstar_matches_dynatomic_cubic():
    phi = ep.dynatomic_at_zero(3, 3)
    for lam in _random_generic(3, 4, 21, radius=1.0):
        oracle = 2 * math.log(abs(complex(phi(lam))))
        assert abs(dy.log_pstar(3, lam, 3) - oracle) < 1e-8


@pytest.mark.parametrize("n", [1, 2, 3])
def test_log_pstar_matches_resultant(n):
    res = ep.multiplier_poly_power(2, n)
    rng = np.random.default_rng(40 + n)
    for lam in _random_generic(2, 4, 50 + n):
        w = complex(*rng.uniform(-1.5, 1.5, 2))
        lhs = n * (dy.log_pstar(2, lam, n, w) + ntheory.nu(2, n) * math.log(2))
        rhs = math.log(abs(complex(res(lam, w))))
        assert abs(lhs - rhs) < 1e-7


def test_log_pstar_grid_agrees_with_classification():
    lam = np.array([0.13 + 0.41j, -1.2 + 0.2j, 0.6 - 0.6j])
    grid_vals = dy.log_abs_pstar_at_zero(2, 4, lam)
    for l, v in zip(lam, grid_vals):
        assert abs(dy.log_pstar(2, l, 4) - v) < 1e-8


def test_averaged_small_r_limit():
    for lam in _random_generic(2, 5, 77):
        a = dy.averaged_log_pstar(2, lam, 3, 1e-12)
        assert abs(a - dy.log_pstar(2, lam, 3)) < 1e-6


def test_averaged_superattracting_center():
    lam = -1.0  # centre of the period-2 component; one multiplier is 0
    r = 0.5
    oc = dy.classify_periodic(2, lam, 2)
    mu = oc.point_multipliers()[oc.flags]
    others = [m for m in mu if abs(m) > 1e-9]
    expected = (math.log(r) * 2 + sum(math.log(max(r, abs(m))) for m in others)) / 2 \
        - ntheory.nu(2, 2) * math.log(2)
    # both points of the 2-cycle share the multiplier 0
    assert len(others) == 0
    got = dy.averaged_log_pstar(2, lam, 2, r)
    assert math.isfinite(got)
    assert abs(got - expected) < 1e-12


def test_averaged_matches_circle_quadrature():
    theta = 2 * np.pi * np.arange(2 ** 14) / 2 ** 14
    for lam in _random_generic(2, 3, 91):
        for n in (1, 2, 3):
            oc = dy.classify_periodic(2, lam, n)
            for r in (0.5, 1.0):
                vals = [dy.log_pstar(2, lam, n, r * np.exp(1j * t), classification=oc)
                        for t in theta[:: 2 ** 6]]
                coarse = float(np.mean(vals))
                assert abs(coarse - dy.averaged_log_pstar(2, lam, n, r, oc)) < 1e-2


def test_averaged_rejects_bad_radius():
    with pytest.raises(ValueError):
        dy.averaged_log_pstar(2, 0.1, 2, 0)


def test_averaged_grid_identity():
    lam = np.array([0.13 + 0.41j, -1.2 + 0.2j, 0.6 - 0.6j, -0.1 + 0.2j])
    for r in (0.5, 1.0):
        grid_vals = dy.averaged_log_pstar_grid(2, 3, lam, r)
        for l, v in zip(lam, grid_vals):
            assert abs(dy.averaged_log_pstar(2, l, 3, r) - v) < 1e-8


# -- the main cardioid -------------------------------------------------------

def test_h1_examples():
    assert dy.h1_green(2, 0) == math.inf
    assert abs(dy.h1_green(2, 0.1) + math.log(abs(1 - math.sqrt(1 - 0.4)))) < 1e-12
    with pytest.raises(NotInH1):
        dy.h1_green(2, -1)
    assert np.isnan(dy.h1_green(2, np.array([-1.0 + 0j]))[0])


def test_h1_inradius():
    assert abs(dy.h1_inradius(2) - 0.25) < 1e-9
    # oracle: dense boundary parametrization lam = mu/2 - mu^2/4
    mu = np.exp(2j * np.pi * np.arange(200000) / 200000)
    assert abs(np.min(np.abs(mu / 2 - mu ** 2 / 4)) - 0.25) < 1e-9
    for d in (3, 4):
        assert abs(dy.h1_inradius(d) - dy.h1_inradius_closed_form(d)) < 1e-8


def test_h1_green_myrberg_scaling():
    # near 0 the fixed point is ~lam, so mu_fix ~ d lam^(d-1)
    for d in (2, 3):
        lam = 1e-4 + 0j
        expected = -math.log(d * abs(lam) ** (d - 1)) / (d - 1)
        assert abs(dy.h1_green(d, lam) - expected) < 1e-3


# -- Green fields ------------------------------------------------------------

def test_greenfield_roundtrip(tmp_path):
    grid = SphereGrid(64, 48)
    gf = dy.GreenField.compute("h_param", 2, grid)
    path = gf.to_pgm(tmp_path / "h.pgm")
    back = dy.GreenField.read_pgm(path)
    scale = (gf.values.max() - gf.values.min()) / 65535
    assert back.shape == grid.shape
    assert np.max(np.abs(back - gf.values)) <= scale
    text = gf.to_csv(tmp_path / "h.csv")
    lines = text.splitlines()
    assert lines[0] == "u,theta,value" and len(lines) == grid.size + 1
    vals = np.loadtxt(tmp_path / "h.csv", delimiter=",", skiprows=1)[:, 2]
    assert np.array_equal(vals, gf.values.ravel())


def test_greenfield_kinds():
    grid = SphereGrid(32, 32)
    with pytest.raises(ValueError):
        dy.GreenField.compute("nope", 2, grid)
    with pytest.raises(ValueError):
        dy.GreenField.compute("g_dyn", 2, grid)
    g = dy.GreenField.compute("g_dyn", 2, grid, lam=0)
    assert np.allclose(g.values, np.log(np.maximum(np.abs(grid.z), 1)), atol=1e-12)


def test_h_field_bounded_and_refinement_stable():
    sups = [dy.GreenField.compute("h_param", 2, SphereGrid(n, n)).meta["sup_abs"]
            for n in (256, 512)]
    assert all(math.isfinite(s) for s in sups)
    # on M the field is -0.5 log(1 + |lam|^2), extreme at lam = -2
    assert sups[1] <= 0.5 * math.log(5) + 1e-9
    assert abs(sups[1] - sups[0]) / sups[1] < 0.01
