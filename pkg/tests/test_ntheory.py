import math

import pytest
from hypothesis import given, strategies as st

from unicrit import ntheory as nt


def test_divisors_examples():
    assert nt.divisors(1) == [1]
    assert nt.divisors(6) == [1, 2, 3, 6]
    assert nt.divisors(12) == [1, 2, 3, 4, 6, 12]


def test_divisors_reject_zero():
    with pytest.raises(ValueError):
        nt.divisors(0)
    with pytest.raises(ValueError):
        nt.mobius(0)


def test_mobius_examples():
    assert nt.mobius(1) == 1
    assert nt.mobius(6) == 1
    assert nt.mobius(12) == 0
    assert nt.mobius(30) == -1


def test_nu_examples():
    assert nt.nu(2, 1) == 2
    assert nt.nu(2, 3) == 6
    assert nt.nu(3, 2) == 6


def test_sigma_examples():
    assert (nt.sigma0(1), nt.sigma1(1)) == (1, 1)
    assert (nt.sigma0(6), nt.sigma1(6)) == (4, 12)
    assert sum(nt.mobius(6 // m) * nt.sigma1(m) for m in nt.divisors(6)) == 6


@pytest.mark.parametrize("n", range(1, 201))
def test_mobius_inversion(n):
    assert sum(nt.mobius(n // m) * nt.sigma0(m) for m in nt.divisors(n)) == 1
    assert sum(nt.mobius(n // m) * nt.sigma1(m) for m in nt.divisors(n)) == n


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_nu_telescopes_and_divisible(d):
    for n in range(1, 17):
        assert sum(nt.nu(d, m) for m in nt.divisors(n)) == d ** n
        assert nt.nu(d, n) > 0
        if n >= 2:
            assert nt.nu(d, n) % d == 0


def test_t_n_value_and_increment():
    assert nt.t_n(2, 1, 0.0) == pytest.approx(3 * math.log(2) + math.log(math.sqrt(2) + 1), abs=1e-12)
    assert nt.t_n(2, 1, 0.0) == pytest.approx(2.960815, abs=1e-6)
    for d in (2, 3, 5):
        for n in range(2, 12):
            diff = nt.t_n(d, n, 0.7) - nt.t_n(d, n - 1, 0.7)
            assert diff == pytest.approx(2 * math.log(d) / (d - 1), abs=1e-12)


def test_t_n_by_summands():
    c = 1.2345
    d, n = 2, 5
    by_hand = ((d + 1) * math.log(2) + 2 * math.log(d) * (n - 1) + 4 * c / (d - 1)
               + (d - 1) * math.log(math.sqrt(2) + 1)) / (d - 1)
    assert nt.t_n(d, n, c) == pytest.approx(by_hand, abs=1e-12)


def test_t_n_star_closed_forms_agree():
    for d in (2, 3):
        for n in range(1, 13):
            assert nt.t_n_star(d, n, 0.9) == pytest.approx(nt.t_n_star_by_divisors(d, n, 0.9), abs=1e-12)
    assert nt.t_n_star(3, 1, 0.9) == pytest.approx(2 * nt.t_n(3, 1, 0.9), abs=1e-12)
    expected = 2 * math.log(2) * 12 + (math.log(2) + math.log(math.sqrt(2) + 1)) * 4
    assert nt.t_n_star(2, 6, 0.0) == pytest.approx(expected, abs=1e-12)


def test_family_params_validation():
    nt.FamilyParams(2, 1)
    with pytest.raises(ValueError):
        nt.FamilyParams(1, 1)
    with pytest.raises(ValueError):
        nt.FamilyParams(2, 0)


@given(st.integers(1, 5000))
def test_divisors_are_exact(n):
    divs = nt.divisors(n)
    assert divs == sorted(set(divs))
    assert all(n % m == 0 for m in divs)
    assert len(divs) == nt.sigma0(n)
