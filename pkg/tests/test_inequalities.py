import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dampedeuler import inequalities as iq
from dampedeuler.params import DomainError, derive_gas_model

POINTS = [(0.3, 1.7), (1.9, 0.2), (1.0, 1.0 + 1e-6), (0.0, 1.3), (1.05, 1.0)]


def direct_ratios(gamma, rho, rb):
    """The lemma ratios from their printed definitions, in 50-digit arithmetic."""
    mp.mp.dps = 50
    g, r, b = mp.mpf(gamma), mp.mpf(rho), mp.mpf(rb)
    br = lambda k: r ** k - b ** k - k * b ** (k - 1) * (r - b)
    l31 = br(g + 1) / br(g) ** ((g + 1) / g)
    pw = (r ** g - b ** g) * (r - b) / abs(r - b) ** (g + 1)
    den = (r ** (g - 1) + b ** (g - 1)) * (r - b) ** 2
    return {"l31": l31, "pow": pw, "breg": br(g + 1) / den, "diff": (r ** g - b ** g) * (r - b) / den,
            "r1": br(g) / abs(r - b) ** g, "r2": br(g) / (b ** (g - 2) * (r - b) ** 2)}


@pytest.mark.parametrize("gamma", [1.2, 1.5, 2.0, 3.0, 5.0])
@pytest.mark.parametrize("rho,rb", POINTS)
def test_ratios_against_direct_definitions(gamma, rho, rb):
    m = derive_gas_model(gamma, 0.0)
    ref = direct_ratios(gamma, rho, rb)
    assert float(iq.lemma31_ratio(m, rho, rb)) == pytest.approx(float(ref["l31"]), rel=1e-10)
    r_pow, r_breg, r_diff = iq.lemma32_ratios(m, rho, rb)
    assert float(r_pow) == pytest.approx(float(ref["pow"]), rel=1e-10)
    assert float(r_breg) == pytest.approx(float(ref["breg"]), rel=1e-10)
    assert float(r_diff) == pytest.approx(float(ref["diff"]), rel=1e-10)
    r1, r2, _ = iq.lemma33_ratios(m, rho, rb)
    assert float(r1) == pytest.approx(float(ref["r1"]), rel=1e-10)
    assert float(r2) == pytest.approx(float(ref["r2"]), rel=1e-10)


@pytest.mark.parametrize("gamma", [1.2, 1.5, 2.0, 3.0, 5.0])
def test_ratio_bound_boundary_rows(gamma):
    m = derive_gas_model(gamma, 0.0)
    rho = np.linspace(0.01, 2, 50)
    np.testing.assert_allclose(iq.lemma31_ratio(m, rho, 0 * rho), 1.0, atol=1e-10)
    expected = gamma / (gamma - 1) ** ((gamma + 1) / gamma)
    np.testing.assert_allclose(iq.lemma31_ratio(m, 0 * rho, rho), expected, rtol=1e-10)


def test_ratio_bound_gamma5_column_value():
    m = derive_gas_model(5.0, 0.0)
    assert float(iq.lemma31_ratio(m, 0.0, 1.0)) == pytest.approx(5 / 4 ** 1.2, rel=1e-12)


def test_power_difference_power_equality_on_axis(model2):
    r_pow, _, _ = iq.lemma32_ratios(model2, 1.0, 0.0)
    assert float(r_pow) == 1.0


def test_power_difference_near_diagonal(model2):
    rb = np.linspace(0.1, 2, 20)
    _, r_breg, r_diff = iq.lemma32_ratios(model2, rb * (1 + 1e-6), rb)
    rep = iq.check_lemma32(model2, samples=10 ** 5)
    d1, d2 = rep[1].sampled_infimum, rep[2].extra["sampled_supremum"]
    assert 0 < d1 <= d2 < np.inf
    assert np.all((r_breg >= d1) & (r_breg <= d2)) and np.all((r_diff >= d1) & (r_diff <= d2))


def test_sample_pairs_contents():
    rho, rb = iq.sample_pairs(2.0, 10 ** 4, seed=3)
    assert len(rho) == 10 ** 4
    assert np.all((rho >= 0) & (rho <= 2) & (rb >= 0) & (rb <= 2))
    assert not np.any(rho == rb)
    assert np.any(rho == 0) and np.any(rb == 0)
    r2, b2 = iq.sample_pairs(2.0, 10 ** 4, seed=3)
    np.testing.assert_array_equal(rho, r2)
    np.testing.assert_array_equal(rb, b2)


def test_region_examples():
    assert iq.classify_region(1.0, 0.9) is iq.RegionTag.Omega2
    assert iq.classify_region(0.0, 0.9) is iq.RegionTag.Omega1
    assert iq.classify_region(0.5, 0.0) is iq.RegionTag.Omega1
    assert iq.classify_region(1.0, 2.0) is iq.RegionTag.Omega1


@settings(max_examples=300)
@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_region_partition(rho, rb):
    tag = iq.classify_region(rho, rb)
    in2 = rho != 0 and rb != 0 and abs(rho - rb) < 0.5 * rb
    assert tag is (iq.RegionTag.Omega2 if in2 else iq.RegionTag.Omega1)
    assert bool(iq.classify_region(np.array([rho]), np.array([rb]))[0]) == in2


def test_pressure_region_examples():
    m = derive_gas_model(1.5, 0.0)
    assert iq.c2_constant(1.5) == pytest.approx(0.375 * np.sqrt(0.4), rel=1e-15)
    assert iq.c2_constant(1.5) == pytest.approx(0.23717, abs=1e-5)
    r1, _, _ = iq.lemma33_ratios(m, 0.0, 1.0)
    assert float(r1) == pytest.approx(0.5, rel=1e-14)


def test_pressure_region_rejects_gamma_range():
    with pytest.raises(DomainError):
        iq.check_lemma33(derive_gas_model(2.0, 0.0), samples=10 ** 4)


def test_pressure_region_literal_exponent_degenerates():
    m = derive_gas_model(1.5, 0.0)
    om1, om2 = iq.check_lemma33(m, samples=10 ** 5)
    assert om2.passed and om2.sampled_infimum >= om2.target_constant
    assert om2.extra["literal_exponent_infimum"] < 1e-3 * om2.target_constant


def test_reports_reproducible_from_seed(model2):
    a = iq.check_lemma31(model2, samples=10 ** 4, seed=11)
    b = iq.check_lemma31(model2, samples=10 ** 4, seed=11)
    assert a.to_dict() == b.to_dict()
    rho, rb = a.witness
    assert float(iq.lemma31_ratio(model2, rho, rb)) == a.sampled_infimum


@pytest.mark.parametrize("gamma", [1.2, 1.5, 1.9, 2.0, 3.0, 5.0])
def test_lemma_infima_positive(gamma):
    m = derive_gas_model(gamma, 0.0)
    reps = [iq.check_lemma31(m, samples=10 ** 5)] + list(iq.check_lemma32(m, samples=10 ** 5))
    if gamma < 2:
        reps += list(iq.check_lemma33(m, samples=10 ** 5))
    for r in reps:
        assert r.passed, r.lemma_id
        assert r.sampled_infimum > 0


def test_taylor_examples():
    lhs, rhs = iq.taylor_sides(2.0, 1, 1.0, 1.0)
    assert lhs[0] == pytest.approx(1.0, abs=1e-14) and rhs[0] == pytest.approx(1.0, rel=1e-13)
    lhs, rhs = iq.taylor_sides(3.0, 1, 0.5, 2.0)
    assert lhs[0] == pytest.approx(rhs[0], rel=1e-10)
    assert lhs[0] == pytest.approx(2.5 ** 3 - 8 - 12 * 0.5, rel=1e-14)
    lhs, rhs = iq.taylor_sides(3.5, 2, 0.0, 1.3)
    assert lhs[0] == 0.0 and rhs[0] == 0.0


@pytest.mark.parametrize("k,n", [(2.0, 1), (3.0, 1), (4.0, 2), (2.5, 2), (6.0, 0), (1.5, 1), (3.0, 3)])
def test_taylor_sweep(k, n):
    rep = iq.check_taylor_remainder(k, n, samples=2000, seed=1)
    assert rep.passed, rep.extra


def test_taylor_rejects_order_above_k():
    with pytest.raises(DomainError):
        iq.check_taylor_remainder(1.5, 2)
