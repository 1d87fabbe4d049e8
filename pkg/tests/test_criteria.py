import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nls import specfun
from nls.criteria import (
    EPS_GRID,
    FormulaId,
    LowerBound,
    Status,
    bs_check_global,
    bs_threshold_compact,
    check_mourre_basic,
    check_mourre_composite,
    check_virial,
    dicho_f,
    dicho_threshold,
    lt_count_bound,
    lt_count_report,
    tail_sign,
)
from nls.errors import ArgumentOutOfDomain, DegenerateSymbol, PoleAtNonpositiveInteger
from nls.potentials import Potential, potential_norms
from nls.symbols import KineticSymbol

ALPHAS = [0.5, 1.0, 1.5, 1.99]


def _betas_up_to(alpha):
    return [b for b in (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75) if b < alpha] + [alpha]


MATRIX = [(a, b) for a in ALPHAS for b in _betas_up_to(a)]


def _assert_verdict_invariants(v):
    if v.status is Status.HOLDS:
        assert v.margin >= 0
    if v.status is Status.FAILS:
        assert v.margin < 0
        assert v.witness is not None and math.isfinite(v.witness)


# virial and basic Mourre on the fractional / inverse-power family
@pytest.mark.parametrize("alpha,beta", MATRIX)
def test_virial_and_mourre_hold_for_beta_up_to_alpha(alpha, beta):
    sym, V = KineticSymbol.fractional(alpha), Potential.inverse_power(1.0, beta)
    v = check_virial(sym, V)
    m = check_mourre_basic(sym, V)
    assert v.status is Status.HOLDS
    assert m.status is Status.HOLDS
    _assert_verdict_invariants(v)
    _assert_verdict_invariants(m)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("excess", [0.1, 0.5, 1.0])
def test_virial_fails_beyond_alpha_with_exact_witness(alpha, excess):
    beta = alpha + excess
    v = check_virial(KineticSymbol.fractional(alpha), Potential.inverse_power(1.0, beta))
    assert v.status is Status.FAILS
    assert v.margin < 0
    assert abs(v.witness - (beta / alpha - 1.0) ** -0.5) < 1e-6


def test_virial_margin_formula():
    alpha, beta, C = 1.5, 0.75, 2.0
    r = np.geomspace(1e-3, 1e3, 200)
    v = check_virial(KineticSymbol.fractional(alpha), Potential.inverse_power(C, beta), radii=r)
    expected = C * (1 + r * r) ** (-beta / 2 - 1) * (1 + (1 - beta / alpha) * r * r)
    np.testing.assert_allclose(v.margin, expected.min(), rtol=1e-6)
    assert v.status is Status.HOLDS


def test_mourre_basic_margin_formula():
    alpha, beta, C = 1.0, 0.5, 1.0
    r = np.geomspace(1e-3, 1e3, 200)
    m = check_mourre_basic(KineticSymbol.fractional(alpha), Potential.inverse_power(C, beta), radii=r)
    br = (1 + r * r) ** 0.5
    expected = C * ((alpha - beta) * br ** (-beta) + beta * br ** (-beta - 2))
    np.testing.assert_allclose(m.margin, expected.min(), rtol=1e-6)


def test_virial_coulomb_holds():
    v = check_virial(KineticSymbol.fractional(1.0), Potential.coulomb(1.0, 0.5))
    assert v.status is Status.HOLDS
    assert v.details["tail"]["sign"] == "positive"


def test_virial_example_fail_sqrt2():
    v = check_virial(KineticSymbol.fractional(1.0), Potential.inverse_power(1.0, 1.5))
    assert v.status is Status.FAILS
    assert v.witness == pytest.approx(math.sqrt(2.0), abs=1e-6)


def test_virial_degenerate_symbol():
    with pytest.raises(DegenerateSymbol):
        check_virial(KineticSymbol.log_fractional(1.0), Potential.inverse_power(1.0, 0.5))


def test_virial_zero_potential_is_not_strict():
    v = check_virial(KineticSymbol.fractional(1.0), Potential.inverse_power(0.0, 1.0))
    assert v.status is Status.INCONCLUSIVE
    assert v.margin == 0.0


def test_mourre_basic_zero_potential():
    for sym in (KineticSymbol.fractional(1.0), KineticSymbol.relativistic(1.0, 1.0)):
        m = check_mourre_basic(sym, Potential.inverse_power(0.0, 1.0))
        assert m.status is Status.HOLDS
        assert m.margin == 0.0


def test_mourre_basic_positive_bump_fails_at_origin():
    m = check_mourre_basic(KineticSymbol.fractional(1.0), Potential.positive_bump(1.0, 1.0))
    assert m.status is Status.FAILS
    assert m.witness == 0.0
    assert m.margin == pytest.approx(-1.0, rel=1e-6)


def test_tail_sign_rules():
    assert tail_sign({1.0: (0.0, 1.0), 2.0: (3.0, 3.0)}, 4.0) == ("positive", 2.0)
    assert tail_sign({1.0: (-1.0, 1.0)}, 4.0) == ("negative", 1.0)
    assert tail_sign({1.0: (1e-12, 1.0), 5.0: (1.0, 1.0)}, 4.0) == ("unknown", 5.0)
    assert tail_sign({}, math.inf) == ("zero", None)


# composite Mourre
def test_composite_hardy_positive_bump_small_coupling():
    a = 1.5
    v = check_mourre_composite(KineticSymbol.fractional(a), Potential.positive_bump(0.05, 1.0), LowerBound.hardy(3, a))
    assert v.status is Status.HOLDS
    assert v.epsilon in EPS_GRID
    _assert_verdict_invariants(v)


def test_composite_relativistic_example():
    a = 1.5
    sym = KineticSymbol.relativistic(a, 1.0)
    F = LowerBound.relativistic_fx(a)
    attractive = check_mourre_composite(sym, Potential.inverse_power(0.01, 0.6), F, eps_grid=(0.5,))
    assert attractive.status is Status.HOLDS
    assert attractive.epsilon == 0.5
    bump = check_mourre_composite(sym, Potential.positive_bump(0.01, 0.9), F, eps_grid=(0.5,))
    assert bump.status is Status.HOLDS


def test_composite_fails_for_large_attractive_coupling():
    a = 1.5
    v = check_mourre_composite(KineticSymbol.relativistic(a, 1.0), Potential.inverse_power(10.0, 3.0),
                               LowerBound.relativistic_fx(a))
    assert v.status is Status.FAILS
    _assert_verdict_invariants(v)


def test_composite_zero_coupling_margin_is_min_of_f():
    a = 1.0
    sym = KineticSymbol.fractional(a)
    F = LowerBound.hardy(3, a)
    r = np.geomspace(1e-2, 1e2, 100)
    v = check_mourre_composite(sym, Potential.inverse_power(0.0, 1.0), F, radii=r, eps_grid=(0.5,))
    assert v.status is Status.HOLDS
    mu = v.details["mu"]
    np.testing.assert_allclose(v.margin, 0.5 * mu * F.psi_bound(r).min(), rtol=1e-6)
    assert v.margin > 0


def test_relativistic_fx_constants_and_shape():
    a = 1.5
    k = LowerBound.relativistic_fx(a).constants()
    assert k["D1"] == pytest.approx(0.5 * (3 ** (a / 2) - 1))
    assert k["D2"] == pytest.approx(2 ** (-a / 2) * (3 ** (a / 2) - 1))
    assert k["C_2"] == pytest.approx(specfun.hardy_constant(3, 2.0))
    r = np.array([0.5, 2.0])
    expected = 1.0 / (r * r / (k["D1"] * k["C_2"]) + r**a / (k["D2"] * k["C_alpha"]))
    np.testing.assert_allclose(LowerBound.relativistic_fx(a).psi_bound(r), expected, rtol=1e-14)


def test_composite_domain_errors():
    with pytest.raises(ArgumentOutOfDomain):
        check_mourre_composite(KineticSymbol.fractional(1.0), Potential.inverse_power(1.0, 0.5), LowerBound.hardy(3, 1.5))
    with pytest.raises(ArgumentOutOfDomain):
        LowerBound.relativistic_fx(1.0, d=2).constants()
    with pytest.raises(ArgumentOutOfDomain):
        check_mourre_composite(KineticSymbol.fractional(1.0), Potential.inverse_power(1.0, 0.5),
                               LowerBound.hardy(3, 1.0), eps_grid=(1.5,))


def test_verdict_json_fields():
    v = check_virial(KineticSymbol.fractional(1.0), Potential.inverse_power(1.0, 1.5))
    doc = json.loads(v.to_json())
    for key in ("status", "margin", "witness", "grid_spec", "epsilon"):
        assert key in doc
    assert doc["status"] == "Fails"
    assert doc["witness"][1:] == [0.0, 0.0]


# Birman-Schwinger thresholds against independent arithmetic
def _compact_oracle(d, a, R):
    c = math.gamma((d - a) / 2) / (math.pi ** (d / 2) * 2**a * math.gamma(a / 2))
    w = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return d * (2**a - 1) / (c * w * 2 * math.sqrt(2) * 5 ** (d / 2) * (2 * R) ** a)


def _global_oracle(d, a, s, l):
    c = math.gamma((d - a) / 2) / (math.pi ** (d / 2) * 2**a * math.gamma(a / 2))
    w = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    return 2 * c**2 * (8 * 5**d * w**2 / (d**2 * (2**a - 1) ** 2) * s**2 + l**2)


BS_POINTS = [(d, a, R) for d in (3, 4, 5, 6) for a, R in ((0.3, 0.5), (0.8, 1.0), (1.0, 2.0), (1.5, 0.1), (1.9, 7.0))]


@pytest.mark.parametrize("d,a,R", BS_POINTS)
def test_bs_compact_matches_oracle(d, a, R):
    assert bs_threshold_compact(d, a, R).threshold_value == pytest.approx(_compact_oracle(d, a, R), rel=1e-12)


@pytest.mark.parametrize("d,a,R", BS_POINTS)
def test_bs_global_matches_oracle(d, a, R):
    s, l = 0.01 * R, 0.02 / R
    rep = bs_check_global(d, a, s, l)
    assert rep.compared_value == pytest.approx(_global_oracle(d, a, s, l), rel=1e-12)
    assert rep.formula_id is FormulaId.EQ4_2


def test_bs_compact_example_value():
    expected = 3.0 / ((1 / (2 * math.pi**2)) * 4 * math.pi * 2 * math.sqrt(2) * math.sqrt(125) * 2)
    rep = bs_threshold_compact(3, 1.0, 1.0)
    assert rep.threshold_value == pytest.approx(expected, rel=1e-12)
    assert rep.formula_id is FormulaId.EQ4_0
    assert {"C_d_alpha", "omega_d"} <= set(rep.intermediates)


def test_bs_compact_decreasing_in_radius():
    for a in np.linspace(0.05, 1.95, 20):
        vals = [bs_threshold_compact(3, float(a), float(R)).threshold_value for R in np.geomspace(0.01, 100, 20)]
        assert all(x > y for x, y in zip(vals, vals[1:]))


def test_bs_compact_verdicts_and_errors():
    t = bs_threshold_compact(3, 1.0, 1.0).threshold_value
    assert bs_threshold_compact(3, 1.0, 1.0, sup_norm=0.5 * t).verdict is Status.HOLDS
    assert bs_threshold_compact(3, 1.0, 1.0, sup_norm=2 * t).verdict is Status.FAILS
    with pytest.raises((ArgumentOutOfDomain, PoleAtNonpositiveInteger)):
        bs_threshold_compact(3, 3.0, 1.0)
    with pytest.raises(ArgumentOutOfDomain):
        bs_threshold_compact(2, 1.0, 1.0)
    with pytest.raises(ArgumentOutOfDomain):
        bs_threshold_compact(3, 1.0, 0.0)


def test_bs_global_zero_norms_and_example():
    rep = bs_check_global(3, 1.0, 0.0, 0.0)
    assert rep.compared_value == 0.0 and rep.verdict is Status.HOLDS
    n = potential_norms(Potential.inverse_power(0.01, 4.0))
    rep = bs_check_global(3, 1.0, n.sup_norm, n.l1_norm)
    assert rep.compared_value == pytest.approx(_global_oracle(3, 1.0, 0.01, 0.01 * math.pi**2), rel=1e-10)
    assert rep.verdict is (Status.HOLDS if rep.compared_value < 1 else Status.FAILS)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.01, 5.0))
def test_bs_global_monotone_in_each_norm(a, s, l, h):
    base = bs_check_global(3, a, s, l).compared_value
    assert bs_check_global(3, a, s + h, l).compared_value > base
    assert bs_check_global(3, a, s, l + h).compared_value > base


# dichotomy bound
DICHO_ALPHAS = list(np.linspace(1.51, 1.99, 50))


@pytest.mark.parametrize("alpha", DICHO_ALPHAS)
def test_dicho_forms_agree(alpha):
    rep = dicho_threshold(float(alpha))
    k = rep.intermediates
    assert abs(k["A_display"] - k["A_proof_form"]) <= 1e-12 * k["A_display"]
    assert k["f_rho_min"] == pytest.approx(k["f_rho_min_closed"], rel=1e-12)
    assert rep.threshold_value > 0


@pytest.mark.parametrize("alpha", [1.55, 1.75, 1.95])
def test_dicho_rho_min_minimizes_f(alpha):
    k = dicho_threshold(alpha).intermediates
    rho = np.geomspace(k["rho_min"] / 10, k["rho_min"] * 10, 20001)
    f = dicho_f(rho, alpha, k["I_alpha"])
    assert k["f_rho_min"] <= f.min() * (1 + 1e-12)
    assert abs(rho[np.argmin(f)] / k["rho_min"] - 1) < 1e-3
    assert k["f_rho_min"] <= k["f_rho_min_printed"]


def test_dicho_intermediates_at_seven_quarters():
    rep = dicho_threshold(1.75)
    k = rep.intermediates
    assert k["I_alpha"] == pytest.approx(0.5 * specfun.beta(1.5, 0.25), rel=1e-14)
    assert k["two_pow_d_minus_1"] == 7.0
    assert k["rho_min_printed"] == pytest.approx((21 / (10 * math.sqrt(10)) * k["I_alpha"]) ** (1 / 3) * (3 / 1.75 - 1) ** (1 / 3))
    for key in ("C_3_alpha", "I_alpha", "rho_min", "f_rho_min"):
        assert key in k
    assert rep.formula_id is FormulaId.DICHO1


def test_dicho_vanishes_near_three_halves():
    vals = [dicho_threshold(1.5 + 10.0**-k).threshold_value for k in (1, 2, 3, 4, 5)]
    assert all(x > y for x, y in zip(vals, vals[1:]))
    assert vals[-1] < 0.05 * vals[0]


def test_dicho_domain_and_verdict():
    for a in (1.5, 1.2, 2.0):
        with pytest.raises(ArgumentOutOfDomain):
            dicho_threshold(a)
    t = dicho_threshold(1.75).threshold_value
    assert dicho_threshold(1.75, coupling=0.5 * t).verdict is Status.HOLDS
    assert dicho_threshold(1.75, coupling=2 * t).verdict is Status.FAILS


# counting bound
def test_lt_bound_examples():
    assert lt_count_bound(1.5, 0.0, 1.0) == 0.0
    assert lt_count_bound(1.5, 2.0, 1.0) == pytest.approx(4 * lt_count_bound(1.5, 1.0, 1.0), rel=1e-14)
    i3 = 0.5 * math.gamma(1.5) * math.gamma(1.5) / math.gamma(3.0)
    assert i3 == pytest.approx(math.pi / 16)
    assert lt_count_bound(1.5, 1.0, 1.0) == pytest.approx(4 * math.pi * 4 * math.pi * i3, rel=1e-13)
    rep = lt_count_report(1.5, 1.0, 1.0)
    assert {"I_3", "omega_d", "L_alpha"} <= set(rep.intermediates)
    with pytest.raises(ArgumentOutOfDomain):
        lt_count_bound(1.5, 1.0, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 1.99), st.floats(1e-3, 10.0), st.floats(0.01, 10.0))
def test_lt_power_law(a, c, L):
    assert lt_count_bound(a, 2 * c, L) == pytest.approx(2 ** (3 / a) * lt_count_bound(a, c, L), rel=1e-12)
