import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rdmc.core import (
    ConfigError,
    CrossAbsorb2,
    GFunction,
    LotkaVolterra,
    PowerLaw2,
    Reversible,
    SpeciesParams,
)
from rdmc.reactions import (
    DomainError,
    SampleSet,
    check_cross_absorption,
    check_mass_control,
    check_quasipositivity,
    eval_family,
    make_system,
    power_law_as_cross_absorb,
    regularize,
    validate_cross_absorb,
    validate_lv,
    validate_power_law,
    validate_reversible,
)

REV = Reversible((2, 1), (1, 2), 1.0, 1.0)
LV_SIMPLE = LotkaVolterra((0.0, 0.0), ((0.0, -1.0), (1.0, 0.0)), ((1.0, 1.0), (1.0, 1.0)))
CROSS_POWER = CrossAbsorb2(GFunction("power", 1.0, 2.0), GFunction("power", 1.0, 1.5), 1.0, 1.5, 0.5)

nonneg = st.floats(0.0, 10.0, allow_nan=False)


# -- evaluation ------------------------------------------------------------


@pytest.mark.parametrize("family, s, expected", [
    (REV, (1.0, 1.0), (0.0, 0.0)),
    (REV, (2.0, 1.0), (-2.0, 2.0)),
    (LV_SIMPLE, (1.0, 2.0), (-2.0, 2.0)),
])
def test_eval_examples(family, s, expected):
    np.testing.assert_allclose(eval_family(family, np.array(s)), expected, atol=0)


def test_eval_vectorized_over_grid():
    s = np.random.default_rng(1).uniform(0, 3, size=(2, 5, 7))
    f = eval_family(REV, s)
    assert f.shape == s.shape
    np.testing.assert_allclose(f[:, 2, 3], eval_family(REV, s[:, 2, 3]))


def test_eval_rejects_negative_input():
    with pytest.raises(DomainError):
        eval_family(REV, np.array([1.0, -1e-300]))


def test_eval_rejects_wrong_species_count():
    with pytest.raises(ConfigError):
        eval_family(REV, np.ones(3))


@pytest.mark.parametrize("f, eps, expected", [
    ((-2.0, 2.0), 0.0, (-2.0, 2.0)),
    ((-2.0, 2.0), 0.25, (-1.0, 1.0)),
    ((0.0, 0.0), 0.7, (0.0, 0.0)),
])
def test_regularize_examples(f, eps, expected):
    np.testing.assert_allclose(regularize(np.array(f), eps), expected, atol=0)


def test_regularize_rejects_eps_outside_range():
    with pytest.raises(ConfigError):
        regularize(np.zeros(2), 1.0)


@settings(max_examples=200, deadline=None)
@given(f=arrays(float, 3, elements=st.floats(-1e6, 1e6)), eps=st.floats(1e-6, 0.999))
def test_regularize_bounded(f, eps):
    r = regularize(f, eps)
    assert np.all(np.abs(r) <= np.minimum(np.abs(f), 1.0 / eps) * (1 + 1e-12))


@settings(max_examples=200, deadline=None)
@given(s1=nonneg, s2=nonneg, eps=st.floats(0.0, 0.99))
def test_reversible_weighted_sum_vanishes(s1, s2, eps):
    f = eval_family(REV, np.array([s1, s2]))
    scale = np.abs(f).sum() + 1e-300
    assert abs(f.sum()) <= 1e-12 * scale
    r = regularize(f, eps)
    assert abs(r.sum()) <= 1e-12 * (np.abs(r).sum() + 1e-300)


def test_power_law_equals_cross_absorptive_form():
    fam = PowerLaw2(2.0, 1.0, 1.0, 3.0, 1.0, 0.5)
    cross = power_law_as_cross_absorb(fam)
    s = np.random.default_rng(7).uniform(0, 5, size=(2, 1000))
    a, b = eval_family(fam, s), eval_family(cross, s)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12 * np.abs(a).max())


# -- structural conditions -------------------------------------------------


@pytest.mark.parametrize("family", [
    CROSS_POWER,
    REV,
    LotkaVolterra((0.5, -1.0), ((0.0, -1.0), (1.0, 0.0)), ((1.0, 1.5), (1.0, 1.0))),
    CrossAbsorb2(GFunction("expm1", 1.0, 1.0), GFunction("slog1p", 2.0), 1.5, 1.0, 1.0),
])
def test_quasipositivity_passes(family):
    rep = check_quasipositivity(family)
    assert rep.passed and rep.worst_value >= -1e-10


def test_quasipositivity_reversible_witness_example():
    f = eval_family(REV, np.array([0.0, 3.0]))
    np.testing.assert_array_equal(f, [0.0, 0.0])


def test_quasipositivity_witness_has_a_zero_component():
    rep = check_quasipositivity(CROSS_POWER)
    assert 0.0 in rep.worst_sample
    f = eval_family(CROSS_POWER, np.array(rep.worst_sample))
    assert min(f[i] for i in range(2) if rep.worst_sample[i] == 0.0) == rep.worst_value


def test_mass_control_reversible_K_zero():
    rep = check_mass_control(REV, (1.0, 1.0))
    assert rep.estimated_K == 0.0 and rep.passed


def test_mass_control_cross_absorb_K_zero():
    rep = check_mass_control(CROSS_POWER, (1.0, 1.0))
    assert rep.estimated_K == 0.0


def test_mass_control_lv_damped():
    fam = LotkaVolterra((-1.0, -1.0), ((0.0, -1.0), (1.0, 0.0)), ((1.0, 1.5), (1.0, 1.0)))
    rep = check_mass_control(fam, (1.0, 1.0))
    assert rep.estimated_K <= 0.0 and rep.passed


def test_mass_control_with_reference_K():
    fam = LotkaVolterra((0.5, -1.0), ((0.0, -1.0), (1.0, 0.0)), ((1.0, 1.5), (1.0, 1.0)))
    rep = check_mass_control(fam, (1.0, 1.0))
    assert 0 < rep.estimated_K <= 0.5
    assert not check_mass_control(fam, (1.0, 1.0), K=0.1).passed
    assert check_mass_control(fam, (1.0, 1.0), K=0.5).passed
    assert "lower bound" in rep.to_text()


@settings(max_examples=25, deadline=None)
@given(p=st.lists(st.integers(1, 4), min_size=2, max_size=3), seed=st.integers(0, 10**6))
def test_reversible_accept_implies_zero_K(p, seed):
    q = list(reversed(p))
    m = [3.0] * len(p)
    a = [1.0] * len(p)
    if validate_reversible(p, q, m, a).accept:
        fam = Reversible(tuple(p), tuple(q), 1.0, 2.0)
        assert check_mass_control(fam, a, SampleSet(seed=seed, n_random=64)).estimated_K == 0.0


@pytest.mark.parametrize("family", [
    REV,
    CROSS_POWER,
    PowerLaw2(2.0, 1.0, 1.0, 3.0, 1.0, 0.5),
    LotkaVolterra((0.5, -1.0), ((0.0, -1.0), (1.0, 0.0)), ((1.0, 1.5), (1.0, 1.0))),
    Reversible((1, 1), (1, 1), 1.0, 1.0),
])
def test_cross_absorption_with_default_growth(family):
    m = (1.0, 1.5) if family is CROSS_POWER else (1.0, 1.0)
    sysm = make_system(family, [SpeciesParams(1.0, mi) for mi in m])
    assert check_cross_absorption(sysm).passed


def test_cross_absorption_three_species_young_split():
    fam = Reversible((2, 1, 1), (1, 1, 2), 1.0, 1.0)
    m = (2.0, 2.0, 2.0)
    assert validate_reversible(fam.p, fam.q, m, (1, 1, 1)).accept
    sysm = make_system(fam, [SpeciesParams(1.0, x) for x in m])
    assert check_cross_absorption(sysm).passed


def test_condition_report_row_columns():
    row = check_mass_control(REV, (1.0, 1.0)).to_row()
    assert list(row) == ["condition", "verdict", "worst_sample", "worst_value", "estimated_K"]


# -- validators ------------------------------------------------------------


@pytest.mark.parametrize("p, q, m, a, accept", [
    ((2, 1), (1, 2), (1, 1), (1, 1), True),
    ((3, 2), (1, 4), (1, 1), (1, 1), False),
    ((2, 3), (2, 3), (1, 1), (1, 1), True),
])
def test_validate_reversible_truth_table(p, q, m, a, accept):
    assert validate_reversible(p, q, m, a).accept is accept


def test_validate_reversible_reject_reason_names_species_one():
    v = validate_reversible((3, 2), (1, 4), (1, 1), (1, 1))
    assert any("i=1" in r and "forward" in r for r in v.reasons)


def test_validate_reversible_balance():
    v = validate_reversible((2, 1), (1, 1), (5, 5), (1, 1))
    assert not v.accept and "balance" in v.reasons[0]


def test_validate_reversible_dimension_mismatch():
    with pytest.raises(ConfigError):
        validate_reversible((1, 2), (1, 2, 3), (1, 1), (1, 1))


@pytest.mark.parametrize("A, B, m, accept", [
    (((0, -1), (1, 0)), ((1, 1.5), (1, 1)), (1, 1), True),
    (((0, -1), (1, 0)), ((1, 2.0), (1, 1)), (1, 1), False),
    (((0, 0), (0, 0)), ((1, 1), (1, 1)), (1, 1), True),
])
def test_validate_lv_truth_table(A, B, m, accept):
    assert validate_lv(A, B, m).accept is accept


def test_validate_lv_pair_sum():
    assert not validate_lv(((0, 1), (1, 0)), ((1, 1), (1, 1)), (1, 1)).accept


def test_validate_lv_dimension_mismatch():
    with pytest.raises(ConfigError):
        validate_lv(((0, 1), (1, 0)), ((1, 1),), (1, 1))


def test_validate_cross_absorb_and_power_law():
    assert validate_cross_absorb(CROSS_POWER, (1.0, 1.5)).accept
    assert not validate_cross_absorb(CROSS_POWER, (1.0, 0.4)).accept
    assert validate_power_law(PowerLaw2(2, 1, 1, 3, 1, 1), (1.5, 1.0)).accept
    assert not validate_power_law(PowerLaw2(2, 3, 1, 3, 1, 1), (1.5, 1.0)).accept
