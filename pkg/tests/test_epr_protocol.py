import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublepass.epr_protocol import (
    epr_modes,
    epr_variance_of,
    epr_variances,
    feedback_variance,
    optimal_gain,
    optimal_gain_numeric,
    spin_squeeze,
    squeeze_amplitudes,
    squeeze_parameter,
    squeezed_state,
    squeezer_maps,
    squeezing_db,
)
from doublepass.gaussian_core import symplectic_defect, symplectic_form

couplings = st.floats(0, 8)


def test_zero_coupling_is_identity():
    np.testing.assert_array_equal(squeezer_maps(0.0).S, np.eye(4))
    assert epr_variances(0.0) == (1.0, 1.0)


def test_unit_coupling_gains():
    C, S = squeeze_amplitudes(1.0)
    assert C == pytest.approx(1.6487, abs=1e-4)
    assert S == pytest.approx(1.3108, abs=1e-4)
    m = squeezer_maps(1.0)
    assert m.coefficient("atoms", "atoms")[0, 0] == C


def test_unit_coupling_epr_variances():
    squeezed, anti = epr_variances(1.0)
    assert squeezed == pytest.approx(0.114, abs=1e-3)
    assert anti == pytest.approx(8.77, abs=2e-2)


@pytest.mark.parametrize("k", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_squeezer_is_symplectic(k):
    assert symplectic_defect(squeezer_maps(k)) < 1e-10


@pytest.mark.parametrize("k", [0.0, 0.3, 1.0, 2.0, 3.0, 5.0])
def test_epr_variance_matches_closed_form(k):
    z = math.acosh(math.exp(k / 2))
    assert z == pytest.approx(squeeze_parameter(k), abs=1e-12)
    assert epr_variance_of(k) == pytest.approx(math.exp(-2 * z), abs=1e-12)


def test_epr_modes_are_canonical():
    m = epr_modes().as_matrix()
    sigma = symplectic_form(2)
    np.testing.assert_allclose(m @ sigma @ m.T, sigma, atol=1e-15)


def test_epr_mode_variances():
    k = 1.3
    state = squeezed_state(k)
    modes = epr_modes()
    sq, anti = epr_variances(k)
    # each canonical pair has one squeezed and one anti-squeezed member
    assert 2 * state.variance(modes.x1) == pytest.approx(sq, abs=1e-12)
    assert 2 * state.variance(modes.p2) == pytest.approx(sq, abs=1e-12)
    assert 2 * state.variance(modes.p1) == pytest.approx(anti, abs=1e-10)
    assert 2 * state.variance(modes.x2) == pytest.approx(anti, abs=1e-10)


def test_feedback_examples():
    assert feedback_variance(0.0, 0.0) == pytest.approx(0.5)
    res = spin_squeeze(1.0)
    assert res.var_p_fb == pytest.approx(0.5 / (2 * math.e - 1), abs=1e-12)
    assert res.var_p_fb == pytest.approx(0.1129, abs=1e-3)
    assert res.uncertainty_product == pytest.approx(0.25, abs=1e-12)


def test_optimal_gain_values():
    # closed form 2CS/(C^2+S^2); see the decisions ledger for the quoted 0.9669
    assert optimal_gain(1.0) == pytest.approx(0.974266, abs=1e-6)
    assert optimal_gain(0.0) == 0.0
    assert optimal_gain(30.0) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("k", [0.2, 1.0, 3.0])
def test_optimal_gain_matches_minimizer(k):
    assert optimal_gain_numeric(k) == pytest.approx(optimal_gain(k), abs=1e-8)


def test_squeezing_db_reference_is_vacuum():
    assert squeezing_db(0.5) == 0.0
    assert squeezing_db(0.05) == pytest.approx(-10.0)


def test_negative_coupling_rejected():
    with pytest.raises(ValueError):
        squeeze_amplitudes(-1.0)


@settings(max_examples=50, deadline=None)
@given(couplings)
def test_epr_product_is_one(k):
    sq, anti = epr_variances(k)
    assert sq * anti == pytest.approx(1.0, rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(couplings, st.floats(-2, 3))
def test_feedback_respects_uncertainty(k, g):
    res = spin_squeeze(k, g)
    assert res.uncertainty_product >= 0.25 - 1e-12
    assert res.var_p_fb >= spin_squeeze(k).var_p_fb - 1e-12


@settings(max_examples=50, deadline=None)
@given(couplings, couplings)
def test_epr_variance_monotone(k1, k2):
    lo, hi = sorted((k1, k2))
    assert epr_variance_of(hi) <= epr_variance_of(lo) + 1e-12
