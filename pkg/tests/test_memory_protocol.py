import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublepass.envelopes import ModeEnvelope, envelope_overlap
from doublepass.gaussian_core import apply_map, make_vacuum, symplectic_defect
from doublepass.memory_protocol import (
    complete_transfer_map,
    minus_mode,
    plus_mode,
    read_out_map,
    sideband_mode,
    transfer_amplitudes,
    write_in_map,
)
from doublepass.params import ApproximationWarning, ProtocolParams

KAPPA2_GRID = [0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0]


def test_zero_coupling_is_identity():
    for m in (write_in_map(0.0), read_out_map(0.0)):
        np.testing.assert_array_equal(m.S, np.eye(4))


def test_write_in_at_unit_coupling():
    m = write_in_map(1.0)
    np.testing.assert_allclose(m.row("atoms", "x")[[0, 2]], [0.6065, 0.7951], atol=1e-4)
    np.testing.assert_allclose(m.coefficient("atoms", "atoms"), math.exp(-0.5) * np.eye(2))


def test_write_in_strong_coupling():
    a, b = transfer_amplitudes(4.0)
    assert a ** 2 == pytest.approx(math.exp(-4.0))
    assert a == pytest.approx(0.135, abs=1e-3)
    assert b == pytest.approx(1.0, abs=1e-2)


def test_read_out_light_row():
    m = read_out_map(1.0)
    np.testing.assert_allclose(m.row("readout-", "x"), [-0.7951, 0, 0.6065, 0], atol=1e-4)


def test_read_out_strong_coupling_swaps_sign():
    m = read_out_map(60.0)
    np.testing.assert_allclose(m.coefficient("readout-", "atoms"), -np.eye(2), atol=1e-12)


@pytest.mark.parametrize("k, expected", [(1.0, -(1 - math.exp(-1))), (0.0, 0.0)])
def test_complete_transfer_signal_coefficient(k, expected):
    m = complete_transfer_map(k)
    np.testing.assert_allclose(m.coefficient("readout-", "signal+"), expected * np.eye(2),
                               atol=1e-15)


def test_complete_transfer_rows():
    k = 1.7
    a, b = transfer_amplitudes(k)
    m = complete_transfer_map(k)
    np.testing.assert_allclose(m.row("readout-", "x")[0::2], [-b * b, -a * b, a], atol=1e-15)


@pytest.mark.parametrize("k", KAPPA2_GRID)
def test_maps_are_symplectic(k):
    for m in (write_in_map(k), read_out_map(k), complete_transfer_map(k)):
        assert symplectic_defect(m) < 1e-12


def test_transfer_keeps_vacuum():
    m = complete_transfer_map(2.0)
    out = apply_map(make_vacuum(m.in_modes), m)
    np.testing.assert_allclose(out.cov, 0.5 * np.eye(6), atol=1e-15)


def test_transfer_amplitudes_validation():
    with pytest.raises(ValueError):
        transfer_amplitudes(-0.1)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 20))
def test_amplitudes_unitary(k):
    a, b = transfer_amplitudes(k)
    assert a * a + b * b == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 10), st.floats(0, 10))
def test_transfer_signal_monotone_in_coupling(k1, k2):
    lo, hi = sorted((k1, k2))
    s_lo = -complete_transfer_map(lo).coefficient("readout-", "signal+")[0, 0]
    s_hi = -complete_transfer_map(hi).coefficient("readout-", "signal+")[0, 0]
    assert s_hi >= s_lo - 1e-15


# envelopes and parameters


@pytest.mark.parametrize("w", [0.3, 1.0, 2.5])
def test_envelope_normalization(w):
    assert plus_mode(w).norm == pytest.approx(math.sqrt(w / math.expm1(w)), rel=1e-14)
    assert minus_mode(w).norm == pytest.approx(math.sqrt(w / -math.expm1(-w)), rel=1e-14)


@pytest.mark.parametrize("env", [plus_mode(1.0), minus_mode(2.0, "lower"), sideband_mode("upper")])
def test_discrete_modes_are_normalized_and_canonical(env):
    f = env.functionals(500)
    np.testing.assert_allclose(f @ f.T, np.eye(2), atol=1e-12)
    sigma = np.kron(np.eye(500), [[0, 1], [-1, 0]])
    assert (f[0] @ sigma @ f[1]) == pytest.approx(1.0, abs=1e-12)


def test_sidebands_are_orthogonal():
    n = 2000
    up = plus_mode(1.0, "upper").functionals(n)
    lo = plus_mode(1.0, "lower").functionals(n)
    assert np.abs(up @ lo.T).max() < 1e-2
    sigma = np.kron(np.eye(n), [[0, 1], [-1, 0]])
    assert np.abs(up @ sigma @ lo.T).max() < 1e-2
    assert envelope_overlap(plus_mode(1.0, "upper"), plus_mode(1.0, "lower")) == 0.0


def test_zero_rate_plus_mode_is_flat_sideband():
    np.testing.assert_allclose(plus_mode(1e-12).functionals(100),
                               sideband_mode().functionals(100), atol=1e-12)


def test_envelope_validation():
    with pytest.raises(ValueError):
        ModeEnvelope(0, 1.0)
    with pytest.raises(ValueError):
        ModeEnvelope(1, 1.0, "middle")


def test_params():
    p = ProtocolParams(1.0)
    assert p.larmor_periods == pytest.approx(50)
    assert p.is_commensurate and p.is_lossless
    assert p.with_(setup="squeezer").wT == pytest.approx(-1.0)
    assert ProtocolParams(1.0, eta=0.075, r=0.075).wT == pytest.approx(0.925)


@pytest.mark.parametrize("bad", [dict(kappa2=-1.0), dict(kappa2=1.0, r=0.5),
                                 dict(kappa2=1.0, eta=-0.1), dict(kappa2=1.0, n_segments=0),
                                 dict(kappa2=1.0, loop_delay_segments=-1),
                                 dict(kappa2=1.0, setup="laser")])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        ProtocolParams(**bad)


def test_slow_larmor_warns():
    with pytest.warns(ApproximationWarning):
        ProtocolParams(5.0, omega_T=2 * math.pi * 10)
