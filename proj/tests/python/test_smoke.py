import math

import pytest

import rismimo as rm


def test_peak_rate_and_power_saving():
    assert rm.peak_rate(rm.prototype_frame()) == pytest.approx(5.17e9, rel=0.03)
    assert rm.power_saving(15.8, 25.6) == pytest.approx(0.3828, abs=1e-3)


def test_fspl_and_evm():
    assert rm.path_loss_fspl(1.0, 26.0) == pytest.approx(60.74, abs=0.01)
    assert rm.evm_closed_form(25.0, 0.0) == pytest.approx(0.0562, rel=1e-3)
    sim = rm.simulate_evm(25.0, 0.03, rm.Modulation.QAM64, 200000, 1)
    assert sim == pytest.approx(rm.evm_closed_form(25.0, 0.03), rel=0.02)


def test_element_targets():
    c = rm.design_element_circuit()
    assert abs(rm.reflection(c, rm.DiodeState.ON)) >= 0.85
    assert abs(rm.reflection(c, rm.DiodeState.OFF)) >= 0.85
    assert abs(abs(rm.phase_difference(c)) - 180.0) <= 5.0


def test_dual_stream_order():
    r = rm.dual_stream_sinr()
    assert r["sinr_v_db"] < r["sinr_h_db"]


def test_assembly_and_beam():
    a = rm.prototype_assembly()
    assert a.element_count == 1024
    assert a.group_count == 512
    p = rm.required_phase(a, 0, rm.Direction(10, 0))
    assert 0.0 <= p < 360.0
    states = rm.codeword_states(a, rm.Direction(0, 0))
    assert len(states) == 512 and set(states) <= {0, 1}
    g = rm.beam_gain(a, rm.Direction(0, 0), step_deg=1.0)
    assert 19.2 <= g["gain_dbi"] <= 25.2


def test_errors_map_to_value_error():
    with pytest.raises(ValueError):
        rm.path_loss_fspl(0.0, 26.0)
    with pytest.raises(rm.ConfigError):
        rm.power_saving(1.0, 0.0)
    assert math.isfinite(rm.directivity_upper_bound_dbi(0.0256, 26.0))
