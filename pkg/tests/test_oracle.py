import numpy as np
import pytest

from mqsense import oracle as o
from mqsense.errors import ParameterError, SizeError


def _random_system(n, seed=1):
    d = np.triu(np.random.default_rng(seed).normal(size=(n, n)), 1)
    return o.SpinSystem(d + d.T)


def test_frame_hamiltonians():
    s = _random_system(3)
    assert np.allclose(o.h_z(s), o.h_dd(s), atol=1e-13)
    ix = o.collective_op(3, "x")
    assert np.allclose(o.v_full(s), 1j * o.commutator(ix, o.h_z(s)), atol=1e-13)
    assert np.allclose(o.v_full(s), -1j * o.commutator(ix, o.h_y(s)), atol=1e-13)


@pytest.mark.parametrize("delta_pulses", [True, False])
def test_toggling_average_is_double_quantum(delta_pulses):
    s = _random_system(4, seed=7)
    seq = o.eight_pulse_cycle(1.5e-6, 2.9e-6, delta_pulses=delta_pulses)
    avg = o.toggling_average(s, seq)
    assert np.abs(avg - o.h_dq(s)).max() < 1e-12 * np.abs(avg).max()


def test_cycle_timing():
    delta, tau = 1.5e-6, 2.9e-6
    finite = o.eight_pulse_cycle(delta, tau)
    assert finite.cycle_time == pytest.approx(12 * (delta + tau))
    assert finite.delta_prime == pytest.approx(2 * delta + tau)
    ideal = o.eight_pulse_cycle(delta, tau, delta_pulses=True)
    assert ideal.cycle_time == pytest.approx(12 * delta)
    w = ideal.interval_weights()
    assert w.sum() == pytest.approx(12 * delta)
    assert w[0] == pytest.approx(delta / 2) and w[-1] == pytest.approx(delta / 2)
    with pytest.raises(ParameterError):
        o.eight_pulse_cycle(0.0, tau)


def test_error_rows_from_exact_frames():
    s = _random_system(3)
    seq = o.eight_pulse_cycle(1.0, 0.1, delta_pulses=True)
    ix = o.collective_op(3, "x")
    cy = 1j / 12 * o.commutator(ix, o.h_y(s))
    cz = 1j / 12 * o.commutator(ix, o.h_z(s))
    h = 1e-6
    for k in range(8):
        e = np.zeros(8)
        e[k] = h
        plus = o.toggling_average(s, seq, e, split=True)
        minus = o.toggling_average(s, seq, -e, split=True)
        dy = (plus["y"] - minus["y"]) / (2 * h)
        dz = (plus["z"] - minus["z"]) / (2 * h)
        assert np.abs(dy - o.HERR_Y_ROW[k] * cy).max() < 1e-8
        assert np.abs(dz - o.HERR_Z_ROW[k] * cz).max() < 1e-8


def test_reference_row_differs_only_at_sixth_pulse():
    diff = np.flatnonzero(o.HERR_Y_ROW != o.HERR_Y_ROW_REFERENCE)
    assert diff.tolist() == [5]
    assert np.array_equal(o.HERR_Z_ROW, o.HERR_Z_ROW_REFERENCE)


def test_h_err_matches_first_order_average():
    s = _random_system(3)
    seq = o.eight_pulse_cycle(1.0, 0.1, delta_pulses=True)
    e = np.random.default_rng(2).normal(size=8) * 1e-6
    odd = (o.toggling_average(s, seq, e) - o.toggling_average(s, seq, -e)) / 2
    assert np.abs(odd - o.h_err(s, e)).max() < 1e-8 * np.abs(odd).max()
    w = o.jitter_weights()
    assert np.allclose(o.h_err(s, e), (w @ e) / 12 * o.v_full(s), atol=1e-15)
    assert (w ** 2).sum() == pytest.approx(50.0)


def test_floquet_hamiltonian_reproduces_cycle():
    s = _random_system(3)
    seq = o.eight_pulse_cycle(1e-6, 1e-7, delta_pulses=True)
    hf = o.floquet_hamiltonian(s, seq)
    u = o.cycle_propagator(s, seq)
    rho = np.diag(np.arange(8.0)) / 28
    assert np.allclose(o.unitary_evolve(rho, hf, seq.cycle_time), u @ rho @ u.conj().T, atol=1e-12)


def _mc_setup(n=2, d=500.0):
    s = o.SpinSystem.uniform(n, d)
    seq = o.eight_pulse_cycle(5e-6, 1e-6, delta_pulses=True)
    rho = np.zeros((2 ** n, 2 ** n), dtype=complex)
    rho[0, 0] = 1.0
    return s, seq, rho


def test_mc_without_jitter_is_unitary():
    s, seq, rho = _mc_setup()
    out = o.monte_carlo_jitter(rho, s, seq, o.JitterModel(0.0, 1e-6), 5, 2)
    u = np.linalg.matrix_power(o.cycle_propagator(s, seq), 5)
    assert np.allclose(out, u @ rho @ u.conj().T, atol=1e-12)


def test_mc_independent_of_batch_size():
    s, seq, rho = _mc_setup()
    jit = o.JitterModel(0.1 * np.pi / 2, 1e-6, seed=4)
    a = o.monte_carlo_jitter(rho, s, seq, jit, 3, 10, antithetic=True, batch_size=3)
    b = o.monte_carlo_jitter(rho, s, seq, jit, 3, 10, antithetic=True, batch_size=64)
    assert np.allclose(a, b, atol=1e-14)
    with pytest.raises(ParameterError):
        o.monte_carlo_jitter(rho, s, seq, jit, 3, 9, antithetic=True)


def test_lab_frame_kick_without_couplings():
    s, seq, rho = _mc_setup(d=0.0)
    jit = o.JitterModel(0.2 * np.pi / 2, 1e-6, seed=1)
    lab = o.monte_carlo_jitter(rho, s, seq, jit, 10, 16, frame="lab")
    tog = o.monte_carlo_jitter(rho, s, seq, jit, 10, 16, frame="toggling")
    assert np.allclose(tog, rho, atol=1e-12)
    assert o.trace_distance(lab, rho) > 1e-3


def test_mean_shift_vanishes_without_jitter():
    s = _random_system(2)
    seq = o.eight_pulse_cycle(1e-6, 1e-7, delta_pulses=True)
    assert np.abs(o.jitter_mean_shift(s, seq, 0.0)).max() == 0.0


def test_kraus_and_size_limits():
    e1, e2 = o.kraus_operators(0.3)
    assert np.allclose(e1.conj().T @ e1 + e2.conj().T @ e2, np.eye(2))
    f1, f2 = o.kraus_operators(0.3, reference=True)
    assert not np.allclose(f1.conj().T @ f1 + f2.conj().T @ f2, np.eye(2))
    with pytest.raises(SizeError):
        o.collective_op(o.MAX_SPINS + 1, "z")
    with pytest.raises(ParameterError):
        o.kraus_operators(1.5)


def test_comparison_record():
    rec = o.ComparisonRecord("multiply", 3, 1e-10, 1e-12)
    assert rec.passed and rec.to_dict()["pass"] is True
    assert not o.ComparisonRecord("multiply", 3, 1e-10, 1e-9).passed
