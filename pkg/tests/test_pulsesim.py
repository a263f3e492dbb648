import math

import numpy as np
import pytest

from conftest import random_params
from qassist.evolve import propagator_analytic
from qassist.model import XyzParams
from qassist.optimize import disordered_optimum_params
from qassist.pulsesim import (
    Delay,
    Gradient,
    ModeError,
    NmrParams,
    PulseSequence,
    UnsupportedModel,
    compile_sequence,
    compile_unitary,
    decomposition_timings,
    exact_decomposition_sequence,
    gate_fidelity,
    gradient_dephase,
    rot,
    rotation_matrix,
    trotter_sequence,
    trotter_unitary,
)
from qassist.qmat import SX, SY, SZ, I2, kron, spin_op

MODEL_C, TAU_C = disordered_optimum_params("xz+")

GOLDEN_TROTTER_1 = """\
delay t=0.000581531
rot q=both axis=y angle=1.5708
delay t=0.00164482
rot q=both axis=-y angle=3.14159
delay t=0.00164482
rot q=both axis=y angle=1.5708
delay t=0.000581531"""


def test_rotation_convention():
    # [pi/2]_y takes Sz to Sx under exp(-i theta n.S)
    r = rotation_matrix(1, (0, 1, 0), math.pi / 2)
    assert np.allclose(r @ spin_op("z", 1) @ r.conj().T, spin_op("x", 1))


def test_events_applied_in_listed_order():
    seq = PulseSequence((rot(1, "x", 0.3), rot(1, "y", 0.5)))
    expected = rotation_matrix(1, (0, 1, 0), 0.5) @ rotation_matrix(1, (1, 0, 0), 0.3)
    assert np.allclose(compile_unitary(seq), expected)


def test_delay_is_nmr_evolution():
    nmr = NmrParams(100.0, -40.0, 200.0)
    h = nmr.omega1 * spin_op("z", 1) + nmr.omega2 * spin_op("z", 2) + 2 * math.pi * nmr.j12_hz * spin_op("z", 1) @ spin_op("z", 2)
    u = compile_unitary(PulseSequence((Delay(1e-3),), nmr))
    assert np.allclose(np.diag(u), np.exp(-1j * np.diag(h) * 1e-3))
    assert NmrParams.from_dict(nmr.to_dict()) == nmr


def test_event_validation():
    with pytest.raises(ValueError):
        Delay(-1.0)
    with pytest.raises(ValueError):
        rot(3, "x", 1.0)


def test_gradient_requires_channel_mode():
    seq = PulseSequence((rot(1, "x", 1.0), Gradient()))
    with pytest.raises(ModeError):
        compile_unitary(seq)
    rho = kron(I2 / 2 + SX, I2 / 2)
    out = compile_sequence(seq).apply(rho)
    assert np.allclose(out, gradient_dephase(out))
    assert np.isclose(np.trace(out), 1)


def test_gradient_keeps_zero_quantum():
    rho = np.full((4, 4), 0.1, dtype=complex)
    out = gradient_dephase(rho)
    assert out[1, 2] == 0.1 and out[0, 3] == 0 and out[0, 1] == 0


def test_trotter_sequence_matches_matrix_product():
    for m in (1, 2, 5):
        u = compile_unitary(trotter_sequence(MODEL_C, TAU_C, m))
        _, mag = gate_fidelity(u, trotter_unitary(MODEL_C, TAU_C, m))
        assert mag == pytest.approx(1.0, abs=1e-12)


def test_trotter_golden_dump():
    assert trotter_sequence(MODEL_C, TAU_C, 1).dump() == GOLDEN_TROTTER_1


def test_trotter_rejects_unsupported():
    with pytest.raises(UnsupportedModel):
        trotter_sequence(XyzParams(1, 1, 1, 1, 1), 1.0, 2)


def test_trotter_fidelity_improves_with_segments():
    exact = propagator_analytic(MODEL_C, TAU_C).u
    mags = [gate_fidelity(exact, trotter_unitary(MODEL_C, TAU_C, m))[1] for m in (2, 4, 8)]
    assert mags[0] < mags[1] < mags[2]
    assert mags[2] > 0.99999


def test_exact_decomposition_random(rng):
    for _ in range(25):
        p = random_params(rng)
        tau = rng.uniform(0.1, 4.0)
        seq = exact_decomposition_sequence(p, tau, nmr=NmrParams(300.0, -120.0, 214.95))
        _, mag = gate_fidelity(propagator_analytic(p, tau).u, compile_unitary(seq))
        assert mag == pytest.approx(1.0, abs=1e-9)
        assert all(e.duration >= 0 for e in seq.events if isinstance(e, Delay))


def test_model_c_timings():
    t = decomposition_timings(MODEL_C, TAU_C, 214.95)
    assert t.tau3 * 214.95 == pytest.approx(0.25)
    assert t.beta1 == pytest.approx(math.pi * (2 + math.sqrt(2)) / 4)
    assert t.beta2 == pytest.approx(math.pi * (2 - math.sqrt(2)) / 4)
    assert t.phase == "-x"


def test_gate_fidelity_requires_unitaries():
    with pytest.raises(ValueError):
        gate_fidelity(np.eye(4), 2 * np.eye(4))
