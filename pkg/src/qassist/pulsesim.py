"""NMR pulse-sequence simulation and realizations of the XYZ coupling.

Events are listed in the order they are applied. A rotation [theta]_nu on a
qubit is exp(-i theta n.S); free evolution uses the liquid-state Hamiltonian
omega1 Sz1 + omega2 Sz2 + 2 pi J12 Sz1 Sz2 with delays in seconds and J12 in Hz.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from qassist.evolve import propagator_analytic
from qassist.model import XyzParams, derive, spectrum
from qassist.qmat import I2, I4, SX, SY, SZ, expm_hermitian, is_unitary, kron, spin_op

DEFAULT_J12_HZ = 214.95

_NAMED_AXES = {
    "x": (1.0, 0.0, 0.0),
    "-x": (-1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
    "-z": (0.0, 0.0, -1.0),
}


class ModeError(ValueError):
    """A non-unitary event was found where a unitary was required."""


class UnsupportedModel(ValueError):
    """The Hamiltonian cannot be realized by the requested sequence."""


@dataclass(frozen=True)
class NmrParams:
    omega1: float = 0.0
    omega2: float = 0.0
    j12_hz: float = DEFAULT_J12_HZ

    def to_dict(self):
        return {"omega1": self.omega1, "omega2": self.omega2, "j12Hz": self.j12_hz}

    @classmethod
    def from_dict(cls, d):
        return cls(float(d["omega1"]), float(d["omega2"]), float(d["j12Hz"]))

    def hamiltonian_diagonal(self):
        # H_NMR is diagonal in the computational basis
        zz = 2 * math.pi * self.j12_hz / 4
        return np.array(
            [
                (self.omega1 + self.omega2) / 2 + zz,
                (self.omega1 - self.omega2) / 2 - zz,
                (-self.omega1 + self.omega2) / 2 - zz,
                -(self.omega1 + self.omega2) / 2 + zz,
            ]
        )


@dataclass(frozen=True)
class Rotation:
    qubit: object  # 1, 2 or "both"
    axis: tuple
    angle: float

    def __post_init__(self):
        if self.qubit not in (1, 2, "both"):
            raise ValueError(f"rotation target must be 1, 2 or 'both', got {self.qubit!r}")
        if not math.isfinite(self.angle):
            raise ValueError("rotation angle must be finite")
        if abs(np.linalg.norm(self.axis) - 1) > 1e-12:
            raise ValueError("rotation axis must be a unit vector")


@dataclass(frozen=True)
class Delay:
    duration: float

    def __post_init__(self):
        if not (self.duration >= 0 and math.isfinite(self.duration)):
            raise ValueError(f"delay must be finite and >= 0, got {self.duration}")


@dataclass(frozen=True)
class Gradient:
    pass


def rot(qubit, axis, angle):
    """Rotation event; axis is 'x', '-y', ... or a phase angle in the xy-plane."""
    if isinstance(axis, str):
        vec = _NAMED_AXES[axis]
    else:
        vec = (math.cos(axis), math.sin(axis), 0.0)
    return Rotation(qubit, vec, float(angle))


@dataclass(frozen=True)
class PulseSequence:
    events: tuple = ()
    nmr: NmrParams = field(default_factory=NmrParams)

    def __add__(self, other):
        return PulseSequence(tuple(self.events) + tuple(other.events), self.nmr)

    def dump(self):
        return "\n".join(_format_event(e) for e in self.events)


def _axis_name(vec):
    for name, v in _NAMED_AXES.items():
        if np.allclose(vec, v, atol=1e-15):
            return name
    return f"phase:{math.atan2(vec[1], vec[0]):.6g}"


def _format_event(e):
    if isinstance(e, Rotation):
        return f"rot q={e.qubit} axis={_axis_name(e.axis)} angle={e.angle:.6g}"
    if isinstance(e, Delay):
        return f"delay t={e.duration:.6g}"
    return "grad"


def rotation_matrix(qubit, axis, angle):
    nx, ny, nz = axis
    single = expm_hermitian(nx * SX + ny * SY + nz * SZ, angle)
    if qubit == 1:
        return kron(single, I2)
    if qubit == 2:
        return kron(I2, single)
    return kron(single, single)


def delay_matrix(nmr, duration):
    return np.diag(np.exp(-1j * nmr.hamiltonian_diagonal() * duration))


def gradient_dephase(rho):
    """Zero every element whose coherence order is nonzero."""
    rho = np.array(rho, dtype=complex)
    m = np.array([1, 0, 0, -1])  # total Sz of |00>,|01>,|10>,|11>
    rho[m[:, None] != m[None, :]] = 0.0
    return rho


@dataclass(frozen=True)
class UnitaryChannel:
    u: np.ndarray

    def apply(self, rho):
        return self.u @ rho @ self.u.conj().T


@dataclass(frozen=True)
class DephasingChannel:
    """Composite map: unitary blocks separated by gradient dephasing."""

    steps: tuple  # ndarray (unitary) or None (gradient), in application order

    def apply(self, rho):
        for step in self.steps:
            rho = gradient_dephase(rho) if step is None else step @ rho @ step.conj().T
        return rho


def event_matrix(event, nmr):
    if isinstance(event, Rotation):
        return rotation_matrix(event.qubit, event.axis, event.angle)
    if isinstance(event, Delay):
        return delay_matrix(nmr, event.duration)
    raise ModeError("gradient has no unitary matrix")


def compile_sequence(seq, unitary_only=False):
    steps = []
    current = I4.copy()
    for event in seq.events:
        if isinstance(event, Gradient):
            if unitary_only:
                raise ModeError("sequence contains a gradient but a unitary was requested")
            steps.extend([current, None])
            current = I4.copy()
        else:
            current = event_matrix(event, seq.nmr) @ current
    if not steps:
        return UnitaryChannel(current)
    steps.append(current)
    return DephasingChannel(tuple(steps))


def compile_unitary(seq):
    return compile_sequence(seq, unitary_only=True).u


def gate_fidelity(u, v):
    """Tr(u^dagger v) / 4 and its magnitude."""
    u, v = np.asarray(u), np.asarray(v)
    if not (is_unitary(u, 1e-8) and is_unitary(v, 1e-8)):
        raise ValueError("gate_fidelity requires unitary inputs")
    raw = complex(np.trace(u.conj().T @ v) / u.shape[0])
    return raw, abs(raw)


def split_z_xy(p):
    """(H_z + H_zz, H_xy) split of the coupling Hamiltonian."""
    z1, z2 = spin_op("z", 1), spin_op("z", 2)
    h_z = p.b1 * z1 + p.b2 * z2 + p.jz * z1 @ z2
    h_xy = p.jx * spin_op("x", 1) @ spin_op("x", 2) + p.jy * spin_op("y", 1) @ spin_op("y", 2)
    return h_z, h_xy


def trotter_segment(p, dt):
    """U_z(dt/2) U_xy(dt) U_z(dt/2) from exact sub-propagators."""
    h_z, h_xy = split_z_xy(p)
    half = expm_hermitian(h_z, dt / 2)
    return half @ expm_hermitian(h_xy, dt) @ half


def trotter_unitary(p, tau, m):
    return np.linalg.matrix_power(trotter_segment(p, tau / m), m)


def trotter_sequence(p, tau, m, j12_hz=DEFAULT_J12_HZ):
    """m repetitions of the refocused segment realizing an XZ-type coupling.

    Needs jy = 0 and jx, jz > 0: the z part runs as free precession with
    offsets omega_k = 2 pi J12 b_k / jz, the Sx Sx part as a refocused J
    evolution sandwiched between [pi/2]_y pulses.
    """
    if m < 1:
        raise ValueError("number of segments must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    if p.jy != 0 or p.jx <= 0 or p.jz <= 0:
        raise UnsupportedModel("Trotter sequence needs jy = 0, jx > 0 and jz > 0")
    dt = tau / m
    two_pi_j = 2 * math.pi * j12_hz
    nmr = NmrParams(omega1=two_pi_j * p.b1 / p.jz, omega2=two_pi_j * p.b2 / p.jz, j12_hz=j12_hz)
    d1 = p.jz * dt / (2 * two_pi_j)
    d2 = p.jx * dt / two_pi_j
    segment = (
        Delay(d1),
        rot("both", "y", math.pi / 2),
        Delay(d2 / 2),
        rot("both", "-y", math.pi),
        Delay(d2 / 2),
        rot("both", "y", math.pi / 2),
        Delay(d1),
    )
    return PulseSequence(segment * m, nmr)


@dataclass(frozen=True)
class DecompositionTimings:
    tau1: float
    tau2: float
    tau3: float
    beta1: float
    beta2: float
    phase: str  # axis of the qubit-2 pulses that set the sign of theta1 - theta2


def _rotation_block(theta1, theta2, j12_hz):
    """Events realizing the eigenvector rotation R(theta1, theta2), angles in [0, 2 pi)."""
    two_pi_j = 2 * math.pi * j12_hz
    tau1 = abs(theta1 - theta2) / two_pi_j
    tau2 = abs(theta1 + theta2) / two_pi_j
    phase = "x" if theta1 > theta2 else "-x"
    events = (
        rot(1, "-y", math.pi / 2),
        rot(2, phase, math.pi / 2),
        Delay(tau1 / 2),
        rot(1, "y", math.pi),
        rot(2, "-x", math.pi),
        Delay(tau1 / 2),
        rot(1, "-x", math.pi / 2),
        rot(2, "y", math.pi / 2),
        Delay(tau2 / 2),
        rot(1, "x", math.pi),
        rot(2, "-y", math.pi),
        Delay(tau2 / 2),
        rot(1, "-x", math.pi / 2),
        rot(1, "-y", math.pi / 2),
        rot(2, "y", math.pi / 2),
        rot(2, phase, math.pi / 2),
    )
    return events, tau1, tau2, phase


def decomposition_timings(p, tau, j12_hz=DEFAULT_J12_HZ):
    d = derive(p)
    _, tau1, tau2, phase = _rotation_block(d.theta1, d.theta2, j12_hz)
    l1, l2, l3, l4 = spectrum(p).lambdas
    # exp(-i phi Sz Sz) is 4 pi periodic up to a global phase, so the J delay
    # angle is reduced to [0, 4 pi) to keep the delay non-negative
    zz_angle = ((l1 - l2 - l3 + l4) * tau) % (4 * math.pi)
    return DecompositionTimings(
        tau1=tau1,
        tau2=tau2,
        tau3=zz_angle / (2 * math.pi * j12_hz),
        beta1=(l1 + l2 - l3 - l4) * tau / 2,
        beta2=(l1 - l2 + l3 - l4) * tau / 2,
        phase=phase,
    )


def exact_decomposition_sequence(p, tau, j12_hz=DEFAULT_J12_HZ, nmr=None):
    """R^dagger, then the diagonal evolution, then R; exact up to a global phase.

    Chemical shifts are refocused inside every delay, so any offsets in `nmr`
    give the same unitary.
    """
    if j12_hz <= 0:
        raise ValueError("J12 must be positive")
    nmr = nmr or NmrParams(0.0, 0.0, j12_hz)
    d = derive(p)
    t = decomposition_timings(p, tau, nmr.j12_hz)
    r_block, *_ = _rotation_block(d.theta1, d.theta2, nmr.j12_hz)
    # R^dagger = -R(2 pi - theta1, 2 pi - theta2): same pulse train, forward delays only
    r_dag_block, *_ = _rotation_block(
        (-d.theta1) % (2 * math.pi), (-d.theta2) % (2 * math.pi), nmr.j12_hz
    )
    diag_block = (
        Delay(t.tau3 / 2),
        rot("both", "x", math.pi),
        Delay(t.tau3 / 2),
        rot("both", "-x", math.pi / 2),
        rot(1, "-y", t.beta1),
        rot(2, "-y", t.beta2),
        rot("both", "-x", math.pi / 2),
    )
    return PulseSequence(r_dag_block + diag_block + r_block, nmr)
