"""The measurement map from qubit state to joint x-x outcome probabilities.

The pair starts in rho (x) xi with xi = 1/2 + eps S_z, evolves under U and is
measured with the factorized projectors (1/2 + S_x) / (1/2 - S_x) on each
qubit. The four outcome probabilities are linear in rho; the 4x4 matrix of
that map is inverted to recover the Bloch vector.
"""

from dataclasses import dataclass
import math

import numpy as np

from qassist.evolve import Propagator, propagator_analytic
from qassist.model import derive
from qassist.qmat import I2, SX, SZ, kron

SINGULAR_THRESHOLD = 1e-6

# (1, sx, sy, sz) -> 2 * (rho11, rho12, rho21, rho22)
BLOCH_TO_ELEMENTS = np.array(
    [[1, 0, 0, 1], [0, 1, -1j, 0], [0, 1, 1j, 0], [1, 0, 0, -1]], dtype=complex
)


class SingularTransfer(ValueError):
    """The transfer matrix is (numerically) not invertible."""


@dataclass(frozen=True)
class AssistantState:
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def rho(self):
        return I2 / 2 + self.epsilon * SZ


@dataclass(frozen=True)
class JointProbabilities:
    p11: float
    p12: float
    p21: float
    p22: float

    def as_array(self):
        return np.array([self.p11, self.p12, self.p21, self.p22])

    @classmethod
    def from_array(cls, a):
        return cls(*(float(x) for x in a))

    def to_dict(self):
        return {"p11": self.p11, "p12": self.p12, "p21": self.p21, "p22": self.p22}

    @classmethod
    def from_dict(cls, d):
        missing = {"p11", "p12", "p21", "p22"} - set(d)
        if missing:
            raise ValueError(f"missing probabilities: {sorted(missing)}")
        return cls(float(d["p11"]), float(d["p12"]), float(d["p21"]), float(d["p22"]))


@dataclass(frozen=True)
class TransferMatrix:
    m: np.ndarray  # (rho11, rho12, rho21, rho22) -> (P11, P12, P21, P22)
    m_tilde: np.ndarray  # (1, sx, sy, sz) -> P
    delta: complex
    abs_delta: float


@dataclass(frozen=True)
class Reconstruction:
    s: np.ndarray
    nonphysical: bool


def _projectors(axis_op):
    plus, minus = I2 / 2 + axis_op, I2 / 2 - axis_op
    return [kron(a, b) for a in (plus, minus) for b in (plus, minus)]


X_PROJECTORS = _projectors(SX)
_Z_PROJECTORS = _projectors(SZ)


def _unitary(u):
    return u.u if isinstance(u, Propagator) else np.asarray(u)


def _probabilities(rho_pair, u, projectors=X_PROJECTORS):
    evolved = u @ rho_pair @ u.conj().T
    return np.array([np.trace(p @ evolved) for p in projectors])


def joint_probabilities(rho, xi, u):
    """Exact P_kq for system state rho (2x2), assistant xi and propagator u."""
    p = _probabilities(kron(rho, xi.rho), _unitary(u))
    return JointProbabilities.from_array(p.real)


def _map_matrix(xi, u, projectors=X_PROJECTORS):
    u = _unitary(u)
    cols = []
    for i, j in ((0, 0), (0, 1), (1, 0), (1, 1)):
        e = np.zeros((2, 2), dtype=complex)
        e[i, j] = 1.0
        cols.append(_probabilities(kron(e, xi.rho), u, projectors))
    return np.column_stack(cols)


def transfer_matrix(xi, u):
    m = _map_matrix(xi, u)
    delta = complex(np.linalg.det(m))
    m_tilde = 0.5 * m @ BLOCH_TO_ELEMENTS
    return TransferMatrix(m=m, m_tilde=m_tilde, delta=delta, abs_delta=abs(delta))


def z_observable_map(xi, u):
    """Map obtained when both qubits are read out along z instead of x.

    Diagnostic only: the z-projectors live entirely in the subspace that the
    coupling cannot connect to single-quantum coherences, so this map is
    always rank deficient.
    """
    return _map_matrix(xi, u, _Z_PROJECTORS)


def design_transfer(p, tau, epsilon):
    return transfer_matrix(AssistantState(epsilon), propagator_analytic(p, tau))


def abs_delta_analytic(p, tau, epsilon):
    d = derive(p)
    return abs_delta_from_angles(
        d.eta1 * tau, d.eta2 * tau, d.theta1, d.theta2, p.jz * tau, epsilon
    )


def abs_delta_from_angles(eta1_tau, eta2_tau, theta1, theta2, jz_tau, epsilon):
    """|Delta| as a function of the dimensionless angles. Accepts numpy arrays."""
    s1sq = np.sin(eta1_tau) ** 2
    s2sq = np.sin(eta2_tau) ** 2
    a = np.sin(2 * theta1) * s1sq
    b = np.sin(2 * theta2) * s2sq
    mixed = (1 - 2 * np.sin(theta1) ** 2 * s1sq) * np.sin(theta2) * np.sin(2 * eta2_tau) - (
        1 - 2 * np.sin(theta2) ** 2 * s2sq
    ) * np.sin(theta1) * np.sin(2 * eta1_tau)
    value = (1 - epsilon**2) * np.sin(-jz_tau) * (a**2 - b**2) + 2 * epsilon * (a + b) * mixed
    return np.abs(value) / 32


def _check_invertible(tm, threshold):
    if not tm.abs_delta > threshold:
        raise SingularTransfer(
            f"|Delta| = {tm.abs_delta:.3e} is at or below the threshold {threshold:.0e}"
        )


def reconstruct(probs, tm, threshold=SINGULAR_THRESHOLD):
    """Invert the transfer map; returns the raw (possibly unphysical) Bloch vector."""
    _check_invertible(tm, threshold)
    p = probs.as_array() if isinstance(probs, JointProbabilities) else np.asarray(probs, float)
    x = np.linalg.solve(tm.m_tilde, p.astype(complex))
    s = x[1:].real
    return Reconstruction(s=s, nonphysical=bool(np.linalg.norm(s) > 1 + 1e-6))


def _cofactor(a, k, j):
    minor = np.delete(np.delete(a, k, axis=0), j, axis=1)
    return (-1) ** (k + j) * np.linalg.det(minor)


def _real_cofactor_columns(tm, threshold):
    _check_invertible(tm, threshold)
    mt = tm.m_tilde
    det = np.linalg.det(mt)
    cof = np.array([[_cofactor(mt, k, j) for j in (1, 2, 3)] for k in range(4)])
    scaled = cof / det
    if np.max(np.abs(scaled.imag)) > 1e-8 * max(1.0, np.max(np.abs(scaled.real))):
        raise ArithmeticError("cofactor ratios are not real; m_tilde is not a real map")
    return scaled.real  # row k, column nu: d s_nu / d P_k


def equal_shift_response(tm, threshold=1e-12):
    """Change of (s_x, s_y, s_z) per unit shift applied equally to all four P.

    Signed column sums of the cofactors over det(m_tilde). For a completely
    disordered assistant this vanishes identically: a uniform shift only
    changes the trace.
    """
    return tuple(float(v) for v in _real_cofactor_columns(tm, threshold).sum(axis=0))


def error_coefficients(tm, threshold=1e-12):
    """(E_x, E_y, E_z, E) for independent errors of size |dP| on each outcome.

    E_nu is the root-sum-square of the cofactors in column nu over
    |det(m_tilde)|, so the expected trace distance is about E |dP|.
    """
    cols = _real_cofactor_columns(tm, threshold)
    ex, ey, ez = np.sqrt((cols**2).sum(axis=0))
    return float(ex), float(ey), float(ez), 0.5 * math.sqrt(ex * ex + ey * ey + ez * ez)
