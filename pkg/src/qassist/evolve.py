"""Closed-form propagator exp(-i H tau) of the XYZ coupling."""

from dataclasses import dataclass
import math

import numpy as np

from qassist.model import derive, spectrum
from qassist.qmat import SMINUS, SPLUS, I4, kron, spin_op


@dataclass(frozen=True)
class Propagator:
    tau: float
    u: np.ndarray
    a1: complex
    a2: complex
    a3: complex
    a4: complex
    b: complex
    d: complex

    @property
    def coeffs(self):
        return (self.a1, self.a2, self.a3, self.a4, self.b, self.d)


def assemble(a1, a2, a3, a4, b, d):
    """Place the six coefficients: populations on the diagonal, b on the
    double-quantum pair (1,4)/(4,1), d on the zero-quantum pair (2,3)/(3,2)."""
    u = np.diag(np.array([a1, a2, a3, a4], dtype=complex))
    u[0, 3] = u[3, 0] = b
    u[1, 2] = u[2, 1] = d
    return u


def propagator_analytic(p, tau):
    tau = float(tau)
    if not math.isfinite(tau):
        raise ValueError("tau must be finite")
    d = derive(p)
    lam = spectrum(p).lambdas
    e1, e2, e3, e4 = np.exp(-1j * lam * tau)
    c1sq, s1sq = math.cos(d.theta1 / 2) ** 2, math.sin(d.theta1 / 2) ** 2
    c2sq, s2sq = math.cos(d.theta2 / 2) ** 2, math.sin(d.theta2 / 2) ** 2
    a1 = c1sq * e1 + s1sq * e4
    a2 = c2sq * e2 + s2sq * e3
    a3 = s2sq * e2 + c2sq * e3
    a4 = s1sq * e1 + c1sq * e4
    b = 0.5 * math.sin(d.theta1) * (e1 - e4)
    dd = 0.5 * math.sin(d.theta2) * (e2 - e3)
    return Propagator(
        tau=tau, u=assemble(a1, a2, a3, a4, b, dd), a1=a1, a2=a2, a3=a3, a4=a4, b=b, d=dd
    )


def propagator_components(p, tau):
    """The commuting factors (U_zz, U_0, U_2) whose product is the full propagator."""
    d = derive(p)
    z1, z2 = spin_op("z", 1), spin_op("z", 2)
    zz4 = 4 * z1 @ z2
    flip_flop = kron(SPLUS, SMINUS) + kron(SMINUS, SPLUS)
    double_flip = kron(SPLUS, SPLUS) + kron(SMINUS, SMINUS)

    u_zz = math.cos(p.jz * tau / 4) * I4 - 1j * math.sin(p.jz * tau / 4) * zz4

    c2, s2 = math.cos(d.eta2 * tau), math.sin(d.eta2 * tau)
    u_0 = (
        (1 + c2) / 2 * I4
        + (1 - c2) / 2 * zz4
        - 1j * s2 * (math.cos(d.theta2) * (z1 - z2) + math.sin(d.theta2) * flip_flop)
    )

    c1, s1 = math.cos(d.eta1 * tau), math.sin(d.eta1 * tau)
    u_2 = (
        (1 + c1) / 2 * I4
        - (1 - c1) / 2 * zz4
        - 1j * s1 * (math.cos(d.theta1) * (z1 + z2) + math.sin(d.theta1) * double_flip)
    )
    return u_zz, u_0, u_2
