"""Bloch-sphere parametrization of a single qubit state."""

from dataclasses import dataclass
import math

import numpy as np

from qassist.qmat import bloch_to_rho


@dataclass(frozen=True)
class BlochState:
    """Qubit state with Bloch vector r (sin t cos p, sin t sin p, cos t)."""

    r: float
    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 <= self.theta <= math.pi + 1e-12:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not math.isfinite(self.phi):
            raise ValueError("phi must be finite")

    @property
    def s(self):
        st = math.sin(self.theta)
        return np.array(
            [self.r * st * math.cos(self.phi), self.r * st * math.sin(self.phi), self.r * math.cos(self.theta)]
        )

    @property
    def rho(self):
        return bloch_to_rho(self.s)

    @classmethod
    def from_vector(cls, s):
        s = np.asarray(s, dtype=float)
        r = float(np.linalg.norm(s))
        if r > 1.0 + 1e-12:
            raise ValueError(f"|s| = {r} exceeds 1")
        if r == 0.0:
            return cls(0.0, 0.0, 0.0)
        theta = math.acos(max(-1.0, min(1.0, s[2] / r)))
        phi = math.atan2(s[1], s[0]) % (2 * math.pi)
        return cls(min(r, 1.0), theta, phi)


def project_to_ball(s):
    """Nearest point of the closed unit ball (radial rescaling)."""
    s = np.asarray(s, dtype=float)
    n = np.linalg.norm(s)
    return s / n if n > 1.0 else s.copy()


def trace_distance(s1, s2):
    return float(np.linalg.norm(np.asarray(s1) - np.asarray(s2)) / 2)


def normalized_fidelity(s_in, s_out):
    """Tr(rho sigma) / sqrt(Tr rho^2 Tr sigma^2) written in Bloch vectors."""
    s_in, s_out = np.asarray(s_in), np.asarray(s_out)
    return float((1 + s_in @ s_out) / math.sqrt((1 + s_in @ s_in) * (1 + s_out @ s_out)))
