"""Heisenberg XYZ Hamiltonian of the system/assistant pair and its eigensystem."""

from dataclasses import asdict, dataclass
import math

import numpy as np

from qassist.qmat import SMINUS, SPLUS, kron, spin_op


@dataclass(frozen=True)
class XyzParams:
    """Fields b1, b2 along z and exchange constants jx, jy, jz (hbar = 1)."""

    b1: float = 0.0
    b2: float = 0.0
    jx: float = 0.0
    jy: float = 0.0
    jz: float = 0.0

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - {"b1", "b2", "jx", "jy", "jz"}
        if unknown:
            raise ValueError(f"unknown Hamiltonian parameters: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in d.items()})

    def to_dict(self):
        return asdict(self)

    def scaled(self, factor):
        return XyzParams(*(factor * v for v in asdict(self).values()))

    def replace(self, **changes):
        d = asdict(self)
        d.update(changes)
        return XyzParams(**d)


@dataclass(frozen=True)
class DerivedParams:
    b_avg: float  # (b1 + b2) / 2
    b_diff: float  # (b1 - b2) / 2, the product B*gamma_B
    j_avg: float  # (jx + jy) / 2
    j_diff: float  # (jx - jy) / 4, i.e. J*gamma_J / 2
    eta1: float
    eta2: float
    theta1: float
    theta2: float

    @property
    def sin2theta1(self):
        return math.sin(2 * self.theta1)

    @property
    def sin2theta2(self):
        return math.sin(2 * self.theta2)


@dataclass(frozen=True)
class Spectrum:
    lambdas: np.ndarray  # (lambda1..lambda4), positional, not sorted
    vectors: np.ndarray  # column k is psi_{k+1}


def hamiltonian_matrix(p):
    s = {(a, q): spin_op(a, q) for a in "xyz" for q in (1, 2)}
    return (
        p.b1 * s["z", 1]
        + p.b2 * s["z", 2]
        + p.jx * s["x", 1] @ s["x", 2]
        + p.jy * s["y", 1] @ s["y", 2]
        + p.jz * s["z", 1] @ s["z", 2]
    )


def hamiltonian_parts(p):
    """The three commuting pieces (H_zz, H_0, H_2) summing to the Hamiltonian."""
    d = derive(p)
    z1, z2 = spin_op("z", 1), spin_op("z", 2)
    flip_flop = kron(SPLUS, SMINUS) + kron(SMINUS, SPLUS)
    double_flip = kron(SPLUS, SPLUS) + kron(SMINUS, SMINUS)
    h_zz = p.jz * z1 @ z2
    h_0 = d.b_diff * (z1 - z2) + d.j_avg / 2 * flip_flop
    h_2 = d.b_avg * (z1 + z2) + d.j_diff * double_flip
    return h_zz, h_0, h_2


def _angle(off_diag, diag):
    # reduced to [0, 2 pi): a shift by 2 pi only flips the sign of an eigenvector
    if off_diag == 0.0 and diag == 0.0:
        return 0.0
    a = math.atan2(off_diag, diag) % (2 * math.pi)
    return 0.0 if a == 2 * math.pi else a  # tiny negative angles round up to 2 pi


def derive(p):
    b_avg = (p.b1 + p.b2) / 2
    b_diff = (p.b1 - p.b2) / 2
    j_avg = (p.jx + p.jy) / 2
    j_diff = (p.jx - p.jy) / 4
    return DerivedParams(
        b_avg=b_avg,
        b_diff=b_diff,
        j_avg=j_avg,
        j_diff=j_diff,
        eta1=math.hypot(b_avg, j_diff),
        eta2=math.hypot(b_diff, j_avg / 2),
        theta1=_angle(j_diff, b_avg),
        theta2=_angle(j_avg / 2, b_diff),
    )


def spectrum(p):
    d = derive(p)
    lambdas = np.array(
        [p.jz / 4 + d.eta1, -p.jz / 4 + d.eta2, -p.jz / 4 - d.eta2, p.jz / 4 - d.eta1]
    )
    c1, s1 = math.cos(d.theta1 / 2), math.sin(d.theta1 / 2)
    c2, s2 = math.cos(d.theta2 / 2), math.sin(d.theta2 / 2)
    vectors = np.array(
        [
            [c1, 0.0, 0.0, -s1],
            [0.0, c2, -s2, 0.0],
            [0.0, s2, c2, 0.0],
            [s1, 0.0, 0.0, c1],
        ]
    )
    return Spectrum(lambdas=lambdas, vectors=vectors)
