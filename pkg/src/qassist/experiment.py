"""Simulated tomography runs: preparation, coupling, noisy readout, inversion."""

from dataclasses import dataclass, field
import math

import numpy as np

from qassist.bloch import BlochState, normalized_fidelity, trace_distance
from qassist.evolve import propagator_analytic
from qassist.pulsesim import (
    DEFAULT_J12_HZ,
    Gradient,
    PulseSequence,
    UnsupportedModel,
    compile_sequence,
    compile_unitary,
    exact_decomposition_sequence,
    gradient_dephase,
    rot,
    rotation_matrix,
    trotter_sequence,
    trotter_unitary,
)
from qassist.qmat import I2, SZ, bloch_to_rho, kron, rho_to_bloch, partial_trace_assistant
from qassist.transfer import (
    AssistantState,
    JointProbabilities,
    SingularTransfer,
    X_PROJECTORS,
    abs_delta_analytic,
    error_coefficients,
    reconstruct,
    transfer_matrix,
)

# Initial states tracked in the entanglement curves: (r, theta, phi)
CURVE_STATES = (
    BlochState(1.0, math.pi / 2, 0.0),
    BlochState(1.0, math.pi / 2, math.pi / 2),
    BlochState(1.0, 0.0, 0.0),
    BlochState(0.8, math.pi / 4, math.pi / 6),
)

SY1SY2_4 = kron(2 * np.array([[0, -1j], [1j, 0]]) / 2, 2 * np.array([[0, -1j], [1j, 0]]) / 2)


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = "none"  # "none" | "gaussian" | "shots"
    sigma: float = 0.0
    shots: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "shots"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind == "gaussian" and not self.sigma >= 0:
            raise ValueError("sigma must be >= 0")
        if self.kind == "shots" and self.shots < 1:
            raise ValueError("shot count must be >= 1")

    @classmethod
    def parse(cls, text, seed=0):
        """'none', 'gaussian:<sigma>' or 'shots:<n>'."""
        kind, _, arg = text.partition(":")
        if kind == "none" and not arg:
            return cls(seed=seed)
        if kind == "gaussian" and arg:
            return cls("gaussian", sigma=float(arg), seed=seed)
        if kind == "shots" and arg:
            return cls("shots", shots=int(arg), seed=seed)
        raise ValueError(f"cannot parse noise spec {text!r}")

    def with_seed(self, seed):
        return NoiseSpec(self.kind, self.sigma, self.shots, seed)


@dataclass(frozen=True)
class Method:
    kind: str = "analytic"  # "analytic" | "trotter" | "exact"
    segments: int = 2

    @classmethod
    def parse(cls, text):
        kind, _, arg = text.partition(":")
        if kind in ("analytic", "exact") and not arg:
            return cls(kind)
        if kind == "trotter":
            m = int(arg) if arg else 2
            if m < 1:
                raise ValueError("trotter needs at least one segment")
            return cls("trotter", m)
        raise ValueError(f"unknown method {text!r}")

    def __str__(self):
        return f"trotter:{self.segments}" if self.kind == "trotter" else self.kind


@dataclass(frozen=True)
class TomographyConfig:
    params: object
    tau: float
    epsilon: float = 0.0
    method: Method = field(default_factory=Method)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    j12_hz: float = DEFAULT_J12_HZ


@dataclass(frozen=True)
class SweepRecord:
    state: BlochState
    s_exp: np.ndarray
    fidelity: float
    distance: float

    def row(self):
        st = self.state
        return [st.r, st.theta, st.phi, *st.s, *self.s_exp, self.fidelity, self.distance]


SWEEP_COLUMNS = ["r", "theta", "phi", "sx_in", "sy_in", "sz_in", "sx_out", "sy_out", "sz_out", "fidelity", "distance"]


@dataclass(frozen=True)
class SweepResult:
    records: list
    f_av: float  # phi over [0, 2 pi]
    d_av: float
    f_av_half: float  # phi over [0, pi]: the 9 x 13 count
    d_av_half: float


def derived_seed(seed, index):
    return np.random.SeedSequence([int(seed), int(index)])


def prepare_direct(state, epsilon):
    return kron(state.rho, AssistantState(epsilon).rho)


def preparation_sequence(state):
    return PulseSequence(
        (
            rot(1, "y", math.acos(state.r)),
            rot(2, "y", math.pi / 2),
            Gradient(),
            rot(1, state.phi + math.pi / 2, state.theta),
        )
    )


def prepare_by_sequence(state):
    """Run the preparation pulses on the reference |0><0| (x) 1/2."""
    reference = kron(I2 / 2 + SZ, I2 / 2)
    return compile_sequence(preparation_sequence(state)).apply(reference)


def pair_probabilities(rho_pair):
    return np.array([np.trace(p @ rho_pair).real for p in X_PROJECTORS])


def measure(rho0, u, noise=NoiseSpec()):
    u = getattr(u, "u", u)
    exact = pair_probabilities(u @ rho0 @ u.conj().T)
    return JointProbabilities.from_array(apply_noise(exact, noise))


def apply_noise(p, noise, seed=None):
    if noise.kind == "none":
        return np.array(p, dtype=float)
    rng = np.random.default_rng(noise.seed if seed is None else seed)
    if noise.kind == "gaussian":
        noisy = p + rng.normal(0.0, noise.sigma, size=4)
        return noisy / noisy.sum()
    weights = np.clip(p, 0.0, None)
    counts = rng.multinomial(noise.shots, weights / weights.sum())
    return counts / noise.shots


READOUT = PulseSequence((rot("both", "-y", math.pi / 2), Gradient()))


def readout_amplitudes(rho_tau):
    """Proton/carbon line amplitudes after the x-to-z readout and the populations
    recovered from them (plus normalization) by least squares."""
    dephased = compile_sequence(READOUT).apply(rho_tau)
    pops = np.real(np.diag(dephased))
    p11, p12, p21, p22 = pops
    proton = np.array([p11 - p21, p12 - p22])
    carbon = np.array([p11 - p12, p21 - p22])
    a = np.array(
        [[1, 0, -1, 0], [0, 1, 0, -1], [1, -1, 0, 0], [0, 0, 1, -1], [1, 1, 1, 1]], dtype=float
    )
    y = np.concatenate([proton, carbon, [1.0]])
    solved, *_ = np.linalg.lstsq(a, y, rcond=None)
    return proton, carbon, solved


def realized_unitary(config):
    """The coupling propagator as actually applied by the chosen method."""
    p, tau, m = config.params, config.tau, config.method
    if m.kind == "analytic":
        return propagator_analytic(p, tau).u
    if m.kind == "trotter":
        try:
            return compile_unitary(trotter_sequence(p, tau, m.segments, config.j12_hz))
        except UnsupportedModel:
            return trotter_unitary(p, tau, m.segments)
    return compile_unitary(exact_decomposition_sequence(p, tau, config.j12_hz))


def design_transfer_matrix(config):
    return transfer_matrix(AssistantState(config.epsilon), propagator_analytic(config.params, config.tau))


def _run(state, config, u, tm, seed):
    rho0 = prepare_direct(state, config.epsilon)
    exact = pair_probabilities(u @ rho0 @ u.conj().T)
    probs = apply_noise(exact, config.noise, seed)
    s_exp = reconstruct(probs, tm).s
    s_in = state.s
    return SweepRecord(
        state=state,
        s_exp=s_exp,
        fidelity=normalized_fidelity(s_in, s_exp),
        distance=trace_distance(s_in, s_exp),
    )


def run_tomography(state, config, seed=None):
    """Prepare, couple, read out and invert with the designed (analytic) map."""
    tm = design_transfer_matrix(config)
    return _run(state, config, realized_unitary(config), tm, seed)


def conventional_tomography(state):
    return rho_to_bloch(state.rho)


def bloch_grid(r_values, theta_step=math.pi / 8, phi_step=math.pi / 12):
    n_theta = round(math.pi / theta_step)
    n_phi = round(2 * math.pi / phi_step)
    return [
        BlochState(r, i * theta_step, j * phi_step)
        for r in r_values
        for i in range(n_theta + 1)
        for j in range(n_phi + 1)
    ]


def sweep_bloch_grid(config, r_values, theta_step=math.pi / 8, phi_step=math.pi / 12):
    tm = design_transfer_matrix(config)
    u = realized_unitary(config)
    states = bloch_grid(r_values, theta_step, phi_step)
    records = [
        _run(st, config, u, tm, derived_seed(config.noise.seed, i)) for i, st in enumerate(states)
    ]
    half = [rec for rec in records if rec.state.phi <= math.pi + 1e-12]
    return SweepResult(
        records=records,
        f_av=float(np.mean([rec.fidelity for rec in records])),
        d_av=float(np.mean([rec.distance for rec in records])),
        f_av_half=float(np.mean([rec.fidelity for rec in half])),
        d_av_half=float(np.mean([rec.distance for rec in half])),
    )


def concurrence(rho):
    """Wootters concurrence of a two-qubit density matrix."""
    rho = np.asarray(rho)
    tilde = SY1SY2_4 @ rho.conj() @ SY1SY2_4
    ev = np.linalg.eigvals(rho @ tilde)
    chi = np.sort(np.sqrt(np.clip(ev.real, 0.0, None)))[::-1]
    return float(max(0.0, chi[0] - chi[1] - chi[2] - chi[3]))


def evolved_concurrence(state, params, tau):
    u = propagator_analytic(params, tau).u
    rho0 = prepare_direct(state, 0.0)
    return concurrence(u @ rho0 @ u.conj().T)


@dataclass(frozen=True)
class CurvePoint:
    tau: float
    abs_delta: float
    error_coeff: float
    product: float
    concurrences: tuple


CURVE_COLUMNS = ["tau", "abs_delta", "error_coeff", "product", "c_state1", "c_state2", "c_state3", "c_state4"]


def tau_grid(tau_max, steps):
    """`steps` points on (0, tau_max], endpoint included."""
    return [tau_max * (k + 1) / steps for k in range(steps)]


def delta_error_curve(params, epsilon, taus, states=CURVE_STATES):
    points = []
    xi = AssistantState(epsilon)
    for tau in taus:
        prop = propagator_analytic(params, tau)
        tm = transfer_matrix(xi, prop)
        try:
            e = error_coefficients(tm, threshold=1e-12)[3]
        except SingularTransfer:
            e = math.inf
        cs = []
        for st in states:
            rho0 = prepare_direct(st, epsilon)
            cs.append(concurrence(prop.u @ rho0 @ prop.u.conj().T))
        points.append(
            CurvePoint(
                tau=float(tau),
                abs_delta=tm.abs_delta,
                error_coeff=e,
                product=e * tm.abs_delta if math.isfinite(e) else math.inf,
                concurrences=tuple(cs),
            )
        )
    return points


def reduced_bloch(rho_pair):
    return rho_to_bloch(partial_trace_assistant(rho_pair))
