"""Maximizing |Delta| and the closed-form optimal couplings; singular manifolds."""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from qassist.model import XyzParams, derive
from qassist.transfer import abs_delta_analytic, abs_delta_from_angles

PURE_OPTIMUM = 1 / (12 * math.sqrt(3))
DISORDERED_OPTIMUM = 1 / 32
GAMMA_LOW = 0.5 - math.sqrt(3) / 6
GAMMA_HIGH = 0.5 + math.sqrt(3) / 6
SEARCH_HALF_WIDTH = 4 * math.pi


@dataclass(frozen=True)
class OptimizationResult:
    params: XyzParams
    tau: float
    epsilon: float
    abs_delta: float
    evaluations: int
    converged: bool

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "tau": self.tau,
            "epsilon": self.epsilon,
            "absDelta": self.abs_delta,
            "converged": self.converged,
            "evaluations": self.evaluations,
        }


def _abs_delta_products(x, epsilon):
    """|Delta| from tau-scaled products (B, B gB, J, J gJ, Jz) * tau; x has shape (..., 5)."""
    x = np.asarray(x, dtype=float)
    b, bg, j, jg, jz = np.moveaxis(x, -1, 0)
    eta1 = np.hypot(b, jg / 2)
    eta2 = np.hypot(bg, j / 2)
    theta1 = np.arctan2(jg / 2, b)
    theta2 = np.arctan2(j / 2, bg)
    return abs_delta_from_angles(eta1, eta2, theta1, theta2, jz, epsilon)


def _products_to_params(x, tau):
    b, bg, j, jg, jz = (float(v) / tau for v in x)
    return XyzParams(b1=b + bg, b2=b - bg, jx=j + jg, jy=j - jg, jz=jz)


def maximize_delta(epsilon, tau_fixed=None, seed=0, budget=200_000, n_coarse=8192, n_starts=24):
    """Quasi-random global sampling followed by Nelder-Mead refinement.

    |Delta| depends on the Hamiltonian only through its products with tau, so
    the search runs over those five products in [-4 pi, 4 pi]; tau itself is
    either fixed or drawn with the winning coarse sample.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if budget < 1000:
        raise ValueError("budget must be at least 1000 evaluations")
    if tau_fixed is not None and not tau_fixed > 0:
        raise ValueError("tau must be positive")
    # Sobol points keep their balance only in powers of two
    n_coarse = 1 << int(math.log2(min(n_coarse, budget // 2)))
    sampler = qmc.Sobol(d=6, scramble=True, seed=np.random.default_rng([seed, 0]))
    unit = sampler.random(n_coarse)
    x0 = (2 * unit[:, :5] - 1) * SEARCH_HALF_WIDTH
    taus = 2 * math.pi * (1 - unit[:, 5])  # (0, 2 pi]
    values = _abs_delta_products(x0, epsilon)
    evaluations = n_coarse

    order = np.argsort(-values, kind="stable")
    best_x, best_val, best_tau, converged = x0[order[0]], values[order[0]], taus[order[0]], False

    def negative(x):
        return -float(_abs_delta_products(x, epsilon))

    for idx in order[:n_starts]:
        remaining = budget - evaluations
        if remaining < 50:
            break
        res = minimize(
            negative,
            x0[idx],
            method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": 1e-15, "maxfev": min(remaining, 20_000), "adaptive": False},
        )
        evaluations += res.nfev
        if -res.fun > best_val:
            best_x, best_val, best_tau, converged = res.x, -res.fun, taus[idx], bool(res.success)

    tau = float(tau_fixed) if tau_fixed is not None else float(best_tau)
    params = _products_to_params(best_x, tau)
    return OptimizationResult(
        params=params,
        tau=tau,
        epsilon=float(epsilon),
        abs_delta=float(abs_delta_analytic(params, tau, epsilon)),
        evaluations=int(evaluations),
        converged=converged,
    )


def delta_max_curve(epsilons, seed=0, budget=200_000):
    return [maximize_delta(eps, seed=seed, budget=budget) for eps in epsilons]


@dataclass(frozen=True)
class PureOptimumSpec:
    """Closed-form optimum for a fully polarized assistant.

    signs = (eta1 branch, eta2 branch, field sign, coupling sign). The signs of
    B*gamma_B and J*gamma_J are tied to the others: an independent choice
    does not reach the optimum.
    """

    gamma1: float = GAMMA_HIGH
    gamma2: float = GAMMA_LOW
    m: int = 0
    signs: tuple = (1, 1, 1, 1)

    def __post_init__(self):
        pair = (self.gamma1, self.gamma2)
        ok = any(
            abs(pair[0] - a) < 1e-12 and abs(pair[1] - b) < 1e-12
            for a, b in ((GAMMA_LOW, GAMMA_HIGH), (GAMMA_HIGH, GAMMA_LOW))
        )
        if not ok:
            raise ValueError(f"(gamma1, gamma2) must be (1/2 -+ sqrt(3)/6, 1/2 +- sqrt(3)/6), got {pair}")
        if len(self.signs) != 4 or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be four entries of +1/-1")
        if self.m < 0 or (self.m == 0 and (self.signs[0] < 0 or self.signs[1] < 0)):
            raise ValueError("eta * tau must be non-negative: use m >= 1 for negative branches")

    @property
    def xi1(self):
        return 2 * math.asin(math.sqrt(self.gamma1))

    @property
    def xi2(self):
        return 2 * math.asin(math.sqrt(self.gamma2))


def pure_optimum_params(spec=PureOptimumSpec(), tau=1.0):
    if not tau > 0:
        raise ValueError("tau must be positive")
    g1, g2 = spec.gamma1, spec.gamma2
    s_eta1, s_eta2, s_field, s_coupling = spec.signs
    eta1 = (spec.m * math.pi + s_eta1 * 0.5 * math.acos(-g1)) / tau
    eta2 = (spec.m * math.pi + s_eta2 * 0.5 * math.acos(-g2)) / tau
    branch = s_eta1 * s_eta2
    b = s_field * eta1 * math.sqrt((1 - g1) / (1 + g1))
    b_gamma = s_field * branch * eta2 * math.sqrt((1 - g2) / (1 + g2))
    j = s_coupling * 2 * eta2 * math.sqrt(2 * g2 / (1 + g2))
    j_gamma = s_coupling * branch * 2 * eta1 * math.sqrt(2 * g1 / (1 + g1))
    return XyzParams(b1=b + b_gamma, b2=b - b_gamma, jx=j + j_gamma, jy=j - j_gamma, jz=0.0)


# four-decimal tabulated pure-assistant optimum at tau = 1
PRINTED_PURE_OPTIMUM = XyzParams(b1=1.1458, b2=-0.2935, jx=3.3820, jy=-1.2747, jz=0.0)

_R2 = math.sqrt(2)
DISORDERED_MODELS = {
    "xyx": XyzParams(b1=_R2, b2=_R2, jx=2.0, jy=2 * (1 - 2 * _R2), jz=2.0),
    "xxz": XyzParams(b1=_R2, b2=-_R2, jx=2 * _R2, jy=2 * _R2, jz=2.0),
    "xz+": XyzParams(b1=_R2, b2=_R2, jx=4 * _R2, jy=0.0, jz=2.0),
    "xz-": XyzParams(b1=_R2, b2=-_R2, jx=4 * _R2, jy=0.0, jz=2.0),
}


def disordered_optimum_params(model):
    """One of the couplings reaching |Delta| = 1/32 at tau = pi/4 for epsilon = 0."""
    key = model.lower()
    if key not in DISORDERED_MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {sorted(DISORDERED_MODELS)}")
    return DISORDERED_MODELS[key], math.pi / 4


@dataclass(frozen=True)
class FailureReport:
    predicates: list = field(default_factory=list)
    is_singular: bool = False
    abs_delta: float = 0.0

    def to_dict(self):
        return {"predicates": list(self.predicates), "isSingular": self.is_singular, "absDelta": self.abs_delta}


FAILURE_DESCRIPTIONS = {
    "no-anisotropy": "sin(2 theta1) = sin(2 theta2) = 0 (Ising/NMR coupling, no external field, or isotropic XY coupling in a uniform field)",
    "antisymmetric": "sin(2 theta1) = -sin(2 theta2) and |sin(eta1 tau)| = |sin(eta2 tau)|",
    "no-zz-phase": "disordered assistant with sin(Jz tau) = 0",
    "two-zero": "disordered assistant with two of jx, jy, b1, b2 equal to zero",
}


def failure_check(p, tau, epsilon, tol=1e-12):
    d = derive(p)
    s1, s2 = d.sin2theta1, d.sin2theta2
    fired = []
    if abs(s1) <= tol and abs(s2) <= tol:
        fired.append("no-anisotropy")
    if abs(s1 + s2) <= tol and abs(abs(math.sin(d.eta1 * tau)) - abs(math.sin(d.eta2 * tau))) <= tol:
        fired.append("antisymmetric")
    if epsilon == 0:
        if abs(math.sin(p.jz * tau)) <= tol:
            fired.append("no-zz-phase")
        if sum(v == 0 for v in (p.jx, p.jy, p.b1, p.b2)) >= 2:
            fired.append("two-zero")
    return FailureReport(
        predicates=fired, is_singular=bool(fired), abs_delta=float(abs_delta_analytic(p, tau, epsilon))
    )
