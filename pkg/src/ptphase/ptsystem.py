"""The hyperbolic quantum-well model: dimensionless Hamiltonian, classical
trajectories in the three energy regimes, and the two lowest bound states.

Units: s = x/L, q = pL/hbar, tau = 2*eps*t/hbar with eps = hbar^2/(2mL^2).
The conserved dimensionless energy is H = q^2 - lam*(lam+1)*sech^2(s), and the
equations of motion consistent with both H and the closed-form trajectories
are ds/dtau = q, dq/dtau = -lam*(lam+1)*tanh(s)*sech^2(s).  (The plus sign
sometimes quoted for the force does not conserve H; the minus sign does.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .specfun import gamma_ratio

__all__ = [
    "PTParams",
    "PhasePoint",
    "ClassicalRegime",
    "TwoLevelState",
    "potential",
    "energy",
    "classical_trajectory",
    "classical_ode_step",
    "integrate_classical",
    "eigenstate",
    "eigenstate_derivative",
    "eigenstate_energy",
    "two_level_frequency",
    "matched_bound_parameter",
]


@dataclass(frozen=True)
class PTParams:
    """Quantum-well descriptor; the well depth is lam*(lam+1)."""

    lam: int

    def __post_init__(self):
        if not float(self.lam).is_integer() or self.lam < 1:
            raise ValueError(f"lam must be an integer >= 1, got {self.lam}")
        object.__setattr__(self, "lam", int(self.lam))

    @property
    def well_depth(self) -> float:
        return float(self.lam * (self.lam + 1))

    def require_excited(self):
        if self.lam < 2:
            raise ValueError("the first excited state requires lam >= 2")


@dataclass(frozen=True)
class PhasePoint:
    s: float
    q: float

    def __post_init__(self):
        if not (math.isfinite(self.s) and math.isfinite(self.q)):
            raise ValueError("phase-space coordinates must be finite")


@dataclass(frozen=True)
class ClassicalRegime:
    """One of the three closed-form trajectory families.

    tag='bound'      : E = -ell^2, oscillation about the well bottom
    tag='separatrix' : E = 0
    tag='unbound'    : E = +lam*(lam+1), over-the-well motion

    ``parameter`` is ell for bound/separatrix and lam for unbound.
    """

    tag: str
    parameter: float

    _TAGS = ("bound", "separatrix", "unbound")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown regime tag {self.tag!r}")
        if not self.parameter > 0:
            raise ValueError("regime parameter must be positive")

    @classmethod
    def bound(cls, ell: float) -> "ClassicalRegime":
        return cls("bound", float(ell))

    @classmethod
    def separatrix(cls, ell: float) -> "ClassicalRegime":
        return cls("separatrix", float(ell))

    @classmethod
    def unbound(cls, lam: float) -> "ClassicalRegime":
        return cls("unbound", float(lam))


@dataclass(frozen=True)
class TwoLevelState:
    """Pure superposition (theta, varphi) or statistical mixture of the ground
    and first excited states.

    Pure amplitudes at tau = 0: a0 = sin(theta) e^{-i varphi},
    a1 = cos(theta) e^{+i varphi}.  Mixtures carry weights
    (sin^2 theta, cos^2 theta) and no phase.
    """

    kind: str
    theta: float
    varphi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        if self.kind == "mixed" and self.varphi != 0.0:
            raise ValueError("a mixed state carries no relative phase")

    @classmethod
    def pure(cls, theta: float, varphi: float = 0.0) -> "TwoLevelState":
        return cls("pure", float(theta), float(varphi))

    @classmethod
    def mixed(cls, theta: float) -> "TwoLevelState":
        return cls("mixed", float(theta))

    @property
    def is_pure(self) -> bool:
        return self.kind == "pure"

    @property
    def weights(self) -> tuple[float, float]:
        return (math.sin(self.theta) ** 2, math.cos(self.theta) ** 2)

    def uses_excited(self) -> bool:
        return abs(math.cos(self.theta)) > 0.0

    def cross_phase(self, params: PTParams, tau: float) -> float:
        """Total relative phase arg(a1/a0) entering the interference term.

        Evolves at rate -(lam - 1/2) per unit tau under the dimensionless
        Schrodinger evolution (generator H/2).
        """
        return 2.0 * self.varphi - two_level_frequency(params) * tau

    def amplitudes(self, params: PTParams, tau: float) -> tuple[complex, complex]:
        """Evolved amplitudes (a0, a1) of a pure state at time tau."""
        if not self.is_pure:
            raise ValueError("amplitudes are defined for pure states only")
        e0 = eigenstate_energy(params, 0)
        e1 = eigenstate_energy(params, 1)
        a0 = math.sin(self.theta) * np.exp(-1j * self.varphi) * np.exp(-1j * e0 * tau / 2)
        a1 = math.cos(self.theta) * np.exp(+1j * self.varphi) * np.exp(-1j * e1 * tau / 2)
        return complex(a0), complex(a1)

    def entropy(self) -> float:
        """Shannon entropy of the ensemble weights (zero for pure states)."""
        if self.is_pure:
            return 0.0
        return float(-sum(w * math.log(w) for w in self.weights if w > 0))


# ---------------------------------------------------------------------------
# classical side


def potential(params: PTParams, s):
    """V(s) = -lam(lam+1) sech^2(s)."""
    s = np.asarray(s, dtype=float)
    out = -params.well_depth / np.cosh(s) ** 2
    return float(out) if out.ndim == 0 else out


def energy(params: PTParams, point: PhasePoint) -> float:
    return point.q**2 + potential(params, point.s)


def classical_trajectory(regime: ClassicalRegime, tau: float) -> PhasePoint:
    """Closed-form trajectory (positive branch) at time tau.

    bound      : s = arcsinh(sin(l*tau)/sqrt(l)), q = l*cos(l*tau)/sqrt(l+sin^2(l*tau))
    separatrix : s = arcsinh(sqrt(l(l+1))*tau),   q = sqrt(l(l+1)/(1+l(l+1)*tau^2))
    unbound    : s = arcsinh(sqrt(2)*sinh(nu*tau)), nu = sqrt(lam(lam+1)),
                 q = sqrt(2)*nu*cosh(nu*tau)/sqrt(1+2*sinh^2(nu*tau))

    The separatrix momentum decays with tau^2 in the denominator; that (and not
    the first power) is what conservation of H = 0 and ds/dtau = q require.
    Bound-regime energy is conserved only when the well depth equals l(l+1),
    i.e. the trajectory belongs to the well with lam = l (see
    :func:`matched_bound_parameter` for the frequency-matching use of l).
    """
    p = regime.parameter
    if regime.tag == "bound":
        sn, cn = math.sin(p * tau), math.cos(p * tau)
        s = math.asinh(sn / math.sqrt(p))
        q = p * cn / math.sqrt(p + sn * sn)
    elif regime.tag == "separatrix":
        d = p * (p + 1)
        s = math.asinh(math.sqrt(d) * tau)
        q = math.sqrt(d / (1.0 + d * tau * tau))
    else:
        nu = math.sqrt(p * (p + 1))
        sh = math.sinh(nu * tau)
        ch = math.cosh(nu * tau)
        s = math.asinh(math.sqrt(2.0) * sh)
        q = math.sqrt(2.0) * nu * ch / math.sqrt(1.0 + 2.0 * sh * sh)
    return PhasePoint(s, q)


def _rhs(_tau, y, depth):
    s, q = y
    sech2 = 1.0 / math.cosh(s) ** 2
    return (q, -depth * math.tanh(s) * sech2)


def classical_ode_step(params: PTParams, point: PhasePoint, dtau: float) -> PhasePoint:
    """Advance the Hamiltonian flow by dtau with an adaptive 8th-order solver."""
    if dtau <= 0:
        raise ValueError("dtau must be positive")
    sol = solve_ivp(_rhs, (0.0, dtau), (point.s, point.q), args=(params.well_depth,),
                    method="DOP853", rtol=1e-12, atol=1e-13)
    if not sol.success:
        raise RuntimeError(f"integrator failed: {sol.message}")
    return PhasePoint(float(sol.y[0, -1]), float(sol.y[1, -1]))


def integrate_classical(params: PTParams, point: PhasePoint, taus) -> np.ndarray:
    """Reference trajectory sampled at the given times; returns (len(taus), 2)."""
    taus = np.asarray(taus, dtype=float)
    sol = solve_ivp(_rhs, (float(taus[0]), float(taus[-1])), (point.s, point.q),
                    args=(params.well_depth,), method="DOP853",
                    rtol=1e-12, atol=1e-13, t_eval=taus, dense_output=False)
    if not sol.success:
        raise RuntimeError(f"integrator failed: {sol.message}")
    return sol.y.T.copy()


# ---------------------------------------------------------------------------
# quantum side


def norm_const_sq(params: PTParams) -> float:
    """A^2(lam) = Gamma(lam + 1/2) / (sqrt(pi) Gamma(lam))."""
    return float(gamma_ratio(params.lam + 0.5, params.lam) / math.sqrt(math.pi))


def eigenstate(params: PTParams, n: int, s):
    """Ground (n=0) or first excited (n=1) normalized wave function."""
    if n not in (0, 1):
        raise ValueError("only n = 0 and n = 1 are closed-form here")
    s = np.asarray(s, dtype=float)
    a = math.sqrt(norm_const_sq(params))
    sech_lam = np.cosh(s) ** (-params.lam)
    if n == 0:
        out = a * sech_lam
    else:
        params.require_excited()
        out = math.sqrt(2.0 * (params.lam - 1)) * a * np.sinh(s) * sech_lam
    return float(out) if out.ndim == 0 else out


def eigenstate_derivative(params: PTParams, n: int, s, order: int = 1):
    """Exact d^order/ds^order of the eigenstate via the tanh-polynomial
    recurrence (the derivatives stay of the form sech^mu(s) * poly(tanh s))."""
    if order < 0:
        raise ValueError("order must be >= 0")
    s = np.asarray(s, dtype=float)
    a = math.sqrt(norm_const_sq(params))
    if n == 0:
        mu = params.lam
        coeffs = np.array([a])
    elif n == 1:
        params.require_excited()
        mu = params.lam - 1
        coeffs = np.array([0.0, math.sqrt(2.0 * (params.lam - 1)) * a])
    else:
        raise ValueError("only n = 0 and n = 1 are closed-form here")
    # psi = sech^mu(s) * P(tanh s); d/ds -> sech^mu * [P'(t)(1-t^2) - mu t P(t)]
    for _ in range(order):
        dp = np.polynomial.polynomial.polyder(coeffs)
        term1 = np.polynomial.polynomial.polymul(dp, [1.0, 0.0, -1.0])
        term2 = np.polynomial.polynomial.polymul(coeffs, [0.0, -float(mu)])
        coeffs = np.polynomial.polynomial.polyadd(term1, term2)
    t = np.tanh(s)
    out = np.polynomial.polynomial.polyval(t, coeffs) / np.cosh(s) ** mu
    return float(out) if out.ndim == 0 else out


def eigenstate_energy(params: PTParams, n: int) -> float:
    """Dimensionless bound-state energy -mu^2 with mu = lam - n."""
    if n not in (0, 1):
        raise ValueError("only n = 0 and n = 1 are supported")
    if n == 1:
        params.require_excited()
    return -float((params.lam - n) ** 2)


def two_level_frequency(params: PTParams) -> float:
    """Phase advance rate of the two-level interference term, lam - 1/2."""
    params.require_excited()
    return params.lam - 0.5


def matched_bound_parameter(params: PTParams) -> float:
    """Bound-regime l whose classical frequency matches the two-level beat.

    This is a frequency-matching heuristic only: the bound closed form with
    this l is *not* a trajectory of the lam-well (energy is conserved only for
    l = lam).
    """
    return two_level_frequency(params)
