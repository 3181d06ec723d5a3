"""Special functions: log-gamma, gamma ratios, digamma/trigamma, and associated
Legendre polynomials of hyperbolic argument.

Everything here is numerically boring on purpose; the rest of the package
leans on these being correct to near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln as _gammaln

__all__ = [
    "EigenstateIndex",
    "log_gamma",
    "gamma_ratio",
    "digamma",
    "trigamma",
    "assoc_legendre_tanh",
    "legendre_square_integral",
    "bound_state",
]

# Bernoulli numbers B_2..B_14 for the asymptotic tails.
_BERN = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6)


@dataclass(frozen=True)
class EigenstateIndex:
    """Quantum numbers of a hyperbolic-well bound state.

    ``lam`` is the well index (integer >= 1) and ``mu`` labels the bound level
    through the excitation number ``n = lam - mu``.
    """

    lam: int
    mu: int

    def __post_init__(self):
        if self.lam < 1 or not float(self.lam).is_integer():
            raise ValueError(f"lam must be a positive integer, got {self.lam}")
        if not 1 <= self.mu <= self.lam:
            raise ValueError(f"mu must satisfy 1 <= mu <= lam, got mu={self.mu}, lam={self.lam}")

    @property
    def n(self) -> int:
        return self.lam - self.mu


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("log_gamma requires x > 0")
    out = _gammaln(x)
    return float(out) if out.ndim == 0 else out


def gamma_ratio(a, b):
    """Gamma(a)/Gamma(b) for positive arguments, via log space."""
    return np.exp(log_gamma(a) - log_gamma(b))


def _poly_asymptotic(x, head, terms):
    """Shared Euler-Maclaurin tail: head(x) + sum of Bernoulli terms."""
    acc = head
    for t in terms:
        acc = acc + t
    return acc


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("digamma requires x > 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x).astype(float).copy()
    acc = np.zeros_like(x)
    while np.any(x < 10):
        m = x < 10
        acc[m] -= 1.0 / x[m]
        x[m] += 1.0
    inv2 = 1.0 / (x * x)
    tail = np.zeros_like(x)
    p = inv2
    for k, b in enumerate(_BERN, start=1):
        tail -= b / (2 * k) * p
        p = p * inv2
    out = acc + np.log(x) - 0.5 / x + tail
    return float(out[0]) if scalar else out


def trigamma(x):
    """psi_1(x) = d^2/dx^2 ln Gamma(x) for x > 0.

    Asymptotic series for x >= 10, lifted there by the recurrence
    psi_1(x) = psi_1(x+1) + 1/x^2.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("trigamma requires x > 0")
    scalar = x.ndim == 0
    x = np.atleast_1d(x).astype(float).copy()
    acc = np.zeros_like(x)
    while np.any(x < 10):
        m = x < 10
        acc[m] += 1.0 / (x[m] * x[m])
        x[m] += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    tail = np.zeros_like(x)
    p = inv * inv2
    for b in _BERN:
        tail += b * p
        p = p * inv2
    out = acc + inv + 0.5 * inv2 + tail
    return float(out[0]) if scalar else out


def assoc_legendre_tanh(idx: EigenstateIndex, s):
    """Associated Legendre polynomial P^mu_lam evaluated at tanh(s).

    Condon-Shortley sign convention; upward recurrence in the degree, which is
    stable for this argument range.  (1 - u^2)^(1/2) is evaluated as sech(s)
    so no cancellation occurs at large |s|.
    """
    if not isinstance(idx, EigenstateIndex):
        raise TypeError("idx must be an EigenstateIndex")
    s = np.asarray(s, dtype=float)
    scalar = s.ndim == 0
    s = np.atleast_1d(s)
    u = np.tanh(s)
    sech = 1.0 / np.cosh(s)
    mu, lam = idx.mu, idx.lam

    # P^mu_mu = (-1)^mu (2mu-1)!! sech^mu
    pmm = (-1.0) ** mu * float(np.prod(np.arange(1, 2 * mu, 2))) * sech**mu
    if lam == mu:
        out = pmm
    else:
        pm1 = u * (2 * mu + 1) * pmm
        if lam == mu + 1:
            out = pm1
        else:
            pprev, pcur = pmm, pm1
            for ell in range(mu + 2, lam + 1):
                pnext = (u * (2 * ell - 1) * pcur - (ell + mu - 1) * pprev) / (ell - mu)
                pprev, pcur = pcur, pnext
            out = pcur
    return float(out[0]) if scalar else out


def legendre_square_integral(idx: EigenstateIndex) -> float:
    """Integral over s of P^mu_lam(tanh s)^2.

    Equals Gamma(lam+mu+1) / (mu * Gamma(lam-mu+1)); confirmed against direct
    quadrature for all indices in the test suite (the fixed-degree orthogonality
    family has mu, not Gamma(mu+1), in the denominator).
    """
    return float(gamma_ratio(idx.lam + idx.mu + 1, idx.lam - idx.mu + 1) / idx.mu)


def bound_state(idx: EigenstateIndex, s):
    """Normalized bound-state wave function for arbitrary excitation number."""
    norm = 1.0 / math.sqrt(legendre_square_integral(idx))
    return norm * assoc_legendre_tanh(idx, s)
