"""Two-mode phase-space description of the Bell-like two-particle state
(|0 1> + |1 0>)/sqrt(2) and its separability stack: symplectic eigenvalues of
the covariance matrix and three determinant criteria on a matrix of moments.

Moment-matrix entries are derived from the operator algebra of
a = (s_A + i q_A)/sqrt(2), b = (s_B + i q_B)/sqrt(2), never copied from a
displayed table.  Two orderings are supported:

'weyl'     : entries are phase-space averages of the commuting-symbol
             expansion (what 4-D quadrature over the two-mode Wigner function
             measures); this is the construction used for the lambda sweep and
             it reproduces the separable verdict for every well index.
'operator' : true operator expectation values (a^dag a carries the -1/2
             ordering term, the quartic entry correlates the mode energies).
             Physically this is the sharper criterion: it flips the sign of
             the 4x4 determinant and detects the Bell-type entanglement that
             the symmetrized construction misses.

Partial transposition is the momentum mirror q_B -> -q_B, equivalently
b <-> b^dag; it is implemented at the level of the two-level state
decomposition, and applying it twice is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .infoprofile import cross_first_moments, eigen_second_moments
from .ptsystem import PTParams
from .specfun import trigamma
from .wigner import component_tables

__all__ = [
    "TwoModeCovariance",
    "SymplecticSpectrum",
    "MomentsMatrix",
    "DeterminantCriteria",
    "SeparabilityReport",
    "bipartite_covariance",
    "symplectic_eigenvalues",
    "symplectic_from_invariants",
    "build_moments_matrix",
    "determinant_criteria",
    "separability_report",
    "two_mode_wigner",
    "two_mode_moment_oracle",
    "moments_matrix_oracle",
    "lambda_sweep",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class TwoModeCovariance:
    """Block covariance of the bipartite state: diag(alpha_s, alpha_q) per
    mode, diag(gamma_s, gamma_q) coupling."""

    alpha_s: float
    alpha_q: float
    gamma_s: float
    gamma_q: float

    def __post_init__(self):
        if self.alpha_s <= 0 or self.alpha_q <= 0:
            raise ValueError("diagonal covariance entries must be positive")

    @property
    def matrix(self) -> np.ndarray:
        a_s, a_q, g_s, g_q = self.alpha_s, self.alpha_q, self.gamma_s, self.gamma_q
        return np.array([
            [a_s, 0.0, g_s, 0.0],
            [0.0, a_q, 0.0, g_q],
            [g_s, 0.0, a_s, 0.0],
            [0.0, g_q, 0.0, a_q],
        ])


@dataclass(frozen=True)
class SymplecticSpectrum:
    d_minus: float
    d_plus: float
    d_tilde_minus: float
    d_tilde_plus: float

    @property
    def uncertainty_ok(self) -> bool:
        return self.d_minus >= 0.5 - 1e-12

    @property
    def ppt_separable(self) -> bool:
        return self.d_tilde_minus >= 0.5 - 1e-12


@dataclass
class MomentsMatrix:
    """4x4 matrix of moments over the basis (1, a, b, ab), plus the two 3x3
    criterion submatrices evaluated on the same state."""

    m: np.ndarray
    flag: str                      # 'original' | 'partially_transposed'
    ordering: str                  # 'weyl' | 'operator'
    simon_mod: np.ndarray
    duan: np.ndarray

    def __post_init__(self):
        if self.flag not in ("original", "partially_transposed"):
            raise ValueError(f"unknown flag {self.flag!r}")
        if self.m.shape != (4, 4):
            raise ValueError("moments matrix must be 4x4")
        if abs(self.m[0, 0] - 1.0) > 1e-12:
            raise ValueError("the identity entry must be 1")
        if not np.allclose(self.m, self.m.conj().T, atol=1e-12):
            raise ValueError("moments matrix must be Hermitian")


@dataclass(frozen=True)
class DeterminantCriteria:
    det_m_ppt: float
    det_simon_mod: float
    det_duan: float

    @property
    def separable_consistent(self) -> bool:
        tol = 1e-12
        return (self.det_m_ppt >= -tol and self.det_simon_mod >= -tol
                and self.det_duan >= -tol)


@dataclass
class SeparabilityReport:
    lam: int
    d_minus: float
    d_plus: float
    d_tilde_minus: float
    d_tilde_plus: float
    det_m_ppt: float
    det_simon_mod: float
    det_duan: float
    verdicts: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# covariance level


def bipartite_covariance(params: PTParams) -> TwoModeCovariance:
    """Closed-form covariance data of the bipartite state.

    alpha_kappa averages the two one-mode second moments; gamma_kappa is the
    square of the corresponding cross first-moment matrix element, so
    gamma_q / gamma_s = (lam - 1/2)^2 exactly.
    """
    params.require_excited()
    lam = params.lam
    e2 = eigen_second_moments(params)
    v_s, v_q = cross_first_moments(params)
    return TwoModeCovariance(
        alpha_s=0.5 * (e2["s2_0"] + e2["s2_1"]),
        alpha_q=0.5 * (e2["q2_0"] + e2["q2_1"]),
        gamma_s=v_s * v_s,
        gamma_q=v_q * v_q,
    )


def symplectic_eigenvalues(cov: TwoModeCovariance) -> SymplecticSpectrum:
    """d_pm = sqrt((alpha_s +- gamma_s)(alpha_q +- gamma_q)) and the momentum-
    mirrored (partial-transpose) pair d~_pm with the sign of gamma_s flipped."""
    prods = {
        "d_minus": (cov.alpha_s - cov.gamma_s) * (cov.alpha_q - cov.gamma_q),
        "d_plus": (cov.alpha_s + cov.gamma_s) * (cov.alpha_q + cov.gamma_q),
        "d_tilde_minus": (cov.alpha_s + cov.gamma_s) * (cov.alpha_q - cov.gamma_q),
        "d_tilde_plus": (cov.alpha_s - cov.gamma_s) * (cov.alpha_q + cov.gamma_q),
    }
    bad = {k: v for k, v in prods.items() if v < 0}
    if bad:
        raise ValueError(f"unphysical covariance input, negative radicand: {bad}")
    return SymplecticSpectrum(**{k: math.sqrt(v) for k, v in prods.items()})


def symplectic_from_invariants(cov: TwoModeCovariance) -> SymplecticSpectrum:
    """Same spectrum through the invariant route d^2 = (D +- sqrt(D^2 - 4 det))/2
    with D = 2(alpha_s alpha_q +- gamma_s gamma_q).

    The discriminant is D^2 - 4 det(sigma); writing it with det(sigma) squared
    does not reproduce the product form, so the 4*det version is the one the
    two displayed expressions actually share.
    """
    det = (cov.alpha_s**2 - cov.gamma_s**2) * (cov.alpha_q**2 - cov.gamma_q**2)
    out = {}
    for name, delta in (("d", 2 * (cov.alpha_s * cov.alpha_q + cov.gamma_s * cov.gamma_q)),
                        ("d_tilde", 2 * (cov.alpha_s * cov.alpha_q - cov.gamma_s * cov.gamma_q))):
        disc = delta**2 - 4 * det
        if disc < -1e-12 * delta**2:
            raise ValueError("negative discriminant in symplectic invariants")
        root = math.sqrt(max(disc, 0.0))
        out[f"{name}_plus"] = math.sqrt((delta + root) / 2)
        out[f"{name}_minus"] = math.sqrt((delta - root) / 2)
    return SymplecticSpectrum(out["d_minus"], out["d_plus"],
                              out["d_tilde_minus"], out["d_tilde_plus"])


# ---------------------------------------------------------------------------
# moments matrix from the operator algebra


def _mode_matrix(params: PTParams, word: str, ordering: str) -> np.ndarray:
    """2x2 matrix <i|word|j> over the (ground, excited) basis for a one-mode
    word in {1, a, ad, ada, aad}.

    For 'weyl', quadratic words use the symmetrized symbol (s^2+q^2)/2; for
    'operator' they carry the exact +-1/2 ordering terms.
    """
    v_s, v_q = cross_first_moments(params)
    e2 = eigen_second_moments(params)
    r2 = (e2["s2_0"] + e2["q2_0"], e2["s2_1"] + e2["q2_1"])
    if word == "1":
        return np.eye(2, dtype=complex)
    if word == "a":
        return np.array([[0.0, (v_s + v_q) / _SQRT2],
                         [(v_s - v_q) / _SQRT2, 0.0]], dtype=complex)
    if word == "ad":
        return _mode_matrix(params, "a", ordering).conj().T
    if word in ("ada", "aad"):
        if ordering == "weyl":
            shift = 0.0
        else:
            shift = -1.0 if word == "ada" else 1.0
        return np.diag([(r2[0] + shift) / 2, (r2[1] + shift) / 2]).astype(complex)
    raise ValueError(f"unknown mode word {word!r}")


def _pair_expectation(x: np.ndarray, y: np.ndarray, transposed: bool) -> complex:
    """<X_A (x) Y_B> over the Bell-like state (or its partial transpose)."""
    if transposed:
        val = x[0, 0] * y[1, 1] + x[1, 0] * y[1, 0] + x[0, 1] * y[0, 1] + x[1, 1] * y[0, 0]
    else:
        val = x[0, 0] * y[1, 1] + x[0, 1] * y[1, 0] + x[1, 0] * y[0, 1] + x[1, 1] * y[0, 0]
    return 0.5 * val


def _expect(params, word_a, word_b, ordering, transposed) -> complex:
    return _pair_expectation(_mode_matrix(params, word_a, ordering),
                             _mode_matrix(params, word_b, ordering), transposed)


# row/column reading of M_ij = <g_i^dag g_j> with g = (1, a, b, ab): the A-word
# of entry (i, j) is u_i^dag u_j with u = (1, a, 1, a), similarly for B.
_M4_A = [["1", "a", "1", "a"], ["ad", "ada", "ad", "ada"],
         ["1", "a", "1", "a"], ["ad", "ada", "ad", "ada"]]
_M4_B = [["1", "1", "a", "a"], ["1", "1", "a", "a"],
         ["ad", "ad", "ada", "ada"], ["ad", "ad", "ada", "ada"]]

_SIMON_A = [["1", "1", "a"], ["1", "1", "a"], ["ad", "ad", "ada"]]
_SIMON_B = [["1", "a", "ad"], ["ad", "ada", "aad"], ["a", "ada", "ada"]]

_DUAN_A = [["1", "a", "1"], ["ad", "ada", "ad"], ["1", "a", "1"]]
_DUAN_B = [["1", "1", "ad"], ["1", "1", "ad"], ["a", "a", "ada"]]


def build_moments_matrix(params: PTParams, transpose_B: bool,
                         ordering: str = "weyl") -> MomentsMatrix:
    """Matrix of moments over (1, a, b, ab) plus the 3x3 criterion submatrices.

    All first moments of the state vanish, so the 4x4 is sparse; entries are
    computed from the one-mode matrix elements, and partial transposition is
    applied to the state decomposition (mirror q_B -> -q_B).
    """
    params.require_excited()
    if ordering not in ("weyl", "operator"):
        raise ValueError(f"unknown ordering {ordering!r}")

    def fill(words_a, words_b):
        n = len(words_a)
        out = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = _expect(params, words_a[i][j], words_b[i][j],
                                    ordering, transpose_B)
        return out

    return MomentsMatrix(
        m=fill(_M4_A, _M4_B),
        flag="partially_transposed" if transpose_B else "original",
        ordering=ordering,
        simon_mod=fill(_SIMON_A, _SIMON_B),
        duan=fill(_DUAN_A, _DUAN_B),
    )


def determinant_criteria(mm: MomentsMatrix) -> DeterminantCriteria:
    """Determinants of the full transposed 4x4 and of the two 3x3 submatrices."""
    if mm.flag != "partially_transposed":
        raise ValueError("the criteria are evaluated on the partially transposed state")
    return DeterminantCriteria(
        det_m_ppt=float(np.linalg.det(mm.m).real),
        det_simon_mod=float(np.linalg.det(mm.simon_mod).real),
        det_duan=float(np.linalg.det(mm.duan).real),
    )


def separability_report(params: PTParams, ordering: str = "weyl") -> SeparabilityReport:
    spec = symplectic_eigenvalues(bipartite_covariance(params))
    crit = determinant_criteria(build_moments_matrix(params, True, ordering))
    return SeparabilityReport(
        lam=params.lam,
        d_minus=spec.d_minus, d_plus=spec.d_plus,
        d_tilde_minus=spec.d_tilde_minus, d_tilde_plus=spec.d_tilde_plus,
        det_m_ppt=crit.det_m_ppt, det_simon_mod=crit.det_simon_mod,
        det_duan=crit.det_duan,
        verdicts={
            "uncertainty_ok": spec.uncertainty_ok,
            "ppt_separable": spec.ppt_separable,
            "moments_separable_consistent": crit.separable_consistent,
        },
    )


def lambda_sweep(lams, ordering: str = "weyl") -> list[SeparabilityReport]:
    return [separability_report(PTParams(lam), ordering) for lam in lams]


# ---------------------------------------------------------------------------
# two-mode Wigner function and the quadrature oracle


def two_mode_wigner(params: PTParams, s_a, q_a, s_b, q_b):
    """W(s_A, q_A, s_B, q_B) of the Bell-like state, assembled from one-mode
    components; symmetric under A <-> B and real by construction."""
    params.require_excited()
    shape = np.broadcast_shapes(np.shape(s_a), np.shape(q_a),
                                np.shape(s_b), np.shape(q_b))
    ta = component_tables(params, np.ravel(s_a), np.ravel(q_a))
    tb = component_tables(params, np.ravel(s_b), np.ravel(q_b))
    out = 0.5 * (ta.val["w00"] * tb.val["w11"] + ta.val["w11"] * tb.val["w00"]
                 + 2.0 * (ta.val["re10"] * tb.val["re10"]
                          + ta.val["im10"] * tb.val["im10"]))
    return out.reshape(shape) if shape else float(out[0])


_ORACLE_BOX = (5.0, 4.0)


def _mode_symbol(word, s, q, ordering):
    alpha = (s + 1j * q) / _SQRT2
    if word == "1":
        return np.ones_like(s, dtype=complex)
    if word == "a":
        return alpha
    if word == "ad":
        return np.conj(alpha)
    if word in ("ada", "aad"):
        shift = 0.0 if ordering == "weyl" else (-0.5 if word == "ada" else 0.5)
        return np.abs(alpha) ** 2 + shift
    raise ValueError(f"unknown mode word {word!r}")


def two_mode_moment_oracle(params: PTParams, symbol_a, symbol_b,
                           mirror_q_b: bool = False, n: int = 40) -> complex:
    """Brute-force 4-D quadrature of symbol_a(s_A,q_A)*symbol_b(s_B,q_B)
    against the two-mode Wigner function on the truncated box.

    The two-mode W is evaluated pointwise; the outer two dimensions are looped
    in batches, so nothing relies on the closed-form moment algebra.
    """
    s_half, q_half = _ORACLE_BOX
    xs, ws = np.polynomial.legendre.leggauss(n)
    s_nodes, s_w = xs * s_half, ws * s_half
    q_nodes, q_w = xs * q_half, ws * q_half

    sb, qb = np.meshgrid(s_nodes, q_nodes, indexing="ij")
    sb, qb = sb.ravel(), qb.ravel()
    wt_b = np.outer(s_w, q_w).ravel()
    sym_b = symbol_b(sb, -qb if mirror_q_b else qb)

    tb = component_tables(params, sb, qb)
    total = 0.0 + 0.0j
    for i, sa in enumerate(s_nodes):
        ta = component_tables(params, np.full_like(q_nodes, sa), q_nodes)
        for j, qa in enumerate(q_nodes):
            w4 = 0.5 * (ta.val["w00"][j] * tb.val["w11"]
                        + ta.val["w11"][j] * tb.val["w00"]
                        + 2.0 * (ta.val["re10"][j] * tb.val["re10"]
                                 + ta.val["im10"][j] * tb.val["im10"]))
            sym_a = symbol_a(np.array(sa), np.array(qa))
            total += s_w[i] * q_w[j] * complex(sym_a) * np.sum(wt_b * sym_b * w4)
    return total


def moments_matrix_oracle(params: PTParams, transpose_B: bool,
                          ordering: str = "weyl", n: int = 40) -> np.ndarray:
    """4x4 matrix of moments by 4-D quadrature (box-truncation limited)."""
    out = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        for j in range(4):
            wa, wb = _M4_A[i][j], _M4_B[i][j]
            out[i, j] = two_mode_moment_oracle(
                params,
                lambda s, q, w=wa: _mode_symbol(w, s, q, ordering),
                lambda s, q, w=wb: _mode_symbol(w, s, q, ordering),
                mirror_q_b=transpose_B, n=n)
    return out
