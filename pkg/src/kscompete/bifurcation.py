"""Local pitchfork analysis of the steady-state branch bifurcating at chi_k.

Along the branch chi_k(s) = chi_k + s K1 + s^2 K2 + o(s^2), K1 vanishes and K2 is
assembled from projections of the second and third order correctors. Those
projections solve three 3x3 linear systems:

* the mean system (projection on 1),
* the double-mode system (projection on cos(2k pi x / L)),
* the second-order system (projection on cos(k pi x / L)).

All three are solved by Cramer's rule with compensated determinants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exact import cramer3, det3, row_norm_product
from .linear_analysis import LossType, StabilityReport, chi_hat, chi_tilde, critical_chi, eigenmode
from .model import Equilibrium, ModelParams, compute_equilibrium

NEAR_SINGULAR_RTOL = 1e-10
LARGE_DIFFUSION_FLOOR = 100.0


class NearSingular(ArithmeticError):
    """The double-mode matrix is numerically singular (mode 2k resonance)."""

    def __init__(self, k: int, det: float, scale: float):
        self.k, self.det, self.scale = k, det, scale
        super().__init__(f"double-mode system of k={k} is near singular: |det|={abs(det):.3e}, row-norm product={scale:.3e}")


class Degenerate(ArithmeticError):
    """Steady and oscillatory thresholds of mode k coincide; the kernel analysis does not apply."""

    def __init__(self, k: int, chi_t: float, chi_h: float):
        self.k, self.chi_tilde, self.chi_hat = k, chi_t, chi_h
        super().__init__(f"mode k={k}: chi_tilde={chi_t!r} equals chi_hat={chi_h!r} within tolerance")


class PredictedStability(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"
    NOT_APPLICABLE = "NotApplicable"


@dataclass(frozen=True)
class ProjectionIntegrals:
    mean_phi1: float
    mean_psi1: float
    mean_gamma1: float
    double_phi1: float
    double_psi1: float
    double_gamma1: float
    second_phi2: float
    second_psi2: float
    second_gamma2: float
    g_value: float


@dataclass(frozen=True)
class BranchInfo:
    k: int
    chi_k: float
    P_k: float
    Q_k: float
    K1: float
    K2: float
    K2_asymptotic_sign: int
    lambda_star: float
    # Local statement only: valid for chi near chi_k on the bifurcating branch.
    predicted_stability: PredictedStability
    large_diffusion: bool
    integrals: ProjectionIntegrals


def _lam_k(k: int, L: float) -> float:
    return (k * math.pi / L) ** 2


def _eq(p: ModelParams, eq: Equilibrium | None) -> Equilibrium:
    return compute_equilibrium(p) if eq is None else eq


def mean_system(k: int, p: ModelParams, eq: Equilibrium | None = None) -> tuple[np.ndarray, np.ndarray]:
    eq = _eq(p, eq)
    P, Q = eigenmode(k, p, eq)
    B = np.array([[1.0, p.a1, 0.0], [p.a2, 1.0, 0.0], [1.0, 1.0, -p.lam]])
    rhs = np.array(
        [
            -p.L / (2.0 * eq.u_bar) * P * (P + p.a1 * Q),
            -p.L / (2.0 * eq.v_bar) * Q * (Q + p.a2 * P),
            0.0,
        ]
    )
    return B, rhs


def solve_mean_system(k: int, p: ModelParams, eq: Equilibrium | None = None) -> tuple[float, float, float]:
    """Integrals of the second-order correctors over (0, L)."""
    if p.a1 * p.a2 == 1.0:
        raise ValueError("a1*a2 = 1 makes the mean system singular")
    B, rhs = mean_system(k, p, eq)
    x, _ = cramer3(B, rhs)
    return float(x[0]), float(x[1]), float(x[2])


def double_mode_system(k: int, p: ModelParams, eq: Equilibrium | None = None, chi_k: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    eq = _eq(p, eq)
    if chi_k is None:
        chi_k = chi_tilde(k, p, eq)
    lk = _lam_k(k, p.L)
    l2 = 4.0 * lk
    u, v = eq.u_bar, eq.v_bar
    P, Q = eigenmode(k, p, eq)
    C = np.array(
        [
            [-(p.d1 * l2 + p.mu1 * u), -p.a1 * p.mu1 * u, chi_k * u * l2],
            [-p.a2 * p.mu2 * v, -(p.d2 * l2 + p.mu2 * v), p.xi * v * l2],
            [1.0, 1.0, -(l2 + p.lam)],
        ]
    )
    rhs = np.array(
        [
            -chi_k * p.L / 2.0 * P * lk + p.mu1 * p.L / 4.0 * P * (P + p.a1 * Q),
            -p.xi * p.L / 2.0 * Q * lk + p.mu2 * p.L / 4.0 * Q * (Q + p.a2 * P),
            0.0,
        ]
    )
    return C, rhs


def solve_double_mode_system(
    k: int, p: ModelParams, eq: Equilibrium | None = None, chi_k: float | None = None
) -> tuple[float, float, float]:
    """Projections of the second-order correctors on cos(2k pi x / L)."""
    C, rhs = double_mode_system(k, p, eq, chi_k)
    d = det3(C)
    scale = row_norm_product(C)
    if abs(d) < NEAR_SINGULAR_RTOL * scale:
        raise NearSingular(k, d, scale)
    x, _ = cramer3(C, rhs)
    return float(x[0]), float(x[1]), float(x[2])


def rhs_G(
    k: int,
    p: ModelParams,
    eq: Equilibrium | None,
    double_integrals: tuple[float, float, float],
    mean_integrals: tuple[float, float, float],
) -> float:
    """Forcing of the second-order system from the second-order corrector projections."""
    eq = _eq(p, eq)
    lk = _lam_k(k, p.L)
    P, Q = eigenmode(k, p, eq)
    d_phi, d_psi, d_gam = double_integrals
    m_phi, m_psi, _ = mean_integrals
    c = p.a2 * p.mu2
    terms = [
        c / 2.0 * Q * d_phi,
        (p.xi * lk / 2.0 + c * P / 2.0 + p.mu2 * Q) * d_psi,
        -p.xi * Q * lk * d_gam,
        c / 2.0 * Q * m_phi,
        (c * P / 2.0 + p.mu2 * Q - p.xi * lk / 2.0) * m_psi,
    ]
    return math.fsum(terms)


def second_order_matrix(k: int, p: ModelParams, eq: Equilibrium | None = None) -> np.ndarray:
    eq = _eq(p, eq)
    lk = _lam_k(k, p.L)
    v = eq.v_bar
    P, Q = eigenmode(k, p, eq)
    return np.array(
        [
            [-p.a2 * p.mu2 * v, -(p.d2 * lk + p.mu2 * v), p.xi * v * lk],
            [1.0, 1.0, -(lk + p.lam)],
            [P, Q, 1.0],
        ]
    )


def second_order_det_closed_form(k: int, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Positive closed form of det of the second-order matrix.

    With D = d2 Lambda + (1 - a2) mu2 v and X, Y the numerators of P_k, Q_k,
    det = D + (X^2 + Y^2) / D.
    """
    eq = _eq(p, eq)
    lk = _lam_k(k, p.L)
    v = eq.v_bar
    D = p.d2 * lk + (1.0 - p.a2) * p.mu2 * v
    X = (p.d2 * lk + p.mu2 * v) * (lk + p.lam) - p.xi * v * lk
    Y = p.xi * v * lk - p.a2 * p.mu2 * v * (lk + p.lam)
    return D + (X * X + Y * Y) / D


def solve_second_order_system(k: int, p: ModelParams, eq: Equilibrium | None, G: float) -> tuple[float, float, float]:
    """Projections of the third-order correctors on cos(k pi x / L)."""
    A = second_order_matrix(k, p, eq)
    x, _ = cramer3(A, [G, 0.0, 0.0])
    return float(x[0]), float(x[1]), float(x[2])


def projection_integrals(k: int, p: ModelParams, eq: Equilibrium | None = None, chi_k: float | None = None) -> ProjectionIntegrals:
    eq = _eq(p, eq)
    if chi_k is None:
        chi_k = chi_tilde(k, p, eq)
    mean = solve_mean_system(k, p, eq)
    dbl = solve_double_mode_system(k, p, eq, chi_k)
    G = rhs_G(k, p, eq, dbl, mean)
    sec = solve_second_order_system(k, p, eq, G)
    return ProjectionIntegrals(*mean, *dbl, *sec, G)


def K2_from_integrals(k: int, p: ModelParams, eq: Equilibrium, ints: ProjectionIntegrals) -> float:
    lk = _lam_k(k, p.L)
    u = eq.u_bar
    P, Q = eigenmode(k, p, eq)
    d1, mu1, a1 = p.d1, p.mu1, p.a1
    su = d1 * lk + mu1 * u
    terms = [
        ((d1 * lk / (2.0 * u) + 1.5 * mu1) * P + a1 * mu1 * Q) * ints.double_phi1,
        a1 * mu1 / 2.0 * P * ints.double_psi1,
        -((d1 * lk / u + mu1) * P * P + a1 * mu1 * P * Q) * ints.double_gamma1,
        su * ints.second_phi2,
        a1 * mu1 * u * ints.second_psi2,
        -(su * P + a1 * mu1 * u * Q) * ints.second_gamma2,
        -(d1 * lk / (2.0 * u) - mu1 / 2.0) * P * ints.mean_phi1,
        a1 * mu1 / 2.0 * P * ints.mean_psi1,
    ]
    return math.fsum(terms) * 2.0 * p.L / (u * (k * math.pi) ** 2)


def lambda_star(k: int, p: ModelParams) -> float:
    return (14.0 - 2.0 * p.a1 * p.a2) * _lam_k(k, p.L) / (1.0 - p.a1 * p.a2)


def K2_asymptotic_sign(
    k: int, p: ModelParams, eq: Equilibrium | None = None, floor: float = LARGE_DIFFUSION_FLOOR
) -> tuple[int, float, bool]:
    """Large-diffusion sign law for K2: (sign, lambda_star, diffusion_is_large).

    The third entry is False when d1 or d2 is below ``floor``; the sign is then
    only indicative.
    """
    ls = lambda_star(k, p)
    diff = ls - p.lam
    sign = (diff > 0) - (diff < 0)
    return sign, ls, bool(p.d1 >= floor and p.d2 >= floor)


def K2_leading_term(k: int, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Leading large-d1 approximation of K2 (for d2 of the same order)."""
    eq = _eq(p, eq)
    lk = _lam_k(k, p.L)
    u = eq.u_bar
    lhs = p.L * (lk + p.lam) ** 3 * (lambda_star(k, p) - p.lam) * p.d1 / (48.0 * u * u)
    # lhs approximates u (k pi)^2 / (2L) * K2
    return lhs * 2.0 * p.L / (u * (k * math.pi) ** 2)


def asymptotic_expansions(k: int, p: ModelParams, eq: Equilibrium | None = None) -> tuple[float, float]:
    """Leading large-diffusion forms of chi_k and P_k."""
    eq = _eq(p, eq)
    lk = _lam_k(k, p.L)
    return (lk + p.lam) * p.d1 / eq.u_bar, lk + p.lam


def _predicted(k: int, K2: float, report: StabilityReport) -> PredictedStability:
    if report.loss_type is LossType.HOPF or k != report.argmin_k or K2 < 0:
        return PredictedStability.UNSTABLE
    if report.loss_type is LossType.STEADY_STATE and K2 > 0:
        return PredictedStability.STABLE
    return PredictedStability.NOT_APPLICABLE


def compute_K2(
    k: int,
    p: ModelParams,
    eq: Equilibrium | None = None,
    report: StabilityReport | None = None,
    kmax: int = 200,
) -> BranchInfo:
    """Exact pitchfork coefficient K2 and branch metadata for mode k.

    Raises Degenerate when the steady and oscillatory thresholds of mode k
    coincide and NearSingular when the double-mode system is resonant.
    """
    eq = _eq(p, eq)
    ct = chi_tilde(k, p, eq)
    ch = chi_hat(k, p, eq)
    if abs(ct - ch) <= 1e-9 * max(abs(ct), abs(ch), np.finfo(float).tiny):
        raise Degenerate(k, ct, ch)
    ints = projection_integrals(k, p, eq, ct)
    K2 = K2_from_integrals(k, p, eq, ints)
    P, Q = eigenmode(k, p, eq)
    sign, ls, large = K2_asymptotic_sign(k, p, eq)
    if report is None:
        report = critical_chi(p, eq, kmax)
    return BranchInfo(
        k=k,
        chi_k=ct,
        P_k=P,
        Q_k=Q,
        K1=0.0,
        K2=K2,
        K2_asymptotic_sign=sign,
        lambda_star=ls,
        predicted_stability=_predicted(k, K2, report),
        large_diffusion=large,
        integrals=ints,
    )


def branch_table(p: ModelParams, kmax: int, eq: Equilibrium | None = None) -> list[BranchInfo | Exception]:
    """BranchInfo for k = 1..kmax; failing modes yield their exception instead."""
    eq = _eq(p, eq)
    report = critical_chi(p, eq)
    out: list[BranchInfo | Exception] = []
    for k in range(1, kmax + 1):
        try:
            out.append(compute_K2(k, p, eq, report))
        except (NearSingular, Degenerate) as exc:
            out.append(exc)
    return out
