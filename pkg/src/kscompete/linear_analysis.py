"""Dispersion relation of the linearization at the homogeneous equilibrium.

For each Neumann mode cos(k pi x / L) the linearized system has the
characteristic cubic sigma^3 + alpha2 sigma^2 + alpha1 sigma + alpha0. Both
alpha0 and alpha1*alpha2 - alpha0 are affine in chi, which gives closed forms
for the steady-state threshold chi_tilde and the oscillatory threshold chi_hat.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .model import Equilibrium, ModelParams, compute_equilibrium

DEFAULT_KMAX = 200
TIE_RTOL = 1e-9
TAIL_STREAK = 3


@dataclass(frozen=True)
class ModeWavenumber:
    k: int
    Lambda: float

    @classmethod
    def of(cls, k: int, L: float) -> "ModeWavenumber":
        if k < 1:
            raise ValueError(f"mode index must be >= 1, got {k}")
        return cls(int(k), (k * math.pi / L) ** 2)


ModeLike = Union[int, ModeWavenumber]


def _mode(mode: ModeLike, p: ModelParams) -> ModeWavenumber:
    if isinstance(mode, ModeWavenumber):
        return mode
    return ModeWavenumber.of(int(mode), p.L)


def _eq(p: ModelParams, eq: Equilibrium | None) -> Equilibrium:
    return compute_equilibrium(p) if eq is None else eq


@dataclass(frozen=True)
class CharacteristicCoeffs:
    alpha2: float
    alpha1: float
    alpha0: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.alpha2, self.alpha1, self.alpha0)

    @property
    def hurwitz(self) -> float:
        return self.alpha1 * self.alpha2 - self.alpha0


class LossType(str, enum.Enum):
    STEADY_STATE = "SteadyState"
    HOPF = "Hopf"
    DEGENERATE = "Degenerate"


class Classification(str, enum.Enum):
    STABLE = "Stable"
    UNSTABLE = "Unstable"


def char_coeffs(mode: ModeLike, chi: float, p: ModelParams, eq: Equilibrium | None = None) -> CharacteristicCoeffs:
    """Coefficients of the characteristic cubic of mode k at chemotaxis rate chi."""
    eq = _eq(p, eq)
    lam_k = _mode(mode, p).Lambda
    u, v = eq.u_bar, eq.v_bar
    su = p.d1 * lam_k + p.mu1 * u
    sv = p.d2 * lam_k + p.mu2 * v
    comp = p.a1 * p.a2 * p.mu1 * p.mu2 * u * v
    h1 = lam_k + p.lam
    alpha2 = (p.d1 + p.d2 + 1.0) * lam_k + p.mu1 * u + p.mu2 * v + p.lam
    alpha1 = h1 * ((p.d1 + p.d2) * lam_k + p.mu1 * u + p.mu2 * v) - comp - (chi * u + p.xi * v) * lam_k + su * sv
    alpha0 = (
        -chi * u * lam_k * (p.d2 * lam_k + (1.0 - p.a2) * p.mu2 * v)
        - p.xi * v * lam_k * (p.d1 * lam_k + (1.0 - p.a1) * p.mu1 * u)
        - comp * h1
        + su * sv * h1
    )
    return CharacteristicCoeffs(alpha2, alpha1, alpha0)


def chi_tilde(mode: ModeLike, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Chemotaxis rate at which alpha0 of mode k vanishes (zero eigenvalue)."""
    eq = _eq(p, eq)
    lam_k = _mode(mode, p).Lambda
    u, v = eq.u_bar, eq.v_bar
    h3 = (p.d1 * lam_k + p.mu1 * u) * (p.d2 * lam_k + p.mu2 * v) - p.a1 * p.a2 * p.mu1 * p.mu2 * u * v
    num = h3 * (lam_k + p.lam) - p.xi * (p.d1 * v * lam_k**2 + (1.0 - p.a1) * p.mu1 * u * v * lam_k)
    den = p.d2 * u * lam_k**2 + (1.0 - p.a2) * p.mu2 * u * v * lam_k
    return num / den


def chi_hat(mode: ModeLike, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Chemotaxis rate at which alpha1*alpha2 - alpha0 of mode k vanishes."""
    eq = _eq(p, eq)
    lam_k = _mode(mode, p).Lambda
    u, v = eq.u_bar, eq.v_bar
    g1 = (p.d1 + 1.0) * u * lam_k**2 + (p.lam + p.mu1 * u + p.a2 * p.mu2 * v) * u * lam_k
    g2 = (p.d2 + 1.0) * v * lam_k**2 + (p.lam + p.a1 * p.mu1 * u + p.mu2 * v) * v * lam_k
    h1 = lam_k + p.lam
    h2 = (p.d1 + p.d2) * lam_k + p.mu1 * u + p.mu2 * v
    h3 = (p.d1 * lam_k + p.mu1 * u) * (p.d2 * lam_k + p.mu2 * v) - p.a1 * p.a2 * p.mu1 * p.mu2 * u * v
    return (-p.xi * g2 + h1 * h2**2 + h1**2 * h2 + h2 * h3) / g1


def eigenmode(mode: ModeLike, p: ModelParams, eq: Equilibrium | None = None) -> tuple[float, float]:
    """Coefficients (P_k, Q_k) of the kernel direction (P_k, Q_k, 1) cos(k pi x / L)."""
    eq = _eq(p, eq)
    lam_k = _mode(mode, p).Lambda
    v = eq.v_bar
    den = p.d2 * lam_k + (1.0 - p.a2) * p.mu2 * v
    P = ((p.d2 * lam_k + p.mu2 * v) * (lam_k + p.lam) - p.xi * v * lam_k) / den
    Q = (p.xi * v * lam_k - p.a2 * p.mu2 * v * (lam_k + p.lam)) / den
    return P, Q


def linearization_matrix(mode: ModeLike, chi: float, p: ModelParams, eq: Equilibrium | None = None) -> np.ndarray:
    """Jacobian of mode k acting on the amplitudes (u_k, v_k, w_k)."""
    eq = _eq(p, eq)
    lam_k = _mode(mode, p).Lambda
    u, v = eq.u_bar, eq.v_bar
    return np.array(
        [
            [-p.d1 * lam_k - p.mu1 * u, -p.a1 * p.mu1 * u, chi * u * lam_k],
            [-p.a2 * p.mu2 * v, -p.d2 * lam_k - p.mu2 * v, p.xi * v * lam_k],
            [1.0, 1.0, -lam_k - p.lam],
        ]
    )


# cubic roots -----------------------------------------------------------------


def _poly(c: tuple[float, float, float], s: complex) -> tuple[complex, complex]:
    a2, a1, a0 = c
    val = ((s + a2) * s + a1) * s + a0
    der = (3.0 * s + 2.0 * a2) * s + a1
    return val, der


def _polish(c: tuple[float, float, float], s: complex, steps: int = 4) -> complex:
    """Newton steps, kept only while they reduce the residual."""
    val, der = _poly(c, s)
    for _ in range(steps):
        if der == 0 or val == 0:
            break
        cand = s - val / der
        cval, cder = _poly(c, cand)
        if abs(cval) >= abs(val):
            break
        s, val, der = cand, cval, cder
    return s


def _quadratic(total: float, prod: float) -> list[complex]:
    """Roots of s^2 - total*s + prod."""
    disc = total * total - 4.0 * prod
    if disc < 0:
        im = math.sqrt(-disc) / 2.0
        return [complex(total / 2.0, im), complex(total / 2.0, -im)]
    q = (total + math.copysign(math.sqrt(disc), total)) / 2.0
    if q == 0.0:
        return [0j, 0j]
    return [complex(q), complex(prod / q)]


def cubic_roots(c: CharacteristicCoeffs | tuple[float, float, float]) -> np.ndarray:
    """All three roots of s^3 + a2 s^2 + a1 s + a0, sorted by decreasing real part.

    The cubic is rescaled to unit coefficient size, solved in closed form
    (trigonometric when three real roots exist, otherwise one real root with
    the complex pair recovered by deflation), and each root is Newton-polished.
    """
    coeffs = c.as_tuple() if isinstance(c, CharacteristicCoeffs) else tuple(float(x) for x in c)
    a2, a1, a0 = coeffs
    scale = max(abs(a2), math.sqrt(abs(a1)), abs(a0) ** (1.0 / 3.0))
    if scale == 0.0:
        return np.zeros(3, dtype=complex)
    A, B, C = a2 / scale, a1 / scale / scale, a0 / scale / scale / scale
    p = B - A * A / 3.0
    q = 2.0 * A**3 / 27.0 - A * B / 3.0 + C
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    shift = -A / 3.0
    if disc < 0.0:
        r = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * r)))
        theta = math.acos(arg) / 3.0
        trig = [r * math.cos(theta - 2.0 * math.pi * j / 3.0) + shift for j in range(3)]
        anchor = max(trig, key=abs)
    else:
        big = -math.copysign(float(np.cbrt(abs(q) / 2.0 + math.sqrt(disc))), q)
        small = 0.0 if big == 0.0 else -p / (3.0 * big)
        anchor = big + small + shift
    real = _polish((A, B, C), complex(anchor)).real
    if real == 0.0:
        rest_sum, rest_prod = -A, B
    else:
        # Vieta for the deflated quadratic; pick the better conditioned sum.
        rest_prod = -C / real
        sum_a = -A - real
        sum_b = (B - rest_prod) / real
        err_a = max(abs(A), abs(real))
        err_b = (abs(B) + abs(rest_prod)) / abs(real)
        rest_sum = sum_a if err_a <= err_b else sum_b
    pair = [_polish((A, B, C), s) for s in _quadratic(rest_sum, rest_prod)]
    if pair[0].imag != 0.0 or pair[1].imag != 0.0:
        z = pair[0] if pair[0].imag >= 0 else pair[1]
        pair = [complex(z.real, abs(z.imag)), complex(z.real, -abs(z.imag))]
    roots = [complex(real)] + pair
    out = np.array(roots, dtype=complex) * scale
    order = np.lexsort((-out.imag, -out.real))
    return out[order]


def cubic_residual_ok(c: CharacteristicCoeffs | tuple[float, float, float], s: complex, rtol: float = 1e-10) -> bool:
    a2, a1, a0 = c.as_tuple() if isinstance(c, CharacteristicCoeffs) else c
    m = abs(s)
    val = ((s + a2) * s + a1) * s + a0
    return abs(val) <= rtol * (m**3 + abs(a2) * m**2 + abs(a1) * m + abs(a0))


def routh_hurwitz_stable(c: CharacteristicCoeffs) -> bool:
    """All roots in the open left half plane iff the three sign conditions hold."""
    return c.alpha0 > 0 and c.alpha1 > 0 and c.alpha1 * c.alpha2 - c.alpha0 > 0


# dispersion table and critical threshold -------------------------------------


@dataclass(frozen=True)
class DispersionEntry:
    mode: ModeWavenumber
    chi_tilde: float
    chi_hat: float
    chi: float
    coeffs: CharacteristicCoeffs
    eigenvalues: np.ndarray = field(compare=False)


def dispersion_entry(mode: ModeLike, chi: float, p: ModelParams, eq: Equilibrium | None = None) -> DispersionEntry:
    eq = _eq(p, eq)
    m = _mode(mode, p)
    c = char_coeffs(m, chi, p, eq)
    return DispersionEntry(m, chi_tilde(m, p, eq), chi_hat(m, p, eq), chi, c, cubic_roots(c))


def dispersion_table(p: ModelParams, kmax: int, chi: float | None = None, eq: Equilibrium | None = None) -> list[DispersionEntry]:
    eq = _eq(p, eq)
    chi = p.chi if chi is None else chi
    return [dispersion_entry(k, chi, p, eq) for k in range(1, kmax + 1)]


@dataclass(frozen=True)
class StabilityReport:
    chi0: float
    argmin_k: int
    loss_type: LossType
    kmax_used: int
    chi_tilde_min: float
    k_tilde: int
    chi_hat_min: float
    k_hat: int
    tail_converged: bool
    # Set when alpha1 < 0 at chi_hat of the minimizing Hopf mode, which the
    # oscillatory-loss argument rules out; reported instead of trusted.
    alpha1_negative_at_hopf: bool = False
    chi: float | None = None
    classification: Classification | None = None


def critical_chi(p: ModelParams, eq: Equilibrium | None = None, kmax: int = DEFAULT_KMAX) -> StabilityReport:
    """Least instability threshold over modes 1..kmax, with early tail stopping.

    Iteration stops once both threshold sequences exceed the running minimum and
    have increased for three consecutive modes. Ties are broken toward smaller k.
    """
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    eq = _eq(p, eq)
    best_t, k_t = math.inf, 0
    best_h, k_h = math.inf, 0
    prev_t = prev_h = None
    streak_t = streak_h = 0
    converged = False
    k = 0
    for k in range(1, kmax + 1):
        ct = chi_tilde(k, p, eq)
        ch = chi_hat(k, p, eq)
        if ct < best_t:
            best_t, k_t = ct, k
        if ch < best_h:
            best_h, k_h = ch, k
        streak_t = streak_t + 1 if prev_t is not None and ct > prev_t else 0
        streak_h = streak_h + 1 if prev_h is not None and ch > prev_h else 0
        prev_t, prev_h = ct, ch
        running = min(best_t, best_h)
        if ct > running and ch > running and streak_t >= TAIL_STREAK and streak_h >= TAIL_STREAK:
            converged = True
            break

    scale = max(abs(best_t), abs(best_h), np.finfo(float).tiny)
    if abs(best_t - best_h) <= TIE_RTOL * scale:
        loss = LossType.DEGENERATE
        chi0, argk = min(best_t, best_h), min(k_t, k_h)
    elif best_t < best_h:
        loss, chi0, argk = LossType.STEADY_STATE, best_t, k_t
    else:
        loss, chi0, argk = LossType.HOPF, best_h, k_h

    alpha1_flag = False
    if loss is LossType.HOPF:
        alpha1_flag = char_coeffs(k_h, best_h, p, eq).alpha1 < 0
    return StabilityReport(
        chi0=chi0,
        argmin_k=argk,
        loss_type=loss,
        kmax_used=k,
        chi_tilde_min=best_t,
        k_tilde=k_t,
        chi_hat_min=best_h,
        k_hat=k_h,
        tail_converged=converged,
        alpha1_negative_at_hopf=alpha1_flag,
    )


def classify_equilibrium(chi: float, p: ModelParams, eq: Equilibrium | None = None, kmax: int = DEFAULT_KMAX) -> StabilityReport:
    rep = critical_chi(p, eq, kmax)
    cls = Classification.UNSTABLE if chi >= rep.chi0 else Classification.STABLE
    return StabilityReport(**{**rep.__dict__, "chi": chi, "classification": cls})


def dominant_growth_rate(mode: ModeLike, chi: float, p: ModelParams, eq: Equilibrium | None = None) -> complex:
    """Root of the mode-k cubic with the largest real part."""
    return complex(cubic_roots(char_coeffs(mode, chi, p, eq))[0])


__all__ = [
    "CharacteristicCoeffs",
    "Classification",
    "DispersionEntry",
    "LossType",
    "ModeWavenumber",
    "StabilityReport",
    "char_coeffs",
    "chi_hat",
    "chi_tilde",
    "classify_equilibrium",
    "critical_chi",
    "cubic_roots",
    "cubic_residual_ok",
    "dispersion_entry",
    "dispersion_table",
    "dominant_growth_rate",
    "eigenmode",
    "linearization_matrix",
    "routh_hurwitz_stable",
]
