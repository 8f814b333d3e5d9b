"""Independent reference computations used only for verification.

Nothing here feeds the analysis pipeline. Each oracle reaches its answer by a
different route from the production code:

* threshold roots by bisection on the characteristic coefficients,
* the second-order corrector projections and G by a fine-grid finite-difference
  solve of the corrector boundary-value problem plus quadrature,
* K2 by Newton continuation of the discrete steady branch.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl
from scipy.optimize import bisect

from .linear_analysis import char_coeffs, chi_tilde, eigenmode
from .model import Equilibrium, ModelParams, compute_equilibrium


def _bracket_root(f, x0: float = 0.0, width: float = 1.0) -> float:
    a, b = x0 - width, x0 + width
    fa, fb = f(a), f(b)
    while fa * fb > 0:
        width *= 2.0
        a, b = x0 - width, x0 + width
        fa, fb = f(a), f(b)
        if width > 1e300:
            raise ValueError("no sign change found")
    return bisect(f, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=5000)


def chi_tilde_bisection(k: int, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Root in chi of alpha0 for mode k."""
    eq = compute_equilibrium(p) if eq is None else eq
    return _bracket_root(lambda c: char_coeffs(k, c, p, eq).alpha0)


def chi_hat_bisection(k: int, p: ModelParams, eq: Equilibrium | None = None) -> float:
    """Root in chi of alpha1*alpha2 - alpha0 for mode k."""
    eq = compute_equilibrium(p) if eq is None else eq
    return _bracket_root(lambda c: char_coeffs(k, c, p, eq).hurwitz)


# corrector boundary-value problem ---------------------------------------------


def _neumann_laplacian(n: int, dx: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / dx**2


def _refined_solve(parts: list[sp.csr_matrix], b: np.ndarray, sweeps: int = 4) -> np.ndarray:
    """Solve (sum of parts) x = b by sparse LU plus iterative refinement.

    Adding O(1) reaction coefficients to O(1/dx^2) diagonal entries rounds
    them off, and the mean mode depends on exactly those coefficients. The
    residual is therefore evaluated part by part in extended precision, so the
    refined solution satisfies the unrounded operator.
    """
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    lu = spl.splu(total.tocsc())
    ext = [part.astype(np.longdouble) for part in parts]
    b_ext = b.astype(np.longdouble)
    x = lu.solve(b).astype(np.longdouble)
    for _ in range(sweeps):
        r = b_ext.copy()
        for part in ext:
            r -= part @ x
        x = x + lu.solve(np.asarray(r, dtype=float))
    return np.asarray(x, dtype=float)


def corrector_integrals_fd(k: int, p: ModelParams, n: int, eq: Equilibrium | None = None) -> dict[str, float]:
    """Solve the second-order corrector problem on n cells; return its projections.

    The operator is singular along the kernel (P, Q, 1) cos(k pi x / L), so the
    system is bordered with a Lagrange multiplier and the constraint that the
    solution has no component along that direction.
    """
    eq = compute_equilibrium(p) if eq is None else eq
    u, v = eq.u_bar, eq.v_bar
    chi = chi_tilde(k, p, eq)
    P, Q = eigenmode(k, p, eq)
    lk = (k * math.pi / p.L) ** 2
    dx = p.L / n
    x = (np.arange(n) + 0.5) * dx
    c1 = np.cos(k * math.pi * x / p.L)
    c2 = np.cos(2 * k * math.pi * x / p.L)
    lap = _neumann_laplacian(n, dx)
    eye = sp.identity(n, format="csr")
    zero = sp.csr_matrix((n, n))
    # Unknowns (phi, psi, gamma, multiplier). gamma'' is eliminated from the
    # first two rows using the third one, so each row holds one second difference.
    second = sp.bmat(
        [[p.d1 * lap, zero, zero], [zero, p.d2 * lap, zero], [zero, zero, lap]], format="csr"
    )
    reaction = sp.bmat(
        [
            [(chi - p.mu1) * u * eye, (chi - p.mu1 * p.a1) * u * eye, -chi * u * p.lam * eye],
            [(p.xi - p.mu2 * p.a2) * v * eye, (p.xi - p.mu2) * v * eye, -p.xi * v * p.lam * eye],
            [eye, eye, -p.lam * eye],
        ],
        format="csr",
    )
    kernel = np.concatenate([P * c1, Q * c1, c1])
    border_col = sp.csr_matrix(kernel[:, None])
    border_row = sp.csr_matrix(np.concatenate([kernel * dx, [0.0]])[None, :])
    pad_col = sp.csr_matrix((3 * n, 1))
    pad_row = sp.csr_matrix((1, 3 * n + 1))
    parts = [
        sp.vstack([sp.hstack([second, pad_col]), pad_row], format="csr"),
        sp.vstack([sp.hstack([reaction, border_col]), border_row], format="csr"),
    ]
    f_u = -chi * P * lk * c2 + p.mu1 * P * (P + p.a1 * Q) * c1**2
    f_v = -p.xi * Q * lk * c2 + p.mu2 * Q * (Q + p.a2 * P) * c1**2
    rhs = np.concatenate([f_u, f_v, np.zeros(n), [0.0]])
    sol = _refined_solve(parts, rhs)
    phi, psi, gam = sol[:n], sol[n : 2 * n], sol[2 * n : 3 * n]
    return {
        "mean_phi1": float(np.sum(phi) * dx),
        "mean_psi1": float(np.sum(psi) * dx),
        "mean_gamma1": float(np.sum(gam) * dx),
        "double_phi1": float(np.sum(phi * c2) * dx),
        "double_psi1": float(np.sum(psi * c2) * dx),
        "double_gamma1": float(np.sum(gam * c2) * dx),
    }


def corrector_integrals_oracle(k: int, p: ModelParams, n: int = 4096, eq: Equilibrium | None = None) -> dict[str, float]:
    """Richardson extrapolation of the n/2 and n cell solves (second-order scheme)."""
    fine = corrector_integrals_fd(k, p, n, eq)
    coarse = corrector_integrals_fd(k, p, n // 2, eq)
    return {key: (4.0 * fine[key] - coarse[key]) / 3.0 for key in fine}


def G_oracle(k: int, p: ModelParams, n: int = 4096, eq: Equilibrium | None = None) -> float:
    eq = compute_equilibrium(p) if eq is None else eq
    I = corrector_integrals_oracle(k, p, n, eq)
    P, Q = eigenmode(k, p, eq)
    lk = (k * math.pi / p.L) ** 2
    a2m2 = p.a2 * p.mu2
    return (
        a2m2 / 2 * Q * I["double_phi1"]
        + (p.xi / 2 * lk + a2m2 / 2 * P + p.mu2 * Q) * I["double_psi1"]
        - p.xi * Q * lk * I["double_gamma1"]
        + a2m2 / 2 * Q * I["mean_phi1"]
        + (a2m2 / 2 * P + p.mu2 * Q - p.xi / 2 * lk) * I["mean_psi1"]
    )


# branch continuation ------------------------------------------------------------


def _branch_operators(n: int, dx: float):
    lap = _neumann_laplacian(n, dx)
    grad = sp.diags([-np.ones(n - 1), np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr") / dx
    avg = sp.diags([0.5 * np.ones(n - 1), 0.5 * np.ones(n - 1)], [0, 1], shape=(n - 1, n), format="csr")
    pad = sp.vstack([sp.csr_matrix((1, n - 1)), sp.identity(n - 1), sp.csr_matrix((1, n - 1))])
    div = (sp.diags([-np.ones(n), np.ones(n)], [0, 1], shape=(n, n + 1)) @ pad) / dx
    return lap, grad.tocsr(), avg.tocsr(), div.tocsr()


def branch_point(s: float, k: int, p: ModelParams, n: int = 128, eq: Equilibrium | None = None) -> float:
    """chi on the discrete steady branch whose mode-k amplitude is s.

    Newton on the steady finite-volume equations with chi as an unknown and the
    projection onto (P, Q, 1) cos(k pi x / L) pinned to s times its norm.
    """
    eq = compute_equilibrium(p) if eq is None else eq
    ub, vb, wb = eq.u_bar, eq.v_bar, eq.w_bar
    P, Q = eigenmode(k, p, eq)
    dx = p.L / n
    x = (np.arange(n) + 0.5) * dx
    c = np.cos(k * math.pi * x / p.L)
    lap, grad, avg, div = _branch_operators(n, dx)
    z = np.concatenate([ub + s * P * c, vb + s * Q * c, wb + s * c, [chi_tilde(k, p, eq)]])
    target = s * (P * P + Q * Q + 1.0) * np.sum(c * c) * dx
    crow = np.concatenate([P * c, Q * c, c]) * dx
    for _ in range(60):
        uu, vv, ww, chi = z[:n], z[n : 2 * n], z[2 * n : 3 * n], z[3 * n]
        wx = grad @ ww
        fu = div @ ((avg @ uu) * wx)
        fv = div @ ((avg @ vv) * wx)
        ru = p.d1 * (lap @ uu) - chi * fu + p.mu1 * (1 - uu - p.a1 * vv) * uu
        rv = p.d2 * (lap @ vv) - p.xi * fv + p.mu2 * (1 - p.a2 * uu - vv) * vv
        rw = lap @ ww - p.lam * ww + uu + vv
        rc = crow @ np.concatenate([uu - ub, vv - vb, ww - wb]) - target
        res = np.concatenate([ru, rv, rw, [rc]])
        juu = p.d1 * lap - chi * (div @ sp.diags(wx) @ avg) + sp.diags(p.mu1 * (1 - 2 * uu - p.a1 * vv))
        juv = sp.diags(-p.mu1 * p.a1 * uu)
        juw = -chi * (div @ sp.diags(avg @ uu) @ grad)
        jvu = sp.diags(-p.mu2 * p.a2 * vv)
        jvv = p.d2 * lap - p.xi * (div @ sp.diags(wx) @ avg) + sp.diags(p.mu2 * (1 - p.a2 * uu - 2 * vv))
        jvw = -p.xi * (div @ sp.diags(avg @ vv) @ grad)
        top = sp.bmat(
            [
                [juu, juv, juw, sp.csr_matrix(-fu[:, None])],
                [jvu, jvv, jvw, sp.csr_matrix((n, 1))],
                [sp.identity(n), sp.identity(n), lap - p.lam * sp.identity(n), sp.csr_matrix((n, 1))],
            ]
        )
        jac = sp.vstack([top, sp.csr_matrix(np.concatenate([crow, [0.0]])[None, :])]).tocsc()
        dz = spl.spsolve(jac, -res)
        z = z + dz
        if np.max(np.abs(dz)) < 1e-13 * max(1.0, abs(z[-1])):
            break
    return float(z[-1])


def K2_continuation(k: int, p: ModelParams, s: float | None = None, n: int = 512, eq: Equilibrium | None = None) -> float:
    """Second-order coefficient of chi(s) by symmetric differences on the branch.

    With chi(s) = chi_k + K2 s^2 + K4 s^4 + ..., the combination
    [chi(2s) + chi(-2s) - chi(s) - chi(-s)] / (6 s^2) equals K2 + O(s^2).
    The default s keeps the perturbation at 0.1% of the smallest equilibrium
    component.
    """
    eq = compute_equilibrium(p) if eq is None else eq
    if s is None:
        P, Q = eigenmode(k, p, eq)
        s = 1e-3 * min(eq.u_bar, eq.v_bar, eq.w_bar) / max(abs(P), abs(Q), 1.0)
    vals = {t: branch_point(t, k, p, n, eq) for t in (s, -s, 2 * s, -2 * s)}
    return (vals[2 * s] + vals[-2 * s] - vals[s] - vals[-s]) / (6.0 * s * s)
