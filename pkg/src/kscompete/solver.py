"""Finite-volume time stepping of the chemotaxis competition system on (0, L).

Cell-centred grid, zero-flux walls via mirror ghosts, conservative face fluxes.
The semi-implicit scheme updates w first from the current u + v, then solves
one tridiagonal system each for u and v. By default the chemotactic flux is
taken at the new time level (linearly implicit in u, v with w already known),
which removes the advective step restriction at large chemotaxis rates; setting
``implicit_chemotaxis=False`` treats it explicitly instead.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Iterable

import numpy as np
from scipy.linalg import solve_banded

from .diagnostics import SteadyStateMonitor
from .model import Equilibrium, ModelParams, validate_params

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class Scheme(str, enum.Enum):
    EXPLICIT = "Explicit"
    SEMI_IMPLICIT = "SemiImplicit"


class Advection(str, enum.Enum):
    CENTRAL = "Central"
    UPWIND = "Upwind"


class Termination(str, enum.Enum):
    T_END = "TEnd"
    STEADY = "Steady"
    BLOW_UP = "BlowUp"


class SolverConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class BlowUpError(ArithmeticError):
    """A field became non-finite or exceeded the magnitude ceiling."""

    def __init__(self, t: float, field_name: str, value: float):
        self.t, self.field, self.value = t, field_name, value
        self.trajectory: Trajectory | None = None
        super().__init__(f"blow-up in {field_name} at t={t:.6g} (value {value!r})")


@dataclass(frozen=True)
class Grid:
    L: float
    n: int

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid needs at least 8 cells, got {self.n}")
        if not self.L > 0:
            raise ValueError("L must be positive")

    @classmethod
    def from_spacing(cls, L: float, dx: float) -> "Grid":
        return cls(L, max(8, int(round(L / dx))))

    @property
    def dx(self) -> float:
        return self.L / self.n

    @cached_property
    def x_centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.dx


@dataclass
class State:
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    t: float = 0.0

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.w.copy(), self.t)

    def fields(self) -> dict[str, np.ndarray]:
        return {"u": self.u, "v": self.v, "w": self.w}


@dataclass(frozen=True)
class SolverConfig:
    dt: float = 0.01
    t_end: float = 100.0
    dx: float = 0.01
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    advection: Advection = Advection.CENTRAL
    implicit_chemotaxis: bool = True
    snapshot_every: int = 100
    series_every: int = 1
    steady_tol: float = 1e-8
    steady_window: int = 100
    detect_steady: bool = True
    blowup_ceiling: float = 1e12

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "advection", Advection(self.advection))

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def validate(self, grid: Grid | None = None, p: ModelParams | None = None) -> None:
        if not self.dt > 0:
            raise SolverConfigError("dt", "must be positive")
        if not self.t_end >= 0:
            raise SolverConfigError("t_end", "must be nonnegative")
        if not self.dx > 0:
            raise SolverConfigError("dx", "must be positive")
        for key in ("snapshot_every", "series_every", "steady_window"):
            if getattr(self, key) < 1:
                raise SolverConfigError(key, "must be >= 1")
        if self.scheme is Scheme.EXPLICIT and grid is not None and p is not None:
            bound = grid.dx**2 / (2.0 * max(p.d1, p.d2, 1.0))
            if self.dt > bound:
                raise SolverConfigError("dt", f"explicit scheme needs dt <= dx^2/(2 max(d1, d2, 1)) = {bound:.3g}")


def initial_state(grid: Grid, eq: Equilibrium, perturbation_amplitude: float = 0.01, perturbation_wavenumber: float = 2.4) -> State:
    """Equilibrium plus amplitude * cos(wavenumber * pi * x) in each field."""
    bump = perturbation_amplitude * np.cos(perturbation_wavenumber * np.pi * grid.x_centers)
    u = eq.u_bar + bump
    v = eq.v_bar + bump
    w = eq.w_bar + bump
    for name, f in (("u", u), ("v", v), ("w", w)):
        if np.any(f <= 0):
            raise ValueError(f"perturbation amplitude {perturbation_amplitude} makes {name} nonpositive")
    return State(u, v, w, 0.0)


def _laplacian(f: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(f)
    out[1:-1] = f[2:] - 2.0 * f[1:-1] + f[:-2]
    out[0] = f[1] - f[0]
    out[-1] = f[-2] - f[-1]
    return out / (dx * dx)


def _face_weights(c: float, wx: np.ndarray, advection: Advection) -> tuple[np.ndarray, np.ndarray]:
    """Weights of the left and right cell values in the face value."""
    if advection is Advection.UPWIND:
        left = (c * wx >= 0).astype(float)
        return left, 1.0 - left
    half = np.full(wx.shape, 0.5)
    return half, half


def chemotactic_divergence(f: np.ndarray, w: np.ndarray, c: float, dx: float, advection: Advection) -> np.ndarray:
    """Discrete d/dx (c f w_x) in conservative form with zero wall flux."""
    wx = np.diff(w) / dx
    tl, tr = _face_weights(c, wx, advection)
    flux = c * (tl * f[:-1] + tr * f[1:]) * wx
    div = np.zeros_like(f)
    div[:-1] += flux
    div[1:] -= flux
    return div / dx


class Stepper:
    """Advances a State by one time level; holds the prefactored diffusion bands."""

    def __init__(self, grid: Grid, p: ModelParams, cfg: SolverConfig):
        if not validate_params(p, allow_zero_kinetics=True).ok_for_simulation:
            raise ValueError("; ".join(map(str, validate_params(p, allow_zero_kinetics=True).simulation)))
        cfg.validate(grid, p)
        self.grid, self.p, self.cfg = grid, p, cfg
        r = cfg.dt / grid.dx**2
        self._band_w = self._diffusion_band(1.0, r, cfg.dt * p.lam)
        self._band_u = self._diffusion_band(p.d1, r, 0.0)
        self._band_v = self._diffusion_band(p.d2, r, 0.0)

    def _diffusion_band(self, d: float, r: float, extra: float) -> np.ndarray:
        n = self.grid.n
        ab = np.zeros((3, n))
        ab[0, 1:] = -d * r
        ab[2, :-1] = -d * r
        ab[1, :] = 1.0 + 2.0 * d * r + extra
        ab[1, 0] -= d * r
        ab[1, -1] -= d * r
        return ab

    def _with_advection(self, ab: np.ndarray, c: float, wx: np.ndarray) -> np.ndarray:
        tl, tr = _face_weights(c, wx, self.cfg.advection)
        s = self.cfg.dt * c / self.grid.dx * wx
        ab = ab.copy()
        ab[1, :-1] += s * tl
        ab[0, 1:] += s * tr
        ab[2, :-1] -= s * tl
        ab[1, 1:] -= s * tr
        return ab

    def _kinetics(self, u: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        p = self.p
        return p.mu1 * (1.0 - u - p.a1 * v) * u, p.mu2 * (1.0 - p.a2 * u - v) * v

    def step(self, s: State, t_new: float | None = None) -> State:
        p, cfg, dx, dt = self.p, self.cfg, self.grid.dx, self.cfg.dt
        t_new = s.t + dt if t_new is None else t_new
        fu, fv = self._kinetics(s.u, s.v)
        if cfg.scheme is Scheme.EXPLICIT:
            u = s.u + dt * (p.d1 * _laplacian(s.u, dx) - chemotactic_divergence(s.u, s.w, p.chi, dx, cfg.advection) + fu)
            v = s.v + dt * (p.d2 * _laplacian(s.v, dx) - chemotactic_divergence(s.v, s.w, p.xi, dx, cfg.advection) + fv)
            w = s.w + dt * (_laplacian(s.w, dx) - p.lam * s.w + s.u + s.v)
        else:
            # Delta form: solve for the increment driven by the explicit residual,
            # so a constant equilibrium maps to itself up to kinetic rounding.
            rw = dt * (_laplacian(s.w, dx) - p.lam * s.w + s.u + s.v)
            w = s.w + solve_banded((1, 1), self._band_w, rw, check_finite=False)
            ru = dt * (p.d1 * _laplacian(s.u, dx) - chemotactic_divergence(s.u, w, p.chi, dx, cfg.advection) + fu)
            rv = dt * (p.d2 * _laplacian(s.v, dx) - chemotactic_divergence(s.v, w, p.xi, dx, cfg.advection) + fv)
            if cfg.implicit_chemotaxis:
                wx = np.diff(w) / dx
                band_u = self._with_advection(self._band_u, p.chi, wx)
                band_v = self._with_advection(self._band_v, p.xi, wx)
            else:
                band_u, band_v = self._band_u, self._band_v
            u = s.u + solve_banded((1, 1), band_u, ru, check_finite=False)
            v = s.v + solve_banded((1, 1), band_v, rv, check_finite=False)
        new = State(u, v, w, t_new)
        self._check(new)
        return new

    def _check(self, s: State) -> None:
        ceiling = self.cfg.blowup_ceiling
        for name, f in s.fields().items():
            m = float(np.max(np.abs(f)))
            if not math.isfinite(m) or m > ceiling:
                raise BlowUpError(s.t, name, m)


def step(state: State, grid: Grid, p: ModelParams, cfg: SolverConfig) -> State:
    """Advance one time level (builds a fresh Stepper; use ``run`` for long integrations)."""
    return Stepper(grid, p, cfg).step(state)


def is_negative(f: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(f))))
    return bool(np.min(f) < -10.0 * EPS * scale)


SERIES_COLUMNS = ("t", "u_at_x0", "u_at_midpoint", "mass_u", "mass_v", "Linf_u")


@dataclass
class Trajectory:
    grid: Grid
    params: ModelParams
    config: SolverConfig
    snapshots: list[State] = field(default_factory=list)
    series: dict[str, np.ndarray] = field(default_factory=dict)
    reason: Termination = Termination.T_END
    steps: int = 0
    negativity_events: int = 0

    @property
    def final(self) -> State:
        return self.snapshots[-1]


def _probe_row(s: State, grid: Grid) -> tuple[float, ...]:
    n = grid.n
    mid = 0.5 * (s.u[n // 2 - 1] + s.u[n // 2]) if n % 2 == 0 else s.u[n // 2]
    return (s.t, s.u[0], mid, float(np.sum(s.u)) * grid.dx, float(np.sum(s.v)) * grid.dx, float(np.max(np.abs(s.u))))


def run(
    state: State,
    grid: Grid,
    p: ModelParams,
    cfg: SolverConfig,
    observers: Iterable[Callable[[State], None]] = (),
) -> Trajectory:
    """Integrate until t_end or a detected steady state.

    Snapshots are stored every ``snapshot_every`` steps (plus the first and last
    states); probe series every ``series_every`` steps. On blow-up a
    BlowUpError is raised with the partial trajectory attached.
    """
    stepper = Stepper(grid, p, cfg)
    observers = list(observers)
    traj = Trajectory(grid, p, cfg, snapshots=[state.copy()])
    rows = [_probe_row(state, grid)]
    monitor = SteadyStateMonitor(cfg.steady_tol, cfg.steady_window)
    nsteps = int(round(cfg.t_end / cfg.dt))
    warned = False
    s = state
    for obs in observers:
        obs(s)
    i = 0
    try:
        for i in range(1, nsteps + 1):
            new = stepper.step(s, state.t + i * cfg.dt)
            if is_negative(new.u) or is_negative(new.v):
                traj.negativity_events += 1
                if not warned:
                    log.warning("negative density at t=%.6g (min u %.3e, min v %.3e)", new.t, new.u.min(), new.v.min())
                    warned = True
            steady = cfg.detect_steady and monitor.update(s, new, cfg.dt)
            s = new
            if i % cfg.series_every == 0:
                rows.append(_probe_row(s, grid))
            if i % cfg.snapshot_every == 0:
                traj.snapshots.append(s.copy())
                for obs in observers:
                    obs(s)
            if steady:
                traj.reason = Termination.STEADY
                break
    except BlowUpError as exc:
        traj.reason = Termination.BLOW_UP
        traj.steps = i - 1
        traj.series = _series(rows)
        exc.trajectory = traj
        raise
    traj.steps = i
    if traj.snapshots[-1].t != s.t:
        traj.snapshots.append(s.copy())
    if rows[-1][0] != s.t:
        rows.append(_probe_row(s, grid))
    traj.series = _series(rows)
    return traj


def _series(rows: list[tuple[float, ...]]) -> dict[str, np.ndarray]:
    arr = np.array(rows, dtype=float).reshape(-1, len(SERIES_COLUMNS))
    return {name: arr[:, j] for j, name in enumerate(SERIES_COLUMNS)}
