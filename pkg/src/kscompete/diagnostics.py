"""Observables extracted from simulated trajectories."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy.signal import find_peaks

if TYPE_CHECKING:
    from .model import ModelParams
    from .solver import Grid, State, Trajectory

HOMOGENEOUS_TOL = 1e-12


# spatial modes ---------------------------------------------------------------


@dataclass(frozen=True)
class ModeSpectrum:
    amplitudes: np.ndarray
    kcut: int


def mode_amplitudes(field: np.ndarray, grid: "Grid", kcut: int) -> ModeSpectrum:
    """Cosine coefficients of ``field``: mean at k = 0, (2/L) int f cos(k pi x/L) for k >= 1."""
    if kcut >= grid.n / 2:
        raise ValueError(f"kcut={kcut} must be below n/2={grid.n / 2}")
    x = grid.x_centers
    k = np.arange(kcut + 1)
    basis = np.cos(np.outer(k, x) * (np.pi / grid.L))
    amps = basis @ np.asarray(field, dtype=float) * grid.dx * (2.0 / grid.L)
    amps[0] *= 0.5
    return ModeSpectrum(amps, kcut)


@dataclass(frozen=True)
class DominantMode:
    k: int
    amplitude: float
    homogeneous: bool


def dominant_mode(spec: ModeSpectrum) -> DominantMode:
    """Largest |amplitude| over k >= 1, ties toward smaller k."""
    a = np.abs(spec.amplitudes[1:])
    if a.size == 0 or np.max(a) <= HOMOGENEOUS_TOL:
        return DominantMode(0, 0.0, True)
    j = int(np.argmax(a))
    return DominantMode(j + 1, float(spec.amplitudes[j + 1]), False)


def dominant_mode_rms(fields: Sequence[np.ndarray], grid: "Grid", kcut: int) -> DominantMode:
    """Dominant mode of the time-RMS spectrum over several snapshots.

    Oscillating patterns pass through instants where a harmonic momentarily
    dominates, so the time average is the stable notion of their spatial mode.
    """
    amps = np.array([mode_amplitudes(f, grid, kcut).amplitudes for f in fields])
    rms = np.sqrt(np.mean(amps**2, axis=0))
    return dominant_mode(ModeSpectrum(rms, kcut))


# steady state ----------------------------------------------------------------


class SteadyStateMonitor:
    """Counts consecutive steps whose largest rate of change is below ``tol``."""

    def __init__(self, tol: float = 1e-8, window: int = 100):
        self.tol, self.window = tol, window
        self.count = 0

    def update(self, prev: "State", new: "State", dt: float) -> bool:
        rate = max(float(np.max(np.abs(new.u - prev.u))), float(np.max(np.abs(new.v - prev.v))), float(np.max(np.abs(new.w - prev.w)))) / dt
        self.count = self.count + 1 if rate < self.tol else 0
        return self.count >= self.window


def detect_steady_state(history: Sequence["State"], steady_tol: float = 1e-8, window: int = 100) -> bool:
    """True iff some ``window`` consecutive steps all change slower than ``steady_tol``."""
    if len(history) < window + 1:
        raise ValueError(f"need at least {window + 1} consecutive states, got {len(history)}")
    mon = SteadyStateMonitor(steady_tol, window)
    for prev, new in zip(history[:-1], history[1:]):
        dt = new.t - prev.t
        if dt <= 0:
            raise ValueError("history must be strictly increasing in time")
        if mon.update(prev, new, dt):
            return True
    return False


# temporal period -------------------------------------------------------------


class PeriodVerdict(str, enum.Enum):
    PERIODIC = "Periodic"
    NOT_PERIODIC = "NotPeriodic"
    STEADY = "Steady"


@dataclass(frozen=True)
class PeriodEstimate:
    verdict: PeriodVerdict
    period: float = math.nan
    n_peaks: int = 0
    confidence: float = math.nan


def detect_period(
    t: np.ndarray,
    values: np.ndarray,
    transient_fraction: float = 0.5,
    prominence: float = 0.1,
    max_spread: float = 0.2,
) -> PeriodEstimate:
    """Mean peak-to-peak interval after discarding the leading transient.

    Peaks must have prominence of at least ``prominence`` times the
    post-transient range. ``confidence`` is the relative spread
    (max - min) / mean of the intervals.
    """
    if not 0.0 <= transient_fraction <= 0.9:
        raise ValueError("transient_fraction must lie in [0, 0.9]")
    t = np.asarray(t, dtype=float)
    y = np.asarray(values, dtype=float)
    start = int(math.floor(transient_fraction * len(y)))
    t, y = t[start:], y[start:]
    if y.size < 3:
        return PeriodEstimate(PeriodVerdict.NOT_PERIODIC)
    span = float(np.max(y) - np.min(y))
    scale = max(1.0, float(np.max(np.abs(y))))
    if span < 1e-8 * scale:
        return PeriodEstimate(PeriodVerdict.STEADY)
    peaks, _ = find_peaks(y, prominence=prominence * span)
    if peaks.size < 3:
        return PeriodEstimate(PeriodVerdict.NOT_PERIODIC, n_peaks=int(peaks.size))
    intervals = np.diff(t[peaks])
    mean = float(np.mean(intervals))
    spread = float((np.max(intervals) - np.min(intervals)) / mean)
    verdict = PeriodVerdict.PERIODIC if spread <= max_spread else PeriodVerdict.NOT_PERIODIC
    return PeriodEstimate(verdict, mean, int(peaks.size), spread)


# mass bound ------------------------------------------------------------------


@dataclass(frozen=True)
class MassBound:
    field: str
    min_residual: float
    first_violation_time: float | None

    @property
    def ok(self) -> bool:
        return self.first_violation_time is None


def mass_bound(t: np.ndarray, mass: np.ndarray, mu: float, L: float, field: str = "u", tol: float = 1e-6) -> MassBound:
    """Residual exp(-mu t) mass(0) + L - mass(t) of the logistic mass bound."""
    t = np.asarray(t, dtype=float)
    mass = np.asarray(mass, dtype=float)
    resid = np.exp(-mu * (t - t[0])) * mass[0] + L - mass
    bad = np.nonzero(resid < -tol)[0]
    first = float(t[bad[0]]) if bad.size else None
    return MassBound(field, float(np.min(resid)), first)


def check_mass_bound(traj: "Trajectory", p: "ModelParams", tol: float = 1e-6) -> dict[str, MassBound]:
    s = traj.series
    return {
        "u": mass_bound(s["t"], s["mass_u"], p.mu1, p.L, "u", tol),
        "v": mass_bound(s["t"], s["mass_v"], p.mu2, p.L, "v", tol),
    }


# spikes ----------------------------------------------------------------------


def count_spikes(field: np.ndarray, grid: "Grid | None" = None, prominence: float = 0.2) -> int:
    """Local maxima with prominence >= ``prominence`` * (max - min), walls included.

    The field is mirror-reflected at both walls so that a boundary maximum is
    judged against its interior neighbours like any other peak.
    """
    f = np.asarray(field, dtype=float)
    span = float(np.max(f) - np.min(f))
    if span <= HOMOGENEOUS_TOL * max(1.0, float(np.max(np.abs(f)))):
        return 0
    n = f.size
    padded = np.concatenate([f[:0:-1], f, f[-2::-1]])
    peaks, _ = find_peaks(padded, prominence=prominence * span)
    peaks = peaks - (n - 1)
    return int(np.sum((peaks >= 0) & (peaks < n)))
