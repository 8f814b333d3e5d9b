"""Reference reproduction checks, shared by the test suite and ``kscompete selftest``.

Each ``criterion_N`` returns a CriterionResult made of named sub-checks; the
criterion passes only if every sub-check does. Simulations are memoised so a
later criterion can reuse the runs of earlier ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import oracles
from .bifurcation import K2_leading_term, compute_K2, lambda_star, mean_system, projection_integrals, second_order_matrix, double_mode_system
from .diagnostics import (
    PeriodVerdict,
    check_mass_bound,
    count_spikes,
    detect_period,
    dominant_mode,
    dominant_mode_rms,
    mode_amplitudes,
)
from .exact import cramer3
from .linear_analysis import (
    LossType,
    char_coeffs,
    chi_hat,
    chi_tilde,
    critical_chi,
    cubic_roots,
    dominant_growth_rate,
    routh_hurwitz_stable,
)
from .model import COARSENING, SHORT_INTERVAL, WAVEMODE, OSCILLATORY, ModelParams, compute_equilibrium
from .solver import Grid, SolverConfig, State, Termination, Trajectory, initial_state, run

SHORT_INTERVAL_REF = [
    (61.0, 75.2),
    (238.6, 290.2),
    (534.7, 648.4),
    (949.2, 1150.0),
    (1482.2, 1794.9),
    (2133.6, 2583.1),
    (2903.4, 3514.6),
]
WAVEMODE_L = [3, 5, 7, 9, 11, 13, 15, 17, 19, 21]
WAVEMODE_K0 = [1, 1, 2, 3, 3, 4, 4, 5, 5, 6]
WAVEMODE_CHI0 = [4.5868, 4.8455, 4.4330, 4.5868, 4.4260, 4.4815, 4.4290, 4.4465, 4.4327, 4.4330]
OSCILLATORY_L = list(range(1, 15))
OSCILLATORY_K1 = [1, 1, 1, 1, 2, 2, 2, 3, 3, 3, 4, 4, 4, 5]
OSCILLATORY_CHI0 = [129.0, 69.7, 63.2, 66.5, 64.5, 63.2, 64.2, 63.8, 63.2, 63.7, 63.5, 63.2, 63.5, 63.4]


@dataclass
class Check:
    label: str
    passed: bool
    detail: str = ""


@dataclass
class CriterionResult:
    number: int
    title: str
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def add(self, label: str, passed: bool, detail: str = "") -> None:
        self.checks.append(Check(label, bool(passed), detail))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [c.label for c in self.checks if not c.passed]
        extra = f" (failed: {', '.join(failed)})" if failed else ""
        return f"[{status}] criterion {self.number}: {self.title}{extra}"

    def report(self) -> str:
        lines = [self.line()]
        for c in self.checks:
            lines.append(f"    {'ok ' if c.passed else 'BAD'} {c.label}: {c.detail}")
        return "\n".join(lines)


# analytic criteria ----------------------------------------------------------------


def criterion_1() -> CriterionResult:
    res = CriterionResult(1, "mode thresholds on the short interval L = 0.5")
    eq = compute_equilibrium(SHORT_INTERVAL)
    for k, (ref_t, ref_h) in enumerate(SHORT_INTERVAL_REF, start=1):
        ct, ch = chi_tilde(k, SHORT_INTERVAL, eq), chi_hat(k, SHORT_INTERVAL, eq)
        res.add(f"k={k}", abs(ct - ref_t) <= 0.05 and abs(ch - ref_h) <= 0.05, f"chi_tilde={ct:.4f} (ref {ref_t}), chi_hat={ch:.4f} (ref {ref_h})")
    return res


def criterion_2() -> CriterionResult:
    res = CriterionResult(2, "destabilized wavemode and chi0 over L")
    for L, k0, c0 in zip(WAVEMODE_L, WAVEMODE_K0, WAVEMODE_CHI0):
        rep = critical_chi(WAVEMODE.with_(L=float(L)))
        ok = rep.argmin_k == k0 and abs(rep.chi0 - c0) <= 5e-4 and rep.loss_type is LossType.STEADY_STATE
        res.add(f"L={L}", ok, f"k0={rep.argmin_k} (ref {k0}), chi0={rep.chi0:.5f} (ref {c0}), {rep.loss_type.value}")
    return res


def criterion_3() -> CriterionResult:
    res = CriterionResult(3, "oscillatory thresholds over L")
    for L, k1, c0 in zip(OSCILLATORY_L, OSCILLATORY_K1, OSCILLATORY_CHI0):
        rep = critical_chi(OSCILLATORY.with_(L=float(L)))
        ok = rep.argmin_k == k1 and abs(rep.chi0 - c0) <= 0.05 and rep.loss_type is LossType.HOPF
        res.add(f"L={L}", ok, f"k1={rep.argmin_k} (ref {k1}), chi0={rep.chi0:.4f} (ref {c0}), {rep.loss_type.value}")
    return res


def _sign_law_params(d: float, lam_factor: float) -> tuple[ModelParams, int]:
    p = ModelParams(d1=d, d2=d, a1=0.5, a2=0.5, mu1=1.0, mu2=1.0, xi=0.5, lam=1.0, L=1.0)
    k0 = critical_chi(p).argmin_k
    p = p.with_(lam=lam_factor * lambda_star(k0, p))
    return p, critical_chi(p).argmin_k


def criterion_4() -> CriterionResult:
    res = CriterionResult(4, "K2 sign law and large-diffusion limit")
    for factor, want in ((0.5, 1), (2.0, -1)):
        p, k0 = _sign_law_params(1e4, factor)
        K2 = compute_K2(k0, p).K2
        res.add(f"sign at lambda={factor} lambda*", np.sign(K2) == want, f"k0={k0}, lambda={p.lam:.4g}, K2={K2:.6e}")
    for factor in (0.5, 2.0):
        p, k0 = _sign_law_params(1e5, factor)
        ratio = compute_K2(k0, p).K2 / K2_leading_term(k0, p)
        res.add(f"ratio at d=1e5, lambda={factor} lambda*", 0.9 <= ratio <= 1.1, f"K2/leading={ratio:.6f}")
    return res


def random_params(rng: np.random.Generator) -> ModelParams:
    """Random parameters satisfying the positive-equilibrium condition."""
    return ModelParams(
        d1=float(10 ** rng.uniform(-1, 1)),
        d2=float(10 ** rng.uniform(-1.5, 1)),
        chi=0.0,
        xi=float(rng.uniform(0, 3)),
        mu1=float(10 ** rng.uniform(-0.5, 0.5)),
        mu2=float(10 ** rng.uniform(-0.5, 0.5)),
        a1=float(rng.uniform(0, 0.9)),
        a2=float(rng.uniform(0, 0.9)),
        lam=float(10 ** rng.uniform(-1, 1)),
        L=float(10 ** rng.uniform(-0.5, 1)),
    )


def criterion_5(n_sets: int = 50, seed: int = 20240601) -> CriterionResult:
    res = CriterionResult(5, "independent oracle agreement on random parameters")
    rng = np.random.default_rng(seed)
    worst_root = worst_cramer = worst_G = 0.0
    rh_mismatch = rh_total = 0
    for _ in range(n_sets):
        p = random_params(rng)
        eq = compute_equilibrium(p)
        for k in (1, 2, 3, 5):
            ct, ch = chi_tilde(k, p, eq), chi_hat(k, p, eq)
            bt, bh = oracles.chi_tilde_bisection(k, p, eq), oracles.chi_hat_bisection(k, p, eq)
            worst_root = max(worst_root, abs(ct - bt) / max(abs(bt), 1e-300), abs(ch - bh) / max(abs(bh), 1e-300))
            lo = min(ct, ch)
            for chi in np.linspace(lo - 0.5 * abs(lo) - 1, max(ct, ch) + 0.5 * abs(lo) + 1, 9):
                if min(abs(chi - ct), abs(chi - ch)) < 1e-6 * max(1.0, abs(lo)):
                    continue
                c = char_coeffs(k, chi, p, eq)
                roots = cubic_roots(c)
                rh_total += 1
                rh_mismatch += routh_hurwitz_stable(c) != bool(np.all(roots.real < 0))
        k = 1
        chi_k = chi_tilde(k, p, eq)
        systems = [mean_system(k, p, eq), double_mode_system(k, p, eq, chi_k)]
        G = projection_integrals(k, p, eq).g_value
        systems.append((second_order_matrix(k, p, eq), np.array([G, 0.0, 0.0])))
        for m, b in systems:
            x, _ = cramer3(m, b)
            y = np.linalg.solve(m, b)
            worst_cramer = max(worst_cramer, float(np.max(np.abs(x - y)) / max(np.max(np.abs(y)), 1e-300)))
        go = oracles.G_oracle(k, p, 4096, eq)
        worst_G = max(worst_G, abs(G - go) / max(abs(go), 1e-300))
    res.add("(a) closed-form thresholds vs bisection", worst_root <= 1e-6, f"worst relative gap {worst_root:.2e}")
    res.add("(b) Routh-Hurwitz vs root signs", rh_mismatch == 0, f"{rh_mismatch} mismatches of {rh_total}")
    res.add("(c) Cramer vs pivoted elimination", worst_cramer <= 1e-10, f"worst relative gap {worst_cramer:.2e}")
    res.add("(d) G vs fine-grid boundary-value oracle", worst_G <= 1e-6, f"worst relative gap {worst_G:.2e}")
    return res


# simulation runs ----------------------------------------------------------------


def _simulate(p: ModelParams, t_end: float, snapshot_every: int = 100, detect_steady: bool = True, dx: float = 0.01, dt: float = 0.01) -> Trajectory:
    eq = compute_equilibrium(p)
    grid = Grid.from_spacing(p.L, dx)
    cfg = SolverConfig(dt=dt, dx=dx, t_end=t_end, snapshot_every=snapshot_every, detect_steady=detect_steady)
    return run(initial_state(grid, eq), grid, p, cfg)


@lru_cache(maxsize=None)
def wavemode_run(L: float) -> Trajectory:
    return _simulate(WAVEMODE.with_(chi=6.0, L=L), t_end=3000.0, snapshot_every=1000)


@lru_cache(maxsize=None)
def boundary_layer_run(chi: float) -> Trajectory:
    return _simulate(SHORT_INTERVAL.with_(chi=chi), t_end=1000.0, snapshot_every=1000)


@lru_cache(maxsize=None)
def hopf_run(L: float) -> Trajectory:
    return _simulate(OSCILLATORY.with_(chi=80.0, L=L), t_end=400.0, snapshot_every=50, detect_steady=False)


@lru_cache(maxsize=None)
def coarsening_run(L: float, t_end: float = 300.0) -> Trajectory:
    return _simulate(COARSENING.with_(L=L), t_end=t_end, snapshot_every=100, detect_steady=False)


@lru_cache(maxsize=None)
def growth_run() -> tuple[Trajectory, float, int]:
    p = WAVEMODE.with_(L=7.0)
    k0 = critical_chi(p).argmin_k
    p = p.with_(chi=1.05 * chi_tilde(k0, p))
    return _simulate(p, t_end=60.0, snapshot_every=10, detect_steady=False), dominant_growth_rate(k0, p.chi, p).real, k0


def criterion_6() -> CriterionResult:
    res = CriterionResult(6, "wavemode selection at chi = 6")
    for L, want in ((7.0, 2), (9.0, 3), (11.0, 3), (13.0, 4)):
        tr = wavemode_run(L)
        dm = dominant_mode(mode_amplitudes(tr.final.u, tr.grid, 20))
        ok = tr.reason is Termination.STEADY and dm.k == want
        res.add(f"L={L:g}", ok, f"{tr.reason.value} at t={tr.final.t:.2f}, dominant mode {dm.k} (ref {want})")
    return res


def criterion_7() -> CriterionResult:
    res = CriterionResult(7, "monotone boundary layer on a short interval")
    peaks = {}
    for chi in (100.0, 1000.0):
        tr = boundary_layer_run(chi)
        u = tr.final.u
        dm = dominant_mode(mode_amplitudes(u, tr.grid, 20))
        peaks[chi] = float(u[0])
        res.add(f"chi={chi:g} steady", tr.reason is Termination.STEADY, f"{tr.reason.value} at t={tr.final.t:.2f}")
        res.add(f"chi={chi:g} strictly decreasing", bool(np.all(np.diff(u) < 0)), f"max step {np.max(np.diff(u)):.3e}")
        res.add(f"chi={chi:g} dominant mode 1", dm.k == 1, f"dominant mode {dm.k}")
    res.add("peak at x=0 grows with chi", peaks[1000.0] > peaks[100.0], f"u(0)={peaks[100.0]:.4f} at chi=100, {peaks[1000.0]:.4f} at chi=1000")
    return res


def criterion_8() -> CriterionResult:
    res = CriterionResult(8, "oscillatory patterns in the Hopf regime")
    tr = hopf_run(4.0)
    est = detect_period(tr.series["t"], tr.series["u_at_x0"])
    res.add("L=4 periodic", est.verdict is PeriodVerdict.PERIODIC and tr.reason is Termination.T_END, f"{est.verdict.value}, {tr.reason.value}")
    res.add("L=4 period 11 +- 20%", abs(est.period - 11.0) <= 2.2, f"period {est.period:.3f} from {est.n_peaks} peaks, spread {est.confidence:.3f}")
    for L, want in ((6.0, 2), (8.0, 3), (12.0, 4), (14.0, 5)):
        tr = hopf_run(L)
        est = detect_period(tr.series["t"], tr.series["u_at_x0"])
        late = [s.u for s in tr.snapshots if s.t >= 0.5 * tr.config.t_end]
        dm = dominant_mode_rms(late, tr.grid, 20)
        res.add(f"L={L:g} mode", dm.k == want, f"time-RMS dominant mode {dm.k} (ref {want})")
        res.add(
            f"L={L:g} period in [6, 10]",
            est.verdict is PeriodVerdict.PERIODIC and 6.0 <= est.period <= 10.0,
            f"{est.verdict.value}, period {est.period:.3f}",
        )
    return res


def _drift_check() -> tuple[bool, str]:
    p = SHORT_INTERVAL.with_(chi=50.0)
    eq = compute_equilibrium(p)
    grid = Grid(p.L, 50)
    cfg = SolverConfig(t_end=1e5 * 0.01, snapshot_every=10**6, series_every=10**6, detect_steady=False)
    s0 = initial_state(grid, eq, 0.0)
    tr = run(s0, grid, p, cfg)
    drift = max(float(np.max(np.abs(a - b))) for a, b in ((tr.final.u, s0.u), (tr.final.v, s0.v), (tr.final.w, s0.w)))
    return drift < 1e-10 and tr.steps == 100000, f"{tr.steps} steps, drift {drift:.2e}"


def diffusion_error(n: int, t_end: float = 0.1, L: float = 1.0, d1: float = 1.0) -> float:
    """L-infinity error of the solver against exp(-d1 (pi/L)^2 t) cos(pi x / L)."""
    p = ModelParams(d1=d1, d2=1.0, chi=0.0, xi=0.0, mu1=0.0, mu2=0.0, a1=0.0, a2=0.0, lam=0.0, L=L)
    grid = Grid(L, n)
    dt = 0.1 * grid.dx**2
    steps = int(round(t_end / dt))
    dt = t_end / steps
    cfg = SolverConfig(dt=dt, dx=grid.dx, t_end=t_end, snapshot_every=10**9, series_every=10**9, detect_steady=False)
    x = grid.x_centers
    mode = np.cos(np.pi * x / L)
    s0 = State(2.0 + mode, np.ones(n), np.ones(n))
    tr = run(s0, grid, p, cfg)
    exact = 2.0 + math.exp(-d1 * (math.pi / L) ** 2 * t_end) * mode
    return float(np.max(np.abs(tr.final.u - exact)))


def conservation_drift(t_end: float = 10.0) -> float:
    """Largest |mass(t) - mass(0)| per unit time with kinetics and decay off."""
    p = ModelParams(d1=1.0, d2=0.5, chi=5.0, xi=-2.0, mu1=0.0, mu2=0.0, a1=0.5, a2=0.5, lam=0.0, L=2.0)
    grid = Grid(p.L, 200)
    x = grid.x_centers
    s0 = State(1.0 + 0.3 * np.cos(3.0 * x), 1.0 + 0.2 * np.cos(1.3 * x), 0.5 + 0.1 * np.cos(2.0 * x))
    tr = run(s0, grid, p, SolverConfig(t_end=t_end, dx=grid.dx, detect_steady=False))
    s = tr.series
    return max(float(np.max(np.abs(s["mass_u"] - s["mass_u"][0]))), float(np.max(np.abs(s["mass_v"] - s["mass_v"][0])))) / t_end


def growth_rate_check(t0: float = 20.0, t1: float = 60.0) -> tuple[float, float]:
    tr, sigma, k0 = growth_run()
    ts, amps = [], []
    for s in tr.snapshots:
        if t0 <= s.t <= t1:
            ts.append(s.t)
            amps.append(abs(mode_amplitudes(s.u, tr.grid, 20).amplitudes[k0]))
    slope = float(np.polyfit(ts, np.log(amps), 1)[0])
    return slope, sigma


def all_simulation_runs() -> list[Trajectory]:
    runs = [wavemode_run(L) for L in (7.0, 9.0, 11.0, 13.0)]
    runs += [boundary_layer_run(c) for c in (100.0, 1000.0)]
    runs += [hopf_run(L) for L in (4.0, 6.0, 8.0, 12.0, 14.0)]
    runs += [coarsening_run(L) for L in (0.5, 10.0)]
    runs.append(growth_run()[0])
    return runs


def criterion_9() -> CriterionResult:
    res = CriterionResult(9, "solver property suite")
    ok, detail = _drift_check()
    res.add("equilibrium fixed point over 1e5 steps", ok, detail)
    errs = [diffusion_error(n) for n in (16, 32, 64)]
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    res.add("second-order spatial convergence", min(ratios) >= 3.9, f"errors {', '.join(f'{e:.3e}' for e in errs)}; ratios {', '.join(f'{r:.3f}' for r in ratios)}")
    drift = conservation_drift()
    res.add("mass conservation without kinetics", drift <= 1e-12, f"drift {drift:.2e} per unit time")
    worst, bad = math.inf, []
    for tr in all_simulation_runs():
        for name, mb in check_mass_bound(tr, tr.params).items():
            worst = min(worst, mb.min_residual)
            if not mb.ok:
                bad.append(f"{name}@L={tr.params.L:g},chi={tr.params.chi:g}")
    res.add("mass bound on all runs", not bad, f"min residual {worst:.4f}; violations: {bad or 'none'}")
    slope, sigma = growth_rate_check()
    res.add("linear growth rate", abs(slope / sigma - 1.0) <= 0.15, f"fitted {slope:.5f}, predicted {sigma:.5f}, ratio {slope / sigma:.4f}")
    return res


def spike_history(tr: Trajectory) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    t = np.array([s.t for s in tr.snapshots])
    counts = np.array([count_spikes(s.u, tr.grid) for s in tr.snapshots])
    spans = np.array([float(np.ptp(s.u)) for s in tr.snapshots])
    return t, counts, spans


def criterion_10(formed_span: float = 0.5, early_window: float = 20.0) -> CriterionResult:
    """Spike coarsening; the pattern counts as formed once u varies by ``formed_span``."""
    res = CriterionResult(10, "spike coarsening")
    small = coarsening_run(0.5)
    n_small = count_spikes(small.final.u, small.grid)
    res.add("L=0.5 single spike", n_small == 1, f"{n_small} spikes at t={small.final.t:g}")
    tr = coarsening_run(10.0)
    t, counts, spans = spike_history(tr)
    formed = np.nonzero(spans >= formed_span)[0]
    if formed.size == 0:
        res.add("L=10 pattern forms", False, "u never developed spikes")
        return res
    i0 = formed[0]
    t_after, c_after = t[i0:], counts[i0:]
    early_max = int(np.max(c_after[t_after <= t_after[0] + early_window]))
    rises = [(float(t_after[j + 1]), int(c_after[j]), int(c_after[j + 1])) for j in range(len(c_after) - 1) if c_after[j + 1] > c_after[j]]
    res.add(
        "L=10 count non-increasing after formation",
        not rises,
        f"pattern formed at t={t_after[0]:g}; {len(rises)} increases, first {rises[:3]}",
    )
    res.add("L=10 final count below early maximum", int(c_after[-1]) < early_max, f"early max {early_max}, final {int(c_after[-1])}")
    return res


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}
ANALYTIC = (1, 2, 3, 4, 5)


def run_all(numbers=None) -> list[CriterionResult]:
    numbers = sorted(CRITERIA) if numbers is None else numbers
    return [CRITERIA[n]() for n in numbers]
