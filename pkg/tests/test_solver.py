import logging

import numpy as np
import pytest
from hypothesis import given
import hypothesis.strategies as st

from kscompete.acceptance import boundary_layer_run, diffusion_error
from kscompete.model import SHORT_INTERVAL, ModelParams, compute_equilibrium
from kscompete.solver import (
    Advection,
    BlowUpError,
    Grid,
    Scheme,
    SolverConfig,
    SolverConfigError,
    State,
    Stepper,
    Termination,
    chemotactic_divergence,
    initial_state,
    run,
    step,
)


def small_run(p: ModelParams, **cfg) -> tuple:
    grid = Grid.from_spacing(p.L, cfg.pop("dx", 0.01))
    state = initial_state(grid, compute_equilibrium(p), cfg.pop("amp", 0.01))
    return run(state, grid, p, SolverConfig(**cfg)), grid


def test_grid_invariants():
    g = Grid(0.5, 50)
    assert g.dx * g.n == pytest.approx(0.5, rel=1e-15)
    assert g.x_centers[0] == pytest.approx(0.005) and len(g.x_centers) == 50
    with pytest.raises(ValueError):
        Grid(1.0, 7)
    assert Grid.from_spacing(0.5, 0.01).n == 50


def test_initial_state_examples():
    g = Grid(0.5, 50)
    eq = compute_equilibrium(SHORT_INTERVAL)
    flat = initial_state(g, eq, 0.0)
    assert np.all(flat.u == eq.u_bar) and np.all(flat.w == eq.w_bar)
    s = initial_state(g, eq, 0.01, 2.4)
    assert s.u[0] == pytest.approx(2 / 3 + 0.01 * np.cos(2.4 * np.pi * g.x_centers[0]), rel=1e-15)
    assert s.u[0] == pytest.approx(2 / 3 + 0.01, abs=3e-5)
    m = initial_state(g, eq, -0.01, 2.4)
    assert np.allclose(s.u - eq.u_bar, -(m.u - eq.u_bar), rtol=0, atol=1e-16)


def test_explicit_bound_is_enforced():
    with pytest.raises(SolverConfigError) as err:
        SolverConfig(scheme=Scheme.EXPLICIT, dt=0.01).validate(Grid(0.5, 50), SHORT_INTERVAL)
    assert err.value.key == "dt"
    SolverConfig(scheme=Scheme.EXPLICIT, dt=4e-5).validate(Grid(0.5, 50), SHORT_INTERVAL)


def test_invalid_config_values():
    for kw in ({"dt": 0.0}, {"t_end": -1.0}, {"snapshot_every": 0}):
        with pytest.raises(SolverConfigError):
            SolverConfig(**kw).validate()


@pytest.mark.parametrize(
    "cfg",
    [
        SolverConfig(),
        SolverConfig(implicit_chemotaxis=False),
        SolverConfig(advection=Advection.UPWIND),
        SolverConfig(scheme=Scheme.EXPLICIT, dt=4e-5),
    ],
)
def test_equilibrium_is_a_discrete_fixed_point(cfg):
    p = SHORT_INTERVAL.with_(chi=100.0)
    g = Grid(0.5, 50)
    eq = compute_equilibrium(p)
    s = initial_state(g, eq, 0.0)
    new = step(s, g, p, cfg)
    for a, b in zip(s.fields().values(), new.fields().values()):
        assert np.max(np.abs(a - b)) <= 1e-13


def test_zero_end_time_returns_initial_state():
    tr, _ = small_run(SHORT_INTERVAL, t_end=0.0)
    assert tr.reason is Termination.T_END and len(tr.snapshots) == 1 and tr.steps == 0
    assert tr.final.t == 0.0


def test_no_chemotaxis_converges_to_equilibrium():
    p = SHORT_INTERVAL.with_(chi=0.0, xi=0.0)
    tr, _ = small_run(p, t_end=200.0, detect_steady=False, snapshot_every=5000)
    eq = compute_equilibrium(p)
    f = tr.final
    dist = max(np.max(np.abs(f.u - eq.u_bar)), np.max(np.abs(f.v - eq.v_bar)), np.max(np.abs(f.w - eq.w_bar)))
    assert dist < 1e-6


def test_no_chemotaxis_stops_as_steady():
    p = SHORT_INTERVAL.with_(chi=0.0, xi=0.0)
    tr, _ = small_run(p, t_end=1e4, snapshot_every=10000)
    assert tr.reason is Termination.STEADY and tr.final.t < 1e4


def test_boundary_layer_is_monotone():
    tr = boundary_layer_run(100.0)
    u = tr.final.u
    assert tr.reason is Termination.STEADY and tr.final.t < 500
    assert np.all(np.diff(u) < 0) and np.argmax(u) == 0


@pytest.mark.parametrize("advection", [Advection.CENTRAL, Advection.UPWIND])
@pytest.mark.parametrize("implicit", [True, False])
def test_mass_conserved_without_kinetics(advection, implicit):
    p = ModelParams(mu1=0.0, mu2=0.0, lam=0.0, chi=5.0, xi=-2.0, L=1.0)
    g = Grid(1.0, 64)
    x = g.x_centers
    s = State(1 + 0.3 * np.cos(np.pi * x), 1 - 0.2 * np.cos(2 * np.pi * x), 1 + 0.5 * np.cos(3 * np.pi * x), 0.0)
    cfg = SolverConfig(t_end=5.0, detect_steady=False, advection=advection, implicit_chemotaxis=implicit)
    tr = run(s, g, p, cfg)
    assert abs(tr.series["mass_u"][-1] - tr.series["mass_u"][0]) <= 5e-12
    assert abs(tr.series["mass_v"][-1] - tr.series["mass_v"][0]) <= 5e-12


@given(st.lists(st.floats(0.1, 5.0), min_size=8, max_size=40), st.floats(-50, 50))
def test_chemotactic_divergence_is_conservative(values, c):
    f = np.array(values)
    w = np.cos(np.arange(len(f)) * 0.7)
    div = chemotactic_divergence(f, w, c, 0.1, Advection.CENTRAL)
    assert abs(np.sum(div)) <= 1e-10 * (1 + np.sum(np.abs(div)))


def test_spatial_convergence_is_second_order():
    e = [diffusion_error(n) for n in (20, 40, 80)]
    assert e[0] / e[1] >= 3.9 and e[1] / e[2] >= 3.9


def test_semi_implicit_and_explicit_converge_together():
    # Both schemes are first order in time, so their gap halves with dt.
    p = SHORT_INTERVAL.with_(chi=40.0)
    g = Grid(0.5, 50)
    s = initial_state(g, compute_equilibrium(p), 0.05)
    gaps = []
    for dt in (2e-5, 1e-5):
        cfg = SolverConfig(dt=dt, t_end=0.05, detect_steady=False)
        a = run(s, g, p, cfg.with_(scheme=Scheme.EXPLICIT)).final
        b = run(s, g, p, cfg).final
        gaps.append(np.max(np.abs(a.u - b.u)))
    assert 1.8 <= gaps[0] / gaps[1] <= 2.2


def test_blow_up_carries_partial_trajectory():
    p = SHORT_INTERVAL
    g = Grid(0.5, 50)
    s = initial_state(g, compute_equilibrium(p))
    with pytest.raises(BlowUpError) as err:
        run(s, g, p, SolverConfig(t_end=1.0, blowup_ceiling=2.5))
    tr = err.value.trajectory
    assert tr.reason is Termination.BLOW_UP and err.value.field == "w"
    assert len(tr.snapshots) >= 1


def test_negative_values_are_reported_not_clipped(caplog):
    p = SHORT_INTERVAL.with_(chi=0.0, xi=0.0)
    g = Grid(0.5, 50)
    eq = compute_equilibrium(p)
    u = np.full(50, eq.u_bar)
    u[10] = -0.5
    s = State(u, np.full(50, eq.v_bar), np.full(50, eq.w_bar), 0.0)
    cfg = SolverConfig(scheme=Scheme.EXPLICIT, dt=1e-5, t_end=1e-3, detect_steady=False)
    one = Stepper(g, p, cfg).step(s)
    assert one.u.min() < 0
    with caplog.at_level(logging.WARNING, logger="kscompete.solver"):
        tr = run(s, g, p, cfg)
    assert tr.negativity_events >= 1
    assert sum("negative density" in r.message for r in caplog.records) == 1


def test_runs_are_deterministic():
    p = SHORT_INTERVAL.with_(chi=70.0)
    a, _ = small_run(p, t_end=2.0, snapshot_every=50)
    b, _ = small_run(p, t_end=2.0, snapshot_every=50)
    assert all(np.array_equal(x.u, y.u) for x, y in zip(a.snapshots, b.snapshots))
    assert all(np.array_equal(a.series[k], b.series[k]) for k in a.series)


def test_snapshots_and_observers():
    seen = []
    p = SHORT_INTERVAL
    g = Grid(0.5, 50)
    s = initial_state(g, compute_equilibrium(p))
    tr = run(s, g, p, SolverConfig(t_end=1.0, snapshot_every=30, detect_steady=False), observers=[lambda st_: seen.append(st_.t)])
    times = [x.t for x in tr.snapshots]
    assert times[0] == 0.0 and times[-1] == pytest.approx(1.0)
    assert times[1] == pytest.approx(0.3)
    assert seen == pytest.approx(times[:-1])
    assert len(tr.series["t"]) == 101
