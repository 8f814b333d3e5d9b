"""Command-line front end: tables, branch data, simulations, sweeps, analysis, selftest.

Exit status: 0 success, 2 configuration error, 3 numerical failure,
4 selftest mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .bifurcation import BranchInfo, Degenerate, NearSingular, branch_table
from .config import (
    ALL_KEYS,
    Command,
    ConfigError,
    ExperimentSpec,
    dump_config,
    load_config,
    read_config_file,
    with_axis_value,
)
from .diagnostics import (
    PeriodVerdict,
    count_spikes,
    detect_period,
    dominant_mode,
    dominant_mode_rms,
    mass_bound,
    mode_amplitudes,
)
from .linear_analysis import chi_hat, chi_tilde, critical_chi
from .model import PARAM_KEYS, ModelParams, compute_equilibrium, Equilibrium, validate_params
from .solver import SERIES_COLUMNS, BlowUpError, Grid, State, Trajectory, initial_state, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SELFTEST = 0, 2, 3, 4
KCUT = 20


# formatting ---------------------------------------------------------------------


def fmt(value: Any) -> str:
    """Fixed CSV formatting: floats at 10 significant digits, enums by value."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.10g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if hasattr(value, "value"):
        return str(value.value)
    return "" if value is None else str(value)


def write_csv(path: Path | None, header: Sequence[str], rows: Iterable[Sequence[Any]], footer: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if footer:
        buf.write(footer + "\n")
    text = buf.getvalue()
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return text


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


# commands ------------------------------------------------------------------------


def table_rows(p: ModelParams, kmax: int) -> tuple[list[list[Any]], str]:
    eq = compute_equilibrium(p)
    rows = [[k, chi_tilde(k, p, eq), chi_hat(k, p, eq)] for k in range(1, kmax + 1)]
    rep = critical_chi(p, eq)
    footer = f"# chi0={fmt(rep.chi0)},argmin_k={rep.argmin_k},loss_type={rep.loss_type.value}"
    return rows, footer


def cmd_table(spec: ExperimentSpec) -> str:
    rows, footer = table_rows(spec.params, spec.kmax)
    return write_csv(spec.output_dir / "table.csv", ["k", "chi_tilde", "chi_hat"], rows, footer)


BRANCH_COLUMNS = ["k", "chi_k", "P_k", "Q_k", "K2", "lambda_star", "K2_asymptotic_sign", "predicted_stability", "status"]


def cmd_bifurcation(spec: ExperimentSpec) -> str:
    rows = []
    for k, item in enumerate(branch_table(spec.params, spec.kmax), start=1):
        if isinstance(item, BranchInfo):
            rows.append([k, item.chi_k, item.P_k, item.Q_k, item.K2, item.lambda_star, item.K2_asymptotic_sign, item.predicted_stability, "ok"])
        else:
            status = "NearSingular" if isinstance(item, NearSingular) else "Degenerate"
            rows.append([k, chi_tilde(k, spec.params), None, None, None, None, None, None, status])
    return write_csv(spec.output_dir / "bifurcation.csv", BRANCH_COLUMNS, rows)


def start_state(spec: ExperimentSpec, grid: Grid) -> State:
    """Perturbed equilibrium; without a positive equilibrium, the perturbed state (1, 1, 2/lambda)."""
    p = spec.params
    if validate_params(p).ok:
        eq = compute_equilibrium(p)
    else:
        eq = Equilibrium(1.0, 1.0, 2.0 / p.lam)
    return initial_state(grid, eq, spec.amplitude, spec.wavenumber)


SUMMARY_COLUMNS = ["reason", "final_t", "dominant_mode", "period", "spike_count", "mass_bound_ok"]


def summarize(t: np.ndarray, u_x0: np.ndarray, profiles: Sequence[tuple[float, np.ndarray]], grid: Grid, masses: dict[str, np.ndarray], p: ModelParams) -> dict[str, Any]:
    """Observables of one run from its probe series and stored u profiles."""
    est = detect_period(t, u_x0)
    final_u = profiles[-1][1]
    if est.verdict is PeriodVerdict.STEADY or len(profiles) < 2:
        dm = dominant_mode(mode_amplitudes(final_u, grid, min(KCUT, grid.n // 2 - 1)))
    else:
        t_half = 0.5 * (profiles[0][0] + profiles[-1][0])
        late = [u for s, u in profiles if s >= t_half]
        dm = dominant_mode_rms(late, grid, min(KCUT, grid.n // 2 - 1))
    period: Any = est.period if est.verdict is PeriodVerdict.PERIODIC else est.verdict.value
    ok = mass_bound(t, masses["u"], p.mu1, p.L, "u").ok and mass_bound(t, masses["v"], p.mu2, p.L, "v").ok
    return {"dominant_mode": dm.k, "period": period, "spike_count": count_spikes(final_u, grid), "mass_bound_ok": ok}


def write_trajectory(tr: Trajectory, out: Path) -> None:
    s = tr.series
    write_csv(out / "timeseries.csv", SERIES_COLUMNS, zip(*(s[c] for c in SERIES_COLUMNS)))
    x = tr.grid.x_centers
    for i, snap in enumerate(tr.snapshots):
        write_csv(out / "profiles" / f"profile_{i:06d}.csv", ["x", "u", "v", "w"], zip(x, snap.u, snap.v, snap.w))
    with open(out / "profiles" / "times.csv", "w", encoding="utf-8") as fh:
        fh.write(write_csv(None, ["index", "t"], ((i, snap.t) for i, snap in enumerate(tr.snapshots))))


def trajectory_summary(tr: Trajectory) -> dict[str, Any]:
    s = tr.series
    profiles = [(snap.t, snap.u) for snap in tr.snapshots]
    row = summarize(s["t"], s["u_at_x0"], profiles, tr.grid, {"u": s["mass_u"], "v": s["mass_v"]}, tr.params)
    return {"reason": tr.reason.value, "final_t": tr.final.t, **row}


def simulate(spec: ExperimentSpec) -> Trajectory:
    grid = Grid.from_spacing(spec.params.L, spec.solver_cfg.dx)
    return run(start_state(spec, grid), grid, spec.params, spec.solver_cfg)


def cmd_simulate(spec: ExperimentSpec) -> str:
    out = spec.output_dir
    out.mkdir(parents=True, exist_ok=True)
    dump_config(replace(spec, command=Command.SIMULATE), out / "config.json")
    try:
        tr = simulate(spec)
    except BlowUpError as exc:
        if exc.trajectory is not None:
            write_trajectory(exc.trajectory, out)
        raise
    write_trajectory(tr, out)
    summary = trajectory_summary(tr)
    text = write_csv(out / "summary.csv", SUMMARY_COLUMNS, [[summary[c] for c in SUMMARY_COLUMNS]])
    if spec.emit_plots:
        from .plots import plot_profile, plot_series

        plot_profile(tr.grid.x_centers, tr.final, out / "profile.svg")
        plot_series(tr.series, out / "timeseries.svg")
    return text


def load_trajectory_dir(path: Path) -> tuple[ModelParams, Grid, dict[str, np.ndarray], list[tuple[float, np.ndarray]]]:
    raw = read_config_file(path / "config.json")
    p = ModelParams.from_dict({k: raw[k] for k in PARAM_KEYS if k in raw})
    header, rows = read_csv(path / "timeseries.csv")
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    series = {name: arr[:, j] for j, name in enumerate(header)}
    _, trows = read_csv(path / "profiles" / "times.csv")
    profiles = []
    grid = None
    for idx, t in trows:
        _, prow = read_csv(path / "profiles" / f"profile_{int(idx):06d}.csv")
        parr = np.array(prow, dtype=float)
        if grid is None:
            grid = Grid(p.L, parr.shape[0])
        profiles.append((float(t), parr[:, 1]))
    if grid is None:
        raise ConfigError("profiles", f"no profiles found in {path}")
    return p, grid, series, profiles


ANALYZE_COLUMNS = ["dominant_mode", "period", "spike_count", "mass_bound_ok"]


def cmd_analyze(spec: ExperimentSpec, source: Path) -> str:
    p, grid, series, profiles = load_trajectory_dir(source)
    row = summarize(series["t"], series["u_at_x0"], profiles, grid, {"u": series["mass_u"], "v": series["mass_v"]}, p)
    return write_csv(spec.output_dir / "analysis.csv", ANALYZE_COLUMNS, [[row[c] for c in ANALYZE_COLUMNS]])


SWEEP_BASE = ["chi0", "argmin_k", "loss_type", "chi_tilde_min", "k_tilde", "chi_hat_min", "k_hat"]
SWEEP_SIM = ["reason", "final_t", "dominant_mode", "period", "spike_count", "mass_bound_ok"]


def sweep_point(spec: ExperimentSpec) -> dict[str, Any]:
    row: dict[str, Any] = {"error": ""}
    if validate_params(spec.params).ok:
        rep = critical_chi(spec.params)
        row.update(
            chi0=rep.chi0,
            argmin_k=rep.argmin_k,
            loss_type=rep.loss_type.value,
            chi_tilde_min=rep.chi_tilde_min,
            k_tilde=rep.k_tilde,
            chi_hat_min=rep.chi_hat_min,
            k_hat=rep.k_hat,
        )
    else:
        row["error"] = "no positive equilibrium"
    if spec.sweep_simulate:
        try:
            row.update(trajectory_summary(simulate(spec)))
        except BlowUpError as exc:
            row.update(reason="BlowUp", final_t=exc.t)
            row["error"] = str(exc)
    return row


def cmd_sweep(spec: ExperimentSpec) -> str:
    assert spec.sweep_axis is not None
    name, values = spec.sweep_axis
    points = [with_axis_value(spec, name, v) for v in values]
    workers = spec.workers or os.cpu_count() or 1
    if workers == 1 or len(points) == 1:
        results = [sweep_point(s) for s in points]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(points))) as pool:
            results = list(pool.map(sweep_point, points))
    cols = [name] + SWEEP_BASE + (SWEEP_SIM if spec.sweep_simulate else []) + ["error"]
    rows = [[v] + [r.get(c) for c in cols[1:]] for v, r in zip(values, results)]
    return write_csv(spec.output_dir / "sweep.csv", cols, rows)


def cmd_selftest(numbers: Sequence[int] | None, stream=None) -> int:
    from .acceptance import run_all

    stream = sys.stdout if stream is None else stream
    results = run_all(numbers)
    for r in results:
        print(r.report(), file=stream)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=stream)
    return EXIT_OK if passed == len(results) else EXIT_SELFTEST


# argument parsing ---------------------------------------------------------------


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", type=Path, help="flat JSON config file")
    sp.add_argument("--output-dir", dest="output_dir", help="output directory (overrides the environment)")
    for key in PARAM_KEYS:
        sp.add_argument(f"--{key}", dest=f"p_{key}", type=float, metavar="X")
    sp.add_argument("--kmax", type=int)


def _add_solver(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--dt", type=float)
    sp.add_argument("--dx", type=float)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--scheme", choices=["Explicit", "SemiImplicit"])
    sp.add_argument("--advection", choices=["Central", "Upwind"])
    sp.add_argument("--explicit-chemotaxis", dest="implicit_chemotaxis", action="store_const", const=False)
    sp.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    sp.add_argument("--series-every", dest="series_every", type=int)
    sp.add_argument("--steady-tol", dest="steady_tol", type=float)
    sp.add_argument("--no-steady-stop", dest="detect_steady", action="store_const", const=False)
    sp.add_argument("--amplitude", type=float)
    sp.add_argument("--wavenumber", type=float)
    sp.add_argument("--plots", dest="emit_plots", action="store_const", const=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kscompete", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sp = sub.add_parser("table", help="threshold table chi_tilde, chi_hat for k = 1..kmax")
    _add_common(sp)
    sp = sub.add_parser("bifurcation", help="pitchfork data for k = 1..kmax")
    _add_common(sp)
    sp = sub.add_parser("simulate", help="time integration with CSV output")
    _add_common(sp)
    _add_solver(sp)
    sp = sub.add_parser("sweep", help="critical thresholds (and optionally simulations) over one axis")
    _add_common(sp)
    _add_solver(sp)
    sp.add_argument("--axis", dest="sweep_axis")
    sp.add_argument("--values", dest="sweep_values", help="comma-separated numbers or start:stop:step")
    sp.add_argument("--simulate", dest="sweep_simulate", action="store_const", const=True)
    sp.add_argument("--workers", type=int)
    sp = sub.add_parser("analyze", help="summarize a simulate output directory")
    sp.add_argument("source", type=Path)
    sp.add_argument("--output-dir", dest="output_dir")
    sp = sub.add_parser("selftest", help="run the reference reproduction checks")
    sp.add_argument("--quick", action="store_true", help="analytic checks only")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def parse_values(text: str) -> list[float]:
    if ":" in text:
        parts = [float(x) for x in text.split(":")]
        if len(parts) != 3 or parts[2] == 0:
            raise ConfigError("sweep_values", "range must be start:stop:step with nonzero step")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(max(count, 0))]
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError("sweep_values", f"cannot parse {text!r}") from None


def overrides_from_args(args: argparse.Namespace) -> dict[str, Any]:
    out: dict[str, Any] = {"command": args.command}
    for key, value in vars(args).items():
        if value is None or key in ("command", "config", "source", "quick", "only"):
            continue
        if key.startswith("p_"):
            out[key[2:]] = value
        elif key == "sweep_values":
            out[key] = parse_values(value)
        elif key in ALL_KEYS:
            out[key] = value
    return out


def _error(kind: str, message: str, key: str | None = None) -> None:
    record = {"error": kind, "message": message}
    if key is not None:
        record["key"] = key
    print(json.dumps(record), file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        numbers = None
        if args.only:
            numbers = [int(x) for x in args.only.split(",")]
        elif args.quick:
            from .acceptance import ANALYTIC

            numbers = list(ANALYTIC)
        return cmd_selftest(numbers)
    try:
        spec = load_config(getattr(args, "config", None), overrides_from_args(args))
        if spec.command is Command.TABLE:
            text = cmd_table(spec)
        elif spec.command is Command.BIFURCATION:
            text = cmd_bifurcation(spec)
        elif spec.command is Command.SIMULATE:
            text = cmd_simulate(spec)
        elif spec.command is Command.SWEEP:
            text = cmd_sweep(spec)
        else:
            text = cmd_analyze(spec, args.source)
    except ConfigError as exc:
        _error("ConfigError", exc.message, exc.key)
        return EXIT_CONFIG
    except (BlowUpError, NearSingular, Degenerate) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_NUMERICAL
    sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
