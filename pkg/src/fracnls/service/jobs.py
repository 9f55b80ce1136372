"""Service-layer execution: translate validated request models into solver
calls and write the output tree.  Both the HTTP endpoints and the CLI's
in-process mode dispatch through these functions."""

from __future__ import annotations

import json
import math
import time
import warnings as _warnings
from pathlib import Path

import numpy as np

from ..dynamics import INITIAL_PRESETS, SolverConfig, run
from ..experiments import (EpsilonNet, Problem, case_preset, case_report,
                           compatibility_study, run_sweep, uniqueness_study)
from ..output import (canonical_json, eps_dirname, write_fits_json,
                      write_manifest, write_run_outputs, write_summary_csv)
from ..regularization import regularize
from ..spectral import ComplexField, FractionalOrder, Grid
from .schemas import (CaseOverridesModel, RunConfigModel, SelftestCheck,
                      SelftestResponse)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def _grid(cfg: RunConfigModel) -> Grid:
    try:
        return Grid(cfg.grid.L, cfg.grid.n)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _initial_field(cfg: RunConfigModel, grid: Grid) -> tuple[ComplexField, str]:
    init = cfg.initial
    if init.preset is not None:
        return INITIAL_PRESETS[init.preset](grid), init.preset
    t = init.gaussian
    vals = t.offset + t.amplitude * np.exp(-((grid.x - t.center) / t.width) ** 2)
    return ComplexField(grid, vals.astype(np.complex128)), "gaussian"


def _solver_config(cfg: RunConfigModel, dealias: bool) -> SolverConfig:
    try:
        return SolverConfig(
            order=FractionalOrder(cfg.order.s),
            final_time=cfg.time.T, dt=cfg.time.dt,
            snapshot_times=tuple(cfg.time.snapshot_times) or (cfg.time.T,),
            diag_stride=cfg.time.diag_stride, dealias=dealias,
            integrator=cfg.time.integrator, allow_large_dt=cfg.time.allow_large_dt,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _problem(cfg: RunConfigModel, grid: Grid) -> Problem:
    try:
        return Problem(
            grid=grid, order=FractionalOrder(cfg.order.s),
            V_spec=cfg.coefficients.V.to_spec(cfg.grid.L),
            g_spec=cfg.coefficients.g.to_spec(cfg.grid.L),
            initial=cfg.initial.preset or "paper_bump",
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _net(cfg: RunConfigModel) -> EpsilonNet:
    reg = cfg.regularization
    if reg.net is None:
        raise ConfigError("this command needs an epsilon net, not a single epsilon")
    try:
        return EpsilonNet(tuple(reg.net), reg.scaling.to_law())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _collect_warnings(caught) -> list[str]:
    return [str(w.message) for w in caught]


def execute_run(cfg: RunConfigModel, out_dir: Path, dealias: bool = False) -> dict:
    """Single-epsilon run: snapshots plus diagnostics time series plus manifest."""
    start = time.perf_counter()
    grid = _grid(cfg)
    reg = cfg.regularization
    if reg.epsilon is None:
        raise ConfigError("run needs a single 'epsilon' (use sweep for nets)")
    law = reg.scaling.to_law()
    solver = _solver_config(cfg, dealias)
    u0, init_label = _initial_field(cfg, grid)

    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        try:
            V = regularize(cfg.coefficients.V.to_spec(cfg.grid.L), reg.epsilon, law, grid)
            g = regularize(cfg.coefficients.g.to_spec(cfg.grid.L), reg.epsilon, law, grid)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        record = run(solver, u0, V, g, initial_label=init_label)

    warns = _collect_warnings(caught) + list(record.warnings)
    files = write_run_outputs(out_dir, record)
    manifest = write_manifest(out_dir, cfg.canonical_echo(), files,
                              sorted(set(warns)), time.perf_counter() - start)
    return json.loads(manifest.read_text())


def _sweep_common(cfg: RunConfigModel, dealias: bool):
    grid = _grid(cfg)
    problem = _problem(cfg, grid)
    net = _net(cfg)
    solver = _solver_config(cfg, dealias)
    return grid, problem, net, solver


def _write_per_eps(out_dir: Path, epsilons, records) -> list[Path]:
    files = []
    for eps, rec in zip(epsilons, records):
        files.extend(write_run_outputs(out_dir / eps_dirname(eps), rec))
    return files


def execute_sweep(cfg: RunConfigModel, out_dir: Path, dealias: bool = False,
                  jobs: int = 1) -> dict:
    start = time.perf_counter()
    _, problem, net, solver = _sweep_common(cfg, dealias)
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        result = run_sweep(problem, net, solver, jobs=jobs)

    out_dir.mkdir(parents=True, exist_ok=True)
    files = _write_per_eps(out_dir, result.epsilons, result.records)
    summary = out_dir / "summary.csv"
    write_summary_csv(summary, result.epsilons, result.omegas, result.sup_hs)
    fits = out_dir / "fits.json"
    write_fits_json(
        fits,
        n_hat=None if result.moderateness is None else result.moderateness.exponent,
        residuals={} if result.moderateness is None
        else {"moderateness": result.moderateness.residual},
        extra={"fit_error": result.fit_error, "initial": result.initial},
    )
    files += [summary, fits]
    warns = sorted(set(_collect_warnings(caught) + result.all_warnings()))
    manifest = write_manifest(out_dir, cfg.canonical_echo(), files, warns,
                              time.perf_counter() - start)
    return json.loads(manifest.read_text())


def execute_compat(cfg: RunConfigModel, out_dir: Path, dealias: bool = False,
                   jobs: int = 1) -> dict:
    start = time.perf_counter()
    _, problem, net, solver = _sweep_common(cfg, dealias)
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        try:
            result = compatibility_study(problem, net, solver, jobs=jobs)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    out_dir.mkdir(parents=True, exist_ok=True)
    files = _write_per_eps(out_dir, result.epsilons, result.records)
    files.extend(write_run_outputs(out_dir / "reference", result.reference))
    summary = out_dir / "summary.csv"
    sup_hs = [rec.sup_hs() for rec in result.records]
    write_summary_csv(summary, result.epsilons, result.omegas, sup_hs,
                      sup_l2_diff=result.sup_l2_diff)
    fits = out_dir / "fits.json"
    write_fits_json(
        fits, k_hat=result.decay.exponent,
        residuals={"decay": result.decay.residual},
        extra={"gronwall_ratios": [v if math.isfinite(v) else None
                                   for v in result.gronwall_ratios],
               "initial": result.initial},
    )
    files += [summary, fits]
    warns = sorted(set(_collect_warnings(caught)
                       + [w for rec in result.records for w in rec.warnings]))
    manifest = write_manifest(out_dir, cfg.canonical_echo(), files, warns,
                              time.perf_counter() - start)
    return json.loads(manifest.read_text())


def execute_unique(cfg: RunConfigModel, out_dir: Path, dealias: bool = False,
                   jobs: int = 1) -> dict:
    start = time.perf_counter()
    _, problem, net, solver = _sweep_common(cfg, dealias)
    pert = cfg.perturbation
    k = pert.k if pert else 3.0
    target = pert.target if pert else "data"
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        result = uniqueness_study(problem, k, net, solver, target=target, jobs=jobs)

    out_dir.mkdir(parents=True, exist_ok=True)
    summary = out_dir / "summary.csv"
    write_summary_csv(summary, result.epsilons,
                      tuple(net.law.omega(e) for e in result.epsilons),
                      result.sup_hs, sup_l2_diff=result.sup_l2_diff)
    fits = out_dir / "fits.json"
    k_hat = result.negligibility.exponent
    write_fits_json(
        fits, k_hat="inf" if math.isinf(k_hat) else k_hat,
        residuals={"negligibility": result.negligibility.residual},
        extra={"injected_k": result.injected_k, "target": result.target,
               "initial": result.initial},
    )
    files = [summary, fits]
    warns = sorted(set(_collect_warnings(caught)))
    manifest = write_manifest(out_dir, cfg.canonical_echo(), files, warns,
                              time.perf_counter() - start)
    return json.loads(manifest.read_text())


def execute_case(label: str, out_dir: Path, overrides: CaseOverridesModel | None = None,
                 dealias: bool = False, jobs: int = 1) -> dict:
    start = time.perf_counter()
    try:
        preset = case_preset(label)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ov = overrides or CaseOverridesModel()
    net = preset.net if ov.net is None else EpsilonNet(tuple(ov.net))
    n = ov.n or 4096
    config = preset.solver_config(
        dt=ov.dt or 5e-4, final_time=ov.T, diag_stride=ov.diag_stride,
        track_abs_max=True, dealias=dealias,
    )
    with _warnings.catch_warnings(record=True) as caught:
        _warnings.simplefilter("always")
        report = case_report(label, net=net, config=config, n=n,
                             initial=ov.initial, jobs=jobs)

    out_dir.mkdir(parents=True, exist_ok=True)
    files = _write_per_eps(out_dir, report.sweep.epsilons, report.sweep.records)
    marker = report.trapping_marker if report.trapping_marker is not None \
        else report.point_marker
    summary = out_dir / "summary.csv"
    write_summary_csv(
        summary, report.sweep.epsilons, report.sweep.omegas, report.sweep.sup_hs,
        marker=marker,
        marker_name="trapping_marker" if report.trapping_marker is not None else "point_marker",
    )
    fits = out_dir / "fits.json"
    mod = report.sweep.moderateness
    extra = {"fit_error": report.sweep.fit_error, "initial": report.sweep.initial}
    if report.influence_marker is not None:
        extra["influence_marker"] = list(report.influence_marker)
    if report.point_marker is not None:
        extra["point_marker"] = list(report.point_marker)
    write_fits_json(fits, n_hat=None if mod is None else mod.exponent,
                    residuals={} if mod is None else {"moderateness": mod.residual},
                    extra=extra)
    files += [summary, fits]
    config_echo = {"case": label,
                   "overrides": ov.model_dump(mode="json")}
    warns = sorted(set(_collect_warnings(caught) + report.sweep.all_warnings()))
    manifest = write_manifest(out_dir, config_echo, files, warns,
                              time.perf_counter() - start)
    return json.loads(manifest.read_text())


# ---------------------------------------------------------------------------
# Selftest battery

def run_selftest(seed: int = 0) -> SelftestResponse:
    """Fast deterministic invariant battery; report bytes are reproducible."""
    from ..regularization import (ScalingLaw, default_mollifier, discrete_mass,
                                  fit_moderateness, scaled_mollifier)
    from ..spectral import fractional_laplacian, lp_norm

    checks: list[SelftestCheck] = []

    def check(name: str, passed: bool, detail: str):
        checks.append(SelftestCheck(name=name, passed=bool(passed), detail=detail))

    grid = Grid(2.0 * math.pi, 64)
    order = FractionalOrder(1.0)
    mode = ComplexField(grid, np.exp(2j * grid.x))
    lap = fractional_laplacian(mode, order)
    err = float(np.max(np.abs(lap.values - 4.0 * mode.values)))
    check("plane_wave_eigenfunction", err <= 1e-11, f"max error {err:.3e}")

    grid10 = Grid(10.0, 256)
    u0 = INITIAL_PRESETS["smooth_bump"](grid10)
    from ..regularization import CoefficientSpec
    ones = regularize(CoefficientSpec.constant(1.0), 0.5, ScalingLaw(), grid10)
    solver = SolverConfig(order=order, final_time=0.1, dt=1e-3,
                          allow_large_dt=True)
    rec = run(solver, u0, ones, ones)
    drift = rec.relative_mass_drift()
    check("mass_conservation_100_steps", drift <= 1e-11, f"relative drift {drift:.3e}")

    m = default_mollifier()
    ker = scaled_mollifier(m, 0.5, ScalingLaw(), Grid(10.0, 4096))
    mass_err = abs(discrete_mass(ker) - 1.0)
    check("mollifier_unit_mass", mass_err <= 1e-8, f"defect {mass_err:.3e}")

    eps = [0.5, 0.25, 0.125, 0.0625]
    pairs = [(e, e**-2.0) for e in eps]
    fit = fit_moderateness(pairs, ScalingLaw())
    check("moderateness_fit_synthetic", abs(fit.exponent - 2.0) <= 1e-10,
          f"N_hat {fit.exponent:.12f}")

    return SelftestResponse(passed=all(c.passed for c in checks), checks=checks,
                            seed=seed)
