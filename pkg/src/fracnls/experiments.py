"""Epsilon-sweep studies: moderateness of solution nets, uniqueness as
negligibility, compatibility with the classical solution, and the four case
presets with their qualitative markers.

All sup-over-time quantities are taken over the recorded diagnostic stride
(norm series) or the common snapshot times (field differences); the stride and
snapshot grid are echoed in every result.  Per-epsilon runs are independent
and may execute in parallel; results are assembled in net order, so sweeps are
deterministic for fixed inputs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import INITIAL_PRESETS, RunRecord, SolverConfig, run
from .regularization import (CoefficientSpec, Constant, Delta, ExponentFit,
                             ScalingLaw, SmoothProfile, fit_moderateness,
                             fit_negligibility, regularize)
from .spectral import ComplexField, FractionalOrder, Grid, l2_difference

TRAPPING_SLACK = 0.05
CASE_LABELS = ("case1", "case2", "case3", "case4")
SINGULAR_POINT = 4.5


@dataclass(frozen=True)
class EpsilonNet:
    values: tuple[float, ...]
    law: ScalingLaw = ScalingLaw("power")

    def __post_init__(self):
        vals = self.values
        if not vals:
            raise ValueError("epsilon net must be nonempty")
        if any(not 0.0 < e <= 1.0 for e in vals):
            raise ValueError("epsilon values must lie in (0, 1]")
        if any(e2 >= e1 for e1, e2 in zip(vals, vals[1:])):
            raise ValueError("epsilon net must be strictly decreasing")
        if any(e == 1.0 for e in vals) and self.law.kind != "power":
            raise ValueError("epsilon = 1.0 is only admissible under the power law")

    @classmethod
    def geometric(cls, start: float, stop: float, count: int,
                  law: ScalingLaw = ScalingLaw("power")) -> "EpsilonNet":
        vals = tuple(float(v) for v in np.geomspace(start, stop, count))
        return cls(vals, law)

    def omegas(self) -> tuple[float, ...]:
        return tuple(self.law.omega(e) for e in self.values)


@dataclass(frozen=True)
class Problem:
    """A regularizable Cauchy problem: grid, order, coefficient specs, data."""

    grid: Grid
    order: FractionalOrder
    V_spec: CoefficientSpec
    g_spec: CoefficientSpec
    initial: str = "paper_bump"
    label: str = "custom"
    singular_point: float | None = None

    def initial_field(self) -> ComplexField:
        try:
            return INITIAL_PRESETS[self.initial](self.grid)
        except KeyError:
            raise ValueError(f"unknown initial preset {self.initial!r}") from None

    @property
    def is_singular(self) -> bool:
        return self.V_spec.is_singular or self.g_spec.is_singular


@dataclass(frozen=True)
class CasePreset:
    """The paper's four coefficient configurations on [0, 10), T = 10."""

    label: str
    V_spec: CoefficientSpec
    g_spec: CoefficientSpec
    net: EpsilonNet
    x0: float = SINGULAR_POINT
    length: float = 10.0
    final_time: float = 10.0
    initial: str = "paper_bump"

    def problem(self, n: int = 4096, initial: str | None = None) -> Problem:
        singular = self.V_spec.is_singular or self.g_spec.is_singular
        return Problem(
            grid=Grid(self.length, n), order=FractionalOrder.for_experiments(1.0),
            V_spec=self.V_spec, g_spec=self.g_spec,
            initial=initial or self.initial, label=self.label,
            singular_point=self.x0 if singular else None,
        )

    def solver_config(self, dt: float = 5e-4, diag_stride: int = 1,
                      snapshot_times: tuple[float, ...] | None = None,
                      track_abs_max: bool = False, final_time: float | None = None,
                      dealias: bool = False) -> SolverConfig:
        T = self.final_time if final_time is None else final_time
        if snapshot_times is None:
            snapshot_times = tuple(float(t) for t in np.linspace(0.0, T, 11))
        return SolverConfig(
            order=FractionalOrder.for_experiments(1.0), final_time=T, dt=dt,
            snapshot_times=snapshot_times, diag_stride=diag_stride,
            allow_large_dt=True, track_abs_max=track_abs_max, dealias=dealias,
        )


def case_preset(label: str) -> CasePreset:
    one = CoefficientSpec.constant(1.0)
    one_plus_delta = CoefficientSpec((Constant(1.0), Delta(SINGULAR_POINT, 1.0)))
    paper_net = EpsilonNet((1.0, 0.7, 0.3, 0.01))
    if label == "case1":
        return CasePreset(label, one, one, paper_net)
    if label == "case2":
        return CasePreset(label, one_plus_delta, one, paper_net)
    if label == "case3":
        return CasePreset(label, one, one_plus_delta,
                          EpsilonNet((0.015, 0.01, 0.009, 0.005)))
    if label == "case4":
        return CasePreset(label, one_plus_delta, one_plus_delta, paper_net)
    raise ValueError(f"unknown case label {label!r}; expected one of {CASE_LABELS}")


# ---------------------------------------------------------------------------
# Sweeps

@dataclass
class SweepResult:
    epsilons: tuple[float, ...]
    omegas: tuple[float, ...]
    records: list[RunRecord]
    sup_hs: np.ndarray
    pairwise_sup_l2: np.ndarray  # over common snapshot times
    moderateness: ExponentFit | None
    fit_error: str | None
    diag_stride: int
    snapshot_times: tuple[float, ...]
    initial: str

    def all_warnings(self) -> list[str]:
        out = []
        for eps, rec in zip(self.epsilons, self.records):
            out.extend(f"eps={eps:g}: {w}" for w in rec.warnings)
        return out


def _run_one(problem: Problem, eps: float, law: ScalingLaw,
             config: SolverConfig) -> RunRecord:
    V = regularize(problem.V_spec, eps, law, problem.grid)
    g = regularize(problem.g_spec, eps, law, problem.grid)
    return run(config, problem.initial_field(), V, g, initial_label=problem.initial)


def _run_net(problem: Problem, net: EpsilonNet, config: SolverConfig,
             jobs: int = 1) -> list[RunRecord]:
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futs = [pool.submit(_run_one, problem, e, net.law, config) for e in net.values]
            return [f.result() for f in futs]
    return [_run_one(problem, e, net.law, config) for e in net.values]


def _sup_snapshot_diff(a: RunRecord, b: RunRecord) -> float:
    return max(l2_difference(fa, fb)
               for (_, fa), (_, fb) in zip(a.snapshots, b.snapshots))


def run_sweep(problem: Problem, net: EpsilonNet, config: SolverConfig,
              jobs: int = 1) -> SweepResult:
    """Independent runs per epsilon plus the moderateness fit of sup_t ||u||_Hs."""
    records = _run_net(problem, net, config, jobs)
    sup_hs = np.array([r.sup_hs() for r in records])

    m = len(records)
    pairwise = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            pairwise[i, j] = pairwise[j, i] = _sup_snapshot_diff(records[i], records[j])

    fit: ExponentFit | None = None
    fit_error: str | None = None
    try:
        fit = fit_moderateness(list(zip(net.values, sup_hs)), net.law)
    except ValueError as exc:
        fit_error = str(exc)

    return SweepResult(
        epsilons=net.values, omegas=net.omegas(), records=records, sup_hs=sup_hs,
        pairwise_sup_l2=pairwise, moderateness=fit, fit_error=fit_error,
        diag_stride=config.diag_stride, snapshot_times=config.snapshot_times,
        initial=problem.initial,
    )


# ---------------------------------------------------------------------------
# Compatibility with the classical solution

@dataclass
class CompatibilityResult:
    epsilons: tuple[float, ...]
    omegas: tuple[float, ...]
    sup_l2_diff: np.ndarray
    coefficient_errors: np.ndarray  # ||V_eps - V||_inf + ||g_eps - g||_inf
    gronwall_ratios: np.ndarray     # diff / (e^T * coefficient error)
    decay: ExponentFit
    reference: RunRecord
    records: list[RunRecord]
    snapshot_times: tuple[float, ...]
    initial: str


def _unregularized(spec: CoefficientSpec, grid: Grid):
    from .regularization import GridCoefficient
    total = np.zeros(grid.n)
    for term in spec.terms:
        if isinstance(term, Constant):
            total += term.value
        elif isinstance(term, SmoothProfile):
            total += np.asarray(term.fn(grid.x), dtype=float)
        else:
            raise ValueError("no classical target: coefficient spec is singular")
    return GridCoefficient(grid, total)


def compatibility_study(problem: Problem, net: EpsilonNet, config: SolverConfig,
                        jobs: int = 1) -> CompatibilityResult:
    """Compare regularized runs against the unmollified-coefficient reference.

    Requires smooth/constant coefficient specs.  The initial data is shared by
    both sides (only the coefficients are mollified), so the measured decay is
    the coefficient mollification error transported by the flow.  Raises if
    the differences fail to decrease monotonically (10% slack) along the net.
    """
    if problem.is_singular:
        raise ValueError("compatibility study needs smooth coefficients (classical target)")
    grid = problem.grid
    V_ref = _unregularized(problem.V_spec, grid)
    g_ref = _unregularized(problem.g_spec, grid)
    u0 = problem.initial_field()
    reference = run(config, u0, V_ref, g_ref, initial_label=problem.initial)

    records = _run_net(problem, net, config, jobs)
    diffs, cerrs = [], []
    for eps, rec in zip(net.values, records):
        diffs.append(_sup_snapshot_diff(rec, reference))
        V_eps = regularize(problem.V_spec, eps, net.law, grid)
        g_eps = regularize(problem.g_spec, eps, net.law, grid)
        cerrs.append(float(np.max(np.abs(V_eps.values - V_ref.values)))
                     + float(np.max(np.abs(g_eps.values - g_ref.values))))
    diffs = np.array(diffs)
    cerrs = np.array(cerrs)

    for i in range(len(diffs) - 1):
        if diffs[i + 1] > 1.1 * diffs[i] and diffs[i + 1] > 1e-12:
            raise ValueError(
                f"sup L2 difference failed to decrease along the net: "
                f"{diffs[i + 1]:.3e} at eps={net.values[i + 1]:g} vs {diffs[i]:.3e} "
                f"at eps={net.values[i]:g}"
            )

    decay = fit_negligibility(list(zip(net.omegas(), diffs)))
    with np.errstate(divide="ignore", invalid="ignore"):
        gronwall = diffs / (math.exp(config.final_time) * cerrs)
    return CompatibilityResult(
        epsilons=net.values, omegas=net.omegas(), sup_l2_diff=diffs,
        coefficient_errors=cerrs, gronwall_ratios=gronwall, decay=decay,
        reference=reference, records=records,
        snapshot_times=config.snapshot_times, initial=problem.initial,
    )


# ---------------------------------------------------------------------------
# Uniqueness as negligibility

PERTURBATION_TARGETS = ("data", "potential", "nonlinearity")


@dataclass
class UniquenessResult:
    epsilons: tuple[float, ...]
    sup_l2_diff: np.ndarray
    sup_hs: np.ndarray
    injected_k: float
    target: str
    negligibility: ExponentFit
    snapshot_times: tuple[float, ...]
    initial: str


def _perturbation_profile(grid: Grid) -> np.ndarray:
    # bounded, smooth, nonnegative, so perturbed coefficients stay admissible
    return np.sin(2.0 * np.pi * grid.x / grid.length) ** 2


def uniqueness_study(problem: Problem, k: float, net: EpsilonNet,
                     config: SolverConfig, target: str = "data",
                     jobs: int = 1) -> UniquenessResult:
    """Inject an eps^k * profile perturbation and fit the decay of the
    resulting solution differences (the negligibility witness)."""
    if target not in PERTURBATION_TARGETS:
        raise ValueError(f"unknown perturbation target {target!r}")
    if k < 0:
        raise ValueError("perturbation exponent must be nonnegative")
    grid = problem.grid
    profile = _perturbation_profile(grid)
    u0 = problem.initial_field()

    def one(eps: float) -> tuple[float, float]:
        V = regularize(problem.V_spec, eps, net.law, grid)
        g = regularize(problem.g_spec, eps, net.law, grid)
        base = run(config, u0, V, g, initial_label=problem.initial)
        size = eps**k
        Vp, gp, u0p = V, g, u0
        if target == "data":
            u0p = ComplexField(grid, u0.values + size * profile)
        elif target == "potential":
            Vp = replace(V, values=V.values + size * profile)
        else:
            gp = replace(g, values=g.values + size * profile)
        pert = run(config, u0p, Vp, gp, initial_label=problem.initial)
        return _sup_snapshot_diff(base, pert), base.sup_hs()

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one, net.values))
    else:
        rows = [one(e) for e in net.values]
    diffs = np.array([r[0] for r in rows])
    sup_hs = np.array([r[1] for r in rows])
    fit = fit_negligibility(list(zip(net.values, diffs)))
    return UniquenessResult(
        epsilons=net.values, sup_l2_diff=diffs, sup_hs=sup_hs, injected_k=k,
        target=target, negligibility=fit, snapshot_times=config.snapshot_times,
        initial=problem.initial,
    )


# ---------------------------------------------------------------------------
# Case reports with qualitative markers

@dataclass
class CaseReport:
    label: str
    sweep: SweepResult
    trapping_marker: np.ndarray | None = None       # case4: min over window of max_t |u|
    point_marker: np.ndarray | None = None          # max_t |u(t, x0)| per epsilon
    influence_marker: np.ndarray | None = None      # sup_t L2 deviation from regular run
    window_halfwidth: float = 0.25
    x0: float = SINGULAR_POINT


def case_report(label: str, net: EpsilonNet | None = None,
                config: SolverConfig | None = None, n: int = 4096,
                initial: str | None = None, jobs: int = 1) -> CaseReport:
    """Run a case preset and attach the singular-point markers.

    For case4 the trapping marker a(eps) = min_{|x-x0|<=w} max_t |u(t,x)| must
    be nonincreasing along the net (5% slack), per the blocking effect the
    runs are meant to exhibit.
    """
    preset = case_preset(label)
    net = net or preset.net
    problem = preset.problem(n=n, initial=initial)
    singular = problem.is_singular
    config = config or preset.solver_config(track_abs_max=singular)
    if singular and not config.track_abs_max:
        config = replace(config, track_abs_max=True)

    sweep = run_sweep(problem, net, config, jobs)
    report = CaseReport(label=label, sweep=sweep)
    if not singular:
        return report

    grid = problem.grid
    j0 = grid.index_near(preset.x0)
    report.point_marker = np.array([r.abs_max[j0] for r in sweep.records])

    window = np.abs(grid.wrap(grid.x - preset.x0)) <= report.window_halfwidth
    if label == "case4":
        a = np.array([float(np.min(r.abs_max[window])) for r in sweep.records])
        report.trapping_marker = a
        for i in range(len(a) - 1):
            if a[i + 1] > (1.0 + TRAPPING_SLACK) * a[i]:
                raise ValueError(
                    f"trapping marker increased along the net: a({net.values[i + 1]:g}) "
                    f"= {a[i + 1]:.4g} > (1+{TRAPPING_SLACK})*a({net.values[i]:g}) = "
                    f"{(1 + TRAPPING_SLACK) * a[i]:.4g}"
                )

    regular = Problem(grid=grid, order=problem.order,
                      V_spec=CoefficientSpec.constant(1.0),
                      g_spec=CoefficientSpec.constant(1.0),
                      initial=problem.initial, label=f"{label}-regular-base")
    base = _run_one(regular, net.values[0], net.law, config)
    report.influence_marker = np.array(
        [_sup_snapshot_diff(rec, base) for rec in sweep.records])
    return report
