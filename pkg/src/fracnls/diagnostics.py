"""Conserved quantities, energy-estimate witnesses, Sobolev/GNS checks.

Implicit constants in the analytic inequalities are never asserted as
numbers; every check returns a BoundWitness carrying lhs, rhs and their
ratio, and callers enforce only regression-frozen ceilings on ratios.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .regularization import GridCoefficient
from .spectral import ComplexField, FractionalOrder, Grid, hs_norm, lp_norm


@dataclass(frozen=True)
class Hamiltonian:
    """Energy split H = ||(-Lap)^{s/2}u||_2^2 + ||V^{1/2}u||_2^2 + 1/2 ||g^{1/4}u||_4^4."""

    kinetic: float
    potential: float
    interaction: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential + self.interaction


@dataclass(frozen=True)
class BoundWitness:
    lhs: float
    rhs: float
    context: str = ""

    @property
    def degenerate(self) -> bool:
        return self.rhs == 0.0

    @property
    def ratio(self) -> float:
        if self.degenerate:
            return math.nan if self.lhs == 0.0 else math.inf
        return self.lhs / self.rhs


def mass(u: ComplexField) -> float:
    return lp_norm(u, 2)


def _check_nonnegative(coeff: GridCoefficient, name: str) -> None:
    if np.any(coeff.values < 0):
        raise ValueError(f"{name} must be nonnegative")


def hamiltonian(u: ComplexField, V: GridCoefficient, g: GridCoefficient,
                order: FractionalOrder) -> Hamiltonian:
    _check_nonnegative(V, "V")
    _check_nonnegative(g, "g")
    dx = u.grid.dx
    absu = np.abs(u.values)
    sym = np.abs(u.grid.wavenumbers) ** (2.0 * order.s)
    kinetic = float(np.sum(sym * np.abs(u.spectrum) ** 2) * dx)
    potential = float(np.sum(V.values * absu**2) * dx)
    interaction = 0.5 * float(np.sum(g.values * absu**4) * dx)
    return Hamiltonian(kinetic, potential, interaction)


def weighted_norms(u: ComplexField, V: GridCoefficient, g: GridCoefficient) -> tuple[float, float]:
    """(||V^{1/2} u||_L2, ||g^{1/4} u||_L4) by pointwise-weighted quadrature."""
    _check_nonnegative(V, "V")
    _check_nonnegative(g, "g")
    dx = u.grid.dx
    absu = np.abs(u.values)
    wl2 = float(np.sqrt(np.sum(V.values * absu**2) * dx))
    wl4 = float((np.sum(g.values * absu**4) * dx) ** 0.25)
    return wl2, wl4


def lemma1_linfty_bound(u_t: ComplexField, u0: ComplexField, V: GridCoefficient,
                        g: GridCoefficient, order: FractionalOrder) -> BoundWitness:
    """Witness for ||u(t)||_Hs <= C (1+||V||_inf)^{1/2} ||u0||_Hs + ||g||_inf^{1/2} ||u0||_L4^2."""
    lhs = hs_norm(u_t, order)
    rhs = (math.sqrt(1.0 + V.linf()) * hs_norm(u0, order)
           + math.sqrt(g.linf()) * lp_norm(u0, 4) ** 2)
    return BoundWitness(lhs, rhs, context="energy-estimate sup bound")


def linf_embedding_witness(u: ComplexField, order: FractionalOrder) -> BoundWitness:
    """Ratio ||u||_inf / ||u||_Hs for the d < 2s embedding; no constant asserted."""
    return BoundWitness(lp_norm(u, np.inf), hs_norm(u, order), context="Hs-to-Linf embedding")


def _general_lp_norm(u: ComplexField, q: float) -> float:
    # sobolev/GNS checks need exponents outside lp_norm's frozen set
    return float((np.sum(np.abs(u.values) ** q) * u.grid.dx) ** (1.0 / q))


def check_sobolev(u: ComplexField, order: FractionalOrder) -> BoundWitness:
    """Witness for ||u||_Lq <= C ||(-Lap)^{s/2} u||_L2 with q = 2d/(d-2s); needs d > 2s."""
    d = order.d
    if d <= 2.0 * order.s:
        raise ValueError(
            f"Sobolev inequality regime needs d > 2s, got d = {d}, s = {order.s}"
        )
    q = 2.0 * d / (d - 2.0 * order.s)
    sym = np.abs(u.grid.wavenumbers) ** order.s
    half_lap_l2 = float(np.sqrt(np.sum((sym * np.abs(u.spectrum)) ** 2) * u.grid.dx))
    return BoundWitness(_general_lp_norm(u, q), half_lap_l2, context=f"Sobolev q={q:g}")


@dataclass(frozen=True)
class GNSParams:
    """Exponent tuple of the interpolation inequality, restricted to the
    L2-scale Sobolev spaces (p1 = p2 = 2, r = 0) actually used here."""

    r: float
    s1: float
    s2: float
    p1: float
    p2: float
    q: float
    theta: float
    d: int = 1

    def __post_init__(self):
        if not (0 <= self.s1 <= self.s2):
            raise ValueError("need 0 <= s1 <= s2")
        if (self.s1, self.p1) == (self.s2, self.p2):
            raise ValueError("(s1, p1) and (s2, p2) must differ")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        if self.r < 0:
            raise ValueError("r must be nonnegative")
        if not (1 <= self.p1 and 1 <= self.p2 and 1 <= self.q):
            raise ValueError("integrability exponents must be >= 1")
        mu = self.theta * self.s1 + (1.0 - self.theta) * self.s2
        if not self.r < mu:
            raise ValueError(f"need r < theta*s1 + (1-theta)*s2 = {mu}")
        lhs = 1.0 / self.q
        rhs = self.theta / self.p1 + (1.0 - self.theta) / self.p2 - (mu - self.r) / self.d
        if abs(lhs - rhs) > 1e-12:
            raise ValueError(f"exponent balance violated: 1/q = {lhs}, balance = {rhs}")
        self._reject_exceptions(mu)
        if self.r != 0 or self.p1 != 2 or self.p2 != 2:
            raise ValueError("only r = 0 with p1 = p2 = 2 is implemented")

    def _reject_exceptions(self, mu: float) -> None:
        # first failure family: d = 1, integer s2 >= 1, p2 = 1, borderline s1
        if (self.d == 1 and self.s2 >= 1 and float(self.s2).is_integer()
                and self.p2 == 1 and self.p1 > 1):
            if abs(self.s1 - (self.s2 - 1.0 + 1.0 / self.p1)) < 1e-12:
                in_open = (self.s2 + self.theta / self.p1 - 1.0 < self.r
                           < self.s2 + self.theta / self.p1 - self.theta)
                if (math.isfinite(self.p1) and self.r == self.s2 - 1.0) or in_open:
                    raise ValueError("excluded borderline tuple (failure family 1)")
        # second: equal Sobolev deficits at an integer r with q = inf
        if (self.s1 < self.s2 and math.isinf(self.q)
                and (self.p1, self.p2) != (math.inf, 1.0)):
            def1 = self.s1 - self.d / self.p1
            def2 = self.s2 - self.d / self.p2
            if abs(def1 - def2) < 1e-12 and abs(def1 - self.r) < 1e-12 and float(self.r).is_integer():
                raise ValueError("excluded borderline tuple (failure family 2)")

    @classmethod
    def l6_tuple(cls, s: float, d: int = 1) -> "GNSParams":
        """The tuple behind ||u||_L6 <= C ||u||_Hs^{d/3s} ||u||_L2^{1-d/3s} (d < 3s)."""
        if not d < 3.0 * s:
            raise ValueError("L6 interpolation needs d < 3s")
        theta = 1.0 - d / (3.0 * s)
        return cls(r=0.0, s1=0.0, s2=s, p1=2.0, p2=2.0, q=6.0, theta=theta, d=d)


def check_gns(u: ComplexField, params: GNSParams) -> BoundWitness:
    """Witness lhs = ||u||_Lq, rhs = ||u||_L2^theta * ||u||_H{s2}^(1-theta)."""
    order = FractionalOrder(params.s2, params.d)
    lhs = _general_lp_norm(u, params.q)
    rhs = lp_norm(u, 2) ** params.theta * hs_norm(u, order) ** (1.0 - params.theta)
    return BoundWitness(lhs, rhs, context=f"GNS q={params.q:g} s={params.s2:g}")


# ---------------------------------------------------------------------------
# Random band-limited ensembles for empirical constant estimation

def band_limited_field(grid: Grid, max_mode: int, rng: np.random.Generator) -> ComplexField:
    """Random-phase field with unit-modulus coefficients on modes |j| <= max_mode.

    Unit moduli keep the L2 and Hs norms identical across draws, which makes
    ensemble maxima reproducible enough to compare across seeds.
    """
    j = np.rint(np.fft.fftfreq(grid.n, d=1.0 / grid.n)).astype(int)
    band = np.abs(j) <= max_mode
    coef = np.zeros(grid.n, dtype=np.complex128)
    coef[band] = np.exp(2j * np.pi * rng.random(int(band.sum())))
    return ComplexField.from_spectrum(grid, coef)


def gns_ensemble_max_ratio(grid: Grid, params: GNSParams, count: int, seed: int,
                           max_mode: int | None = None) -> float:
    rng = np.random.default_rng(seed)
    max_mode = max_mode if max_mode is not None else grid.n // 8
    best = 0.0
    for _ in range(count):
        w = check_gns(band_limited_field(grid, max_mode, rng), params)
        if not w.degenerate:
            best = max(best, w.ratio)
    return best
