"""Periodic grid, unitary DFT, fractional Laplacian, and the norms built on them.

Conventions fixed here and relied on everywhere else:

* The domain is the periodic box [0, L) sampled at n equispaced points,
  x_j = j * dx with dx = L / n.
* ``transform`` is the unitary DFT (numpy ``norm="ortho"``), so Parseval reads
  sum |f_hat|^2 = sum |f|^2 and every spectral sum carries the same quadrature
  weight dx as the physical rectangle rule.
* Wavenumbers are k_j = 2*pi*j_signed / L with j_signed in {-n/2, ..., n/2-1}
  (fft ordering, Nyquist at -n/2).  The multiplier |k|^{2s} is even, so the
  Nyquist mode needs no special casing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SUPPORTED_P = (2.0, 4.0, 6.0)


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, length)."""

    length: float
    n: int

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"grid length must be positive, got {self.length}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"grid size must be a power of two >= 8, got {self.n}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        x = np.arange(self.n) * self.dx
        x.flags.writeable = False
        return x

    @property
    def wavenumbers(self) -> np.ndarray:
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)
        k.flags.writeable = False
        return k

    def wrap(self, offsets: np.ndarray) -> np.ndarray:
        """Map coordinate offsets to the symmetric interval [-L/2, L/2)."""
        return (np.asarray(offsets) + 0.5 * self.length) % self.length - 0.5 * self.length

    def index_near(self, x0: float) -> int:
        """Index of the grid point closest to x0 (periodically)."""
        j = int(round((x0 % self.length) / self.dx))
        return j % self.n


@dataclass(frozen=True)
class FractionalOrder:
    """Fractional power s of the Laplacian; dimension fixed to d = 1."""

    s: float
    d: int = 1

    def __post_init__(self):
        if not self.s > 0:
            raise ValueError(f"fractional order must be positive, got {self.s}")
        if self.d != 1:
            raise ValueError("only d = 1 is supported")

    @classmethod
    def for_experiments(cls, s: float) -> "FractionalOrder":
        """Constructor for the well-posedness experiments, which need s > d/2."""
        if not s > 0.5:
            raise ValueError(f"well-posedness experiments require s > 1/2, got {s}")
        return cls(s)


class ComplexField:
    """Grid samples of a complex field with a write-once cached spectrum.

    Values are stored read-only; all operations return fresh fields, so
    instances can be shared freely across threads.
    """

    __slots__ = ("grid", "values", "_spectrum")

    def __init__(self, grid: Grid, values: np.ndarray, _spectrum: np.ndarray | None = None):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (grid.n,):
            raise ValueError(
                f"field length {values.shape} does not match grid size {grid.n}"
            )
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_spectrum", _spectrum)

    def __setattr__(self, name, value):
        raise AttributeError("ComplexField is immutable")

    @classmethod
    def from_spectrum(cls, grid: Grid, spectrum: np.ndarray) -> "ComplexField":
        spectrum = np.asarray(spectrum, dtype=np.complex128)
        if spectrum.shape != (grid.n,):
            raise ValueError(
                f"spectrum length {spectrum.shape} does not match grid size {grid.n}"
            )
        values = np.fft.ifft(spectrum, norm="ortho")
        spectrum = spectrum.copy()
        spectrum.flags.writeable = False
        return cls(grid, values, _spectrum=spectrum)

    @property
    def spectrum(self) -> np.ndarray:
        """Unitary DFT of the samples, computed once and cached."""
        if self._spectrum is None:
            spec = np.fft.fft(self.values, norm="ortho")
            spec.flags.writeable = False
            object.__setattr__(self, "_spectrum", spec)
        return self._spectrum


def transform(f: ComplexField) -> np.ndarray:
    """Unitary-convention DFT of the field samples."""
    return f.spectrum


def inverse_transform(grid: Grid, spectrum: np.ndarray) -> ComplexField:
    return ComplexField.from_spectrum(grid, spectrum)


def _multiplier_apply(f: ComplexField, symbol: np.ndarray) -> ComplexField:
    return ComplexField.from_spectrum(f.grid, symbol * f.spectrum)


def fractional_laplacian(f: ComplexField, order: FractionalOrder) -> ComplexField:
    """Apply the Fourier multiplier |k|^{2s}; the zero mode maps to 0."""
    sym = np.abs(f.grid.wavenumbers) ** (2.0 * order.s)
    return _multiplier_apply(f, sym)


def half_laplacian(f: ComplexField, order: FractionalOrder) -> ComplexField:
    """Apply |k|^{s}, the square root of the fractional Laplacian."""
    sym = np.abs(f.grid.wavenumbers) ** order.s
    return _multiplier_apply(f, sym)


def lp_norm(f: ComplexField, p: float) -> float:
    """Rectangle-rule L^p norm for p in {2, 4, 6} or the grid max for p = inf."""
    if p == np.inf:
        return float(np.max(np.abs(f.values)))
    if p not in _SUPPORTED_P:
        raise ValueError(f"unsupported exponent p = {p}; use one of {_SUPPORTED_P} or inf")
    a = np.abs(f.values)
    return float((np.sum(a**p) * f.grid.dx) ** (1.0 / p))


def hs_norm(f: ComplexField, order: FractionalOrder) -> float:
    """Sobolev norm (sum (1 + |k|^{2s}) |f_hat|^2 dx)^{1/2}.

    Equals sqrt(||f||_L2^2 + ||(-Lap)^{s/2} f||_L2^2) identically under the
    unitary transform convention; the quadratic-sum form is canonical here.
    """
    weight = 1.0 + np.abs(f.grid.wavenumbers) ** (2.0 * order.s)
    return float(np.sqrt(np.sum(weight * np.abs(f.spectrum) ** 2) * f.grid.dx))


def l2_difference(f: ComplexField, g: ComplexField) -> float:
    if f.grid != g.grid:
        raise ValueError("fields live on different grids")
    return float(np.sqrt(np.sum(np.abs(f.values - g.values) ** 2) * f.grid.dx))


def dealias_mask(grid: Grid) -> np.ndarray:
    """2/3-rule mask: True on modes kept, False on the clipped top third."""
    j = np.rint(np.fft.fftfreq(grid.n, d=1.0 / grid.n)).astype(int)
    return np.abs(j) <= grid.n // 3
