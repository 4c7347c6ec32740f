"""Conformal coordinate charts and the calculus on them.

A chart is a uniform grid on a rectangle, either doubly periodic (``torus``)
or open (``open-rectangle``).  Complex Wirtinger derivatives of arbitrary
order are provided by Fourier collocation on torus charts and by 8th-order
centered stencils on open charts (a boundary band is then invalid and must
be masked).  The metric bookkeeping assumes the immersion is conformal:
``ds^2 = F |dz|^2`` with ``F = lambda^2`` and the coframe gauge
``phi = lambda dz``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    AccuracyError,
    ConfigurationError,
    ConformalityError,
    DegenerateImmersionError,
)

TORUS = "torus"
OPEN = "open-rectangle"

#: hard cap on total derivative order (jets above this are never needed)
MAX_DERIVATIVE_ORDER = 8


def stencil_radius(p: int) -> int:
    """Halfwidth of the centered stencil giving 8th-order accuracy for d^p/dx^p."""
    if p == 0:
        return 0
    return p // 2 + 4


def fornberg_weights(x0: float, grid: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at x0 on arbitrary nodes."""
    n = len(grid)
    c = np.zeros((n, m + 1))
    c1 = 1.0
    c4 = grid[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2 = 1.0
        c5 = c4
        c4 = grid[i] - x0
        for j in range(i):
            c3 = grid[i] - grid[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


@dataclass(frozen=True)
class ChartGrid:
    """Uniform conformal coordinate patch."""

    topology: str
    Lx: float
    Ly: float
    nx: int
    ny: int
    x0: float = 0.0
    y0: float = 0.0

    def __post_init__(self):
        if self.topology not in (TORUS, OPEN):
            raise ConfigurationError(f"unknown topology {self.topology!r}")
        if not (self.Lx > 0 and self.Ly > 0):
            raise ConfigurationError("chart extents must be positive")
        if self.nx < 8 or self.ny < 8:
            raise ConfigurationError("chart resolution must be at least 8 per axis")

    @property
    def periodic(self) -> bool:
        return self.topology == TORUS

    @property
    def hx(self) -> float:
        return self.Lx / self.nx if self.periodic else self.Lx / (self.nx - 1)

    @property
    def hy(self) -> float:
        return self.Ly / self.ny if self.periodic else self.Ly / (self.ny - 1)

    @property
    def shape(self) -> tuple:
        return (self.ny, self.nx)

    @property
    def nnodes(self) -> int:
        return self.nx * self.ny

    @property
    def xs(self) -> np.ndarray:
        return self.x0 + np.arange(self.nx) * self.hx

    @property
    def ys(self) -> np.ndarray:
        return self.y0 + np.arange(self.ny) * self.hy

    def meshgrid(self):
        return np.meshgrid(self.xs, self.ys)  # (X, Y), each (ny, nx)

    @property
    def z(self) -> np.ndarray:
        X, Y = self.meshgrid()
        return X + 1j * Y

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.Lx, self.Ly))

    def interior_mask(self, band: int = 0) -> np.ndarray:
        """True on nodes whose stencils of halfwidth `band` stay inside the chart."""
        mask = np.ones(self.shape, dtype=bool)
        if not self.periodic and band > 0:
            mask[:band, :] = False
            mask[-band:, :] = False
            mask[:, :band] = False
            mask[:, -band:] = False
        return mask

    def cell_area(self) -> float:
        return self.hx * self.hy

    # -- differentiation -------------------------------------------------

    def _wavenumbers(self):
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.hx)
        ky = 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.hy)
        return np.meshgrid(kx, ky)

    def diff(self, fld: np.ndarray, p: int, q: int,
             tol: Tolerances = DEFAULT_TOLERANCES,
             denoise: bool = False) -> np.ndarray:
        """Wirtinger derivative d^p dbar^q of a sampled field.

        Torus charts use Fourier collocation (exact for band-limited data);
        open charts use 8th-order centered stencils and leave a boundary
        band of garbage that callers must mask via `interior_mask`.  With
        `denoise`, Fourier modes at the transform's round-off floor are
        zeroed first; derived smooth fields (logarithms of invariants and
        similar) are differentiated this way so that machine noise is not
        amplified by high wavenumbers.
        """
        if p < 0 or q < 0:
            raise ConfigurationError("derivative orders must be non-negative")
        if p + q == 0:
            return np.asarray(fld)
        if p + q > MAX_DERIVATIVE_ORDER:
            raise AccuracyError(
                f"total derivative order {p + q} exceeds the supported maximum "
                f"{MAX_DERIVATIVE_ORDER}")
        fld = np.asarray(fld)
        if fld.shape[:2] != self.shape:
            raise ConfigurationError(
                f"field shape {fld.shape} does not match chart {self.shape}")
        if self.periodic:
            return self._diff_spectral(fld, p, q, tol, denoise)
        return self._diff_stencil(fld, p, q)

    def _diff_spectral(self, fld, p, q, tol, denoise):
        eps = np.finfo(float).eps
        KX, KY = self._wavenumbers()
        sym = (((1j * KX + KY) * 0.5) ** p) * (((1j * KX - KY) * 0.5) ** q)
        spec = np.fft.fft2(fld, axes=(0, 1))
        symv = sym.reshape(sym.shape + (1,) * (fld.ndim - 2))
        if denoise:
            thr = 1e3 * eps * np.max(np.abs(spec))
            spec = np.where(np.abs(spec) < thr, 0.0, spec)
        # amplified content of the top spectral octave: for resolved data it
        # sits at the round-off floor of the transform; flag it only when it
        # rises well above that floor and matters at the field's own scale
        KXa, KYa = np.abs(KX), np.abs(KY)
        tail = (KXa > (2 / 3) * KXa.max()) | (KYa > (2 / 3) * KYa.max())
        tailv = tail.reshape(tail.shape + (1,) * (fld.ndim - 2))
        nnode = np.sqrt(self.nnodes)
        out_noise = np.linalg.norm(np.where(tailv, spec, 0.0) * symv) / nnode
        floor = 50.0 * eps * (np.linalg.norm(spec) / nnode) * \
            np.max(np.abs(sym[tail]))
        sup = np.max(np.abs(fld))
        if out_noise > max(tol.differentiation * sup, floor, 1e-9):
            raise AccuracyError(
                f"derivative order ({p},{q}) amplifies unresolved content "
                f"(estimated absolute error {out_noise:.2e} at resolution "
                f"{self.nx}x{self.ny})")
        out = np.fft.ifft2(spec * symv, axes=(0, 1))
        # Nyquist content of the smooth fields handled here is at machine
        # level already, so no separate treatment of those modes is needed
        return out

    def _diff_stencil(self, fld, p, q):
        from scipy.ndimage import correlate1d

        # expand (d/dz)^p (d/dzbar)^q into x/y partials
        terms = {}
        for a in range(p + 1):
            for b in range(q + 1):
                from math import comb
                coef = comb(p, a) * comb(q, b) * (-1j) ** a * (1j) ** b / 2 ** (p + q)
                xo = (p - a) + (q - b)
                yo = a + b
                terms[(xo, yo)] = terms.get((xo, yo), 0.0) + coef
        out = np.zeros(fld.shape, dtype=complex)
        for (xo, yo), coef in terms.items():
            part = fld.astype(complex)
            if xo:
                r = stencil_radius(xo)
                w = fornberg_weights(0.0, np.arange(-r, r + 1) * self.hx, xo)
                part = correlate1d(part.real, w, axis=1, mode="nearest") \
                    + 1j * correlate1d(part.imag, w, axis=1, mode="nearest")
            if yo:
                r = stencil_radius(yo)
                w = fornberg_weights(0.0, np.arange(-r, r + 1) * self.hy, yo)
                part = correlate1d(part.real, w, axis=0, mode="nearest") \
                    + 1j * correlate1d(part.imag, w, axis=0, mode="nearest")
            out += coef * part
        return out

    def shift(self, fld: np.ndarray, delta: float, axis: int) -> np.ndarray:
        """Resample a field at nodes shifted by `delta` along a coordinate axis.

        axis=1 shifts in x, axis=0 in y.  Spectral phase shift on torus
        charts; 10-point interpolation (with its own boundary band) on open
        charts.
        """
        fld = np.asarray(fld)
        if self.periodic:
            n = self.nx if axis == 1 else self.ny
            h = self.hx if axis == 1 else self.hy
            k = 2.0 * np.pi * np.fft.fftfreq(n, d=h)
            phase = np.exp(1j * k * delta)
            shp = [1] * fld.ndim
            shp[axis] = n
            spec = np.fft.fft(fld, axis=axis)
            out = np.fft.ifft(spec * phase.reshape(shp), axis=axis)
            return out if np.iscomplexobj(fld) else out.real
        from scipy.ndimage import correlate1d

        h = self.hx if axis == 1 else self.hy
        r = 5
        w = fornberg_weights(delta, np.arange(-r, r + 1) * h, 0)
        if np.iscomplexobj(fld):
            return correlate1d(fld.real, w, axis=axis, mode="nearest") \
                + 1j * correlate1d(fld.imag, w, axis=axis, mode="nearest")
        return correlate1d(fld, w, axis=axis, mode="nearest")


def build_chart(topology: str, Lx: float, Ly: float, nx: int, ny: int,
                x0: float = 0.0, y0: float = 0.0) -> ChartGrid:
    """Construct a uniform chart; raises ConfigurationError on bad input."""
    return ChartGrid(topology=topology, Lx=float(Lx), Ly=float(Ly),
                     nx=int(nx), ny=int(ny), x0=float(x0), y0=float(y0))


# -- jets ---------------------------------------------------------------


@dataclass
class JetTable:
    """Ambient-valued Wirtinger jets d^p dbar^q f on a chart.

    Only entries with p >= q are stored; the immersion is real so the
    (q, p) jet is the conjugate of the (p, q) jet.
    """

    chart: ChartGrid
    n: int                      # ambient sphere dimension, vectors live in R^{n+1}
    order: int
    data: dict = field(default_factory=dict)

    def put(self, p: int, q: int, value: np.ndarray):
        value = np.asarray(value, dtype=complex)
        if value.shape != self.chart.shape + (self.n + 1,):
            raise ConfigurationError(
                f"jet ({p},{q}) has shape {value.shape}, expected "
                f"{self.chart.shape + (self.n + 1,)}")
        self.data[(p, q)] = value

    def has(self, p: int, q: int) -> bool:
        return (p, q) in self.data or (q, p) in self.data

    def get(self, p: int, q: int) -> np.ndarray:
        if (p, q) in self.data:
            return self.data[(p, q)]
        if (q, p) in self.data:
            return np.conj(self.data[(q, p)])
        raise KeyError(f"jet ({p},{q}) not available (order {self.order})")

    @property
    def f(self) -> np.ndarray:
        return self.get(0, 0).real

    @classmethod
    def from_samples(cls, chart: ChartGrid, f: np.ndarray, order: int,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> "JetTable":
        """Differentiate a sampled immersion numerically up to total order.

        Sampled immersions are smooth by assumption, so their round-off
        spectral tail is removed before differentiation.
        """
        f = np.asarray(f, dtype=float)
        n = f.shape[-1] - 1
        jt = cls(chart=chart, n=n, order=order)
        jt.put(0, 0, f.astype(complex))
        for p in range(1, order + 1):
            jt.put(p, 0, chart.diff(f, p, 0, tol, denoise=True))
        if order >= 2:
            jt.put(1, 1, chart.diff(f, 1, 1, tol, denoise=True))
        return jt


# -- metric -------------------------------------------------------------


@dataclass
class MetricField:
    """Conformal metric data: ds^2 = F |dz|^2, phi = mu dz, lambda = |mu|."""

    chart: ChartGrid
    F: np.ndarray
    lam: np.ndarray
    K: np.ndarray
    conformality: np.ndarray    # relative residual field
    minimality: np.ndarray      # relative tension-field residual

    @property
    def mu(self) -> np.ndarray:
        # coordinate-aligned frame gauge: mu is real positive
        return self.lam.astype(complex)

    def area_element(self) -> np.ndarray:
        return self.F * self.chart.cell_area()


def laplace_beltrami(chart: ChartGrid, fld: np.ndarray, metric: "MetricField",
                     tol: Tolerances = DEFAULT_TOLERANCES,
                     denoise: bool = True) -> np.ndarray:
    """Laplace-Beltrami operator: (4/F) d dbar u in a conformal coordinate."""
    mixed = chart.diff(fld, 1, 1, tol, denoise=denoise)
    F = metric.F
    if fld.ndim > 2:
        F = F[..., None]
    out = 4.0 * mixed / F
    return out.real if not np.iscomplexobj(fld) else out


def metric_from_jet(jet: JetTable, tol: Tolerances = DEFAULT_TOLERANCES,
                    mask: np.ndarray | None = None,
                    require_conformal: bool = True) -> MetricField:
    """Induced metric, conformality and minimality residuals from first jets.

    F = 2 <df, df>_herm; the conformality residual is the bilinear product
    <df, df> relative to F/2; the minimality residual is the tension field
    Delta f + 2 f (vanishes for minimal surfaces in the unit sphere).
    """
    chart = jet.chart
    df = jet.get(1, 0)
    F = 2.0 * np.sum(df * np.conj(df), axis=-1).real
    if mask is None:
        mask = chart.interior_mask(0)
    floor = tol.lambda_floor
    if np.any(F[mask] <= floor):
        raise DegenerateImmersionError("conformal factor below floor on the chart")
    lam = np.sqrt(F)
    conf = np.abs(np.sum(df * df, axis=-1)) / (0.5 * F)
    if require_conformal and np.nanmax(conf[mask]) > tol.conformality:
        raise ConformalityError(
            f"conformality residual {np.nanmax(conf[mask]):.3e} exceeds "
            f"{tol.conformality:.1e}")
    # tension field (uses the (1,1) jet when available, else differentiates)
    if jet.has(1, 1):
        mixed = jet.get(1, 1)
    else:
        mixed = chart.diff(jet.f, 1, 1, tol)
    f = jet.f
    tension = 4.0 * mixed.real / F[..., None] + 2.0 * f
    minim = np.linalg.norm(tension, axis=-1) / 2.0
    # Gaussian curvature K = -Delta log lambda
    loglam = 0.5 * np.log(F)
    K = -4.0 * chart.diff(loglam, 1, 1, tol, denoise=True).real / F
    return MetricField(chart=chart, F=F, lam=lam, K=K,
                       conformality=conf, minimality=minim)


def gauss_curvature(metric: MetricField, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """K = -Delta log lambda, recomputed from the stored conformal factor."""
    chart = metric.chart
    loglam = np.log(metric.lam)
    return -4.0 * chart.diff(loglam, 1, 1, tol, denoise=True).real / metric.F
