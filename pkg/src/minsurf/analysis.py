"""End-to-end analysis pipeline: jets -> metric -> flag -> invariants.

`analyze` accepts either a gallery-style surface object (anything with
``jets(chart, order)``) or a raw sampled immersion.  When the declared
ambient dimension is not attained the tower is rebuilt at the substantial
dimension and the reduction is recorded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import ChartGrid, JetTable, MetricField, metric_from_jet
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import SubstantialityError
from .flag import (
    ANALYSIS_BAND,
    FlagDecomposition,
    osculating_flag,
    smooth_frame_alignment,
)
from .invariants import InvariantField, compute_invariants


@dataclass
class SurfaceAnalysis:
    name: str
    chart: ChartGrid
    jet: JetTable
    metric: MetricField
    flag: FlagDecomposition | None
    invariants: InvariantField | None
    n_declared: int
    n_eff: int
    tol: Tolerances
    notes: list = field(default_factory=list)

    @property
    def mask(self) -> np.ndarray:
        if self.invariants is not None:
            return self.invariants.mask
        band = 0 if self.chart.periodic else ANALYSIS_BAND
        return self.chart.interior_mask(band)

    @property
    def pde_mask(self) -> np.ndarray:
        """Mask shrunk for one more derivative layer on open charts."""
        if self.chart.periodic:
            return self.mask
        return self.mask & self.chart.interior_mask(2 * ANALYSIS_BAND)

    @property
    def m(self) -> int:
        return self.flag.m if self.flag is not None else 0


def analyze(surface, res: int = 64, chart: ChartGrid | None = None,
            order: int | None = None,
            tol: Tolerances = DEFAULT_TOLERANCES,
            reduce_dimension: bool = True,
            name: str | None = None) -> SurfaceAnalysis:
    """Analyze a surface serving closed-form jets."""
    chart = chart if chart is not None else surface.default_chart(res)
    n = surface.n
    m = (n - 1) // 2
    order = order if order is not None else max(m + 2, 2)
    jet = surface.jets(chart, order)
    return analyze_jets(jet, tol=tol, reduce_dimension=reduce_dimension,
                        name=name or getattr(surface, "name", "surface"))


def analyze_samples(chart: ChartGrid, samples: np.ndarray, order: int,
                    tol: Tolerances = DEFAULT_TOLERANCES,
                    reduce_dimension: bool = True,
                    name: str = "samples") -> SurfaceAnalysis:
    """Analyze a sampled immersion by numerical differentiation."""
    jet = JetTable.from_samples(chart, samples, order, tol)
    return analyze_jets(jet, tol=tol, reduce_dimension=reduce_dimension, name=name)


def analyze_jets(jet: JetTable, tol: Tolerances = DEFAULT_TOLERANCES,
                 reduce_dimension: bool = True,
                 name: str = "surface") -> SurfaceAnalysis:
    chart = jet.chart
    band = 0 if chart.periodic else ANALYSIS_BAND
    mask = chart.interior_mask(band)
    metric = metric_from_jet(jet, tol, mask=mask)
    notes = []
    n_decl = jet.n
    n_eff = n_decl

    # the tower can only reach as far as the available jets
    max_m = jet.order - 1
    n_tower = min(n_decl, 2 * max_m + 2)
    flag = None
    try:
        flag = osculating_flag(jet, metric, tol,
                               n_eff=n_tower if n_tower < n_decl else None)
        if n_tower < n_decl:
            notes.append(f"tower truncated to S^{n_tower} by the jet order")
    except SubstantialityError:
        if not reduce_dimension:
            raise
        probe = osculating_flag(jet, metric, tol, strict=False)
        n_eff = probe.substantial_dimension()
        notes.append(f"declared S^{n_decl} but substantial only in S^{n_eff}")
        if n_eff >= 3:
            flag = osculating_flag(jet, metric, tol, n_eff=n_eff)
        else:
            flag = None

    inv = None
    if flag is not None:
        flag = smooth_frame_alignment(flag)
        inv = compute_invariants(flag, metric, tol)
        n_eff = min(n_eff, n_tower)
    return SurfaceAnalysis(name=name, chart=chart, jet=jet, metric=metric,
                           flag=flag, invariants=inv, n_declared=n_decl,
                           n_eff=n_eff, tol=tol, notes=notes)
