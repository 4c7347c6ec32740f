"""Built-in model surfaces with closed-form jets.

Every entry serves exact Wirtinger jets on its preferred chart and carries
the classification facts it is expected to reproduce, so the catalog doubles
as the oracle set for the analysis pipeline.

Flat tori are products of circles ``f = (r_1 e^{i<v_1,w>}, ...)`` subject to
``sum r_k^2 = 1``, ``sum r_k^2 v_k v_k^T = F I`` and ``|v_k|^2 = 2F``; their
jets are elementary.  The sphere-based members (second- and third-order
spherical-harmonic immersions, great two-spheres) are realized on a Mercator
chart and differentiated symbolically once per process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chart import OPEN, TORUS, ChartGrid, JetTable, build_chart
from .errors import ConfigurationError

SQ3 = math.sqrt(3.0)


# -- flat minimal tori ----------------------------------------------------


@dataclass
class FlatMinimalTorus:
    """Product-of-circles minimal torus in an odd sphere (possibly embedded
    in a larger ambient with leading zero coordinates)."""

    name: str
    radii: np.ndarray
    vectors: np.ndarray          # shape (k, 2)
    offset: int = 0              # leading zero coordinates in the ambient
    chart_extents: tuple = (2 * np.pi, 2 * np.pi)

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.vectors = np.asarray(self.vectors, dtype=float)
        k = len(self.radii)
        if self.vectors.shape != (k, 2):
            raise ConfigurationError("need one direction vector per circle")
        if abs(np.sum(self.radii ** 2) - 1.0) > 1e-12:
            raise ConfigurationError("circle radii must satisfy sum r_k^2 = 1")
        norms = np.sum(self.vectors ** 2, axis=1)
        if np.ptp(norms) > 1e-12:
            raise ConfigurationError(
                "all direction vectors must have equal length (minimality)")
        F = norms[0] / 2.0
        M = np.einsum("k,ki,kj->ij", self.radii ** 2, self.vectors, self.vectors)
        if np.max(np.abs(M - F * np.eye(2))) > 1e-12:
            raise ConfigurationError(
                "directions must satisfy sum r_k^2 v_k (x) v_k = F I (conformality)")
        Lx, Ly = self.chart_extents
        wind = np.concatenate([self.vectors[:, 0] * Lx, self.vectors[:, 1] * Ly])
        if np.max(np.abs(wind / (2 * np.pi) - np.round(wind / (2 * np.pi)))) > 1e-9:
            raise ConfigurationError("directions are not periodic on the chart lattice")
        self.F = F

    @property
    def n(self) -> int:
        return self.offset + 2 * len(self.radii) - 1

    @property
    def parameters(self) -> dict:
        return {"radii": self.radii.tolist(), "vectors": self.vectors.tolist()}

    def default_chart(self, res: int = 64) -> ChartGrid:
        Lx, Ly = self.chart_extents
        return build_chart(TORUS, Lx, Ly, res, res)

    def jets(self, chart: ChartGrid, order: int) -> JetTable:
        X, Y = chart.meshgrid()
        jt = JetTable(chart=chart, n=self.n, order=order)
        pairs = [(p, q) for p in range(order + 1) for q in range(order + 1 - p)
                 if p >= q and (q == 0 or (p, q) == (1, 1))]
        zeta = self.vectors[:, 0] - 1j * self.vectors[:, 1]
        xi = np.conj(zeta)
        for (p, q) in pairs:
            comps = [np.zeros(chart.shape, complex) for _ in range(self.offset)]
            for rk, vk, zk, xk in zip(self.radii, self.vectors, zeta, xi):
                th = vk[0] * X + vk[1] * Y
                wp = (0.5j * zk) ** p * (0.5j * xk) ** q
                wm = (-0.5j * zk) ** p * (-0.5j * xk) ** q
                ep, em = np.exp(1j * th), np.exp(-1j * th)
                comps.append(rk * 0.5 * (wp * ep + wm * em))
                comps.append(rk * (0.5 / 1j) * (wp * ep - wm * em))
            jt.put(p, q, np.stack(comps, axis=-1))
        return jt


# -- symbolic sphere-based surfaces ---------------------------------------


class SymbolicSurface:
    """Surface given by closed-form expressions in the chart coordinates,
    differentiated symbolically (expressions built once, evaluation is
    vectorized numpy)."""

    def __init__(self, name: str, n: int, exprs, params=None,
                 chart_spec=(OPEN, 2 * np.pi, 5.0, 0.0, -2.5),
                 rotation: np.ndarray | None = None):
        self.name = name
        self.n = n
        self._exprs = exprs          # list of sympy expressions in x, y
        self.parameters = dict(params or {})
        self._chart_spec = chart_spec
        self.rotation = rotation
        self._jet_cache = {}

    def default_chart(self, res: int = 64) -> ChartGrid:
        topo, Lx, Ly, x0, y0 = self._chart_spec
        return build_chart(topo, Lx, Ly, res, res, x0=x0, y0=y0)

    def _jet_funcs(self, p: int, q: int):
        import sympy as sym

        key = (p, q)
        if key not in self._jet_cache:
            x, y = sym.symbols("x y", real=True)
            funcs = []
            for e in self._exprs:
                d = e
                for _ in range(p):
                    d = (sym.diff(d, x) - sym.I * sym.diff(d, y)) / 2
                for _ in range(q):
                    d = (sym.diff(d, x) + sym.I * sym.diff(d, y)) / 2
                funcs.append(sym.lambdify((x, y), sym.expand(d), modules="numpy"))
            self._jet_cache[key] = funcs
        return self._jet_cache[key]

    def jets(self, chart: ChartGrid, order: int) -> JetTable:
        X, Y = chart.meshgrid()
        jt = JetTable(chart=chart, n=self.n, order=order)
        pairs = [(p, 0) for p in range(order + 1)]
        if order >= 2:
            pairs.append((1, 1))
        for (p, q) in pairs:
            comps = []
            for fn in self._jet_funcs(p, q):
                val = np.asarray(fn(X, Y), dtype=complex)
                comps.append(np.broadcast_to(val, chart.shape).copy())
            vals = np.stack(comps, axis=-1)
            if self.rotation is not None:
                vals = vals @ self.rotation.T
            jt.put(p, q, vals)
        return jt


def _mercator_symbols():
    import sympy as sym

    x, y = sym.symbols("x y", real=True)
    u1 = sym.cos(x) / sym.cosh(y)
    u2 = sym.sin(x) / sym.cosh(y)
    u3 = sym.tanh(y)
    return x, y, u1, u2, u3


def _veronese_exprs():
    import sympy as sym

    _, _, u1, u2, u3 = _mercator_symbols()
    s3 = sym.sqrt(3)
    return [s3 * u2 * u3, s3 * u1 * u3, s3 * u1 * u2,
            (s3 / 2) * (u1 ** 2 - u2 ** 2),
            sym.Rational(1, 2) * (u1 ** 2 + u2 ** 2 - 2 * u3 ** 2)]


def _degree3_harmonic_exprs():
    """Unit-sphere immersion by an orthonormal basis of third-order
    spherical harmonics (scaled so the image lies on the unit sphere)."""
    import sympy as sym

    _, _, u1, u2, u3 = _mercator_symbols()
    r2 = u1 ** 2 + u2 ** 2 + u3 ** 2      # equals 1; kept for homogeneity
    c = sym.sqrt(sym.pi * 4 / 7)
    Y = [
        sym.sqrt(35 / (32 * sym.pi)) * u2 * (3 * u1 ** 2 - u2 ** 2),
        sym.sqrt(105 / (4 * sym.pi)) * u1 * u2 * u3,
        sym.sqrt(21 / (32 * sym.pi)) * u2 * (5 * u3 ** 2 - r2),
        sym.sqrt(7 / (16 * sym.pi)) * u3 * (5 * u3 ** 2 - 3 * r2),
        sym.sqrt(21 / (32 * sym.pi)) * u1 * (5 * u3 ** 2 - r2),
        sym.sqrt(105 / (16 * sym.pi)) * u3 * (u1 ** 2 - u2 ** 2),
        sym.sqrt(35 / (32 * sym.pi)) * u1 * (u1 ** 2 - 3 * u2 ** 2),
    ]
    return [sym.expand(c * yi) for yi in Y]


def _great_sphere_exprs(n: int):
    import sympy as sym

    _, _, u1, u2, u3 = _mercator_symbols()
    return [u1, u2, u3] + [sym.Integer(0)] * (n - 2)


# -- catalog ---------------------------------------------------------------


def _clifford_s3():
    t = FlatMinimalTorus(
        "clifford_s3",
        radii=[1 / math.sqrt(2)] * 2,
        vectors=[[1.0, 0.0], [0.0, 1.0]])
    t.expected = {
        "n": 3, "m": 1, "K": 0.0, "lambda": 1 / math.sqrt(2),
        "a_plus": {1: 1.0}, "a_minus": {1: 1.0}, "rho": {1: 0.0},
        "hopf_abs": {1: 1 / 16}, "K_perp": {1: 0.0},
        "superminimal": False, "superconformal": True, "exceptional": True,
        "self_dual": True, "polar_metric_factor": 1.0,
    }
    return t


def _equilateral_torus_s5():
    t = FlatMinimalTorus(
        "equilateral_torus_s5",
        radii=[1 / SQ3] * 3,
        vectors=[[1.0, 0.0], [-0.5, SQ3 / 2], [-0.5, -SQ3 / 2]],
        chart_extents=(4 * np.pi, 4 * np.pi / SQ3))
    t.expected = {
        "n": 5, "m": 2, "K": 0.0, "lambda": 1 / math.sqrt(2),
        "a_plus": {1: math.sqrt(2), 2: math.sqrt(2) / 2},
        "a_minus": {1: 0.0, 2: math.sqrt(2) / 2},
        "rho": {1: 1.0, 2: 0.0},
        "hopf_abs": {1: 0.0, 2: 1 / 64},
        "superminimal": False, "superconformal": True, "exceptional": True,
        "self_dual": True, "polar_metric_factor": 1.0,
    }
    return t


def _generalized_clifford_s5():
    t = _equilateral_torus_s5()
    t.name = "generalized_clifford_s5"
    return t


def _generalized_clifford_s7():
    t = FlatMinimalTorus(
        "generalized_clifford_s7",
        radii=[0.5] * 4,
        vectors=[[2.0, 1.0], [1.0, -2.0], [1.0, 2.0], [2.0, -1.0]])
    t.expected = {
        "n": 7, "m": 3, "K": 0.0, "lambda": math.sqrt(2.5),
        "a_plus": {1: 7 / 5}, "a_minus": {1: 1 / 5}, "rho": {1: 24 / 25},
        "hopf_abs": {1: 7 / 16},
        "superminimal": False, "superconformal": False, "exceptional": True,
        "self_dual": False,
    }
    return t


def _clifford_in_s5_via_s6():
    t = FlatMinimalTorus(
        "clifford_in_s5_via_s6",
        radii=[1 / SQ3] * 3,
        vectors=[[1.0, SQ3], [1.0, -SQ3], [2.0, 0.0]],
        offset=1,
        chart_extents=(2 * np.pi, 2 * np.pi / SQ3))
    t.expected = {
        "n": 6, "n_eff": 5, "m": 2, "K": 0.0, "lambda": math.sqrt(2),
        "a_plus": {1: math.sqrt(2), 2: math.sqrt(2) / 2},
        "a_minus": {1: 0.0, 2: math.sqrt(2) / 2},
        "superminimal": False, "superconformal": True, "exceptional": True,
        "pseudoholomorphic": True, "s6_type": "III",
    }
    return t


def _veronese_s4():
    s = SymbolicSurface("veronese_s4", 4, _veronese_exprs())
    s.expected = {
        "n": 4, "m": 1, "K": 1 / 3,
        "a_plus": {1: 2 / SQ3}, "a_minus": {1: 0.0}, "rho": {1: 1.0},
        "hopf_abs": {1: 0.0}, "K_perp": {1: 2 / 3},
        "kappa": {1: 1 / SQ3}, "mu": {1: 1 / SQ3},
        "superminimal": True, "superconformal": True, "exceptional": True,
    }
    return s


_B6_GAUGE_CACHE = {}


def _boruvka_s6():
    s = SymbolicSurface("boruvka_s6", 6, _degree3_harmonic_exprs(),
                        chart_spec=(OPEN, 2 * np.pi, 4.0, 0.0, -2.0))
    s.rotation = _boruvka_gauge(s)
    s.expected = {
        "n": 6, "m": 2, "K": 1 / 6,
        "a_plus": {1: math.sqrt(5 / 3), 2: math.sqrt(5 / 12)},
        "a_minus": {1: 0.0, 2: 0.0},
        "superminimal": True, "superconformal": True, "exceptional": True,
        "pseudoholomorphic": True, "s6_type": "I",
    }
    return s


def _boruvka_gauge(surface: SymbolicSurface) -> np.ndarray:
    """Constant rotation placing the third-order harmonic sphere so that its
    differential commutes with the six-sphere almost complex structure."""
    if "rot" not in _B6_GAUGE_CACHE:
        from .cayley import g2_gauge_rotation
        from .chart import metric_from_jet

        chart = build_chart(OPEN, 2 * np.pi, 4.0, 48, 48, y0=-2.0)
        jt = surface.jets(chart, order=3)
        met = metric_from_jet(jt, mask=chart.interior_mask(8))
        rot, conj, score = g2_gauge_rotation(jt, met)
        if conj:
            raise ConfigurationError(
                "unexpected orientation flip while gauge-fixing the "
                "harmonic sphere")
        _B6_GAUGE_CACHE["rot"] = rot
    return _B6_GAUGE_CACHE["rot"]


def _geodesic_s2_in_s6():
    s = SymbolicSurface("geodesic_s2_in_s6", 6, _great_sphere_exprs(6))
    s.expected = {
        "n": 6, "n_eff": 2, "K": 1.0, "B1_zero": True,
        "pseudoholomorphic": True, "s6_type": "IV",
        "superminimal": True, "superconformal": True, "exceptional": True,
    }
    return s


def great_sphere(n: int) -> SymbolicSurface:
    """Totally geodesic two-sphere declared to live in S^n (for contract tests)."""
    return SymbolicSurface(f"great_sphere_s{n}", n, _great_sphere_exprs(n))


_CATALOG = {
    "clifford_s3": _clifford_s3,
    "generalized_clifford_s5": _generalized_clifford_s5,
    "generalized_clifford_s7": _generalized_clifford_s7,
    "equilateral_torus_s5": _equilateral_torus_s5,
    "veronese_s4": _veronese_s4,
    "boruvka_s6": _boruvka_s6,
    "geodesic_s2_in_s6": _geodesic_s2_in_s6,
    "clifford_in_s5_via_s6": _clifford_in_s5_via_s6,
}

#: reserved slot: a non-flat Ricci superconformal member in S^{8k+7} would
#: exercise the odd self-duality branch; no closed-form member is available.
RICCI_SELFDUAL_SLOT = None


def catalog() -> list:
    return sorted(_CATALOG)


def gallery_surface(name: str, params: dict | None = None):
    """Instantiate a catalog surface, optionally overriding parameters."""
    if name not in _CATALOG:
        raise ConfigurationError(
            f"unknown gallery surface {name!r}; available: {catalog()}")
    if params:
        if name.startswith("generalized_clifford") or name.startswith("clifford"):
            base = _CATALOG[name]()
            return FlatMinimalTorus(
                name,
                radii=params.get("radii", base.radii),
                vectors=params.get("vectors", base.vectors),
                offset=params.get("offset", base.offset),
                chart_extents=tuple(params.get("chart_extents", base.chart_extents)))
        raise ConfigurationError(f"surface {name!r} takes no parameters")
    return _CATALOG[name]()
