"""Octonion algebra on R^7, the almost complex structure of the six-sphere,
pseudoholomorphicity tests and the four-type classification of almost
complex curves.

The multiplication table is fixed once and for all by Cayley-Dickson
doubling of the quaternions, with imaginary basis order

    e1 = i, e2 = j, e3 = k, e4 = l, e5 = i l, e6 = j l, e7 = k l.

All results exposed here are convention-covariant; tests only rely on
convention-invariant statements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import ChartGrid, JetTable, MetricField
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import ConfigurationError, PreconditionError


def _quaternion_table():
    # q[a, b] = (index, sign) for basis (1, i, j, k)
    idx = np.zeros((4, 4), dtype=int)
    sgn = np.zeros((4, 4))
    mult = {
        (0, 0): (0, 1), (0, 1): (1, 1), (0, 2): (2, 1), (0, 3): (3, 1),
        (1, 0): (1, 1), (1, 1): (0, -1), (1, 2): (3, 1), (1, 3): (2, -1),
        (2, 0): (2, 1), (2, 1): (3, -1), (2, 2): (0, -1), (2, 3): (1, 1),
        (3, 0): (3, 1), (3, 1): (2, 1), (3, 2): (1, -1), (3, 3): (0, -1),
    }
    for (a, b), (c, s) in mult.items():
        idx[a, b] = c
        sgn[a, b] = s
    return idx, sgn


def _octonion_product_matrix():
    """Full 8x8 signed product table by Cayley-Dickson doubling.

    Octonion basis order: (1, i, j, k, l, il, jl, kl); an element is a pair
    (a, b) of quaternions representing a + b*l.
    """
    qi, qs = _quaternion_table()

    def qconj(vec):  # quaternion conjugation on coefficient 4-vectors
        out = vec.copy()
        out[1:] *= -1.0
        return out

    def qmul(u, v):
        out = np.zeros(4)
        for a in range(4):
            for b in range(4):
                out[qi[a, b]] += qs[a, b] * u[a] * v[b]
        return out

    basis = np.eye(8)
    table = np.zeros((8, 8, 8))
    for a in range(8):
        for b in range(8):
            ua, ub = basis[a][:4], basis[a][4:]
            va, vb = basis[b][:4], basis[b][4:]
            # (ua, ub)(va, vb) = (ua va - conj(vb) ub, vb ua + ub conj(va))
            first = qmul(ua, va) - qmul(qconj(vb), ub)
            second = qmul(vb, ua) + qmul(ub, qconj(va))
            table[a, b] = np.concatenate([first, second])
    return table


_OCT8 = _octonion_product_matrix()

#: structure constants of the cross product on Im(O) = R^7:
#: cross(x, y)_k = sum_ij CROSS[i, j, k] x_i y_j
CROSS_TENSOR = 0.5 * (_OCT8[1:, 1:, 1:] - np.transpose(_OCT8[1:, 1:, 1:], (1, 0, 2)))


@dataclass(frozen=True)
class OctonionTable:
    """Cross product and scalar product on the purely imaginary octonions."""

    cross_tensor: np.ndarray = field(default_factory=lambda: CROSS_TENSOR)

    def cross(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Pointwise cross product; broadcasts over leading axes."""
        return np.einsum("ijk,...i,...j->...k", self.cross_tensor, x, y)

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.sum(x * y, axis=-1)

    def product(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Full octonion product of imaginary vectors: x*y = -<x,y> + x cross y."""
        real = -self.inner(x, y)
        imag = self.cross(x, y)
        return real, imag

    def almost_complex(self, x: np.ndarray, v: np.ndarray,
                       tol: float = 1e-10) -> np.ndarray:
        """J_x v = x cross v for x on the unit sphere and v tangent at x."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        nrm = np.abs(np.sum(x * x, axis=-1) - 1.0)
        tangency = np.abs(np.sum(x * v, axis=-1))
        scale = np.sqrt(np.sum(v * v, axis=-1)) + 1e-300
        if np.any(nrm > tol) or np.any(tangency / scale > tol):
            raise ConfigurationError(
                "almost_complex needs a unit base point and a tangent vector")
        return self.cross(x, v)


TABLE = OctonionTable()


def cross_product(x, y):
    """Module-level convenience wrapper around the fixed table."""
    return TABLE.cross(np.asarray(x, float), np.asarray(y, float))


def almost_complex(x, v, tol: float = 1e-10):
    return TABLE.almost_complex(x, v, tol)


# -- pseudoholomorphicity ------------------------------------------------


def pseudoholomorphic_residual(jet: JetTable, metric: MetricField,
                               table: OctonionTable = TABLE,
                               orientation: int = 0):
    """Pointwise deviation of df from complex linearity w.r.t. J.

    Returns (residual field, orientation used).  With the intrinsic rotation
    taking d/dx to d/dy the condition reads f_y = f cross f_x; both
    orientations are tried when `orientation` is 0.
    """
    if jet.n != 6:
        raise ConfigurationError("pseudoholomorphicity is defined for the six-sphere")
    df = jet.get(1, 0)
    f = jet.f
    fx = 2 * df.real     # f_x = d + dbar
    fy = -2 * df.imag    # f_y = i(d - dbar)
    lam = metric.lam[..., None]
    cr = table.cross(f, fx / lam)

    def resid(sign):
        return np.linalg.norm(sign * fy / lam - cr, axis=-1)

    if orientation in (1, -1):
        return resid(orientation), orientation
    r_plus, r_minus = resid(1), resid(-1)
    if np.median(r_plus) <= np.median(r_minus):
        return r_plus, 1
    return r_minus, -1


def nabla_j_residual(jet: JetTable, metric: MetricField,
                     table: OctonionTable = TABLE,
                     tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Residual of the covariant derivative rule of J along the surface.

    Checks (nabla_X J)Y = X cross Y + <X, JY> x with X = f_x, Y = f_y
    (coordinate fields along f), nabla the sphere connection.
    """
    chart = jet.chart
    f = jet.f
    df = jet.get(1, 0)
    fx = 2 * df.real
    fy = -2 * df.imag
    JY = table.cross(f, fy)
    # ambient x-derivative of the field J(f)·fy along the surface
    d_JY = 2 * chart.diff(JY, 1, 0, tol).real
    # sphere connection: nabla_X W = D_X W + <W, X> f   (X = f_x here)
    nab_JY = d_JY + np.sum(JY * fx, axis=-1)[..., None] * f
    dfy = 2 * chart.diff(fy, 1, 0, tol).real
    nab_Y = dfy + np.sum(fy * fx, axis=-1)[..., None] * f
    lhs = nab_JY - table.cross(f, nab_Y)
    rhs = table.cross(fx, fy) + np.sum(fx * JY, axis=-1)[..., None] * f
    scale = (np.linalg.norm(fx, axis=-1) * np.linalg.norm(fy, axis=-1)) + 1e-300
    return np.linalg.norm(lhs - rhs, axis=-1) / scale


# -- adapted frames and gauge fixing ------------------------------------


def adapted_model_frame(table: OctonionTable = TABLE) -> np.ndarray:
    """Orthonormal frame of R^7 carrying the relations an almost complex
    curve's Frenet frame satisfies: columns (position; e1, e2; e3, e4; e5, e6)
    with e2 = J e1, e4 = J e3, e6 = e1*e3 (octonion product), e5 = J e6.
    """
    g0 = np.zeros(7); g0[0] = 1.0          # i
    g1 = np.zeros(7); g1[1] = 1.0          # j
    g2 = table.cross(g0, g1)               # k
    g3 = np.zeros(7); g3[3] = 1.0          # l
    g4 = table.cross(g0, g3)
    g6 = table.cross(g1, g3)
    g5 = table.cross(g0, g6)
    return np.stack([g0, g1, g2, g3, g4, g5, g6], axis=1)


def g2_gauge_rotation(jet: JetTable, metric: MetricField,
                      tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Constant rotation carrying a superminimal curve in the six-sphere onto
    its pseudoholomorphic placement.

    The Frenet frame at one base node is computed from the jets and mapped
    onto the octonionic model frame; for a surface congruent to an almost
    complex curve the resulting constant rotation is the required gauge.
    Both surface orientations are tried; the one with the smaller global
    complex-linearity residual wins.
    """
    from .flag import osculating_flag  # local import to keep modules acyclic

    if jet.n != 6:
        raise ConfigurationError("gauge fixing applies to six-sphere curves")
    chart = jet.chart
    band = chart.interior_mask(8)
    iy, ix = np.array(np.nonzero(band))[:, band.sum() // 2]
    model = adapted_model_frame()

    def frenet(j: JetTable) -> np.ndarray:
        fl = osculating_flag(j, metric, tol=tol)
        lam = metric.lam[iy, ix]
        df = j.get(1, 0)[iy, ix]
        e1 = 2 * df.real / lam
        e2 = -2 * df.imag / lam
        cols = [j.f[iy, ix], e1, e2]
        for r in (1, 2):
            v = fl.btop[r - 1][iy, ix]
            cols.append(v.real / np.linalg.norm(v.real))
            cols.append(-v.imag / np.linalg.norm(v.imag))
        return np.stack(cols, axis=1)

    best = None
    for conjugate in (False, True):
        base = conjugate_jets(jet) if conjugate else jet
        rot = model @ frenet(base).T
        rotated = rotate_jets(base, rot)
        res, _ = pseudoholomorphic_residual(rotated, metric, orientation=1)
        score = float(np.max(res[band]))
        if best is None or score < best[0]:
            best = (score, rot, conjugate)
    return best[1], best[2], best[0]


def rotate_jets(jet: JetTable, rot: np.ndarray) -> JetTable:
    """Apply a constant ambient rotation to every stored jet."""
    out = JetTable(chart=jet.chart, n=jet.n, order=jet.order)
    for (p, q), val in jet.data.items():
        out.data[(p, q)] = val @ rot.T
    return out


def conjugate_jets(jet: JetTable) -> JetTable:
    """Jets of the same surface with the chart orientation reversed."""
    out = JetTable(chart=jet.chart, n=jet.n, order=jet.order)
    for (p, q), val in jet.data.items():
        out.data[(p, q)] = np.conj(val)
    return out
