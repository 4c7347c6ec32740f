"""Classification predicates and PDE residual suites.

Covers holomorphy of the quadratic differentials, the superminimal /
superconformal / exceptional flags, the curvature ladder satisfied by the
axis invariants of exceptional surfaces, the Ricci condition, the profile
forced on axis invariants by the Ricci condition, zero-counting flux
integrals, and the elliptic constraint linking gradient and Laplacian
profiles to the Gaussian curvature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import SurfaceAnalysis
from .chart import ChartGrid, MetricField, laplace_beltrami
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import PreconditionError, ResolutionError, UndefinedResultError

__all__ = [
    "ClassificationReport",
    "holomorphy_residual",
    "classify_surface",
    "LadderReport",
    "theorem2_residuals",
    "ricci_residual",
    "lemma9_profile",
    "global_flux",
    "liouville_constraint",
]


# -- holomorphy -----------------------------------------------------------


def holomorphy_residual(chart: ChartGrid, fld: np.ndarray, mask: np.ndarray,
                        tol: Tolerances = DEFAULT_TOLERANCES):
    """Normalized dbar residual of a complex field and its verdict.

    residual = |dbar f| / (sup|f| / diam + eps).  Returns
    (field, verdict) with verdict in {"holomorphic", "non-holomorphic",
    "inconclusive"}; inconclusive when under a quarter of the chart is
    usable.
    """
    eps = 1e-14
    dbar = chart.diff(fld, 0, 1, tol)
    scale = (np.max(np.abs(fld[mask])) if mask.any() else 0.0) / chart.diameter + eps
    res = np.abs(dbar) / scale
    if mask.sum() < 0.25 * mask.size:
        return res, "inconclusive"
    verdict = "holomorphic" if np.max(res[mask]) < tol.holomorphy else "non-holomorphic"
    return res, verdict


# -- flags ----------------------------------------------------------------


@dataclass
class ClassificationReport:
    name: str
    n_eff: int
    m: int
    superminimal: bool
    superconformal: bool
    exceptional: bool
    holomorphy: dict            # r -> (max residual, verdict)
    hopf_zero: dict             # r -> bool
    a_minus_zero: dict          # r -> bool
    eccentricity_std: dict      # r -> float (r <= m-1)
    eccentricity_agrees: bool = True
    diagnostic_failure: bool = False
    notes: list = field(default_factory=list)

    def flags(self) -> dict:
        return {"superminimal": self.superminimal,
                "superconformal": self.superconformal,
                "exceptional": self.exceptional}


def classify_surface(analysis: SurfaceAnalysis,
                     tol: Tolerances | None = None) -> ClassificationReport:
    """Evaluate the three nested flags plus the independent eccentricity test.

    The flags are built monotone by construction (vanishing differentials
    are in particular holomorphic).  The eccentricity route must agree with
    the holomorphy route; a disagreement is flagged loudly in the report.
    """
    tol = tol or analysis.tol
    inv = analysis.invariants
    if inv is None:
        # totally geodesic two-sphere: no tower, trivially superminimal
        return ClassificationReport(
            name=analysis.name, n_eff=analysis.n_eff, m=0,
            superminimal=True, superconformal=True, exceptional=True,
            holomorphy={}, hopf_zero={}, a_minus_zero={},
            eccentricity_std={},
            notes=["no normal tower: totally geodesic surface"])
    m = inv.m
    chart = analysis.chart
    holo, hopf_zero, aminus_zero, ecc_std = {}, {}, {}, {}
    for r in range(1, m + 1):
        zero = inv.is_hopf_zero(r, tol)
        hopf_zero[r] = zero
        aminus_zero[r] = inv.is_a_minus_zero(r, tol)
        if zero:
            holo[r] = (0.0, "holomorphic")
        else:
            res, verdict = holomorphy_residual(chart, inv.hopf[r - 1],
                                               analysis.pde_mask, tol)
            holo[r] = (float(np.max(res[analysis.pde_mask])), verdict)
        if r <= m - 1:
            with np.errstate(invalid="ignore", divide="ignore"):
                ecc = np.where(inv.kappa[r - 1] > 0,
                               inv.mu[r - 1] / np.where(inv.kappa[r - 1] > 0,
                                                        inv.kappa[r - 1], 1.0),
                               0.0)
            ecc_std[r] = float(np.std(ecc[inv.mask]))

    exceptional = all(v[1] == "holomorphic" for v in holo.values())
    inconclusive = any(v[1] == "inconclusive" for v in holo.values())
    superconformal = exceptional and all(hopf_zero[r] for r in range(1, m))
    superminimal = superconformal and hopf_zero.get(m, True) and \
        all(aminus_zero[r] for r in range(1, m))

    ecc_verdict = all(s < tol.eccentricity_constancy for s in ecc_std.values())
    agrees = True
    if not inconclusive and ecc_std:
        # constant eccentricity below the top level is the independent
        # equivalent of holomorphy there
        holo_below = all(holo[r][1] == "holomorphic" for r in range(1, m))
        agrees = ecc_verdict == holo_below
    rep = ClassificationReport(
        name=analysis.name, n_eff=analysis.n_eff, m=m,
        superminimal=superminimal, superconformal=superconformal,
        exceptional=exceptional, holomorphy=holo, hopf_zero=hopf_zero,
        a_minus_zero=aminus_zero, eccentricity_std=ecc_std,
        eccentricity_agrees=agrees,
        diagnostic_failure=not agrees)
    if inconclusive:
        rep.notes.append("holomorphy inconclusive: usable mask below 25%")
    if not agrees:
        rep.notes.append("eccentricity-constancy and holomorphy verdicts disagree")
    return rep


# -- curvature ladder of exceptional surfaces -----------------------------


@dataclass
class LadderReport:
    rho_mean: dict              # r -> measured constant (r <= m-1)
    rho_std: dict
    residuals: dict             # label -> (abs max, rel max)
    fields: dict = field(default_factory=dict)

    def rel(self, label: str) -> float:
        return self.residuals[label][1]

    def max_rel(self) -> float:
        return max((v[1] for v in self.residuals.values()), default=0.0)


def _rel_entry(res_field, mask, *terms):
    scale = max((np.max(np.abs(t[mask])) for t in terms), default=0.0)
    scale = max(scale, 1.0)
    amax = float(np.max(np.abs(res_field[mask]))) if mask.any() else np.nan
    return amax, amax / scale


def theorem2_residuals(analysis: SurfaceAnalysis,
                       report: ClassificationReport | None = None,
                       tol: Tolerances | None = None,
                       force: bool = False) -> LadderReport:
    """Residuals of the axis-invariant ladder on an exceptional surface.

    Checks, on the PDE mask: the proportionality a^- = sigma_r a^+ and the
    closed form of a_1^+; the interior ladder for r <= m-1; and the top
    equation involving the last normal curvature.  The +/- branch of a
    vanishing invariant is skipped (its logarithm is not a field).
    """
    tol = tol or analysis.tol
    if report is None:
        report = classify_surface(analysis, tol)
    if not (report.exceptional or force):
        raise PreconditionError("ladder residuals are stated for exceptional "
                                "surfaces; classification refused the flag")
    inv = analysis.invariants
    if inv is None:
        raise PreconditionError("no invariant tower available")
    m = inv.m
    chart = analysis.chart
    met = analysis.metric
    mask = analysis.pde_mask
    K = met.K
    out = LadderReport(rho_mean={}, rho_std={}, residuals={})

    rho_hat = {0: 1.0}
    for r in range(1, m):
        mean, std = inv.rho_constant(r)
        out.rho_mean[r] = rho_hat[r] = mean
        out.rho_std[r] = std
    # constancy of rho_m is not asserted; store the measured value anyway
    mean_m, std_m = inv.rho_constant(m)
    out.rho_mean[m] = rho_hat[m] = mean_m

    def lap_log(a_field, floor=1e-300):
        return laplace_beltrami(chart, np.log(np.maximum(a_field, floor)), met, tol)

    b2 = {0: np.full(chart.shape, 2.0)}
    for r in range(1, m + 1):
        b2[r] = inv.b[r - 1] ** 2

    # proportionality and the closed form of the first axis sum
    for r in range(1, m):
        sig = np.sqrt(max(0.0, (1 - rho_hat[r]) / (1 + rho_hat[r])))
        res = inv.a_minus[r - 1] - sig * inv.a_plus[r - 1]
        out.residuals[f"a-ratio r={r}"] = _rel_entry(res, mask, inv.a_plus[r - 1])
        out.fields[f"a-ratio r={r}"] = res
    if m >= 1:
        pred = np.sqrt(np.clip((1 + inv.rho[0]) * (1 - K), 0.0, None))
        res = inv.a_plus[0] - pred
        out.residuals["a1-closed-form"] = _rel_entry(res, mask, inv.a_plus[0])
        out.fields["a1-closed-form"] = res

    # interior ladder
    for r in range(1, m):
        bracket = rho_hat[r] * b2[r] / (rho_hat[r - 1] ** 2 * b2[r - 1]) \
            - b2[r + 1] / (rho_hat[r] * b2[r])
        rhs_base = (r + 1) * K
        for sign, name in ((+1, "+"), (-1, "-")):
            a = (inv.a_plus if sign > 0 else inv.a_minus)[r - 1]
            if sign < 0 and inv.is_a_minus_zero(r, tol):
                continue
            lhs = lap_log(a)
            res = lhs - (rhs_base - sign * bracket)
            out.residuals[f"ladder r={r} {name}"] = \
                _rel_entry(res, mask, lhs, rhs_base, bracket)
            out.fields[f"ladder r={r} {name}"] = res

    # top equation
    denom = rho_hat[m - 1] ** 2 * b2[m - 1]
    top = 2.0 ** m * inv.K_perp[m - 1] / denom
    for sign, name in ((+1, "+"), (-1, "-")):
        a = (inv.a_plus if sign > 0 else inv.a_minus)[m - 1]
        if sign < 0 and inv.is_a_minus_zero(m, tol):
            continue
        if sign > 0 and inv.masked_max(a) < tol.zero_invariant:
            continue
        lhs = lap_log(a)
        res = lhs - ((m + 1) * K - sign * top)
        out.residuals[f"ladder-top {name}"] = \
            _rel_entry(res, mask, lhs, (m + 1) * K, top)
        out.fields[f"ladder-top {name}"] = res
    return out


# -- Ricci condition -------------------------------------------------------


@dataclass
class RicciReport:
    residual: np.ndarray          # Delta log(1-K) - 4K
    rescaled_curvature: np.ndarray  # curvature of sqrt(1-K) ds^2
    mask: np.ndarray
    max_rel: float
    holds: bool


def ricci_residual(analysis: SurfaceAnalysis, delta: float = 1e-6,
                   tol: Tolerances | None = None) -> RicciReport:
    """Residual of Delta log(1-K) = 4K plus the flatness reformulation."""
    tol = tol or analysis.tol
    met = analysis.metric
    chart = analysis.chart
    K = met.K
    ok = analysis.pde_mask & (K < 1 - delta)
    if not ok.any():
        raise UndefinedResultError("curvature reaches 1 on the whole chart")
    t = np.where(K < 1 - delta, 1 - K, delta)
    res = laplace_beltrami(chart, np.log(t), met, tol) - 4 * K
    # curvature of the rescaled metric (1-K)^(1/2) ds^2
    lam_hat2 = np.sqrt(t) * met.F
    Khat = -4.0 * chart.diff(0.5 * np.log(lam_hat2), 1, 1, tol, denoise=True).real / lam_hat2
    scale = max(1.0, float(np.max(np.abs(4 * K[ok]))))
    max_rel = float(np.max(np.abs(res[ok]))) / scale
    return RicciReport(residual=res, rescaled_curvature=Khat, mask=ok,
                       max_rel=max_rel, holds=max_rel < tol.pde_residual)


# -- profiles forced by the Ricci condition --------------------------------


def ricci_profile_exponent(r: int) -> float:
    """Power of (1-K) in the axis-sum profile of a Ricci exceptional surface."""
    if r % 2 == 1:
        return (r + 1) / 4
    if r % 4 == 2:
        return (r + 2) / 4
    return r / 4


def ricci_profile_constants(m: int, rho: dict) -> dict:
    """Coefficients of the forced profiles, derived from the ladder.

    gamma_r tracks b_r^2 = gamma_r (1-K)^{2 e_r}; the odd step squares the
    ladder ratio, the even step multiplies by rho_r (which must be 1 at even
    levels for consistency).
    """
    gamma = {0: 2.0, 1: 2.0}
    for r in range(1, m):
        if r % 2 == 1:
            gamma[r + 1] = rho[r] ** 2 * gamma[r] ** 2 / \
                (rho[r - 1] ** 2 * gamma[r - 1])
        else:
            gamma[r + 1] = rho[r] * gamma[r]
    return {r: np.sqrt((1 + rho[r]) * gamma[r] / 2.0 ** r)
            for r in range(1, m + 1)}


@dataclass
class ProfileReport:
    exponents: dict
    constants: dict           # derived coefficients
    fitted: dict              # data-fitted coefficients
    deviation: dict           # r -> max relative deviation (derived constant)
    shape_deviation: dict     # r -> max relative deviation (fitted constant)


def lemma9_profile(analysis: SurfaceAnalysis, rho: dict | None = None,
                   tol: Tolerances | None = None,
                   require_ricci: bool = True) -> ProfileReport:
    """Expected axis-sum profiles under the Ricci condition, with deviations.

    Preconditions: exceptional, non-flat, Ricci residual below gate.
    """
    tol = tol or analysis.tol
    inv = analysis.invariants
    if inv is None:
        raise PreconditionError("no invariant tower available")
    met = analysis.metric
    mask = analysis.pde_mask
    if np.max(np.abs(met.K[mask])) < 1e-8:
        raise PreconditionError("profile statement assumes a non-flat surface")
    if require_ricci and not ricci_residual(analysis, tol=tol).holds:
        raise PreconditionError("Ricci condition residual above gate")
    m = inv.m
    if rho is None:
        rho = {0: 1.0}
        for r in range(1, m + 1):
            rho[r] = inv.rho_constant(r)[0]
    consts = ricci_profile_constants(m, rho)
    t = np.clip(1 - met.K, 0.0, None)
    expo, dev, shape_dev, fitted = {}, {}, {}, {}
    for r in range(1, m + 1):
        e = ricci_profile_exponent(r)
        expo[r] = e
        prof = t ** e
        a = inv.a_plus[r - 1]
        scale = np.max(a[mask]) + 1e-300
        dev[r] = float(np.max(np.abs(a - consts[r] * prof)[mask]) / scale)
        chat = float(np.median((a / np.maximum(prof, 1e-300))[mask]))
        fitted[r] = chat
        shape_dev[r] = float(np.max(np.abs(a - chat * prof)[mask]) / scale)
    return ProfileReport(exponents=expo, constants=consts, fitted=fitted,
                         deviation=dev, shape_deviation=shape_dev)


# -- global flux and zero counting -----------------------------------------


@dataclass
class FluxResult:
    integral: float        # integral of (Delta log a) dA over the kept region
    zero_count: float      # -integral / (2 pi), or the summed disk fluxes
    rounded: int
    confidence: float      # distance of the estimate to the nearest integer
    per_disk: list = field(default_factory=list)


def global_flux(chart: ChartGrid, a_field: np.ndarray, metric: MetricField,
                excisions: list | None = None,
                tol: Tolerances = DEFAULT_TOLERANCES) -> FluxResult:
    """Zero-counting integral of an absolute-value-type field.

    On a closed (torus) chart without zeros the conformally invariant
    integral of Delta log a is computed directly and the zero count is its
    value over -2 pi.  With excision disks (open charts), each disk's
    boundary flux of grad log a counts the enclosed zero orders; the
    confidence is the distance to the nearest integer.
    """
    excisions = excisions or []
    if not chart.periodic and not excisions:
        raise PreconditionError(
            "open charts need excision disks around the zeros")
    loga = np.log(np.maximum(np.abs(a_field), 1e-300))
    if not excisions:
        # closed surface, zero-free field
        mixed = chart.diff(loga, 1, 1, tol).real
        integral = float(np.sum(4.0 * mixed) * chart.cell_area())
        count = -integral / (2 * np.pi)
        return FluxResult(integral=integral, zero_count=count,
                          rounded=int(np.round(count)),
                          confidence=abs(count - np.round(count)))

    from scipy.ndimage import map_coordinates

    h = min(chart.hx, chart.hy)
    for (z0, rad) in excisions:
        if rad < 4 * h:
            raise ResolutionError(
                f"excision radius {rad:.3g} under four grid cells ({4 * h:.3g})")
    for i in range(len(excisions)):
        for j in range(i + 1, len(excisions)):
            if abs(excisions[i][0] - excisions[j][0]) < \
                    excisions[i][1] + excisions[j][1]:
                raise ResolutionError("excision disks overlap")
    du = chart.diff(loga, 1, 0, tol)
    ux, uy = 2 * du.real, -2 * du.imag
    per_disk = []
    ntheta = 720
    th = np.linspace(0, 2 * np.pi, ntheta, endpoint=False)
    for (z0, rad) in excisions:
        cx = (z0.real - chart.x0) / chart.hx
        cy = (z0.imag - chart.y0) / chart.hy
        px = cx + rad * np.cos(th) / chart.hx
        py = cy + rad * np.sin(th) / chart.hy
        gx = map_coordinates(ux, [py, px], order=3)
        gy = map_coordinates(uy, [py, px], order=3)
        dn = gx * np.cos(th) + gy * np.sin(th)
        flux = float(np.sum(dn) * rad * (2 * np.pi / ntheta))
        per_disk.append(flux / (2 * np.pi))
    count = float(np.sum(per_disk))
    return FluxResult(integral=-2 * np.pi * count, zero_count=count,
                      rounded=int(np.round(count)),
                      confidence=abs(count - np.round(count)),
                      per_disk=per_disk)


# -- elliptic gradient/Laplacian constraint --------------------------------


def liouville_constraint(chart: ChartGrid, fld: np.ndarray,
                         P_coef, Q_coef, metric: MetricField,
                         tol: Tolerances = DEFAULT_TOLERANCES,
                         hypothesis_gate: float = 1e-6,
                         grad_floor: float = 1e-8):
    """Residual of 2KQ + (2P - Q')(P - Q') + Q(2P' - Q'') on the level set
    data of a function with prescribed Laplacian and gradient profiles.

    P and Q are polynomial coefficient tables (low order first); their
    derivatives are taken on the coefficients.  Returns (residual field,
    evaluation mask).  Raises PreconditionError when the prescribed profiles
    are not actually satisfied by the field.
    """
    from numpy.polynomial import polynomial as npoly

    P_coef = np.asarray(P_coef, dtype=float)
    Q_coef = np.asarray(Q_coef, dtype=float)
    band = chart.interior_mask(0 if chart.periodic else 12)
    f = np.asarray(fld, dtype=float)
    lap = laplace_beltrami(chart, f, metric, tol)
    df = chart.diff(f, 1, 0, tol)
    grad2 = 4.0 * np.abs(df) ** 2 / metric.F
    P = npoly.polyval(f, P_coef)
    Q = npoly.polyval(f, Q_coef)
    emask = band & (grad2 > grad_floor)
    if not emask.any():
        return np.zeros(chart.shape), emask
    scale = max(1.0, float(np.max(np.abs(lap[emask]))),
                float(np.max(np.abs(grad2[emask]))))
    h1 = np.max(np.abs((lap - P)[emask])) / scale
    h2 = np.max(np.abs((grad2 - Q)[emask])) / scale
    if max(h1, h2) > hypothesis_gate:
        raise PreconditionError(
            f"prescribed profiles not satisfied (residuals {h1:.2e}, {h2:.2e})")
    Pp = npoly.polyval(f, npoly.polyder(P_coef))
    Qp = npoly.polyval(f, npoly.polyder(Q_coef))
    Qpp = npoly.polyval(f, npoly.polyder(npoly.polyder(Q_coef)))
    K = metric.K
    res = 2 * K * Q + (2 * P - Qp) * (P - Qp) + Q * (2 * Pp - Qpp)
    return res, emask
