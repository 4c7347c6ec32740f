"""Scalar invariants of the normal tower.

From the complex pair (H_{2r+1}, H_{2r+2}) of each bundle the module derives
the null-split fields k_r^+/-, the axis invariants a_r^+/- (sum/difference of
the curvature-ellipse semi-axes), the normal curvature, the quadratic
differential coefficients, the ratio invariants rho_r and the intrinsic
bundle curvatures.  Per-node identities connecting these routes are enforced
as internal gates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import MetricField
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import InternalConsistencyError
from .flag import FlagDecomposition, h_components

#: conventions for the tangent level of the tower
A0_PLUS = 2.0
A0_MINUS = 0.0
K0_PERP = 2.0
RHO0 = 1.0
B0_SQUARED = 2.0


# -- per-node operations (unit-testable in isolation) ---------------------


def normal_curvature(H1, H2):
    """K_perp = i (H1 conj(H2) - conj(H1) H2); sign fixed by the frame."""
    return (1j * (H1 * np.conj(H2) - np.conj(H1) * H2)).real


def null_split(H1, H2, canonicalize: bool = True):
    """k^+/- = conj(H1) +/- i conj(H2); optionally swapped so |k^+| >= |k^-|."""
    kp = np.conj(H1) + 1j * np.conj(H2)
    km = np.conj(H1) - 1j * np.conj(H2)
    if canonicalize:
        swap = np.abs(kp) < np.abs(km)
        kp, km = np.where(swap, km, kp), np.where(swap, kp, km)
    return kp, km


def a_invariants(H1, H2, canonicalize: bool = True):
    """(k+, k-, a+, a-) of one H pair."""
    kp, km = null_split(H1, H2, canonicalize)
    return kp, km, np.abs(kp), np.abs(km)


def ellipse_axes(H1, H2):
    """Semi-axes (kappa >= mu >= 0) of the curvature ellipse of the pair."""
    _, _, ap, am = a_invariants(H1, H2)
    return 0.5 * (ap + am), 0.5 * (ap - am)


def hopf_coefficient(H1, H2, mu, r: int):
    """Coefficient f_r with Phi_r = f_r dz^{2r+2} in the gauge phi = mu dz."""
    kp, km = null_split(H1, H2, canonicalize=False)
    return 0.25 * kp * km * mu ** (2 * r + 2)


def intrinsic_normal_curvature(K_perp_r, B2_prev, B2_next, r: int,
                               K_perp_prev=None, floor: float = 1e-12):
    """Intrinsic curvature of the r-th normal plane bundle.

    r = 1 uses K_1^perp - |B_2|^2 / (2 K_1^perp); higher levels use the
    two-sided ladder formula.  Nodes with vanishing K_r^perp are undefined
    and returned as NaN (callers mask them).
    """
    Kp = np.asarray(K_perp_r, dtype=float)
    out = np.full(np.shape(Kp), np.nan)
    ok = np.abs(Kp) > floor
    if r == 1:
        out = np.where(ok, Kp - B2_next / (2 * np.where(ok, Kp, 1.0)), np.nan)
    else:
        okp = ok & (np.abs(K_perp_prev) > floor)
        denom = np.where(okp, K_perp_prev, 1.0) ** 2
        first = Kp * B2_prev / (2.0 ** (r - 2) * denom)
        second = B2_next / (2.0 ** r * np.where(okp, Kp, 1.0))
        out = np.where(okp, first - second, np.nan)
    return out


# -- full tower ------------------------------------------------------------


@dataclass
class InvariantField:
    """Per-node invariants for r = 1..m (arrays indexed r-1)."""

    n: int
    m: int
    metric: MetricField
    mask: np.ndarray
    H: list                      # (H_{2r+1}, H_{2r+2}) pairs
    k_plus: list
    k_minus: list
    a_plus: list
    a_minus: list
    kappa: list
    mu: list
    K_perp: list
    B2: list                     # |B_r|^2
    rho: list
    sigma: list
    b: list                      # ladder weights b_r
    hopf: list                   # coefficients f_r
    K_star: list
    notes: list = field(default_factory=list)

    def rho_constant(self, r: int):
        """(mean, std) of rho_r over the generic mask."""
        vals = self.rho[r - 1][self.mask]
        return float(np.mean(vals)), float(np.std(vals))

    def masked_max(self, fld):
        return float(np.max(np.abs(fld[self.mask]))) if self.mask.any() else np.nan

    def a_scale(self, r: int) -> float:
        return self.masked_max(self.a_plus[r - 1])

    def hopf_scale(self, r: int) -> float:
        lam = self.metric.lam
        ref = 0.25 * self.a_plus[r - 1] ** 2 * lam ** (2 * r + 2)
        return self.masked_max(ref)

    def is_hopf_zero(self, r: int, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return self.masked_max(np.abs(self.hopf[r - 1])) <= \
            tol.zero_invariant * (self.hopf_scale(r) + 1e-300)

    def is_a_minus_zero(self, r: int, tol: Tolerances = DEFAULT_TOLERANCES) -> bool:
        return self.masked_max(self.a_minus[r - 1]) <= \
            tol.zero_invariant * (self.a_scale(r) + 1e-300)


def compute_invariants(flag: FlagDecomposition, metric: MetricField,
                       tol: Tolerances = DEFAULT_TOLERANCES) -> InvariantField:
    """Evaluate the whole invariant tower on a flag with aligned frames.

    The orientation of each rank-2 bundle is canonicalized globally (one
    flip per bundle, preserving frame smoothness) so that the mean normal
    curvature is non-negative; then a^+ >= a^- wherever the sign is uniform.
    """
    m = flag.m
    mask = flag.generic_mask
    lam = metric.lam
    Hs = h_components(flag, metric, tol)

    # global orientation flips (keep fields smooth; pointwise swaps would not be)
    for r in range(1, m + 1):
        H1, H2 = Hs[r - 1]
        if flag.frames[r - 1].shape[-1] < 2:
            continue
        Kp = normal_curvature(H1, H2)
        if mask.any() and np.mean(Kp[mask]) < 0:
            flag.frames[r - 1] = flag.frames[r - 1].copy()
            flag.frames[r - 1][..., 1] *= -1.0
    Hs = h_components(flag, metric, tol)

    inv = InvariantField(n=flag.n, m=m, metric=metric, mask=mask, H=Hs,
                         k_plus=[], k_minus=[], a_plus=[], a_minus=[],
                         kappa=[], mu=[], K_perp=[], B2=[], rho=[],
                         sigma=[], b=[], hopf=[], K_star=[])
    for r in range(1, m + 1):
        H1, H2 = Hs[r - 1]
        kp, km = null_split(H1, H2, canonicalize=False)
        ap, am = np.abs(kp), np.abs(km)
        Kp = normal_curvature(H1, H2)
        B2 = 2.0 ** r * (np.abs(H1) ** 2 + np.abs(H2) ** 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            rho = np.where(B2 > 0, 2.0 ** r * np.abs(Kp) / np.where(B2 > 0, B2, 1.0), np.nan)
        rho = np.clip(rho, 0.0, None)
        sig = np.sqrt(np.clip((1 - rho) / (1 + rho), 0.0, None))
        fr = 0.25 * kp * km * lam ** (2 * r + 2)
        inv.k_plus.append(kp)
        inv.k_minus.append(km)
        inv.a_plus.append(ap)
        inv.a_minus.append(am)
        inv.kappa.append(0.5 * (ap + am))
        inv.mu.append(0.5 * np.abs(ap - am))
        inv.K_perp.append(Kp)
        inv.B2.append(B2)
        inv.rho.append(rho)
        inv.sigma.append(sig)
        if r < m:
            inv.b.append(np.sqrt(2.0 ** r / (1 + rho)) * ap)
        else:
            inv.b.append(np.sqrt(B2))
        inv.hopf.append(fr)

        # magnitude gate: |f_r|^2 against the norm route, scaled by the
        # norm-only part (the difference itself vanishes on circles)
        F = metric.F
        scale4 = (F ** (2 * r + 2) / 2.0 ** (2 * r + 4)) * B2 ** 2
        rhs = (F ** (2 * r + 2) / 2.0 ** (2 * r + 4)) * \
            np.clip(B2 ** 2 - 4.0 ** r * Kp ** 2, 0.0, None)
        lhs = np.abs(fr) ** 2
        ref = np.max(scale4[mask]) if mask.any() else 1.0
        dev = np.max(np.abs(lhs - rhs)[mask]) / (ref + 1e-300) if mask.any() else 0.0
        if dev > 1e-8:
            raise InternalConsistencyError(
                f"squared magnitude of the level-{r} quadratic differential "
                f"disagrees with the norm route (relative {dev:.3e})")

    for r in range(1, m + 1):
        B2_prev = inv.B2[r - 2] if r >= 2 else None
        B2_next = inv.B2[r] if r < m else np.zeros_like(inv.B2[r - 1])
        Kp_prev = inv.K_perp[r - 2] if r >= 2 else None
        inv.K_star.append(intrinsic_normal_curvature(
            inv.K_perp[r - 1], B2_prev, B2_next, r, K_perp_prev=Kp_prev))
    return inv
