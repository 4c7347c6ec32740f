"""Osculating flag of a conformal minimal immersion.

At each node the complexified flag is grown by projecting successive pure
Wirtinger derivatives of the immersion onto the orthogonal complement of
everything seen so far.  The projection of ``d^{r+1} f`` is the top
component of the (r+1)-th fundamental form; its real and imaginary parts
span the r-th normal plane.  Rank decisions use a singular-value gate
relative to the largest singular value of the node's full jet matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chart import ChartGrid, JetTable, MetricField
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import FrameNormalizationError, SubstantialityError

#: stencil halfwidth consumed by the analysis on open charts (jets plus one
#: derived-field derivative layer)
ANALYSIS_BAND = 8


@dataclass
class FlagDecomposition:
    """Per-node orthonormal data of the higher normal bundles."""

    n: int
    m: int
    jet: JetTable
    metric: MetricField
    expected_ranks: list
    ranks: np.ndarray             # (m, ny, nx) detected ranks
    generic_mask: np.ndarray      # (ny, nx)
    btop: list                    # r-1 -> (ny, nx, dim) complex projections
    frames: list                  # r-1 -> (ny, nx, dim, rank) real bases
    basis: np.ndarray             # (ny, nx, dim, ncols) complex flag basis
    aligned: bool = False
    notes: list = field(default_factory=list)

    @property
    def chart(self) -> ChartGrid:
        return self.jet.chart

    def frame_pair(self, r: int):
        """Real orthonormal basis of the r-th normal plane (1-based r)."""
        return self.frames[r - 1]

    def substantial_dimension(self) -> int:
        """Ambient dimension actually spanned: 2 + sum of bundle ranks."""
        band = 0 if self.chart.periodic else ANALYSIS_BAND
        sel = self.chart.interior_mask(band)
        total = 2
        for r in range(1, self.m + 1):
            med = int(np.median(self.ranks[r - 1][sel]))
            total += med
            if med < self.expected_ranks[r - 1]:
                break
        return total


def _mgs_insert(basis, v):
    """Project v against the orthonormal columns of basis (twice, for
    numerical safety) and return the residual."""
    out = v.copy()
    for _ in range(2):
        coef = np.einsum("...dk,...d->...k", np.conj(basis), out)
        out = out - np.einsum("...dk,...k->...d", basis, coef)
    return out


def osculating_flag(jet: JetTable, metric: MetricField,
                    tol: Tolerances = DEFAULT_TOLERANCES,
                    strict: bool = True,
                    rank_gate: float | None = None,
                    n_eff: int | None = None) -> FlagDecomposition:
    """Build the flag up to the top normal bundle of the declared ambient.

    Raises SubstantialityError (when strict) if some bundle never attains
    its expected rank, i.e. the surface fits a lower-dimensional sphere.
    `n_eff` overrides the declared dimension when a reduced tower is wanted
    (the jets keep their ambient coordinates).
    """
    chart = jet.chart
    n = n_eff if n_eff is not None else jet.n
    m = (n - 1) // 2
    if m < 1:
        raise SubstantialityError(
            f"ambient dimension {n} leaves no normal tower to build")
    gate = tol.rank_gate if rank_gate is None else rank_gate
    expected = [2] * m
    if n == 2 * m + 1:
        expected[m - 1] = 1

    f = jet.get(0, 0)
    df = jet.get(1, 0)
    dbf = jet.get(0, 1)
    ny, nx, dim = f.shape

    # reference scale: largest singular value of the full jet matrix
    cols = [f, df, dbf]
    for r in range(1, m + 1):
        cols.append(jet.get(r + 1, 0))
        cols.append(jet.get(0, r + 1))
    jetmat = np.stack(cols, axis=-1)
    ref = np.linalg.svd(jetmat, compute_uv=False)[..., 0]

    def normalize(v):
        nrm = np.linalg.norm(v, axis=-1, keepdims=True)
        return v / np.where(nrm > 0, nrm, 1.0)

    basis = np.stack([
        normalize(f),
        normalize(_mgs_insert(normalize(f)[..., None], df)),
    ], axis=-1)
    q = _mgs_insert(basis, dbf)
    basis = np.concatenate([basis, normalize(q)[..., None]], axis=-1)

    btop, frames, ranks = [], [], np.zeros((m, ny, nx), dtype=int)
    for r in range(1, m + 1):
        v = _mgs_insert(basis, jet.get(r + 1, 0))
        btop.append(v)
        planes = np.stack([v.real, -v.imag], axis=-1)   # (ny, nx, dim, 2)
        U, S, _ = np.linalg.svd(planes, full_matrices=False)
        rk = (S[..., 0] >= gate * ref).astype(int) + (S[..., 1] >= gate * ref)
        ranks[r - 1] = rk
        exp = expected[r - 1]
        if strict and not np.any(rk >= exp):
            raise SubstantialityError(
                f"normal bundle {r} never attains rank {exp}: the surface "
                f"spans a lower-dimensional sphere than the declared S^{n}")
        frames.append(U[..., :exp])
        # grow the complexified flag
        qv = normalize(v)
        basis = np.concatenate([basis, qv[..., None]], axis=-1)
        if exp == 2:
            w = _mgs_insert(basis, np.conj(v))
            basis = np.concatenate([basis, normalize(w)[..., None]], axis=-1)

    generic = np.ones((ny, nx), dtype=bool)
    for r in range(1, m + 1):
        generic &= ranks[r - 1] == expected[r - 1]
    band = 0 if chart.periodic else ANALYSIS_BAND
    generic &= chart.interior_mask(band)
    if strict and not generic.any():
        raise SubstantialityError("no generic nodes on the chart")

    return FlagDecomposition(n=n, m=m, jet=jet, metric=metric,
                             expected_ranks=expected, ranks=ranks,
                             generic_mask=generic, btop=btop,
                             frames=frames, basis=basis)


# -- frame smoothing ------------------------------------------------------


def _align_pair_to(ref, cur):
    """Re-gauge the 2-frame(s) `cur` in-plane to best match `ref`.

    Both arguments are (..., dim, 2); the full orthogonal group acts, so a
    handedness mismatch between neighbouring nodes is repaired as well.
    """
    A = np.einsum("...dk,...dl->...kl", cur, ref)
    U, _, Vt = np.linalg.svd(A)
    R = U @ Vt
    return np.einsum("...dk,...kl->...dl", cur, R)


def smooth_frame_alignment(flag: FlagDecomposition) -> FlagDecomposition:
    """Continuous node-to-node choice of the normal-plane bases.

    A first sweep aligns the leading valid column top-to-bottom, then every
    row is aligned left-to-right against its left neighbour (vectorized over
    rows).  Rank-1 bundles get a sign continuation.  Disconnected masks are
    aligned per component from fresh anchors.
    """
    mask = flag.generic_mask
    if not mask.any():
        return flag
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    i0, i1 = rows[0], rows[-1] + 1
    j0, j1 = cols[0], cols[-1] + 1
    if not mask[i0:i1, j0:j1].all():
        flag.notes.append("generic mask is not a full box; aligning over its "
                          "bounding box")
    new_frames = []
    for r in range(1, flag.m + 1):
        E = flag.frames[r - 1].copy()
        rank = E.shape[-1]
        if rank == 2:
            for i in range(i0 + 1, i1):    # anchor column, sequential
                E[i, j0] = _align_pair_to(E[i - 1, j0], E[i, j0])
            for j in range(j0 + 1, j1):    # rows, vectorized over y
                E[i0:i1, j] = _align_pair_to(E[i0:i1, j - 1], E[i0:i1, j])
        else:
            e = E[..., 0]
            for i in range(i0 + 1, i1):
                s = np.sign(np.sum(e[i, j0] * e[i - 1, j0]))
                e[i, j0] *= s if s != 0 else 1.0
            for j in range(j0 + 1, j1):
                s = np.sign(np.sum(e[i0:i1, j] * e[i0:i1, j - 1], axis=-1))
                e[i0:i1, j] *= np.where(s != 0, s, 1.0)[:, None]
            E = e[..., None]
        new_frames.append(E)
    flag.frames = new_frames
    flag.aligned = True
    return flag


# -- H components ---------------------------------------------------------


def h_components(flag: FlagDecomposition, metric: MetricField,
                 tol: Tolerances = DEFAULT_TOLERANCES) -> list:
    """Complex pairs (H_{2r+1}, H_{2r+2}) per bundle from the top projections.

    The second entry is identically zero for a rank-1 last bundle.  A
    consistency gate compares the squared norm of the (r+1)-th form computed
    from the H pair with the norm of the raw projection; failure indicates a
    bad frame or conformal-factor branch.
    """
    lam = metric.lam
    out = []
    for r in range(1, flag.m + 1):
        v = flag.btop[r - 1]
        E = flag.frames[r - 1]
        scale = 2.0 / lam ** (r + 1)
        hbar = np.einsum("...d,...dk->...k", v, E) * scale[..., None]
        H1 = np.conj(hbar[..., 0])
        H2 = np.conj(hbar[..., 1]) if E.shape[-1] == 2 else np.zeros_like(H1)
        # norm route 1: 2^r (|H1|^2 + |H2|^2); route 2: from the projection
        b2_h = 2.0 ** r * (np.abs(H1) ** 2 + np.abs(H2) ** 2)
        b2_v = 2.0 ** (r + 2) * np.sum(np.abs(v) ** 2, axis=-1) / lam ** (2 * (r + 1))
        mask = flag.generic_mask
        scale_ref = np.max(b2_v[mask]) if mask.any() else 1.0
        dev = np.max(np.abs(b2_h - b2_v)[mask]) / (scale_ref + 1e-300)
        if dev > 1e-8:
            raise FrameNormalizationError(
                f"H-component norm gate failed at bundle {r}: relative "
                f"deviation {dev:.3e}")
        out.append((H1, H2))
    return out


def flag_symmetry_residual(flag: FlagDecomposition,
                           tol: Tolerances = DEFAULT_TOLERANCES) -> list:
    """Dual-route check on the top projections.

    The projection of the chart derivative of the (r)-th top component onto
    the r-th normal bundle must reproduce the (r+1)-th top component; the
    residual is relative and evaluated on the generic mask.
    """
    chart = flag.chart
    out = []
    mask = flag.generic_mask
    for r in range(2, flag.m + 1):
        prev = flag.btop[r - 2]
        dprev = chart.diff(prev, 1, 0, tol)
        sub = flag.basis[..., :3 + 2 * (r - 1)]   # flag through bundle r-1
        proj = _mgs_insert(sub, dprev)
        cur = flag.btop[r - 1]
        num = np.linalg.norm(proj - cur, axis=-1)
        den = np.max(np.linalg.norm(cur, axis=-1)[mask]) if mask.any() else 1.0
        out.append(np.where(mask, num / (den + 1e-300), 0.0))
    return out
