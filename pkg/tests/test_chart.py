import numpy as np
import pytest

from minsurf.chart import (
    JetTable,
    build_chart,
    fornberg_weights,
    gauss_curvature,
    laplace_beltrami,
    metric_from_jet,
)
from minsurf.errors import (
    AccuracyError,
    ConfigurationError,
    ConformalityError,
)


def torus_chart(n=64, L=2 * np.pi):
    return build_chart("torus", L, L, n, n)


def test_build_chart_torus_spacing():
    ch = torus_chart(64)
    assert ch.nnodes == 64 * 64
    assert ch.hx == pytest.approx(2 * np.pi / 64)
    assert ch.xs[0] == 0.0
    assert ch.xs[-1] == pytest.approx(2 * np.pi - ch.hx)


def test_build_chart_open_has_endpoints():
    ch = build_chart("open-rectangle", 1.0, 1.0, 8, 8)
    assert ch.nnodes == 64
    assert ch.xs[-1] == pytest.approx(1.0)
    assert not ch.periodic


def test_build_chart_rejects_low_resolution():
    with pytest.raises(ConfigurationError):
        build_chart("torus", 2 * np.pi, 2 * np.pi, 4, 4)


def test_build_chart_rejects_bad_extent():
    with pytest.raises(ConfigurationError):
        build_chart("torus", -1.0, 2.0, 16, 16)


def test_fornberg_first_derivative_weights():
    # classic 3-point centered first derivative
    w = fornberg_weights(0.0, np.array([-1.0, 0.0, 1.0]), 1)
    assert np.allclose(w, [-0.5, 0.0, 0.5])


def test_spectral_d_of_plane_wave():
    ch = torus_chart(32)
    X, _ = ch.meshgrid()
    fld = np.exp(1j * X)
    out = ch.diff(fld, 1, 0)
    assert np.max(np.abs(out - 0.5j * fld)) < 1e-12


def test_derivative_of_constant_is_zero():
    ch = torus_chart(16)
    fld = np.full(ch.shape, 3.7)
    for (p, q) in [(1, 0), (0, 1), (1, 1), (2, 1)]:
        assert np.max(np.abs(ch.diff(fld, p, q))) < 1e-12


def test_spectral_mixed_derivative_sin_sin():
    ch = torus_chart(64)
    X, Y = ch.meshgrid()
    fld = np.sin(X) * np.sin(Y)
    got = ch.diff(fld, 1, 1)
    # d dbar = (1/4) Laplacian; Laplacian of sin x sin y is -2 sin x sin y
    want = -0.5 * np.sin(X) * np.sin(Y)
    assert np.max(np.abs(got - want)) < 1e-10


def test_spectral_exact_on_trig_polynomial():
    ch = torus_chart(32)
    X, Y = ch.meshgrid()
    fld = 0.3 * np.cos(3 * X + 2 * Y) - 1.2 * np.sin(X - 4 * Y)
    got = ch.diff(fld, 2, 0)
    dz = lambda a, b: 0.5j * (a - 1j * b)   # symbol of d on exp(i(ax+by))
    want = (dz(3, 2) ** 2 * 0.3 * np.exp(1j * (3 * X + 2 * Y))).real \
        + (dz(3, 2) ** 2 * 0.3 * np.exp(1j * (3 * X + 2 * Y))).real * 0
    # build the exact derivative by differentiating each wave
    w1 = 0.3 * 0.5 * (dz(3, 2) ** 2 * np.exp(1j * (3 * X + 2 * Y))
                      + dz(-3, -2) ** 2 * np.exp(-1j * (3 * X + 2 * Y)))
    w2 = -1.2 * (0.5 / 1j) * (dz(1, -4) ** 2 * np.exp(1j * (X - 4 * Y))
                              - dz(-1, 4) ** 2 * np.exp(-1j * (X - 4 * Y)))
    want = w1 + w2
    assert np.max(np.abs(got - want)) < 1e-12


def test_open_chart_stencil_accuracy():
    ch = build_chart("open-rectangle", 2.0, 2.0, 96, 96, x0=-1.0, y0=-1.0)
    X, Y = ch.meshgrid()
    fld = np.sin(2 * X) * np.cos(Y)
    got = ch.diff(fld, 1, 1)
    want = 0.25 * (-5.0) * np.sin(2 * X) * np.cos(Y)  # (1/4) Laplacian
    mask = ch.interior_mask(6)
    assert np.max(np.abs((got - want)[mask])) < 1e-9


def test_derivative_order_cap():
    ch = torus_chart(16)
    with pytest.raises(AccuracyError):
        ch.diff(np.ones(ch.shape), 6, 3)


def test_noisy_field_high_order_flagged():
    ch = torus_chart(64)
    rng = np.random.default_rng(0)
    fld = rng.standard_normal(ch.shape)
    with pytest.raises(AccuracyError):
        ch.diff(fld, 3, 2)


def test_shift_matches_analytic_translation():
    ch = torus_chart(32)
    X, Y = ch.meshgrid()
    fld = np.cos(2 * X + Y)
    d = 0.3 * ch.hx
    got = ch.shift(fld, d, axis=1)
    want = np.cos(2 * (X + d) + Y)
    assert np.max(np.abs(got - want)) < 1e-12


def test_shift_open_chart():
    ch = build_chart("open-rectangle", 2.0, 2.0, 64, 64)
    X, Y = ch.meshgrid()
    fld = np.exp(np.sin(X)) * np.cos(Y)
    d = -0.4 * ch.hy
    got = ch.shift(fld, d, axis=0)
    want = np.exp(np.sin(X)) * np.cos(Y + d)
    mask = ch.interior_mask(6)
    assert np.max(np.abs((got - want)[mask])) < 1e-10


# -- metric on the explicit product torus --------------------------------


def clifford_jets(n=64):
    """Hand-built jets of the product torus in S^3 (closed forms)."""
    ch = torus_chart(n)
    X, Y = ch.meshgrid()
    r = 1 / np.sqrt(2)
    jt = JetTable(chart=ch, n=3, order=2)

    def jet(p, q):
        # x-waves: d and dbar both multiply exp(+-ix) by (+-i/2)
        cxp = (0.5j) ** (p + q)
        cxm = (-0.5j) ** (p + q)
        cosx = 0.5 * (cxp * np.exp(1j * X) + cxm * np.exp(-1j * X))
        sinx = (0.5 / 1j) * (cxp * np.exp(1j * X) - cxm * np.exp(-1j * X))
        # y-waves: d multiplies exp(iy) by 1/2, dbar by -1/2 (and conversely)
        cyp = 0.5 ** p * (-0.5) ** q
        cym = (-0.5) ** p * 0.5 ** q
        cosy = 0.5 * (cyp * np.exp(1j * Y) + cym * np.exp(-1j * Y))
        siny = (0.5 / 1j) * (cyp * np.exp(1j * Y) - cym * np.exp(-1j * Y))
        return np.stack([r * cosx, r * sinx, r * cosy, r * siny], axis=-1)

    for (p, q) in [(0, 0), (1, 0), (2, 0), (1, 1)]:
        jt.put(p, q, jet(p, q))
    return ch, jt


def test_clifford_metric_is_constant():
    ch, jt = clifford_jets()
    met = metric_from_jet(jt)
    assert np.max(np.abs(met.lam - 1 / np.sqrt(2))) < 1e-12
    assert np.max(met.conformality) < 1e-12
    assert np.max(met.minimality) < 1e-10


def test_clifford_curvature_zero():
    ch, jt = clifford_jets()
    met = metric_from_jet(jt)
    assert np.max(np.abs(met.K)) < 1e-9
    assert np.max(np.abs(gauss_curvature(met))) < 1e-9


def test_nonconformal_input_rejected():
    ch, jt = clifford_jets()
    bad = JetTable(chart=ch, n=3, order=1)
    f = jt.get(0, 0)
    df = jt.get(1, 0)
    bad.put(0, 0, f)
    # stretch x-direction only: breaks conformality
    bad.put(1, 0, df * np.array([2.0, 2.0, 1.0, 1.0]))
    with pytest.raises(ConformalityError):
        metric_from_jet(bad)


def test_laplace_beltrami_flat_plane_wave():
    ch, jt = clifford_jets()
    met = metric_from_jet(jt)
    X, _ = ch.meshgrid()
    # with F = 1/2, Delta sin x = (1/F) * (-sin x) = -2 sin x
    got = laplace_beltrami(ch, np.sin(X), met)
    assert np.max(np.abs(got + 2.0 * np.sin(X))) < 1e-10


def test_laplace_beltrami_of_log_lambda_matches_minus_K():
    ch, jt = clifford_jets()
    met = metric_from_jet(jt)
    got = laplace_beltrami(ch, np.log(met.lam), met)
    assert np.max(np.abs(got + met.K)) < 1e-9


def test_laplace_beltrami_constant():
    ch, jt = clifford_jets()
    met = metric_from_jet(jt)
    assert np.max(np.abs(laplace_beltrami(ch, np.full(ch.shape, 2.0), met))) < 1e-12


def test_jets_from_samples_match_closed_form():
    ch, jt = clifford_jets()
    num = JetTable.from_samples(ch, jt.f, order=2)
    for (p, q) in [(1, 0), (2, 0), (1, 1)]:
        assert np.max(np.abs(num.get(p, q) - jt.get(p, q))) < 1e-11
