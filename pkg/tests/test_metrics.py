"""Metric families: profiles, Christoffels, curvature, the R_V operator."""

import numpy as np
import pytest

from h2xr.errors import DomainError
from h2xr.hyperbolic import HPoint
from h2xr.metrics import (
    ChartPoint,
    MetricSpec,
    WarpProfile,
    bianchi_residual,
    christoffel_at,
    christoffel_many,
    curvature_at,
    curvature_tensor_many,
    get_potential,
    metric_at,
    metric_many,
    r_v_operator,
    warp_profile_eval,
)

EPS = 0.1
WARP = MetricSpec.warped(eps=EPS)
CENTER = ChartPoint(0.0, 1.0, 0.0)
RV_CENTER = 2 * EPS / (1 + EPS / 2)  # 0.19047619...


def seeded_points(seed, n, y_range=(0.4, 3.0)):
    rng = np.random.default_rng(seed)
    return np.column_stack([
        rng.uniform(-2.0, 2.0, n), rng.uniform(*y_range, n), rng.uniform(0.0, 1.0, n)
    ])


# ---------------------------------------------------------------------------
# warp profile
# ---------------------------------------------------------------------------

def test_profile_center_values():
    f, fp, fpp = warp_profile_eval(WARP.warp, 0.0)
    assert (f, fp, fpp) == (1.05, 0.0, -0.2)


def test_profile_outside_blend():
    assert warp_profile_eval(WARP.warp, 0.75) == (1.0, 0.0, 0.0)
    assert warp_profile_eval(WARP.warp, 5.0) == (1.0, 0.0, 0.0)


def test_profile_derivatives_match_finite_differences():
    # oracle: central differences of f itself at r = 0.6 (inside the blend)
    prof = WARP.warp
    r = 0.6
    f, fp, fpp = warp_profile_eval(prof, r)
    h = 1e-6
    f_p = warp_profile_eval(prof, r + h)[0]
    f_m = warp_profile_eval(prof, r - h)[0]
    assert fp == pytest.approx((f_p - f_m) / (2 * h), abs=1e-7)
    h = 1e-4
    f_p = warp_profile_eval(prof, r + h)[0]
    f_m = warp_profile_eval(prof, r - h)[0]
    assert fpp == pytest.approx((f_p - 2 * f + f_m) / (h * h), abs=1e-5)


def test_profile_c2_at_junctions():
    prof = WARP.warp
    for r_j in (prof.r0, prof.r1):
        left = warp_profile_eval(prof, r_j - 1e-9)
        right = warp_profile_eval(prof, r_j + 1e-9)
        assert left == pytest.approx(right, abs=1e-7)


def test_profile_positive_and_validation():
    for eps in (0.05, 0.1, 0.2, 1.0):
        prof = WarpProfile(HPoint(0, 1), eps)
        f = prof.eval_many(np.linspace(0, 1.0, 500))[0]
        assert np.all(f > 0)
    with pytest.raises(DomainError):
        WarpProfile(HPoint(0, 1), -0.1)
    with pytest.raises(DomainError):
        WarpProfile(HPoint(0, 1), 0.1, r0=0.8, r1=0.5)
    with pytest.raises(DomainError):
        warp_profile_eval(WARP.warp, -1.0)


# ---------------------------------------------------------------------------
# metric components
# ---------------------------------------------------------------------------

def test_metric_product():
    g = metric_at(MetricSpec.product(2.0), ChartPoint(3.0, 1.0, 0.5))
    assert np.allclose(g, np.diag([1.0, 1.0, 4.0]))


def test_metric_warped_center():
    g = metric_at(WARP, CENTER)
    assert g[2, 2] == pytest.approx(1.1025, abs=1e-15)  # (1 + eps/2)^2


def test_metric_twisted_alpha_zero_is_product():
    tw = MetricSpec.twisted(0.0, "log_y")
    pts = seeded_points(0, 20)
    assert np.allclose(metric_many(tw, pts), metric_many(MetricSpec.product(1.0), pts))


def test_metric_rejects_bad_points():
    with pytest.raises(DomainError):
        metric_many(WARP, np.array([[0.0, -1.0, 0.0]]))
    with pytest.raises(DomainError):
        ChartPoint(0.0, 0.0, 0.0)


# ---------------------------------------------------------------------------
# christoffels
# ---------------------------------------------------------------------------

def test_christoffel_product_closed_form():
    g = christoffel_at(MetricSpec.product(1.0), ChartPoint(0.0, 1.0, 0.0))
    expect = np.zeros((3, 3, 3))
    expect[1, 0, 0] = 1.0
    expect[0, 0, 1] = expect[0, 1, 0] = -1.0
    expect[1, 1, 1] = -1.0
    assert np.allclose(g, expect, atol=1e-15)
    assert np.max(np.abs(g[2])) == 0.0  # fiber row identically zero


def test_christoffel_warped_vanishes_at_critical_point():
    g = christoffel_at(WARP, CENTER)
    assert np.max(np.abs(g[0:2, 2, 2])) <= 1e-12  # Gamma^i_tt = -f grad^i f = 0


def test_christoffel_twisted_first_order():
    # oracle: Gamma^i_tt = -alpha g^{ij} d_j h + O(alpha^2), by hand for both
    # registered potentials
    alpha = 1e-3
    for name in ("log_y", "x"):
        spec = MetricSpec.twisted(alpha, name)
        for p in (ChartPoint(0.0, 1.0, 0.0), ChartPoint(0.5, 1.7, 0.2)):
            gam = christoffel_at(spec, p)
            hx, hy = get_potential(name).grad(p.x, p.y)
            expect_x = -alpha * p.y**2 * float(hx)
            expect_y = -alpha * p.y**2 * float(hy)
            assert gam[0, 2, 2] == pytest.approx(expect_x, abs=1e-5)
            assert gam[1, 2, 2] == pytest.approx(expect_y, abs=1e-5)


def test_christoffel_symmetric_lower_indices():
    for spec in (MetricSpec.product(2.0), WARP, MetricSpec.twisted(1e-2, "log_y")):
        pts = seeded_points(1, 30)
        gam = christoffel_many(spec, pts)
        assert np.max(np.abs(gam - np.swapaxes(gam, -2, -1))) <= 1e-10


def test_metric_compatibility_all_kinds():
    # nabla g = 0: d_k g_ij = Gamma^l_{ki} g_lj + Gamma^l_{kj} g_il
    for spec in (MetricSpec.product(2.0), WARP, MetricSpec.twisted(1e-2, "log_y")):
        pts = seeded_points(2, 100)
        gam = christoffel_many(spec, pts)
        g = metric_many(spec, pts)
        h = 1e-6 * pts[:, 1]
        worst = 0.0
        for k in range(3):
            shift = np.zeros_like(pts)
            shift[:, k] = h
            dg = (metric_many(spec, pts + shift) - metric_many(spec, pts - shift))
            dg /= (2.0 * h)[:, None, None]
            term = np.einsum("bli,blj->bij", gam[:, :, k, :], g) + np.einsum(
                "blj,bil->bij", gam[:, :, k, :], g
            )
            worst = max(worst, float(np.max(np.abs(dg - term))))
        assert worst <= 1e-6


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def test_curvature_product_sectionals_and_ricci_seeded():
    spec = MetricSpec.product(1.7)
    for row in seeded_points(3, 50):
        p = ChartPoint(*row)
        cs = curvature_at(spec, p)
        assert cs.sectionals[(0, 1)] == pytest.approx(-1.0, abs=1e-6)
        assert cs.sectionals[(0, 2)] == pytest.approx(0.0, abs=1e-6)
        assert cs.sectionals[(1, 2)] == pytest.approx(0.0, abs=1e-6)
        g = metric_at(spec, p)
        orth = cs.ricci / np.sqrt(np.outer(np.diag(g), np.diag(g)))
        assert np.allclose(orth, np.diag([-1.0, -1.0, 0.0]), atol=1e-6)


def test_curvature_symmetries_and_bianchi_all_kinds():
    for spec in (MetricSpec.product(1.0), WARP, MetricSpec.twisted(1e-2, "log_y")):
        pts = seeded_points(4, 25)
        r4, presym = curvature_tensor_many(spec, pts)
        assert np.max(np.abs(r4 + np.swapaxes(r4, 1, 2))) <= 1e-6
        assert np.max(np.abs(r4 + np.swapaxes(r4, 3, 4))) <= 1e-6
        pair = np.moveaxis(r4, (1, 2, 3, 4), (3, 4, 1, 2))
        assert np.max(np.abs(r4 - pair)) <= 1e-6
        assert bianchi_residual(r4) <= 1e-6
        assert np.max(presym) <= 1e-6


def test_curvature_warped_center_mixed_sectional():
    cs = curvature_at(WARP, CENTER)
    assert cs.sectionals[(0, 2)] == pytest.approx(RV_CENTER, rel=1e-5)
    assert cs.sectionals[(1, 2)] == pytest.approx(RV_CENTER, rel=1e-5)
    assert cs.sectionals[(0, 1)] == pytest.approx(-1.0, abs=1e-5)


def test_curvature_twisted_mixed_component():
    # R_xtxt = -f Hess_xx(f) -> +alpha/y^2 at first order for h = log y
    alpha = 1e-3
    cs = curvature_at(MetricSpec.twisted(alpha, "log_y"), ChartPoint(0.0, 1.0, 0.0))
    assert cs.riemann[0, 2, 0, 2] == pytest.approx(alpha, rel=0.02)


def test_curvature_twisted_converges_to_product_linearly():
    pts = seeded_points(5, 10)
    r4_prod, _ = curvature_tensor_many(MetricSpec.product(1.0), pts)
    errs = []
    for alpha in (1e-2, 1e-3, 1e-4):
        r4, _ = curvature_tensor_many(MetricSpec.twisted(alpha, "log_y"), pts)
        errs.append(float(np.max(np.abs(r4 - r4_prod))))
    assert errs[0] > errs[1] > errs[2]
    # O(alpha): successive ratios track the 10x amplitude steps
    assert errs[0] / errs[1] == pytest.approx(10.0, rel=0.35)
    assert errs[1] / errs[2] == pytest.approx(10.0, rel=0.35)


# ---------------------------------------------------------------------------
# R_V operator
# ---------------------------------------------------------------------------

def test_r_v_product_zero():
    for row in seeded_points(6, 20):
        assert np.max(np.abs(r_v_operator(MetricSpec.product(1.0), ChartPoint(*row)))) <= 1e-9


def test_r_v_warped_center_eigenvalue():
    rv = r_v_operator(WARP, CENTER)
    eig = np.linalg.eigvalsh(rv)
    assert eig == pytest.approx([RV_CENTER, RV_CENTER], rel=1e-5)
    assert eig.max() > 0  # positive mixed curvature at the bump


def test_r_v_warped_outside_bump_zero():
    far = ChartPoint(3.0, 1.0, 0.0)  # hyperbolic distance from center > r1
    assert np.max(np.abs(r_v_operator(WARP, far))) <= 1e-9


def test_spec_validation():
    with pytest.raises(DomainError):
        MetricSpec(kind="Spherical")
    with pytest.raises(DomainError):
        MetricSpec.product(-1.0)
    with pytest.raises(DomainError):
        MetricSpec(kind="Warped")
    with pytest.raises(DomainError):
        MetricSpec.twisted(1e-3, "unknown_potential")
