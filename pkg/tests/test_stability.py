import math

import numpy as np
import pytest

from rkadapt.butcher import ButcherPair
from rkadapt.catalog import catalog_get, catalog_names
from rkadapt.stability import (DegeneratePointError, StabilityPolynomials,
                               boundary_samples, contains_region,
                               control_jacobian, control_stability_scan,
                               grid_boundary, spectral_radius,
                               stability_polynomials, trace_boundary)

polyval = np.polynomial.polynomial.polyval


def forward_euler_pair():
    return ButcherPair("euler", [[0.0]], [1.0], [0.0], [1.0, 0.0], q=1, qhat=1)


def classical_rk4_pair():
    A = [[0, 0, 0, 0], [0.5, 0, 0, 0], [0, 0.5, 0, 0], [0, 0, 1.0, 0]]
    b = [1 / 6, 1 / 3, 1 / 3, 1 / 6]
    bhat = [1 / 6, 1 / 3, 1 / 3, 1 / 6, 0.0]   # embedded = main (analysis only)
    return ButcherPair("rk4", A, b, [0, 0.5, 0.5, 1.0], bhat, q=4, qhat=4)


def test_rk4_stability_polynomial_is_exponential_series():
    polys = stability_polynomials(classical_rk4_pair())
    assert polys.main == pytest.approx([1, 1, 0.5, 1 / 6, 1 / 24], abs=1e-15)


def test_ssp33_difference_polynomial_structure():
    polys = stability_polynomials(catalog_get("SSP3(2)3"))
    assert polys.diff[:3] == pytest.approx([0.0, 0.0, 0.0], abs=1e-16)
    assert abs(polys.diff[3]) > 1e-3


def test_bs3_embedded_polynomial_uses_fsal_stage():
    polys = stability_polynomials(catalog_get("BS3(2)3 FSAL"))
    assert len(polys.embedded) - 1 == 4
    assert polys.embedded[4] != 0.0


@pytest.mark.parametrize("name", catalog_names())
def test_difference_vanishes_through_shared_order(name):
    scheme = catalog_get(name)
    polys = stability_polynomials(scheme)
    k = min(scheme.q, scheme.qhat)
    assert np.max(np.abs(polys.diff[:k + 1])) <= 1e-12
    assert polys.main[0] == 1.0


def test_forward_euler_boundary_is_unit_circle():
    polys = stability_polynomials(forward_euler_pair())
    trace = trace_boundary(polys, n_points=256)
    assert np.max(np.abs(np.abs(trace.points + 1.0) - 1.0)) <= 1e-9


def test_rk4_negative_real_axis_crossing():
    polys = stability_polynomials(classical_rk4_pair())
    # independent bisection for |R(x)| = 1 on the negative real axis
    f = lambda x: abs(polyval(x, polys.main)) - 1.0
    lo, hi = -3.0, -2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    trace = trace_boundary(polys, n_points=512)
    assert math.isclose(trace.points.real.min(), hi, abs_tol=5e-3)
    assert math.isclose(hi, -2.785, abs_tol=5e-3)


@pytest.mark.parametrize("name", ["BS5(4)7 FSAL", "RK3(2)5 3S*+", "SSP3(2)4"])
def test_boundary_residual_and_conjugate_symmetry(name):
    polys = stability_polynomials(catalog_get(name))
    trace = trace_boundary(polys, n_points=512)
    assert np.max(np.abs(np.abs(polyval(trace.points, polys.main)) - 1.0)) <= 1e-10
    pts = trace.points
    conj = np.conj(pts)
    dist = np.min(np.abs(conj[:, None] - pts[None, :]), axis=1)
    spacing = np.max(np.abs(np.diff(pts)))
    assert np.max(dist) <= 2.0 * spacing


def test_log_derivative_matches_finite_differences():
    # Re(z R'/R) is d log|R(z(1+h))| / dh at h = 0; compare against centered
    # differences of log|R|, which is branch-cut safe
    polys = stability_polynomials(catalog_get("BS5(4)7 FSAL"))
    trace = trace_boundary(polys, n_points=128)
    h = 1e-6
    for z in trace.points[::16]:
        if abs(polys.R(z)) < 1e-8:
            continue
        exact = (z * polys.Rprime(z) / polys.R(z)).real
        fd = (math.log(abs(polys.R(z * (1 + h)))) -
              math.log(abs(polys.R(z * (1 - h))))) / (2 * h)
        assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact))


def test_spectral_radius_three_ways():
    rng = np.random.default_rng(9)
    for _ in range(20):
        M = rng.standard_normal((6, 6))
        r_eig = spectral_radius(M, "eig")
        r_char = spectral_radius(M, "charpoly")
        r_pow = spectral_radius(M, "power")
        assert abs(r_eig - r_char) <= 1e-8 * max(1.0, r_eig)
        assert abs(r_eig - r_pow) <= 1e-8 * max(1.0, r_eig)


def test_control_jacobian_zero_beta_is_neutral():
    polys = stability_polynomials(catalog_get("BS3(2)3 FSAL"))
    z = trace_boundary(polys, n_points=256).points[40]
    J = control_jacobian(polys, z, (0.0, 0.0, 0.0), k=3)
    assert spectral_radius(J) == pytest.approx(1.0, abs=1e-10)


def test_control_jacobian_degenerate_point_raises():
    polys = stability_polynomials(catalog_get("BS3(2)3 FSAL"))
    with pytest.raises(DegeneratePointError):
        control_jacobian(polys, 0.0 + 0.0j, (0.6, -0.2, 0.0), k=3)


def test_bs5_pi34_unstable_near_negative_real_axis():
    scheme = catalog_get("BS5(4)7 FSAL")
    rep = control_stability_scan(scheme, (0.70, -0.40, 0.00), n_points=512)
    assert not rep.stable
    assert rep.max_rho > 1.0
    worst_z = max(rep.samples, key=lambda s: s[1])[0]
    assert worst_z.real < 0 and abs(worst_z.imag) < 0.2 * abs(worst_z.real)


def test_bs5_optimized_controller_is_stable():
    scheme = catalog_get("BS5(4)7 FSAL")
    rep = control_stability_scan(scheme, (0.28, -0.23, 0.00), n_points=512)
    assert rep.stable and rep.max_rho < 1.0


def test_bs3_classical_controller_is_stable():
    rep = control_stability_scan(catalog_get("BS3(2)3 FSAL"), (0.60, -0.20, 0.00))
    assert rep.stable


def test_rk35_fsal_published_controller_is_stable():
    rep = control_stability_scan(catalog_get("RK3(2)5 3S*+ FSAL"), (0.70, -0.23, 0.00))
    assert rep.stable


def test_contains_region_reflexive():
    polys = stability_polynomials(catalog_get("RK3(2)5 3S*+ FSAL"))
    same = StabilityPolynomials(main=polys.main, embedded=polys.main,
                                diff=polys.diff, s_eff=polys.s_eff)
    ok, violations = contains_region(same, same, n_grid=200)
    assert ok and len(violations) == 0


def test_bs3_embedded_region_contains_main():
    polys = stability_polynomials(catalog_get("BS3(2)3 FSAL"))
    ok, violations = contains_region(polys, polys, n_grid=400)
    assert ok, f"{len(violations)} violations"


def test_grid_boundary_fallback_on_unit_circle():
    polys = stability_polynomials(forward_euler_pair())
    pts = grid_boundary(polys, n_points=128)
    assert np.max(np.abs(np.abs(pts + 1.0) - 1.0)) <= 1e-8


def test_boundary_samples_exclude_origin_and_right_half_plane():
    z, r, e, keep = boundary_samples(catalog_get("BS5(4)7 FSAL"), n_points=512)
    assert np.all(z[keep].real <= 0.0)
    assert np.all(np.abs(r[keep]) >= 1e-3)


def test_control_stability_dense_map_consistent_with_scan():
    from rkadapt.stability import control_stability_map
    scheme = catalog_get("BS5(4)7 FSAL")
    Z, rho = control_stability_map(scheme, (0.70, -0.40, 0.00), n_grid=61)
    assert np.nanmax(rho) > 1.0
    # near the unstable boundary spot (~ -3.99) the map must exceed 1 too
    mask = (np.abs(Z.real + 3.9) < 0.5) & (np.abs(Z.imag) < 0.3)
    assert np.nanmax(rho[mask]) > 1.0
