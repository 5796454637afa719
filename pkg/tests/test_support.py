import numpy as np
import pytest

from fbmcf.errors import ChartRangeError
from fbmcf.support import (
    SupportPatch,
    chart_coords,
    in_complementary_ball,
    project_and_distance,
    pullback_metric_connection,
    reflect,
    tubular_map,
    verify_kappa_condition,
)


@pytest.fixture(scope="module")
def flat():
    return SupportPatch.flat()


@pytest.fixture(scope="module")
def parab():
    return SupportPatch.paraboloid(1.0)


@pytest.fixture(scope="module")
def cap():
    return SupportPatch.sphere_cap(2.0, kappa=1.0, chart_radius=0.5)


def test_tubular_map_flat_identity(flat):
    Y = np.array([0.3, 0.2, -0.1])
    assert np.allclose(tubular_map(flat, Y), Y)


def test_tubular_map_paraboloid_vertex(parab):
    # phi = y1^2/2 lifts (1, 0, 0) onto the surface point (1, 0.5, 0)
    X = tubular_map(parab, [1.0 - 1e-9, 0.0, 0.0])
    assert np.allclose(X, [1.0, 0.5, 0.0], atol=1e-6)


def test_tubular_map_base_normal(parab):
    assert np.allclose(tubular_map(parab, [0.0, 0.5, 0.0]), [0.0, 0.5, 0.0])


def test_tubular_map_range_error(flat):
    with pytest.raises(ChartRangeError):
        tubular_map(flat, [11.0, 0.0, 0.0])


def test_project_flat(flat):
    proj, d, grad = project_and_distance(flat, np.array([1.0, 0.7, 2.0]))
    assert np.allclose(proj, [1.0, 0.0, 2.0])
    assert abs(d - 0.7) < 1e-12
    assert np.allclose(grad, [0.0, 1.0, 0.0])


def test_project_round_trip(parab):
    X = tubular_map(parab, [0.4, 0.3, 0.0])
    _, d, _ = project_and_distance(parab, X)
    assert abs(d - 0.3) < 1e-10


def test_project_fixed_point(parab):
    X = tubular_map(parab, [0.4, 0.0, 0.1])
    proj, d, _ = project_and_distance(parab, X)
    assert np.allclose(proj, X, atol=1e-10)
    assert abs(d) < 1e-10


def test_reflect_flat(flat):
    assert np.allclose(reflect(flat, np.array([1.0, 0.7, 2.0])), [1.0, -0.7, 2.0])


def test_reflect_chart_commutation(parab):
    X = tubular_map(parab, [0.4, 0.3, 0.0])
    assert np.allclose(reflect(parab, X), tubular_map(parab, [0.4, -0.3, 0.0]),
                       atol=1e-9)


def test_reflect_involution(parab):
    rng = np.random.default_rng(1)
    Y = rng.uniform(-0.3, 0.3, size=(20, 3))
    X = tubular_map(parab, Y)
    assert np.max(np.abs(reflect(parab, reflect(parab, X)) - X)) < 1e-9


def test_reflect_surface_fixed(parab):
    X = tubular_map(parab, [0.3, 0.0, -0.2])
    assert np.allclose(reflect(parab, X), X, atol=1e-10)


def test_complementary_ball_contained(flat):
    # B_r(P) inside the domain: the complementary ball is empty
    P = np.array([0.0, 0.5, 0.0])
    X = np.array([[0.0, 0.4, 0.0], [0.0, 0.6, 0.0], [0.1, 0.5, 0.0]])
    assert not np.any(in_complementary_ball(flat, P, 0.3, X))


def test_complementary_ball_hit(flat):
    P = np.array([0.0, 0.2, 0.0])
    assert in_complementary_ball(flat, P, 0.5, np.array([0.0, 0.1, 0.0]))


def test_complementary_ball_outside_domain(flat):
    P = np.array([0.0, 0.2, 0.0])
    assert not in_complementary_ball(flat, P, 0.5, np.array([0.0, -0.1, 0.0]))


def test_pullback_flat(flat):
    h, G = pullback_metric_connection(flat, np.array([0.3, 0.2, -0.1]))
    assert np.allclose(h, np.eye(3))
    assert np.allclose(G, 0.0)


def test_pullback_paraboloid_h11(parab):
    h, _ = pullback_metric_connection(parab, np.array([0.2, 0.0, 0.0]))
    assert abs(h[0, 0] - 1.04) < 1e-12


def test_metric_normalization(cap):
    # h_22 = 1 and h_12 = h_32 = 0: the distance direction is orthonormal
    rng = np.random.default_rng(2)
    Y = rng.uniform(-0.2, 0.2, size=(30, 3))
    h, _ = pullback_metric_connection(cap, Y)
    assert np.max(np.abs(h[:, 1, 1] - 1.0)) < 1e-9
    assert np.max(np.abs(h[:, 0, 1])) < 1e-9
    assert np.max(np.abs(h[:, 2, 1])) < 1e-9


def test_connection_matches_metric_derivatives(cap):
    # Gamma^k_ij = 1/2 h^{kl} (d_i h_jl + d_j h_il - d_l h_ij), via central FD
    Y0 = np.array([0.1, 0.05, -0.08])
    h0, G0 = pullback_metric_connection(cap, Y0)
    eps = 1e-6
    dh = np.zeros((3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = eps
        hp, _ = pullback_metric_connection(cap, Y0 + e)
        hm, _ = pullback_metric_connection(cap, Y0 - e)
        dh[k] = (hp - hm) / (2 * eps)
    hinv = np.linalg.inv(h0)
    # T[i,j,l] = d_i h_jl + d_j h_il - d_l h_ij
    T = dh + dh.transpose(1, 0, 2) - dh.transpose(1, 2, 0)
    G_ref = 0.5 * np.einsum("kl,ijl->kij", hinv, T)
    assert np.max(np.abs(G0 - G_ref)) < 1e-6


def test_scaling_commutes(cap):
    lam = 2.5
    scaled = cap.rescale(lam)
    assert abs(scaled.kappa - lam * cap.kappa) < 1e-14
    Y = np.array([0.2, 0.1, -0.1])
    X = tubular_map(cap, Y)
    assert np.allclose(tubular_map(scaled, Y / lam), X / lam, atol=1e-9)


def test_chart_coords_inverse(cap):
    Y = np.array([0.15, 0.1, 0.2])
    X = tubular_map(cap, Y)
    assert np.allclose(chart_coords(cap, X), Y, atol=1e-10)


def test_kappa_condition_flat(flat):
    assert verify_kappa_condition(flat).passed


def test_kappa_condition_fail():
    # |Hess phi| = 1 exceeds the declared kappa = 0.5
    patch = SupportPatch.paraboloid(1.0, kappa=0.5, chart_radius=1.0)
    rep = verify_kappa_condition(patch)
    assert not rep.passed
    assert rep.max_hess > 0.5


def test_kappa_condition_sphere_cap(cap):
    rep = verify_kappa_condition(cap)
    assert rep.passed
    assert rep.min_mean_curvature > 0.0
